import dataclasses
from fractions import Fraction

import pytest
from hypothesis import given, strategies as st

from steinercover import (ArborescenceSolution, CoverSolution, DstInstance, LabelCoverInstance,
                          brute_force_dst, brute_force_set_cover, leafify, set_cover_as_dst, validate)
from steinercover.generators import gen_dst, gen_label_cover, gen_set_cover
from steinercover.instances import as_fraction, strip_added_leaves


def test_float_costs_become_exact_rationals():
    assert as_fraction(0.1) == Fraction(1, 10)
    assert as_fraction("3/4") == Fraction(3, 4)


def test_build_collapses_parallel_arcs_and_self_loops():
    d = DstInstance.build(3, [(0, 1, 5), (0, 1, 2), (1, 1, 1), (1, 2, 1)], 0, [2])
    assert d.arcs == ((0, 1, Fraction(2)), (1, 2, Fraction(1)))


class TestValidate:
    def test_uncoverable_element(self):
        sc = gen_set_cover(4, 3, seed=0)
        holed = dataclasses.replace(sc, sets=tuple((c, tuple(e for e in m if e != 3)) for c, m in sc.sets))
        assert validate(holed).violations == ["coverability"]

    def test_unreachable_terminal(self):
        d = DstInstance.build(3, [(0, 1, 1)], 0, [2])
        assert validate(d).violations == ["reachability"]

    def test_biregular_label_cover_passes(self):
        lc = gen_label_cover(3, 3, 2, 2, 2, seed=4)
        assert lc.is_bi_regular
        assert validate(lc).ok

    @pytest.mark.parametrize("mutate, name", [
        (lambda sc: dataclasses.replace(sc, sets=((Fraction(-1), (0, 1)),) + sc.sets[1:]), "cost"),
        (lambda sc: dataclasses.replace(sc, sets=((Fraction(1), (1, 0)),) + sc.sets[1:]), "member-order"),
        (lambda sc: dataclasses.replace(sc, sets=sc.sets + ((Fraction(1), (9,)),)), "member-range"),
    ])
    def test_set_cover_mutations(self, abc, mutate, name):
        assert validate(abc).ok
        assert validate(mutate(abc)).violations == [name]

    @pytest.mark.parametrize("mutate, name", [
        (lambda d: dataclasses.replace(d, arcs=d.arcs + ((2, 2, Fraction(1)),)), "self-loop"),
        (lambda d: dataclasses.replace(d, arcs=d.arcs + ((0, 1, Fraction(7)),)), "parallel-arc"),
        (lambda d: dataclasses.replace(d, arcs=d.arcs + ((0, 9, Fraction(1)),)), "vertex-range"),
        (lambda d: dataclasses.replace(d, arcs=((0, 1, Fraction(-2)),) + d.arcs[1:]), "cost"),
        (lambda d: dataclasses.replace(d, root=7), "root-range"),
        (lambda d: dataclasses.replace(d, terminals=(4, 3)), "terminal-order"),
        (lambda d: dataclasses.replace(d, terminals=(3, 11)), "terminal-range"),
    ])
    def test_dst_mutations(self, diamond, mutate, name):
        assert validate(diamond).ok
        assert name in validate(mutate(diamond)).violations

    @pytest.mark.parametrize("mutate, name", [
        (lambda lc: dataclasses.replace(lc, projections=lc.projections[:-1]), "projection-count"),
        (lambda lc: dataclasses.replace(lc, projections=((0,),) + lc.projections[1:]), "projection-length"),
        (lambda lc: dataclasses.replace(lc, projections=((0, 5),) + lc.projections[1:]), "projection-range"),
        (lambda lc: dataclasses.replace(lc, edges=(lc.edges[0],) + lc.edges[:-1]), "duplicate-edge"),
        (lambda lc: dataclasses.replace(lc, edges=((9, 0),) + lc.edges[1:]), "edge-range"),
        (lambda lc: dataclasses.replace(lc, a_degree=lc.a_degree + 1), "bi-regular"),
    ])
    def test_label_cover_mutations(self, mutate, name):
        lc = gen_label_cover(3, 3, 2, 2, 2, seed=1)
        assert validate(lc).ok
        assert name in validate(mutate(lc)).violations

    def test_unknown_kind_does_not_raise(self):
        assert not validate(object()).ok


class TestLeafify:
    def test_non_leaf_terminal_gets_zero_cost_leaf(self):
        d = DstInstance.build(4, [(0, 1, 1), (1, 2, 1), (1, 3, 1)], 0, [1, 2])
        out = leafify(d)
        assert out.vertex_count == 5
        assert (1, 4, Fraction(0)) in out.arcs
        assert out.terminals == (2, 4)
        assert out.is_leafified()

    def test_leaf_terminals_unchanged(self, diamond):
        assert leafify(diamond) is diamond

    @given(seed=st.integers(0, 10**6))
    def test_idempotent(self, seed):
        once = leafify(gen_dst(7, 3, seed))
        assert leafify(once) == once

    def test_opt_unchanged_on_random_instances(self):
        for seed in range(50):
            d = gen_dst(8, 3, seed, arc_count=13)
            before = brute_force_dst(d).cost
            after = leafify(d)
            sol = brute_force_dst(after)
            assert sol.cost == before
            assert strip_added_leaves(sol, d.vertex_count).is_valid(d)


class TestSetCoverAsDst:
    def test_single_set(self):
        sc = dataclasses.replace(gen_set_cover(2, 1, seed=0), sets=((Fraction(3), (0, 1)),))
        d = set_cover_as_dst(sc)
        assert d.vertex_count == 4
        assert brute_force_dst(d).cost == 3

    def test_abc_optimum(self, abc):
        assert brute_force_dst(set_cover_as_dst(abc)).cost == 2

    @given(n=st.integers(1, 8), m=st.integers(1, 5), seed=st.integers(0, 10**6))
    def test_shape(self, n, m, seed):
        sc = gen_set_cover(n, m, seed)
        d = set_cover_as_dst(sc)
        assert d.vertex_count == 1 + m + n
        assert d.is_acyclic()
        assert d.is_leafified()

    def test_opt_matches_on_random_instances(self):
        for seed in range(100):
            sc = gen_set_cover(1 + seed % 10, 1 + seed % 6, seed)
            assert brute_force_dst(set_cover_as_dst(sc), max_arcs=80).cost == brute_force_set_cover(sc).cost


class TestSolutions:
    def test_cover_certificate(self, abc):
        assert CoverSolution.of(abc, [0, 1]).problems(abc) == []
        assert CoverSolution.of(abc, [0]).problems(abc) == ["cover"]
        assert CoverSolution(tuple([0, 1]), Fraction(5)).problems(abc) == ["cost"]

    def test_arborescence_certificate(self, diamond):
        good = ArborescenceSolution.of([(0, 1, 1), (1, 3, 1), (1, 4, 5)])
        assert good.is_valid(diamond)
        two_parents = ArborescenceSolution.of([(0, 1, 1), (0, 2, 1), (1, 3, 1), (2, 3, 5), (2, 4, 1)])
        assert "in-degree" in two_parents.problems(diamond)
        missing = ArborescenceSolution.of([(0, 1, 1), (1, 3, 1)])
        assert "terminal-coverage" in missing.problems(diamond)

    def test_label_cover_degree_metadata(self):
        lc = LabelCoverInstance.build(2, 1, 2, 2, [(1, 0), (0, 0)], [[0, 1], [1, 0]])
        assert (lc.a_degree, lc.b_degree) == (1, 2)
        assert lc.edges == ((0, 0), (1, 0))
        assert lc.incoming_index == (0, 1)
