import itertools
import math
from fractions import Fraction

import pytest
from hypothesis import given, strategies as st

from steinercover import (ArborescenceSolution, BoundedCoverView, DstInstance, NoCoverableTerminal,
                          UnreachableTerminal, aligned_phi_core, assemble, brute_force_dst,
                          brute_force_set_cover, check_phi_core, chvatal_bound, decomposition_audit,
                          dreyfus_wagner_directed, dst_approx, dst_approx_detailed, find_phi_core,
                          greedy_bounded_cover, greedy_set_cover, leafify, min_density_set, phi_for,
                          set_cover_as_dst)
from steinercover.dst_core import DensityPick, bounded_set_cover, core_cap
from steinercover.errors import BadParameters, UnreachableCoreVertex
from steinercover.generators import gen_dst, gen_set_cover
from steinercover.instances import set_node

from conftest import path_instance


def whole_tree(d):
    return ArborescenceSolution.of(d.arcs)


def random_tree(n, k, seed):
    """A random arborescence (the instance has exactly n-1 arcs) with k leaf terminals."""
    d = gen_dst(n, k, seed, arc_count=n - 1, leaf_terminals=True)
    return d, whole_tree(d)


def star(k):
    return DstInstance.build(k + 1, [(0, i, 1) for i in range(1, k + 1)], 0, range(1, k + 1))


def broom():
    # r -> a -> b -> c, a terminal hanging at a and at b, two at c; unit costs
    r, a, b, c, ta, tb, tc1, tc2 = range(8)
    arcs = [(r, a, 1), (a, b, 1), (b, c, 1), (a, ta, 1), (b, tb, 1), (c, tc1, 1), (c, tc2, 1)]
    return DstInstance.build(8, arcs, r, [ta, tb, tc1, tc2])


class TestPhiCore:
    def test_star_root_is_core(self):
        d = star(4)
        pc = find_phi_core(whole_tree(d), 0, d.terminals, 2)
        assert pc.core == (0,)
        assert sorted(p.terminals for p in pc.pieces) == [(1,), (2,), (3,), (4,)]

    def test_base_case_single_piece(self):
        d = path_instance([1, 1, 1], [3])
        pc = find_phi_core(whole_tree(d), 0, d.terminals, 1)
        assert pc.core == (0,) and len(pc.pieces) == 1

    @given(n=st.integers(3, 18), k=st.integers(1, 12), phi=st.integers(1, 3), seed=st.integers(0, 10**6))
    def test_witness_validates(self, n, k, phi, seed):
        d, tree = random_tree(n, min(k, n - 2), seed)
        pc = find_phi_core(tree, 0, d.terminals, phi)
        assert check_phi_core(pc, tree, 0, d.terminals) == []
        assert len(pc.core) <= math.ceil(len(d.terminals) / phi)

    @given(n=st.integers(3, 18), k=st.integers(1, 12), phi=st.integers(1, 3), seed=st.integers(0, 10**6))
    def test_aligned_witness_validates(self, n, k, phi, seed):
        d, tree = random_tree(n, min(k, n - 2), seed)
        pc = aligned_phi_core(tree, 0, d.terminals, phi)
        assert check_phi_core(pc, tree, 0, d.terminals, size_bound=False) == []

    def test_checker_catches_overloaded_piece(self):
        d = star(4)
        pc = find_phi_core(whole_tree(d), 0, d.terminals, 4)
        assert "piece-load" in check_phi_core(type(pc)(pc.core, 2, pc.pieces), whole_tree(d), 0, d.terminals)

    def test_non_leaf_terminal_rejected(self):
        d = path_instance([1, 1], [1, 2])
        with pytest.raises(ValueError):
            find_phi_core(whole_tree(d), 0, d.terminals, 1)


class TestMinDensity:
    def test_single_terminal(self):
        d = path_instance([2, 3])
        pick = min_density_set(BoundedCoverView(d, (0,), (2,), 1))
        assert pick.terminals == (2,) and pick.density == 5

    def test_set_cover_encoding_first_density(self):
        for seed in range(20):
            sc = gen_set_cover(6, 4, seed)
            d = set_cover_as_dst(sc)
            pick = min_density_set(BoundedCoverView(d, (d.root,), d.terminals, sc.max_set_size))
            assert pick.density == min(sc.cost(i) / len(sc.members(i)) for i in range(sc.set_count) if sc.members(i))

    def test_set_nodes_as_roots_make_elements_free(self, abc):
        d = set_cover_as_dst(abc)
        roots = tuple(set_node(i) for i in range(abc.set_count))
        assert min_density_set(BoundedCoverView(d, roots, d.terminals, 4)).density == 0

    @given(seed=st.integers(0, 10**6), phi=st.integers(1, 3))
    def test_matches_enumeration_over_subsets_and_roots(self, seed, phi):
        d = leafify(gen_dst(7, 4, seed, arc_count=12))
        roots = (0, 1, 2)
        uncovered = d.terminals[:4]
        best = None
        for r in range(1, phi + 1):
            for y in itertools.combinations(uncovered, r):
                for s in roots:
                    try:
                        c = brute_force_dst(d, root=s, terminals=y).cost
                    except UnreachableTerminal:
                        continue
                    if best is None or c / len(y) < best:
                        best = c / len(y)
        pick = min_density_set(BoundedCoverView(d, roots, uncovered, phi))
        assert pick.density == best
        assert pick.tree.cost == pick.density * len(pick.terminals)
        assert pick.tree.is_valid(d, root=pick.root, terminals=pick.terminals)

    def test_no_coverable_terminal(self):
        d = DstInstance.build(3, [(0, 1, 1), (0, 2, 1)], 0, [2])
        with pytest.raises(NoCoverableTerminal):
            min_density_set(BoundedCoverView(d, (1,), (2,), 1))

    def test_uncovered_must_be_terminals(self):
        d = path_instance([1, 1])
        with pytest.raises(ValueError):
            min_density_set(BoundedCoverView(d, (0,), (1,), 1))


class TestGreedyBoundedCover:
    def test_path_single_pick(self):
        d = path_instance([1, 1, 1, 1], [2, 4])
        picks = greedy_bounded_cover(BoundedCoverView(leafify(d), (0,), leafify(d).terminals, 2))
        assert len(picks) == 1

    def test_abc_matches_set_greedy(self, abc):
        # phi = 2 keeps A and B from being merged into one pick
        d = set_cover_as_dst(abc)
        picks = greedy_bounded_cover(BoundedCoverView(d, (d.root,), d.terminals, 2))
        used = [sorted(v for _, v, _ in p.tree.arcs if 1 <= v <= abc.set_count) for p in picks]
        assert used == [[set_node(i)] for i in greedy_set_cover(abc)[1].chosen]

    @given(seed=st.integers(0, 10**6), phi=st.integers(1, 3))
    def test_picks_partition_terminals(self, seed, phi):
        d = leafify(gen_dst(9, 5, seed))
        picks = greedy_bounded_cover(BoundedCoverView(d, (0, 1, 2), d.terminals, phi))
        got = sorted(t for p in picks for t in p.terminals)
        assert got == list(d.terminals)
        assert len(picks) <= len(d.terminals)
        assert all(len(p.terminals) <= phi for p in picks)


class TestAssemble:
    def test_root_core_is_union(self):
        d = path_instance([1, 1], [2])
        pick = min_density_set(BoundedCoverView(d, (0,), (2,), 1))
        sol = assemble(d, (0,), [pick])
        assert sol.cost == pick.tree.cost

    def test_shared_arc_counted_once(self):
        r, a, t1, t2 = range(4)
        d = DstInstance.build(4, [(r, a, 5), (a, t1, 1), (a, t2, 1)], r, [t1, t2])
        p1 = DensityPick((t1,), r, dreyfus_wagner_directed(d, r, [t1]), Fraction(6))
        p2 = DensityPick((t2,), r, dreyfus_wagner_directed(d, r, [t2]), Fraction(6))
        sol = assemble(d, (r,), [p1, p2])
        assert sol.cost == 7 < p1.tree.cost + p2.tree.cost
        assert sol.is_valid(d)

    def test_unreachable_core_vertex(self):
        d = DstInstance.build(3, [(0, 1, 1), (2, 1, 1)], 0, [1])
        pick = min_density_set(BoundedCoverView(d, (0,), (1,), 1))
        with pytest.raises(UnreachableCoreVertex):
            assemble(d, (0, 2), [pick])


class TestDstApprox:
    def test_phi_choice(self):
        assert phi_for(16, Fraction(1, 2)) == 4
        assert float(chvatal_bound(4)) == pytest.approx(1 + math.log(4), abs=1e-11)
        assert [phi_for(n, Fraction(1, 2)) for n in (1, 2, 4, 5, 9, 10)] == [1, 2, 2, 3, 3, 4]

    def test_core_caps(self):
        assert core_cap(16, 4) == 4
        assert core_cap(16, 4, "loose") == 8
        with pytest.raises(BadParameters):
            core_cap(16, 4, "other")

    def test_gamma_range(self, diamond):
        for g in (Fraction(1, 3), Fraction(1)):
            with pytest.raises(BadParameters):
                dst_approx(diamond, g)

    def test_path_is_exact(self):
        d = path_instance([3, 1, 2])
        assert dst_approx(d).cost == 6

    def test_abc_encoding(self, abc):
        run = dst_approx_detailed(set_cover_as_dst(abc))
        assert run.solution.cost == 2 and run.phi == 2

    def test_unreachable(self):
        with pytest.raises(UnreachableTerminal):
            dst_approx(DstInstance.build(3, [(0, 1, 1)], 0, [2]))

    def test_non_leaf_terminals_handled(self):
        d = path_instance([1, 1, 1], [1, 2, 3])
        sol = dst_approx(d)
        assert sol.is_valid(d) and sol.cost == 3
        assert max(v for _, v, _ in sol.arcs) < d.vertex_count

    @given(seed=st.integers(0, 10**6), n=st.integers(4, 10), k=st.integers(1, 5))
    def test_ratio_against_brute_force(self, seed, n, k):
        d = gen_dst(n, min(k, n - 1), seed, arc_count=min(20, 2 * n))
        run = dst_approx_detailed(d)
        assert run.solution.is_valid(d)
        assert run.solution.cost <= run.ratio_bound * brute_force_dst(d).cost

    @given(seed=st.integers(0, 10**6))
    def test_threads_deterministic(self, seed):
        d = gen_dst(10, 5, seed)
        one = dst_approx_detailed(d)
        many = dst_approx_detailed(d, threads=3)
        assert (one.solution, one.core) == (many.solution, many.core)

    @given(seed=st.integers(0, 10**6))
    def test_larger_cap_never_worse(self, seed):
        d = gen_dst(10, 6, seed)
        costs = [dst_approx(d, cap=c).cost for c in range(0, 4)]
        assert costs == sorted(costs, reverse=True)

    def test_loose_cap_never_worse(self):
        for seed in range(10):
            d = gen_dst(10, 6, seed)
            assert dst_approx(d, cap_rule="loose").cost <= dst_approx(d).cost


class TestDecompositionAudit:
    def test_path_phi_at_least_n(self):
        d = path_instance([1, 2, 3], [3])
        audit = decomposition_audit(d, whole_tree(d), 1)
        assert audit.core == (0,) and audit.connector_cost == 0 and audit.holds

    def test_set_cover_optimal_set_nodes(self):
        for seed in range(10):
            sc = gen_set_cover(6, 4, seed)
            opt = brute_force_set_cover(sc)
            d = set_cover_as_dst(sc)
            t_opt = dreyfus_wagner_directed(d, d.root, d.terminals)
            audit = decomposition_audit(d, t_opt, sc.max_set_size, core=[set_node(i) for i in opt.chosen])
            assert audit.holds and audit.opt_cost == opt.cost

    @given(seed=st.integers(0, 10**6))
    def test_holds_on_random_instances(self, seed):
        d = leafify(gen_dst(9, 4, seed, arc_count=18))
        audit = decomposition_audit(d, brute_force_dst(d, max_arcs=30), 2)
        assert audit.holds and audit.witness_problems == []
        assert audit.proof_core_slack >= 0

    def test_proof_core_can_exceed(self):
        d = broom()
        audit = decomposition_audit(d, whole_tree(d), 2)
        assert audit.holds
        assert audit.proof_core == (0, 2)
        assert audit.proof_core_slack == 1

    def test_bounded_system_by_enumeration(self):
        # every (Y, s) with |Y| <= phi priced by the arc-choice oracle
        d = leafify(gen_dst(7, 3, 5, arc_count=12))
        roots, phi = (0, 1), 2
        sc = bounded_set_cover(d, roots, phi)
        priced = {}
        for r in range(1, phi + 1):
            for y in itertools.combinations(d.terminals, r):
                costs = []
                for s in roots:
                    try:
                        costs.append(brute_force_dst(d, root=s, terminals=y).cost)
                    except UnreachableTerminal:
                        pass
                if costs:
                    priced[tuple(d.terminals.index(t) for t in y)] = min(costs)
        assert {m: c for c, m in sc.sets} == priced
