import json
from fractions import Fraction

import pytest
from hypothesis import given, strategies as st

from steinercover import ParseError, PartitionSystem, best_labeling, chvatal_bound, validate
from steinercover.cli import main
from steinercover.formats import (digest, emit_dst, emit_label_cover, emit_partition_system, emit_set_cover,
                                  parse_dst, parse_label_cover, parse_partition_system, parse_set_cover)
from steinercover.generators import gen_dst, gen_label_cover, gen_label_cover_planted, gen_set_cover

from conftest import path_instance

ABC_TEXT = "c A, B, C\np sc 4 3\ns 1 0 1\ns 1 2 3\ns 5/2 0 1 2 3\n"


class TestSetCoverFormat:
    def test_canonical_abc(self, abc):
        assert parse_set_cover(ABC_TEXT) == abc

    def test_round_trip(self):
        for seed in range(20):
            sc = gen_set_cover(7, 5, seed)
            text = emit_set_cover(sc)
            assert parse_set_cover(text) == sc
            assert emit_set_cover(parse_set_cover(text)) == text

    def test_element_out_of_range_names_line(self):
        with pytest.raises(ParseError) as err:
            parse_set_cover("p sc 4 1\ns 1 0 4\n")
        assert err.value.line == 2

    def test_set_count_mismatch(self):
        with pytest.raises(ParseError):
            parse_set_cover("p sc 4 2\ns 1 0 1 2 3\n")

    def test_rational_cost(self):
        assert parse_set_cover("p sc 1 1\ns 7/3 0\n").cost(0) == Fraction(7, 3)


class TestDstFormat:
    def test_canonical_path(self):
        text = "p dst 3 2\na 0 1 1\na 1 2 2\nr 0\nt 2\n"
        assert parse_dst(text) == path_instance([1, 2])

    @given(seed=st.integers(0, 10**6))
    def test_round_trip(self, seed):
        d = gen_dst(8, 3, seed)
        assert parse_dst(emit_dst(d)) == d

    def test_header_mismatch(self):
        with pytest.raises(ParseError) as err:
            parse_dst("p dst 3 5\na 0 1 1\nr 0\nt 1\n")
        assert err.value.line == 1

    def test_bad_record(self):
        with pytest.raises(ParseError) as err:
            parse_dst("p dst 2 1\na 0 1 x\nr 0\nt 1\n")
        assert err.value.line == 2


class TestLabelCoverFormat:
    def test_singleton_edge(self):
        text = json.dumps({"a_count": 1, "b_count": 1, "sigma_a": 2, "sigma_b": 1,
                           "edges": [[0, 0, 0]], "projections": [[0, 0]]})
        lc, planted = parse_label_cover(text)
        assert lc.edges == ((0, 0),) and planted is None

    def test_round_trip_with_planted(self):
        lc, planted = gen_label_cover_planted(3, 3, 3, 2, 2, seed=4)
        lc2, planted2 = parse_label_cover(emit_label_cover(lc, planted))
        assert (lc2, planted2) == (lc, planted)

    def test_symbol_out_of_range(self):
        obj = json.loads(emit_label_cover(gen_label_cover(2, 2, 2, 2, 2, seed=0)))
        obj["projections"][0][0] = 7
        with pytest.raises(ParseError):
            parse_label_cover(json.dumps(obj))

    def test_wrong_incoming_index(self):
        obj = json.loads(emit_label_cover(gen_label_cover(2, 2, 2, 2, 2, seed=0)))
        obj["edges"][0][2] = 5
        with pytest.raises(ParseError):
            parse_label_cover(json.dumps(obj))

    def test_not_json(self):
        with pytest.raises(ParseError):
            parse_label_cover("{ nope")


def test_partition_system_round_trip():
    ps = PartitionSystem(4, 2, 9, ((0, 1, 0, 1), (1, 1, 0, 0)))
    assert parse_partition_system(emit_partition_system(ps)) == ps


def test_digest_is_stable():
    assert digest(ABC_TEXT) == digest(ABC_TEXT) != digest(ABC_TEXT + "c\n")


def run(capsys, *argv):
    code = main([str(a) for a in argv])
    out, err = capsys.readouterr()
    return code, out, err


def report(capsys, *argv):
    code, out, _ = run(capsys, *argv, "--json")
    assert code == 0
    return {f["name"]: f["value"] for f in json.loads(out)["fields"]}


class TestGenerators:
    def test_same_seed_same_file(self, capsys, tmp_path):
        for cmd in (["gen-sc", "--universe", 6, "--sets", 4], ["gen-dst", "--vertices", 7, "--terminals", 3],
                    ["gen-lc", "--a", 2, "--b", 2, "--sigma-a", 3, "--sigma-b", 2, "--b-degree", 2]):
            first = run(capsys, *cmd, "--seed", 5)[1]
            assert first and first == run(capsys, *cmd, "--seed", 5)[1]

    def test_gen_dst_terminals_reachable(self, capsys):
        for seed in range(10):
            out = run(capsys, "gen-dst", "--vertices", 9, "--terminals", 4, "--seed", seed)[1]
            assert validate(parse_dst(out)).ok

    def test_planted_then_best_labeling(self, capsys, tmp_path):
        path = tmp_path / "lc.json"
        run(capsys, "gen-lc-planted", "--a", 3, "--b", 3, "--sigma-a", 3, "--sigma-b", 2, "--b-degree", 2,
            "--seed", 1, "-o", path)
        lc, planted = parse_label_cover(path.read_text())
        assert planted is not None and best_labeling(lc)[1] == 1

    def test_seed_from_environment(self, capsys, monkeypatch):
        monkeypatch.setenv("STEINERCOVER_SEED", "5")
        from_env = run(capsys, "gen-sc", "--universe", 6, "--sets", 4)[1]
        assert from_env == run(capsys, "gen-sc", "--universe", 6, "--sets", 4, "--seed", 5)[1]


class TestCommands:
    def test_dst_approx_oracle_within_bound(self, capsys, tmp_path):
        path = tmp_path / "d.txt"
        path.write_text(emit_dst(gen_dst(8, 4, seed=2)))
        got = report(capsys, "dst-approx", path, "--gamma", "0.5", "--oracle")
        assert Fraction(got["cost"]) <= chvatal_bound(2) * Fraction(got["oracle_cost"])
        assert got["within_bound"] is True

    def test_greedy_and_exact(self, capsys, tmp_path):
        path = tmp_path / "abc.txt"
        path.write_text(ABC_TEXT)
        assert Fraction(report(capsys, "greedy", path, "--oracle")["cost"]) == 2
        assert Fraction(report(capsys, "exact-sc", path)["cost"]) == 2

    def test_dw_matches_dst_exact(self, capsys, tmp_path):
        path = tmp_path / "d.txt"
        d = gen_dst(7, 3, seed=4)
        path.write_text(emit_dst(d))
        terms = ",".join(map(str, d.terminals))
        assert report(capsys, "dw", path, "--root", 0, "--terminals", terms)["cost"] == \
            report(capsys, "dst-exact", path)["cost"]

    def test_replay_reproduces_cost_fields(self, capsys, tmp_path):
        path = tmp_path / "d.txt"
        path.write_text(emit_dst(gen_dst(9, 4, seed=6)))
        assert report(capsys, "dst-approx", path)["cost"] == report(capsys, "dst-approx", path)["cost"]

    def test_reduce_planted(self, capsys, tmp_path):
        lc, planted = gen_label_cover_planted(2, 1, 3, 2, 2, seed=3)
        path = tmp_path / "lc.json"
        path.write_text(emit_label_cover(lc, planted))
        code, out, _ = run(capsys, "reduce", path, "--gamma", "0.5", "--delta", "0.1", "--D", 2, "--u", 8,
                           "--v-count", 2)
        assert code == 0 and "cover of size |A'| found" in out

    def test_audit_decomposition(self, capsys, tmp_path):
        path = tmp_path / "d.txt"
        path.write_text(emit_dst(gen_dst(8, 3, seed=1)))
        assert report(capsys, "audit-decomposition", path, "--phi", 2)["holds"] is True

    def test_bench(self, capsys):
        code, out, _ = run(capsys, "bench", "--sizes", "2,3", "--vertices", 8)
        assert code == 0 and "wall_time" in out


class TestExitCodes:
    def test_violating_partition_system(self, capsys, tmp_path):
        path = tmp_path / "ps.json"
        ps = PartitionSystem(4, 2, 0, ((0, 0, 1, 1), (1, 1, 0, 0)))
        path.write_text(emit_partition_system(ps))
        code, out, _ = run(capsys, "verify", "partition-system", path, "--ell", 2)
        assert code == 2 and "witness" in out

    def test_passing_partition_system(self, capsys, tmp_path):
        path = tmp_path / "ps.json"
        path.write_text(emit_partition_system(PartitionSystem(4, 2, 0, ((0, 0, 1, 1), (0, 1, 0, 1)))))
        assert run(capsys, "verify", "partition-system", path, "--ell", 1)[0] == 0

    def test_parse_error(self, capsys, tmp_path):
        path = tmp_path / "bad.txt"
        path.write_text("p sc 2 1\ns 1 0 9\n")
        code, _, err = run(capsys, "greedy", path)
        assert code == 2 and "line 2" in err

    def test_missing_file(self, capsys, tmp_path):
        assert run(capsys, "greedy", tmp_path / "nope.txt")[0] == 2

    def test_budget_exceeded(self, capsys, tmp_path):
        path = tmp_path / "d.txt"
        path.write_text(emit_dst(gen_dst(12, 4, seed=1, arc_count=30)))
        assert run(capsys, "dst-exact", path, "--max-arcs", 10)[0] == 3

    def test_invalid_instance(self, capsys, tmp_path):
        path = tmp_path / "d.txt"
        path.write_text("p dst 3 1\na 0 1 1\nr 0\nt 2\n")
        assert run(capsys, "verify", "dst", path)[0] == 2
