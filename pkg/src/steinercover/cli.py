"""Command-line driver. Exit codes: 0 success, 2 validation failure, 3 budget exceeded."""
from __future__ import annotations

import argparse
import json
import os
import sys
import time
from dataclasses import dataclass, field
from fractions import Fraction
from pathlib import Path

from . import formats, generators
from .dst_core import core_cap, decomposition_audit, dst_approx_detailed, phi_for
from .errors import BudgetExceeded, ValidationError, WorkbenchError
from .exact import brute_force_dst, brute_force_set_cover, dreyfus_wagner_directed
from .greedy import greedy_set_cover
from .instances import leafify, validate
from .reductions import (best_labeling, build_partition_system, run_pipeline,
                         verify_partition_system)

SEED_ENV = "STEINERCOVER_SEED"


@dataclass
class RunReport:
    command: str
    seed: int
    digest: str = ""
    parameters: dict = field(default_factory=dict)
    # (name, value, provenance) with provenance "computed" or "oracle"
    fields: list[tuple[str, object, str]] = field(default_factory=list)
    notes: list[str] = field(default_factory=list)
    wall_time: float = 0.0

    def add(self, name: str, value, provenance: str = "computed") -> None:
        self.fields.append((name, value, provenance))

    def as_dict(self) -> dict:
        return {
            "command": self.command, "seed": self.seed, "digest": self.digest,
            "parameters": _plain(self.parameters),
            "fields": [{"name": n, "value": _plain(v), "provenance": p} for n, v, p in self.fields],
            "notes": self.notes, "wall_time": round(self.wall_time, 6),
        }

    def render(self, as_json: bool) -> str:
        if as_json:
            return json.dumps(self.as_dict(), indent=2)
        out = [f"command: {self.command}", f"seed: {self.seed}"]
        if self.digest:
            out.append(f"digest: {self.digest}")
        out += [f"param {k} = {_plain(v)}" for k, v in self.parameters.items()]
        out += [f"{n} = {_plain(v)} [{p}]" for n, v, p in self.fields]
        out += self.notes
        out.append(f"wall_time = {self.wall_time:.3f}s")
        return "\n".join(out)


def _plain(v):
    if isinstance(v, Fraction):
        return str(v)
    if isinstance(v, (list, tuple)):
        return [_plain(x) for x in v]
    if isinstance(v, dict):
        return {k: _plain(x) for k, x in v.items()}
    return v


def _read(path: str) -> str:
    return sys.stdin.read() if path == "-" else Path(path).read_text()


def _write_or_print(text: str, out: str | None) -> None:
    if out:
        Path(out).write_text(text)
    else:
        sys.stdout.write(text)


def _fraction(s: str) -> Fraction:
    try:
        return Fraction(s)
    except (ValueError, ZeroDivisionError):
        raise argparse.ArgumentTypeError(f"not a rational: {s!r}") from None


def _int_list(s: str) -> list[int]:
    return [int(x) for x in s.split(",") if x.strip()]


# ---------------------------------------------------------------------------
# generators


def cmd_gen_sc(args, report):
    sc = generators.gen_set_cover(args.universe, args.sets, args.seed, args.max_cost)
    text = formats.emit_set_cover(sc)
    report.digest = formats.digest(text)
    _write_or_print(text, args.output)


def cmd_gen_dst(args, report):
    d = generators.gen_dst(args.vertices, args.terminals, args.seed, args.arcs, args.max_cost,
                           args.leaf_terminals)
    text = formats.emit_dst(d)
    report.digest = formats.digest(text)
    _write_or_print(text, args.output)


def cmd_gen_lc(args, report):
    if args.command == "gen-lc-planted":
        lc, planted = generators.gen_label_cover_planted(args.a, args.b, args.sigma_a, args.sigma_b,
                                                         args.b_degree, args.seed)
    else:
        lc = generators.gen_label_cover(args.a, args.b, args.sigma_a, args.sigma_b, args.b_degree, args.seed)
        planted = None
    text = formats.emit_label_cover(lc, planted)
    report.digest = formats.digest(text)
    _write_or_print(text, args.output)


def cmd_gen_ps(args, report):
    ps = build_partition_system(args.u, args.m, args.parts, args.seed)
    text = formats.emit_partition_system(ps)
    report.digest = formats.digest(text)
    _write_or_print(text, args.output)


# ---------------------------------------------------------------------------
# solvers


def _load_sc(args, report):
    sc = formats.parse_set_cover(_read(args.file))
    report.digest = formats.digest(formats.emit_set_cover(sc))
    return sc


def _load_dst(args, report):
    d = formats.parse_dst(_read(args.file))
    report.digest = formats.digest(formats.emit_dst(d))
    return d


def cmd_greedy(args, report):
    sc = _load_sc(args, report)
    sol, trace = greedy_set_cover(sc)
    report.add("cost", sol.cost)
    report.add("chosen", list(sol.chosen))
    report.add("ratio_bound", trace.bound)
    if args.oracle:
        opt = brute_force_set_cover(sc, max_sets=args.max_sets)
        report.add("oracle_cost", opt.cost, "oracle")
        report.add("ratio", sol.cost / opt.cost if opt.cost else Fraction(1), "oracle")


def cmd_exact_sc(args, report):
    sc = _load_sc(args, report)
    opt = brute_force_set_cover(sc, max_sets=args.max_sets)
    report.add("cost", opt.cost, "oracle")
    report.add("chosen", list(opt.chosen), "oracle")


def _arcs(sol):
    return [f"{t}->{h}:{c}" for t, h, c in sol.arcs]


def cmd_dst_approx(args, report):
    d = _load_dst(args, report)
    report.parameters.update(gamma=args.gamma, cap_rule=args.cap_rule, cap=args.cap, threads=args.threads)
    run = dst_approx_detailed(d, args.gamma, args.cap, args.cap_rule, args.threads)
    problems = run.solution.problems(d)
    if problems:
        raise ValidationError(f"assembled tree failed validation: {problems}")
    report.add("cost", run.solution.cost)
    report.add("phi", run.phi)
    report.add("core_cap", run.cap)
    report.add("core", list(run.core))
    report.add("candidate_cores", run.candidates)
    report.add("ratio_bound", run.ratio_bound)
    report.add("arcs", _arcs(run.solution))
    if args.oracle:
        opt = brute_force_dst(d, max_arcs=args.max_arcs)
        ratio = run.solution.cost / opt.cost if opt.cost else Fraction(1)
        report.add("oracle_cost", opt.cost, "oracle")
        report.add("ratio", ratio, "oracle")
        report.add("within_bound", ratio <= run.ratio_bound, "oracle")


def cmd_dst_exact(args, report):
    d = _load_dst(args, report)
    opt = brute_force_dst(d, max_arcs=args.max_arcs)
    report.add("cost", opt.cost, "oracle")
    report.add("arcs", _arcs(opt), "oracle")


def cmd_dw(args, report):
    d = _load_dst(args, report)
    root = d.root if args.root is None else args.root
    terminals = d.terminals if args.terminals is None else args.terminals
    report.parameters.update(root=root, terminals=list(terminals))
    sol = dreyfus_wagner_directed(d, root, terminals, max_terminals=args.max_terminals)
    report.add("cost", sol.cost)
    report.add("arcs", _arcs(sol))


def cmd_reduce(args, report):
    lc, planted = formats.parse_label_cover(_read(args.file))
    report.digest = formats.digest(formats.emit_label_cover(lc, planted))
    overrides = {k: getattr(args, k) for k in ("D", "u", "v_count", "ell") if getattr(args, k)}
    report.parameters.update(gamma=args.gamma, delta=args.delta, overrides=overrides)
    result = run_pipeline(lc, args.gamma, args.delta, args.seed, overrides, planted, budget=args.budget,
                          max_sets=args.max_sets)
    oracle_keys = {"opt", "opt_cover", "list_agreement", "soundness_premise", "soundness_contrapositive"}
    for k, v in result.report.items():
        if k not in ("seed",):
            report.add(k, v, "oracle" if k in oracle_keys else "computed")
    if "completeness" in result.report:
        report.notes.append(result.report["completeness"])
    text = formats.emit_set_cover(result.sc)
    report.add("output_digest", formats.digest(text))
    if args.output:
        Path(args.output).write_text(text)


def cmd_verify(args, report):
    text = _read(args.file)
    if args.kind == "set-cover":
        inst = formats.parse_set_cover(text)
    elif args.kind == "dst":
        inst = formats.parse_dst(text)
    elif args.kind == "label-cover":
        inst, planted = formats.parse_label_cover(text)
        if planted is not None:
            _, frac = best_labeling(inst, args.budget)
            report.add("best_covered_fraction", frac, "oracle")
    else:
        ps = formats.parse_partition_system(text)
        report.digest = formats.digest(formats.emit_partition_system(ps))
        if args.ell is None:
            raise ValidationError("verify partition-system needs --ell")
        check = verify_partition_system(ps, args.ell, args.budget)
        report.add("ok", check.ok, "oracle")
        report.add("searched", check.searched, "oracle")
        if not check.ok:
            report.add("witness", [list(w) for w in check.witness], "oracle")
            raise _Reported(ValidationError(f"cover by {len(check.witness)} parts from distinct partitions"))
        return
    rep = validate(inst)
    report.add("violations", rep.violations)
    if not rep.ok:
        raise _Reported(ValidationError(str(rep)))


def cmd_audit(args, report):
    d = _load_dst(args, report)
    work = leafify(d)
    report.parameters.update(phi=args.phi)
    t_opt = dreyfus_wagner_directed(work, work.root, work.terminals)
    audit = decomposition_audit(work, t_opt, args.phi, core=args.core)
    report.add("opt_cost", audit.opt_cost)
    report.add("core", list(audit.core))
    report.add("connector_cost", audit.connector_cost)
    report.add("bounded_opt", audit.bounded_opt, "oracle")
    report.add("holds", audit.holds, "oracle")
    report.add("proof_core", list(audit.proof_core))
    report.add("proof_core_slack", audit.proof_core_slack, "oracle")
    if audit.witness_problems:
        report.add("witness_problems", audit.witness_problems)
    if not audit.holds:
        raise _Reported(ValidationError("decomposition identity fails"))


def cmd_bench(args, report):
    report.parameters.update(gamma=args.gamma, sizes=args.sizes, repeat=args.repeat)
    rows = []
    for n_terms in args.sizes:
        for r in range(args.repeat):
            seed = args.seed + 1000 * n_terms + r
            d = generators.gen_dst(max(args.vertices, n_terms + 2), n_terms, seed, leaf_terminals=True)
            start = time.perf_counter()
            run = dst_approx_detailed(d, args.gamma, threads=args.threads)
            elapsed = time.perf_counter() - start
            rows.append({"terminals": n_terms, "seed": seed, "phi": run.phi,
                         "cap": core_cap(n_terms, phi_for(n_terms, args.gamma)),
                         "candidates": run.candidates, "cost": str(run.solution.cost),
                         "seconds": round(elapsed, 4)})
    report.add("runs", rows)


class _Reported(Exception):
    """Wraps an error whose report should still be printed."""

    def __init__(self, error: WorkbenchError):
        super().__init__(str(error))
        self.error = error


# ---------------------------------------------------------------------------


def build_parser() -> argparse.ArgumentParser:
    env_seed = int(os.environ.get(SEED_ENV, "0"))
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--json", action="store_true", help="emit the report as JSON")
    common.add_argument("--seed", type=int, default=env_seed, help=f"default from ${SEED_ENV}")
    common.add_argument("--budget", type=int, default=2_000_000, help="exhaustive search cap")
    common.add_argument("--threads", type=int, default=1)
    common.add_argument("--max-sets", type=int, default=24)
    common.add_argument("--max-arcs", type=int, default=20)
    common.add_argument("--max-terminals", type=int, default=20)

    p = argparse.ArgumentParser(prog="steinercover", description=__doc__)
    sub = p.add_subparsers(dest="command", required=True)

    def add(name, fn, help_):
        sp = sub.add_parser(name, parents=[common], help=help_)
        sp.set_defaults(fn=fn)
        return sp

    sp = add("gen-sc", cmd_gen_sc, "random set cover instance")
    sp.add_argument("--universe", type=int, required=True)
    sp.add_argument("--sets", type=int, required=True)
    sp.add_argument("--max-cost", type=int, default=9)
    sp.add_argument("-o", "--output")

    sp = add("gen-dst", cmd_gen_dst, "random directed Steiner tree instance")
    sp.add_argument("--vertices", type=int, required=True)
    sp.add_argument("--terminals", type=int, required=True)
    sp.add_argument("--arcs", type=int)
    sp.add_argument("--max-cost", type=int, default=9)
    sp.add_argument("--leaf-terminals", action="store_true")
    sp.add_argument("-o", "--output")

    for name in ("gen-lc", "gen-lc-planted"):
        sp = add(name, cmd_gen_lc, "random bi-regular label cover" + (" with a planted labeling"
                                                                       if name.endswith("planted") else ""))
        sp.add_argument("--a", type=int, required=True)
        sp.add_argument("--b", type=int, required=True)
        sp.add_argument("--sigma-a", type=int, required=True)
        sp.add_argument("--sigma-b", type=int, required=True)
        sp.add_argument("--b-degree", type=int, required=True)
        sp.add_argument("-o", "--output")

    sp = add("gen-ps", cmd_gen_ps, "random partition system")
    sp.add_argument("--u", type=int, required=True)
    sp.add_argument("--m", type=int, required=True)
    sp.add_argument("--parts", type=int, required=True, help="parts per partition (D)")
    sp.add_argument("-o", "--output")

    for name, fn, help_ in (("greedy", cmd_greedy, "weighted greedy set cover"),
                            ("exact-sc", cmd_exact_sc, "brute-force set cover optimum")):
        sp = add(name, fn, help_)
        sp.add_argument("file")
        if name == "greedy":
            sp.add_argument("--oracle", action="store_true")

    sp = add("dst-approx", cmd_dst_approx, "core-based DST approximation")
    sp.add_argument("file")
    sp.add_argument("--gamma", type=_fraction, default=Fraction(1, 2))
    sp.add_argument("--cap", type=int)
    sp.add_argument("--cap-rule", choices=("tight", "loose"), default="tight")
    sp.add_argument("--oracle", action="store_true")

    sp = add("dst-exact", cmd_dst_exact, "brute-force DST optimum")
    sp.add_argument("file")

    sp = add("dw", cmd_dw, "Dreyfus-Wagner exact DST")
    sp.add_argument("file")
    sp.add_argument("--root", type=int)
    sp.add_argument("--terminals", type=_int_list)

    sp = add("reduce", cmd_reduce, "label cover to set cover pipeline")
    sp.add_argument("file")
    sp.add_argument("--gamma", type=_fraction, default=Fraction(1, 2))
    sp.add_argument("--delta", type=_fraction, default=Fraction(1, 10))
    sp.add_argument("--D", type=int, help="override the prime power D")
    sp.add_argument("--u", type=int, help="override the universe size u")
    sp.add_argument("--v-count", type=int, help="override |V_H|")
    sp.add_argument("--ell", type=int, help="override the list bound")
    sp.add_argument("-o", "--output")

    sp = add("verify", cmd_verify, "validate an instance file or partition system")
    sp.add_argument("kind", choices=("set-cover", "dst", "label-cover", "partition-system"))
    sp.add_argument("file")
    sp.add_argument("--ell", type=int)

    sp = add("audit-decomposition", cmd_audit, "check the core decomposition identity")
    sp.add_argument("file")
    sp.add_argument("--phi", type=int, required=True)
    sp.add_argument("--core", type=_int_list)

    sp = add("bench", cmd_bench, "time dst-approx on generated instances")
    sp.add_argument("--sizes", type=_int_list, default=[4, 6, 8])
    sp.add_argument("--vertices", type=int, default=16)
    sp.add_argument("--repeat", type=int, default=1)
    sp.add_argument("--gamma", type=_fraction, default=Fraction(1, 2))
    return p


def main(argv: list[str] | None = None) -> int:
    args = build_parser().parse_args(argv)
    report = RunReport(args.command, args.seed)
    start = time.perf_counter()
    code = 0
    error = None
    try:
        args.fn(args, report)
    except _Reported as r:
        error = r.error
    except WorkbenchError as e:
        error = e
        report = None if not report.fields else report
    except OSError as e:
        error = ValidationError(str(e))
        report = None
    if error is not None:
        code = 3 if isinstance(error, BudgetExceeded) else 2
        print(f"error: {error}", file=sys.stderr)
    if report is not None and (report.fields or not args.command.startswith("gen-") or
                               getattr(args, "output", None)):
        report.wall_time = time.perf_counter() - start
        print(report.render(args.json))
    return code


if __name__ == "__main__":
    sys.exit(main())
