"""Text formats for set cover, directed Steiner tree, label cover and partition systems.

Set cover and DST files are line oriented; label cover and partition systems are JSON.
Emitters write a canonical form, so ``emit(parse(x)) == x`` for canonical ``x``.
"""
from __future__ import annotations

import hashlib
import json
from fractions import Fraction

from .errors import ParseError
from .instances import DstInstance, Labeling, LabelCoverInstance, SetCoverInstance
from .reductions import PartitionSystem


def format_cost(c: Fraction) -> str:
    return str(c)


def parse_cost(token: str, line: int) -> Fraction:
    try:
        c = Fraction(token)
    except (ValueError, ZeroDivisionError):
        raise ParseError(f"bad cost {token!r}", line) from None
    if c < 0:
        raise ParseError(f"negative cost {token}", line)
    return c


def _ints(tokens: list[str], line: int) -> list[int]:
    try:
        return [int(t) for t in tokens]
    except ValueError:
        raise ParseError(f"expected integers, got {' '.join(tokens)!r}", line) from None


def _lines(text: str):
    for no, raw in enumerate(text.splitlines(), 1):
        s = raw.strip()
        if s and not s.startswith("c"):
            yield no, s.split()


def digest(text: str) -> str:
    return "sha256:" + hashlib.sha256(text.encode()).hexdigest()


# ---------------------------------------------------------------------------
# set cover


def parse_set_cover(text: str) -> SetCoverInstance:
    header = None
    sets = []
    for no, tok in _lines(text):
        if tok[0] == "p":
            if header is not None:
                raise ParseError("duplicate header", no)
            if len(tok) != 4 or tok[1] != "sc":
                raise ParseError("header must be 'p sc <N> <M>'", no)
            header, header_no = _ints(tok[2:], no), no
        elif tok[0] == "s":
            if header is None:
                raise ParseError("set before header", no)
            if len(tok) < 2:
                raise ParseError("set line needs a cost", no)
            cost = parse_cost(tok[1], no)
            members = _ints(tok[2:], no)
            bad = [e for e in members if not 0 <= e < header[0]]
            if bad:
                raise ParseError(f"element {bad[0]} outside universe of size {header[0]}", no)
            sets.append((cost, members))
        else:
            raise ParseError(f"unknown line type {tok[0]!r}", no)
    if header is None:
        raise ParseError("missing 'p sc' header")
    if len(sets) != header[1]:
        raise ParseError(f"header declares {header[1]} sets, found {len(sets)}", header_no)
    return SetCoverInstance.build(header[0], sets)


def emit_set_cover(sc: SetCoverInstance) -> str:
    out = [f"p sc {sc.universe_size} {sc.set_count}"]
    for cost, members in sc.sets:
        out.append(" ".join(["s", format_cost(cost), *map(str, members)]))
    return "\n".join(out) + "\n"


# ---------------------------------------------------------------------------
# directed Steiner tree


def parse_dst(text: str) -> DstInstance:
    header = None
    arcs = []
    root = None
    terminals = []
    for no, tok in _lines(text):
        kind = tok[0]
        if kind == "p":
            if header is not None:
                raise ParseError("duplicate header", no)
            if len(tok) != 4 or tok[1] != "dst":
                raise ParseError("header must be 'p dst <n> <m>'", no)
            header, header_no = _ints(tok[2:], no), no
            continue
        if header is None:
            raise ParseError("line before header", no)
        n = header[0]
        if kind == "a":
            if len(tok) != 4:
                raise ParseError("arc line must be 'a <tail> <head> <cost>'", no)
            t, h = _ints(tok[1:3], no)
            if not (0 <= t < n and 0 <= h < n):
                raise ParseError(f"arc endpoint outside 0..{n - 1}", no)
            arcs.append((t, h, parse_cost(tok[3], no)))
        elif kind in ("r", "t"):
            if len(tok) != 2:
                raise ParseError(f"'{kind}' line takes one vertex", no)
            (v,) = _ints(tok[1:], no)
            if not 0 <= v < n:
                raise ParseError(f"vertex {v} outside 0..{n - 1}", no)
            if kind == "r":
                if root is not None:
                    raise ParseError("duplicate root", no)
                root = v
            else:
                terminals.append(v)
        else:
            raise ParseError(f"unknown line type {kind!r}", no)
    if header is None:
        raise ParseError("missing 'p dst' header")
    if len(arcs) != header[1]:
        raise ParseError(f"header declares {header[1]} arcs, found {len(arcs)}", header_no)
    if root is None:
        raise ParseError("missing root line")
    return DstInstance.build(header[0], arcs, root, terminals)


def emit_dst(d: DstInstance) -> str:
    out = [f"p dst {d.vertex_count} {len(d.arcs)}"]
    out += [f"a {t} {h} {format_cost(c)}" for t, h, c in d.arcs]
    out.append(f"r {d.root}")
    out += [f"t {v}" for v in d.terminals]
    return "\n".join(out) + "\n"


# ---------------------------------------------------------------------------
# label cover


def _load_json(text: str) -> dict:
    try:
        obj = json.loads(text)
    except json.JSONDecodeError as e:
        raise ParseError(e.msg, e.lineno) from None
    if not isinstance(obj, dict):
        raise ParseError("top level must be an object")
    return obj


def _field(obj: dict, name: str, kind=int):
    if name not in obj:
        raise ParseError(f"missing field {name!r}")
    value = obj[name]
    if kind is int and (not isinstance(value, int) or isinstance(value, bool) or value < 0):
        raise ParseError(f"field {name!r} must be a non-negative integer")
    if kind is list and not isinstance(value, list):
        raise ParseError(f"field {name!r} must be a list")
    return value


def parse_label_cover(text: str) -> tuple[LabelCoverInstance, Labeling | None]:
    obj = _load_json(text)
    a_count, b_count = _field(obj, "a_count"), _field(obj, "b_count")
    sigma_a, sigma_b = _field(obj, "sigma_a"), _field(obj, "sigma_b")
    edges, projections = _field(obj, "edges", list), _field(obj, "projections", list)
    if len(edges) != len(projections):
        raise ParseError(f"{len(edges)} edges but {len(projections)} projections")
    pairs, declared = [], []
    for k, (e, pi) in enumerate(zip(edges, projections)):
        if not (isinstance(e, list) and len(e) == 3 and all(isinstance(x, int) for x in e)):
            raise ParseError(f"edge {k} must be [a, b, incoming_index]")
        a, b, idx = e
        if not (0 <= a < a_count and 0 <= b < b_count):
            raise ParseError(f"edge {k} endpoint out of range")
        if not (isinstance(pi, list) and len(pi) == sigma_a):
            raise ParseError(f"projection {k} must list {sigma_a} symbols")
        if any(not isinstance(s, int) or not 0 <= s < sigma_b for s in pi):
            raise ParseError(f"projection {k} has a symbol outside 0..{sigma_b - 1}")
        pairs.append((a, b))
        declared.append(((a, b), idx))
    if len(set(pairs)) != len(pairs):
        raise ParseError("duplicate edge")
    lc = LabelCoverInstance.build(a_count, b_count, sigma_a, sigma_b, pairs, projections)
    expected = {lc.edges[k]: lc.incoming_index[k] for k in range(len(lc.edges))}
    for edge, idx in declared:
        if expected[edge] != idx:
            raise ParseError(f"edge {list(edge)} has incoming index {idx}, expected {expected[edge]}")
    planted = None
    if "planted" in obj:
        p = obj["planted"]
        if not isinstance(p, dict) or "phi_a" not in p or "phi_b" not in p:
            raise ParseError("planted must hold phi_a and phi_b")
        planted = Labeling(tuple(p["phi_a"]), tuple(p["phi_b"]))
        if planted.problems(lc):
            raise ParseError(f"planted labeling: {planted.problems(lc)}")
    return lc, planted


def emit_label_cover(lc: LabelCoverInstance, planted: Labeling | None = None) -> str:
    lines = ["{",
             f'  "a_count": {lc.a_count},', f'  "b_count": {lc.b_count},',
             f'  "sigma_a": {lc.sigma_a},', f'  "sigma_b": {lc.sigma_b},',
             '  "edges": [']
    rows = [f"    [{a}, {b}, {lc.incoming_index[k]}]" for k, (a, b) in enumerate(lc.edges)]
    lines.append(",\n".join(rows))
    lines.append("  ],")
    lines.append('  "projections": [')
    lines.append(",\n".join(f"    {json.dumps(list(pi))}" for pi in lc.projections))
    if planted is None:
        lines.append("  ]")
    else:
        lines.append("  ],")
        lines.append(f'  "planted": {{"phi_a": {json.dumps(list(planted.phi_a))}, '
                     f'"phi_b": {json.dumps(list(planted.phi_b))}}}')
    lines.append("}")
    return "\n".join(line for line in lines if line) + "\n"


# ---------------------------------------------------------------------------
# partition systems


def parse_partition_system(text: str) -> PartitionSystem:
    obj = _load_json(text)
    u, D, seed = _field(obj, "u"), _field(obj, "D"), obj.get("seed", 0)
    rows = _field(obj, "assignment", list)
    for j, row in enumerate(rows):
        if not isinstance(row, list) or len(row) != u:
            raise ParseError(f"partition {j} must assign all {u} points")
        if any(not isinstance(p, int) or not 0 <= p < D for p in row):
            raise ParseError(f"partition {j} uses a part outside 0..{D - 1}")
    return PartitionSystem(u, D, seed, tuple(tuple(r) for r in rows))


def emit_partition_system(ps: PartitionSystem) -> str:
    rows = ",\n".join(f"    {json.dumps(list(r))}" for r in ps.assignment)
    return (f'{{\n  "u": {ps.u},\n  "D": {ps.D},\n  "seed": {ps.seed},\n'
            f'  "assignment": [\n{rows}\n  ]\n}}\n')
