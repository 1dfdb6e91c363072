"""Data model for set cover, directed Steiner tree and label cover instances.

All costs are :class:`fractions.Fraction` so that optimality comparisons are
exact. Ids are dense 0-based integers. The plain dataclass constructors store
what they are given (so malformed instances can be represented and reported by
:func:`validate`); the ``build`` classmethods canonicalize.
"""
from __future__ import annotations

from collections import deque
from dataclasses import dataclass, field
from fractions import Fraction
from functools import cached_property
from typing import Iterable

Arc = tuple[int, int, Fraction]


def as_fraction(value) -> Fraction:
    if isinstance(value, Fraction):
        return value
    if isinstance(value, float):
        # repr keeps 0.1 as 1/10 rather than the nearest binary double
        return Fraction(repr(value))
    return Fraction(value)


# ---------------------------------------------------------------------------
# Set cover


@dataclass(frozen=True)
class SetCoverInstance:
    universe_size: int
    sets: tuple[tuple[Fraction, tuple[int, ...]], ...]

    @classmethod
    def build(cls, universe_size: int, sets: Iterable[tuple[object, Iterable[int]]]) -> SetCoverInstance:
        canon = tuple((as_fraction(c), tuple(sorted(set(members)))) for c, members in sets)
        return cls(int(universe_size), canon)

    @property
    def set_count(self) -> int:
        return len(self.sets)

    def cost(self, i: int) -> Fraction:
        return self.sets[i][0]

    def members(self, i: int) -> tuple[int, ...]:
        return self.sets[i][1]

    @cached_property
    def masks(self) -> tuple[int, ...]:
        """Bitmask of members for each set (out-of-range ids ignored)."""
        out = []
        for _, members in self.sets:
            m = 0
            for e in members:
                if 0 <= e < self.universe_size:
                    m |= 1 << e
            out.append(m)
        return tuple(out)

    @property
    def full_mask(self) -> int:
        return (1 << self.universe_size) - 1

    @property
    def max_set_size(self) -> int:
        return max((len(m) for _, m in self.sets), default=0)

    def uncovered_elements(self) -> list[int]:
        covered = 0
        for m in self.masks:
            covered |= m
        return [e for e in range(self.universe_size) if not covered >> e & 1]


# ---------------------------------------------------------------------------
# Directed Steiner tree


@dataclass(frozen=True)
class DstInstance:
    vertex_count: int
    arcs: tuple[Arc, ...]
    root: int
    terminals: tuple[int, ...]

    @classmethod
    def build(cls, vertex_count: int, arcs: Iterable[tuple[int, int, object]], root: int,
              terminals: Iterable[int]) -> DstInstance:
        """Canonical constructor: drops self-loops, keeps the cheapest parallel arc."""
        best: dict[tuple[int, int], Fraction] = {}
        for t, h, c in arcs:
            if t == h:
                continue
            c = as_fraction(c)
            key = (int(t), int(h))
            if key not in best or c < best[key]:
                best[key] = c
        canon = tuple(sorted((t, h, c) for (t, h), c in best.items()))
        return cls(int(vertex_count), canon, int(root), tuple(sorted(set(terminals))))

    @property
    def terminal_count(self) -> int:
        return len(self.terminals)

    @cached_property
    def arc_cost(self) -> dict[tuple[int, int], Fraction]:
        out: dict[tuple[int, int], Fraction] = {}
        for t, h, c in self.arcs:
            if (t, h) not in out or c < out[(t, h)]:
                out[(t, h)] = c
        return out

    @cached_property
    def out_arcs(self) -> tuple[tuple[tuple[int, Fraction], ...], ...]:
        adj: list[list[tuple[int, Fraction]]] = [[] for _ in range(self.vertex_count)]
        for t, h, c in self.arcs:
            if 0 <= t < self.vertex_count and 0 <= h < self.vertex_count:
                adj[t].append((h, c))
        return tuple(tuple(a) for a in adj)

    def out_degree(self, v: int) -> int:
        return len(self.out_arcs[v])

    @cached_property
    def reach(self) -> tuple[frozenset[int], ...]:
        """``reach[v]`` is R(v), the set of vertices reachable from v (v included)."""
        out = []
        for s in range(self.vertex_count):
            seen = {s}
            queue = deque([s])
            while queue:
                u = queue.popleft()
                for w, _ in self.out_arcs[u]:
                    if w not in seen:
                        seen.add(w)
                        queue.append(w)
            out.append(frozenset(seen))
        return tuple(out)

    def reachable_terminals(self, v: int) -> frozenset[int]:
        return self.reach[v] & frozenset(self.terminals)

    def is_leafified(self) -> bool:
        return all(self.out_degree(t) == 0 for t in self.terminals)

    def is_acyclic(self) -> bool:
        indeg = [0] * self.vertex_count
        for _, h, _ in self.arcs:
            indeg[h] += 1
        queue = deque(v for v in range(self.vertex_count) if indeg[v] == 0)
        seen = 0
        while queue:
            u = queue.popleft()
            seen += 1
            for w, _ in self.out_arcs[u]:
                indeg[w] -= 1
                if indeg[w] == 0:
                    queue.append(w)
        return seen == self.vertex_count


# ---------------------------------------------------------------------------
# Label cover


@dataclass(frozen=True)
class LabelCoverInstance:
    a_count: int
    b_count: int
    sigma_a: int
    sigma_b: int
    edges: tuple[tuple[int, int], ...]
    projections: tuple[tuple[int, ...], ...]
    # declared degrees; None means "not declared bi-regular"
    a_degree: int | None = None
    b_degree: int | None = None

    @classmethod
    def build(cls, a_count, b_count, sigma_a, sigma_b, edges, projections,
              declare_degrees: bool = True) -> LabelCoverInstance:
        """Canonical constructor: edges sorted by (b, a), degrees declared if bi-regular."""
        pairs = sorted(zip((tuple(e) for e in edges), (tuple(p) for p in projections)),
                       key=lambda ep: (ep[0][1], ep[0][0]))
        inst = cls(a_count, b_count, sigma_a, sigma_b,
                   tuple(e for e, _ in pairs), tuple(p for _, p in pairs))
        if declare_degrees:
            a_deg, b_deg = inst.observed_degrees()
            if a_deg is not None and b_deg is not None:
                inst = cls(a_count, b_count, sigma_a, sigma_b, inst.edges, inst.projections, a_deg, b_deg)
        return inst

    @property
    def size(self) -> int:
        return self.a_count + self.b_count + len(self.edges)

    def observed_degrees(self) -> tuple[int | None, int | None]:
        """Common A-degree and B-degree, or None on a side that is irregular."""
        da = [0] * self.a_count
        db = [0] * self.b_count
        for a, b in self.edges:
            if 0 <= a < self.a_count and 0 <= b < self.b_count:
                da[a] += 1
                db[b] += 1
        a_deg = da[0] if da and all(d == da[0] for d in da) else None
        b_deg = db[0] if db and all(d == db[0] for d in db) else None
        return a_deg, b_deg

    @property
    def is_bi_regular(self) -> bool:
        a_deg, b_deg = self.observed_degrees()
        return a_deg is not None and b_deg is not None

    @cached_property
    def incoming(self) -> tuple[tuple[int, ...], ...]:
        """Edge indices into each b, ordered by A-id. Position i is "the i-th edge into b"."""
        per_b: list[list[int]] = [[] for _ in range(self.b_count)]
        for k, (a, b) in enumerate(self.edges):
            per_b[b].append(k)
        return tuple(tuple(sorted(ks, key=lambda k: self.edges[k][0])) for ks in per_b)

    @cached_property
    def incoming_index(self) -> tuple[int, ...]:
        idx = [0] * len(self.edges)
        for ks in self.incoming:
            for i, k in enumerate(ks):
                idx[k] = i
        return tuple(idx)

    @cached_property
    def a_edges(self) -> tuple[tuple[int, ...], ...]:
        per_a: list[list[int]] = [[] for _ in range(self.a_count)]
        for k, (a, _) in enumerate(self.edges):
            per_a[a].append(k)
        return tuple(tuple(ks) for ks in per_a)


@dataclass(frozen=True)
class Labeling:
    phi_a: tuple[int, ...]
    phi_b: tuple[int, ...]

    def covered_edges(self, lc: LabelCoverInstance) -> int:
        return sum(1 for (a, b), pi in zip(lc.edges, lc.projections)
                   if pi[self.phi_a[a]] == self.phi_b[b])

    def problems(self, lc: LabelCoverInstance) -> list[str]:
        out = []
        if len(self.phi_a) != lc.a_count or len(self.phi_b) != lc.b_count:
            out.append("labeling-totality")
        if any(not 0 <= s < lc.sigma_a for s in self.phi_a) or any(not 0 <= s < lc.sigma_b for s in self.phi_b):
            out.append("labeling-range")
        return out


@dataclass(frozen=True)
class ListLabeling:
    phi_a: tuple[tuple[int, ...], ...]
    list_bound: int

    def problems(self, lc: LabelCoverInstance) -> list[str]:
        out = []
        if len(self.phi_a) != lc.a_count:
            out.append("labeling-totality")
        for lst in self.phi_a:
            if not lst or len(set(lst)) != len(lst) or len(lst) > self.list_bound:
                out.append("list-shape")
                break
        if any(not 0 <= s < lc.sigma_a for lst in self.phi_a for s in lst):
            out.append("labeling-range")
        return out


# ---------------------------------------------------------------------------
# Solutions


@dataclass(frozen=True)
class CoverSolution:
    chosen: tuple[int, ...]
    cost: Fraction

    @classmethod
    def of(cls, sc: SetCoverInstance, chosen: Iterable[int]) -> CoverSolution:
        chosen = tuple(chosen)
        return cls(chosen, sum((sc.cost(i) for i in chosen), Fraction(0)))

    def problems(self, sc: SetCoverInstance) -> list[str]:
        out = []
        if any(not 0 <= i < sc.set_count for i in self.chosen):
            return ["set-index"]
        covered = 0
        for i in self.chosen:
            covered |= sc.masks[i]
        if covered != sc.full_mask:
            out.append("cover")
        if sum((sc.cost(i) for i in self.chosen), Fraction(0)) != self.cost:
            out.append("cost")
        return out


@dataclass(frozen=True)
class ArborescenceSolution:
    arcs: tuple[Arc, ...]
    cost: Fraction = field(default=Fraction(0))

    @classmethod
    def of(cls, arcs: Iterable[tuple[int, int, object]]) -> ArborescenceSolution:
        canon = tuple(sorted((t, h, as_fraction(c)) for t, h, c in arcs))
        return cls(canon, sum((c for _, _, c in canon), Fraction(0)))

    @property
    def vertices(self) -> set[int]:
        return {t for t, _, _ in self.arcs} | {h for _, h, _ in self.arcs}

    def children(self) -> dict[int, list[int]]:
        out: dict[int, list[int]] = {}
        for t, h, _ in self.arcs:
            out.setdefault(t, []).append(h)
        return out

    def problems(self, d: DstInstance, root: int | None = None,
                 terminals: Iterable[int] | None = None) -> list[str]:
        """Violated invariants of this tree as a solution for (root, terminals) in d."""
        root = d.root if root is None else root
        terminals = d.terminals if terminals is None else tuple(terminals)
        out = []
        for t, h, c in self.arcs:
            if d.arc_cost.get((t, h)) != c:
                out.append("arc-not-in-graph")
                break
        if sum((c for _, _, c in self.arcs), Fraction(0)) != self.cost:
            out.append("cost")
        parent: dict[int, int] = {}
        for t, h, _ in self.arcs:
            if h in parent or h == root:
                out.append("in-degree")
                break
            parent[h] = t
        reached = {root}
        stack = [root]
        kids = self.children()
        while stack:
            u = stack.pop()
            for w in kids.get(u, ()):
                if w not in reached:
                    reached.add(w)
                    stack.append(w)
        if any(v not in reached for v in self.vertices):
            out.append("rooted")
        if any(t not in reached for t in terminals):
            out.append("terminal-coverage")
        return out

    def is_valid(self, d: DstInstance, root: int | None = None, terminals=None) -> bool:
        return not self.problems(d, root, terminals)


# ---------------------------------------------------------------------------
# Validation


@dataclass
class ValidationReport:
    kind: str
    violations: list[str]

    @property
    def ok(self) -> bool:
        return not self.violations

    def __str__(self) -> str:
        return f"{self.kind}: pass" if self.ok else f"{self.kind}: fail: {', '.join(self.violations)}"


def _validate_set_cover(sc: SetCoverInstance) -> list[str]:
    out = []
    if sc.universe_size < 0:
        out.append("universe-size")
    for c, members in sc.sets:
        if not isinstance(c, Fraction) or c < 0:
            out.append("cost")
            break
    for _, members in sc.sets:
        if any(b <= a for a, b in zip(members, members[1:])):
            out.append("member-order")
            break
    for _, members in sc.sets:
        if any(not 0 <= e < sc.universe_size for e in members):
            out.append("member-range")
            break
    if sc.uncovered_elements():
        out.append("coverability")
    return out


def _validate_dst(d: DstInstance) -> list[str]:
    out = []
    n = d.vertex_count
    if any(not (0 <= t < n and 0 <= h < n) for t, h, _ in d.arcs):
        out.append("vertex-range")
    if any(t == h for t, h, _ in d.arcs):
        out.append("self-loop")
    if len({(t, h) for t, h, _ in d.arcs}) != len(d.arcs):
        out.append("parallel-arc")
    if any(not isinstance(c, Fraction) or c < 0 for _, _, c in d.arcs):
        out.append("cost")
    if not 0 <= d.root < n:
        out.append("root-range")
        return out
    if any(not 0 <= t < n for t in d.terminals):
        out.append("terminal-range")
        return out
    if any(b <= a for a, b in zip(d.terminals, d.terminals[1:])):
        out.append("terminal-order")
    if "vertex-range" not in out and any(t not in d.reach[d.root] for t in d.terminals):
        out.append("reachability")
    return out


def _validate_label_cover(lc: LabelCoverInstance) -> list[str]:
    out = []
    if len(lc.projections) != len(lc.edges):
        out.append("projection-count")
    if any(not (0 <= a < lc.a_count and 0 <= b < lc.b_count) for a, b in lc.edges):
        out.append("edge-range")
    if len(set(lc.edges)) != len(lc.edges):
        out.append("duplicate-edge")
    if any(len(p) != lc.sigma_a for p in lc.projections):
        out.append("projection-length")
    if any(not 0 <= s < lc.sigma_b for p in lc.projections for s in p):
        out.append("projection-range")
    if lc.a_degree is not None or lc.b_degree is not None:
        if "edge-range" in out:
            out.append("bi-regular")
        else:
            a_deg, b_deg = lc.observed_degrees()
            if a_deg != lc.a_degree or b_deg != lc.b_degree:
                out.append("bi-regular")
            elif len(lc.edges) != lc.a_count * lc.a_degree or len(lc.edges) != lc.b_count * lc.b_degree:
                out.append("edge-count")
    return out


def validate(instance) -> ValidationReport:
    """Check every structural invariant of an instance; never raises."""
    if isinstance(instance, SetCoverInstance):
        return ValidationReport("set-cover", _validate_set_cover(instance))
    if isinstance(instance, DstInstance):
        return ValidationReport("dst", _validate_dst(instance))
    if isinstance(instance, LabelCoverInstance):
        return ValidationReport("label-cover", _validate_label_cover(instance))
    return ValidationReport(type(instance).__name__, ["unknown-kind"])


# ---------------------------------------------------------------------------
# Transformations


def leafify(d: DstInstance) -> DstInstance:
    """Move the terminal role of every non-leaf terminal onto a fresh zero-cost leaf."""
    if d.is_leafified():
        return d
    arcs = list(d.arcs)
    terminals = []
    n = d.vertex_count
    for t in d.terminals:
        if d.out_degree(t) == 0:
            terminals.append(t)
        else:
            arcs.append((t, n, Fraction(0)))
            terminals.append(n)
            n += 1
    return DstInstance.build(n, arcs, d.root, terminals)


def strip_added_leaves(sol: ArborescenceSolution, original_vertex_count: int) -> ArborescenceSolution:
    """Map a solution of ``leafify(d)`` back to d by dropping the added leaf arcs."""
    return ArborescenceSolution.of((t, h, c) for t, h, c in sol.arcs if h < original_vertex_count)


def set_node(i: int) -> int:
    """Vertex id of set i in :func:`set_cover_as_dst`."""
    return 1 + i


def element_node(sc: SetCoverInstance, e: int) -> int:
    return 1 + sc.set_count + e


def set_cover_as_dst(sc: SetCoverInstance) -> DstInstance:
    """Three-level digraph: root 0, one node per set, one leaf per element."""
    arcs: list[tuple[int, int, Fraction]] = []
    for i, (c, members) in enumerate(sc.sets):
        arcs.append((0, set_node(i), c))
        for e in members:
            arcs.append((set_node(i), element_node(sc, e), Fraction(0)))
    n = 1 + sc.set_count + sc.universe_size
    return DstInstance.build(n, arcs, 0, (element_node(sc, e) for e in range(sc.universe_size)))


def mask_of(items: Iterable[int]) -> int:
    m = 0
    for x in items:
        m |= 1 << x
    return m


def bits(mask: int) -> list[int]:
    out = []
    i = 0
    while mask:
        if mask & 1:
            out.append(i)
        mask >>= 1
        i += 1
    return out


def popcount(mask: int) -> int:
    return bin(mask).count("1")

