"""Exact oracles: shortest paths, directed Dreyfus-Wagner, and brute force.

The dynamic program works on integer-scaled costs (every arc cost multiplied by
the lcm of the denominators), so it is exact. Tables are numpy arrays of int64
when the scaled totals leave enough headroom, and of Python ints otherwise.
"""
from __future__ import annotations

import heapq
import math
from fractions import Fraction
from functools import lru_cache
from itertools import combinations
from typing import Iterable, Sequence

import numpy as np

from .errors import BudgetExceeded, NoFeasibleRoot, UncoverableInstance, UnreachableTerminal
from .instances import ArborescenceSolution, CoverSolution, DstInstance, SetCoverInstance, popcount

DEFAULT_MAX_TERMINALS = 20
DEFAULT_MAX_SETS = 24
DEFAULT_MAX_ARCS = 20

_INT64_HEADROOM = 1 << 59
# room left for density keys (cost times lcm of subset sizes) in dst_core
KEY_HEADROOM = 1 << 20


class ScaledGraph:
    """Integer view of a DstInstance plus all-pairs shortest paths."""

    def __init__(self, d: DstInstance):
        self.instance = d
        n = self.n = d.vertex_count
        self.scale = math.lcm(*(c.denominator for _, _, c in d.arcs)) if d.arcs else 1
        self.out = [[(h, int(c * self.scale)) for h, c in d.out_arcs[v]] for v in range(n)]
        self.total = sum(int(c * self.scale) for _, _, c in d.arcs)
        self.wide = self.total * max(n, 1) * KEY_HEADROOM >= _INT64_HEADROOM
        self.inf = (1 << 400) if self.wide else (1 << 61)
        self.dtype = object if self.wide else np.int64

        dist = np.full((n, n), self.inf, dtype=self.dtype)
        pred = np.full((n, n), -1, dtype=np.int64)
        for s in range(n):
            ds, ps = self._dijkstra(s)
            for v, x in ds.items():
                dist[s, v] = x
                pred[s, v] = ps[v]
        self.dist = dist
        self.pred = pred

    def _dijkstra(self, s: int):
        dist = {s: 0}
        pred = {s: -1}
        heap = [(0, s)]
        done = set()
        while heap:
            du, u = heapq.heappop(heap)
            if u in done:
                continue
            done.add(u)
            for w, c in self.out[u]:
                nd = du + c
                if w not in dist or nd < dist[w]:
                    dist[w] = nd
                    pred[w] = u
                    heapq.heappush(heap, (nd, w))
        return dist, pred

    def path_arcs(self, s: int, t: int) -> list[tuple[int, int]]:
        out = []
        v = t
        while v != s:
            p = int(self.pred[s, v])
            if p < 0:
                raise UnreachableTerminal(f"{t} not reachable from {s}")
            out.append((p, v))
            v = p
        out.reverse()
        return out

    def finite(self, x) -> bool:
        return x < self.inf

    def unscale(self, x) -> Fraction:
        return Fraction(int(x), self.scale)


@lru_cache(maxsize=64)
def scaled_graph(d: DstInstance) -> ScaledGraph:
    return ScaledGraph(d)


def all_pairs_distances(d: DstInstance) -> list[list[Fraction | float]]:
    """Exact shortest directed path costs; ``math.inf`` marks unreachable pairs."""
    g = scaled_graph(d)
    return [[g.unscale(x) if g.finite(x) else math.inf for x in row] for row in g.dist]


# ---------------------------------------------------------------------------
# Dreyfus-Wagner


def splits(mask: int) -> list[int]:
    """Proper nonempty submasks of ``mask`` that contain its lowest bit (each split once)."""
    low = mask & -mask
    rest = mask ^ low
    out = []
    sub = rest
    while True:
        if sub | low != mask:
            out.append(sub | low)
        if sub == 0:
            return out
        sub = (sub - 1) & rest


class SteinerTable:
    """cost[S][v]: cheapest v-rooted arborescence containing the terminals in bitmask S.

    Only subsets of size <= ``max_size`` are computed; the recurrences never look
    at larger subsets, so the truncated table is exact on its domain.
    """

    def __init__(self, d: DstInstance, terminals: Sequence[int], max_size: int | None = None):
        g = self.graph = scaled_graph(d)
        self.terminals = tuple(terminals)
        k = len(self.terminals)
        self.max_size = k if max_size is None else min(max_size, k)
        self.cost: dict[int, np.ndarray] = {}
        self.ext: dict[int, np.ndarray] = {}
        self.split: dict[int, np.ndarray] = {}
        inf = g.inf
        n = g.n

        for size in range(1, self.max_size + 1):
            for combo in combinations(range(k), size):
                mask = 0
                for i in combo:
                    mask |= 1 << i
                if size == 1:
                    merged = np.full(n, inf, dtype=g.dtype)
                    merged[self.terminals[combo[0]]] = 0
                    self.split[mask] = np.zeros(n, dtype=np.int64)
                else:
                    subs = splits(mask)
                    stack = np.stack([self.cost[s1] + self.cost[mask ^ s1] for s1 in subs])
                    arg = stack.argmin(axis=0)
                    merged = np.minimum(stack.min(axis=0), inf)
                    self.split[mask] = np.asarray(subs, dtype=np.int64)[arg]
                total = g.dist + merged[None, :]
                self.ext[mask] = total.argmin(axis=1)
                self.cost[mask] = np.minimum(total.min(axis=1), inf)

    def mask_of(self, vertices: Iterable[int]) -> int:
        pos = {t: i for i, t in enumerate(self.terminals)}
        m = 0
        for v in vertices:
            m |= 1 << pos[v]
        return m

    def vertices_of(self, mask: int) -> list[int]:
        return [t for i, t in enumerate(self.terminals) if mask >> i & 1]

    def value(self, mask: int, v: int) -> Fraction | float:
        x = self.cost[mask][v]
        return self.graph.unscale(x) if self.graph.finite(x) else math.inf

    def tree_arcs(self, mask: int, v: int) -> set[tuple[int, int]]:
        """Arcs of the (multi)tree realizing cost[mask][v], before deduplication."""
        g = self.graph
        arcs: set[tuple[int, int]] = set()
        stack = [(mask, v)]
        while stack:
            m, u = stack.pop()
            if not g.finite(self.cost[m][u]):
                raise UnreachableTerminal(f"no tree from {u} for {self.vertices_of(m)}")
            w = int(self.ext[m][u])
            arcs.update(g.path_arcs(u, w))
            if popcount(m) > 1:
                s1 = int(self.split[m][w])
                stack.append((s1, w))
                stack.append((m ^ s1, w))
        return arcs

    def tree(self, mask: int, v: int) -> ArborescenceSolution:
        return prune_to_arborescence(self.graph.instance, self.tree_arcs(mask, v), v, self.vertices_of(mask))

    def audit(self) -> list[str]:
        """Post-hoc check of the table's defining inequalities."""
        g = self.graph
        out = []
        for mask, row in self.cost.items():
            if popcount(mask) == 1:
                t = self.vertices_of(mask)[0]
                if not all(row[v] == min(g.dist[v, t], g.inf) for v in range(g.n)):
                    out.append(f"singleton {t}")
                continue
            for s1 in splits(mask):
                bound = np.minimum(self.cost[s1] + self.cost[mask ^ s1], g.inf)
                if any(row[v] > bound[v] for v in range(g.n)):
                    out.append(f"merge {mask}/{s1}")
            for v in range(g.n):
                for w in range(g.n):
                    if row[v] > min(g.dist[v, w] + row[w], g.inf):
                        out.append(f"extend {mask} {v}->{w}")
        return out


def prune_to_arborescence(d: DstInstance, arcs: Iterable[tuple[int, int]], root: int,
                          terminals: Iterable[int]) -> ArborescenceSolution:
    """Shortest-path arborescence of ``root`` inside the arc subset, trimmed to terminals."""
    terminals = set(terminals)
    out: dict[int, list[tuple[int, Fraction]]] = {}
    for t, h in set(arcs):
        out.setdefault(t, []).append((h, d.arc_cost[(t, h)]))
    dist = {root: Fraction(0)}
    parent: dict[int, int] = {}
    heap = [(Fraction(0), root)]
    done = set()
    while heap:
        du, u = heapq.heappop(heap)
        if u in done:
            continue
        done.add(u)
        for w, c in sorted(out.get(u, ())):
            if w == root:
                continue
            if w not in dist or du + c < dist[w]:
                dist[w] = du + c
                parent[w] = u
                heapq.heappush(heap, (dist[w], w))
    missing = [t for t in terminals if t != root and t not in parent]
    if missing:
        raise UnreachableTerminal(f"terminals {sorted(missing)} not reachable from {root} in arc subset")
    keep = set()
    for t in terminals:
        v = t
        while v != root and v not in keep:
            keep.add(v)
            v = parent[v]
    return ArborescenceSolution.of((parent[v], v, d.arc_cost[(parent[v], v)]) for v in keep)


def dreyfus_wagner_directed(d: DstInstance, root: int, terminals: Iterable[int],
                            max_terminals: int = DEFAULT_MAX_TERMINALS) -> ArborescenceSolution:
    """Minimum-cost arborescence rooted at ``root`` containing ``terminals``."""
    f = sorted(set(terminals) - {root})
    if len(f) > max_terminals:
        raise BudgetExceeded(f"{len(f)} terminals exceeds bitmask width {max_terminals}")
    if not f:
        return ArborescenceSolution.of(())
    g = scaled_graph(d)
    bad = [t for t in f if not g.finite(g.dist[root, t])]
    if bad:
        raise UnreachableTerminal(f"terminals {bad} unreachable from {root}")
    table = SteinerTable(d, f)
    full = (1 << len(f)) - 1
    sol = table.tree(full, root)
    assert sol.cost == table.value(full, root), "reconstruction disagrees with DP value"
    return sol


def min_cost_tree_from_set(d: DstInstance, roots: Iterable[int], terminals: Iterable[int],
                           max_terminals: int = DEFAULT_MAX_TERMINALS) -> tuple[int, ArborescenceSolution]:
    """Cheapest tree containing ``terminals`` rooted at some vertex of ``roots`` (lowest id on ties)."""
    roots = sorted(set(roots))
    f = sorted(set(terminals))
    if not roots:
        raise NoFeasibleRoot("empty root set")
    if not f:
        return roots[0], ArborescenceSolution.of(())
    if len(f) > max_terminals:
        raise BudgetExceeded(f"{len(f)} terminals exceeds bitmask width {max_terminals}")
    table = SteinerTable(d, f)
    full = (1 << len(f)) - 1
    row = table.cost[full]
    best = min(roots, key=lambda s: (row[s], s))
    if not table.graph.finite(row[best]):
        raise NoFeasibleRoot(f"no root in {roots} reaches all of {f}")
    return best, table.tree(full, best)


# ---------------------------------------------------------------------------
# Brute force


def brute_force_set_cover(sc: SetCoverInstance, max_sets: int = DEFAULT_MAX_SETS) -> CoverSolution:
    """Exact minimum-cost cover by branching on the lowest uncovered element."""
    if sc.set_count > max_sets:
        raise BudgetExceeded(f"{sc.set_count} sets exceeds brute-force cap {max_sets}")
    missing = sc.uncovered_elements()
    if missing:
        raise UncoverableInstance(f"elements {missing} are in no set")
    full = sc.full_mask
    masks = sc.masks
    containing = [sorted((i for i in range(sc.set_count) if masks[i] >> e & 1), key=lambda i: (sc.cost(i), i))
                  for e in range(sc.universe_size)]
    best_cost: list[Fraction | None] = [None]
    best_pick: list[tuple[int, ...]] = [()]

    def search(covered: int, picked: list[int], cost: Fraction) -> None:
        if best_cost[0] is not None and cost >= best_cost[0]:
            return
        if covered == full:
            best_cost[0] = cost
            best_pick[0] = tuple(picked)
            return
        low = (~covered & full) & -(~covered & full)
        e = low.bit_length() - 1
        for i in containing[e]:
            picked.append(i)
            search(covered | masks[i], picked, cost + sc.cost(i))
            picked.pop()

    search(0, [], Fraction(0))
    return CoverSolution.of(sc, sorted(best_pick[0]))


def brute_force_dst(d: DstInstance, root: int | None = None, terminals: Iterable[int] | None = None,
                    max_arcs: int = DEFAULT_MAX_ARCS) -> ArborescenceSolution:
    """Exact DST optimum by enumerating in-arc choices for the vertices a tree needs.

    Every arborescence whose leaves are terminals is one assignment of a parent arc
    to each of its non-root vertices; the search enumerates exactly those
    assignments (with cost pruning), never consulting shortest paths or the DP.
    """
    if len(d.arcs) > max_arcs:
        raise BudgetExceeded(f"{len(d.arcs)} arcs exceeds brute-force cap {max_arcs}")
    root = d.root if root is None else root
    terms = sorted(set(d.terminals if terminals is None else terminals) - {root})
    unreachable = [t for t in terms if t not in d.reach[root]]
    if unreachable:
        raise UnreachableTerminal(f"terminals {unreachable} unreachable from {root}")
    in_arcs: dict[int, list[tuple[Fraction, int]]] = {}
    for t, h, c in d.arcs:
        in_arcs.setdefault(h, []).append((c, t))
    for v in in_arcs:
        in_arcs[v].sort()

    parent: dict[int, tuple[int, Fraction]] = {}
    best: list = [None, None]

    def creates_cycle(u: int, v: int) -> bool:
        while u in parent:
            if u == v:
                return True
            u = parent[u][0]
        return u == v

    cheapest_in = {v: arcs[0][0] for v, arcs in in_arcs.items()}

    def search(open_: list[int], cost: Fraction, bound: Fraction) -> None:
        # bound: each open vertex still needs its own parent arc
        if best[0] is not None and cost + bound >= best[0]:
            return
        if not open_:
            best[0] = cost
            best[1] = dict(parent)
            return
        v = open_[-1]
        rest = open_[:-1]
        bound -= cheapest_in.get(v, 0)
        for c, u in in_arcs.get(v, ()):
            if creates_cycle(u, v):
                continue
            opens = u != root and u not in parent and u not in rest
            if opens and u not in cheapest_in:
                continue
            parent[v] = (u, c)
            if opens:
                search(rest + [u], cost + c, bound + cheapest_in[u])
            else:
                search(rest, cost + c, bound)
            del parent[v]

    start = sorted(terms, reverse=True)
    search(start, Fraction(0), sum((cheapest_in[t] for t in start), Fraction(0)))
    if best[1] is None:
        if not terms:
            return ArborescenceSolution.of(())
        raise UnreachableTerminal("no arborescence found")
    return ArborescenceSolution.of((u, v, c) for v, (u, c) in best[1].items())
