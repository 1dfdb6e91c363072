"""Core-guessing approximation for directed Steiner tree.

Guess a small set S of vertices (a candidate phi-core), connect the root to S
optimally, then cover the terminals greedily with cheapest-per-terminal trees
that hang off S and contain at most phi terminals each. The best assembled
tree over all candidate cores is returned.
"""
from __future__ import annotations

import math
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from fractions import Fraction
from functools import lru_cache
from itertools import combinations
from typing import Iterable, Sequence

import numpy as np

from .errors import BadParameters, NoCoverableTerminal, UnreachableCoreVertex, UnreachableTerminal
from .exact import (SteinerTable, brute_force_set_cover, dreyfus_wagner_directed,
                    prune_to_arborescence)
from .greedy import chvatal_bound
from .instances import (ArborescenceSolution, DstInstance, SetCoverInstance, leafify, popcount,
                        strip_added_leaves, validate)

Arc = tuple[int, int, Fraction]


# ---------------------------------------------------------------------------
# phi-cores


@dataclass(frozen=True)
class TreePiece:
    root: int
    terminals: tuple[int, ...]
    arcs: tuple[Arc, ...]

    @property
    def cost(self) -> Fraction:
        return sum((c for _, _, c in self.arcs), Fraction(0))


@dataclass(frozen=True)
class PhiCore:
    core: tuple[int, ...]
    phi: int
    pieces: tuple[TreePiece, ...] | None = None


class _Tree:
    def __init__(self, tree: ArborescenceSolution, root: int, terminals: Iterable[int]):
        self.root = root
        self.kids: dict[int, list[int]] = {}
        self.cost: dict[tuple[int, int], Fraction] = {}
        for t, h, c in tree.arcs:
            self.kids.setdefault(t, []).append(h)
            self.cost[(t, h)] = c
        for v in self.kids:
            self.kids[v].sort()
        vertices = tree.vertices | {root}
        self.terminals = set(terminals) & vertices
        self.terminals.discard(root)
        bad = [t for t in self.terminals if self.kids.get(t)]
        if bad:
            raise ValueError(f"terminals {sorted(bad)} are not leaves of the tree; leafify first")

    def postorder(self, v: int, removed: set[int]) -> list[int]:
        out, stack = [], [(v, False)]
        while stack:
            u, done = stack.pop()
            if done:
                out.append(u)
                continue
            stack.append((u, True))
            for w in self.kids.get(u, ()):
                if w not in removed:
                    stack.append((w, False))
        return out

    def loads(self, removed: set[int]) -> dict[int, int]:
        ell: dict[int, int] = {}
        for u in self.postorder(self.root, removed):
            ell[u] = (u in self.terminals) + sum(ell[w] for w in self.kids.get(u, ()) if w not in removed)
        return ell

    def piece(self, v: int, w: int | None, removed: set[int]) -> TreePiece:
        """T_vw (or T_v when w is None), restricted to arcs that lead to terminals."""
        starts = [w] if w is not None else [x for x in self.kids.get(v, ()) if x not in removed]
        arcs: list[Arc] = []
        terms: list[int] = []
        ell = {}
        for s in starts:
            for u in self.postorder(s, removed):
                ell[u] = (u in self.terminals) + sum(ell[x] for x in self.kids.get(u, ()) if x not in removed)
        for s in starts:
            if ell[s] == 0:
                continue
            arcs.append((v, s, self.cost[(v, s)]))
            for u in self.postorder(s, removed):
                if u in self.terminals:
                    terms.append(u)
                for x in self.kids.get(u, ()):
                    if x not in removed and ell[x] > 0:
                        arcs.append((u, x, self.cost[(u, x)]))
        return TreePiece(v, tuple(sorted(terms)), tuple(sorted(arcs)))


def find_phi_core(tree: ArborescenceSolution, root: int, terminals: Iterable[int], phi: int) -> PhiCore:
    """Size-bounded phi-core by repeated carving.

    Carve off a vertex v with more than phi terminals below it whose children
    each have at most phi; its child subtrees become pieces. When at most phi
    terminals remain, the root takes them as one piece. At most
    ceil(l(T)/phi) core vertices result.
    """
    if phi < 1:
        raise BadParameters("phi must be >= 1")
    t = _Tree(tree, root, terminals)
    removed: set[int] = set()
    core: list[int] = []
    pieces: list[TreePiece] = []
    while True:
        ell = t.loads(removed)
        if ell[root] <= phi:
            if ell[root] >= 1:
                core.append(root)
                pieces.append(t.piece(root, None, removed))
            break
        v = root
        while True:
            heavy = [w for w in t.kids.get(v, ()) if w not in removed and ell[w] > phi]
            if not heavy:
                break
            v = heavy[0]
        core.append(v)
        for w in t.kids.get(v, ()):
            if w not in removed and ell[w] > 0:
                pieces.append(t.piece(v, w, removed))
        removed.update(t.postorder(v, removed))
        if v == root:
            break
    return PhiCore(tuple(sorted(set(core))), phi, tuple(pieces))


def aligned_phi_core(tree: ArborescenceSolution, root: int, terminals: Iterable[int], phi: int) -> PhiCore:
    """A phi-core whose pieces share no arc with the root-to-core connecting subtree.

    Bottom-up: a vertex joins the core when its terminal-bearing free branches
    exceed phi in total, or when it sits on the connector and also has a free
    branch carrying terminals. The result may exceed ceil(l(T)/phi) vertices.
    """
    if phi < 1:
        raise BadParameters("phi must be >= 1")
    t = _Tree(tree, root, terminals)
    none: set[int] = set()
    core: list[int] = []
    pieces: list[TreePiece] = []
    anchored: dict[int, bool] = {}
    load: dict[int, int] = {}
    for v in t.postorder(root, none):
        kids = t.kids.get(v, ())
        tied = [w for w in kids if anchored[w]]
        free = [w for w in kids if not anchored[w] and load[w] > 0]
        total = (v in t.terminals) + sum(load[w] for w in free)
        if (tied and free) or (not tied and total > phi) or (v == root and free):
            core.append(v)
            pieces.extend(t.piece(v, w, none) for w in free)
            anchored[v], load[v] = True, 0
        elif tied:
            anchored[v], load[v] = True, 0
        else:
            anchored[v], load[v] = False, total
    return PhiCore(tuple(sorted(core)), phi, tuple(pieces))


def check_phi_core(pc: PhiCore, tree: ArborescenceSolution, root: int, terminals: Iterable[int],
                   size_bound: bool = True) -> list[str]:
    """Violations of the phi-core witness conditions (empty when the witness is valid)."""
    t = _Tree(tree, root, terminals)
    out = []
    if pc.pieces is None:
        return ["no-witness"]
    seen_arcs: set[tuple[int, int]] = set()
    count: dict[int, int] = {x: 0 for x in t.terminals}
    for p in pc.pieces:
        if p.root not in pc.core:
            out.append("piece-root-not-in-core")
        arcs = {(a, b) for a, b, _ in p.arcs}
        if any(a not in t.cost for a in arcs):
            out.append("piece-not-subtree")
        if arcs & seen_arcs:
            out.append("edge-disjoint")
        seen_arcs |= arcs
        sub = ArborescenceSolution.of(p.arcs)
        covered = (sub.vertices | {p.root}) & t.terminals
        if _piece_shape(p):
            out.append("piece-shape")
        if len(covered) > pc.phi:
            out.append("piece-load")
        for x in covered:
            count[x] += 1
    if any(c != 1 for c in count.values()):
        out.append("terminal-assignment")
    if size_bound and len(pc.core) > max(1, math.ceil(len(t.terminals) / pc.phi)):
        out.append("core-size")
    return sorted(set(out))


def _piece_shape(p: TreePiece) -> bool:
    """True when the piece is not an arborescence rooted at p.root."""
    parent: dict[int, int] = {}
    for a, b, _ in p.arcs:
        if b in parent or b == p.root:
            return True
        parent[b] = a
    for v in parent:
        seen = set()
        while v != p.root:
            if v in seen or v not in parent:
                return True
            seen.add(v)
            v = parent[v]
    return False


# ---------------------------------------------------------------------------
# Bounded set cover view


@dataclass(frozen=True)
class BoundedCoverView:
    """The phi-bounded set system over uncovered terminals U with roots in S.

    Members are subsets Y of U with |Y| <= phi reachable from one root; the
    system is never materialized, only searched.
    """

    instance: DstInstance
    roots: tuple[int, ...]
    uncovered: tuple[int, ...]
    phi: int


@dataclass(frozen=True)
class DensityPick:
    terminals: tuple[int, ...]
    root: int
    tree: ArborescenceSolution
    density: Fraction


class BoundedContext:
    """Steiner table for all terminal subsets of size <= phi, flattened for vector search.

    Rows are ordered by subset size descending, then lexicographically, which is
    also the tie order among equal densities.
    """

    def __init__(self, d: DstInstance, phi: int):
        self.instance = d
        self.phi = phi
        self.table = SteinerTable(d, d.terminals, max_size=phi)
        g = self.graph = self.table.graph
        k = len(d.terminals)
        self.pos = {t: i for i, t in enumerate(d.terminals)}
        order = sorted(self.table.cost, key=lambda m: (-popcount(m), _lex_key(m, k)))
        wide_masks = k > 62
        self.masks = np.array(order, dtype=object if wide_masks else np.int64)
        self.sizes = np.array([popcount(m) for m in order], dtype=np.int64)
        self.costs = np.stack([self.table.cost[m] for m in order]) if order else np.zeros((0, g.n), dtype=g.dtype)
        lcm = math.lcm(*range(1, phi + 1))
        mult = lcm // self.sizes
        # finite tree costs never exceed the total arc cost
        if g.wide or g.total * lcm >= 1 << 62:
            self.costs = self.costs.astype(object)
            mult = mult.astype(object)
            self.key_max = (g.total + 1) * lcm
        else:
            self.key_max = np.iinfo(np.int64).max
        self.mult = mult
        self._trees: dict[tuple[int, int], ArborescenceSolution] = {}

    def mask_of(self, vertices: Iterable[int]) -> int:
        m = 0
        for v in vertices:
            if v not in self.pos:
                raise ValueError(f"vertex {v} is not a terminal")
            m |= 1 << self.pos[v]
        return m

    def best(self, roots: Sequence[int], uncovered_mask: int) -> tuple[int, int, Fraction] | None:
        """(subset mask, root, density) of the least-density subset, or None."""
        if len(self.masks) == 0:
            return None
        sub = self.costs[:, list(roots)]
        arg = sub.argmin(axis=1)
        best_cost = sub[np.arange(len(arg)), arg]
        outside = ~uncovered_mask & ((1 << len(self.pos)) - 1)
        valid = (self.masks & outside) == 0
        finite = best_cost < self.graph.inf
        ok = valid & finite
        if not ok.any():
            return None
        keys = np.where(ok, np.where(ok, best_cost, 0) * self.mult, self.key_max)
        i = int(np.argmin(keys))
        mask = int(self.masks[i])
        return mask, int(roots[int(arg[i])]), Fraction(int(best_cost[i]), self.graph.scale * int(self.sizes[i]))

    def tree(self, mask: int, root: int) -> ArborescenceSolution:
        key = (mask, root)
        if key not in self._trees:
            self._trees[key] = self.table.tree(mask, root)
        return self._trees[key]

    def terminals_of(self, mask: int) -> tuple[int, ...]:
        return tuple(self.table.vertices_of(mask))


def _lex_key(mask: int, k: int) -> tuple[int, ...]:
    return tuple(i for i in range(k) if mask >> i & 1)


@lru_cache(maxsize=16)
def bounded_context(d: DstInstance, phi: int) -> BoundedContext:
    return BoundedContext(d, phi)


def min_density_set(view: BoundedCoverView, ctx: BoundedContext | None = None) -> DensityPick:
    """Least min_s c(T(s,Y))/|Y| over nonempty Y within U, |Y| <= phi, s in S."""
    if not view.uncovered:
        raise NoCoverableTerminal("no uncovered terminals")
    ctx = ctx or bounded_context(view.instance, view.phi)
    roots = sorted(set(view.roots))
    found = ctx.best(roots, ctx.mask_of(view.uncovered))
    if found is None:
        raise NoCoverableTerminal(f"no root in {roots} reaches any of {list(view.uncovered)}")
    mask, s, density = found
    return DensityPick(ctx.terminals_of(mask), s, ctx.tree(mask, s), density)


def greedy_bounded_cover(view: BoundedCoverView, ctx: BoundedContext | None = None) -> list[DensityPick]:
    """Repeated least-density picks until every terminal of U is covered."""
    ctx = ctx or bounded_context(view.instance, view.phi)
    roots = sorted(set(view.roots))
    uncovered = ctx.mask_of(view.uncovered)
    picks = []
    while uncovered:
        found = ctx.best(roots, uncovered)
        if found is None:
            left = ctx.terminals_of(uncovered)
            raise NoCoverableTerminal(f"terminals {list(left)} unreachable from roots {roots}")
        mask, s, density = found
        picks.append(DensityPick(ctx.terminals_of(mask), s, ctx.tree(mask, s), density))
        uncovered &= ~mask
    return picks


def assemble(d: DstInstance, core: Iterable[int], pieces: Sequence[DensityPick],
             root: int | None = None) -> ArborescenceSolution:
    """Union of T(r, core) and the pieces, trimmed back to an arborescence."""
    root = d.root if root is None else root
    core = sorted(set(core))
    far = [s for s in core if s not in d.reach[root]]
    if far:
        raise UnreachableCoreVertex(f"core vertices {far} unreachable from root {root}")
    connector = dreyfus_wagner_directed(d, root, core)
    arcs = {(t, h) for t, h, _ in connector.arcs}
    for p in pieces:
        arcs.update((t, h) for t, h, _ in p.tree.arcs)
    sol = prune_to_arborescence(d, arcs, root, d.terminals)
    bound = connector.cost + sum((p.tree.cost for p in pieces), Fraction(0))
    assert sol.cost <= bound
    return sol


# ---------------------------------------------------------------------------
# Main algorithm


def phi_for(terminal_count: int, gamma) -> int:
    """max(1, ceil(N^(1-gamma))), computed exactly for rational gamma."""
    g = Fraction(gamma) if not isinstance(gamma, float) else Fraction(repr(gamma))
    e = 1 - g
    if terminal_count <= 1 or e <= 0:
        return 1
    # smallest k with k^q >= N^p where e = p/q
    p, q = e.numerator, e.denominator
    target = terminal_count ** p
    k = max(1, int(terminal_count ** float(e)) - 1)
    while k ** q < target:
        k += 1
    while k > 1 and (k - 1) ** q >= target:
        k -= 1
    return k


def core_cap(terminal_count: int, phi: int, rule: str = "tight") -> int:
    if rule == "tight":
        return math.ceil(terminal_count / phi)
    if rule == "loose":
        return math.ceil(2 * terminal_count / phi)
    raise BadParameters(f"unknown core cap rule {rule!r}")


@dataclass
class ApproxRun:
    solution: ArborescenceSolution
    phi: int
    gamma: Fraction
    cap: int
    core: tuple[int, ...]
    pieces: list[DensityPick]
    candidates: int
    ratio_bound: Fraction
    pool: tuple[int, ...] = field(default=())


def candidate_pool(d: DstInstance, phi: int) -> tuple[int, ...]:
    """Non-root vertices that can be proper core members: reachable, with > phi terminals below."""
    terms = frozenset(d.terminals)
    return tuple(v for v in range(d.vertex_count)
                 if v != d.root and v in d.reach[d.root] and len(d.reach[v] & terms) > phi)


def _evaluate(d: DstInstance, ctx: BoundedContext, core: tuple[int, ...]):
    view = BoundedCoverView(d, core, d.terminals, ctx.phi)
    try:
        pieces = greedy_bounded_cover(view, ctx)
    except NoCoverableTerminal:
        return None
    return assemble(d, core, pieces), pieces


def dst_approx_detailed(d: DstInstance, gamma=Fraction(1, 2), cap: int | None = None,
                        cap_rule: str = "tight", threads: int = 1) -> ApproxRun:
    gamma = Fraction(repr(gamma)) if isinstance(gamma, float) else Fraction(gamma)
    if not Fraction(1, 2) <= gamma < 1:
        raise BadParameters(f"gamma={gamma} outside [1/2, 1)")
    report = validate(d)
    if not report.ok:
        if "reachability" in report.violations:
            raise UnreachableTerminal(str(report))
        raise BadParameters(str(report))
    if not d.terminals:
        raise BadParameters("instance has no terminals")
    work = leafify(d)
    n_terms = len(work.terminals)
    phi = phi_for(n_terms, gamma)
    cap = core_cap(n_terms, phi, cap_rule) if cap is None else cap
    ctx = bounded_context(work, phi)
    pool = candidate_pool(work, phi)
    cores = [tuple(sorted((work.root,) + extra))
             for size in range(0, cap + 1) for extra in combinations(pool, size)]

    def run_chunk(chunk):
        best = None
        for idx, core in chunk:
            got = _evaluate(work, ctx, core)
            if got is not None and (best is None or (got[0].cost, core) < (best[1][0].cost, best[2])):
                best = (idx, got, core)
        return best

    indexed = list(enumerate(cores))
    if threads > 1 and len(indexed) > 1:
        chunks = [indexed[i::threads] for i in range(threads)]
        with ThreadPoolExecutor(max_workers=threads) as pool_exec:
            results = [r for r in pool_exec.map(run_chunk, chunks) if r is not None]
    else:
        results = [r for r in [run_chunk(indexed)] if r is not None]
    if not results:
        raise UnreachableTerminal("no feasible candidate core")
    idx, (sol, pieces), core = min(results, key=lambda r: (r[1][0].cost, r[2]))
    if work is not d:
        sol = strip_added_leaves(sol, d.vertex_count)
    return ApproxRun(sol, phi, gamma, cap, core, pieces, len(cores), chvatal_bound(phi), pool)


def dst_approx(d: DstInstance, gamma=Fraction(1, 2), cap: int | None = None,
               cap_rule: str = "tight", threads: int = 1) -> ArborescenceSolution:
    """Best assembled tree over candidate cores; within 1 + ln(phi) of optimal."""
    return dst_approx_detailed(d, gamma, cap, cap_rule, threads).solution


# ---------------------------------------------------------------------------
# Decomposition audit


@dataclass
class DecompositionAudit:
    core: tuple[int, ...]
    phi: int
    opt_cost: Fraction
    connector_cost: Fraction
    bounded_opt: Fraction
    holds: bool
    witness_problems: list[str]
    proof_core: tuple[int, ...]
    proof_core_slack: Fraction

    @property
    def rhs(self) -> Fraction:
        return self.bounded_opt + self.connector_cost


def bounded_set_cover(d: DstInstance, roots: Iterable[int], phi: int) -> SetCoverInstance:
    """Materialize the bounded set system over all terminals as a weighted SetCoverInstance."""
    ctx = bounded_context(d, phi)
    roots = sorted(set(roots))
    sets = []
    for mask, row in ctx.table.cost.items():
        best = min(row[s] for s in roots)
        if best < ctx.graph.inf:
            members = [ctx.pos[t] for t in ctx.table.vertices_of(mask)]
            sets.append((Fraction(int(best), ctx.graph.scale), members))
    sets.sort(key=lambda s: (len(s[1]), s[1]))
    return SetCoverInstance.build(len(d.terminals), sets)


def _identity_sides(d: DstInstance, core: Sequence[int], phi: int, max_sets: int):
    connector = dreyfus_wagner_directed(d, d.root, core)
    sc = bounded_set_cover(d, core, phi)
    opt = brute_force_set_cover(sc, max_sets=max_sets)
    return connector.cost, opt.cost


def decomposition_audit(d: DstInstance, t_opt: ArborescenceSolution, phi: int,
                        core: Iterable[int] | None = None, max_sets: int = 64) -> DecompositionAudit:
    """Check c(T_opt) == OPT_SC(bounded system on core) + c(T(r, core)) exactly.

    Without an explicit core, the aligned core of ``t_opt`` is used; the proof's
    size-bounded core is also evaluated and its slack (rhs - lhs, never negative)
    reported.
    """
    if core is None:
        pc = aligned_phi_core(t_opt, d.root, d.terminals, phi)
        core = pc.core
        witness = check_phi_core(pc, t_opt, d.root, d.terminals, size_bound=False)
    else:
        core = tuple(sorted(set(core)))
        witness = []
    connector, bounded = _identity_sides(d, core, phi, max_sets)
    proof = find_phi_core(t_opt, d.root, d.terminals, phi)
    p_conn, p_bounded = _identity_sides(d, proof.core, phi, max_sets)
    return DecompositionAudit(
        core=tuple(core), phi=phi, opt_cost=t_opt.cost, connector_cost=connector,
        bounded_opt=bounded, holds=t_opt.cost == connector + bounded, witness_problems=witness,
        proof_core=proof.core, proof_core_slack=p_conn + p_bounded - t_opt.cost)
