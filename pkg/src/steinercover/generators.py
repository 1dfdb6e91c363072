"""Seeded random instance generators. Every output is a pure function of its arguments."""
from __future__ import annotations

import random
from fractions import Fraction

from .errors import BadParameters
from .instances import DstInstance, Labeling, LabelCoverInstance, SetCoverInstance


def gen_set_cover(universe_size: int, set_count: int, seed: int, max_cost: int = 9,
                  max_set_size: int | None = None) -> SetCoverInstance:
    if universe_size < 0 or set_count < 1 or max_cost < 1:
        raise BadParameters("need universe_size >= 0, set_count >= 1, max_cost >= 1")
    rng = random.Random(seed)
    cap = max_set_size or universe_size
    members: list[set[int]] = [set() for _ in range(set_count)]
    # one home set per element guarantees coverability
    for e in range(universe_size):
        members[rng.randrange(set_count)].add(e)
    for s in members:
        extra = rng.randint(0, max(0, cap - len(s)))
        s.update(rng.sample(range(universe_size), min(extra, universe_size)))
    sets = [(rng.randint(1, max_cost), sorted(s)) for s in members]
    return SetCoverInstance.build(universe_size, sets)


def gen_dst(vertex_count: int, terminal_count: int, seed: int, arc_count: int | None = None,
            max_cost: int = 9, leaf_terminals: bool = False) -> DstInstance:
    """Random digraph rooted at 0 with every terminal reachable.

    A random spanning arborescence guarantees reachability; extra random arcs
    are added up to ``arc_count`` (default 2n). With ``leaf_terminals`` the
    terminals get no out-arcs.
    """
    n = vertex_count
    if n < 2 or not 1 <= terminal_count <= n - 1:
        raise BadParameters("need n >= 2 and 1 <= terminals <= n-1")
    rng = random.Random(seed)
    others = list(range(1, n))
    terminals = set(rng.sample(others, terminal_count))
    if leaf_terminals:
        inner = [0] + [v for v in others if v not in terminals]
    else:
        inner = list(range(n))
    order = [v for v in others if v not in terminals] if leaf_terminals else others[:]
    rng.shuffle(order)
    if leaf_terminals:
        tail = sorted(terminals)
        rng.shuffle(tail)
        order += tail
    placed = [0]
    arcs: dict[tuple[int, int], int] = {}
    for v in order:
        candidates = [u for u in placed if not (leaf_terminals and u in terminals)]
        u = rng.choice(candidates)
        arcs[(u, v)] = rng.randint(1, max_cost)
        placed.append(v)
    target = 2 * n if arc_count is None else arc_count
    pairs = [(u, v) for u in inner for v in range(n) if u != v and v != 0 and (u, v) not in arcs]
    rng.shuffle(pairs)
    for u, v in pairs[:max(0, target - len(arcs))]:
        arcs[(u, v)] = rng.randint(1, max_cost)
    return DstInstance.build(n, ((u, v, c) for (u, v), c in arcs.items()), 0, terminals)


def _biregular_edges(a_count: int, b_count: int, b_degree: int, rng: random.Random) -> list[tuple[int, int]]:
    if b_degree < 1 or b_degree > a_count:
        raise BadParameters("need 1 <= b_degree <= a_count")
    if (b_count * b_degree) % a_count:
        raise BadParameters("b_count * b_degree must be divisible by a_count for bi-regularity")
    a_degree = b_count * b_degree // a_count
    if a_degree > b_count:
        raise BadParameters("a_degree would exceed b_count")
    for _ in range(1000):
        stubs = [a for a in range(a_count) for _ in range(a_degree)]
        rng.shuffle(stubs)
        groups = [stubs[b * b_degree:(b + 1) * b_degree] for b in range(b_count)]
        # repair repeated A-vertices inside a group by swapping with other groups
        for _ in range(50 * len(stubs)):
            bad = [(b, i) for b, g in enumerate(groups) for i, a in enumerate(g) if g.index(a) != i]
            if not bad:
                break
            b, i = bad[0]
            b2 = rng.randrange(b_count)
            j = rng.randrange(b_degree)
            x, y = groups[b][i], groups[b2][j]
            if b2 != b and y not in groups[b] and x not in groups[b2]:
                groups[b][i], groups[b2][j] = y, x
        if all(len(set(g)) == len(g) for g in groups):
            return [(a, b) for b, g in enumerate(groups) for a in sorted(g)]
    raise BadParameters("could not build a simple bi-regular graph")


def gen_label_cover(a_count: int, b_count: int, sigma_a: int, sigma_b: int, b_degree: int,
                    seed: int) -> LabelCoverInstance:
    rng = random.Random(seed)
    edges = _biregular_edges(a_count, b_count, b_degree, rng)
    projections = [[rng.randrange(sigma_b) for _ in range(sigma_a)] for _ in edges]
    return LabelCoverInstance.build(a_count, b_count, sigma_a, sigma_b, edges, projections)


def gen_label_cover_planted(a_count: int, b_count: int, sigma_a: int, sigma_b: int, b_degree: int,
                            seed: int) -> tuple[LabelCoverInstance, Labeling]:
    """Random bi-regular projection game together with a labeling that covers every edge."""
    if sigma_a < 1 or sigma_b < 1:
        raise BadParameters("alphabets must be nonempty")
    rng = random.Random(seed)
    edges = _biregular_edges(a_count, b_count, b_degree, rng)
    phi_a = tuple(rng.randrange(sigma_a) for _ in range(a_count))
    phi_b = tuple(rng.randrange(sigma_b) for _ in range(b_count))
    projections = []
    for a, b in edges:
        pi = [rng.randrange(sigma_b) for _ in range(sigma_a)]
        pi[phi_a[a]] = phi_b[b]
        projections.append(pi)
    lc = LabelCoverInstance.build(a_count, b_count, sigma_a, sigma_b, edges, projections)
    return lc, Labeling(phi_a, phi_b)


def random_costs(count: int, seed: int, max_cost: int = 9) -> list[Fraction]:
    rng = random.Random(seed)
    return [Fraction(rng.randint(1, max_cost)) for _ in range(count)]
