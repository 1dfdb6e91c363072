"""Greedy density-rule algorithms for weighted set cover and submodular cover."""
from __future__ import annotations

import itertools
from dataclasses import dataclass, field
from decimal import ROUND_CEILING, Decimal, localcontext
from fractions import Fraction
from typing import Callable, Sequence

from .errors import StalledOracle, UncoverableInstance
from .instances import CoverSolution, SetCoverInstance, as_fraction, bits, popcount

BOUND_DIGITS = 12


def chvatal_bound(d_max: int, digits: int = BOUND_DIGITS) -> Fraction:
    """1 + ln(d_max), rounded up to ``digits`` decimal places.

    >>> chvatal_bound(1)
    Fraction(1, 1)
    >>> float(chvatal_bound(4))  # doctest: +ELLIPSIS
    2.386294361...
    """
    if d_max < 1:
        raise ValueError("d_max must be a positive integer")
    with localcontext() as ctx:
        ctx.prec = 50
        value = 1 + Decimal(d_max).ln()
        rounded = value.quantize(Decimal(1).scaleb(-digits), rounding=ROUND_CEILING)
    return Fraction(rounded)


@dataclass
class GreedyStep:
    index: int
    # None for sets taken in the zero-cost pre-pass
    density: Fraction | None
    newly_covered: tuple[int, ...]


@dataclass
class GreedyTrace:
    steps: list[GreedyStep] = field(default_factory=list)
    cost: Fraction = Fraction(0)
    bound: Fraction = Fraction(1)

    @property
    def chosen(self) -> tuple[int, ...]:
        return tuple(s.index for s in self.steps)


def greedy_set_cover(sc: SetCoverInstance) -> tuple[CoverSolution, GreedyTrace]:
    """Chvatal's weighted greedy: repeatedly take the set of least cost per new element.

    Zero-cost sets that cover anything are all taken first, in index order. Ties
    on density go to the lowest set index.
    """
    missing = sc.uncovered_elements()
    if missing:
        raise UncoverableInstance(f"elements {missing} are in no set")
    masks = sc.masks
    uncovered = sc.full_mask
    trace = GreedyTrace(bound=chvatal_bound(max(1, sc.max_set_size)))

    for i in range(sc.set_count):
        if sc.cost(i) == 0 and masks[i] & uncovered:
            trace.steps.append(GreedyStep(i, None, tuple(bits(masks[i] & uncovered))))
            uncovered &= ~masks[i]

    while uncovered:
        best = None
        best_density = None
        for i in range(sc.set_count):
            gain = popcount(masks[i] & uncovered)
            if gain == 0:
                continue
            density = sc.cost(i) / gain
            if best_density is None or density < best_density:
                best, best_density = i, density
        trace.steps.append(GreedyStep(best, best_density, tuple(bits(masks[best] & uncovered))))
        uncovered &= ~masks[best]

    solution = CoverSolution.of(sc, trace.chosen)
    trace.cost = solution.cost
    return solution, trace


# ---------------------------------------------------------------------------
# Submodular cover


@dataclass(frozen=True)
class SubmodularOracle:
    """A set function over ground set ``range(ground_size)`` with element costs.

    ``f`` takes a frozenset of element ids. The caller asserts it is monotone and
    submodular; :func:`check_monotone_submodular` verifies that exhaustively.
    """

    ground_size: int
    f: Callable[[frozenset[int]], object]
    costs: tuple[Fraction, ...]

    def value(self, s: frozenset[int]) -> Fraction:
        return as_fraction(self.f(s))


@dataclass
class SubmodularCoverResult:
    chosen: tuple[int, ...]
    cost: Fraction
    densities: tuple[Fraction, ...]


def greedy_submodular_cover(o: SubmodularOracle) -> SubmodularCoverResult:
    """Add argmin c(x) / (f(S+x) - f(S)) until f(S) = f(U); ties to the lowest id."""
    target = o.value(frozenset(range(o.ground_size)))
    chosen: list[int] = []
    densities: list[Fraction] = []
    current = frozenset()
    value = o.value(current)
    while value < target:
        best = None
        best_density = None
        best_value = None
        for x in range(o.ground_size):
            if x in current:
                continue
            v = o.value(current | {x})
            gain = v - value
            if gain <= 0:
                continue
            density = as_fraction(o.costs[x]) / gain
            if best_density is None or density < best_density:
                best, best_density, best_value = x, density, v
        if best is None:
            raise StalledOracle(f"f(S)={value} < f(U)={target} but no element has positive gain")
        chosen.append(best)
        densities.append(best_density)
        current = current | {best}
        value = best_value
    cost = sum((as_fraction(o.costs[x]) for x in chosen), Fraction(0))
    return SubmodularCoverResult(tuple(chosen), cost, tuple(densities))


def coverage_oracle(sc: SetCoverInstance) -> SubmodularOracle:
    """f(S) = number of elements covered by the sets in S."""
    masks = sc.masks

    def f(s: frozenset[int]) -> int:
        m = 0
        for i in s:
            m |= masks[i]
        return popcount(m)

    return SubmodularOracle(sc.set_count, f, tuple(c for c, _ in sc.sets))


def check_monotone_submodular(o: SubmodularOracle) -> list[str]:
    """Exhaustive check over all S <= T, x not in T. Feasible for ground sets up to ~10."""
    n = o.ground_size
    values = {}
    for r in range(n + 1):
        for combo in itertools.combinations(range(n), r):
            s = frozenset(combo)
            values[s] = o.value(s)
    problems = []
    for t, ft in values.items():
        for x in range(n):
            if x in t:
                continue
            if values[t | {x}] < ft:
                problems.append(f"monotone: f({sorted(t)}+{x}) < f({sorted(t)})")
            gain_t = values[t | {x}] - ft
            rest = sorted(t)
            for r in range(len(rest) + 1):
                for combo in itertools.combinations(rest, r):
                    s = frozenset(combo)
                    if values[s | {x}] - values[s] < gain_t:
                        problems.append(f"submodular: S={sorted(s)} T={sorted(t)} x={x}")
    return problems


def modular_oracle(weights: Sequence[object], costs: Sequence[object]) -> SubmodularOracle:
    w = tuple(as_fraction(x) for x in weights)
    return SubmodularOracle(len(w), lambda s: sum((w[i] for i in s), Fraction(0)),
                            tuple(as_fraction(c) for c in costs))
