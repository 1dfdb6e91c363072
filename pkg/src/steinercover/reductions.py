"""Label Cover to Set Cover pipeline: soundness measurement, dispersers, partition systems, the B x U gadget."""
from __future__ import annotations

import itertools
import math
import random
from dataclasses import dataclass, field
from decimal import Decimal, localcontext
from fractions import Fraction
from typing import Iterator

from .errors import BadParameters, BudgetExceeded, DegreeMismatch, ParameterMismatch, ValidationError
from .exact import brute_force_set_cover
from .instances import (CoverSolution, Labeling, LabelCoverInstance, ListLabeling, SetCoverInstance,
                        as_fraction, mask_of)

DEFAULT_BUDGET = 2_000_000


def derive_seed(seed: int, stage: str) -> int:
    """Independent per-stage seed, stable across runs and platforms."""
    return random.Random(f"{seed}:{stage}").getrandbits(63)


# ---------------------------------------------------------------------------
# Labelings and soundness


def best_labeling(lc: LabelCoverInstance, budget: int = DEFAULT_BUDGET) -> tuple[Labeling, Fraction]:
    """Labeling covering the most edges, with the covered fraction.

    Enumerates A-side labelings; for a fixed A-side the best B-label at each b
    is a majority vote over projected symbols (ties to the smaller symbol), so
    the search is exact.
    """
    space = lc.sigma_a ** lc.a_count
    if space > budget:
        raise BudgetExceeded(f"{space} A-side labelings exceed budget {budget}")
    if not lc.edges:
        return Labeling((0,) * lc.a_count, (0,) * lc.b_count), Fraction(1)
    best = None
    best_count = -1
    for phi_a in itertools.product(range(lc.sigma_a), repeat=lc.a_count):
        phi_b = []
        count = 0
        for ks in lc.incoming:
            votes = [0] * lc.sigma_b
            for k in ks:
                votes[lc.projections[k][phi_a[lc.edges[k][0]]]] += 1
            top = max(votes)
            phi_b.append(votes.index(top))
            count += top
        if count > best_count:
            best, best_count = Labeling(phi_a, tuple(phi_b)), count
            if count == len(lc.edges):
                break
    return best, Fraction(best_count, len(lc.edges))


def _image_masks(lc: LabelCoverInstance, lists: list[tuple[int, ...]]) -> list[list[int]]:
    # images[k][j]: Sigma_B mask reached by edge k under the j-th candidate list
    return [[mask_of(lc.projections[k][s] for s in lst) for lst in lists] for k in range(len(lc.edges))]


def _non_disagreeing(lc: LabelCoverInstance, images: list[list[int]], choice: tuple[int, ...]) -> int:
    count = 0
    for ks in lc.incoming:
        seen = 0
        for k in ks:
            m = images[k][choice[lc.edges[k][0]]]
            if seen & m:
                count += 1
                break
            seen |= m
    return count


@dataclass
class SoundnessMeasurement:
    fraction: Fraction
    witness: ListLabeling
    mode: str
    checked: int


def measure_agreement_soundness(lc: LabelCoverInstance, ell: int, budget: int = DEFAULT_BUDGET,
                                mode: str = "exhaustive", samples: int = 1000,
                                seed: int = 0) -> SoundnessMeasurement:
    """Max over list assignments of the fraction of B-vertices not in total disagreement.

    A vertex b is not in total disagreement when two distinct neighbours hold
    labels projecting to the same symbol. Lists have exactly min(ell, |Sigma_A|)
    labels; larger lists never lower the maximum. In "sampled" mode the result is
    a lower bound from ``samples`` random assignments.
    """
    if ell < 1:
        raise BadParameters("list bound must be >= 1")
    if mode not in ("exhaustive", "sampled"):
        raise BadParameters(f"unknown mode {mode!r}")
    k = min(ell, lc.sigma_a)
    lists = list(itertools.combinations(range(lc.sigma_a), k))
    images = _image_masks(lc, lists)
    total = max(1, lc.b_count)

    if mode == "exhaustive":
        space = len(lists) ** lc.a_count
        if space > budget:
            raise BudgetExceeded(f"{space} list assignments exceed budget {budget}")
        choices: Iterator[tuple[int, ...]] = itertools.product(range(len(lists)), repeat=lc.a_count)
    else:
        rng = random.Random(seed)
        choices = (tuple(rng.randrange(len(lists)) for _ in range(lc.a_count)) for _ in range(samples))

    best_choice = (0,) * lc.a_count
    best = -1
    checked = 0
    for choice in choices:
        checked += 1
        c = _non_disagreeing(lc, images, choice)
        if c > best:
            best, best_choice = c, choice
            if c == lc.b_count:
                break
    witness = ListLabeling(tuple(lists[j] for j in best_choice), k)
    return SoundnessMeasurement(Fraction(max(best, 0), total), witness, mode, checked)


def non_disagreement(lc: LabelCoverInstance, labeling: ListLabeling) -> Fraction:
    lists = sorted(set(labeling.phi_a))
    index = {lst: j for j, lst in enumerate(lists)}
    images = _image_masks(lc, lists)
    choice = tuple(index[lst] for lst in labeling.phi_a)
    return Fraction(_non_disagreeing(lc, images, choice), max(1, lc.b_count))


# ---------------------------------------------------------------------------
# Disperser graph


def is_prime_power(n: int) -> bool:
    if n < 2:
        return False
    p = next(p for p in range(2, n + 1) if n % p == 0)
    while n % p == 0:
        n //= p
    return n == 1


def _is_power_of(q: int, base: int) -> bool:
    if q < base:
        return False
    while q % base == 0:
        q //= base
    return q == 1


@dataclass(frozen=True)
class DisperserGraph:
    q: int
    D: int
    eps: Fraction
    seed: int
    # neighbors[v]: the D distinct U-vertices adjacent to v, sorted
    neighbors: tuple[tuple[int, ...], ...]

    @property
    def v_count(self) -> int:
        return len(self.neighbors)

    def u_degrees(self) -> list[int]:
        deg = [0] * self.q
        for nb in self.neighbors:
            for x in nb:
                deg[x] += 1
        return deg


def build_disperser(q: int, D: int, eps, seed: int, v_count: int | None = None) -> DisperserGraph:
    """Seeded random bipartite graph, V-regular of degree D and U-regular where divisibility allows."""
    from .generators import _biregular_edges

    if not is_prime_power(D):
        raise BadParameters(f"D={D} is not a prime power >= 2")
    if not _is_power_of(q, D):
        raise BadParameters(f"q={q} is not a power of D={D}")
    eps = as_fraction(eps)
    if not 0 < eps < 1:
        raise BadParameters("eps must lie in (0, 1)")
    v_count = q * q if v_count is None else v_count
    if v_count < 1 or (v_count * D) % q:
        raise BadParameters("v_count * D must be a positive multiple of q")
    edges = _biregular_edges(q, v_count, D, random.Random(seed))
    neighbors = [[] for _ in range(v_count)]
    for x, v in edges:
        neighbors[v].append(x)
    return DisperserGraph(q, D, eps, seed, tuple(tuple(sorted(nb)) for nb in neighbors))


def set_partitions(n: int, max_part: int) -> Iterator[tuple[int, ...]]:
    """Restricted growth strings of length n whose blocks have at most max_part points."""
    labels = [0] * n
    sizes: list[int] = []

    def rec(i: int):
        if i == n:
            yield tuple(labels)
            return
        for b in range(len(sizes) + 1):
            if b == len(sizes):
                sizes.append(0)
            if sizes[b] < max_part:
                sizes[b] += 1
                labels[i] = b
                yield from rec(i + 1)
                sizes[b] -= 1
            if sizes[b] == 0:
                sizes.pop()

    if n == 0:
        yield ()
    elif max_part >= 1:
        yield from rec(0)


@dataclass
class DisperserCheck:
    ok: bool
    worst: Fraction
    witness: tuple[int, ...]
    mode: str
    checked: int


def _collisions(h: DisperserGraph, labels: tuple[int, ...]) -> int:
    return sum(1 for nb in h.neighbors if len({labels[x] for x in nb}) < len(nb))


def check_disperser(h: DisperserGraph, exhaustive_limit: int = 6, samples: int = 2000,
                    seed: int = 0) -> DisperserCheck:
    """Worst fraction of V with two neighbours in one part, over partitions with parts <= eps*q."""
    max_part = math.floor(h.eps * h.q)
    bound = h.eps * h.D * h.D
    if h.q <= exhaustive_limit:
        mode = "exhaustive"
        family: Iterator[tuple[int, ...]] = set_partitions(h.q, max_part)
    else:
        mode = "spot-checked"
        rng = random.Random(seed)

        def sampled():
            for _ in range(samples):
                order = rng.sample(range(h.q), h.q)
                labels = [0] * h.q
                part, pos = 0, 0
                while pos < h.q:
                    size = rng.randint(1, max_part)
                    for x in order[pos:pos + size]:
                        labels[x] = part
                    pos += size
                    part += 1
                yield tuple(labels)

        family = sampled() if max_part >= 1 else iter(())
    worst, witness, checked = Fraction(0), tuple(range(h.q)), 0
    for labels in family:
        checked += 1
        f = Fraction(_collisions(h, labels), h.v_count)
        if f > worst:
            worst, witness = f, labels
    return DisperserCheck(worst <= bound, worst, witness, mode, checked)


# ---------------------------------------------------------------------------
# Agreement-soundness transform


def agreement_reduction(lc: LabelCoverInstance, h: DisperserGraph) -> LabelCoverInstance:
    """Replace each b by copies <b, v>, v in V_H; <b, v> sees the neighbours of b indexed by N_H(v)."""
    if lc.b_degree is None or lc.a_degree is None:
        raise DegreeMismatch("input label cover is not bi-regular")
    if lc.b_degree != h.q:
        raise DegreeMismatch(f"B-degree {lc.b_degree} differs from |U_H| = {h.q}")
    edges, projections = [], []
    for b, ks in enumerate(lc.incoming):
        for v, nb in enumerate(h.neighbors):
            for x in nb:
                k = ks[x]
                edges.append((lc.edges[k][0], b * h.v_count + v))
                projections.append(lc.projections[k])
    return LabelCoverInstance.build(lc.a_count, lc.b_count * h.v_count, lc.sigma_a, lc.sigma_b,
                                    edges, projections)


def lift_labeling(labeling: Labeling, h: DisperserGraph) -> Labeling:
    """The inherited labeling: <b, v> takes the label of b."""
    return Labeling(labeling.phi_a, tuple(s for s in labeling.phi_b for _ in range(h.v_count)))


# ---------------------------------------------------------------------------
# Partition systems


@dataclass(frozen=True)
class PartitionSystem:
    u: int
    D: int
    seed: int
    # assignment[j][x]: part of point x in partition j
    assignment: tuple[tuple[int, ...], ...]

    @property
    def m(self) -> int:
        return len(self.assignment)

    def part(self, j: int, k: int) -> tuple[int, ...]:
        return tuple(x for x, p in enumerate(self.assignment[j]) if p == k)

    def part_masks(self) -> list[list[int]]:
        masks = [[0] * self.D for _ in range(self.m)]
        for j, row in enumerate(self.assignment):
            for x, p in enumerate(row):
                masks[j][p] |= 1 << x
        return masks

    def problems(self) -> list[str]:
        out = []
        for row in self.assignment:
            if len(row) != self.u or any(not 0 <= p < self.D for p in row):
                out.append("partition-shape")
                break
        return out


def build_partition_system(u: int, m: int, D: int, seed: int) -> PartitionSystem:
    """m independent uniformly random partitions of range(u) into D near-equal parts."""
    if not (u >= D >= 2 and m >= 1):
        raise BadParameters("need u >= D >= 2 and m >= 1")
    rng = random.Random(seed)
    rows = []
    for _ in range(m):
        perm = rng.sample(range(u), u)
        row = [0] * u
        for i, x in enumerate(perm):
            row[x] = i * D // u
        rows.append(tuple(row))
    return PartitionSystem(u, D, seed, tuple(rows))


@dataclass
class PartitionCheck:
    ok: bool
    # (partition, part) pairs of a cover, empty when ok
    witness: tuple[tuple[int, int], ...]
    searched: int


def verify_partition_system(ps: PartitionSystem, ell: int,
                            budget: int = DEFAULT_BUDGET) -> PartitionCheck:
    """Search for a cover by at most ``ell`` parts taken from pairwise distinct partitions.

    Smallest covers are tried first, so a returned witness is minimum size.
    """
    if ell < 1:
        raise BadParameters("ell must be >= 1")
    top = min(ell, ps.m)
    space = sum(math.comb(ps.m, s) * ps.D ** s for s in range(1, top + 1))
    if space > budget:
        raise BudgetExceeded(f"{space} part selections exceed budget {budget}")
    masks = ps.part_masks()
    full = (1 << ps.u) - 1
    searched = 0
    for size in range(1, top + 1):
        for js in itertools.combinations(range(ps.m), size):
            for ks in itertools.product(range(ps.D), repeat=size):
                searched += 1
                covered = 0
                for j, k in zip(js, ks):
                    covered |= masks[j][k]
                if covered == full:
                    return PartitionCheck(False, tuple(zip(js, ks)), searched)
    return PartitionCheck(True, (), searched)


# ---------------------------------------------------------------------------
# The B x U gadget


def set_index(lc: LabelCoverInstance, a: int, sigma: int) -> int:
    return a * lc.sigma_a + sigma


def lc_to_set_cover(lc: LabelCoverInstance, ps: PartitionSystem) -> SetCoverInstance:
    """Elements b*u + x; set a*|Sigma_A| + sigma is S_{a,sigma}, unit cost."""
    if ps.m != lc.sigma_b:
        raise ParameterMismatch(f"partition count {ps.m} != |Sigma_B| = {lc.sigma_b}")
    if lc.b_degree is None or ps.D != lc.b_degree:
        raise ParameterMismatch(f"part count {ps.D} != B-degree {lc.b_degree}")
    parts = [[ps.part(j, k) for k in range(ps.D)] for j in range(ps.m)]
    members: list[set[int]] = [set() for _ in range(lc.a_count * lc.sigma_a)]
    for k, (a, b) in enumerate(lc.edges):
        i = lc.incoming_index[k]
        pi = lc.projections[k]
        for sigma in range(lc.sigma_a):
            members[set_index(lc, a, sigma)].update(b * ps.u + x for x in parts[pi[sigma]][i])
    return SetCoverInstance.build(lc.b_count * ps.u, [(1, sorted(s)) for s in members])


def cover_from_labeling(lc: LabelCoverInstance, sc: SetCoverInstance, labeling: Labeling) -> CoverSolution:
    return CoverSolution.of(sc, [set_index(lc, a, s) for a, s in enumerate(labeling.phi_a)])


# ---------------------------------------------------------------------------
# Parameter schedule


def smallest_prime_power_at_least(x) -> int:
    n = max(2, math.ceil(as_fraction(x)))
    while not is_prime_power(n):
        n += 1
    return n


def _ln(n: int) -> Decimal:
    with localcontext() as ctx:
        ctx.prec = 50
        return Decimal(n).ln()


def _ceil_root_power(base: int, exponent: Fraction) -> int:
    """Smallest integer u with u >= base**exponent, exact for modest denominators."""
    p, q = exponent.numerator, exponent.denominator
    if p * base.bit_length() > 200_000 or q > 10_000:
        return math.ceil(base ** float(exponent))
    target = base ** p
    u = max(1, int(round(base ** float(exponent))))
    while u ** q < target:
        u += 1
    while u > 1 and (u - 1) ** q >= target:
        u -= 1
    return u


@dataclass
class ReductionParams:
    gamma: Fraction
    delta: Fraction
    alpha: Fraction
    D: int
    gamma_prime: Fraction
    n0: int
    n1: int
    u: int
    ell: int
    eps0: Fraction
    eps: Fraction
    q: int | None = None
    overrides: dict = field(default_factory=dict)

    @property
    def N(self) -> int:
        return self.n1 * self.u

    @property
    def gap_factor(self) -> Fraction:
        return (1 - self.delta) * (1 - self.gamma_prime)

    @property
    def gap(self) -> float:
        return float(self.gap_factor) * math.log(self.N)

    def ln_u_identity(self) -> tuple[float, float]:
        """(ln u, (1 - gamma') ln(n1 u)); equal up to the rounding of u."""
        return math.log(self.u), float(1 - self.gamma_prime) * math.log(self.N)

    def u_condition(self, m: int) -> bool:
        """u >= (D^{ln D} ln m)^{1/alpha} with the hidden constant set to 1."""
        if m < 2:
            return True
        inner = self.D ** math.log(self.D) * math.log(m)
        return math.log(self.u) >= math.log(inner) / float(self.alpha)

    def as_dict(self) -> dict:
        return {
            "gamma": str(self.gamma), "delta": str(self.delta), "alpha": str(self.alpha),
            "D": self.D, "gamma_prime": str(self.gamma_prime), "n0": self.n0, "n1": self.n1,
            "u": self.u, "ell": self.ell, "eps0": str(self.eps0), "eps": str(self.eps), "q": self.q,
            "overrides": dict(self.overrides),
        }


def schedule_params(n0: int, gamma, delta, n1: int, q: int | None = None,
                    overrides: dict | None = None) -> ReductionParams:
    """alpha = 2 delta, D the least prime power >= 2/alpha, gamma' = (gamma-delta)/(1-delta),
    u = ceil(n1^((1-gamma')/gamma')), ell = ceil(D (1-alpha) ln u), eps0 = alpha/(2 D^2 ell^2), eps = eps0^2 D^2.

    ``overrides`` may pin D, u or ell (desk-scale runs); dependants are recomputed.
    """
    gamma, delta = as_fraction(gamma), as_fraction(delta)
    overrides = dict(overrides or {})
    if not 0 < delta < gamma < 1:
        raise BadParameters("need 0 < delta < gamma < 1")
    if n1 < 2:
        raise BadParameters("n1 must be >= 2")
    alpha = 2 * delta
    if alpha >= 1:
        raise BadParameters("alpha = 2*delta must be < 1")
    D = int(overrides.get("D") or smallest_prime_power_at_least(2 / alpha))
    if not is_prime_power(D):
        raise BadParameters(f"D={D} is not a prime power")
    gamma_prime = (gamma - delta) / (1 - delta)
    u = int(overrides.get("u") or _ceil_root_power(n1, (1 - gamma_prime) / gamma_prime))
    if u < 1:
        raise BadParameters("u must be >= 1")
    if overrides.get("ell"):
        ell = int(overrides["ell"])
    else:
        with localcontext() as ctx:
            ctx.prec = 50
            raw = Decimal(D) * (Decimal(1) - Decimal(alpha.numerator) / Decimal(alpha.denominator)) * _ln(u)
        ell = max(1, math.ceil(raw))
    eps0 = alpha / (2 * D * D * ell * ell)
    eps = eps0 * eps0 * D * D
    return ReductionParams(gamma, delta, alpha, D, gamma_prime, n0, n1, u, ell, eps0, eps, q, overrides)


# ---------------------------------------------------------------------------
# Pipeline


@dataclass
class PipelineResult:
    sc: SetCoverInstance
    params: ReductionParams
    report: dict
    lc_prime: LabelCoverInstance
    disperser: DisperserGraph
    partition_system: PartitionSystem


def soundness_threshold(params: ReductionParams, a_count: int) -> float:
    """|A'| (1 - 2 alpha) ln u: covers at or below this size force list agreement above alpha."""
    return a_count * float(1 - 2 * params.alpha) * math.log(params.u)


def run_pipeline(lc: LabelCoverInstance, gamma, delta, seed: int, overrides: dict | None = None,
                 planted: Labeling | None = None, budget: int = DEFAULT_BUDGET,
                 max_sets: int = 20, max_elements: int = 24, ps_attempts: int = 50) -> PipelineResult:
    """schedule -> disperser -> agreement transform -> partition system -> gadget, plus an audit."""
    overrides = dict(overrides or {})
    q = lc.b_degree
    if q is None or lc.a_degree is None:
        raise ValidationError("label cover must be bi-regular; regenerate with gen-lc")
    probe = schedule_params(lc.size, gamma, delta, 2, q=q, overrides=overrides)
    D = probe.D
    if not _is_power_of(q, D):
        raise BadParameters(f"B-degree {q} is not a power of D={D}; regenerate with --b-degree {D}"
                            " or override D")
    v_count = int(overrides.get("v_count") or q * q)
    b_prime = lc.b_count * v_count
    n1 = lc.a_count + b_prime + b_prime * D
    params = schedule_params(lc.size, gamma, delta, n1, q=q, overrides=overrides)

    h = build_disperser(q, D, params.eps0, derive_seed(seed, "disperser"), v_count)
    lc_prime = agreement_reduction(lc, h)
    assert lc_prime.size == n1

    report: dict = {"seed": seed, "seeds": {"disperser": h.seed}, "params": params.as_dict()}
    ps = None
    ps_status = "unverified"
    for attempt in range(ps_attempts):
        ps = build_partition_system(params.u, lc.sigma_b, D, derive_seed(seed, f"partitions:{attempt}"))
        try:
            check = verify_partition_system(ps, params.ell, budget)
        except BudgetExceeded:
            ps_status = "skipped (budget)"
            break
        if check.ok:
            ps_status = "verified"
            break
        ps_status = "failed"
    report["seeds"]["partitions"] = ps.seed
    report["partition_system"] = ps_status

    sc = lc_to_set_cover(lc_prime, ps)
    a_prime = lc_prime.a_count
    report.update({
        "N": sc.universe_size, "M": sc.set_count, "b_prime": lc_prime.b_count,
        "gap": params.gap, "gap_factor": str(params.gap_factor),
        "ln_u_identity": params.ln_u_identity(), "u_condition": params.u_condition(lc.sigma_b),
        "soundness_threshold": soundness_threshold(params, a_prime),
    })
    if planted is not None:
        lifted = lift_labeling(planted, h)
        cover = cover_from_labeling(lc_prime, sc, lifted)
        problems = cover.problems(sc)
        report["planted_cover"] = list(cover.chosen)
        report["completeness"] = (f"cover of size |A'| found ({a_prime})" if not problems
                                  else f"planted cover invalid: {problems}")
    if sc.set_count <= max_sets:
        opt = brute_force_set_cover(sc, max_sets=max_sets)
        report["opt"] = str(opt.cost)
        report["opt_cover"] = list(opt.chosen)
        if sc.universe_size <= max_elements:
            try:
                measured = measure_agreement_soundness(lc_prime, params.ell, budget)
            except BudgetExceeded:
                measured = None
            if measured is not None:
                premise = float(opt.cost) <= report["soundness_threshold"]
                report["list_agreement"] = str(measured.fraction)
                report["soundness_premise"] = premise
                report["soundness_contrapositive"] = (not premise) or measured.fraction > params.alpha
    return PipelineResult(sc, params, report, lc_prime, h, ps)

