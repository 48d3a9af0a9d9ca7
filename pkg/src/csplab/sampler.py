"""Seeded generators for random planted and unplanted CSP instances.

Candidate clauses are totally ordered: lexicographic in the sorted edge,
then in the semantics payload (the forbidden pattern, the parity target,
or the edge ordering for the predicate family).  A binomial draw at
inclusion probability p walks this order with geometric skips, so the
cost is proportional to the number of clauses produced, not to the
candidate count.  For coupled draws across several densities, each
candidate hit at the largest density owns one uniform variate derived
from (seed, rank); thresholding that variate yields nested formulas
whose marginal law at every density is exact.

Plant, skip and thinning variates live in separate labeled streams, so
re-running with the plant fixed reproduces the clause draw exactly.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field, replace
from enum import Enum
from typing import Optional, Sequence

import numpy as np

from .errors import DensityError, InvalidArgumentError, UnsupportedFamilyError
from .formulas import (
    Clause,
    Family,
    Formula,
    GoldTarget,
    NaeForbidden,
    SampleModel,
    SatForbidden,
    XorTarget,
    nae_canonical,
    pack_edge_values,
)
from .predicates import Predicate
from .rng import make_generator, stream_key, unit_variate


class PlantedMode(str, Enum):
    RANDOM_PLANT = "random"
    FIXED_PLANT = "fixed"
    UNPLANTED = "unplanted"


class Scheme(str, Enum):
    BINOMIAL = "binomial"
    UNIFORM = "uniform"


def _combination_at_rank(rank: int, n: int, k: int) -> tuple[int, ...]:
    """The rank-th k-subset of [0, n) in lexicographic order."""
    out = []
    x = 0
    for i in range(k):
        while True:
            block = math.comb(n - 1 - x, k - 1 - i)
            if rank < block:
                break
            rank -= block
            x += 1
        out.append(x)
        x += 1
    return tuple(out)


def _permutation_at_rank(items: Sequence[int], rank: int) -> tuple[int, ...]:
    """The rank-th ordering of `items` in lexicographic order."""
    pool = list(items)
    out = []
    for i in range(len(items), 0, -1):
        block = math.factorial(i - 1)
        idx, rank = divmod(rank, block)
        out.append(pool.pop(idx))
    return tuple(out)


@dataclass(frozen=True)
class CandidateSpace:
    """Sizes and rank/clause bijections of the candidate clause set."""

    family: Family
    n: int
    k: int

    def edge_count(self) -> int:
        return math.comb(self.n, self.k)

    def full_multiplicity(self) -> int:
        """Candidate clauses per (sorted) edge, ignoring any plant."""
        if self.family is Family.SAT:
            return 1 << self.k
        if self.family is Family.NAESAT:
            return 1 << (self.k - 1)
        if self.family is Family.XORSAT:
            return 2
        return math.factorial(self.k)  # one per edge ordering

    def eligible_multiplicity(self) -> int:
        """Candidate clauses per edge that a given plant satisfies."""
        if self.family is Family.SAT:
            return (1 << self.k) - 1
        if self.family is Family.NAESAT:
            return (1 << (self.k - 1)) - 1
        if self.family is Family.XORSAT:
            return 1
        return math.factorial(self.k)

    def total_candidates(self) -> int:
        """N, the denominator of the inclusion probability p = alpha*n/N."""
        return self.edge_count() * self.full_multiplicity()

    def eligible_count(self) -> int:
        return self.edge_count() * self.eligible_multiplicity()

    def clause_at_full_rank(self, rank: int) -> Clause:
        """Candidate clause by rank over the full (unplanted) space."""
        if self.family is Family.GOLD:
            raise UnsupportedFamilyError(
                "the gold family has no unplanted candidate clauses"
            )
        mult = self.full_multiplicity()
        edge_rank, payload = divmod(rank, mult)
        edge = _combination_at_rank(edge_rank, self.n, self.k)
        if self.family is Family.SAT:
            return Clause(edge, SatForbidden(payload))
        if self.family is Family.NAESAT:
            return Clause(edge, NaeForbidden(payload))
        return Clause(edge, XorTarget(payload))

    def clause_at_eligible_rank(
        self, rank: int, plant: Sequence[int], predicate: Optional[Predicate] = None
    ) -> Clause:
        """Candidate clause by rank over the plant-satisfying subspace."""
        mult = self.eligible_multiplicity()
        edge_rank, payload = divmod(rank, mult)
        if self.family is Family.GOLD:
            base = _combination_at_rank(edge_rank, self.n, self.k)
            edge = _permutation_at_rank(base, payload)
            target = predicate.value(pack_edge_values(plant, edge))
            return Clause(edge, GoldTarget(predicate, target))
        edge = _combination_at_rank(edge_rank, self.n, self.k)
        v0e = pack_edge_values(plant, edge)
        if self.family is Family.SAT:
            pattern = payload if payload < v0e else payload + 1
            return Clause(edge, SatForbidden(pattern))
        if self.family is Family.NAESAT:
            excluded = nae_canonical(v0e, self.k)
            pattern = payload if payload < excluded else payload + 1
            return Clause(edge, NaeForbidden(pattern))
        return Clause(edge, XorTarget(bin(v0e).count("1") & 1))


@dataclass(frozen=True)
class ModelSpec:
    """Everything that defines the sampling distribution except the seed."""

    family: Family
    n: int
    k: int
    alpha: float
    predicate: Optional[Predicate] = None
    planted_mode: PlantedMode = PlantedMode.RANDOM_PLANT
    plant: Optional[tuple[int, ...]] = None
    scheme: Scheme = Scheme.BINOMIAL

    def __post_init__(self) -> None:
        if self.k < 1 or self.n < self.k:
            raise InvalidArgumentError(
                f"need 1 <= k <= n, got k={self.k}, n={self.n}"
            )
        if self.alpha < 0:
            raise InvalidArgumentError(f"alpha must be >= 0, got {self.alpha}")
        if self.family is Family.GOLD:
            if self.predicate is None:
                raise InvalidArgumentError("gold family requires a predicate")
            if self.predicate.k != self.k:
                raise InvalidArgumentError(
                    f"predicate arity {self.predicate.k} != k {self.k}"
                )
        if self.planted_mode is PlantedMode.FIXED_PLANT:
            if self.plant is None:
                raise InvalidArgumentError("fixed-plant mode requires a plant")
            if len(self.plant) != self.n or any(b not in (0, 1) for b in self.plant):
                raise InvalidArgumentError("plant must be n bits")
        elif self.plant is not None:
            raise InvalidArgumentError(
                "plant is only meaningful in fixed-plant mode"
            )
        if self.family is Family.GOLD and self.planted_mode is PlantedMode.UNPLANTED:
            raise UnsupportedFamilyError(
                "the gold family is sampled with a plant; unplanted preimage "
                "counting takes an explicit reference input instead"
            )
        # Reject densities whose inclusion probability would exceed 1.
        if self.inclusion_probability() > 1.0:
            space = self.space()
            raise DensityError(
                f"alpha={self.alpha} exceeds N/n="
                f"{space.total_candidates() / self.n:.6g} for this model"
            )

    def space(self) -> CandidateSpace:
        return CandidateSpace(self.family, self.n, self.k)

    def inclusion_probability(self) -> float:
        """p = alpha * n / N, the per-candidate Bernoulli probability."""
        n_total = self.space().total_candidates()
        p = self.alpha * self.n / n_total
        if 1.0 < p < 1.0 + 1e-9:  # float dust at the alpha = N/n endpoint
            p = 1.0
        return p

    def with_alpha(self, alpha: float) -> "ModelSpec":
        return replace(self, alpha=alpha)

    def is_planted(self) -> bool:
        return self.planted_mode is not PlantedMode.UNPLANTED


def _draw_plant(spec: ModelSpec, seed: int) -> Optional[tuple[int, ...]]:
    if spec.planted_mode is PlantedMode.UNPLANTED:
        return None
    if spec.planted_mode is PlantedMode.FIXED_PLANT:
        return tuple(spec.plant)
    gen = make_generator(seed, "plant")
    return tuple(int(b) for b in gen.integers(0, 2, size=spec.n))


def _bernoulli_hits(total: int, p: float, gen: np.random.Generator) -> list[int]:
    """Ranks of an i.i.d. Bernoulli(p) draw over [0, total), via
    geometric skips; O(output) time for any `total`."""
    if p <= 0.0 or total == 0:
        return []
    if p >= 1.0:
        return list(range(total))
    hits: list[int] = []
    log1mp = math.log1p(-p)
    pos = 0
    while True:
        gap = int(math.log1p(-gen.random()) / log1mp)
        pos += gap
        if pos >= total:
            break
        hits.append(pos)
        pos += 1
    return hits


def _randrange_big(gen: np.random.Generator, total: int) -> int:
    """Uniform integer in [0, total) for arbitrary-precision totals."""
    if total <= 1 << 63:
        return int(gen.integers(0, total))
    bits = total.bit_length()
    words = (bits + 63) // 64
    while True:
        value = 0
        for w in gen.integers(0, 1 << 64, size=words, dtype=np.uint64):
            value = (value << 64) | int(w)
        value >>= words * 64 - bits
        if value < total:
            return value


def _clause_at(spec: ModelSpec, space: CandidateSpace, rank: int,
               plant: Optional[tuple[int, ...]]) -> Clause:
    if plant is None:
        return space.clause_at_full_rank(rank)
    return space.clause_at_eligible_rank(rank, plant, spec.predicate)


@dataclass(frozen=True)
class CoupledFamily:
    """One seeded draw serving every density alpha <= alpha_max.

    ``ranks`` are the candidate hits at alpha_max and ``variates`` their
    per-candidate uniforms; a candidate belongs to the formula at alpha
    iff its variate is below alpha/alpha_max.  Formulas are therefore
    nested along increasing alpha and the draw at alpha_max coincides
    with the single-density sampler at the same seed.
    """

    spec: ModelSpec  # alpha field = alpha_max
    seed: int
    plant: Optional[tuple[int, ...]]
    ranks: tuple[int, ...]
    variates: tuple[float, ...]

    @property
    def alpha_max(self) -> float:
        return self.spec.alpha

    def activation_alphas(self) -> list[float]:
        """Density at which each hit becomes active (same order as ranks)."""
        return [u * self.alpha_max for u in self.variates]

    def clauses_at(self, alpha: float) -> tuple[Clause, ...]:
        if alpha < 0 or alpha > self.alpha_max + 1e-12:
            raise InvalidArgumentError(
                f"alpha={alpha} outside the coupled range [0, {self.alpha_max}]"
            )
        space = self.spec.space()
        if alpha >= self.alpha_max:
            keep = self.ranks
        else:
            frac = alpha / self.alpha_max
            keep = tuple(r for r, u in zip(self.ranks, self.variates) if u < frac)
        return tuple(_clause_at(self.spec, space, r, self.plant) for r in keep)

    def formula_at(self, alpha: float) -> Formula:
        model = SampleModel.UNPLANTED if self.plant is None else SampleModel.BINOMIAL
        return Formula(
            n=self.spec.n,
            k=self.spec.k,
            family=self.spec.family,
            clauses=self.clauses_at(alpha),
            planted=self.plant,
            model=model,
        )


def coupled_family(spec: ModelSpec, seed: int) -> CoupledFamily:
    """Draw the coupled representation at alpha_max = spec.alpha."""
    if spec.scheme is not Scheme.BINOMIAL:
        raise InvalidArgumentError("coupled sampling is a binomial-scheme construct")
    plant = _draw_plant(spec, seed)
    space = spec.space()
    total = space.total_candidates() if plant is None else space.eligible_count()
    p_max = spec.inclusion_probability()
    ranks = _bernoulli_hits(total, p_max, make_generator(seed, "clauses"))
    thin_key = stream_key(seed, "thin")
    variates = tuple(unit_variate(thin_key, r) for r in ranks)
    return CoupledFamily(spec, seed, plant, tuple(ranks), variates)


def _sample_binomial(spec: ModelSpec, seed: int) -> Formula:
    return coupled_family(spec, seed).formula_at(spec.alpha)


def _sample_uniform_scheme(spec: ModelSpec, seed: int) -> Formula:
    plant = _draw_plant(spec, seed)
    space = spec.space()
    total = space.total_candidates() if plant is None else space.eligible_count()
    m = math.floor(spec.alpha * spec.n + 1e-9)
    if m > total:
        raise DensityError(
            f"alpha*n = {m} exceeds the {total} eligible candidate clauses"
        )
    gen = make_generator(seed, "uniform")
    chosen: set[int] = set()
    while len(chosen) < m:
        chosen.add(_randrange_big(gen, total))
    clauses = tuple(
        _clause_at(spec, space, r, plant) for r in sorted(chosen)
    )
    model = SampleModel.UNPLANTED if plant is None else SampleModel.UNIFORM
    return Formula(spec.n, spec.k, spec.family, clauses, plant, model)


def sample_formula(spec: ModelSpec, seed: int) -> Formula:
    """Draw one instance; deterministic in (spec, seed)."""
    if spec.scheme is Scheme.UNIFORM:
        return _sample_uniform_scheme(spec, seed)
    return _sample_binomial(spec, seed)


def sample_planted(spec: ModelSpec, seed: int) -> Formula:
    """Planted draw for the satisfiability families: only candidates the
    plant satisfies may be included, each with probability alpha*n/N."""
    if spec.family is Family.GOLD:
        raise UnsupportedFamilyError("use sample_planted_gold for the gold family")
    if not spec.is_planted():
        raise InvalidArgumentError("sample_planted requires a planted mode")
    return sample_formula(spec, seed)


def sample_planted_gold(spec: ModelSpec, seed: int) -> Formula:
    """Planted draw for the predicate family: each ordered edge carries
    the one clause matching the predicate's value on the plant."""
    if spec.family is not Family.GOLD:
        raise UnsupportedFamilyError("sample_planted_gold requires the gold family")
    if not spec.is_planted():
        raise InvalidArgumentError("sample_planted_gold requires a planted mode")
    return sample_formula(spec, seed)


def sample_unplanted(spec: ModelSpec, seed: int) -> Formula:
    """Unplanted binomial draw over the full candidate set."""
    if spec.planted_mode is not PlantedMode.UNPLANTED:
        raise InvalidArgumentError("sample_unplanted requires unplanted mode")
    return sample_formula(spec, seed)


def sample_uniform(spec: ModelSpec, seed: int) -> Formula:
    """Exactly floor(alpha*n) distinct (eligible) clauses, uniformly."""
    if spec.scheme is not Scheme.UNIFORM:
        raise InvalidArgumentError("sample_uniform requires the uniform scheme")
    return sample_formula(spec, seed)


def coupled_chain(spec: ModelSpec, alphas: Sequence[float], seed: int) -> list[Formula]:
    """Nested formulas along strictly increasing densities, driven by one
    per-candidate variate set; each formula has the exact single-density
    law, and a one-element chain equals the single-shot sampler."""
    alphas = list(alphas)
    if not alphas:
        raise InvalidArgumentError("alphas must be non-empty")
    if any(b <= a for a, b in zip(alphas, alphas[1:])):
        raise InvalidArgumentError("alphas must be strictly increasing")
    family = coupled_family(spec.with_alpha(alphas[-1]), seed)
    return [family.formula_at(a) for a in alphas]
