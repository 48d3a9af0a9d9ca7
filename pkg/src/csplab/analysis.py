"""Predicate classification and the equal-output replica functional.

For a predicate chi on k bits, ell replica strings u^(1..ell) in {0,1}^k
and a probability measure nu on ell-bit tuples, define

    gamma_ell(nu) = 1/2 * sum over replica tuples with equal chi-values
                    of  prod_{i=0}^{k-1} nu(u_i^(1), ..., u_i^(ell)),

i.e. the product runs over bit positions and nu is evaluated at the
column of replica bits there.  Tuple weights are indexed with replica 1
as the most significant bit.  gamma_1 is identically 1/2, and for any
balanced predicate gamma_2 at the uniform measure is 1/4.

``falsify_convexity`` searches for explicit midpoint witnesses that
gamma_ell is not convex in nu; absence of a witness within budget is
reported as unresolved, never as a convexity certificate.
"""

from __future__ import annotations

import itertools
import math
from dataclasses import dataclass
from fractions import Fraction
from typing import Iterable, Iterator, Optional, Sequence

import numpy as np

from .errors import InvalidArgumentError, ResourceLimitError
from .predicates import Predicate
from .rng import make_generator

VIOLATION_TOL = 1e-9
REVERIFY_TOL = 1e-10
MAX_SCAN_ARITY = 5


# --- predicate classification -------------------------------------------------

def is_balanced(chi: Predicate) -> bool:
    """True iff chi outputs 1 on exactly half of its inputs."""
    return chi.popcount() == 1 << (chi.k - 1)


def is_antisymmetric(chi: Predicate) -> bool:
    """True iff complementing every input bit flips the output, for all
    inputs."""
    full = (1 << chi.k) - 1
    return all(chi.value(x) == 1 - chi.value(full ^ x) for x in range(1 << chi.k))


def correlation(chi: Predicate, subset: Sequence[int]) -> Fraction:
    """Signed agreement between chi and the parity of the bits in
    `subset`, as the exact rational 2^-k * sum_x (-1)^(chi(x) xor parity).

    Zero means uncorrelated; only singletons and pairs are accepted.
    """
    s = tuple(sorted(set(subset)))
    if len(s) not in (1, 2) or len(s) != len(tuple(subset)):
        raise InvalidArgumentError(
            f"subset must hold 1 or 2 distinct bit positions, got {subset!r}"
        )
    if any(not 0 <= i < chi.k for i in s):
        raise InvalidArgumentError(f"bit positions {s} outside [0, {chi.k})")
    total = 0
    for x in range(1 << chi.k):
        par = 0
        for i in s:
            par ^= (x >> (chi.k - 1 - i)) & 1
        total += 1 if chi.value(x) == par else -1
    return Fraction(total, 1 << chi.k)


def enumerate_antisymmetric(k: int) -> Iterator[Predicate]:
    """All predicates with chi(~x) = 1 - chi(x), one choice per
    complement pair; 2^(2^(k-1)) of them."""
    if k > MAX_SCAN_ARITY:
        raise ResourceLimitError(
            f"antisymmetric enumeration is capped at k <= {MAX_SCAN_ARITY}"
        )
    half = 1 << (k - 1)
    full = (1 << k) - 1
    for code in range(1 << half):
        table = 0
        for rep in range(half):
            bit = (code >> rep) & 1
            table |= bit << rep
            table |= (1 - bit) << (full ^ rep)
        yield Predicate(k, table)


# --- tuple measures and the replica functional ---------------------------------

@dataclass(frozen=True)
class TupleMeasure:
    """Probability measure on ell-bit tuples, replica 1 as MSB."""

    ell: int
    weights: tuple[float, ...]

    def __post_init__(self) -> None:
        if self.ell < 1:
            raise InvalidArgumentError(f"ell must be >= 1, got {self.ell}")
        if len(self.weights) != 1 << self.ell:
            raise InvalidArgumentError(
                f"need 2^{self.ell} weights, got {len(self.weights)}"
            )
        if any(w < 0 for w in self.weights):
            raise InvalidArgumentError("weights must be non-negative")
        if abs(math.fsum(self.weights) - 1.0) > 1e-12:
            raise InvalidArgumentError("weights must sum to 1 within 1e-12")

    def as_array(self) -> np.ndarray:
        return np.asarray(self.weights, dtype=np.float64)

    @classmethod
    def uniform(cls, ell: int) -> "TupleMeasure":
        size = 1 << ell
        return cls(ell, (1.0 / size,) * size)

    @classmethod
    def point_mass(cls, ell: int, index: int) -> "TupleMeasure":
        weights = [0.0] * (1 << ell)
        weights[index] = 1.0
        return cls(ell, tuple(weights))

    @classmethod
    def from_array(cls, ell: int, values: Iterable[float]) -> "TupleMeasure":
        return cls(ell, tuple(float(v) for v in values))


def mix_measures(a: TupleMeasure, b: TupleMeasure, lam: float) -> TupleMeasure:
    if a.ell != b.ell:
        raise InvalidArgumentError("cannot mix measures of different ell")
    weights = tuple(lam * wa + (1.0 - lam) * wb
                    for wa, wb in zip(a.weights, b.weights))
    return TupleMeasure(a.ell, weights)


def gamma_ell(chi: Predicate, ell: int, nu: TupleMeasure) -> float:
    """Reference evaluation of the replica functional, by direct
    summation over equal-output replica tuples."""
    if nu.ell != ell:
        raise InvalidArgumentError(f"measure has ell={nu.ell}, expected {ell}")
    k = chi.k
    classes = ([x for x in range(1 << k) if chi.value(x) == 0],
               [x for x in range(1 << k) if chi.value(x) == 1])
    w = nu.weights
    total = 0.0
    for inputs in classes:
        for replicas in itertools.product(inputs, repeat=ell):
            term = 1.0
            for i in range(k):
                col = 0
                for u in replicas:
                    col = (col << 1) | ((u >> (k - 1 - i)) & 1)
                term *= w[col]
                if term == 0.0:
                    break
            total += term
    return 0.5 * total


class GammaEvaluator:
    """Vectorized evaluation of the replica functional for one (chi, ell).

    Precomputes the (T, k) matrix of column-tuple indices over the
    constrained replica tuples; a batch of measures is then evaluated
    with one fancy-indexing product per bit position.
    """

    _CHUNK_ELEMENTS = 1 << 23

    def __init__(self, chi: Predicate, ell: int):
        self.chi = chi
        self.ell = ell
        k = chi.k
        rows = []
        for b in (0, 1):
            inputs = np.array([x for x in range(1 << k) if chi.value(x) == b],
                              dtype=np.int64)
            if len(inputs) == 0:
                continue
            tuples = inputs[:, None]
            for _ in range(ell - 1):
                # cartesian power, one replica at a time
                left = np.repeat(tuples, len(inputs), axis=0)
                right = np.tile(inputs, len(tuples))[:, None]
                tuples = np.concatenate([left, right], axis=1)
            cols = np.zeros((len(tuples), k), dtype=np.int64)
            for i in range(k):
                bits = (tuples >> (k - 1 - i)) & 1
                idx = np.zeros(len(tuples), dtype=np.int64)
                for j in range(ell):
                    idx = (idx << 1) | bits[:, j]
                cols[:, i] = idx
            rows.append(cols)
        self.columns = (np.concatenate(rows, axis=0) if rows
                        else np.zeros((0, k), dtype=np.int64))

    def value(self, weights: np.ndarray) -> float:
        return float(self.value_many(np.asarray(weights, dtype=np.float64)[None, :])[0])

    def value_many(self, weight_rows: np.ndarray) -> np.ndarray:
        """Functional value for each row of a (B, 2^ell) weight matrix."""
        weight_rows = np.asarray(weight_rows, dtype=np.float64)
        n_rows = weight_rows.shape[0]
        t, k = self.columns.shape
        if t == 0:
            return np.zeros(n_rows)
        chunk = max(1, self._CHUNK_ELEMENTS // max(1, t * k))
        out = np.empty(n_rows)
        for start in range(0, n_rows, chunk):
            block = weight_rows[start:start + chunk]
            acc = block[:, self.columns[:, 0]]
            for i in range(1, k):
                acc = acc * block[:, self.columns[:, i]]
            out[start:start + chunk] = 0.5 * acc.sum(axis=1)
        return out


# --- convexity falsification ----------------------------------------------------

@dataclass(frozen=True)
class SearchBudget:
    pairs: int = 20_000
    hessian_points: int = 200


@dataclass(frozen=True)
class ConvexityWitness:
    """Certified midpoint failure of convexity: the functional at the
    lam-mixture exceeds the mixture of functional values."""

    predicate: Predicate
    ell: int
    nu_a: TupleMeasure
    nu_b: TupleMeasure
    lam: float
    lhs: float
    rhs: float

    @property
    def margin(self) -> float:
        return self.lhs - self.rhs


def verify_convexity_witness(witness: ConvexityWitness,
                             tol: float = VIOLATION_TOL) -> bool:
    """Recompute both sides with the reference evaluator; the stored
    values must reproduce within 1e-10 and the margin must clear tol."""
    chi, ell = witness.predicate, witness.ell
    lhs = gamma_ell(chi, ell, mix_measures(witness.nu_a, witness.nu_b, witness.lam))
    rhs = (witness.lam * gamma_ell(chi, ell, witness.nu_a)
           + (1.0 - witness.lam) * gamma_ell(chi, ell, witness.nu_b))
    if abs(lhs - witness.lhs) > REVERIFY_TOL or abs(rhs - witness.rhs) > REVERIFY_TOL:
        return False
    return lhs - rhs > tol


def _dirichlet_rows(gen: np.random.Generator, rows: int, dim: int) -> np.ndarray:
    # Uniform on the simplex via exponential normalization.
    g = gen.standard_exponential((rows, dim))
    return g / g.sum(axis=1, keepdims=True)


def _certify(chi: Predicate, ell: int, a: np.ndarray, b: np.ndarray,
             lam: float) -> Optional[ConvexityWitness]:
    """Build a witness from raw weights, keeping reference values."""
    nu_a = TupleMeasure.from_array(ell, a)
    nu_b = TupleMeasure.from_array(ell, b)
    lhs = gamma_ell(chi, ell, mix_measures(nu_a, nu_b, lam))
    rhs = (lam * gamma_ell(chi, ell, nu_a)
           + (1.0 - lam) * gamma_ell(chi, ell, nu_b))
    if lhs - rhs > VIOLATION_TOL:
        return ConvexityWitness(chi, ell, nu_a, nu_b, lam, lhs, rhs)
    return None


def _refine_lambda(ev: GammaEvaluator, a: np.ndarray, b: np.ndarray
                   ) -> tuple[float, float]:
    """Best midpoint-style violation over a lambda grid."""
    lams = np.linspace(0.05, 0.95, 19)
    mixes = lams[:, None] * a[None, :] + (1.0 - lams)[:, None] * b[None, :]
    ga = ev.value(a)
    gb = ev.value(b)
    margins = ev.value_many(mixes) - (lams * ga + (1.0 - lams) * gb)
    best = int(np.argmax(margins))
    return float(lams[best]), float(margins[best])


def falsify_convexity(
    chi: Predicate,
    ell: int,
    budget: Optional[SearchBudget] = None,
    seed: int = 0,
) -> Optional[ConvexityWitness]:
    """Search for a convexity violation of the replica functional.

    Phase one tests random simplex pairs at the midpoint, refining the
    mixing weight on near-misses; phase two probes finite-difference
    Hessians at random interior points and promotes negative-curvature
    directions to explicit midpoint witnesses.  Any candidate is
    re-verified with the reference evaluator before being returned.
    Exhausting the budget returns None, which is not a certificate.
    """
    if ell < 1:
        raise InvalidArgumentError(f"ell must be >= 1, got {ell}")
    if ell == 1:
        return None  # the functional is constant at 1/2
    budget = budget or SearchBudget()
    ev = GammaEvaluator(chi, ell)
    dim = 1 << ell

    gen = make_generator(seed, "pairs", chi.table, ell)
    remaining = budget.pairs
    while remaining > 0:
        rows = min(512, remaining)
        remaining -= rows
        a = _dirichlet_rows(gen, rows, dim)
        b = _dirichlet_rows(gen, rows, dim)
        ga = ev.value_many(a)
        gb = ev.value_many(b)
        gm = ev.value_many(0.5 * (a + b))
        margins = gm - 0.5 * (ga + gb)
        for i in np.flatnonzero(margins > VIOLATION_TOL):
            witness = _certify(chi, ell, a[i], b[i], 0.5)
            if witness is not None:
                return witness
        near = np.flatnonzero(margins > -1e-4)
        for i in near[:8]:
            lam, margin = _refine_lambda(ev, a[i], b[i])
            if margin > VIOLATION_TOL:
                witness = _certify(chi, ell, a[i], b[i], lam)
                if witness is not None:
                    return witness

    gen_h = make_generator(seed, "hessian", chi.table, ell)
    h = 1e-3
    tangent = np.zeros((dim - 1, dim))
    for i in range(dim - 1):
        tangent[i, i] = 1.0
        tangent[i, dim - 1] = -1.0
    for _ in range(budget.hessian_points):
        nu = _dirichlet_rows(gen_h, 1, dim)[0]
        nu = (nu + 4.0 * h) / (1.0 + 4.0 * h * dim)  # keep the h-ball interior
        witness = _hessian_witness(chi, ev, nu, tangent, h)
        if witness is not None:
            return witness
    return None


def _hessian_witness(chi: Predicate, ev: GammaEvaluator, nu: np.ndarray,
                     tangent: np.ndarray, h: float) -> Optional[ConvexityWitness]:
    d = tangent.shape[0]
    probes = [nu]
    for i in range(d):
        probes.append(nu + h * tangent[i])
        probes.append(nu - h * tangent[i])
    for i in range(d):
        for j in range(i + 1, d):
            probes.append(nu + h * (tangent[i] + tangent[j]))
            probes.append(nu + h * (tangent[i] - tangent[j]))
            probes.append(nu - h * (tangent[i] - tangent[j]))
            probes.append(nu - h * (tangent[i] + tangent[j]))
    values = ev.value_many(np.array(probes))
    f0 = values[0]
    hess = np.zeros((d, d))
    pos = 1
    for i in range(d):
        fp, fm = values[pos], values[pos + 1]
        pos += 2
        hess[i, i] = (fp - 2.0 * f0 + fm) / (h * h)
    for i in range(d):
        for j in range(i + 1, d):
            fpp, fpm, fmp, fmm = values[pos:pos + 4]
            pos += 4
            hess[i, j] = hess[j, i] = (fpp - fpm - fmp + fmm) / (4.0 * h * h)
    eigvals, eigvecs = np.linalg.eigh(hess)
    if eigvals[0] >= -1e-6:
        return None
    direction = eigvecs[:, 0] @ tangent  # sums to zero by construction
    scale = np.abs(direction).max()
    if scale == 0.0:
        return None
    direction = direction / scale
    nonzero = np.abs(direction) > 1e-12
    t_max = float(np.min(nu[nonzero] / np.abs(direction[nonzero]))) * 0.999
    for factor in (1.0, 0.5, 0.25, 0.125, 0.0625):
        t = t_max * factor
        if t <= 0.0:
            break
        a = np.clip(nu + t * direction, 0.0, None)
        b = np.clip(nu - t * direction, 0.0, None)
        a = a / a.sum()
        b = b / b.sum()
        witness = _certify(chi, ev.ell, np.asarray(a), np.asarray(b), 0.5)
        if witness is not None:
            return witness
    return None


# --- the arity <= 5 scan ---------------------------------------------------------

@dataclass(frozen=True)
class SurvivorResult:
    predicate: Predicate
    violated: bool
    ell: Optional[int] = None
    witness: Optional[ConvexityWitness] = None

    @property
    def status(self) -> str:
        return "VIOLATED" if self.violated else "UNRESOLVED"


@dataclass(frozen=True)
class ScanReport:
    """Outcome of the antisymmetric-predicate scan at one arity.

    Filter counts are exact (integer correlation sums); each survivor is
    tagged with the replica order of its verified convexity violation,
    or left UNRESOLVED if the search budget ran out.
    """

    k: int
    l_max: int
    seed: int
    budget: SearchBudget
    total_antisymmetric: int
    balanced_count: int
    uncorrelated1_count: int
    uncorrelated2_count: int
    results: tuple[SurvivorResult, ...]

    @property
    def unresolved(self) -> tuple[SurvivorResult, ...]:
        return tuple(r for r in self.results if not r.violated)


def _scan_one(args: tuple[int, int, int, SearchBudget, int]) -> SurvivorResult:
    k, table, l_max, budget, seed = args
    chi = Predicate(k, table)
    for ell in range(2, l_max + 1):
        witness = falsify_convexity(chi, ell, budget, seed)
        if witness is not None:
            return SurvivorResult(chi, True, ell, witness)
    return SurvivorResult(chi, False)


def scan_predicates(
    k: int,
    l_max: int = 3,
    budget: Optional[SearchBudget] = None,
    seed: int = 0,
    jobs: int = 1,
) -> ScanReport:
    """Enumerate antisymmetric predicates, filter by exact balance and
    1/2-bit correlation tests, and hunt a convexity violation for every
    survivor at replica orders 2..l_max."""
    from .parallel import parallel_map

    budget = budget or SearchBudget()
    tables = np.array([p.table for p in enumerate_antisymmetric(k)], dtype=np.int64)
    size = 1 << k
    inputs = np.arange(size, dtype=np.int64)
    bits = ((tables[:, None] >> inputs[None, :]) & 1).astype(np.int8)
    half = size // 2

    balanced = bits.sum(axis=1) == half

    def uncorrelated(subsets: list[tuple[int, ...]]) -> np.ndarray:
        keep = np.ones(len(tables), dtype=bool)
        for s in subsets:
            par = np.zeros(size, dtype=np.int8)
            for i in s:
                par ^= ((inputs >> (k - 1 - i)) & 1).astype(np.int8)
            agree = (bits == par[None, :]).sum(axis=1)
            keep &= agree == half
        return keep

    singles = [(i,) for i in range(k)]
    pairs = [(i, j) for i in range(k) for j in range(i + 1, k)]
    pass1 = balanced & uncorrelated(singles)
    pass2 = pass1 & uncorrelated(pairs)

    survivors = [int(t) for t in tables[pass2]]
    tasks = [(k, t, l_max, budget, seed) for t in survivors]
    results = tuple(parallel_map(_scan_one, tasks, jobs))

    return ScanReport(
        k=k,
        l_max=l_max,
        seed=seed,
        budget=budget,
        total_antisymmetric=len(tables),
        balanced_count=int(balanced.sum()),
        uncorrelated1_count=int(pass1.sum()),
        uncorrelated2_count=int(pass2.sum()),
        results=results,
    )
