"""Exact solution counting by several mutually checking methods.

``count_exact`` enumerates all 2^n assignments in vectorized blocks of
at most 2^20, applying each clause as one or two array operations on
the packed assignment index.  ``count_components`` splits the instance
into connected components of the clause-variable incidence structure
and multiplies exact per-component counts, so only the largest component
is bounded by the brute-force cap.  ``count_xorsat`` reduces to GF(2)
rank via Gaussian elimination on int-packed rows and has no cap.

Counts are arbitrary-precision integers; log2 is taken of the integer,
never accumulated in floating point.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from enum import Enum
from typing import Optional, Sequence, Union

import numpy as np

from .errors import (
    InvalidArgumentError,
    ResourceLimitError,
    UnsupportedFamilyError,
)
from .formulas import (
    Clause,
    Family,
    Formula,
    GoldTarget,
    NaeForbidden,
    SampleModel,
    SatForbidden,
    XorTarget,
)
from .predicates import Predicate

DEFAULT_CAP = 30
_BLOCK_BITS = 20

_PARITY16 = None


def _parity16() -> np.ndarray:
    global _PARITY16
    if _PARITY16 is None:
        x = np.arange(1 << 16, dtype=np.uint32)
        p = x
        for shift in (8, 4, 2, 1):
            p = p ^ (p >> shift)
        _PARITY16 = (p & 1).astype(np.uint8)
    return _PARITY16


class CountMethod(str, Enum):
    BRUTE = "brute"
    COMPONENTS = "components"
    GF2 = "gf2"
    PREIMAGE = "preimage"


def log2_int(z: int) -> float:
    """log2 of a non-negative integer; -inf at zero."""
    if z < 0:
        raise InvalidArgumentError("counts cannot be negative")
    if z == 0:
        return float("-inf")
    return math.log2(z)


@dataclass(frozen=True)
class CountResult:
    z: int
    log2_z: float
    method: CountMethod

    @classmethod
    def from_z(cls, z: int, method: CountMethod) -> "CountResult":
        return cls(z, log2_int(z), method)


# --- vectorized brute force -------------------------------------------------

_BLOCK_SATISFIED = "satisfied"
_BLOCK_VIOLATED = "violated"


def _compile_clause(clause: Clause, block_bits: int):
    """Split a clause into its low-block and high-block variable parts.

    Returns (apply, hi_positions) where apply(lo, hi_value, ok) updates
    the per-assignment alive mask for one block, given the packed high
    bits of the block.
    """
    k = len(clause.edge)
    lo_items = [(pos, v) for pos, v in enumerate(clause.edge) if v < block_bits]
    hi_items = [(pos, v - block_bits) for pos, v in enumerate(clause.edge)
                if v >= block_bits]
    sem = clause.semantics

    def forbidden_step(pattern: int):
        # SAT-style elimination of one forbidden pattern.
        mask_lo = 0
        val_lo = 0
        for pos, v in lo_items:
            mask_lo |= 1 << v
            val_lo |= ((pattern >> (k - 1 - pos)) & 1) << v
        hi_bits = [(hb, (pattern >> (k - 1 - pos)) & 1) for pos, hb in hi_items]

        def step(lo, hi_value, ok):
            for hb, want in hi_bits:
                if ((hi_value >> hb) & 1) != want:
                    return None  # pattern cannot match: clause part satisfied
            if not lo_items:
                return _BLOCK_VIOLATED  # whole block matches the pattern
            ok &= (lo & mask_lo) != val_lo
            return None

        return step

    if isinstance(sem, SatForbidden):
        steps = [forbidden_step(sem.pattern)]
    elif isinstance(sem, NaeForbidden):
        comp = ((1 << k) - 1) ^ sem.pattern
        steps = [forbidden_step(sem.pattern), forbidden_step(comp)]
    elif isinstance(sem, XorTarget):
        mask_lo = 0
        for _, v in lo_items:
            mask_lo |= 1 << v
        hi_positions = [hb for _, hb in hi_items]
        target = sem.bit
        par16 = _parity16()

        def xor_step(lo, hi_value, ok):
            hi_par = 0
            for hb in hi_positions:
                hi_par ^= (hi_value >> hb) & 1
            want = target ^ hi_par
            if not lo_items:
                return None if want == 0 else _BLOCK_VIOLATED
            x = lo & mask_lo
            par = par16[x & 0xFFFF] ^ par16[(x >> 16) & 0xFFFF]
            ok &= par == want
            return None

        steps = [xor_step]
    else:
        assert isinstance(sem, GoldTarget)
        table = sem.predicate.table_array()
        target = sem.bit
        lo_shifts = [(v, k - 1 - pos) for pos, v in lo_items]
        hi_shifts = [(hb, k - 1 - pos) for pos, hb in hi_items]

        def gold_step(lo, hi_value, ok):
            idx_hi = 0
            for hb, out in hi_shifts:
                idx_hi |= ((hi_value >> hb) & 1) << out
            if not lo_items:
                return None if table[idx_hi] == target else _BLOCK_VIOLATED
            idx = np.full(lo.shape, idx_hi, dtype=np.int64)
            for v, out in lo_shifts:
                idx |= ((lo >> v) & 1) << out
            ok &= table[idx] == target
            return None

        steps = [gold_step]

    def apply(lo, hi_value, ok):
        for step in steps:
            if step(lo, hi_value, ok) is _BLOCK_VIOLATED:
                return _BLOCK_VIOLATED
        return None

    return apply


def _enumerate_counts(n: int, clauses: Sequence[Clause],
                      prefix: bool = False) -> list[int]:
    """Exact counts by block enumeration.

    With prefix=False returns [count under all clauses]; with
    prefix=True returns counts under each clause prefix (length m+1).
    """
    b = min(n, _BLOCK_BITS)
    lo = np.arange(1 << b, dtype=np.int64)
    compiled = [_compile_clause(c, b) for c in clauses]
    m = len(compiled)
    totals = [0] * (m + 1) if prefix else [0]
    for hi_value in range(1 << (n - b)):
        ok = np.ones(1 << b, dtype=bool)
        if prefix:
            totals[0] += 1 << b
        dead = False
        for j, apply in enumerate(compiled):
            if apply(lo, hi_value, ok) is _BLOCK_VIOLATED:
                dead = True
                break
            if prefix:
                alive = int(np.count_nonzero(ok))
                totals[j + 1] += alive
                if alive == 0:
                    dead = True
                    break
            elif not ok.any():
                dead = True
                break
        if dead:
            continue
        if prefix:
            continue
        totals[0] += int(np.count_nonzero(ok))
    if prefix:
        return totals
    return totals


def count_exact(f: Formula, cap: int = DEFAULT_CAP) -> CountResult:
    """Count satisfying assignments by exhaustive enumeration."""
    if f.n > cap:
        raise ResourceLimitError(
            f"count_exact needs n <= {cap} (brute-force cap), got n={f.n}"
        )
    if not f.clauses:
        return CountResult.from_z(1 << f.n, CountMethod.BRUTE)
    z = _enumerate_counts(f.n, f.clauses)[0]
    return CountResult.from_z(z, CountMethod.BRUTE)


# --- component decomposition ------------------------------------------------

@dataclass(frozen=True)
class ComponentSplit:
    """Partition of variables by the clause-variable incidence structure."""

    components: tuple[tuple[int, ...], ...]  # non-isolated, each sorted
    clause_indices: tuple[tuple[int, ...], ...]  # clause ids per component
    isolated: tuple[int, ...]


def split_components(f: Formula) -> ComponentSplit:
    parent = list(range(f.n))

    def find(a: int) -> int:
        while parent[a] != a:
            parent[a] = parent[parent[a]]
            a = parent[a]
        return a

    def union(a: int, b: int) -> None:
        ra, rb = find(a), find(b)
        if ra != rb:
            parent[rb] = ra

    for clause in f.clauses:
        first = clause.edge[0]
        for v in clause.edge[1:]:
            union(first, v)

    groups: dict[int, list[int]] = {}
    for v in range(f.n):
        groups.setdefault(find(v), []).append(v)

    touched = set()
    for clause in f.clauses:
        touched.update(clause.edge)

    comps = []
    clause_ids: list[list[int]] = []
    isolated = []
    root_slot: dict[int, int] = {}
    for root, vs in sorted(groups.items(), key=lambda kv: kv[1][0]):
        if len(vs) == 1 and vs[0] not in touched:
            isolated.append(vs[0])
        else:
            root_slot[root] = len(comps)
            comps.append(tuple(sorted(vs)))
            clause_ids.append([])
    for idx, clause in enumerate(f.clauses):
        clause_ids[root_slot[find(clause.edge[0])]].append(idx)

    return ComponentSplit(
        tuple(comps), tuple(tuple(ids) for ids in clause_ids), tuple(isolated)
    )


def count_components(f: Formula, cap: int = DEFAULT_CAP) -> CountResult:
    """Exact count as a product over connected components; only each
    component (not n) is bounded by the brute-force cap."""
    split = split_components(f)
    z = 1 << len(split.isolated)
    for comp, ids in zip(split.components, split.clause_indices):
        if len(comp) > cap:
            raise ResourceLimitError(
                f"component with {len(comp)} variables exceeds the cap {cap}"
            )
        remap = {v: i for i, v in enumerate(comp)}
        sub_clauses = tuple(
            Clause(tuple(remap[v] for v in f.clauses[i].edge), f.clauses[i].semantics)
            for i in ids
        )
        sub_plant = None
        if f.planted is not None:
            sub_plant = tuple(f.planted[v] for v in comp)
        sub = Formula(len(comp), f.k, f.family, sub_clauses, sub_plant, f.model)
        z *= count_exact(sub, cap).z
        if z == 0:
            break
    return CountResult.from_z(z, CountMethod.COMPONENTS)


# --- GF(2) elimination --------------------------------------------------------

def gf2_eliminate(rows: Sequence[int], n: int) -> tuple[int, bool]:
    """Rank and consistency of an augmented GF(2) system.

    Each row packs an n-bit coefficient mask with the right-hand side at
    bit n.  Pivots on the lowest set coefficient bit.
    """
    pivots: dict[int, int] = {}
    rhs_bit = 1 << n
    rank = 0
    consistent = True
    for row in rows:
        for col, prow in pivots.items():
            if (row >> col) & 1:
                row ^= prow
        coeffs = row & (rhs_bit - 1)
        if coeffs == 0:
            if row & rhs_bit:
                consistent = False
            continue
        col = (coeffs & -coeffs).bit_length() - 1
        pivots[col] = row
        rank += 1
    return rank, consistent


def xor_rows(f: Formula) -> list[int]:
    rows = []
    for clause in f.clauses:
        sem = clause.semantics
        assert isinstance(sem, XorTarget)
        mask = 0
        for v in clause.edge:
            mask |= 1 << v
        rows.append(mask | (sem.bit << f.n))
    return rows


def count_xorsat(f: Formula) -> CountResult:
    """Z = 2^(n - rank) for a consistent parity system, else 0."""
    if f.family is not Family.XORSAT:
        raise UnsupportedFamilyError(
            f"count_xorsat requires the xorsat family, got {f.family.value}"
        )
    rank, consistent = gf2_eliminate(xor_rows(f), f.n)
    z = (1 << (f.n - rank)) if consistent else 0
    return CountResult.from_z(z, CountMethod.GF2)


# --- preimage counting --------------------------------------------------------

def count_gold_preimages(
    x: Sequence[int],
    edges_or_formula: Union[Formula, Sequence[Sequence[int]]],
    predicate: Optional[Predicate] = None,
    cap: int = DEFAULT_CAP,
) -> CountResult:
    """Number of inputs u whose predicate outputs match those of x on
    every edge; x itself always matches, so the count is >= 1."""
    if isinstance(edges_or_formula, Formula):
        g = edges_or_formula
        if g.family is not Family.GOLD:
            raise UnsupportedFamilyError("preimage counting needs a gold formula")
        edges = [c.edge for c in g.clauses]
        preds = {c.semantics.predicate for c in g.clauses}
        if predicate is None:
            if len(preds) > 1:
                raise InvalidArgumentError("formula mixes several predicates")
            predicate = preds.pop() if preds else None
    else:
        edges = [tuple(e) for e in edges_or_formula]
    if edges and predicate is None:
        raise InvalidArgumentError("a predicate is required when edges are given")
    n = len(x)
    if n > cap:
        raise ResourceLimitError(
            f"preimage counting needs n <= {cap}, got n={n}"
        )
    if not edges:
        return CountResult.from_z(1 << n, CountMethod.PREIMAGE)
    clauses = tuple(
        Clause(e, GoldTarget(predicate, predicate.value(
            sum((x[v] & 1) << (len(e) - 1 - i) for i, v in enumerate(e)))))
        for e in edges
    )
    g = Formula(n, len(edges[0]), Family.GOLD, clauses, None, SampleModel.UNPLANTED)
    z = _enumerate_counts(n, g.clauses)[0]
    return CountResult(z, log2_int(z), CountMethod.PREIMAGE)


def count_auto(f: Formula, cap: int = DEFAULT_CAP) -> CountResult:
    """GF(2) path for parity instances, components otherwise."""
    if f.family is Family.XORSAT:
        return count_xorsat(f)
    return count_components(f, cap)
