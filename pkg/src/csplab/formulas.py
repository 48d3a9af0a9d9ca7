"""CSP instances: clauses with per-family semantics, plus the symmetry
transforms (variable relabeling, translation to the all-zeros plant)
that preserve the solution count.

Conventions
-----------
Variables are integers in [0, n).  An edge is an ordered tuple of k
distinct variables; evaluation reads the assigned values in edge order
and packs them MSB-first (edge position 0 is the most significant bit),
matching the predicate truth-table convention.  Clause kinds:

* ``SatForbidden(pattern)`` is satisfied iff the packed values differ
  from ``pattern``.
* ``NaeForbidden(pattern)`` forbids both ``pattern`` and its bitwise
  complement; the stored pattern is the canonical (smaller) member of
  the pair, so its leading bit is always 0.
* ``XorTarget(bit)`` is satisfied iff the values' parity equals ``bit``.
* ``GoldTarget(predicate, bit)`` is satisfied iff the predicate applied
  to the packed values equals ``bit``.

All logarithms in this package are base 2.
"""

from __future__ import annotations

from dataclasses import dataclass, replace
from enum import Enum
from typing import Optional, Sequence, Union

from .errors import (
    InvalidArgumentError,
    InvalidPermutationError,
    UnsupportedFamilyError,
)
from .predicates import Predicate


class Family(str, Enum):
    SAT = "sat"
    NAESAT = "naesat"
    XORSAT = "xorsat"
    GOLD = "gold"


class SampleModel(str, Enum):
    """How an instance was drawn (metadata, not semantics)."""

    BINOMIAL = "binomial"
    UNIFORM = "uniform"
    UNPLANTED = "unplanted"


Assignment = Sequence[int]


@dataclass(frozen=True)
class SatForbidden:
    pattern: int


@dataclass(frozen=True)
class NaeForbidden:
    pattern: int


@dataclass(frozen=True)
class XorTarget:
    bit: int


@dataclass(frozen=True)
class GoldTarget:
    predicate: Predicate
    bit: int


ClauseSemantics = Union[SatForbidden, NaeForbidden, XorTarget, GoldTarget]

_SEMANTICS_FAMILY = {
    SatForbidden: Family.SAT,
    NaeForbidden: Family.NAESAT,
    XorTarget: Family.XORSAT,
    GoldTarget: Family.GOLD,
}


def nae_canonical(pattern: int, k: int) -> int:
    """Canonical member of the complement pair {pattern, ~pattern}."""
    comp = ((1 << k) - 1) ^ pattern
    return min(pattern, comp)


@dataclass(frozen=True)
class Clause:
    edge: tuple[int, ...]
    semantics: ClauseSemantics

    def __post_init__(self) -> None:
        k = len(self.edge)
        if k < 1:
            raise InvalidArgumentError("clause edge must be non-empty")
        if len(set(self.edge)) != k:
            raise InvalidArgumentError(f"edge {self.edge} has repeated variables")
        sem = self.semantics
        if isinstance(sem, SatForbidden):
            if not 0 <= sem.pattern < (1 << k):
                raise InvalidArgumentError(
                    f"forbidden pattern {sem.pattern} does not fit arity {k}"
                )
        elif isinstance(sem, NaeForbidden):
            if not 0 <= sem.pattern < (1 << k):
                raise InvalidArgumentError(
                    f"forbidden pattern {sem.pattern} does not fit arity {k}"
                )
            if sem.pattern != nae_canonical(sem.pattern, k):
                raise InvalidArgumentError(
                    f"NAE pattern {sem.pattern} is not the canonical pair member"
                )
        elif isinstance(sem, XorTarget):
            if sem.bit not in (0, 1):
                raise InvalidArgumentError(f"xor target must be 0/1, got {sem.bit}")
        elif isinstance(sem, GoldTarget):
            if sem.bit not in (0, 1):
                raise InvalidArgumentError(f"target bit must be 0/1, got {sem.bit}")
            if sem.predicate.k != k:
                raise InvalidArgumentError(
                    f"predicate arity {sem.predicate.k} != edge arity {k}"
                )
        else:
            raise InvalidArgumentError(f"unknown clause semantics {sem!r}")

    @property
    def family(self) -> Family:
        return _SEMANTICS_FAMILY[type(self.semantics)]


def sat_clause(edge: Sequence[int], pattern: int) -> Clause:
    return Clause(tuple(edge), SatForbidden(pattern))


def nae_clause(edge: Sequence[int], pattern: int) -> Clause:
    """NAE clause; the pattern is canonicalized, so building from a
    pattern or from its complement yields the identical clause."""
    return Clause(tuple(edge), NaeForbidden(nae_canonical(pattern, len(edge))))


def xor_clause(edge: Sequence[int], bit: int) -> Clause:
    return Clause(tuple(edge), XorTarget(bit))


def gold_clause(edge: Sequence[int], predicate: Predicate, bit: int) -> Clause:
    return Clause(tuple(edge), GoldTarget(predicate, bit))


@dataclass(frozen=True)
class Formula:
    n: int
    k: int
    family: Family
    clauses: tuple[Clause, ...]
    planted: Optional[tuple[int, ...]] = None
    model: SampleModel = SampleModel.BINOMIAL

    def __post_init__(self) -> None:
        if self.n < 0:
            raise InvalidArgumentError(f"variable count must be >= 0, got {self.n}")
        if self.k < 1:
            raise InvalidArgumentError(f"arity must be >= 1, got {self.k}")
        for clause in self.clauses:
            if len(clause.edge) != self.k:
                raise InvalidArgumentError(
                    f"clause arity {len(clause.edge)} != formula arity {self.k}"
                )
            if clause.family is not self.family:
                raise InvalidArgumentError(
                    f"{clause.family.value} clause in a {self.family.value} formula"
                )
            if max(clause.edge) >= self.n:
                raise InvalidArgumentError(
                    f"edge {clause.edge} uses variables outside [0, {self.n})"
                )
        if self.planted is not None:
            if len(self.planted) != self.n:
                raise InvalidArgumentError(
                    f"planted assignment length {len(self.planted)} != n {self.n}"
                )
            if any(b not in (0, 1) for b in self.planted):
                raise InvalidArgumentError("planted assignment must be 0/1 valued")

    @property
    def m(self) -> int:
        return len(self.clauses)


def pack_edge_values(a: Assignment, edge: Sequence[int]) -> int:
    """Pack the values of `a` on `edge`, edge position 0 as MSB."""
    value = 0
    for v in edge:
        value = (value << 1) | (a[v] & 1)
    return value


def eval_clause(clause: Clause, a: Assignment) -> bool:
    """Truth value of one clause under assignment `a`."""
    if max(clause.edge) >= len(a):
        raise InvalidArgumentError(
            f"edge {clause.edge} out of range for assignment of length {len(a)}"
        )
    y = pack_edge_values(a, clause.edge)
    sem = clause.semantics
    if isinstance(sem, SatForbidden):
        return y != sem.pattern
    if isinstance(sem, NaeForbidden):
        comp = ((1 << len(clause.edge)) - 1) ^ sem.pattern
        return y != sem.pattern and y != comp
    if isinstance(sem, XorTarget):
        return (bin(y).count("1") & 1) == sem.bit
    return sem.predicate.value(y) == sem.bit


def eval_formula(f: Formula, a: Assignment) -> bool:
    """True iff every clause is satisfied; an empty formula is satisfied."""
    if len(a) != f.n:
        raise InvalidArgumentError(
            f"assignment length {len(a)} != variable count {f.n}"
        )
    return all(eval_clause(c, a) for c in f.clauses)


def zero_plant_transform(f: Formula) -> Formula:
    """Translate a planted formula so the plant becomes the all-zeros
    assignment, preserving the solution count.

    The translation XORs each assignment with the plant, so SAT/NAE
    forbidden patterns are XORed with the plant restricted to the edge
    and XOR targets are flipped by its parity there.  Not defined for
    the predicate family, where the analogous move rewires the
    predicate rather than the clause.
    """
    if f.planted is None:
        raise InvalidArgumentError("zero_plant_transform requires a planted formula")
    if f.family is Family.GOLD:
        raise UnsupportedFamilyError(
            "zero_plant_transform is not defined for the gold family"
        )
    v0 = f.planted
    new_clauses = []
    for clause in f.clauses:
        shift = pack_edge_values(v0, clause.edge)
        sem = clause.semantics
        if isinstance(sem, SatForbidden):
            new_sem: ClauseSemantics = SatForbidden(sem.pattern ^ shift)
        elif isinstance(sem, NaeForbidden):
            new_sem = NaeForbidden(nae_canonical(sem.pattern ^ shift, f.k))
        else:
            assert isinstance(sem, XorTarget)
            new_sem = XorTarget(sem.bit ^ (bin(shift).count("1") & 1))
        new_clauses.append(Clause(clause.edge, new_sem))
    return replace(f, clauses=tuple(new_clauses), planted=(0,) * f.n)


def relabel(f: Formula, perm: Sequence[int]) -> Formula:
    """Apply a variable relabeling i -> perm[i]; preserves the solution
    count and maps the plant along."""
    if len(perm) != f.n or sorted(perm) != list(range(f.n)):
        raise InvalidPermutationError(
            f"perm must be a bijection on [0, {f.n})"
        )
    new_clauses = tuple(
        Clause(tuple(perm[v] for v in c.edge), c.semantics) for c in f.clauses
    )
    planted = None
    if f.planted is not None:
        planted = [0] * f.n
        for i, b in enumerate(f.planted):
            planted[perm[i]] = b
        planted = tuple(planted)
    return replace(f, clauses=new_clauses, planted=planted)


def assignment_from_int(n: int, value: int) -> tuple[int, ...]:
    """Assignment whose variable i holds bit i of `value`."""
    return tuple((value >> i) & 1 for i in range(n))
