"""Boolean predicates on k bits, stored as packed truth tables.

Conventions
-----------
A k-bit input (x_0, ..., x_{k-1}) is encoded as the integer whose most
significant bit is x_0.  ``table`` packs the 2^k output bits LSB-first:
bit i of ``table`` is the value on the input encoded as i.  Under this
convention the 3-bit parity predicate is 0x96.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Iterable, Sequence

import numpy as np

from .errors import InvalidArgumentError


def pack_input(bits: Sequence[int]) -> int:
    """Encode (x_0, ..., x_{k-1}) with x_0 as the most significant bit."""
    value = 0
    for b in bits:
        value = (value << 1) | (b & 1)
    return value


@dataclass(frozen=True)
class Predicate:
    """Truth table of a Boolean function on k bits."""

    k: int
    table: int

    def __post_init__(self) -> None:
        if self.k < 1:
            raise InvalidArgumentError(f"predicate arity must be >= 1, got {self.k}")
        if not 0 <= self.table < (1 << (1 << self.k)):
            raise InvalidArgumentError(
                f"truth table {self.table:#x} does not fit arity {self.k}"
            )

    def value(self, index: int) -> int:
        """Output bit on the input encoded as `index`."""
        return (self.table >> index) & 1

    def value_on(self, bits: Sequence[int]) -> int:
        return self.value(pack_input(bits))

    def bits(self) -> list[int]:
        """Truth table as a list indexed by encoded input."""
        return [(self.table >> i) & 1 for i in range(1 << self.k)]

    def table_array(self) -> np.ndarray:
        """Truth table as a uint8 array, for vectorized lookups."""
        return np.array(self.bits(), dtype=np.uint8)

    def popcount(self) -> int:
        return bin(self.table).count("1")

    def to_hex(self) -> str:
        digits = max(1, (1 << self.k) // 4)
        return f"0x{self.table:0{digits}x}"

    @classmethod
    def from_hex(cls, k: int, text: str) -> "Predicate":
        try:
            value = int(text, 16)
        except ValueError as exc:
            raise InvalidArgumentError(f"bad predicate hex {text!r}") from exc
        return cls(k, value)

    @classmethod
    def from_bits(cls, bits: Iterable[int]) -> "Predicate":
        bits = list(bits)
        size = len(bits)
        k = size.bit_length() - 1
        if size != 1 << k:
            raise InvalidArgumentError(f"truth table length {size} is not a power of two")
        table = 0
        for i, b in enumerate(bits):
            table |= (b & 1) << i
        return cls(k, table)

    @classmethod
    def parity(cls, k: int) -> "Predicate":
        table = 0
        for i in range(1 << k):
            table |= (bin(i).count("1") & 1) << i
        return cls(k, table)

    @classmethod
    def constant(cls, k: int, bit: int) -> "Predicate":
        table = ((1 << (1 << k)) - 1) if bit else 0
        return cls(k, table)


def random_balanced_predicate(k: int, gen: np.random.Generator) -> Predicate:
    """Uniform predicate among those outputting 1 on exactly half the inputs."""
    size = 1 << k
    ones = gen.permutation(size)[: size // 2]
    table = 0
    for i in ones:
        table |= 1 << int(i)
    return Predicate(k, table)
