"""Deterministic random streams.

Every random quantity in the package is a pure function of a 64-bit seed
plus a tuple of domain labels, realized as a Philox generator keyed by a
SeedSequence hash of (seed, labels).  Per-item variates (one uniform per
candidate clause, say) set the Philox counter to the item's rank instead
of consuming a sequential stream, so they can be re-derived on demand
without storing or replaying anything.
"""

from __future__ import annotations

from typing import Union

import numpy as np

from .errors import InvalidArgumentError

MAX_SEED = 2**64

Label = Union[int, str]


def _label_int(label: Label) -> int:
    if isinstance(label, str):
        return int.from_bytes(label.encode("utf-8"), "big")
    return int(label)


def check_seed(seed: int) -> int:
    if not isinstance(seed, int) or not 0 <= seed < MAX_SEED:
        raise InvalidArgumentError(f"seed must be an integer in [0, 2^64), got {seed!r}")
    return seed


def stream_key(seed: int, *labels: Label) -> np.ndarray:
    """128-bit Philox key for the (seed, labels) stream."""
    check_seed(seed)
    entropy = (seed,) + tuple(_label_int(x) for x in labels)
    return np.random.SeedSequence(entropy).generate_state(2, np.uint64)


def make_generator(seed: int, *labels: Label) -> np.random.Generator:
    """Sequential generator for the (seed, labels) stream."""
    return np.random.Generator(np.random.Philox(key=stream_key(seed, *labels)))


def unit_variate(key: np.ndarray, counter: int) -> float:
    """The uniform [0,1) variate owned by item `counter` under `key`."""
    bg = np.random.Philox(key=key, counter=counter)
    return float(np.random.Generator(bg).random())


def spawn_seed(seed: int, *labels: Label) -> int:
    """Derive an independent 64-bit subseed for a child task."""
    check_seed(seed)
    entropy = (seed,) + tuple(_label_int(x) for x in labels)
    return int(np.random.SeedSequence(entropy).generate_state(1, np.uint64)[0])
