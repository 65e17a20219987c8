"""Deterministic random-stream plumbing.

Every stochastic operation in the package draws from a counter-based
generator (PCG64) keyed by a :class:`SeedSpec`.  Substreams are derived by
extending the SeedSequence entropy with integer keys, so replicate r of a
run is reproducible in isolation and independent of evaluation order or
thread count.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

__all__ = ["SeedSpec"]


@dataclass(frozen=True)
class SeedSpec:
    """Identifies one independent random stream.

    Distinct ``(master_seed, stream_index)`` pairs (and distinct derivation
    paths below them) yield statistically independent streams: the tuple is
    fed through numpy's SeedSequence entropy-mixing construction.
    """

    master_seed: int
    stream_index: int = 0
    path: tuple[int, ...] = field(default=())

    def __post_init__(self) -> None:
        if self.master_seed < 0 or self.stream_index < 0:
            raise ValueError("seed components must be nonnegative integers")

    def child(self, *keys: int) -> "SeedSpec":
        """Derive a keyed substream (e.g. one per bootstrap replicate)."""
        return SeedSpec(self.master_seed, self.stream_index, self.path + tuple(keys))

    def rng(self) -> np.random.Generator:
        """Fresh generator positioned at the start of this stream."""
        entropy = (self.master_seed, self.stream_index) + self.path
        return np.random.default_rng(np.random.SeedSequence(entropy))
