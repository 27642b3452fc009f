"""Counter-based random streams for shardable Monte Carlo.

Every stream is a Philox generator keyed by ``(seed, purpose)``.  A batch
consumes a fixed number of 64-bit draws per trial, so draw ``e`` of trial
``t`` always sits at absolute position ``t * width + e``.  Seeking to that
position lets any contiguous range of trials be regenerated on its own, and
the concatenation over shards is bit-identical to a single sequential run.
"""

from __future__ import annotations

import numpy as np
from numpy.random import Generator, Philox
from scipy.special import ndtri

# Stream purposes; kept distinct so weights and noise never share draws.
WEIGHTS = 0
NOISE = 1
JITTER = 2

_OUTPUTS_PER_COUNTER = 4  # Philox4x64 emits four 64-bit words per counter step


def generator_at(seed: int, purpose: int, offset: int = 0) -> Generator:
    """Generator whose next 64-bit draw is draw number ``offset`` of the stream."""
    if seed < 0:
        raise ValueError("seed must be non-negative")
    block, skip = divmod(int(offset), _OUTPUTS_PER_COUNTER)
    bitgen = Philox(key=[int(seed), int(purpose)], counter=block)
    if skip:
        bitgen.random_raw(skip)
    return Generator(bitgen)


def trial_uniforms(seed: int, purpose: int, start: int, stop: int, width: int) -> np.ndarray:
    """Uniforms on [0, 1), shape ``(stop - start, width)``, row ``i`` = trial ``start + i``."""
    rng = generator_at(seed, purpose, start * width)
    return rng.random((stop - start, width))


def trial_normals(seed: int, purpose: int, start: int, stop: int, width: int) -> np.ndarray:
    """Standard normals by inverse cdf, one draw each, so positions stay fixed."""
    u = trial_uniforms(seed, purpose, start, stop, width)
    # ndtri(0) = -inf; the largest uniform is 1 - 2**-53 so the top is safe
    return ndtri(np.where(u == 0.0, 2.0 ** -54, u))


def shard_bounds(trials: int, shards: int) -> list[tuple[int, int]]:
    """Split ``range(trials)`` into ``shards`` contiguous, near-equal pieces."""
    if trials < 1:
        raise ValueError("trials must be >= 1")
    if shards < 1:
        raise ValueError("shards must be >= 1")
    edges = np.linspace(0, trials, min(shards, trials) + 1).round().astype(int)
    return [(int(a), int(b)) for a, b in zip(edges[:-1], edges[1:])]
