"""Reflection-channel synthesis and paired noisy observations.

The transmit pilot is fixed to ``s = 1`` and path loss is dropped, so a
realization is ``h_ab + sum_m exp(j(phi_m + alpha_m))``.  Noise variance is
specified per real quadrature: each of Alice's and Bob's estimates gets
``z = sigma_z * (n_re + j n_im)`` with unit normals, total power
``2 * sigma_z**2``.
"""

from __future__ import annotations

import csv
import math
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from . import rng as streams
from .errors import ModelError
from .geometry import AnglePair, RisGeometry, SteeringProduct, steering_product
from .weights import PhaseScheme, WeightVector, sample_weights, wrap_phase

# trials per vectorized block; bounds memory at about 16 bytes * M * CHUNK
CHUNK_TRIALS = 8192


@dataclass(frozen=True)
class ChannelModel:
    geometry: RisGeometry
    legit_angles: AnglePair
    scheme: PhaseScheme
    direct_gain: complex = 0j
    noise_var_per_quadrature: float = 0.0

    def __post_init__(self):
        if not (math.isfinite(self.noise_var_per_quadrature) and self.noise_var_per_quadrature >= 0):
            raise ModelError("noise variance must be finite and >= 0")
        g = complex(self.direct_gain)
        if not (math.isfinite(g.real) and math.isfinite(g.imag)):
            raise ModelError("direct gain must be finite")
        self.scheme.validate(self.geometry)

    def to_dict(self) -> dict:
        g = self.geometry
        return {
            "mx": g.m_x_count,
            "my": g.m_y_count,
            "spacing_x": g.spacing_x,
            "spacing_y": g.spacing_y,
            "wavelength": g.wavelength,
            "angles": list(self.legit_angles.degrees()),
            **self.scheme.to_dict(),
            "direct_gain": [complex(self.direct_gain).real, complex(self.direct_gain).imag],
            "noise_var": self.noise_var_per_quadrature,
        }


@dataclass
class ObservationPair:
    y_a: complex | np.ndarray
    y_b: complex | np.ndarray


@dataclass
class SampleBatch:
    """``T`` channel realizations plus Alice's and Bob's noisy estimates."""

    samples: np.ndarray
    y_a: np.ndarray
    y_b: np.ndarray
    seed: int
    model: ChannelModel = field(repr=False)

    @property
    def trial_count(self) -> int:
        return len(self.samples)


def reflection_channel(weights: WeightVector, steering: SteeringProduct):
    """Sum of ``exp(j(phi_m + alpha_m))`` over elements (last axis)."""
    phases = np.asarray(weights.phases)
    if phases.shape[-1] != len(steering):
        raise ValueError(f"weight length {phases.shape[-1]} != steering length {len(steering)}")
    # explicit row sums rather than a matmul: BLAS kernels may change with
    # the number of rows, which would break shard-invariance
    h = np.exp(1j * (phases + steering.phases)).sum(axis=-1)
    return complex(h) if h.ndim == 0 else h


def cross_angle_channel(weights: WeightVector, geom: RisGeometry, eavesdropper_angles: AnglePair):
    """Channel seen along other angles with weights drawn for the legitimate pair."""
    return reflection_channel(weights, steering_product(geom, eavesdropper_angles))


def observation_pair(h, noise_var_per_quadrature: float, rng: np.random.Generator) -> ObservationPair:
    if noise_var_per_quadrature < 0:
        raise ValueError("noise variance must be >= 0")
    h = np.asarray(h, dtype=complex)
    sigma = math.sqrt(noise_var_per_quadrature)
    z = rng.standard_normal((4,) + h.shape)
    y_a = h + sigma * (z[0] + 1j * z[1])
    y_b = h + sigma * (z[2] + 1j * z[3])
    if h.ndim == 0:
        return ObservationPair(complex(y_a), complex(y_b))
    return ObservationPair(y_a, y_b)


def _channel_block(model: ChannelModel, steering: SteeringProduct, seed: int,
                   start: int, stop: int) -> tuple[np.ndarray, np.ndarray, np.ndarray]:
    width = model.scheme.draws_per_trial(model.geometry)
    gen = streams.generator_at(seed, streams.WEIGHTS, start * width)
    w = sample_weights(model.scheme, model.geometry, model.legit_angles, gen, stop - start)
    h = reflection_channel(w, steering) + complex(model.direct_gain)
    sigma = math.sqrt(model.noise_var_per_quadrature)
    if sigma == 0.0:
        return h, h.copy(), h.copy()
    z = streams.trial_normals(seed, streams.NOISE, start, stop, 4)
    y_a = h + sigma * (z[:, 0] + 1j * z[:, 1])
    y_b = h + sigma * (z[:, 2] + 1j * z[:, 3])
    return h, y_a, y_b


def _shard(model, steering, seed, start, stop):
    parts = [_channel_block(model, steering, seed, a, min(a + CHUNK_TRIALS, stop))
             for a in range(start, stop, CHUNK_TRIALS)]
    return tuple(np.concatenate(p) for p in zip(*parts))


def sample_batch(model: ChannelModel, trials: int, seed: int, shards: int = 1,
                 workers: int = 1) -> SampleBatch:
    """Draw ``trials`` independent realizations.

    Trial ``t`` depends only on ``(seed, t)``, so the result is identical for
    any ``shards`` / ``workers`` split.
    """
    if int(trials) != trials or trials < 1:
        raise ValueError("trials must be a positive integer")
    steering = steering_product(model.geometry, model.legit_angles)
    bounds = streams.shard_bounds(int(trials), shards)
    if workers > 1 and len(bounds) > 1:
        with ThreadPoolExecutor(max_workers=workers) as pool:
            results = list(pool.map(lambda b: _shard(model, steering, seed, *b), bounds))
    else:
        results = [_shard(model, steering, seed, a, b) for a, b in bounds]
    h, y_a, y_b = (np.concatenate(col) for col in zip(*results))
    return SampleBatch(h, y_a, y_b, seed, model)


def write_samples_csv(batch: SampleBatch, path: str | Path) -> Path:
    """Columns ``trial,re,im,mag,phase``; phase in [0, 2pi)."""
    path = Path(path)
    h = batch.samples
    phase = wrap_phase(np.angle(h))
    with path.open("w", newline="") as fh:
        writer = csv.writer(fh, lineterminator="\n")
        writer.writerow(["trial", "re", "im", "mag", "phase"])
        for t, (re, im, mag, ph) in enumerate(zip(h.real.tolist(), h.imag.tolist(),
                                                  np.abs(h).tolist(), phase.tolist())):
            writer.writerow([t, repr(re), repr(im), repr(mag), repr(ph)])
    return path


def write_observations_csv(batch: SampleBatch, path: str | Path) -> Path:
    """Columns ``trial,ya_re,ya_im,yb_re,yb_im``."""
    path = Path(path)
    with path.open("w", newline="") as fh:
        writer = csv.writer(fh, lineterminator="\n")
        writer.writerow(["trial", "ya_re", "ya_im", "yb_re", "yb_im"])
        cols = (batch.y_a.real.tolist(), batch.y_a.imag.tolist(),
                batch.y_b.real.tolist(), batch.y_b.imag.tolist())
        for t, row in enumerate(zip(*cols)):
            writer.writerow([t, *map(repr, row)])
    return path
