"""Random RIS phase-shift samplers.

Three schemes are supported:

* ``cips``: every element draws an independent phase from U(0, 2pi).
* ``cgps``: elements are first MRT-compensated, then each group of ``q``
  elements shares one uniform random phase.
* ``dips``: every element draws independently from the ``2**B`` point grid
  ``{0, 2pi/2**B, ...}``.

Samplers take an explicit :class:`numpy.random.Generator` and draw only with
``Generator.random``, one 64-bit word per value, which keeps the number of
draws per trial fixed (see :mod:`ris_keygen.rng`).
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import ModelError, NotDivisible
from .geometry import AnglePair, RisGeometry, steering_product

TWO_PI = 2.0 * np.pi

SCHEMES = ("cips", "cgps", "dips")


@dataclass(frozen=True)
class PhaseScheme:
    """Tagged choice of weight scheme: CIPS, CGPS{q} or DIPS{B}."""

    kind: str
    group_size: int | None = None
    bits: int | None = None
    allow_remainder: bool = False

    def __post_init__(self):
        if self.kind not in SCHEMES:
            raise ModelError(f"unknown scheme {self.kind!r}; expected one of {SCHEMES}")
        if self.kind == "cgps":
            if self.group_size is None or int(self.group_size) != self.group_size or self.group_size < 1:
                raise ModelError(f"cgps needs a positive integer group size, got {self.group_size}")
        if self.kind == "dips":
            if self.bits is None or int(self.bits) != self.bits or self.bits < 1:
                raise ModelError(f"dips needs bits >= 1, got {self.bits}")

    @classmethod
    def cips(cls) -> PhaseScheme:
        return cls("cips")

    @classmethod
    def cgps(cls, q: int, allow_remainder: bool = False) -> PhaseScheme:
        return cls("cgps", group_size=q, allow_remainder=allow_remainder)

    @classmethod
    def dips(cls, bits: int) -> PhaseScheme:
        return cls("dips", bits=bits)

    @property
    def label(self) -> str:
        if self.kind == "cgps":
            return f"cgps_q{self.group_size}"
        if self.kind == "dips":
            return f"dips_b{self.bits}"
        return "cips"

    def validate(self, geom: RisGeometry) -> None:
        if self.kind == "cgps":
            partition_groups(geom, self.group_size, self.allow_remainder)

    def draws_per_trial(self, geom: RisGeometry) -> int:
        """Number of uniforms one trial consumes under this scheme."""
        if self.kind == "cgps":
            part = partition_groups(geom, self.group_size, self.allow_remainder)
            return part.group_count + (1 if part.remainder else 0)
        return geom.size

    def to_dict(self) -> dict:
        out = {"scheme": self.kind}
        if self.kind == "cgps":
            out["q"] = self.group_size
            out["allow_remainder"] = self.allow_remainder
        if self.kind == "dips":
            out["bits"] = self.bits
        return out


@dataclass(frozen=True)
class WeightVector:
    """Element phases in [0, 2pi); shape ``(M,)`` or ``(trials, M)``."""

    phases: np.ndarray
    scheme: PhaseScheme

    @property
    def weights(self) -> np.ndarray:
        return np.exp(1j * self.phases)


@dataclass(frozen=True)
class GroupPartition:
    """Contiguous row-major blocks of ``group_size`` elements.

    ``assignments[m]`` is the 0-based group of flat element ``m``.  With a
    remainder, the trailing ``remainder`` elements form one extra partial
    group numbered ``group_count``.
    """

    assignments: np.ndarray
    group_size: int
    group_count: int
    remainder: int = 0


def wrap_phase(x):
    """Reduce to [0, 2pi), guarding the float case where mod returns 2pi."""
    out = np.mod(x, TWO_PI)
    return np.where(out >= TWO_PI, 0.0, out)


def _shape(geom: RisGeometry, trials: int | None) -> tuple[int, ...]:
    return (geom.size,) if trials is None else (int(trials), geom.size)


def sample_cips(geom: RisGeometry, rng: np.random.Generator, trials: int | None = None) -> WeightVector:
    phases = TWO_PI * rng.random(_shape(geom, trials))
    return WeightVector(phases, PhaseScheme.cips())


def dips_levels(uniforms: np.ndarray, bits: int) -> np.ndarray:
    """Map uniforms on [0, 1) onto integer levels ``0 .. 2**bits - 1``."""
    return np.floor(uniforms * (1 << bits)).astype(np.int64)


def sample_dips(geom: RisGeometry, bits: int, rng: np.random.Generator,
                trials: int | None = None) -> WeightVector:
    scheme = PhaseScheme.dips(bits)
    levels = dips_levels(rng.random(_shape(geom, trials)), bits)
    # step is 2pi / 2**B, a power-of-two scaling, so level * step is exact
    return WeightVector(levels * (TWO_PI / (1 << bits)), scheme)


def mrt_phases(geom: RisGeometry, angles: AnglePair) -> WeightVector:
    """Phases that cancel the steering product: ``(-alpha_m) mod 2pi``."""
    alpha = steering_product(geom, angles).phases
    return WeightVector(wrap_phase(-alpha), PhaseScheme.cips())


def partition_groups(geom: RisGeometry, q: int, allow_remainder: bool = False) -> GroupPartition:
    m = geom.size
    if int(q) != q or not 1 <= q <= m:
        raise ModelError(f"group size q={q} must be an integer in [1, {m}]")
    n, r = divmod(m, q)
    if r and not allow_remainder:
        raise NotDivisible(f"group size q={q} does not divide M={m} ({n} groups leave {r} elements)")
    return GroupPartition(np.arange(m) // q, q, n, r)


def sample_cgps(geom: RisGeometry, angles: AnglePair, q: int, rng: np.random.Generator,
                trials: int | None = None, allow_remainder: bool = False) -> WeightVector:
    part = partition_groups(geom, q, allow_remainder)
    n_draws = part.group_count + (1 if part.remainder else 0)
    shape = (n_draws,) if trials is None else (int(trials), n_draws)
    group_phase = TWO_PI * rng.random(shape)
    mrt = mrt_phases(geom, angles).phases
    phases = wrap_phase(mrt + group_phase[..., part.assignments])
    return WeightVector(phases, PhaseScheme.cgps(q, allow_remainder))


def sample_weights(scheme: PhaseScheme, geom: RisGeometry, angles: AnglePair,
                   rng: np.random.Generator, trials: int | None = None) -> WeightVector:
    """Dispatch to the sampler for ``scheme``."""
    if scheme.kind == "cips":
        return sample_cips(geom, rng, trials)
    if scheme.kind == "dips":
        return sample_dips(geom, scheme.bits, rng, trials)
    return sample_cgps(geom, angles, scheme.group_size, rng, trials, scheme.allow_remainder)
