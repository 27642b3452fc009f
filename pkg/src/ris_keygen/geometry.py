"""URA geometry and the per-element steering-product phases.

Elements are numbered row-major, ``m = (m_y - 1) * M_x + m_x`` with 1-based
``m_x``/``m_y``.  Arrays returned here use the matching 0-based flat index
``m - 1``.  Spacings are expressed in wavelengths, so only ``k * d`` products
enter the phases.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np


@dataclass(frozen=True)
class RisGeometry:
    """Uniform rectangular array of ``m_x_count x m_y_count`` elements."""

    m_x_count: int
    m_y_count: int
    spacing_x: float = 0.5
    spacing_y: float = 0.5
    wavelength: float = 1.0

    def __post_init__(self):
        if int(self.m_x_count) != self.m_x_count or self.m_x_count < 1:
            raise ValueError(f"m_x_count must be a positive integer, got {self.m_x_count}")
        if int(self.m_y_count) != self.m_y_count or self.m_y_count < 1:
            raise ValueError(f"m_y_count must be a positive integer, got {self.m_y_count}")
        for name in ("spacing_x", "spacing_y", "wavelength"):
            value = getattr(self, name)
            if not (math.isfinite(value) and value > 0):
                raise ValueError(f"{name} must be finite and > 0, got {value}")

    @classmethod
    def square(cls, side: int, spacing: float = 0.5) -> RisGeometry:
        return cls(side, side, spacing, spacing)

    @property
    def size(self) -> int:
        """Total element count M."""
        return self.m_x_count * self.m_y_count

    @property
    def wave_number(self) -> float:
        return 2.0 * math.pi / self.wavelength

    @property
    def kd_x(self) -> float:
        # spacing is in wavelengths: k * (s * lambda) = 2 pi s
        return self.wave_number * self.spacing_x * self.wavelength

    @property
    def kd_y(self) -> float:
        return self.wave_number * self.spacing_y * self.wavelength

    @property
    def is_square(self) -> bool:
        return self.m_x_count == self.m_y_count and self.spacing_x == self.spacing_y


@dataclass(frozen=True)
class AnglePair:
    """Incident (Alice -> RIS) and reflected (RIS -> Bob) directions, radians."""

    psi_in: float
    theta_in: float
    psi_out: float
    theta_out: float

    def __post_init__(self):
        for name in ("psi_in", "theta_in", "psi_out", "theta_out"):
            if not math.isfinite(getattr(self, name)):
                raise ValueError(f"{name} must be finite")

    @classmethod
    def from_degrees(cls, psi_in, theta_in, psi_out, theta_out) -> AnglePair:
        return cls(*(math.radians(float(a)) for a in (psi_in, theta_in, psi_out, theta_out)))

    def degrees(self) -> tuple[float, float, float, float]:
        return tuple(math.degrees(a) for a in (self.psi_in, self.theta_in, self.psi_out, self.theta_out))

    def swapped(self) -> AnglePair:
        """Exchange the incident and reflected directions."""
        return AnglePair(self.psi_out, self.theta_out, self.psi_in, self.theta_in)


@dataclass(frozen=True)
class SteeringProduct:
    """Phases ``alpha_m`` of ``a(Omega_i) * a(Omega_o)``, flat row-major order."""

    phases: np.ndarray

    @property
    def entries(self) -> np.ndarray:
        return np.exp(1j * self.phases)

    def __len__(self):
        return len(self.phases)


def xi_components(geom: RisGeometry, angles: AnglePair) -> tuple[float, float]:
    """Spatial phase increments per element step along x and y."""
    a = angles
    xi_x = geom.kd_x * (math.cos(a.psi_in) * math.sin(a.theta_in)
                        + math.cos(a.psi_out) * math.sin(a.theta_out))
    xi_y = geom.kd_y * (math.sin(a.psi_in) * math.sin(a.theta_in)
                        + math.sin(a.psi_out) * math.sin(a.theta_out))
    return xi_x, xi_y


def _check_indices(m_x: int, m_y: int, geom: RisGeometry) -> None:
    if not 1 <= m_x <= geom.m_x_count:
        raise IndexError(f"m_x={m_x} outside [1, {geom.m_x_count}]")
    if not 1 <= m_y <= geom.m_y_count:
        raise IndexError(f"m_y={m_y} outside [1, {geom.m_y_count}]")


def element_index(m_x: int, m_y: int, geom: RisGeometry) -> int:
    """1-based flat index of element ``(m_x, m_y)``."""
    _check_indices(m_x, m_y, geom)
    return (m_y - 1) * geom.m_x_count + m_x


def element_coordinates(m: int, geom: RisGeometry) -> tuple[int, int]:
    """Inverse of :func:`element_index`."""
    if not 1 <= m <= geom.size:
        raise IndexError(f"m={m} outside [1, {geom.size}]")
    m_y, r = divmod(m - 1, geom.m_x_count)
    return r + 1, m_y + 1


def element_alpha(geom: RisGeometry, angles: AnglePair, m_x: int, m_y: int) -> float:
    _check_indices(m_x, m_y, geom)
    xi_x, xi_y = xi_components(geom, angles)
    return (m_x - 1) * xi_x + (m_y - 1) * xi_y


def steering_product(geom: RisGeometry, angles: AnglePair) -> SteeringProduct:
    xi_x, xi_y = xi_components(geom, angles)
    # row-major: x index varies fastest
    mx = np.tile(np.arange(geom.m_x_count, dtype=float), geom.m_y_count)
    my = np.repeat(np.arange(geom.m_y_count, dtype=float), geom.m_x_count)
    return SteeringProduct(mx * xi_x + my * xi_y)
