"""Coin geometry, material parameters, inertia, and the outcome taxonomy."""

from __future__ import annotations

import enum
import math
from dataclasses import dataclass

GRAVITY = 9.81  # m/s^2, default everywhere unless a call site overrides it


class Outcome(enum.Enum):
    """Terminal rest state of a settled coin."""

    SIDE = "Side"
    FACE_UP = "FaceUp"
    FACE_DOWN = "FaceDown"


def _require_finite(name: str, value: float) -> None:
    if not math.isfinite(value):
        raise ValueError(f"{name} must be finite, got {value!r}")


@dataclass(frozen=True)
class CoinSpec:
    """Cylindrical coin: height and radius in meters, mass in kilograms.

    ``height == 0`` is admitted as the ideal-disk limit so the thin-coin
    formulas stay testable; radius and mass must be strictly positive.
    """

    height: float
    radius: float
    mass: float

    def __post_init__(self) -> None:
        _require_finite("height", self.height)
        _require_finite("radius", self.radius)
        _require_finite("mass", self.mass)
        if self.height < 0.0:
            raise ValueError(f"height must be >= 0, got {self.height}")
        if self.radius <= 0.0:
            raise ValueError(f"radius must be > 0, got {self.radius}")
        if self.mass <= 0.0:
            raise ValueError(f"mass must be > 0, got {self.mass}")

    @property
    def aspect_ratio(self) -> float:
        """Height over radius, the primary geometric control variable."""
        return self.height / self.radius

    @property
    def half_diagonal(self) -> float:
        """Distance from the center of mass to a rim corner (m)."""
        return math.sqrt(self.radius ** 2 + 0.25 * self.height ** 2)

    def with_mass(self, mass: float) -> "CoinSpec":
        return CoinSpec(self.height, self.radius, mass)

    @classmethod
    def from_ratio(cls, ratio: float, radius: float = 0.02, mass: float = 0.02) -> "CoinSpec":
        """Build a coin of the given H/R ratio at a reference radius and mass."""
        return cls(height=ratio * radius, radius=radius, mass=mass)


@dataclass(frozen=True)
class Material:
    """Coin/table contact parameters.

    restitution is the empirical energy-restitution coefficient k of the
    planar bounce model and doubles as the velocity restitution
    ("bounciness") of the 3-D impulse solver.  impact_eta is the lumped
    impulse scale of the planar spin-exchange rule; it can be supplied
    directly (fit parameter) or derived from a peak Hertz force via
    :func:`tricoin.impact.harmonic_impulse`.
    """

    restitution: float = 0.5        # k, dimensionless in [0, 1]
    friction: float = 0.5           # mu, dimensionless >= 0
    impact_eta: float = 0.0         # eta, N*s
    youngs_modulus: float | None = None  # E, Pa
    poisson_ratio: float = 0.0      # nu, dimensionless in [0, 0.5)
    impact_time: float = 1e-3       # tau, s; impacts last about a millisecond

    def __post_init__(self) -> None:
        if not 0.0 <= self.restitution <= 1.0:
            raise ValueError(f"restitution must be in [0, 1], got {self.restitution}")
        if not self.friction >= 0.0:
            raise ValueError(f"friction must be >= 0, got {self.friction}")
        if not self.impact_eta >= 0.0:
            raise ValueError(f"impact_eta must be >= 0, got {self.impact_eta}")
        if self.youngs_modulus is not None and not self.youngs_modulus > 0.0:
            raise ValueError(f"youngs_modulus must be > 0, got {self.youngs_modulus}")
        if not 0.0 <= self.poisson_ratio < 0.5:
            raise ValueError(f"poisson_ratio must be in [0, 0.5), got {self.poisson_ratio}")
        if not self.impact_time > 0.0:
            raise ValueError(f"impact_time must be > 0, got {self.impact_time}")


@dataclass(frozen=True)
class Inertia:
    """Principal moments of a homogeneous cylinder (kg*m^2).

    transverse is the moment about a diameter through the center of mass
    (the tumbling axis of planar rotation); axial is the moment about the
    symmetry axis.
    """

    transverse: float
    axial: float


def inertia_of(spec: CoinSpec) -> Inertia:
    """Principal moments for a homogeneous cylinder.

    transverse = m (3R^2 + H^2) / 12, axial = m R^2 / 2.
    """
    m, r, h = spec.mass, spec.radius, spec.height
    return Inertia(
        transverse=m * (3.0 * r * r + h * h) / 12.0,
        axial=0.5 * m * r * r,
    )


def aspect_ratio(spec: CoinSpec) -> float:
    """H/R of a coin; function form of :attr:`CoinSpec.aspect_ratio`."""
    return spec.aspect_ratio
