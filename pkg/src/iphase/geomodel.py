"""Environment and species models for rotating-frame interferometry.

The lab frame is anchored to the Earth's surface: x east, y horizontal
toward the projection of the rotation axis, z radially outward. The frame
rotates with the Earth, so the dynamics seen by a free atom include gravity,
the gravity gradient, Coriolis and centrifugal forces.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from enum import Enum

import numpy as np

# Reduced Planck constant, J s (2018 CODATA exact value).
HBAR = 1.054571817e-34

# Sidereal rotation rate of the Earth, rad/s.
SIDEREAL_RATE = 7.292115e-5


def _readonly(values, shape: tuple[int, ...], name: str) -> np.ndarray:
    arr = np.array(values, dtype=float)
    if arr.shape != shape:
        raise ValueError(f"{name} must have shape {shape}, got {arr.shape}")
    if not np.all(np.isfinite(arr)):
        raise ValueError(f"{name} must be finite")
    arr.setflags(write=False)
    return arr


@dataclass(frozen=True)
class PhysicalConstants:
    """Fundamental constants used by the engine."""

    hbar: float = HBAR

    def __post_init__(self):
        if not (self.hbar > 0.0 and math.isfinite(self.hbar)):
            raise ValueError(f"hbar must be positive and finite, got {self.hbar}")


@dataclass(frozen=True)
class AtomSpecies:
    """Atomic species: all the engine needs is the mass."""

    mass: float
    label: str = ""

    def __post_init__(self):
        if not (self.mass > 0.0 and math.isfinite(self.mass)):
            raise ValueError(f"mass must be positive and finite, got {self.mass}")


CESIUM = AtomSpecies(mass=2.21e-25, label="Cs")


class DynamicsMode(Enum):
    """Richness of the dynamics used for trajectories or for the action.

    FULL keeps gravity, gradient and rotation; NO_GRADIENT drops the
    gradient; FREE_FALL drops gradient and rotation, leaving uniform
    gravity only. Perturbative phase estimates run trajectories under a
    poorer mode while evaluating the action under a richer one.
    """

    FULL = "full"
    NO_GRADIENT = "no_gradient"
    FREE_FALL = "free_fall"

    @property
    def rank(self) -> int:
        return _MODE_RANK[self]

    def includes(self, other: "DynamicsMode") -> bool:
        """True when this mode keeps every field the other one keeps."""
        return self.rank >= other.rank


_MODE_RANK = {
    DynamicsMode.FREE_FALL: 0,
    DynamicsMode.NO_GRADIENT: 1,
    DynamicsMode.FULL: 2,
}


@dataclass(frozen=True, eq=False)
class EnvironmentModel:
    """Inertial environment: gravity, gradient, rotation, Earth offset.

    Parameters
    ----------
    gravity : (3,) array_like
        Uniform gravitational acceleration at the origin, m/s^2.
    gradient : (3, 3) array_like
        Gravity-gradient tensor T (d g_i / d x_j), 1/s^2. Must be symmetric.
    omega : (3,) array_like
        Frame rotation vector, rad/s.
    earth_offset : (3,) array_like
        Vector R from the rotation-centre to the lab origin, m. Enters the
        centrifugal force and the rotational part of the Lagrangian.
    """

    gravity: np.ndarray
    gradient: np.ndarray
    omega: np.ndarray
    earth_offset: np.ndarray

    def __post_init__(self):
        object.__setattr__(self, "gravity", _readonly(self.gravity, (3,), "gravity"))
        object.__setattr__(self, "gradient", _readonly(self.gradient, (3, 3), "gradient"))
        object.__setattr__(self, "omega", _readonly(self.omega, (3,), "omega"))
        object.__setattr__(
            self, "earth_offset", _readonly(self.earth_offset, (3,), "earth_offset")
        )
        if not np.array_equal(self.gradient, self.gradient.T):
            raise ValueError("gradient tensor must be symmetric")

    def __eq__(self, other):
        if not isinstance(other, EnvironmentModel):
            return NotImplemented
        return (
            np.array_equal(self.gravity, other.gravity)
            and np.array_equal(self.gradient, other.gradient)
            and np.array_equal(self.omega, other.omega)
            and np.array_equal(self.earth_offset, other.earth_offset)
        )

    __hash__ = None


def build_environment(
    latitude: float,
    earth_radius: float,
    g_z: float,
    omega_magnitude: float = SIDEREAL_RATE,
) -> EnvironmentModel:
    """Build the standard spherical-Earth lab environment.

    The rotation vector lies in the y-z plane, omega = Omega (0, cos(lat),
    sin(lat)); the offset to the rotation centre is R = (0, 0, earth_radius);
    the gradient is the traceless spherical-Earth tensor
    diag(g_z/R, g_z/R, -2 g_z/R).

    Parameters
    ----------
    latitude : float
        Geographic latitude, radians, in [-pi/2, pi/2].
    earth_radius : float
        Distance from the rotation centre to the lab, m, > 0.
    g_z : float
        Vertical gravity component, m/s^2 (negative for downward pull).
    omega_magnitude : float
        Rotation rate, rad/s; defaults to the sidereal rate.
    """
    if not (earth_radius > 0.0 and math.isfinite(earth_radius)):
        raise ValueError(f"earth_radius must be positive, got {earth_radius}")
    if not (abs(latitude) <= math.pi / 2.0):
        raise ValueError(f"latitude must be within [-pi/2, pi/2] rad, got {latitude}")
    if not math.isfinite(g_z):
        raise ValueError(f"g_z must be finite, got {g_z}")
    if not (omega_magnitude >= 0.0 and math.isfinite(omega_magnitude)):
        raise ValueError(f"omega_magnitude must be >= 0, got {omega_magnitude}")
    gradient_diag = g_z / earth_radius
    return EnvironmentModel(
        gravity=(0.0, 0.0, g_z),
        gradient=np.diag((gradient_diag, gradient_diag, -2.0 * gradient_diag)),
        omega=(
            0.0,
            omega_magnitude * math.cos(latitude),
            omega_magnitude * math.sin(latitude),
        ),
        earth_offset=(0.0, 0.0, earth_radius),
    )


_ZERO3 = (0.0, 0.0, 0.0)
_ZERO33 = ((0.0, 0.0, 0.0), (0.0, 0.0, 0.0), (0.0, 0.0, 0.0))


def degrade_environment(env: EnvironmentModel, mode: DynamicsMode) -> EnvironmentModel:
    """Return the environment restricted to what the given mode keeps."""
    if mode is DynamicsMode.FULL:
        return env
    if mode is DynamicsMode.NO_GRADIENT:
        return EnvironmentModel(
            gravity=env.gravity,
            gradient=_ZERO33,
            omega=env.omega,
            earth_offset=env.earth_offset,
        )
    if mode is DynamicsMode.FREE_FALL:
        return EnvironmentModel(
            gravity=env.gravity,
            gradient=_ZERO33,
            omega=_ZERO3,
            earth_offset=env.earth_offset,
        )
    raise ValueError(f"unknown dynamics mode: {mode!r}")
