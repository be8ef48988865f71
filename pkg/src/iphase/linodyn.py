"""Exact propagation and action integrals for linear inertial dynamics.

In the rotating lab frame the point-particle Lagrangian is

    L = m [ v^2/2 + g.r + r.T r/2 + omega.((r+R) x v) + |omega x (r+R)|^2/2 ]

which yields linear time-invariant equations of motion

    a = g + T r - 2 omega x v - omega x (omega x (r + R)).

Propagation is therefore a matrix exponential of a constant 7x7 generator
(6 state rows plus one affine row for the forcing). The exponential is
evaluated as a one-shot Taylor series whenever the scaled step is small,
because repeated squaring smears rounding error of the large entries into
the tiny Coriolis couplings (~1e-10 relative scale) that gyroscope-grade
phase targets depend on. Large steps fall back to scaling and squaring.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Iterable, Sequence

import numpy as np

from .geomodel import AtomSpecies, EnvironmentModel
from .numerics import NeumaierSum, csum, gauss_legendre

# One-shot Taylor radius: for ||M t||_inf below this the series converges to
# ~1e-16 relative with intermediate term growth < 1e3 (no cancellation risk).
_SERIES_RADIUS = 8.0
_MAX_TERMS = 120


class PropagationError(RuntimeError):
    """Raised when the propagator series fails to converge (internal guard)."""


def _vec3(values, name: str) -> np.ndarray:
    arr = np.array(values, dtype=float)
    if arr.shape != (3,):
        raise ValueError(f"{name} must have shape (3,), got {arr.shape}")
    if not np.all(np.isfinite(arr)):
        raise ValueError(f"{name} must be finite")
    arr.setflags(write=False)
    return arr


def cross_matrix(v: np.ndarray) -> np.ndarray:
    """Antisymmetric matrix W with W @ u == v x u."""
    return np.array(
        [
            [0.0, -v[2], v[1]],
            [v[2], 0.0, -v[0]],
            [-v[1], v[0], 0.0],
        ]
    )


@dataclass(frozen=True)
class StateVector:
    """Position/velocity pair tagged with an absolute epoch (seconds)."""

    position: np.ndarray
    velocity: np.ndarray
    epoch: float = 0.0

    def __post_init__(self):
        object.__setattr__(self, "position", _vec3(self.position, "position"))
        object.__setattr__(self, "velocity", _vec3(self.velocity, "velocity"))
        if not math.isfinite(self.epoch):
            raise ValueError(f"epoch must be finite, got {self.epoch}")

    def __eq__(self, other):
        if not isinstance(other, StateVector):
            return NotImplemented
        return (
            np.array_equal(self.position, other.position)
            and np.array_equal(self.velocity, other.velocity)
            and self.epoch == other.epoch
        )

    __hash__ = None

    def augmented(self) -> np.ndarray:
        """7-component vector (r, v, 1) for affine propagation."""
        out = np.empty(7)
        out[0:3] = self.position
        out[3:6] = self.velocity
        out[6] = 1.0
        return out


@dataclass(frozen=True, eq=False)
class LinearSystem:
    """Constant-coefficient dynamics dx/dt = drift @ x + forcing.

    The drift block structure is [[0, I], [G, C]] with G = gradient minus
    the centrifugal tensor and C the Coriolis operator; the forcing is
    (0, g - omega x (omega x R)).
    """

    drift: np.ndarray
    forcing: np.ndarray

    def __post_init__(self):
        drift = np.array(self.drift, dtype=float)
        forcing = np.array(self.forcing, dtype=float)
        if drift.shape != (6, 6):
            raise ValueError(f"drift must be 6x6, got {drift.shape}")
        if forcing.shape != (6,):
            raise ValueError(f"forcing must have shape (6,), got {forcing.shape}")
        if not (np.all(np.isfinite(drift)) and np.all(np.isfinite(forcing))):
            raise ValueError("drift and forcing must be finite")
        drift.setflags(write=False)
        forcing.setflags(write=False)
        object.__setattr__(self, "drift", drift)
        object.__setattr__(self, "forcing", forcing)

        aug = np.zeros((7, 7))
        aug[0:6, 0:6] = drift
        aug[0:6, 6] = forcing
        aug.setflags(write=False)
        nu = float(np.max(np.sum(np.abs(aug), axis=1)))
        # Power table of (aug/nu)^n / n!, grown on demand; scaling by the
        # norm keeps t**n factors from overflowing for long slow segments.
        scaled = aug / nu if nu > 0.0 else np.zeros((7, 7))
        object.__setattr__(self, "_aug", aug)
        object.__setattr__(self, "_nu", nu)
        object.__setattr__(self, "_scaled", scaled)
        object.__setattr__(self, "_powers", [np.eye(7)])
        object.__setattr__(self, "_power_norms", [1.0])

    @property
    def augmented_generator(self) -> np.ndarray:
        return self._aug

    def _extend_powers(self, order: int) -> None:
        powers = self._powers
        norms = self._power_norms
        while len(powers) <= order:
            n = len(powers)
            nxt = powers[-1] @ self._scaled / n
            powers.append(nxt)
            norms.append(float(np.max(np.abs(nxt))))

    def _series_order(self, u: float) -> int:
        """Terms needed for sum_n P_n u^n at scaled step u <= radius."""
        self._extend_powers(1)
        largest = 1.0
        n = 1
        while True:
            self._extend_powers(n)
            term = self._power_norms[n] * u**n
            largest = max(largest, term)
            if term <= 1e-22 * largest:
                return n
            n += 1
            if n > _MAX_TERMS:
                raise PropagationError(
                    f"propagator series did not converge (scaled step {u:.3g})"
                )

    def _series_stack(self, times: np.ndarray) -> np.ndarray:
        u = np.abs(times).max() * self._nu if self._nu > 0.0 else 0.0
        order = self._series_order(float(u)) if u > 0.0 else 0
        powers = np.array(self._powers[: order + 1])
        scaled_times = times * self._nu
        exponents = np.arange(order + 1)
        vand = scaled_times[None, :] ** exponents[:, None]
        return np.einsum("nij,nk->kij", powers, vand)

    def propagators(self, times) -> np.ndarray:
        """Stack of exp(M t) for each t, shape (len(times), 7, 7)."""
        times = np.atleast_1d(np.asarray(times, dtype=float))
        if times.size == 0:
            return np.empty((0, 7, 7))
        if not np.all(np.isfinite(times)):
            raise ValueError("propagation times must be finite")
        umax = float(np.abs(times).max() * self._nu)
        if umax <= _SERIES_RADIUS:
            return self._series_stack(times)
        out = np.empty((times.size, 7, 7))
        for i, t in enumerate(times):
            u = abs(t) * self._nu
            if u <= _SERIES_RADIUS:
                out[i] = self._series_stack(np.array([t]))[0]
            else:
                squarings = int(math.ceil(math.log2(u / _SERIES_RADIUS)))
                q = self._series_stack(np.array([t / 2.0**squarings]))[0]
                for _ in range(squarings):
                    q = q @ q
                out[i] = q
        return out


def assemble_system(env: EnvironmentModel, species: AtomSpecies) -> LinearSystem:
    """Build the LTI system for an environment.

    The species is part of the contract for symmetry with the action
    routines, but the equations of motion are mass-independent (the
    Lagrangian is proportional to the mass).
    """
    del species
    w = cross_matrix(env.omega)
    centrifugal = w @ w
    drift = np.zeros((6, 6))
    drift[0:3, 3:6] = np.eye(3)
    drift[3:6, 0:3] = env.gradient - centrifugal
    drift[3:6, 3:6] = -2.0 * w
    forcing = np.zeros(6)
    forcing[3:6] = env.gravity - centrifugal @ env.earth_offset
    return LinearSystem(drift=drift, forcing=forcing)


@dataclass(frozen=True, eq=False)
class Segment:
    """One free-evolution stretch between pulses under fixed dynamics."""

    start: StateVector
    duration: float
    system: LinearSystem

    def __post_init__(self):
        if not (self.duration >= 0.0 and math.isfinite(self.duration)):
            raise ValueError(f"duration must be >= 0 and finite, got {self.duration}")


def propagate(segment: Segment) -> StateVector:
    """Exact end state of a segment (series-evaluated matrix exponential)."""
    q = segment.system.propagators(segment.duration)[0]
    y = q @ segment.start.augmented()
    return StateVector(
        position=y[0:3],
        velocity=y[3:6],
        epoch=segment.start.epoch + segment.duration,
    )


def propagate_nodes(system: LinearSystem, y0: np.ndarray, offsets: np.ndarray) -> np.ndarray:
    """States (k, 7) at the given time offsets from an augmented start y0."""
    stack = system.propagators(offsets)
    return np.einsum("kij,j->ki", stack, y0)


@dataclass(frozen=True, eq=False)
class ArmTrajectory:
    """Piecewise trajectory of one interferometer arm.

    states_at_pulses[i] is the state just after pulse i (post momentum
    kick); segments[i] runs from pulse i to pulse i+1, so there is one
    more recorded state than there are segments.
    """

    segments: tuple[Segment, ...]
    states_at_pulses: tuple[StateVector, ...]

    def __post_init__(self):
        object.__setattr__(self, "segments", tuple(self.segments))
        object.__setattr__(self, "states_at_pulses", tuple(self.states_at_pulses))
        if len(self.states_at_pulses) != len(self.segments) + 1:
            raise ValueError(
                "need exactly one more pulse state than segments, got "
                f"{len(self.states_at_pulses)} states for {len(self.segments)} segments"
            )
        epochs = self.pulse_epochs
        if any(b < a for a, b in zip(epochs, epochs[1:])):
            raise ValueError("pulse epochs must be non-decreasing")

    @property
    def pulse_epochs(self) -> tuple[float, ...]:
        return tuple(s.epoch for s in self.states_at_pulses)

    @property
    def final_state(self) -> StateVector:
        return self.states_at_pulses[-1]


def _check_same_grid(upper: ArmTrajectory, lower: ArmTrajectory) -> None:
    if upper.pulse_epochs != lower.pulse_epochs:
        raise ValueError("arms must share identical pulse epochs")
    for su, sl in zip(upper.segments, lower.segments):
        if su.duration != sl.duration:
            raise ValueError("arms must share identical segment durations")
        if not (
            np.array_equal(su.system.drift, sl.system.drift)
            and np.array_equal(su.system.forcing, sl.system.forcing)
        ):
            raise ValueError("arms must share identical dynamics")


def lagrangian_nodes(
    env: EnvironmentModel,
    species: AtomSpecies,
    positions: np.ndarray,
    velocities: np.ndarray,
) -> np.ndarray:
    """Lagrangian values at sample points; positions/velocities are (k, 3)."""
    r = np.atleast_2d(positions)
    v = np.atleast_2d(velocities)
    u = r + env.earth_offset
    omega_x_u = np.cross(env.omega[None, :], u)
    values = (
        0.5 * np.einsum("ki,ki->k", v, v)
        + r @ env.gravity
        + 0.5 * np.einsum("ki,ij,kj->k", r, env.gradient, r)
        + np.cross(u, v) @ env.omega
        + 0.5 * np.einsum("ki,ki->k", omega_x_u, omega_x_u)
    )
    return species.mass * values


def lagrangian_difference_nodes(
    env: EnvironmentModel,
    species: AtomSpecies,
    r_low: np.ndarray,
    v_low: np.ndarray,
    dr: np.ndarray,
    dv: np.ndarray,
    with_offset_lever: bool = True,
) -> np.ndarray:
    """L(lower + delta) - L(lower), expanded exactly (bilinear + quadratic).

    Evaluating the difference directly keeps full relative precision when
    the arm separation is ~1e-5 of the absolute coordinates; subtracting
    two absolute Lagrangians would lose ~11 digits first.

    with_offset_lever=False drops the m*(omega x earth_offset).dv coupling.
    That term integrates in closed form to endpoint position differences
    (the offset is constant), and with a ~1e7 m offset its pointwise value
    dwarfs the integral it leaves behind, so the action assembler removes
    it from quadrature and restores it exactly; see
    action_difference_segments.
    """
    u = r_low + env.earth_offset
    omega = env.omega
    omega_x_dr = np.cross(omega[None, :], dr)
    omega_x_u = np.cross(omega[None, :], u)
    dv_coupling = r_low if not with_offset_lever else u
    values = (
        np.einsum("ki,ki->k", dv, v_low)
        + 0.5 * np.einsum("ki,ki->k", dv, dv)
        + dr @ env.gravity
        + np.einsum("ki,ij,kj->k", dr, env.gradient, r_low)
        + 0.5 * np.einsum("ki,ij,kj->k", dr, env.gradient, dr)
        + (np.cross(dr, v_low) + np.cross(dv_coupling, dv) + np.cross(dr, dv)) @ omega
        + np.einsum("ki,ki->k", omega_x_dr, omega_x_u)
        + 0.5 * np.einsum("ki,ki->k", omega_x_dr, omega_x_dr)
    )
    return species.mass * values


def action_integral(
    traj: ArmTrajectory,
    env: EnvironmentModel,
    species: AtomSpecies,
    nodes: int = 40,
) -> float:
    """Action along a trajectory under the given environment's Lagrangian.

    The trajectory keeps whatever dynamics it was propagated with; env here
    only selects the Lagrangian being integrated, which is how perturbative
    estimates evaluate a rich action over trajectories of a poorer model.
    """
    x, w = gauss_legendre(nodes)
    total = NeumaierSum()
    for seg in traj.segments:
        if seg.duration == 0.0:
            continue
        half = 0.5 * seg.duration
        offsets = (x + 1.0) * half
        states = propagate_nodes(seg.system, seg.start.augmented(), offsets)
        lag = lagrangian_nodes(env, species, states[:, 0:3], states[:, 3:6])
        total.add(half * csum(w * lag))
    return total.value


def difference_segment_action(
    system: LinearSystem,
    duration: float,
    y_lower: np.ndarray,
    y_delta: np.ndarray,
    env: EnvironmentModel,
    species: AtomSpecies,
    nodes: int = 40,
) -> float:
    """Action difference contribution of one segment.

    y_lower is the lower arm's augmented start (r, v, 1); y_delta the arm
    difference (dr, dv, 0). Both evolve under the same propagator stack, so
    the forcing cancels exactly in the difference.

    The m*(omega x earth_offset).dv piece is excluded here; over a full
    pulse sequence it telescopes to the endpoint separations and the
    assembler adds it back exactly (see action_difference_segments).
    """
    if duration == 0.0:
        return 0.0
    x, w = gauss_legendre(nodes)
    half = 0.5 * duration
    offsets = (x + 1.0) * half
    stack = system.propagators(offsets)
    lower = np.einsum("kij,j->ki", stack, y_lower)
    delta = np.einsum("kij,j->ki", stack, y_delta)
    dlag = lagrangian_difference_nodes(
        env,
        species,
        lower[:, 0:3],
        lower[:, 3:6],
        delta[:, 0:3],
        delta[:, 3:6],
        with_offset_lever=False,
    )
    return half * csum(w * dlag)


def action_difference_segments(
    parts: Iterable[tuple[LinearSystem, float, np.ndarray, np.ndarray]],
    env: EnvironmentModel,
    species: AtomSpecies,
    nodes: int = 40,
) -> float:
    """Sum of per-segment action differences plus the offset lever term.

    The m*(omega x earth_offset).dv coupling is kept out of the segment
    quadratures: its antiderivative is m*(omega x earth_offset).dr, and
    position is continuous across pulses, so its integral over the whole
    sequence telescopes to the first/last separations alone. Evaluating it
    that way multiplies the ~1e2 m/s offset velocity by the ~1e-10 m final
    closure instead of pushing ~1e8 rad-scale node values through the
    quadrature, which would leave ~1e-8 of float noise after cancellation.
    """
    part_list = list(parts)
    if not part_list:
        return 0.0
    total = NeumaierSum()
    for system, duration, y_lower, y_delta in part_list:
        total.add(
            difference_segment_action(system, duration, y_lower, y_delta, env, species, nodes)
        )
    system, duration, _, y_delta = part_list[-1]
    if duration == 0.0:
        dr_final = np.asarray(y_delta[0:3], dtype=float)
    else:
        dr_final = (system.propagators(np.array([duration]))[0] @ y_delta)[0:3]
    dr_first = np.asarray(part_list[0][3][0:3], dtype=float)
    lever = np.cross(env.omega, env.earth_offset)
    total.add(species.mass * float(lever @ (dr_final - dr_first)))
    return total.value


def action_difference(
    upper: ArmTrajectory,
    lower: ArmTrajectory,
    env: EnvironmentModel,
    species: AtomSpecies,
    nodes: int = 40,
) -> float:
    """S[upper] - S[lower] without forming either absolute action.

    Both arms must share pulse epochs, segment durations and dynamics; the
    difference trajectory is recovered segment-by-segment and integrated
    with the exact expansion of L(lower + delta) - L(lower).
    """
    _check_same_grid(upper, lower)
    parts = []
    for su, sl in zip(upper.segments, lower.segments):
        y_low = sl.start.augmented()
        y_up = su.start.augmented()
        delta = y_up - y_low
        delta[6] = 0.0
        parts.append((sl.system, sl.duration, y_low, delta))
    return action_difference_segments(parts, env, species, nodes)
