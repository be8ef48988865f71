"""Standard interferometer sequences and configuration presets.

Four geometries cover the usual inertial observables:

* gravimeter: three-pulse Mach-Zehnder, vertical k, fountain launch;
* clock: four-pulse Ramsey-Borde with k signs (+, +, -, -), sensitive to
  gravity plus a single-photon-recoil term;
* recoil: conjugate Ramsey-Borde pair with N-1 intermediate pi pulses;
  the conjugate difference isolates the recoil frequency;
* gyroscope: Mach-Zehnder with horizontal k and fast transverse drift.

Preset parameter values reproduce a published table set for a cesium
fountain at 41 degrees latitude; see the term catalog for the values.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from types import MappingProxyType
from typing import Mapping

from .geomodel import (
    CESIUM,
    AtomSpecies,
    EnvironmentModel,
    build_environment,
)
from .linodyn import StateVector
from .phases import ArmRecipe, InterferometerDefinition, Pulse, PulseArea, Transition


class PresetNotFoundError(KeyError):
    """Unknown preset name."""


# Reference parameter set shared by the bundled term catalog.
REFERENCE_LAMBDA_EFF = 426e-9          # effective two-photon wavelength, m
REFERENCE_LATITUDE_DEG = 41.0
REFERENCE_EARTH_RADIUS = 6.72e6        # m
REFERENCE_G_Z = -9.8                   # m/s^2
# Rotation rate behind the published rotation rows (approximately the
# Earth's rate; the sidereal value 7.292115e-5 shifts quartic rotation
# terms by ~17%, far outside their quoted precision).
REFERENCE_ROTATION_RATE = 7.0e-5       # rad/s

PRESET_NAMES = ("gravimeter", "clock", "recoil", "gyroscope")

_SEQUENCE_DEFAULTS: dict[str, dict[str, float]] = {
    "gravimeter": {"T": 0.4, "lambda_eff": REFERENCE_LAMBDA_EFF},
    "clock": {"T": 0.4, "lambda_eff": REFERENCE_LAMBDA_EFF},
    "recoil": {
        "T": 0.13,
        "T_rec": 1.0 / 3000.0,
        "N": 31,
        "lambda_eff": REFERENCE_LAMBDA_EFF,
    },
    "gyroscope": {"T": 1.0 / 290.0, "v_y": 290.0, "lambda_eff": REFERENCE_LAMBDA_EFF},
}


def effective_wavevector(lambda_eff: float) -> float:
    """Magnitude of the effective two-photon wavevector, 2 pi / lambda."""
    if not (lambda_eff > 0.0 and math.isfinite(lambda_eff)):
        raise ValueError(f"lambda_eff must be positive, got {lambda_eff}")
    return 2.0 * math.pi / lambda_eff


def reference_environment(
    latitude_deg: float = REFERENCE_LATITUDE_DEG,
    earth_radius_m: float = REFERENCE_EARTH_RADIUS,
    g_z: float = REFERENCE_G_Z,
    omega_rad_s: float = REFERENCE_ROTATION_RATE,
) -> EnvironmentModel:
    """Environment matching the bundled catalog's parameter set."""
    return build_environment(
        latitude=math.radians(latitude_deg),
        earth_radius=earth_radius_m,
        g_z=g_z,
        omega_magnitude=omega_rad_s,
    )


def build_gravimeter(T: float, v_launch: float, k: float) -> InterferometerDefinition:
    """Vertical Mach-Zehnder: pi/2 - pi - pi/2 at 0, T, 2T, all +k up.

    The upper arm takes the kick at the first pulse; with a fountain launch
    v_launch = -g_z T the apex sits at the mirror pulse.
    """
    if T < 0.0:
        raise ValueError(f"T must be >= 0, got {T}")
    k_vec = (0.0, 0.0, k)
    pulses = (
        Pulse(epoch=0.0, k_vector=k_vec, area=PulseArea.HALF_PI),
        Pulse(epoch=T, k_vector=k_vec, area=PulseArea.PI),
        Pulse(epoch=2.0 * T, k_vector=k_vec, area=PulseArea.HALF_PI),
    )
    upper = ArmRecipe(
        kicks=(1, -1, 0),
        transitions=(Transition.UP, Transition.DOWN, Transition.NONE),
    )
    lower = ArmRecipe(
        kicks=(0, 1, -1),
        transitions=(Transition.NONE, Transition.UP, Transition.DOWN),
    )
    return InterferometerDefinition(
        pulses=pulses,
        upper=upper,
        lower=lower,
        initial_state=StateVector((0.0, 0.0, 0.0), (0.0, 0.0, v_launch)),
        detection_state=1,
    )


def build_clock(T: float, v_launch: float, k: float) -> InterferometerDefinition:
    """Ramsey-Borde clock geometry: four pi/2 pulses at 0, T, T, 2T.

    Wavevector signs (+, +, -, -); the upper arm is driven at every pulse,
    the lower arm never, so the paths enclose a single-recoil area and the
    total picks up -hbar k^2 T / m on top of the gravity terms.
    """
    if T < 0.0:
        raise ValueError(f"T must be >= 0, got {T}")
    up = (0.0, 0.0, k)
    down = (0.0, 0.0, -k)
    pulses = (
        Pulse(epoch=0.0, k_vector=up, area=PulseArea.HALF_PI),
        Pulse(epoch=T, k_vector=up, area=PulseArea.HALF_PI),
        Pulse(epoch=T, k_vector=down, area=PulseArea.HALF_PI),
        Pulse(epoch=2.0 * T, k_vector=down, area=PulseArea.HALF_PI),
    )
    upper = ArmRecipe(
        kicks=(1, -1, 1, -1),
        transitions=(Transition.UP, Transition.DOWN, Transition.UP, Transition.DOWN),
    )
    lower = ArmRecipe(
        kicks=(0, 0, 0, 0),
        transitions=(Transition.NONE,) * 4,
    )
    return InterferometerDefinition(
        pulses=pulses,
        upper=upper,
        lower=lower,
        initial_state=StateVector((0.0, 0.0, 0.0), (0.0, 0.0, v_launch)),
        detection_state=1,
    )


def _ladder_recipe(pulse_count: int, active: set[int]) -> ArmRecipe:
    """Recipe that transitions exactly at the given pulse indices.

    The transition direction is forced by the running internal state, and
    the momentum kick follows the transition.
    """
    kicks = []
    transitions = []
    state = 1
    for i in range(pulse_count):
        if i in active:
            if state == 1:
                transitions.append(Transition.UP)
                kicks.append(1)
                state = 2
            else:
                transitions.append(Transition.DOWN)
                kicks.append(-1)
                state = 1
        else:
            transitions.append(Transition.NONE)
            kicks.append(0)
    return ArmRecipe(kicks=tuple(kicks), transitions=tuple(transitions))


def build_recoil(
    T: float, T_rec: float, N: int, k: float
) -> tuple[InterferometerDefinition, InterferometerDefinition]:
    """Conjugate Ramsey-Borde pair with an N-1 pulse ladder.

    One shared sequence: pi/2 pulses at 0 and T (+k), N-1 pi pulses at
    T + j*T_rec with alternating wavevector (-k for odd j), and a closing
    pi/2 pair at T + N*T_rec and 2T + N*T_rec whose sign continues the
    alternation (-k for odd N). Returns (first, second) conjugates; the
    first holds both arms in the driven state through the ladder, and the
    difference phi(first) - phi(second) equals 2 N hbar k^2 T / m in free
    space, doubling the recoil signal while cancelling gravity.
    """
    if T < 0.0 or T_rec < 0.0:
        raise ValueError("T and T_rec must be >= 0")
    N = int(N)
    if N < 1:
        raise ValueError(f"N must be >= 1, got {N}")
    up = (0.0, 0.0, k)
    down = (0.0, 0.0, -k)

    epochs = [0.0, T]
    k_vecs = [up, up]
    areas = [PulseArea.HALF_PI, PulseArea.HALF_PI]
    for j in range(1, N):
        epochs.append(T + j * T_rec)
        k_vecs.append(down if j % 2 == 1 else up)
        areas.append(PulseArea.PI)
    closing = down if N % 2 == 1 else up
    epochs += [T + N * T_rec, 2.0 * T + N * T_rec]
    k_vecs += [closing, closing]
    areas += [PulseArea.HALF_PI, PulseArea.HALF_PI]

    pulses = tuple(
        Pulse(epoch=e, k_vector=v, area=a) for e, v, a in zip(epochs, k_vecs, areas)
    )
    count = len(pulses)
    ladder = set(range(2, 2 + (N - 1)))
    last = count - 1

    first = InterferometerDefinition(
        pulses=pulses,
        upper=_ladder_recipe(count, {0} | ladder | {last}),
        lower=_ladder_recipe(count, {1} | ladder | {last - 1}),
        initial_state=StateVector((0.0, 0.0, 0.0), (0.0, 0.0, 0.0)),
        detection_state=_ladder_recipe(count, {0} | ladder | {last}).final_state(),
    )
    second = InterferometerDefinition(
        pulses=pulses,
        upper=_ladder_recipe(count, {0, 1} | ladder | {last - 1}),
        lower=_ladder_recipe(count, ladder | {last}),
        initial_state=StateVector((0.0, 0.0, 0.0), (0.0, 0.0, 0.0)),
        detection_state=_ladder_recipe(count, ladder | {last}).final_state(),
    )
    return first, second


def build_gyroscope(T: float, v_y: float, k: float) -> InterferometerDefinition:
    """Horizontal Mach-Zehnder: k along x, launch velocity along y."""
    if T < 0.0:
        raise ValueError(f"T must be >= 0, got {T}")
    k_vec = (k, 0.0, 0.0)
    pulses = (
        Pulse(epoch=0.0, k_vector=k_vec, area=PulseArea.HALF_PI),
        Pulse(epoch=T, k_vector=k_vec, area=PulseArea.PI),
        Pulse(epoch=2.0 * T, k_vector=k_vec, area=PulseArea.HALF_PI),
    )
    upper = ArmRecipe(
        kicks=(1, -1, 0),
        transitions=(Transition.UP, Transition.DOWN, Transition.NONE),
    )
    lower = ArmRecipe(
        kicks=(0, 1, -1),
        transitions=(Transition.NONE, Transition.UP, Transition.DOWN),
    )
    return InterferometerDefinition(
        pulses=pulses,
        upper=upper,
        lower=lower,
        initial_state=StateVector((0.0, 0.0, 0.0), (0.0, v_y, 0.0)),
        detection_state=1,
    )


@dataclass(frozen=True, eq=False)
class ConfigurationPreset:
    """Named, fully resolved configuration: sequence + environment + species.

    definitions holds one interferometer, or two for conjugate pairs whose
    observable is phi(first) - phi(second).
    """

    name: str
    parameters: Mapping[str, float]
    species: AtomSpecies
    environment: EnvironmentModel
    definitions: tuple[InterferometerDefinition, ...]
    conjugate: bool = False

    def __post_init__(self):
        object.__setattr__(self, "parameters", MappingProxyType(dict(self.parameters)))
        object.__setattr__(self, "definitions", tuple(self.definitions))


def make_preset(
    name: str,
    parameters: Mapping[str, float] | None = None,
    environment: EnvironmentModel | None = None,
    species: AtomSpecies = CESIUM,
) -> ConfigurationPreset:
    """Build a preset by name with optional parameter overrides.

    Unknown parameter keys raise ValueError. For the fountain geometries
    (gravimeter, clock) the launch velocity defaults to -g_z T so the apex
    stays centred when T is overridden.
    """
    if name not in _SEQUENCE_DEFAULTS:
        raise PresetNotFoundError(name)
    env = environment if environment is not None else reference_environment()
    params = dict(_SEQUENCE_DEFAULTS[name])
    overrides = dict(parameters or {})
    unknown = set(overrides) - _ALLOWED_PARAMS[name]
    if unknown:
        raise ValueError(f"unknown parameters for preset {name}: {sorted(unknown)}")
    params.update(overrides)

    if name in ("gravimeter", "clock") and "v_launch" not in params:
        params["v_launch"] = -env.gravity[2] * params["T"]

    k = effective_wavevector(params["lambda_eff"])
    if name == "gravimeter":
        defns = (build_gravimeter(params["T"], params["v_launch"], k),)
        conjugate = False
    elif name == "clock":
        defns = (build_clock(params["T"], params["v_launch"], k),)
        conjugate = False
    elif name == "recoil":
        params["N"] = int(params["N"])
        defns = build_recoil(params["T"], params["T_rec"], params["N"], k)
        conjugate = True
    else:
        defns = (build_gyroscope(params["T"], params["v_y"], k),)
        conjugate = False
    return ConfigurationPreset(
        name=name,
        parameters=params,
        species=species,
        environment=env,
        definitions=defns,
        conjugate=conjugate,
    )


_ALLOWED_PARAMS: dict[str, set[str]] = {
    "gravimeter": {"T", "v_launch", "lambda_eff"},
    "clock": {"T", "v_launch", "lambda_eff"},
    "recoil": {"T", "T_rec", "N", "lambda_eff"},
    "gyroscope": {"T", "v_y", "lambda_eff"},
}
