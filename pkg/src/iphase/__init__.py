"""iphase: inertial phase shifts of light-pulse atom interferometers.

Simulates gravimeter, optical clock, photon-recoil and gyroscope pulse
sequences in a rotating frame with gravity and its gradient, splits the
interferometer phase into propagation, laser and separation parts, and
reproduces the published high-order term tables those configurations are
checked against.
"""

from .geomodel import (
    CESIUM,
    HBAR,
    SIDEREAL_RATE,
    AtomSpecies,
    DynamicsMode,
    EnvironmentModel,
    PhysicalConstants,
    build_environment,
    degrade_environment,
)
from .linodyn import (
    ArmTrajectory,
    LinearSystem,
    PropagationError,
    Segment,
    StateVector,
    action_difference,
    action_integral,
    assemble_system,
    propagate,
)
from .phases import (
    ArmRecipe,
    InterferometerDefinition,
    ModeOrderingError,
    PhaseBreakdown,
    Pulse,
    PulseArea,
    Transition,
    laser_phase,
    parity_decompose,
    run_arm,
    separation_phase,
    total_phase,
)
from .sequences import (
    PRESET_NAMES,
    ConfigurationPreset,
    PresetNotFoundError,
    build_clock,
    build_gravimeter,
    build_gyroscope,
    build_recoil,
    effective_wavevector,
    make_preset,
    reference_environment,
)
from .termcat import (
    CATALOG,
    TABLE_TAGS,
    PhaseTerm,
    bindings_for_preset,
    reconcile,
    reference_bindings,
    table_sum,
)

__version__ = "0.1.0"

__all__ = [
    "ArmRecipe",
    "ArmTrajectory",
    "AtomSpecies",
    "CATALOG",
    "CESIUM",
    "ConfigurationPreset",
    "DynamicsMode",
    "EnvironmentModel",
    "HBAR",
    "InterferometerDefinition",
    "LinearSystem",
    "ModeOrderingError",
    "PRESET_NAMES",
    "PhaseBreakdown",
    "PhaseTerm",
    "PhysicalConstants",
    "PresetNotFoundError",
    "PropagationError",
    "Pulse",
    "PulseArea",
    "SIDEREAL_RATE",
    "Segment",
    "StateVector",
    "TABLE_TAGS",
    "Transition",
    "__version__",
    "action_difference",
    "action_integral",
    "assemble_system",
    "bindings_for_preset",
    "build_clock",
    "build_environment",
    "build_gravimeter",
    "build_gyroscope",
    "build_recoil",
    "degrade_environment",
    "effective_wavevector",
    "laser_phase",
    "make_preset",
    "parity_decompose",
    "propagate",
    "reconcile",
    "reference_bindings",
    "reference_environment",
    "run_arm",
    "separation_phase",
    "table_sum",
    "total_phase",
]
