"""Parameter-scaling checks on the assembled engine totals.

These fit power laws to sweeps of the leading signals; the fitted
exponents pin the engine to the analytic scalings without relying on
any tabulated number.
"""

import math

import numpy as np

from iphase import CESIUM, DynamicsMode, make_preset, total_phase
from iphase.geomodel import build_environment
from iphase.sequences import (
    REFERENCE_EARTH_RADIUS,
    REFERENCE_G_Z,
    REFERENCE_ROTATION_RATE,
)

FULL = DynamicsMode.FULL


def _total(preset, env):
    return total_phase(preset.definitions[0], env, CESIUM, FULL, FULL).total


def test_gravimeter_phase_goes_as_T_squared(uniform_env):
    times = [0.1, 0.15, 0.2, 0.25, 0.3, 0.4]
    totals = []
    for T in times:
        preset = make_preset("gravimeter", {"T": T}, environment=uniform_env)
        totals.append(abs(_total(preset, uniform_env)))
    slope, _ = np.polyfit(np.log(times), np.log(totals), 1)
    assert math.isclose(slope, 2.0, abs_tol=0.01)


def test_gyroscope_phase_linear_in_rotation_rate():
    rates = [3.5e-5, 4.5e-5, 5.5e-5, 6.5e-5, 7.0e-5]
    totals = []
    for rate in rates:
        env = build_environment(
            latitude=math.radians(41.0),
            earth_radius=REFERENCE_EARTH_RADIUS,
            g_z=REFERENCE_G_Z,
            omega_magnitude=rate,
        )
        preset = make_preset("gyroscope", environment=env)
        totals.append(abs(_total(preset, env)))
    slope, _ = np.polyfit(np.log(rates), np.log(totals), 1)
    assert math.isclose(slope, 1.0, abs_tol=0.01)


def test_gyroscope_latitude_dependence_is_sinusoidal():
    """The Sagnac term tracks Omega_z = Omega sin(latitude) while the
    g x Omega_y correction tracks cos; a two-column fit against
    (sin, cos) must reproduce the sweep essentially exactly."""
    latitudes = np.radians([10.0, 25.0, 40.0, 55.0, 70.0])
    totals = []
    for lat in latitudes:
        env = build_environment(
            latitude=float(lat),
            earth_radius=REFERENCE_EARTH_RADIUS,
            g_z=REFERENCE_G_Z,
            omega_magnitude=REFERENCE_ROTATION_RATE,
        )
        preset = make_preset("gyroscope", environment=env)
        totals.append(_total(preset, env))
    totals = np.array(totals)
    design = np.column_stack([np.sin(latitudes), np.cos(latitudes)])
    coef, *_ = np.linalg.lstsq(design, totals, rcond=None)
    residual = totals - design @ coef
    rel = np.linalg.norm(residual) / np.linalg.norm(totals)
    assert rel <= 1e-6
    # the sine (pure Sagnac) column dominates
    assert abs(coef[0]) > 10.0 * abs(coef[1])
