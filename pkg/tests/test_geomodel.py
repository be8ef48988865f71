"""Environment construction, degradation and validation."""

import math

import numpy as np
import pytest

from iphase import (
    CESIUM,
    SIDEREAL_RATE,
    AtomSpecies,
    DynamicsMode,
    EnvironmentModel,
    PhysicalConstants,
    build_environment,
    degrade_environment,
)

FULL = DynamicsMode.FULL
NG = DynamicsMode.NO_GRADIENT
FF = DynamicsMode.FREE_FALL


def test_build_environment_geometry():
    lat = math.radians(41.0)
    env = build_environment(lat, 6.72e6, -9.8, 7.0e-5)
    assert env.gravity[2] == -9.8
    assert env.gravity[0] == env.gravity[1] == 0.0
    assert env.omega[0] == 0.0
    assert math.isclose(env.omega[1], 7.0e-5 * math.cos(lat), rel_tol=1e-15)
    assert math.isclose(env.omega[2], 7.0e-5 * math.sin(lat), rel_tol=1e-15)
    assert env.earth_offset[2] == 6.72e6


def test_gradient_is_spherical_traceless():
    env = build_environment(0.5, 6.72e6, -9.8)
    diag = -9.8 / 6.72e6
    assert env.gradient[0, 0] == diag
    assert env.gradient[1, 1] == diag
    assert env.gradient[2, 2] == -2.0 * diag
    assert np.trace(env.gradient) == 0.0
    assert np.count_nonzero(env.gradient - np.diag(np.diag(env.gradient))) == 0


def test_default_rotation_is_sidereal():
    env = build_environment(0.0, 6.4e6, -9.8)
    assert math.isclose(np.linalg.norm(env.omega), SIDEREAL_RATE, rel_tol=1e-15)


@pytest.mark.parametrize(
    "kwargs",
    [
        dict(latitude=2.0, earth_radius=6.4e6, g_z=-9.8),
        dict(latitude=0.0, earth_radius=-1.0, g_z=-9.8),
        dict(latitude=0.0, earth_radius=0.0, g_z=-9.8),
        dict(latitude=0.0, earth_radius=6.4e6, g_z=float("nan")),
        dict(latitude=0.0, earth_radius=6.4e6, g_z=-9.8, omega_magnitude=-1e-5),
    ],
)
def test_build_environment_rejects_bad_inputs(kwargs):
    with pytest.raises(ValueError):
        build_environment(**kwargs)


def test_environment_model_validation():
    with pytest.raises(ValueError):
        EnvironmentModel(
            gravity=(0, 0),  # wrong shape
            gradient=np.zeros((3, 3)),
            omega=(0, 0, 0),
            earth_offset=(0, 0, 0),
        )
    asym = np.zeros((3, 3))
    asym[0, 1] = 1e-6
    with pytest.raises(ValueError, match="symmetric"):
        EnvironmentModel(
            gravity=(0, 0, -9.8), gradient=asym, omega=(0, 0, 0), earth_offset=(0, 0, 0)
        )
    with pytest.raises(ValueError, match="finite"):
        EnvironmentModel(
            gravity=(0, 0, float("inf")),
            gradient=np.zeros((3, 3)),
            omega=(0, 0, 0),
            earth_offset=(0, 0, 0),
        )


def test_environment_arrays_are_readonly():
    env = build_environment(0.7, 6.72e6, -9.8)
    with pytest.raises(ValueError):
        env.gravity[2] = 0.0
    with pytest.raises(ValueError):
        env.gradient[0, 0] = 1.0


def test_environment_equality_by_value():
    a = build_environment(0.7, 6.72e6, -9.8, 7e-5)
    b = build_environment(0.7, 6.72e6, -9.8, 7e-5)
    c = build_environment(0.7, 6.72e6, -9.7, 7e-5)
    assert a == b
    assert a != c
    assert a.__eq__(object()) is NotImplemented


def test_degrade_environment_levels(ref_env):
    assert degrade_environment(ref_env, FULL) is ref_env

    ng = degrade_environment(ref_env, NG)
    assert np.all(ng.gradient == 0.0)
    assert np.array_equal(ng.omega, ref_env.omega)
    assert np.array_equal(ng.gravity, ref_env.gravity)
    assert np.array_equal(ng.earth_offset, ref_env.earth_offset)

    ff = degrade_environment(ref_env, FF)
    assert np.all(ff.gradient == 0.0)
    assert np.all(ff.omega == 0.0)
    assert np.array_equal(ff.gravity, ref_env.gravity)


def test_mode_ordering():
    assert FULL.includes(NG) and FULL.includes(FF) and NG.includes(FF)
    assert not FF.includes(NG) and not NG.includes(FULL)
    assert FULL.includes(FULL)
    assert FULL.rank > NG.rank > FF.rank
    assert DynamicsMode("no_gradient") is NG


def test_species_and_constants_validation():
    assert CESIUM.mass == 2.21e-25
    with pytest.raises(ValueError):
        AtomSpecies(mass=0.0)
    with pytest.raises(ValueError):
        AtomSpecies(mass=float("nan"))
    assert PhysicalConstants().hbar > 0
    with pytest.raises(ValueError):
        PhysicalConstants(hbar=-1.0)
