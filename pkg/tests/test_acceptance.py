"""Acceptance criteria, one test and one summary line per criterion.

Every criterion from the project contract runs here end to end at its
stated tolerance. Each test appends a PASS/FAIL line that the conftest
summary hook prints after the run, so the per-criterion outcome is
visible in plain pytest output.
"""

import math
import subprocess
import sys
import time

import numpy as np
from scipy.integrate import solve_ivp

from iphase import (
    CESIUM,
    HBAR,
    DynamicsMode,
    EnvironmentModel,
    InterferometerDefinition,
    StateVector,
    action_difference,
    action_integral,
    assemble_system,
    make_preset,
    parity_decompose,
    reference_environment,
    run_arm,
    total_phase,
)
from iphase.report import build_mode_comparison, build_table_report
from iphase.sequences import REFERENCE_LAMBDA_EFF, effective_wavevector
from iphase.termcat import TABLE_TAGS

FULL = DynamicsMode.FULL
NG = DynamicsMode.NO_GRADIENT
FF = DynamicsMode.FREE_FALL

PRESETS = ("gravimeter", "clock", "recoil", "gyroscope")


def _record(log, number, description, ok, detail=""):
    verdict = "PASS" if ok else "FAIL"
    suffix = f" ({detail})" if detail else ""
    line = f"{verdict} criterion {number}: {description}{suffix}"
    log.append(line)
    assert ok, line


def test_criterion_1_table_reproduction(acceptance_log):
    start = time.perf_counter()
    reports = [build_table_report(tag) for tag in TABLE_TAGS]
    elapsed = time.perf_counter() - start
    failures = [r.table for r in reports if not r.all_ok]
    ok = not failures and elapsed < 5.0
    _record(
        acceptance_log,
        1,
        "all five published tables reproduce within 2%/10% tolerance",
        ok,
        f"{len(reports)} tables, failures={failures or 'none'}, {elapsed:.2f} s",
    )


def test_criterion_2_perturbative_agreement(acceptance_log):
    bounds = {
        "gravimeter": 1e-5,
        "clock": 1e-5,
        "recoil": 1e-5,
        "gyroscope": 1e-9,
    }
    start = time.perf_counter()
    gaps = {
        name: build_mode_comparison(name).ng_minus_full_rad for name in PRESETS
    }
    elapsed = time.perf_counter() - start
    failures = [
        f"{name}={gaps[name]:.3g}"
        for name in PRESETS
        if abs(gaps[name]) > bounds[name]
    ]
    stretch = "met" if abs(gaps["gyroscope"]) <= 2e-10 else "not met"
    ok = not failures and elapsed < 10.0
    _record(
        acceptance_log,
        2,
        "no-gradient trajectories agree with full dynamics at published levels",
        ok,
        f"gyroscope={gaps['gyroscope']:.3g} rad with 2e-10 stretch {stretch}, "
        f"failures={failures or 'none'}, {elapsed:.2f} s",
    )


def test_criterion_3_naive_approximation_error(acceptance_log):
    report = build_mode_comparison("gravimeter")
    gap = report.ff_minus_full_rad
    in_window = 2e-3 <= abs(gap) <= 1e-2

    # the free-fall scheme flips the T^3 v_z Omega_y^2 coefficient from -3
    # to +1, so d(full - free_fall)/dv_launch normalized by k T^3 Omega_y^2
    # must be -4; probe it with a central difference in the launch velocity
    env = reference_environment()
    k = effective_wavevector(REFERENCE_LAMBDA_EFF)
    T = 0.4
    eps = 0.01
    v0 = -env.gravity[2] * T

    def delta(v):
        preset = make_preset("gravimeter", {"v_launch": v})
        d = preset.definitions[0]
        full = total_phase(d, env, CESIUM, FULL, FULL).total
        ff = total_phase(d, env, CESIUM, FF, FULL).total
        return full - ff

    slope = (delta(v0 + eps) - delta(v0 - eps)) / (2.0 * eps)
    coefficient = slope / (k * T**3 * env.omega[1] ** 2)
    flip_ok = math.isclose(coefficient, -4.0, rel_tol=0.02)
    ok = in_window and flip_ok
    _record(
        acceptance_log,
        3,
        "free-fall trajectories err by the published ~5e-3 rad with the "
        "documented coefficient flip",
        ok,
        f"|gap|={abs(gap):.3g} rad in [2e-3,1e-2], flip coefficient "
        f"{coefficient:.6f} vs -4",
    )


def test_criterion_4_truncation_residuals(acceptance_log):
    bounds = {
        "gravimeter": 1e-4,
        "clock": 1e-4,
        "recoil": 1e-2,
        "gyroscope": 1e-6,
    }
    residuals = {
        tag: build_table_report(tag).residual_rad for tag in bounds
    }
    failures = [
        f"{tag}={residuals[tag]:.3g}"
        for tag, bound in bounds.items()
        if abs(residuals[tag]) > bound
    ]
    _record(
        acceptance_log,
        4,
        "engine totals sit within the truncation budget of each table sum",
        not failures,
        f"residuals " + ", ".join(f"{t}={v:.3g}" for t, v in residuals.items()),
    )


def test_criterion_5_physics_property_suite(acceptance_log):
    failures = []
    uniform = EnvironmentModel(
        gravity=(0.0, 0.0, -9.8),
        gradient=np.zeros((3, 3)),
        omega=(0.0, 0.0, 0.0),
        earth_offset=(0.0, 0.0, 0.0),
    )
    env = reference_environment()

    # uniform-gravity limit: total = k g T^2, prop and sep vanish
    T = 0.1
    preset = make_preset("gravimeter", {"T": T}, environment=uniform)
    d = preset.definitions[0]
    b = total_phase(d, uniform, CESIUM, FULL, FULL)
    k = effective_wavevector(REFERENCE_LAMBDA_EFF)
    if not (
        abs(b.total - k * (-9.8) * T * T) <= 1e-9
        and b.separation == 0.0
        and abs(b.propagation) <= 1e-9
    ):
        failures.append("uniform-gravity limit")

    # translation / boost invariance in uniform gravity
    base = b.total
    for dr, dv in (
        ((0.05, -0.02, 0.03), (0.0, 0.0, 0.0)),
        ((0.0, 0.0, 0.0), (-0.04, 0.01, 0.05)),
        ((0.03, 0.03, -0.05), (0.02, -0.05, 0.01)),
    ):
        shifted = InterferometerDefinition(
            pulses=d.pulses,
            upper=d.upper,
            lower=d.lower,
            initial_state=StateVector(
                np.asarray(d.initial_state.position) + dr,
                np.asarray(d.initial_state.velocity) + dv,
            ),
            detection_state=d.detection_state,
        )
        moved = total_phase(shifted, uniform, CESIUM, FULL, FULL).total
        if abs(moved - base) > 1e-9:
            failures.append("initial-condition invariance")
            break

    # momentum kicks are bitwise exact
    grav = make_preset("gravimeter")
    traj = run_arm(grav.definitions[0], "upper", env, CESIUM, FULL)
    pulse = grav.definitions[0].pulses[0]
    expected = grav.definitions[0].initial_state.velocity + (
        1 * HBAR / CESIUM.mass
    ) * pulse.k_vector
    if not np.array_equal(traj.states_at_pulses[0].velocity, expected):
        failures.append("momentum-kick exactness")

    # parity recomposition: odd + even returns the total to the last ulp
    for name in PRESETS:
        p = make_preset(name)
        defn = p.definitions[0]
        total = total_phase(defn, env, CESIUM, FULL, FULL).total
        odd, even = parity_decompose(defn, env, CESIUM, FULL, FULL)
        if abs((odd + even) - total) > np.spacing(abs(total)):
            failures.append(f"parity recomposition ({name})")

    # quadrature already converged: doubling the nodes changes nothing
    for name, bound in (("gravimeter", 1e-8), ("gyroscope", 1e-12)):
        p = make_preset(name)
        up = run_arm(p.definitions[0], "upper", env, CESIUM, FULL)
        lo = run_arm(p.definitions[0], "lower", env, CESIUM, FULL)
        s40 = action_difference(up, lo, env, CESIUM, nodes=40) / HBAR
        s80 = action_difference(up, lo, env, CESIUM, nodes=80) / HBAR
        if abs(s40 - s80) > bound:
            failures.append(f"quadrature convergence ({name})")

    # semigroup property of the exact propagator
    system = assemble_system(env, CESIUM)
    composed = system.propagators(np.array([0.5]))[0] @ system.propagators(
        np.array([0.3])
    )[0]
    direct = system.propagators(np.array([0.8]))[0]
    rel = np.max(np.abs(composed - direct)) / np.max(np.abs(direct))
    if rel > 1e-13:
        failures.append("semigroup composition")

    # propagated trajectory satisfies the rotating-frame force law
    y0 = np.zeros(7)
    y0[3:6] = (0.0, 0.0, 3.92)
    y0[3:6] += (HBAR / CESIUM.mass) * grav.definitions[0].pulses[0].k_vector
    y0[6] = 1.0
    h = 2e-3
    worst = 0.0
    for t in np.linspace(0.05, 0.75, 8):
        stack = system.propagators(np.array([t - h, t, t + h]))
        states = np.einsum("kij,j->ki", stack, y0)
        fd_acc = (states[0, 0:3] - 2.0 * states[1, 0:3] + states[2, 0:3]) / h**2
        r, v = states[1, 0:3], states[1, 3:6]
        force = (
            env.gravity
            + env.gradient @ r
            - 2.0 * np.cross(env.omega, v)
            - np.cross(env.omega, np.cross(env.omega, r + env.earth_offset))
        )
        worst = max(worst, np.max(np.abs(fd_acc - force)) / np.max(np.abs(force)))
    if worst > 1e-6:
        failures.append("equations of motion")

    _record(
        acceptance_log,
        5,
        "physics property suite (limits, invariance, kicks, parity, "
        "quadrature, semigroup, EOM)",
        not failures,
        "all sub-checks passed" if not failures else "; ".join(failures),
    )


def test_criterion_6_oracle_equivalence(acceptance_log):
    failures = []
    for name in PRESETS:
        preset = make_preset(name)
        system = assemble_system(preset.environment, preset.species)
        defn = preset.definitions[0]
        y0 = np.zeros(7)
        y0[0:3] = defn.initial_state.position
        y0[3:6] = defn.initial_state.velocity
        y0[3:6] += (
            defn.upper.kicks[0] * HBAR / preset.species.mass
        ) * defn.pulses[0].k_vector
        y0[6] = 1.0
        tf = defn.pulses[-1].epoch - defn.pulses[0].epoch
        drift, forcing = system.drift, system.forcing
        sol = solve_ivp(
            lambda t, y: drift @ y + forcing,
            (0.0, tf),
            y0[0:6],
            method="DOP853",
            rtol=1e-13,
            atol=1e-16,
        )
        exact = (system.propagators(np.array([tf]))[0] @ y0)[0:6]
        rel = np.max(np.abs(sol.y[:, -1] - exact)) / np.max(np.abs(exact))
        if not (sol.success and rel < 1e-13):
            failures.append(f"runge-kutta ({name}, rel={rel:.2g})")

    # the difference-action integrator vs naive subtraction of absolute
    # actions; the naive side carries ~1e10 rad of cancelled common mode
    env = reference_environment()
    for name, rel_bound, abs_bound in (
        ("gravimeter", 1e-5, 1.0),
        ("gyroscope", None, 5e-3),
    ):
        preset = make_preset(name)
        up = run_arm(preset.definitions[0], "upper", env, CESIUM)
        lo = run_arm(preset.definitions[0], "lower", env, CESIUM)
        diff = action_difference(up, lo, env, CESIUM)
        direct = action_integral(up, env, CESIUM) - action_integral(lo, env, CESIUM)
        if abs(direct - diff) / HBAR > abs_bound:
            failures.append(f"action subtraction ({name})")
        elif rel_bound is not None and abs(direct - diff) / abs(diff) > rel_bound:
            failures.append(f"action subtraction rel ({name})")

    _record(
        acceptance_log,
        6,
        "independent integrators reproduce propagation and action",
        not failures,
        "all oracles agree" if not failures else "; ".join(failures),
    )


def test_criterion_7_end_to_end_determinism(acceptance_log):
    command = [sys.executable, "-m", "iphase.cli", "tables", "--format", "json"]
    first = subprocess.run(command, capture_output=True, timeout=300)
    second = subprocess.run(command, capture_output=True, timeout=300)
    ok = (
        first.returncode == 0
        and second.returncode == 0
        and first.stdout == second.stdout
        and len(first.stdout) > 0
    )
    _record(
        acceptance_log,
        7,
        "two consecutive CLI table runs are byte-identical",
        ok,
        f"{len(first.stdout)} bytes, exit codes "
        f"({first.returncode}, {second.returncode})",
    )
