"""Report assembly and rendering.

Builds table-reproduction, run, mode-comparison and sweep reports from the
engine, as pydantic models shared by the service layer, then renders them
as text (3 significant digits, like the published tables), CSV, or JSON
(17 significant digits, deterministic byte-for-byte).
"""

from __future__ import annotations

import csv
import io
import json
import math
from concurrent.futures import ThreadPoolExecutor

from pydantic import BaseModel

from .config import STANDARD_MODE_PAIRS, ConfigError
from .geomodel import DynamicsMode
from .phases import PhaseBreakdown, total_phase
from .sequences import (
    ConfigurationPreset,
    make_preset,
    reference_environment,
)
from .termcat import (
    PRESET_FOR_TABLE,
    TABLE_MODES,
    TABLE_TAGS,
    PhaseTerm,
    bindings_for_preset,
    table_terms,
)
from .numerics import NeumaierSum

__all__ = [
    "COMPARE_TARGETS",
    "TOLERANCE_CLASSES",
    "EngineTotal",
    "ModeComparisonReport",
    "RunReport",
    "RunResult",
    "SweepReport",
    "SweepRow",
    "TableReport",
    "TermRow",
    "build_mode_comparison",
    "build_run_report",
    "build_sweep_report",
    "build_table_report",
    "render",
    "render_csv",
    "render_json",
    "render_text",
]

# class -> (relative tolerance for rotation-free rows, for rotation rows);
# the published rotation rate is only quoted approximately, hence the
# looser second bound. strict is tight enough that known table-rounding
# outliers fail, which the CLI uses as a regression tripwire.
TOLERANCE_CLASSES: dict[str, tuple[float, float]] = {
    "paper": (0.02, 0.10),
    "strict": (0.002, 0.002),
}

# default agreement targets for compare: perturbative trajectories vs full
COMPARE_TARGETS: dict[str, float] = {
    "gravimeter": 1e-5,
    "clock": 1e-5,
    "recoil": 1e-5,
    "gyroscope": 1e-9,
}


class TermRow(BaseModel):
    term_id: str
    formula: str
    evaluated_rad: float
    paper_rad: float
    paper_relative: float
    rel_dev: float
    status: str


class EngineTotal(BaseModel):
    """Engine phase decomposition for one (trajectory, action) mode pair.

    For conjugate presets the components are differences between the two
    conjugate interferometers, so total_rad is the observable.
    """

    trajectory_mode: str
    action_mode: str
    propagation_rad: float
    laser_rad: float
    separation_rad: float
    total_rad: float


class TableReport(BaseModel):
    schema_version: int = 1
    table: str
    preset: str
    tolerance: str
    nodes: int
    parameters: dict[str, float]
    rows: list[TermRow]
    engine: list[EngineTotal]
    table_sum_rad: float
    residual_rad: float
    residual_within_smallest_row: bool
    all_ok: bool


class ModeComparisonReport(BaseModel):
    schema_version: int = 1
    preset: str
    nodes: int
    parameters: dict[str, float]
    totals: list[EngineTotal]
    ng_minus_full_rad: float
    ff_minus_full_rad: float
    target_rad: float
    met: bool


class RunResult(BaseModel):
    trajectory_mode: str
    action_mode: str
    breakdowns: list[EngineTotal]
    observable_rad: float


class RunReport(BaseModel):
    schema_version: int = 1
    preset: str
    conjugate: bool
    nodes: int
    parameters: dict[str, float]
    results: list[RunResult]


class SweepRow(BaseModel):
    values: dict[str, float]
    total_rad: float


class SweepReport(BaseModel):
    schema_version: int = 1
    preset: str
    trajectory_mode: str
    action_mode: str
    nodes: int
    axes: list[str]
    rows: list[SweepRow]


_ENV_KEYS = ("latitude_deg", "earth_radius_m", "g_z", "omega_rad_s")


def _resolve_preset(
    name: str,
    sequence_overrides: dict | None,
    environment_overrides: dict | None,
) -> ConfigurationPreset:
    env_over = dict(environment_overrides or {})
    unknown = set(env_over) - set(_ENV_KEYS)
    if unknown:
        raise ConfigError(f"unknown environment keys: {sorted(unknown)}")
    env = reference_environment(**env_over)
    return make_preset(name, parameters=sequence_overrides, environment=env)


def _mode_breakdowns(
    preset: ConfigurationPreset,
    traj_mode: DynamicsMode,
    action_mode: DynamicsMode,
    nodes: int,
) -> list[PhaseBreakdown]:
    return [
        total_phase(defn, preset.environment, preset.species, traj_mode, action_mode, nodes=nodes)
        for defn in preset.definitions
    ]


def _engine_total(
    preset: ConfigurationPreset,
    traj_mode: DynamicsMode,
    action_mode: DynamicsMode,
    nodes: int,
) -> EngineTotal:
    parts = _mode_breakdowns(preset, traj_mode, action_mode, nodes)
    if preset.conjugate:
        first, second = parts
        return EngineTotal(
            trajectory_mode=traj_mode.value,
            action_mode=action_mode.value,
            propagation_rad=first.propagation - second.propagation,
            laser_rad=first.laser - second.laser,
            separation_rad=first.separation - second.separation,
            total_rad=first.total - second.total,
        )
    only = parts[0]
    return EngineTotal(
        trajectory_mode=traj_mode.value,
        action_mode=action_mode.value,
        propagation_rad=only.propagation,
        laser_rad=only.laser,
        separation_rad=only.separation,
        total_rad=only.total,
    )


def _is_rotational(term: PhaseTerm) -> bool:
    return any(symbol in ("Omega_y", "Omega_z") for symbol, _ in term.factors)


def _relative_deviation(term: PhaseTerm, evaluated: float) -> float:
    reference = term.paper_value_rad
    if term.magnitude_only:
        return abs(abs(evaluated) - abs(reference)) / abs(reference)
    return abs(evaluated - reference) / abs(reference)


def build_table_report(
    table: str,
    sequence_overrides: dict | None = None,
    environment_overrides: dict | None = None,
    tolerance: str = "paper",
    nodes: int = 40,
) -> TableReport:
    """Reproduce one published table and compare the engine against it."""
    if table not in TABLE_TAGS:
        raise KeyError(f"unknown table {table!r}")
    if tolerance not in TOLERANCE_CLASSES:
        raise ConfigError(f"unknown tolerance class {tolerance!r}")
    plain_tol, rotational_tol = TOLERANCE_CLASSES[tolerance]
    preset = _resolve_preset(PRESET_FOR_TABLE[table], sequence_overrides, environment_overrides)
    bindings = bindings_for_preset(preset)

    rows = []
    table_sum = NeumaierSum()
    for term in table_terms(table):
        evaluated = term.evaluate(bindings)
        table_sum.add(evaluated)
        rel_dev = _relative_deviation(term, evaluated)
        bound = rotational_tol if _is_rotational(term) else plain_tol
        rows.append(
            TermRow(
                term_id=term.id,
                formula=term.formula(),
                evaluated_rad=evaluated,
                paper_rad=term.paper_value_rad,
                paper_relative=term.paper_relative,
                rel_dev=rel_dev,
                status="ok" if rel_dev <= bound else "fail",
            )
        )

    engine = [
        _engine_total(preset, traj, action, nodes) for traj, action in STANDARD_MODE_PAIRS
    ]
    match_traj, match_action = TABLE_MODES[table]
    matching = next(
        entry
        for entry in engine
        if entry.trajectory_mode == match_traj.value and entry.action_mode == match_action.value
    )
    residual = matching.total_rad - table_sum.value
    smallest = min(abs(row.evaluated_rad) for row in rows)
    return TableReport(
        table=table,
        preset=preset.name,
        tolerance=tolerance,
        nodes=nodes,
        parameters={key: float(value) for key, value in preset.parameters.items()},
        rows=rows,
        engine=engine,
        table_sum_rad=table_sum.value,
        residual_rad=residual,
        residual_within_smallest_row=abs(residual) <= smallest,
        all_ok=all(row.status == "ok" for row in rows),
    )


def build_mode_comparison(
    preset_name: str,
    sequence_overrides: dict | None = None,
    environment_overrides: dict | None = None,
    nodes: int = 40,
    target: float | None = None,
) -> ModeComparisonReport:
    """Totals under the three standard mode pairs and their differences.

    met tests the perturbative (no-gradient trajectories) total against
    the full one at the target, which defaults to the published agreement
    level for the preset.
    """
    preset = _resolve_preset(preset_name, sequence_overrides, environment_overrides)
    totals = [
        _engine_total(preset, traj, action, nodes) for traj, action in STANDARD_MODE_PAIRS
    ]
    full, no_gradient, free_fall = (entry.total_rad for entry in totals)
    resolved_target = COMPARE_TARGETS.get(preset_name, 1e-5) if target is None else target
    ng_diff = no_gradient - full
    return ModeComparisonReport(
        preset=preset.name,
        nodes=nodes,
        parameters={key: float(value) for key, value in preset.parameters.items()},
        totals=totals,
        ng_minus_full_rad=ng_diff,
        ff_minus_full_rad=free_fall - full,
        target_rad=resolved_target,
        met=abs(ng_diff) <= resolved_target,
    )


def build_run_report(
    preset_name: str,
    mode_pairs: tuple[tuple[DynamicsMode, DynamicsMode], ...] = STANDARD_MODE_PAIRS[:1],
    sequence_overrides: dict | None = None,
    environment_overrides: dict | None = None,
    nodes: int = 40,
) -> RunReport:
    preset = _resolve_preset(preset_name, sequence_overrides, environment_overrides)
    results = []
    for traj_mode, action_mode in mode_pairs:
        parts = _mode_breakdowns(preset, traj_mode, action_mode, nodes)
        breakdowns = [
            EngineTotal(
                trajectory_mode=traj_mode.value,
                action_mode=action_mode.value,
                propagation_rad=b.propagation,
                laser_rad=b.laser,
                separation_rad=b.separation,
                total_rad=b.total,
            )
            for b in parts
        ]
        observable = parts[0].total - parts[1].total if preset.conjugate else parts[0].total
        results.append(
            RunResult(
                trajectory_mode=traj_mode.value,
                action_mode=action_mode.value,
                breakdowns=breakdowns,
                observable_rad=observable,
            )
        )
    return RunReport(
        preset=preset.name,
        conjugate=preset.conjugate,
        nodes=nodes,
        parameters={key: float(value) for key, value in preset.parameters.items()},
        results=results,
    )


_SEQUENCE_AXES = ("T", "T_rec", "N", "v_launch", "v_y", "lambda_eff")


def build_sweep_report(
    preset_name: str,
    axes: list[tuple[str, list[float]]],
    sequence_overrides: dict | None = None,
    environment_overrides: dict | None = None,
    traj_mode: DynamicsMode = DynamicsMode.FULL,
    action_mode: DynamicsMode = DynamicsMode.FULL,
    nodes: int = 40,
    max_workers: int | None = None,
) -> SweepReport:
    """Total phase over a 1- or 2-axis parameter grid.

    Points are evaluated concurrently (the engine is pure); rows come back
    sorted by axis values so output order never depends on scheduling.
    """
    if not 1 <= len(axes) <= 2:
        raise ConfigError("sweep needs one or two axes")
    for name, values in axes:
        if name not in _SEQUENCE_AXES and name not in _ENV_KEYS:
            raise ConfigError(f"unknown sweep axis {name!r}")
        if len(values) == 0:
            raise ConfigError(f"sweep axis {name!r} has an empty range")

    if len(axes) == 1:
        points = [(value,) for value in axes[0][1]]
    else:
        points = [(a, b) for a in axes[0][1] for b in axes[1][1]]

    base_seq = dict(sequence_overrides or {})
    base_env = dict(environment_overrides or {})

    def evaluate(point: tuple[float, ...]) -> SweepRow:
        seq = dict(base_seq)
        env = dict(base_env)
        for (axis_name, _), value in zip(axes, point):
            if axis_name in _ENV_KEYS:
                env[axis_name] = value
            else:
                seq[axis_name] = value
        preset = _resolve_preset(preset_name, seq, env)
        total = _engine_total(preset, traj_mode, action_mode, nodes).total_rad
        return SweepRow(
            values={name: float(v) for (name, _), v in zip(axes, point)},
            total_rad=total,
        )

    with ThreadPoolExecutor(max_workers=max_workers) as pool:
        rows = list(pool.map(evaluate, points))
    rows.sort(key=lambda row: tuple(row.values[name] for name, _ in axes))
    return SweepReport(
        preset=preset_name,
        trajectory_mode=traj_mode.value,
        action_mode=action_mode.value,
        nodes=nodes,
        axes=[name for name, _ in axes],
        rows=rows,
    )


# --- rendering ---------------------------------------------------------

def _fmt_machine(value: float) -> str:
    if not math.isfinite(value):
        raise ValueError(f"non-finite value in report: {value!r}")
    return f"{value:.17g}"


def _fmt_text(value: float) -> str:
    return f"{value:.3g}"


def _emit_json(value, indent: int) -> str:
    pad = "  " * indent
    inner = "  " * (indent + 1)
    if isinstance(value, dict):
        if not value:
            return "{}"
        body = ",\n".join(
            f"{inner}{json.dumps(str(key))}: {_emit_json(item, indent + 1)}"
            for key, item in value.items()
        )
        return "{\n" + body + "\n" + pad + "}"
    if isinstance(value, (list, tuple)):
        if not value:
            return "[]"
        body = ",\n".join(f"{inner}{_emit_json(item, indent + 1)}" for item in value)
        return "[\n" + body + "\n" + pad + "]"
    if isinstance(value, bool):
        return "true" if value else "false"
    if isinstance(value, int):
        return str(value)
    if isinstance(value, float):
        return _fmt_machine(value)
    if isinstance(value, str):
        return json.dumps(value)
    if value is None:
        return "null"
    raise TypeError(f"cannot serialize {type(value).__name__}")


def render_json(report: BaseModel) -> str:
    """Deterministic JSON: fixed key order, floats at 17 significant digits."""
    return _emit_json(report.model_dump(), 0) + "\n"


def _csv_writer():
    buffer = io.StringIO()
    return buffer, csv.writer(buffer, lineterminator="\n")


def _csv_table(report: TableReport) -> str:
    buffer, writer = _csv_writer()
    writer.writerow(
        ["preset", "term_id", "formula", "evaluated_rad", "paper_rad", "rel_dev", "status"]
    )
    for row in report.rows:
        writer.writerow(
            [
                report.table,
                row.term_id,
                row.formula,
                _fmt_machine(row.evaluated_rad),
                _fmt_machine(row.paper_rad),
                _fmt_machine(row.rel_dev),
                row.status,
            ]
        )
    return buffer.getvalue()


def _csv_compare(report: ModeComparisonReport) -> str:
    buffer, writer = _csv_writer()
    writer.writerow(["preset", "quantity", "value"])
    for entry in report.totals:
        tag = f"{entry.trajectory_mode}:{entry.action_mode}"
        writer.writerow([report.preset, f"propagation_rad[{tag}]", _fmt_machine(entry.propagation_rad)])
        writer.writerow([report.preset, f"laser_rad[{tag}]", _fmt_machine(entry.laser_rad)])
        writer.writerow([report.preset, f"separation_rad[{tag}]", _fmt_machine(entry.separation_rad)])
        writer.writerow([report.preset, f"total_rad[{tag}]", _fmt_machine(entry.total_rad)])
    writer.writerow([report.preset, "ng_minus_full_rad", _fmt_machine(report.ng_minus_full_rad)])
    writer.writerow([report.preset, "ff_minus_full_rad", _fmt_machine(report.ff_minus_full_rad)])
    writer.writerow([report.preset, "target_rad", _fmt_machine(report.target_rad)])
    writer.writerow([report.preset, "met", "true" if report.met else "false"])
    return buffer.getvalue()


def _csv_run(report: RunReport) -> str:
    buffer, writer = _csv_writer()
    writer.writerow(["preset", "quantity", "value"])
    for result in report.results:
        tag = f"{result.trajectory_mode}:{result.action_mode}"
        for index, brk in enumerate(result.breakdowns):
            suffix = f".{index}" if len(result.breakdowns) > 1 else ""
            writer.writerow([report.preset, f"propagation_rad{suffix}[{tag}]", _fmt_machine(brk.propagation_rad)])
            writer.writerow([report.preset, f"laser_rad{suffix}[{tag}]", _fmt_machine(brk.laser_rad)])
            writer.writerow([report.preset, f"separation_rad{suffix}[{tag}]", _fmt_machine(brk.separation_rad)])
            writer.writerow([report.preset, f"total_rad{suffix}[{tag}]", _fmt_machine(brk.total_rad)])
        writer.writerow([report.preset, f"observable_rad[{tag}]", _fmt_machine(result.observable_rad)])
    return buffer.getvalue()


def _csv_sweep(report: SweepReport) -> str:
    buffer, writer = _csv_writer()
    writer.writerow(list(report.axes) + ["total_rad"])
    for row in report.rows:
        writer.writerow(
            [_fmt_machine(row.values[name]) for name in report.axes]
            + [_fmt_machine(row.total_rad)]
        )
    return buffer.getvalue()


def render_csv(report: BaseModel) -> str:
    if isinstance(report, TableReport):
        return _csv_table(report)
    if isinstance(report, ModeComparisonReport):
        return _csv_compare(report)
    if isinstance(report, RunReport):
        return _csv_run(report)
    if isinstance(report, SweepReport):
        return _csv_sweep(report)
    raise TypeError(f"no CSV renderer for {type(report).__name__}")


def _text_table(report: TableReport) -> str:
    lines = [
        f"table {report.table}  (preset {report.preset}, tolerance {report.tolerance}, nodes {report.nodes})",
        f"{'term':12s} {'formula':44s} {'evaluated':>11s} {'published':>11s} {'rel_dev':>9s} status",
    ]
    for row in report.rows:
        lines.append(
            f"{row.term_id:12s} {row.formula:44s} {_fmt_text(row.evaluated_rad):>11s}"
            f" {_fmt_text(row.paper_rad):>11s} {_fmt_text(row.rel_dev):>9s} {row.status}"
        )
    lines.append("engine totals (trajectory/action):")
    for entry in report.engine:
        pair = f"{entry.trajectory_mode}/{entry.action_mode}"
        lines.append(
            f"  {pair:22s} total {_fmt_text(entry.total_rad):>11s}"
            f"  (prop {_fmt_text(entry.propagation_rad)}, laser {_fmt_text(entry.laser_rad)},"
            f" sep {_fmt_text(entry.separation_rad)})"
        )
    within = "yes" if report.residual_within_smallest_row else "NO"
    lines.append(
        f"table sum {_fmt_text(report.table_sum_rad)}, engine residual {_fmt_text(report.residual_rad)},"
        f" within smallest row: {within}"
    )
    lines.append(f"rows within tolerance: {'all' if report.all_ok else 'SOME FAILED'}")
    return "\n".join(lines) + "\n"


def _text_compare(report: ModeComparisonReport) -> str:
    lines = [f"mode comparison for {report.preset} (nodes {report.nodes})"]
    for entry in report.totals:
        pair = f"{entry.trajectory_mode}/{entry.action_mode}"
        lines.append(
            f"  {pair:22s} total {_fmt_text(entry.total_rad):>11s}"
            f"  (prop {_fmt_text(entry.propagation_rad)}, laser {_fmt_text(entry.laser_rad)},"
            f" sep {_fmt_text(entry.separation_rad)})"
        )
    lines.append(f"no_gradient - full: {_fmt_text(report.ng_minus_full_rad)} rad")
    lines.append(f"free_fall   - full: {_fmt_text(report.ff_minus_full_rad)} rad")
    verdict = "met" if report.met else "MISSED"
    lines.append(f"target {_fmt_text(report.target_rad)} rad: {verdict}")
    return "\n".join(lines) + "\n"


def _text_run(report: RunReport) -> str:
    lines = [f"run {report.preset} (nodes {report.nodes})"]
    for result in report.results:
        lines.append(f"  modes {result.trajectory_mode}/{result.action_mode}:")
        for index, brk in enumerate(result.breakdowns):
            label = f"    arm pair {index}" if report.conjugate else "    breakdown"
            lines.append(
                f"{label}: prop {_fmt_text(brk.propagation_rad)}, laser {_fmt_text(brk.laser_rad)},"
                f" sep {_fmt_text(brk.separation_rad)}, total {_fmt_text(brk.total_rad)}"
            )
        lines.append(f"    observable: {_fmt_text(result.observable_rad)} rad")
    return "\n".join(lines) + "\n"


def _text_sweep(report: SweepReport) -> str:
    header = "  ".join(f"{name:>14s}" for name in report.axes) + f"  {'total_rad':>14s}"
    lines = [
        f"sweep {report.preset} over {', '.join(report.axes)}"
        f" ({report.trajectory_mode}/{report.action_mode}, nodes {report.nodes})",
        header,
    ]
    for row in report.rows:
        cells = "  ".join(f"{_fmt_text(row.values[name]):>14s}" for name in report.axes)
        lines.append(f"{cells}  {_fmt_text(row.total_rad):>14s}")
    return "\n".join(lines) + "\n"


def render_text(report: BaseModel) -> str:
    if isinstance(report, TableReport):
        return _text_table(report)
    if isinstance(report, ModeComparisonReport):
        return _text_compare(report)
    if isinstance(report, RunReport):
        return _text_run(report)
    if isinstance(report, SweepReport):
        return _text_sweep(report)
    raise TypeError(f"no text renderer for {type(report).__name__}")


def render(report: BaseModel, fmt: str) -> str:
    if fmt == "json":
        return render_json(report)
    if fmt == "csv":
        return render_csv(report)
    if fmt == "text":
        return render_text(report)
    raise ConfigError(f"unknown format {fmt!r}")
