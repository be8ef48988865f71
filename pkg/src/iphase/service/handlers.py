"""Service operation handlers, callable in-process or behind FastAPI.

Each handler takes a request model and returns a response model; all
engine work happens here so the HTTP layer is pure wiring and the CLI can
call these functions directly for offline use.
"""

from __future__ import annotations

import numpy as np

from ..config import ConfigError, parse_modes
from ..report import (
    ModeComparisonReport,
    RunReport,
    SweepReport,
    build_mode_comparison,
    build_run_report,
    build_sweep_report,
    build_table_report,
)
from ..sequences import PRESET_NAMES
from ..termcat import TABLE_TAGS, catalog_export_rows
from .models import (
    CatalogResponse,
    CompareRequest,
    EnvironmentSpec,
    PresetsResponse,
    RunRequest,
    SweepRequest,
    TablesRequest,
    TablesResponse,
)

__all__ = [
    "handle_catalog",
    "handle_compare",
    "handle_presets",
    "handle_run",
    "handle_sweep",
    "handle_tables",
]


def _env_overrides(spec: EnvironmentSpec | None) -> dict[str, float] | None:
    if spec is None:
        return None
    out = spec.overrides()
    return out or None


def handle_run(request: RunRequest) -> RunReport:
    pairs = parse_modes(request.modes)
    return build_run_report(
        request.preset,
        pairs,
        sequence_overrides=dict(request.parameters) or None,
        environment_overrides=_env_overrides(request.environment),
        nodes=request.nodes,
    )


def handle_tables(request: TablesRequest) -> TablesResponse:
    tags = list(request.tables) if request.tables else list(TABLE_TAGS)
    for tag in tags:
        if tag not in TABLE_TAGS:
            raise KeyError(f"unknown table {tag!r}")
    reports = [
        build_table_report(
            tag,
            sequence_overrides=dict(request.parameters) or None,
            environment_overrides=_env_overrides(request.environment),
            tolerance=request.tolerance,
            nodes=request.nodes,
        )
        for tag in tags
    ]
    return TablesResponse(
        reports=reports,
        all_ok=all(report.all_ok for report in reports),
    )


def handle_compare(request: CompareRequest) -> ModeComparisonReport:
    return build_mode_comparison(
        request.preset,
        sequence_overrides=dict(request.parameters) or None,
        environment_overrides=_env_overrides(request.environment),
        nodes=request.nodes,
        target=request.target,
    )


def handle_sweep(request: SweepRequest) -> SweepReport:
    pairs = parse_modes(request.modes)
    if len(pairs) != 1:
        raise ConfigError("sweep takes exactly one trajectory:action mode pair")
    axes = []
    for axis in request.axes:
        if axis.count < 1:
            raise ConfigError(f"sweep axis {axis.parameter!r} has an empty range")
        axes.append((axis.parameter, list(np.linspace(axis.start, axis.stop, axis.count))))
    traj_mode, action_mode = pairs[0]
    return build_sweep_report(
        request.preset,
        axes,
        sequence_overrides=dict(request.parameters) or None,
        environment_overrides=_env_overrides(request.environment),
        traj_mode=traj_mode,
        action_mode=action_mode,
        nodes=request.nodes,
    )


def handle_presets() -> PresetsResponse:
    return PresetsResponse(presets=list(PRESET_NAMES), tables=list(TABLE_TAGS))


def handle_catalog() -> CatalogResponse:
    return CatalogResponse(rows=catalog_export_rows())
