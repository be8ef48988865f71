"""Request/response schemas for the HTTP service.

Responses reuse the report models directly; requests mirror the CLI's
configuration surface (preset + overrides + modes + nodes) so the CLI can
run in-process or remote with the same payloads.
"""

from __future__ import annotations

from pydantic import BaseModel, Field

from ..report import ModeComparisonReport, RunReport, SweepReport, TableReport

__all__ = [
    "CatalogResponse",
    "CompareRequest",
    "EnvironmentSpec",
    "ModeComparisonReport",
    "PresetsResponse",
    "RunReport",
    "RunRequest",
    "SweepAxis",
    "SweepReport",
    "SweepRequest",
    "TableReport",
    "TablesRequest",
    "TablesResponse",
]


class EnvironmentSpec(BaseModel):
    """Overrides of the reference environment; unset fields keep defaults."""

    latitude_deg: float | None = None
    earth_radius_m: float | None = None
    g_z: float | None = None
    omega_rad_s: float | None = None

    def overrides(self) -> dict[str, float]:
        return {
            key: value
            for key, value in self.model_dump().items()
            if value is not None
        }


class RunRequest(BaseModel):
    preset: str
    parameters: dict[str, float] = Field(default_factory=dict)
    environment: EnvironmentSpec | None = None
    modes: str = "full"
    nodes: int = 40


class TablesRequest(BaseModel):
    tables: list[str] | None = None
    parameters: dict[str, float] = Field(default_factory=dict)
    environment: EnvironmentSpec | None = None
    tolerance: str = "paper"
    nodes: int = 40


class TablesResponse(BaseModel):
    schema_version: int = 1
    reports: list[TableReport]
    all_ok: bool


class CompareRequest(BaseModel):
    preset: str
    parameters: dict[str, float] = Field(default_factory=dict)
    environment: EnvironmentSpec | None = None
    nodes: int = 40
    target: float | None = None


class SweepAxis(BaseModel):
    parameter: str
    start: float
    stop: float
    count: int


class SweepRequest(BaseModel):
    preset: str
    axes: list[SweepAxis]
    parameters: dict[str, float] = Field(default_factory=dict)
    environment: EnvironmentSpec | None = None
    modes: str = "full"
    nodes: int = 40


class PresetsResponse(BaseModel):
    presets: list[str]
    tables: list[str]


class CatalogResponse(BaseModel):
    schema_version: int = 1
    rows: list[dict]
