"""FastAPI application exposing the engine.

Thin wiring over the handlers: every endpoint validates with the request
models, translates domain errors to HTTP codes (404 unknown preset/table,
422 bad configuration) and returns the report models as JSON.
"""

from __future__ import annotations

from fastapi import FastAPI, HTTPException

from .. import __version__
from ..config import ConfigError
from ..phases import ModeOrderingError
from ..sequences import PresetNotFoundError
from .handlers import (
    handle_catalog,
    handle_compare,
    handle_presets,
    handle_run,
    handle_sweep,
    handle_tables,
)
from .models import (
    CatalogResponse,
    CompareRequest,
    ModeComparisonReport,
    PresetsResponse,
    RunReport,
    RunRequest,
    SweepReport,
    SweepRequest,
    TablesRequest,
    TablesResponse,
)

__all__ = ["create_app"]


def _translated(handler, request=None):
    try:
        return handler(request) if request is not None else handler()
    except PresetNotFoundError as exc:
        raise HTTPException(status_code=404, detail=f"unknown preset: {exc.args[0]}")
    except KeyError as exc:
        raise HTTPException(status_code=404, detail=str(exc.args[0]) if exc.args else str(exc))
    except (ConfigError, ModeOrderingError, ValueError) as exc:
        raise HTTPException(status_code=422, detail=str(exc))


def create_app() -> FastAPI:
    app = FastAPI(title="iphase", version=__version__)

    @app.get("/health")
    def health() -> dict:
        return {"status": "ok", "version": __version__}

    @app.get("/presets", response_model=PresetsResponse)
    def presets() -> PresetsResponse:
        return _translated(lambda: handle_presets())

    @app.get("/catalog", response_model=CatalogResponse)
    def catalog() -> CatalogResponse:
        return _translated(lambda: handle_catalog())

    @app.post("/run", response_model=RunReport)
    def run(request: RunRequest) -> RunReport:
        return _translated(handle_run, request)

    @app.post("/tables", response_model=TablesResponse)
    def tables(request: TablesRequest) -> TablesResponse:
        return _translated(handle_tables, request)

    @app.post("/compare", response_model=ModeComparisonReport)
    def compare(request: CompareRequest) -> ModeComparisonReport:
        return _translated(handle_compare, request)

    @app.post("/sweep", response_model=SweepReport)
    def sweep(request: SweepRequest) -> SweepReport:
        return _translated(handle_sweep, request)

    return app
