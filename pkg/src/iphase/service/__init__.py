"""HTTP service layer: request/response models, handlers, FastAPI app."""

from .app import create_app
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
    EnvironmentSpec,
    PresetsResponse,
    RunRequest,
    SweepAxis,
    SweepRequest,
    TablesRequest,
    TablesResponse,
)

__all__ = [
    "CatalogResponse",
    "CompareRequest",
    "EnvironmentSpec",
    "PresetsResponse",
    "RunRequest",
    "SweepAxis",
    "SweepRequest",
    "TablesRequest",
    "TablesResponse",
    "create_app",
    "handle_catalog",
    "handle_compare",
    "handle_presets",
    "handle_run",
    "handle_sweep",
    "handle_tables",
]
