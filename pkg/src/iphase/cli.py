"""Command-line front end.

Subcommands: tables, run, compare, sweep, export-catalog, serve. By
default every command calls the service handlers in-process, so no server
or network is involved; --server URL sends the same request to a running
instance instead and renders its response locally, byte-identically.

Exit codes: 0 success, 1 tolerance/target failure, 2 configuration or
usage error.
"""

from __future__ import annotations

import argparse
import os
import sys

from .config import (
    ConfigError,
    RunConfig,
    apply_overrides,
    load_config,
)
from .phases import ModeOrderingError
from .report import (
    ModeComparisonReport,
    RunReport,
    SweepReport,
    render,
    render_json,
)
from .sequences import PresetNotFoundError
from .service.handlers import (
    handle_catalog,
    handle_compare,
    handle_run,
    handle_sweep,
    handle_tables,
)
from .service.models import (
    CatalogResponse,
    CompareRequest,
    EnvironmentSpec,
    RunRequest,
    SweepAxis,
    SweepRequest,
    TablesRequest,
    TablesResponse,
)
from .termcat import TABLE_TAGS, catalog_csv

__all__ = ["entrypoint", "main"]

_EXT = {"text": "txt", "csv": "csv", "json": "json"}


class RemoteError(RuntimeError):
    """A --server request failed (connection or HTTP error)."""


def _post_json(server: str, path: str, payload: dict) -> dict:
    import httpx

    url = server.rstrip("/") + path
    try:
        response = httpx.post(url, json=payload, timeout=120.0)
    except httpx.HTTPError as exc:
        raise RemoteError(f"request to {url} failed: {exc}") from exc
    if response.status_code >= 400:
        try:
            detail = response.json().get("detail", response.text)
        except ValueError:
            detail = response.text
        raise RemoteError(f"{url} returned {response.status_code}: {detail}")
    return response.json()


def _get_json(server: str, path: str) -> dict:
    import httpx

    url = server.rstrip("/") + path
    try:
        response = httpx.get(url, timeout=120.0)
    except httpx.HTTPError as exc:
        raise RemoteError(f"request to {url} failed: {exc}") from exc
    if response.status_code >= 400:
        raise RemoteError(f"{url} returned {response.status_code}")
    return response.json()


def _effective_config(args) -> RunConfig:
    config = load_config(args.config) if args.config else RunConfig()
    if args.set:
        config = apply_overrides(config, args.set)
    return config


def _resolve_preset(args, config: RunConfig) -> str:
    name = getattr(args, "preset", None) or config.preset_name()
    if not name:
        raise ConfigError("no preset given (use --preset or sequence.preset)")
    return name


def _resolve_nodes(args, config: RunConfig) -> int:
    if args.nodes is not None:
        return args.nodes
    return config.evaluation.get("nodes", 40)


def _resolve_format(args, config: RunConfig, default: str) -> str:
    return args.format or config.output.get("format") or default


def _environment_spec(config: RunConfig) -> EnvironmentSpec | None:
    overrides = config.environment_overrides()
    return EnvironmentSpec(**overrides) if overrides else None


def _resolve_out(args, config: RunConfig) -> str | None:
    out = args.out
    if out is None:
        return None
    root = os.environ.get("IPHASE_OUT_DIR") or config.output.get("out_dir")
    if root and not os.path.isabs(out):
        return os.path.join(root, out)
    return out


def _write_file(path: str, content: str) -> None:
    parent = os.path.dirname(path)
    if parent:
        os.makedirs(parent, exist_ok=True)
    with open(path, "w", encoding="utf-8", newline="") as handle:
        handle.write(content)
    print(f"wrote {path}")


def cmd_tables(args) -> int:
    config = _effective_config(args)
    if args.preset is not None:
        if args.preset not in TABLE_TAGS:
            raise ConfigError(
                f"unknown table {args.preset!r}; expected one of {list(TABLE_TAGS)}"
            )
        tags = [args.preset]
    else:
        tags = list(TABLE_TAGS)
    tolerance = args.tolerance or config.output.get("tolerance") or "paper"
    request = TablesRequest(
        tables=tags,
        parameters=config.sequence_overrides(),
        environment=_environment_spec(config),
        tolerance=tolerance,
        nodes=_resolve_nodes(args, config),
    )
    if args.server:
        response = TablesResponse.model_validate(
            _post_json(args.server, "/tables", request.model_dump())
        )
    else:
        response = handle_tables(request)

    fmt = _resolve_format(args, config, "text")
    out = _resolve_out(args, config)
    if out:
        os.makedirs(out, exist_ok=True)
        for report in response.reports:
            _write_file(os.path.join(out, f"{report.table}.{_EXT[fmt]}"), render(report, fmt))
    elif fmt == "json":
        sys.stdout.write(render_json(response))
    elif fmt == "csv":
        # one combined CSV: keep the first header, drop the repeats
        chunks = [render(report, "csv") for report in response.reports]
        combined = chunks[0] + "".join(
            chunk.split("\n", 1)[1] for chunk in chunks[1:]
        )
        sys.stdout.write(combined)
    else:
        sys.stdout.write("\n".join(render(report, "text") for report in response.reports))

    if not response.all_ok:
        for report in response.reports:
            for row in report.rows:
                if row.status != "ok":
                    print(
                        f"tolerance failure ({report.tolerance}): {report.table} {row.term_id}"
                        f" [{row.formula}] rel_dev {row.rel_dev:.3g}",
                        file=sys.stderr,
                    )
        return 1
    return 0


def cmd_run(args) -> int:
    config = _effective_config(args)
    request = RunRequest(
        preset=_resolve_preset(args, config),
        parameters=config.sequence_overrides(),
        environment=_environment_spec(config),
        modes=args.modes or config.evaluation.get("modes") or "full",
        nodes=_resolve_nodes(args, config),
    )
    if args.server:
        report = RunReport.model_validate(_post_json(args.server, "/run", request.model_dump()))
    else:
        report = handle_run(request)
    document = render(report, _resolve_format(args, config, "text"))
    out = _resolve_out(args, config)
    if out:
        _write_file(out, document)
    else:
        sys.stdout.write(document)
    return 0


def cmd_compare(args) -> int:
    config = _effective_config(args)
    target = args.target
    if target is None:
        target = config.output.get("target")
    request = CompareRequest(
        preset=_resolve_preset(args, config),
        parameters=config.sequence_overrides(),
        environment=_environment_spec(config),
        nodes=_resolve_nodes(args, config),
        target=target,
    )
    if args.server:
        report = ModeComparisonReport.model_validate(
            _post_json(args.server, "/compare", request.model_dump())
        )
    else:
        report = handle_compare(request)
    document = render(report, _resolve_format(args, config, "text"))
    out = _resolve_out(args, config)
    if out:
        _write_file(out, document)
    else:
        sys.stdout.write(document)
    if not report.met:
        print(
            f"target missed: |no_gradient - full| = {abs(report.ng_minus_full_rad):.3g} rad"
            f" > {report.target_rad:.3g} rad",
            file=sys.stderr,
        )
        return 1
    return 0


def _parse_axis(text: str) -> SweepAxis:
    name, sep, spec = text.partition("=")
    parts = spec.split(":")
    if not sep or len(parts) != 3:
        raise ConfigError(f"--axis expects PARAM=START:STOP:COUNT, got {text!r}")
    try:
        start, stop = float(parts[0]), float(parts[1])
        count = int(parts[2])
    except ValueError as exc:
        raise ConfigError(f"bad axis numbers in {text!r}") from exc
    return SweepAxis(parameter=name.strip(), start=start, stop=stop, count=count)


def cmd_sweep(args) -> int:
    config = _effective_config(args)
    if not args.axis:
        raise ConfigError("sweep needs at least one --axis PARAM=START:STOP:COUNT")
    request = SweepRequest(
        preset=_resolve_preset(args, config),
        axes=[_parse_axis(text) for text in args.axis],
        parameters=config.sequence_overrides(),
        environment=_environment_spec(config),
        modes=args.modes or config.evaluation.get("modes") or "full",
        nodes=_resolve_nodes(args, config),
    )
    if args.server:
        report = SweepReport.model_validate(_post_json(args.server, "/sweep", request.model_dump()))
    else:
        report = handle_sweep(request)
    document = render(report, _resolve_format(args, config, "csv"))
    out = _resolve_out(args, config)
    if out:
        _write_file(out, document)
    else:
        sys.stdout.write(document)
    return 0


def cmd_export_catalog(args) -> int:
    config = _effective_config(args)
    fmt = args.format or config.output.get("format") or "csv"
    if fmt == "text":
        raise ConfigError("export-catalog supports csv or json")
    if args.server:
        response = CatalogResponse.model_validate(_get_json(args.server, "/catalog"))
    else:
        response = handle_catalog()
    if fmt == "csv":
        document = catalog_csv()
    else:
        document = render_json(response)
    out = _resolve_out(args, config)
    if out:
        _write_file(out, document)
    else:
        sys.stdout.write(document)
    return 0


def cmd_serve(args) -> int:
    import uvicorn

    from .service import create_app

    uvicorn.run(create_app(), host=args.host, port=args.port)
    return 0


def _add_common(parser: argparse.ArgumentParser) -> None:
    parser.add_argument("--config", help="TOML config file")
    parser.add_argument(
        "--set",
        action="append",
        default=[],
        metavar="KEY=VALUE",
        help="override a config key (repeatable, dotted or bare keys)",
    )
    parser.add_argument("--nodes", type=int, help="quadrature nodes per segment")
    parser.add_argument("--format", choices=("text", "csv", "json"))
    parser.add_argument("--out", help="output file (directory for tables)")
    parser.add_argument("--server", help="base URL of a running service instance")


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="iphase",
        description="Interferometer phase-shift engine: reproduce published tables, "
        "run presets, compare evaluation modes, sweep parameters.",
    )
    sub = parser.add_subparsers(dest="command")

    p_tables = sub.add_parser("tables", help="reproduce the published term tables")
    _add_common(p_tables)
    p_tables.add_argument("--preset", help="restrict to one table tag")
    p_tables.add_argument("--tolerance", choices=("paper", "strict"))
    p_tables.set_defaults(func=cmd_tables)

    p_run = sub.add_parser("run", help="phase breakdown for a preset")
    _add_common(p_run)
    p_run.add_argument("--preset")
    p_run.add_argument("--modes", help="e.g. full | no_gradient:full | all")
    p_run.set_defaults(func=cmd_run)

    p_compare = sub.add_parser("compare", help="compare evaluation mode pairs")
    _add_common(p_compare)
    p_compare.add_argument("--preset")
    p_compare.add_argument("--target", type=float, help="agreement target in rad")
    p_compare.set_defaults(func=cmd_compare)

    p_sweep = sub.add_parser("sweep", help="total phase over a parameter grid")
    _add_common(p_sweep)
    p_sweep.add_argument("--preset")
    p_sweep.add_argument(
        "--axis",
        action="append",
        default=[],
        metavar="PARAM=START:STOP:COUNT",
        help="sweep axis (repeatable, max 2)",
    )
    p_sweep.add_argument("--modes", help="single trajectory:action pair")
    p_sweep.set_defaults(func=cmd_sweep)

    p_catalog = sub.add_parser("export-catalog", help="dump the term catalog")
    _add_common(p_catalog)
    p_catalog.set_defaults(func=cmd_export_catalog)

    p_serve = sub.add_parser("serve", help="start the HTTP service")
    p_serve.add_argument("--host", default="127.0.0.1")
    p_serve.add_argument("--port", type=int, default=8000)
    p_serve.set_defaults(func=cmd_serve)

    return parser


def main(argv: list[str] | None = None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return int(exc.code or 0)
    if not getattr(args, "func", None):
        parser.print_help()
        return 2
    try:
        return args.func(args)
    except PresetNotFoundError as exc:
        print(f"error: unknown preset {exc.args[0]!r}", file=sys.stderr)
        return 2
    except (ConfigError, ModeOrderingError, RemoteError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2
    except KeyError as exc:
        print(f"error: {exc.args[0] if exc.args else exc}", file=sys.stderr)
        return 2
    except ValueError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2


def entrypoint() -> None:
    sys.exit(main(sys.argv[1:]))


if __name__ == "__main__":
    entrypoint()
