"""Strict run-configuration parsing: TOML files, KEY=VALUE overrides, modes.

The schema is deliberately closed: unknown sections or keys are errors,
values are type-checked, and unit-suffixed keys are normalized to SI on
access so the engine only ever sees base units.
"""

from __future__ import annotations

from dataclasses import dataclass, field

try:
    import tomllib
except ImportError:  # py3.10
    import tomli as tomllib

from .geomodel import DynamicsMode

__all__ = [
    "ConfigError",
    "RunConfig",
    "STANDARD_MODE_PAIRS",
    "apply_overrides",
    "load_config",
    "parse_modes",
]


class ConfigError(ValueError):
    """Malformed configuration: unknown key, bad type, bad value."""


def _as_float(key: str, value) -> float:
    if isinstance(value, bool) or not isinstance(value, (int, float)):
        raise ConfigError(f"{key}: expected a number, got {value!r}")
    return float(value)


def _as_int(key: str, value) -> int:
    if isinstance(value, bool) or not isinstance(value, int):
        raise ConfigError(f"{key}: expected an integer, got {value!r}")
    return value


def _as_str(key: str, value) -> str:
    if not isinstance(value, str):
        raise ConfigError(f"{key}: expected a string, got {value!r}")
    return value


def _choice(*allowed: str):
    def cast(key: str, value):
        text = _as_str(key, value)
        if text not in allowed:
            raise ConfigError(f"{key}: must be one of {allowed}, got {text!r}")
        return text

    return cast


# section -> key -> caster; this is the whole accepted surface
_SCHEMA = {
    "environment": {
        "latitude_deg": _as_float,
        "earth_radius_m": _as_float,
        "g_z": _as_float,
        "omega_rad_s": _as_float,
    },
    "sequence": {
        "preset": _as_str,
        "T": _as_float,
        "T_rec": _as_float,
        "N": _as_int,
        "v_launch": _as_float,
        "v_y": _as_float,
        "lambda_eff_nm": _as_float,
    },
    "evaluation": {
        "modes": _as_str,
        "nodes": _as_int,
    },
    "output": {
        "format": _choice("text", "csv", "json"),
        "out_dir": _as_str,
        "tolerance": _choice("paper", "strict"),
        "target": _as_float,
    },
}


@dataclass(frozen=True)
class RunConfig:
    """Validated configuration, one dict per TOML section."""

    environment: dict = field(default_factory=dict)
    sequence: dict = field(default_factory=dict)
    evaluation: dict = field(default_factory=dict)
    output: dict = field(default_factory=dict)

    def preset_name(self) -> str | None:
        return self.sequence.get("preset")

    def sequence_overrides(self) -> dict[str, float]:
        """Engine-facing sequence parameters, normalized to SI."""
        out = {}
        for key, value in self.sequence.items():
            if key == "preset":
                continue
            if key == "lambda_eff_nm":
                out["lambda_eff"] = value * 1e-9
            else:
                out[key] = value
        return out

    def environment_overrides(self) -> dict[str, float]:
        return dict(self.environment)


def _validate_sections(raw: dict, source: str) -> RunConfig:
    sections = {}
    for name, content in raw.items():
        if name not in _SCHEMA:
            raise ConfigError(f"{source}: unknown section [{name}]")
        if not isinstance(content, dict):
            raise ConfigError(f"{source}: [{name}] must be a table")
        keys = _SCHEMA[name]
        section = {}
        for key, value in content.items():
            if key not in keys:
                raise ConfigError(f"{source}: unknown key {name}.{key}")
            section[key] = keys[key](f"{name}.{key}", value)
        sections[name] = section
    return RunConfig(
        environment=sections.get("environment", {}),
        sequence=sections.get("sequence", {}),
        evaluation=sections.get("evaluation", {}),
        output=sections.get("output", {}),
    )


def load_config(path: str) -> RunConfig:
    try:
        with open(path, "rb") as handle:
            raw = tomllib.load(handle)
    except OSError as exc:
        raise ConfigError(f"cannot read config {path}: {exc}") from exc
    except tomllib.TOMLDecodeError as exc:
        raise ConfigError(f"{path}: invalid TOML: {exc}") from exc
    return _validate_sections(raw, path)


def _locate_key(key: str) -> tuple[str, str]:
    if "." in key:
        section, _, bare = key.partition(".")
        if section not in _SCHEMA or bare not in _SCHEMA[section]:
            raise ConfigError(f"unknown config key {key!r}")
        return section, bare
    hits = [name for name, keys in _SCHEMA.items() if key in keys]
    if not hits:
        raise ConfigError(f"unknown config key {key!r}")
    if len(hits) > 1:
        raise ConfigError(f"ambiguous config key {key!r}: found in {hits}")
    return hits[0], key


def _parse_scalar(caster, key: str, text: str):
    if caster is _as_float:
        try:
            return float(text)
        except ValueError as exc:
            raise ConfigError(f"{key}: expected a number, got {text!r}") from exc
    if caster is _as_int:
        try:
            return int(text)
        except ValueError as exc:
            raise ConfigError(f"{key}: expected an integer, got {text!r}") from exc
    return caster(key, text)


def apply_overrides(config: RunConfig, assignments: list[str]) -> RunConfig:
    """Apply repeatable --set KEY=VALUE entries on top of a config.

    KEY may be dotted (sequence.T) or bare (T) when unambiguous across
    sections; the value is parsed with the same caster the TOML schema
    uses for that key.
    """
    sections = {
        "environment": dict(config.environment),
        "sequence": dict(config.sequence),
        "evaluation": dict(config.evaluation),
        "output": dict(config.output),
    }
    for entry in assignments:
        key, sep, text = entry.partition("=")
        if not sep or not key:
            raise ConfigError(f"--set expects KEY=VALUE, got {entry!r}")
        section, bare = _locate_key(key.strip())
        caster = _SCHEMA[section][bare]
        sections[section][bare] = _parse_scalar(caster, f"{section}.{bare}", text.strip())
    return RunConfig(**sections)


_MODE_NAMES = {mode.value: mode for mode in DynamicsMode}

STANDARD_MODE_PAIRS: tuple[tuple[DynamicsMode, DynamicsMode], ...] = (
    (DynamicsMode.FULL, DynamicsMode.FULL),
    (DynamicsMode.NO_GRADIENT, DynamicsMode.FULL),
    (DynamicsMode.FREE_FALL, DynamicsMode.FULL),
)


def _parse_mode(token: str) -> DynamicsMode:
    if token not in _MODE_NAMES:
        raise ConfigError(
            f"unknown dynamics mode {token!r}; expected one of {sorted(_MODE_NAMES)}"
        )
    return _MODE_NAMES[token]


def parse_modes(text: str) -> tuple[tuple[DynamicsMode, DynamicsMode], ...]:
    """Parse a modes spec into (trajectory, action) pairs.

    Grammar: comma-separated items; "all" expands to the three standard
    pairs; a bare mode M means (M, full); "traj:action" picks both
    explicitly. Duplicates collapse, order is kept.
    """
    pairs: list[tuple[DynamicsMode, DynamicsMode]] = []
    for item in text.split(","):
        item = item.strip()
        if not item:
            continue
        if item == "all":
            pairs.extend(STANDARD_MODE_PAIRS)
            continue
        if ":" in item:
            traj_text, _, action_text = item.partition(":")
            pairs.append((_parse_mode(traj_text.strip()), _parse_mode(action_text.strip())))
        else:
            pairs.append((_parse_mode(item), DynamicsMode.FULL))
    if not pairs:
        raise ConfigError(f"empty modes spec {text!r}")
    seen = []
    for pair in pairs:
        if pair not in seen:
            seen.append(pair)
    return tuple(seen)
