"""Configuration parsing: TOML schema, --set overrides, mode specs."""

import pytest

from iphase.config import (
    STANDARD_MODE_PAIRS,
    ConfigError,
    RunConfig,
    apply_overrides,
    load_config,
    parse_modes,
)
from iphase.geomodel import DynamicsMode

FULL = DynamicsMode.FULL
NG = DynamicsMode.NO_GRADIENT
FF = DynamicsMode.FREE_FALL


def _write(tmp_path, text):
    path = tmp_path / "run.toml"
    path.write_text(text)
    return str(path)


def test_load_config_happy_path(tmp_path):
    path = _write(
        tmp_path,
        """
[environment]
latitude_deg = 41.0
g_z = -9.8

[sequence]
preset = "gravimeter"
T = 0.3
lambda_eff_nm = 426.0

[evaluation]
modes = "all"
nodes = 60

[output]
format = "json"
tolerance = "strict"
target = 1e-6
""",
    )
    cfg = load_config(path)
    assert cfg.preset_name() == "gravimeter"
    assert cfg.environment == {"latitude_deg": 41.0, "g_z": -9.8}
    assert cfg.evaluation == {"modes": "all", "nodes": 60}
    assert cfg.output["format"] == "json"
    overrides = cfg.sequence_overrides()
    assert overrides["T"] == 0.3
    assert overrides["lambda_eff"] == pytest.approx(426e-9)
    assert "lambda_eff_nm" not in overrides and "preset" not in overrides


def test_unknown_section_and_key(tmp_path):
    with pytest.raises(ConfigError, match="unknown section"):
        load_config(_write(tmp_path, "[lasers]\npower = 2.0\n"))
    with pytest.raises(ConfigError, match="unknown key sequence.detuning"):
        load_config(_write(tmp_path, "[sequence]\ndetuning = 1.0\n"))


def test_type_errors(tmp_path):
    with pytest.raises(ConfigError, match="expected an integer"):
        load_config(_write(tmp_path, "[sequence]\nN = 2.5\n"))
    with pytest.raises(ConfigError, match="expected an integer"):
        load_config(_write(tmp_path, "[sequence]\nN = true\n"))
    with pytest.raises(ConfigError, match="expected a number"):
        load_config(_write(tmp_path, '[environment]\ng_z = "heavy"\n'))
    with pytest.raises(ConfigError, match="must be one of"):
        load_config(_write(tmp_path, '[output]\nformat = "yaml"\n'))


def test_section_must_be_table(tmp_path):
    with pytest.raises(ConfigError, match="must be a table"):
        load_config(_write(tmp_path, "sequence = 3\n"))


def test_missing_file_and_bad_toml(tmp_path):
    with pytest.raises(ConfigError, match="cannot read config"):
        load_config(str(tmp_path / "absent.toml"))
    with pytest.raises(ConfigError, match="invalid TOML"):
        load_config(_write(tmp_path, "[sequence\npreset =\n"))


def test_apply_overrides():
    base = RunConfig(sequence={"preset": "gravimeter", "T": 0.4})
    out = apply_overrides(
        base, ["T=0.2", "sequence.v_launch=1.5", "nodes=80", "format=csv"]
    )
    assert out.sequence["T"] == 0.2
    assert out.sequence["v_launch"] == 1.5
    assert out.evaluation["nodes"] == 80
    assert out.output["format"] == "csv"
    # the original is untouched
    assert base.sequence == {"preset": "gravimeter", "T": 0.4}
    assert base.evaluation == {}


def test_apply_overrides_errors():
    base = RunConfig()
    with pytest.raises(ConfigError, match="KEY=VALUE"):
        apply_overrides(base, ["T:0.2"])
    with pytest.raises(ConfigError, match="KEY=VALUE"):
        apply_overrides(base, ["=0.2"])
    with pytest.raises(ConfigError, match="unknown config key"):
        apply_overrides(base, ["chirp=1.0"])
    with pytest.raises(ConfigError, match="unknown config key"):
        apply_overrides(base, ["sequence.chirp=1.0"])
    with pytest.raises(ConfigError, match="expected an integer"):
        apply_overrides(base, ["N=2.5"])
    with pytest.raises(ConfigError, match="expected a number"):
        apply_overrides(base, ["T=fast"])
    with pytest.raises(ConfigError, match="must be one of"):
        apply_overrides(base, ["tolerance=sloppy"])


def test_parse_modes():
    assert parse_modes("all") == STANDARD_MODE_PAIRS
    assert parse_modes("full") == ((FULL, FULL),)
    assert parse_modes("no_gradient") == ((NG, FULL),)
    assert parse_modes("free_fall:no_gradient") == ((FF, NG),)
    assert parse_modes("full, no_gradient") == ((FULL, FULL), (NG, FULL))
    # duplicates collapse, order preserved
    assert parse_modes("no_gradient,all") == (
        (NG, FULL),
        (FULL, FULL),
        (FF, FULL),
    )


def test_parse_modes_errors():
    for bad in ("", ",,", "   "):
        with pytest.raises(ConfigError, match="empty modes"):
            parse_modes(bad)
    with pytest.raises(ConfigError, match="unknown dynamics mode"):
        parse_modes("sideways")
    with pytest.raises(ConfigError, match="unknown dynamics mode"):
        parse_modes("full:sideways")


def test_standard_mode_pairs():
    assert STANDARD_MODE_PAIRS == ((FULL, FULL), (NG, FULL), (FF, FULL))
