"""Config text format: parse/emit round trips, validation, overrides."""

from dataclasses import replace

import pytest

from hypslice import config
from hypslice.config import ConfigError, RunConfig


def test_default_roundtrip():
    cfg = RunConfig()
    text = config.emit(cfg)
    assert config.parse(text) == cfg
    # canonical form is a fixed point
    assert config.emit(config.parse(text)) == text


def test_comments_and_blank_lines_ignored():
    cfg = RunConfig()
    text = config.emit(cfg)
    noisy = "# leading comment\n\n" + text.replace(
        "grid.h = ", "grid.h =   ", 1) + "\n  # trailing\n"
    assert config.parse(noisy) == cfg


def test_hash_ignores_formatting():
    base = config.emit(RunConfig())
    noisy = "# c\n" + base.replace(" = ", "   =   ")
    assert config.config_hash(config.parse(noisy)) == config.config_hash(
        config.parse(base))


def test_hash_sensitive_to_values():
    cfg = RunConfig()
    other = replace(cfg, grid=replace(cfg.grid, h=cfg.grid.h / 2))
    assert config.config_hash(cfg) != config.config_hash(other)


def test_array_parsing():
    cfg = config.parse("slices.s_values = [2.0, 2.5,3.0]\n")
    assert cfg.slices.s_values == (2.0, 2.5, 3.0)


def test_array_requires_brackets():
    with pytest.raises(ConfigError):
        config.parse("slices.s_values = 2.0, 3.0\n")


def test_unknown_key_rejected():
    with pytest.raises(ConfigError, match="unknown"):
        config.parse("grid.spacing = 0.1\n")
    with pytest.raises(ConfigError, match="unknown section"):
        config.parse("mesh.h = 0.1\n")


def test_malformed_line_rejected():
    with pytest.raises(ConfigError, match="key = value"):
        config.parse("grid.h 0.1\n")


def test_float_or_none_and_auto():
    cfg = config.parse("time.s_max = none\ntime.t_max = 5.0\ngrid.extent = auto\n")
    assert cfg.time.s_max is None
    assert cfg.time.t_max == 5.0
    assert cfg.grid.extent == "auto"
    with pytest.raises(ConfigError):
        config.parse("time.s_max = soon\n")


def test_load_missing_file(tmp_path):
    with pytest.raises(ConfigError, match="not found"):
        config.load(tmp_path / "nope.cfg")


def _valid_base() -> RunConfig:
    cfg = RunConfig()
    return replace(cfg, time=replace(cfg.time, s_max=6.0))


def test_validate_exactly_one_horizon():
    cfg = RunConfig()
    both = replace(cfg, time=replace(cfg.time, s_max=6.0, t_max=6.0))
    with pytest.raises(ConfigError, match="exactly one"):
        config.validate(both)
    neither = replace(cfg, time=replace(cfg.time, s_max=None, t_max=None))
    with pytest.raises(ConfigError, match="exactly one"):
        config.validate(neither)


def test_validate_rejects_non_null_slot():
    cfg = _valid_base()
    bad = replace(cfg, model=replace(cfg.model,
                                     a1=(1.0, 0, 0, 0, 0, 0, 0, 0, 0)))
    with pytest.raises(ConfigError, match="null form"):
        config.validate(bad)


@pytest.mark.parametrize("section,field,value,msg", [
    ("grid", "h", -0.1, "positive"),
    ("time", "cfl", 1.2, "cfl"),
    ("time", "window", 3, "window"),
    ("init", "radius", 1.5, "unit disc"),
    ("tolerance", "scale", 0.0, "positive"),
])
def test_validate_scalar_constraints(section, field, value, msg):
    cfg = _valid_base()
    bad = replace(cfg, **{section: replace(getattr(cfg, section),
                                           **{field: value})})
    with pytest.raises(ConfigError, match=msg):
        config.validate(bad)


def test_validate_slice_values_sorted_and_in_range():
    cfg = _valid_base()
    bad = replace(cfg, slices=replace(cfg.slices, s_values=(3.0, 2.5)))
    with pytest.raises(ConfigError, match="ascending"):
        config.validate(bad)
    beyond = replace(cfg, slices=replace(cfg.slices, s_values=(2.5, 99.0)))
    with pytest.raises(ConfigError, match="s_max"):
        config.validate(beyond)


def test_with_overrides():
    cfg = RunConfig()
    out = config.with_overrides(cfg, seed=7, tolerance_scale=2.5)
    assert out.probes.seed == 7
    assert out.tolerance.scale == 2.5
    # untouched fields unchanged, original not mutated
    assert out.grid == cfg.grid
    assert cfg.probes.seed == 1234
    assert config.with_overrides(cfg) == cfg


def test_shipped_configs_validate(configs_dir):
    for path in sorted(configs_dir.glob("*.cfg")):
        cfg = config.load(path)
        config.validate(cfg)
        # every shipped file round-trips through the canonical form
        assert config.parse(config.emit(cfg)) == cfg
