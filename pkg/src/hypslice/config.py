"""Run configuration: flat ``key = value`` files with dotted section names.

The format is deliberately primitive so that any implementation language can
parse it with a dozen lines of string handling: one assignment per line,
``#`` comments, section encoded as a dotted prefix (``grid.h = 0.03125``),
arrays as bracketed comma lists (``model.a4 = [0.0, 0.1, 0.0]``).  A config
round-trips exactly: ``parse(emit(cfg)) == cfg``.
"""

from __future__ import annotations

import hashlib
from dataclasses import dataclass, field, fields as _dc_fields, replace
from pathlib import Path

import numpy as np

from .nullforms import check_null


class ConfigError(ValueError):
    """A config file could not be parsed, or failed physical validation."""


SYSTEMS = ("model", "zakharov", "zakharov-scalar")
PROFILES = ("bump", "ring", "split", "zero")

#: Initial slice; data live on {t = T0} inside the unit disc.
T0 = 2.0


@dataclass(frozen=True)
class GridSection:
    h: float = 1.0 / 32
    #: "auto" sizes the box from the forward light cone of the data support;
    #: a number forces the half-width in space units.
    extent: float | str = "auto"


@dataclass(frozen=True)
class TimeSection:
    cfl: float = 0.8
    #: Exactly one of s_max / t_max must be set: evolve until the hyperboloid
    #: s = s_max is fully buried in the computed region, or until coordinate
    #: time t_max.
    s_max: float | None = None
    t_max: float | None = None
    #: Rolling-window depth (time levels held in memory).
    window: int = 6


@dataclass(frozen=True)
class InitSection:
    profile: str = "bump"
    amplitude: float = 0.01
    radius: float = 0.9


@dataclass(frozen=True)
class ModelSection:
    """Coefficient arrays for the model wave/Klein-Gordon system.

    Quadratic forms are flat 9-element row-major arrays over (t, x1, x2);
    vectors are 3-element arrays.  Defaults are all zero (linear system).
    """

    a1: tuple[float, ...] = (0.0,) * 9
    a3: tuple[float, ...] = (0.0,) * 9
    a5: tuple[float, ...] = (0.0,) * 9
    b2: tuple[float, ...] = (0.0,) * 9
    a4: tuple[float, ...] = (0.0,) * 3
    b3: tuple[float, ...] = (0.0,) * 3
    k2c: float = 0.0
    mass: float = 1.0


@dataclass(frozen=True)
class ZakharovSection:
    #: Quadratic form P for the scalar variant's v * P:ddu coupling.
    pform: tuple[float, ...] = (0.0,) * 9


@dataclass(frozen=True)
class SliceSection:
    s_values: tuple[float, ...] = ()


@dataclass(frozen=True)
class SnapshotSection:
    t_values: tuple[float, ...] = ()


@dataclass(frozen=True)
class ProbeSection:
    seed: int = 1234
    count: int = 40


@dataclass(frozen=True)
class ToleranceSection:
    scale: float = 1.0


@dataclass(frozen=True)
class RunConfig:
    system: str = "model"
    grid: GridSection = field(default_factory=GridSection)
    time: TimeSection = field(default_factory=TimeSection)
    init: InitSection = field(default_factory=InitSection)
    model: ModelSection = field(default_factory=ModelSection)
    zakharov: ZakharovSection = field(default_factory=ZakharovSection)
    slices: SliceSection = field(default_factory=SliceSection)
    snapshots: SnapshotSection = field(default_factory=SnapshotSection)
    probes: ProbeSection = field(default_factory=ProbeSection)
    tolerance: ToleranceSection = field(default_factory=ToleranceSection)


_SECTIONS = {
    "grid": GridSection,
    "time": TimeSection,
    "init": InitSection,
    "model": ModelSection,
    "zakharov": ZakharovSection,
    "slices": SliceSection,
    "snapshots": SnapshotSection,
    "probes": ProbeSection,
    "tolerance": ToleranceSection,
}


def _format_value(v) -> str:
    if isinstance(v, tuple):
        return "[" + ", ".join(repr(float(x)) for x in v) + "]"
    if isinstance(v, float):
        return repr(v)
    if v is None:
        return "none"
    return str(v)


def _parse_scalar(text: str, kind, key: str):
    text = text.strip()
    if kind == "float_or_none":
        if text.lower() == "none":
            return None
        try:
            return float(text)
        except ValueError:
            raise ConfigError(f"{key}: expected a number or 'none', got {text!r}")
    if kind == "float_or_auto":
        if text.lower() == "auto":
            return "auto"
        try:
            return float(text)
        except ValueError:
            raise ConfigError(f"{key}: expected a number or 'auto', got {text!r}")
    if kind is float:
        try:
            return float(text)
        except ValueError:
            raise ConfigError(f"{key}: expected a number, got {text!r}")
    if kind is int:
        try:
            return int(text)
        except ValueError:
            raise ConfigError(f"{key}: expected an integer, got {text!r}")
    if kind is str:
        return text
    raise AssertionError(kind)


def _field_kind(section: str, name: str):
    """Map a dataclass field to the scalar/array kind its text form uses."""
    if section == "grid" and name == "extent":
        return "float_or_auto"
    if section == "time" and name in ("s_max", "t_max"):
        return "float_or_none"
    cls = _SECTIONS[section]
    for f in _dc_fields(cls):
        if f.name == name:
            default = getattr(cls(), name)
            if isinstance(default, tuple):
                return tuple
            return type(default)
    raise ConfigError(f"unknown key: {section}.{name}")


def emit(cfg: RunConfig) -> str:
    """Serialize a config to its canonical text form (stable key order)."""
    lines = [f"system = {cfg.system}"]
    for sec_name, sec_cls in _SECTIONS.items():
        sec = getattr(cfg, sec_name)
        for f in _dc_fields(sec_cls):
            lines.append(f"{sec_name}.{f.name} = {_format_value(getattr(sec, f.name))}")
    return "\n".join(lines) + "\n"


def parse(text: str) -> RunConfig:
    """Parse config text.  Unknown keys and malformed lines raise ConfigError."""
    values: dict[str, dict[str, object]] = {name: {} for name in _SECTIONS}
    system = None
    for lineno, raw in enumerate(text.splitlines(), start=1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        if "=" not in line:
            raise ConfigError(f"line {lineno}: expected 'key = value', got {raw!r}")
        key, _, val = line.partition("=")
        key = key.strip()
        val = val.strip()
        if key == "system":
            system = val
            continue
        if "." not in key:
            raise ConfigError(f"line {lineno}: unknown key {key!r}")
        sec, _, name = key.partition(".")
        if sec not in _SECTIONS:
            raise ConfigError(f"line {lineno}: unknown section {sec!r}")
        kind = _field_kind(sec, name)
        if kind is tuple:
            if not (val.startswith("[") and val.endswith("]")):
                raise ConfigError(f"{key}: expected a bracketed array, got {val!r}")
            body = val[1:-1].strip()
            parts = [p for p in (x.strip() for x in body.split(",")) if p]
            try:
                values[sec][name] = tuple(float(p) for p in parts)
            except ValueError:
                raise ConfigError(f"{key}: array element is not a number in {val!r}")
        else:
            values[sec][name] = _parse_scalar(val, kind, key)

    sections = {}
    for sec_name, sec_cls in _SECTIONS.items():
        try:
            sections[sec_name] = sec_cls(**values[sec_name])
        except TypeError as e:
            raise ConfigError(f"section {sec_name}: {e}")
    cfg = RunConfig(system=system if system is not None else "model", **sections)
    return cfg


def load(path: str | Path) -> RunConfig:
    p = Path(path)
    if not p.exists():
        raise ConfigError(f"config file not found: {p}")
    return parse(p.read_text())


def config_hash(cfg: RunConfig) -> str:
    """Hex digest identifying the physics content of a config.

    Computed over the canonical emission, so key order and float formatting
    in the source file do not matter.
    """
    return hashlib.sha256(emit(cfg).encode()).hexdigest()[:16]


def _require(cond: bool, msg: str) -> None:
    if not cond:
        raise ConfigError(msg)


def validate(cfg: RunConfig) -> RunConfig:
    """Check physical constraints; returns the config unchanged on success.

    Everything that could make a run silently meaningless is rejected here,
    before any compute: bad CFL, data leaking out of the unit disc, non-null
    coefficients in the slots the quadratic-form structure requires to be
    null, array shapes, slice values outside the evolved range.
    """
    _require(cfg.system in SYSTEMS, f"system: must be one of {SYSTEMS}, got {cfg.system!r}")
    _require(cfg.grid.h > 0, "grid.h: must be positive")
    if isinstance(cfg.grid.extent, float):
        _require(cfg.grid.extent > 1.0, "grid.extent: must exceed the unit data disc")
    _require(0 < cfg.time.cfl <= 0.95, "time.cfl: must lie in (0, 0.95]")
    _require(
        (cfg.time.s_max is None) != (cfg.time.t_max is None),
        "time: set exactly one of s_max / t_max",
    )
    if cfg.time.s_max is not None:
        _require(cfg.time.s_max > T0, f"time.s_max: must exceed {T0}")
    if cfg.time.t_max is not None:
        _require(cfg.time.t_max > T0, f"time.t_max: must exceed {T0}")
    _require(cfg.time.window >= 4, "time.window: need at least 4 stored levels")
    _require(cfg.init.profile in PROFILES, f"init.profile: must be one of {PROFILES}")
    _require(cfg.init.amplitude >= 0, "init.amplitude: must be nonnegative")
    _require(0 < cfg.init.radius < 1, "init.radius: data must sit inside the unit disc")

    for name in ("a1", "a3", "a5", "b2"):
        _require(len(getattr(cfg.model, name)) == 9, f"model.{name}: expected 9 entries")
    for name in ("a4", "b3"):
        _require(len(getattr(cfg.model, name)) == 3, f"model.{name}: expected 3 entries")
    _require(len(cfg.zakharov.pform) == 9, "zakharov.pform: expected 9 entries")
    _require(cfg.model.mass > 0, "model.mass: must be positive")

    # The structure of the quadratic interactions requires A1, A3, A5 to be
    # null forms; reject configs that violate it rather than running them.
    for name in ("a1", "a3", "a5"):
        arr = np.asarray(getattr(cfg.model, name), dtype=float).reshape(3, 3)
        chk = check_null(arr)
        _require(
            chk.is_null,
            f"model.{name}: must be a null form; A(xi,xi)={chk.worst_value:.3e} "
            f"on the null circle at angle {chk.worst_theta:.4f}",
        )

    svals = cfg.slices.s_values
    _require(all(s >= T0 for s in svals), f"slices.s_values: all values must be >= {T0}")
    _require(list(svals) == sorted(svals), "slices.s_values: must be ascending")
    if cfg.time.s_max is not None:
        _require(
            all(s <= cfg.time.s_max for s in svals),
            "slices.s_values: beyond time.s_max",
        )
    _require(cfg.probes.seed >= 0, "probes.seed: must be a nonnegative integer")
    _require(cfg.probes.count > 0, "probes.count: must be positive")
    _require(cfg.tolerance.scale > 0, "tolerance.scale: must be positive")
    return cfg


def with_overrides(
    cfg: RunConfig,
    *,
    seed: int | None = None,
    tolerance_scale: float | None = None,
) -> RunConfig:
    """Apply command-line overrides that shadow config-file values."""
    if seed is not None:
        cfg = replace(cfg, probes=replace(cfg.probes, seed=seed))
    if tolerance_scale is not None:
        cfg = replace(cfg, tolerance=replace(cfg.tolerance, scale=tolerance_scale))
    return cfg
