"""Assemble solver objects from a validated RunConfig.

Keeps the mapping from config text to concrete systems, data profiles,
grids and drivers in one place so the command-line layer and the test
suite construct byte-identical runs from the same file.
"""

from __future__ import annotations

import numpy as np

from .config import T0, ConfigError, RunConfig, validate
from .grid import Grid2D, GridRun, InitialData, RadialField, ZeroField, split_bumps
from .slices import slice_top_time
from .systems import (
    ModelCoefficients,
    ModelSystem,
    ScalarZakharovSystem,
    ZakharovSystem,
)


def build_system(cfg: RunConfig):
    if cfg.system == "model":
        m = cfg.model
        coeffs = ModelCoefficients(
            A1=np.reshape(m.a1, (3, 3)), A3=np.reshape(m.a3, (3, 3)),
            A5=np.reshape(m.a5, (3, 3)), B2=np.reshape(m.b2, (3, 3)),
            A4=np.asarray(m.a4), B3=np.asarray(m.b3), K2c=m.k2c, c=m.mass,
        )
        return ModelSystem(coeffs)
    if cfg.system == "zakharov":
        return ZakharovSystem()
    if cfg.system == "zakharov-scalar":
        return ScalarZakharovSystem(np.reshape(cfg.zakharov.pform, (3, 3)))
    raise ConfigError(f"unknown system {cfg.system!r}")


def _wave_pair(profile: str, eps: float, radius: float):
    """Position/velocity profiles for the massless field."""
    if profile == "zero" or eps == 0.0:
        return ZeroField(), ZeroField()
    if profile == "bump":
        return (RadialField(amp=eps, radius=radius, kind="bump"),
                RadialField(amp=-0.5 * eps, radius=radius, kind="ring"))
    if profile == "ring":
        return (RadialField(amp=eps, radius=radius, kind="ring"),
                RadialField(amp=0.6 * eps, radius=0.8 * radius, kind="bump"))
    if profile == "split":
        scale = radius / 0.9
        return split_bumps(eps, radius=0.45 * scale, offset=0.5 * scale), ZeroField()
    raise ConfigError(f"unknown profile {profile!r}")


def _kg_pair(profile: str, eps: float, radius: float):
    """Position/velocity profiles for the massive field."""
    if profile == "zero" or eps == 0.0:
        return ZeroField(), ZeroField()
    if profile == "bump":
        return RadialField(amp=0.8 * eps, radius=0.7 * radius, kind="bump"), ZeroField()
    if profile == "ring":
        return RadialField(amp=0.5 * eps, radius=0.6 * radius, kind="ring"), ZeroField()
    if profile == "split":
        return (RadialField(amp=0.7 * eps, radius=0.5 * radius, kind="bump",
                            center=(0.15, -0.1)), ZeroField())
    raise ConfigError(f"unknown profile {profile!r}")


def build_initial_data(cfg: RunConfig) -> InitialData:
    eps, radius, profile = cfg.init.amplitude, cfg.init.radius, cfg.init.profile
    if cfg.system in ("model", "zakharov-scalar"):
        fields = {
            "u": _wave_pair(profile, eps, radius),
            "v": _kg_pair(profile, eps, radius),
        }
    else:
        e2 = (ZeroField(), ZeroField()) if profile == "zero" or eps == 0.0 else (
            RadialField(amp=0.8 * eps, radius=0.55 * radius, kind="bump",
                        center=(0.2, 0.0)),
            ZeroField(),
        )
        fields = {
            "u": _wave_pair(profile, eps, radius),
            "e1": _kg_pair(profile, eps, radius),
            "e2": e2,
        }
    data = InitialData(fields=fields)
    if data.support_radius() >= 1.0:
        raise ConfigError(
            f"initial data support radius {data.support_radius():.3f} reaches the "
            "unit disc boundary; shrink init.radius")
    return data


def horizon_time(cfg: RunConfig) -> float:
    """Coordinate time the run must reach to cover its targets."""
    if cfg.time.t_max is not None:
        t_end = cfg.time.t_max
    else:
        t_end = slice_top_time(cfg.time.s_max, cfg.grid.h)
    for s in cfg.slices.s_values:
        t_end = max(t_end, slice_top_time(s, cfg.grid.h))
    for t in cfg.snapshots.t_values:
        t_end = max(t_end, t)
    return t_end


def build_grid(cfg: RunConfig) -> Grid2D:
    if cfg.grid.extent == "auto":
        return Grid2D.for_horizon(horizon_time(cfg), cfg.grid.h, t0=T0)
    half = int(np.ceil(float(cfg.grid.extent) / cfg.grid.h))
    return Grid2D(h=cfg.grid.h, n=2 * half + 1)


def build_run(cfg: RunConfig) -> tuple[GridRun, float]:
    """Validated config -> started-but-not-stepped driver and its horizon."""
    cfg = validate(cfg)
    system = build_system(cfg)
    grid = build_grid(cfg)
    run = GridRun(system, grid, cfl=cfg.time.cfl, window=cfg.time.window, t0=T0)
    run.start(build_initial_data(cfg))
    return run, horizon_time(cfg)


def probe_rng(cfg: RunConfig) -> np.random.Generator:
    return np.random.default_rng(cfg.probes.seed)
