"""Uniform-grid leapfrog driver with a rolling level window.

The driver never stores field history beyond a short window of time
levels (default 6).  Observers are fed one *band* per step: after the
newest completed level is M, the time interval [t_{M-3}, t_{M-2}) is
final in the sense that every level a centered interpolation stencil in
that interval can touch (M-5 .. M) is present in the window.  Slice,
probe and curve sampling all happen band-by-band during the single
forward pass.

Levels are indexed globally (level k sits at t = t0 + k dt); the window
start shifts as old buffers are recycled into new output levels.
"""

from __future__ import annotations

import hashlib
from dataclasses import dataclass, field
from typing import Callable, Mapping, Sequence

import numpy as np

from . import kernels
from .systems import InitArrays, StepBuffers

SUPPORT_MARGIN_CELLS = 5.0


class BlowupError(RuntimeError):
    """A field exceeded the hard amplitude cap; the run is not trustworthy."""


class SupportError(RuntimeError):
    """Fields leaked outside the light cone by more than the smear allowance."""


@dataclass(frozen=True)
class Grid2D:
    """Square node-centered grid, origin at the central node."""

    h: float
    n: int

    def __post_init__(self):
        if self.n % 2 != 1:
            raise ValueError("grid size must be odd so the origin is a node")

    @property
    def extent(self) -> float:
        return 0.5 * (self.n - 1) * self.h

    @property
    def x0(self) -> float:
        return -self.extent

    @classmethod
    def for_horizon(cls, t_end: float, h: float, t0: float = 2.0) -> "Grid2D":
        """Grid wide enough that the cone from the unit disc stays 5 cells
        clear of the boundary until t_end (plus 5 extra cells of slack)."""
        extent = 1.0 + (t_end - t0) + 10.0 * h
        half = int(np.ceil(extent / h))
        return cls(h=h, n=2 * half + 1)

    def coords(self) -> np.ndarray:
        return self.x0 + self.h * np.arange(self.n)

    def meshgrid(self) -> tuple[np.ndarray, np.ndarray]:
        c = self.coords()
        return np.meshgrid(c, c, indexing="xy")  # X varies along axis 1

    def alloc(self) -> np.ndarray:
        return np.zeros((self.n, self.n))


# ---------------------------------------------------------------------------
# initial data profiles
# ---------------------------------------------------------------------------

def _bump_kernel(rho: np.ndarray):
    """C-infinity bump exp(1 - 1/(1-rho^2)) on rho<1; returns (p, p', p'')."""
    rho = np.asarray(rho, dtype=float)
    inside = rho**2 < 1.0 - 1e-14
    w = np.where(inside, 1.0 / np.where(inside, 1.0 - rho**2, 1.0), 0.0)
    p = np.where(inside, np.exp(1.0 - w), 0.0)
    dp = -2.0 * rho * w**2 * p
    d2p = (-2.0 * w**2 - 8.0 * rho**2 * w**3 + 4.0 * rho**2 * w**4) * p
    return p, dp, d2p


def _ring_kernel(rho: np.ndarray):
    """rho^2 * bump: vanishes at the center, peaks on an annulus."""
    p, dp, d2p = _bump_kernel(rho)
    q = rho**2 * p
    dq = 2.0 * rho * p + rho**2 * dp
    d2q = 2.0 * p + 4.0 * rho * dp + rho**2 * d2p
    return q, dq, d2q


_KERNELS = {"bump": _bump_kernel, "ring": _ring_kernel}


@dataclass(frozen=True)
class RadialField:
    """amp * kernel(|x - center| / radius), compactly supported."""

    amp: float = 1.0
    radius: float = 0.9
    kind: str = "bump"
    center: tuple[float, float] = (0.0, 0.0)

    def __post_init__(self):
        if self.kind not in _KERNELS:
            raise ValueError(f"unknown profile kind {self.kind!r}")
        if self.radius <= 0:
            raise ValueError("profile radius must be positive")

    def _polar(self, X, Y):
        dx = X - self.center[0]
        dy = Y - self.center[1]
        r = np.hypot(dx, dy)
        return dx, dy, r

    def val(self, X, Y):
        _, _, r = self._polar(X, Y)
        p, _, _ = _KERNELS[self.kind](r / self.radius)
        return self.amp * p

    def derivs(self, X, Y):
        """(val, dx, dy, dxx, dxy, dyy) arrays; lap = dxx + dyy."""
        dx_, dy_, r = self._polar(X, Y)
        R = self.radius
        p, dp, d2p = _KERNELS[self.kind](r / R)
        small = r < 1e-12 * R
        rsafe = np.where(small, 1.0, r)
        # p'(rho)/rho -> p''(0) as rho -> 0
        dp_over_r = np.where(small, d2p / R, dp / rsafe) / R
        gx = self.amp * dp_over_r * dx_
        gy = self.amp * dp_over_r * dy_
        nx = dx_ / rsafe
        ny = dy_ / rsafe
        hxx = self.amp * np.where(small, d2p / R**2, d2p / R**2 * nx**2 + dp_over_r * (1 - nx**2))
        hyy = self.amp * np.where(small, d2p / R**2, d2p / R**2 * ny**2 + dp_over_r * (1 - ny**2))
        hxy = self.amp * np.where(small, 0.0, (d2p / R**2 - dp_over_r) * nx * ny)
        return self.amp * p, gx, gy, hxx, hxy, hyy


@dataclass(frozen=True)
class SumField:
    """Pointwise sum of component profiles (e.g. two displaced bumps)."""

    parts: tuple

    def val(self, X, Y):
        out = np.zeros(np.broadcast(X, Y).shape)
        for p in self.parts:
            out = out + p.val(X, Y)
        return out

    def derivs(self, X, Y):
        acc = None
        for p in self.parts:
            d = p.derivs(X, Y)
            acc = d if acc is None else tuple(a + b for a, b in zip(acc, d))
        return acc


@dataclass(frozen=True)
class ZeroField:
    def val(self, X, Y):
        return np.zeros(np.broadcast(X, Y).shape)

    def derivs(self, X, Y):
        z = np.zeros(np.broadcast(X, Y).shape)
        return (z,) * 6


def split_bumps(amp: float, radius: float = 0.45, offset: float = 0.5) -> SumField:
    """Two unequal displaced bumps; deliberately not rotation-symmetric."""
    return SumField(parts=(
        RadialField(amp=amp, radius=radius, center=(offset, 0.0)),
        RadialField(amp=0.6 * amp, radius=radius, center=(-offset, 0.1)),
    ))


@dataclass(frozen=True)
class InitialData:
    """Per-field (position, velocity) profiles, all supported in the unit disc."""

    fields: Mapping[str, tuple]

    def sample(self, grid: Grid2D) -> dict[str, InitArrays]:
        X, Y = grid.meshgrid()
        out = {}
        for name, (pos, vel) in self.fields.items():
            v, gx, gy, hxx, hxy, hyy = pos.derivs(X, Y)
            w, wx, wy, _, _, _ = vel.derivs(X, Y)
            out[name] = InitArrays(val=v, vel=w, dx=gx, dy=gy, lap=hxx + hyy,
                                   dxx=hxx, dxy=hxy, dyy=hyy, vel_dx=wx, vel_dy=wy)
        return out

    def support_radius(self) -> float:
        r = 0.0
        for pos, vel in self.fields.values():
            for f in (pos, vel):
                parts = f.parts if isinstance(f, SumField) else (f,)
                for p in parts:
                    if isinstance(p, RadialField):
                        r = max(r, np.hypot(*p.center) + p.radius)
        return r


# ---------------------------------------------------------------------------
# the run driver
# ---------------------------------------------------------------------------

class GridRun:
    """Leapfrog evolution of one system with streaming observers."""

    def __init__(self, system, grid: Grid2D, cfl: float = 0.8, window: int = 6,
                 t0: float = 2.0, forcing: Mapping[str, Callable] | None = None,
                 blowup_cap: float = 1e6, support_tol: float = 1e-10):
        if not (0 < cfl <= 0.9):
            raise ValueError("cfl must lie in (0, 0.9]")
        if window < 4:
            raise ValueError("window must hold at least 4 levels")
        self.system = system
        self.grid = grid
        self.window = window
        self.t0 = t0
        self.dt = cfl * grid.h / np.sqrt(2.0)
        self.forcing = dict(forcing) if forcing else {}
        self.blowup_cap = blowup_cap
        self.support_tol = support_tol
        self.buf: dict[str, list[np.ndarray]] = {f: [] for f in system.fields}
        self.offset = 0          # global index of buf[...][0]
        self.level = -1          # newest completed global level
        self.pred: dict[str, np.ndarray] | None = None
        self._mesh: tuple[np.ndarray, np.ndarray] | None = None
        self._started = False

    def time_of(self, k: int) -> float:
        return self.t0 + k * self.dt

    def start(self, init: InitialData) -> None:
        """Fill levels 0 and 1 (Taylor expansion through d_t d_t at t0)."""
        if self._started:
            raise RuntimeError("run already started")
        arrays = init.sample(self.grid)
        accel = self.system.accel(arrays)
        dt = self.dt
        for name in self.system.fields:
            a = arrays[name]
            self.buf[name].append(a.val.copy())
            lvl1 = a.val + dt * a.vel + 0.5 * dt**2 * accel[name]
            if self.forcing and name in self.forcing:
                lvl1 += 0.5 * dt**2 * self._force_one(name, self.t0)
            self.buf[name].append(lvl1)
        if getattr(self.system, "needs_predictor", False):
            self.pred = {f: self.grid.alloc() for f in self.system.fields}
        self.level = 1
        self._started = True

    def _force_one(self, name: str, t: float) -> np.ndarray:
        if self._mesh is None:
            self._mesh = self.grid.meshgrid()
        X, Y = self._mesh
        return np.asarray(self.forcing[name](t, X, Y), dtype=float)

    def _forcing_arrays(self, t: float):
        if not self.forcing:
            return None
        return {f: self._force_one(f, t) for f in self.forcing}

    def step(self) -> float:
        """Advance one level; returns max |field| on the new level."""
        m = self.level
        out = {}
        recycle = len(self.buf[self.system.fields[0]]) == self.window
        for f in self.system.fields:
            out[f] = self.buf[f].pop(0) if recycle else self.grid.alloc()
        if recycle:
            self.offset += 1
        cur = {f: self.buf[f][-1] for f in self.system.fields}
        old = {f: self.buf[f][-2] for f in self.system.fields}
        older = {f: (self.buf[f][-3] if len(self.buf[f]) >= 3 else old[f])
                 for f in self.system.fields}
        h = self.grid.h
        st = StepBuffers(out=out, cur=cur, old=old, older=older,
                         pred=self.pred if self.pred is not None else out,
                         dt=self.dt, dt2=self.dt**2, ih2=1.0 / h**2, i2h=0.5 / h,
                         forcing=self._forcing_arrays(self.time_of(m)))
        mode = 0 if m == 1 else 1
        mx = self.system.advance(st, mode)
        for f in self.system.fields:
            self.buf[f].append(out[f])
        self.level = m + 1
        if not np.isfinite(mx) or mx > self.blowup_cap:
            raise BlowupError(
                f"|field| reached {mx:.3g} at t = {self.time_of(self.level):.4f}")
        return mx

    def check_support(self) -> None:
        """Assert fields vanish outside the smeared forward light cone."""
        t = self.time_of(self.level)
        r_cone = 1.0 + (t - self.t0) + SUPPORT_MARGIN_CELLS * self.grid.h
        if r_cone >= self.grid.extent:
            raise SupportError(
                f"cone radius {r_cone:.3f} reached grid extent {self.grid.extent:.3f}")
        big = (2.0 * self.grid.extent) ** 2
        for f in self.system.fields:
            leak = kernels.masked_abs_max(self.buf[f][-1], self.grid.x0, self.grid.h,
                                          r_cone**2, big)
            if leak > self.support_tol:
                raise SupportError(
                    f"field {f!r} has |value| = {leak:.3g} outside r = {r_cone:.3f} "
                    f"at t = {t:.4f}")

    def view(self) -> "WindowView":
        from .sampling import WindowView

        return WindowView(grid=self.grid, t0=self.t0, dt=self.dt,
                          offset=self.offset, buf=self.buf, newest=self.level)

    def run_to(self, t_stop: float, observers: Sequence = (),
               check_every: int = 200) -> None:
        """Step until every band up to t_stop has been handed to observers."""
        if not self._started:
            raise RuntimeError("call start() first")
        for obs in observers:
            need = getattr(obs, "max_order", 2)
            if need >= 3 and self.window < 6:
                raise ValueError("third-order sampling needs a window of >= 6 levels")
        last_band = int(np.ceil((t_stop - self.t0) / self.dt)) + 1
        while self.level - 3 < last_band:
            self.step()
            j = self.level - 3
            if j >= 0 and observers:
                v = self.view()
                for obs in observers:
                    obs.on_band(v, j)
            if self.level % check_every == 0:
                self.check_support()
        v = self.view()
        for obs in observers:
            fin = getattr(obs, "finalize", None)
            if fin is not None:
                fin(v)


# ---------------------------------------------------------------------------
# snapshots
# ---------------------------------------------------------------------------

def write_snapshot(path_base: str, grid: Grid2D, t: float, name: str,
                   arr: np.ndarray, config_sha: str | None = None) -> None:
    """Flat float64 binary (C order) plus a `key = value` sidecar header."""
    data = np.ascontiguousarray(arr, dtype="<f8")
    data.tofile(path_base + ".bin")
    lines = [
        f"field = {name}",
        f"t = {float(t)!r}",
        f"nx = {grid.n}",
        f"ny = {grid.n}",
        f"h = {float(grid.h)!r}",
        f"x0 = {float(grid.x0)!r}",
        "dtype = float64-le",
        "layout = C-row-major",
    ]
    if config_sha:
        lines.append(f"config_sha = {config_sha}")
    with open(path_base + ".hdr", "w") as fh:
        fh.write("\n".join(lines) + "\n")


def read_snapshot(path_base: str) -> tuple[dict, np.ndarray]:
    meta = {}
    with open(path_base + ".hdr") as fh:
        for line in fh:
            line = line.strip()
            if not line:
                continue
            key, _, val = line.partition("=")
            meta[key.strip()] = val.strip()
    nx, ny = int(meta["nx"]), int(meta["ny"])
    arr = np.fromfile(path_base + ".bin", dtype="<f8").reshape(ny, nx)
    return meta, arr


def file_sha256(path: str) -> str:
    digest = hashlib.sha256()
    with open(path, "rb") as fh:
        for chunk in iter(lambda: fh.read(1 << 20), b""):
            digest.update(chunk)
    return digest.hexdigest()
