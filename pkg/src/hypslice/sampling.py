"""Sampling field windows in time bands: derivative bundles without history.

A band is the interval [t_j, t_{j+1}) between consecutive levels.  Once
the driver has completed level j+3, every centered stencil reaching into
the band is available, so points with t* in the band can be evaluated —
value and derivatives in all spacetime directions — and then forgotten.

Spatial derivatives come from centered differences on each level (up to
third order, 13-point footprint); the time direction uses Lagrange
interpolation through 4 consecutive levels (6 for third-order bundles),
differentiated at t*.  Both are second-order accurate; near t0, where a
full centered stencil does not exist yet, the level set is clamped and
the one-sided weights lose one order (only the first band or two).
"""

from __future__ import annotations

from dataclasses import dataclass
from functools import lru_cache
from typing import TYPE_CHECKING, Callable, Mapping, Sequence

import numpy as np

from .bundles import DerivBundle

if TYPE_CHECKING:
    from .grid import Grid2D


@lru_cache(maxsize=None)
def _basis_coeffs(npts: int, m: int) -> np.ndarray:
    """Coefficients (highest power first) of the m-th derivative of each
    Lagrange basis polynomial on nodes 0..npts-1, shape (npts, npts-m)."""
    rows = []
    for i in range(npts):
        poly = np.poly1d([1.0])
        for jn in range(npts):
            if jn != i:
                poly *= np.poly1d([1.0, -jn]) / (i - jn)
        rows.append(np.polyder(poly, m).coeffs if m < npts else np.zeros(1))
    width = max(len(r) for r in rows)
    return np.array([np.pad(r, (width - len(r), 0)) for r in rows])


def time_weights(npts: int, m: int, xi: np.ndarray) -> np.ndarray:
    """Weights (npts, len(xi)) so that sum_i w[i] f(node_i) = d^m f/dxi^m at xi."""
    coeffs = _basis_coeffs(npts, m)
    xi = np.asarray(xi, dtype=float)
    powers = xi[None, :] ** np.arange(coeffs.shape[1] - 1, -1, -1)[:, None]
    return coeffs @ powers


# spatial finite-difference stencils: symbol -> ((dy, dx, coeff), ...), order p
_SPATIAL = {
    "v":   (((0, 0, 1.0),), 0),
    "x":   (((0, 1, 0.5), (0, -1, -0.5)), 1),
    "y":   (((1, 0, 0.5), (-1, 0, -0.5)), 1),
    "xx":  (((0, 1, 1.0), (0, 0, -2.0), (0, -1, 1.0)), 2),
    "yy":  (((1, 0, 1.0), (0, 0, -2.0), (-1, 0, 1.0)), 2),
    "xy":  (((1, 1, 0.25), (1, -1, -0.25), (-1, 1, -0.25), (-1, -1, 0.25)), 2),
    "xxx": (((0, 2, 0.5), (0, 1, -1.0), (0, -1, 1.0), (0, -2, -0.5)), 3),
    "yyy": (((2, 0, 0.5), (1, 0, -1.0), (-1, 0, 1.0), (-2, 0, -0.5)), 3),
    "xxy": (((1, 1, 0.5), (1, 0, -1.0), (1, -1, 0.5),
             (-1, 1, -0.5), (-1, 0, 1.0), (-1, -1, -0.5)), 3),
    "xyy": (((1, 1, 0.5), (-1, 1, 0.5), (0, 1, -1.0),
             (1, -1, -0.5), (-1, -1, -0.5), (0, -1, 1.0)), 3),
}

_SYMS_BY_ORDER = {
    1: ("v", "x", "y"),
    2: ("v", "x", "y", "xx", "xy", "yy"),
    3: ("v", "x", "y", "xx", "xy", "yy", "xxx", "xxy", "xyy", "yyy"),
}

# bundle slots: (time-derivative count, spatial symbol)
_D1_SLOTS = ((1, "v"), (0, "x"), (0, "y"))
_D2_SLOTS = {(0, 0): (2, "v"), (0, 1): (1, "x"), (0, 2): (1, "y"),
             (1, 1): (0, "xx"), (1, 2): (0, "xy"), (2, 2): (0, "yy")}
_D3_SLOTS = {(0, 0, 0): (3, "v"), (0, 0, 1): (2, "x"), (0, 0, 2): (2, "y"),
             (0, 1, 1): (1, "xx"), (0, 1, 2): (1, "xy"), (0, 2, 2): (1, "yy"),
             (1, 1, 1): (0, "xxx"), (1, 1, 2): (0, "xxy"),
             (1, 2, 2): (0, "xyy"), (2, 2, 2): (0, "yyy")}


@dataclass(frozen=True)
class WindowView:
    """Read-only façade over the driver's rolling level window."""

    grid: "Grid2D"
    t0: float
    dt: float
    offset: int
    buf: Mapping[str, list]
    newest: int

    def time_of(self, k: int) -> float:
        return self.t0 + k * self.dt

    def arr(self, name: str, k: int) -> np.ndarray:
        if not (self.offset <= k <= self.newest):
            raise IndexError(
                f"level {k} outside window [{self.offset}, {self.newest}]")
        return self.buf[name][k - self.offset]

    # -- core samplers ----------------------------------------------------

    def _level_set(self, j: int, order: int) -> list[int]:
        span = 6 if order >= 3 else 4
        lo = max(self.offset, j - (2 if order >= 3 else 1))
        hi = min(self.newest, lo + span - 1)
        return list(range(max(self.offset, hi - span + 1), hi + 1))

    def _spatial(self, name: str, levels: Sequence[int], iy, ix, order: int):
        n = self.grid.n
        pad = 2 if order >= 3 else 1
        if iy.size and (iy.min() < pad or iy.max() >= n - pad
                        or ix.min() < pad or ix.max() >= n - pad):
            raise IndexError("sample stencil leaves the grid; widen the domain")
        quants: dict[str, list[np.ndarray]] = {s: [] for s in _SYMS_BY_ORDER[order]}
        ih = 1.0 / self.grid.h
        scale = {0: 1.0, 1: ih, 2: ih * ih, 3: ih**3}
        for k in levels:
            A = self.arr(name, k)
            point_cache: dict[tuple[int, int], np.ndarray] = {}
            for sym in _SYMS_BY_ORDER[order]:
                taps, p = _SPATIAL[sym]
                acc = None
                for dy, dx, c in taps:
                    key = (dy, dx)
                    if key not in point_cache:
                        point_cache[key] = A[iy + dy, ix + dx]
                    term = c * point_cache[key]
                    acc = term if acc is None else acc + term
                quants[sym].append(acc * scale[p])
        return quants

    def _assemble(self, quants, levels, tstar, x1, x2, order: int) -> DerivBundle:
        xi = (np.asarray(tstar) - self.time_of(levels[0])) / self.dt
        npts = len(levels)
        stacked = {s: np.stack(v) for s, v in quants.items()}

        def tcomb(sym: str, m: int) -> np.ndarray:
            w = time_weights(npts, m, xi)
            return np.einsum("ln,ln->n", w, stacked[sym]) / self.dt**m

        npt = xi.shape[0]
        value = tcomb("v", 0)
        d1 = np.stack([tcomb(s, m) for m, s in _D1_SLOTS])
        d2 = d3 = None
        if order >= 2:
            d2 = np.empty((3, 3, npt))
            for (a, b), (m, s) in _D2_SLOTS.items():
                d2[a, b] = d2[b, a] = tcomb(s, m)
        if order >= 3:
            d3 = np.empty((3, 3, 3, npt))
            for (a, b, c), (m, s) in _D3_SLOTS.items():
                val = tcomb(s, m)
                for p in {(a, b, c), (a, c, b), (b, a, c), (b, c, a),
                          (c, a, b), (c, b, a)}:
                    d3[p] = val
        return DerivBundle(t=np.asarray(tstar, dtype=float),
                           x1=np.asarray(x1, dtype=float),
                           x2=np.asarray(x2, dtype=float),
                           value=value, d1=d1, d2=d2, d3=d3)

    def bundle_nodes(self, name: str, j: int, iy: np.ndarray, ix: np.ndarray,
                     tstar: np.ndarray, order: int = 1) -> DerivBundle:
        """Derivative bundle at grid nodes (iy, ix) and times tstar in band j."""
        levels = self._level_set(j, order)
        quants = self._spatial(name, levels, iy, ix, order)
        x1 = self.grid.x0 + ix * self.grid.h
        x2 = self.grid.x0 + iy * self.grid.h
        return self._assemble(quants, levels, tstar, x1, x2, order)

    def bundle_points(self, name: str, j: int, x1: np.ndarray, x2: np.ndarray,
                      tstar: np.ndarray, order: int = 1) -> DerivBundle:
        """Bundle at arbitrary points: bilinear blend of the 4 corner nodes."""
        x1 = np.asarray(x1, dtype=float)
        x2 = np.asarray(x2, dtype=float)
        g = self.grid
        fx = (x1 - g.x0) / g.h
        fy = (x2 - g.x0) / g.h
        ix0 = np.floor(fx).astype(np.int64)
        iy0 = np.floor(fy).astype(np.int64)
        fx -= ix0
        fy -= iy0
        levels = self._level_set(j, order)
        acc: dict[str, list] = {}
        for cy in (0, 1):
            for cx in (0, 1):
                wgt = (fy if cy else 1 - fy) * (fx if cx else 1 - fx)
                q = self._spatial(name, levels, iy0 + cy, ix0 + cx, order)
                for s, vals in q.items():
                    dst = acc.setdefault(s, [np.zeros_like(v) for v in vals])
                    for li, v in enumerate(vals):
                        dst[li] += wgt * v
        return self._assemble(acc, levels, tstar, x1, x2, order)


# ---------------------------------------------------------------------------
# node enumeration for hyperboloid slabs
# ---------------------------------------------------------------------------

def _ragged(starts: np.ndarray, stops: np.ndarray):
    """Concatenate integer ranges [starts_i, stops_i); returns (row_id, value)."""
    lens = np.maximum(stops - starts, 0)
    total = int(lens.sum())
    if total == 0:
        empty = np.empty(0, dtype=np.int64)
        return empty, empty
    rows = np.repeat(np.arange(starts.size, dtype=np.int64), lens)
    base = np.repeat(np.cumsum(lens) - lens, lens)
    flat = np.arange(total, dtype=np.int64) - base + np.repeat(starts, lens)
    return rows, flat


def annulus_nodes(grid: "Grid2D", r_lo: float, r_hi: float):
    """Node indices with r_lo <= |x| < r_hi, as (iy, ix); no node storage
    beyond the returned arrays, deterministic enumeration order."""
    if r_hi <= r_lo or r_hi <= 0:
        e = np.empty(0, dtype=np.int64)
        return e, e
    h, x0, n = grid.h, grid.x0, grid.n
    iy_lo = max(0, int(np.ceil((-r_hi - x0) / h - 1e-12)) + 0)
    iy_hi = min(n - 1, int(np.floor((r_hi - x0) / h + 1e-12)))
    if iy_hi < iy_lo:
        e = np.empty(0, dtype=np.int64)
        return e, e
    iy = np.arange(iy_lo, iy_hi + 1, dtype=np.int64)
    y = x0 + iy * h
    b2 = r_hi**2 - y**2
    a2 = r_lo**2 - y**2
    b = np.sqrt(np.maximum(b2, 0.0))
    a = np.sqrt(np.maximum(a2, 0.0))
    # x in (-b, -a] or [a, b); when a == 0 the two merge into (-b, b)
    lo_right = np.ceil((a - x0) / h - 1e-12).astype(np.int64)
    hi_right = np.ceil((b - x0) / h - 1e-12).astype(np.int64)       # exclusive
    lo_left = (np.floor((-b - x0) / h + 1e-12) + 1).astype(np.int64)
    hi_left = (np.floor((-a - x0) / h + 1e-12) + 1).astype(np.int64)  # exclusive
    merged = a2 <= 0.0
    # rows fully inside r_lo collapse to the single range (-b, b); drop the
    # left family there and widen the right one to start just above -b
    start_merged = (np.floor((-b - x0) / h + 1e-12) + 1).astype(np.int64)
    hi_left = np.where(merged, 0, hi_left)
    lo_left = np.where(merged, 0, lo_left)
    lo_right = np.where(merged, start_merged, lo_right)
    rows_r, ix_r = _ragged(lo_right, hi_right)
    rows_l, ix_l = _ragged(lo_left, hi_left)
    iy_out = np.concatenate([iy[rows_r], iy[rows_l]])
    ix_out = np.concatenate([ix_r, ix_l])
    keep = (ix_out >= 0) & (ix_out < n)
    return iy_out[keep], ix_out[keep]


# ---------------------------------------------------------------------------
# generic observers
# ---------------------------------------------------------------------------

class ProbeSet:
    """Collects derivative bundles at a fixed cloud of spacetime points.

    Points are processed in band order during the forward pass; results()
    returns one concatenated DerivBundle in the original point order.
    """

    def __init__(self, fields: Sequence[str], t: np.ndarray, x1: np.ndarray,
                 x2: np.ndarray, order: int = 1):
        self.fields = tuple(fields)
        self.t = np.asarray(t, dtype=float)
        self.x1 = np.asarray(x1, dtype=float)
        self.x2 = np.asarray(x2, dtype=float)
        self.order = self.max_order = order
        self._parts: dict[str, list] = {f: [] for f in self.fields}
        self._idx_parts: list[np.ndarray] = []
        self._done = False

    def band_of(self, view: WindowView, j: int) -> np.ndarray:
        lo = view.time_of(j)
        hi = view.time_of(j + 1)
        return np.nonzero((self.t >= lo) & (self.t < hi))[0]

    def on_band(self, view: WindowView, j: int) -> None:
        sel = self.band_of(view, j)
        if sel.size == 0:
            return
        self._idx_parts.append(sel)
        for f in self.fields:
            self._parts[f].append(view.bundle_points(
                f, j, self.x1[sel], self.x2[sel], self.t[sel], self.order))

    def finalize(self, view: WindowView) -> None:
        self._done = True

    def results(self) -> dict[str, DerivBundle]:
        idx = np.concatenate(self._idx_parts) if self._idx_parts else np.empty(0, np.int64)
        if idx.size != self.t.size:
            missing = np.setdiff1d(np.arange(self.t.size), idx)
            raise RuntimeError(
                f"{missing.size} probe points were never covered by a band "
                f"(first at t = {self.t[missing[0]]!r}); extend the run horizon")
        order = np.argsort(idx, kind="stable")
        out = {}
        for f in self.fields:
            parts = self._parts[f]
            cat = {
                "t": np.concatenate([p.t for p in parts])[order],
                "x1": np.concatenate([p.x1 for p in parts])[order],
                "x2": np.concatenate([p.x2 for p in parts])[order],
                "value": np.concatenate([p.value for p in parts])[order],
                "d1": np.concatenate([p.d1 for p in parts], axis=-1)[..., order],
            }
            d2 = d3 = None
            if self.order >= 2:
                d2 = np.concatenate([p.d2 for p in parts], axis=-1)[..., order]
            if self.order >= 3:
                d3 = np.concatenate([p.d3 for p in parts], axis=-1)[..., order]
            out[f] = DerivBundle(d2=d2, d3=d3, **cat)
        return out


class LevelHook:
    """Runs a callback at the level nearest each requested time.

    Distinct requested times landing on the same level fire once.  The
    callback receives (view, k, t_k) with levels k-1 .. k+1 guaranteed
    present, so centered time derivatives of whole grids are available.
    """

    max_order = 1

    def __init__(self, times: Sequence[float], callback: Callable):
        self.times = np.asarray(sorted(times), dtype=float)
        self.callback = callback
        self._levels: np.ndarray | None = None
        self._fired: set[int] = set()

    def on_band(self, view: WindowView, j: int) -> None:
        if self._levels is None:
            lv = np.rint((self.times - view.t0) / view.dt).astype(np.int64)
            self._levels = np.unique(np.maximum(lv, 1))
        if j in self._levels and j not in self._fired:
            self._fired.add(int(j))
            self.callback(view, j, view.time_of(j))

    def finalize(self, view: WindowView) -> None:
        if self._levels is None:
            return
        missed = [int(k) for k in self._levels if int(k) not in self._fired]
        if missed:
            raise RuntimeError(
                f"{len(missed)} level hooks never fired (first at level {missed[0]}, "
                f"t = {view.time_of(missed[0])!r}); extend the run horizon")
