"""Energies and estimates on hyperboloid slices.

The slice ladder is a streaming observer: at each band it enumerates the
annulus of grid nodes whose slice time t = sqrt(s^2 + r^2) falls inside
the band, samples derivative bundles there, and accumulates quadrature
sums (h^2 per node — exact trapezoid weights for compactly supported
integrands).  Nothing is stored per node.

A slice H_s inside the cone {r < t - 1} carries nodes up to
r_cap = (s^2 - b^2) / (2 b) with b = 1 - 5h: the solver smears supports
by a few cells, and near the cone the slice runs almost parallel to it,
so the cap is derived from the smeared support bound t - r > b rather
than from a fixed radial margin.

Energy densities are accumulated in three algebraically equal forms

  (a)  |d_t u|^2 + sum_a |d_a u|^2 + 2 (x^a/t) d_t u d_a u + c^2 u^2
  (b)  sum_a |db_a u|^2 + |(s/t) d_t u|^2 + c^2 u^2
  (c)  |db_perp u|^2 + sum_a |(s/t) d_a u|^2 + |t^{-1} rot u|^2 + c^2 u^2

whose mutual gap is a roundoff-level consistency check, plus the
conformal energy built on K u = s^2 (s/t) d_t u + 2 s x^a db_a u.
"""

from __future__ import annotations

import numpy as np
from scipy.integrate import cumulative_trapezoid

from . import bundles as bnd
from .sampling import WindowView, annulus_nodes

KS_WORDS = bnd.words_upto(2, 2)


def cap_radius(s: float, h: float) -> float:
    """Largest slice radius kept, from the smeared support bound t - r > 1 - 5h."""
    b = 1.0 - 5.0 * h
    if s <= b:
        return 0.0
    return (s * s - b * b) / (2.0 * b)


def slice_top_time(s: float, h: float) -> float:
    """Time at which the truncated slice ends (its outermost kept node)."""
    return float(np.hypot(s, cap_radius(s, h)))


def energy_densities(b: bnd.DerivBundle, s: float, c: float) -> dict[str, np.ndarray]:
    """The three standard-energy forms and the conformal density at slice points."""
    t, x1, x2 = b.t, b.x1, b.x2
    u = b.value
    dt, d1, d2 = b.d1[0], b.d1[1], b.d1[2]
    st = s / t
    db1 = b.dbar(1)
    db2 = b.dbar(2)
    cross = 2.0 * (x1 / t) * dt * d1 + 2.0 * (x2 / t) * dt * d2
    mass = c * c * u * u
    ea = dt * dt + d1 * d1 + d2 * d2 + cross + mass
    eb = db1 * db1 + db2 * db2 + (st * dt) ** 2 + mass
    dperp = b.dperp()
    rot = b.rotation()
    ec = dperp * dperp + st * st * (d1 * d1 + d2 * d2) + (rot / t) ** 2 + mass
    ku = s * s * st * dt + 2.0 * s * (x1 * db1 + x2 * db2)
    e2 = s * s * (db1 * db1 + db2 * db2) + (ku + s * u) ** 2 / (s * s)
    return {"ea": ea, "eb": eb, "ec": ec, "e2": e2,
            "l2u": (st * u) ** 2, "ku": ku}


class SliceLadder:
    """Streaming accumulator of slice integrals for a ladder of s values.

    want may contain: "energy" (all three standard forms), "conformal",
    "l2u" (the (s/t)-weighted value norm), "rhs" (L2 of each field's
    d'Alembertian source), "ks2" (the 22 boost/partial words through
    total order two), "sup" (running sup of t|u| and of (s/t)-weighted
    gradients, for pointwise-decay constants).
    """

    def __init__(self, system, s_values, want=("energy", "conformal", "l2u", "rhs"),
                 fields=None):
        self.system = system
        self.s_values = tuple(float(s) for s in s_values)
        if sorted(set(self.s_values)) != sorted(self.s_values):
            raise ValueError("slice ladder values must be distinct")
        self.want = frozenset(want)
        self.fields = tuple(fields) if fields is not None else tuple(system.fields)
        order = 1
        if "ks2" in self.want:
            order = 2
        if "rhs" in self.want:
            order = max(order, system.bundle_order_needed())
        self.max_order = order
        self._sums: dict[tuple, float] = {}
        self._sups: dict[tuple, float] = {}
        self._done_r: dict[float, float] = {s: 0.0 for s in self.s_values}
        self._complete: set[float] = set()
        self._h: float | None = None

    # -- accumulation -----------------------------------------------------

    def _add(self, key, val):
        self._sums[key] = self._sums.get(key, 0.0) + float(val)

    def _sup(self, key, val):
        cur = self._sups.get(key, 0.0)
        if val > cur:
            self._sups[key] = float(val)

    def on_band(self, view: WindowView, j: int) -> None:
        self._h = view.grid.h
        t_lo = view.time_of(j)
        t_hi = view.time_of(j + 1)
        for s in self.s_values:
            if s in self._complete or t_hi <= s:
                continue
            r_cap = cap_radius(s, view.grid.h)
            r_lo = np.sqrt(max(t_lo * t_lo - s * s, 0.0))
            r_hi = np.sqrt(max(t_hi * t_hi - s * s, 0.0))
            if r_lo >= r_cap:
                self._complete.add(s)
                continue
            r_hi = min(r_hi, r_cap)
            iy, ix = annulus_nodes(view.grid, r_lo, r_hi)
            self._done_r[s] = r_hi
            if r_hi >= r_cap:
                self._complete.add(s)
            if iy.size == 0:
                continue
            self._accumulate(view, j, s, iy, ix)

    def _accumulate(self, view, j, s, iy, ix):
        g = view.grid
        x1 = g.x0 + ix * g.h
        x2 = g.x0 + iy * g.h
        tstar = np.hypot(s, np.hypot(x1, x2))
        w = g.h * g.h
        bb = {f: view.bundle_nodes(f, j, iy, ix, tstar, self.max_order)
              for f in self.fields}
        rhs = self.system.rhs_from_bundles(bb) if "rhs" in self.want else None
        for f in self.fields:
            b = bb[f]
            c = self.system.mass(f)
            dens = energy_densities(b, s, c)
            if "energy" in self.want:
                for form in ("ea", "eb", "ec"):
                    self._add((s, f, form), w * dens[form].sum())
            if "conformal" in self.want:
                self._add((s, f, "e2"), w * dens["e2"].sum())
            if "l2u" in self.want:
                self._add((s, f, "l2u"), w * dens["l2u"].sum())
            if rhs is not None:
                self._add((s, f, "rhs2"), w * np.square(rhs[f]).sum())
            if "ks2" in self.want:
                for wi, (I, J) in enumerate(KS_WORDS):
                    vals = b.word(I, J)
                    self._add((s, f, f"ks{wi}"), w * np.square(vals).sum())
            if "sup" in self.want:
                self._sup((s, f, "sup_tu"), np.max(b.t * np.abs(b.value)))
                self._sup((s, f, "sup_sdtu"), np.max(s * np.abs(b.d1[0])))
                grad = np.max(np.abs(b.d1), axis=0)
                self._sup((s, f, "sup_wgrad"),
                          np.max(np.sqrt(b.t) * np.sqrt(np.abs(b.t - np.hypot(b.x1, b.x2))) * grad))

    def finalize(self, view: WindowView) -> None:
        missing = [s for s in self.s_values if s not in self._complete]
        if missing:
            raise RuntimeError(
                "slices not fully swept (run horizon too short); "
                f"first incomplete s = {missing[0]} "
                f"(reached r = {self._done_r[missing[0]]:.3f} of "
                f"{cap_radius(missing[0], self._h or 0.0):.3f})")

    # -- results ----------------------------------------------------------

    def value(self, s: float, field: str, quant: str) -> float:
        if quant.startswith("sup"):
            return self._sups.get((s, field, quant), 0.0)
        return self._sums.get((s, field, quant), 0.0)

    def series(self, field: str, quant: str) -> np.ndarray:
        return np.array([self.value(s, field, quant) for s in self.s_values])

    def energy(self, field: str, form: str = "eb") -> np.ndarray:
        return self.series(field, form)

    def ks_sum(self, field: str) -> np.ndarray:
        """sum over words of the L2 norms (not the norm of the sum)."""
        out = np.zeros(len(self.s_values))
        for wi in range(len(KS_WORDS)):
            out += np.sqrt(self.series(field, f"ks{wi}"))
        return out

    def energy_gap(self, field: str) -> float:
        """Largest relative disagreement between the three energy forms."""
        gaps = []
        for s in self.s_values:
            vals = [self.value(s, field, f) for f in ("ea", "eb", "ec")]
            ref = max(abs(v) for v in vals) or 1.0
            gaps.append((max(vals) - min(vals)) / ref)
        return float(max(gaps))


# ---------------------------------------------------------------------------
# ladder-level inequality checks
# ---------------------------------------------------------------------------

def _cumtrap(y: np.ndarray, x: np.ndarray) -> np.ndarray:
    return cumulative_trapezoid(y, x, initial=0.0)


def energy_bound_margins(s: np.ndarray, energy: np.ndarray,
                         rhs_l2: np.ndarray) -> np.ndarray:
    """E(s)^{1/2} - E(s_0)^{1/2} - int_{s_0}^s ||F|| dtau; <= 0 up to solver error."""
    s = np.asarray(s, dtype=float)
    lhs = np.sqrt(np.asarray(energy))
    return lhs - (lhs[0] + _cumtrap(np.sqrt(np.asarray(rhs_l2)), s))


def conformal_bound_margins(s: np.ndarray, e2: np.ndarray,
                            rhs_l2: np.ndarray) -> np.ndarray:
    """E2(s)^{1/2} - E2(s_0)^{1/2} - int s ||box u|| ds; <= 0 up to solver error."""
    s = np.asarray(s, dtype=float)
    lhs = np.sqrt(np.asarray(e2))
    return lhs - (lhs[0] + _cumtrap(s * np.sqrt(np.asarray(rhs_l2)), s))


def weighted_value_constant(s: np.ndarray, l2u: np.ndarray, e2: np.ndarray) -> float:
    """Smallest C with ||(s/t)u||(s) <= ||(s/t)u||(s_0) + C int s^{-1} E2^{1/2} ds."""
    s = np.asarray(s, dtype=float)
    lhs = np.sqrt(np.asarray(l2u))
    integ = _cumtrap(np.sqrt(np.asarray(e2)) / s, s)
    with np.errstate(divide="ignore", invalid="ignore"):
        ratio = np.where(integ > 0, (lhs - lhs[0]) / np.where(integ > 0, integ, 1.0), 0.0)
    return float(np.max(ratio))


def f2_functional(s: np.ndarray, l2u: np.ndarray, e2: np.ndarray) -> np.ndarray:
    """F(s_0; s) = ||(s/t)u||(s_0) + E2(s)^{1/2} + int_{s_0}^s tau^{-1} E2^{1/2} dtau."""
    s = np.asarray(s, dtype=float)
    e2h = np.sqrt(np.asarray(e2))
    return np.sqrt(l2u[0]) + e2h + _cumtrap(e2h / s, s)


def ks_constants(sup_tu: np.ndarray, ks_sums: np.ndarray) -> np.ndarray:
    """Implied constants sup_x t|u| / sum_words ||Z u||_{L2} per slice."""
    with np.errstate(divide="ignore", invalid="ignore"):
        return np.where(ks_sums > 0, sup_tu / np.where(ks_sums > 0, ks_sums, 1.0), 0.0)


# ---------------------------------------------------------------------------
# pointwise estimate checks on bundles
# ---------------------------------------------------------------------------

def eq_interp_residual(b: bnd.DerivBundle) -> np.ndarray:
    """Residual of the algebraic control of (s/t)^2 s d_t u by the conformal
    multiplier: zero up to roundoff for any sampled bundle."""
    t, x1, x2 = b.t, b.x1, b.x2
    s = np.sqrt(t * t - x1 * x1 - x2 * x2)
    st = s / t
    u = b.value
    ku = s * s * st * b.d1[0] + 2.0 * s * (x1 * b.dbar(1) + x2 * b.dbar(2))
    lhs = st * st * s * b.d1[0]
    rhs = (ku + s * u) * st / s - st * u \
        - 2.0 * ((x1 / t) * s * b.dbar(1) + (x2 / t) * s * b.dbar(2))
    return lhs - rhs


def hessian_ratio(b: bnd.DerivBundle, p: int, k: int,
                  box_bundle: bnd.DerivBundle | None = None) -> np.ndarray:
    """Pointwise ratio of (s/t)^2 |dd u|_{p,k} to |box u|_{p,k} + t^{-1}|du|_{p+1,k+1}."""
    t, x1, x2 = b.t, b.x1, b.x2
    st2 = (t * t - x1 * x1 - x2 * x2) / (t * t)
    lhs = st2 * bnd.hessian_family(b, p, k)
    rhs = bnd.gradient_family(b, p + 1, k + 1) / t
    if box_bundle is not None:
        rhs = rhs + bnd.pointwise_family(box_bundle, p, k)
    with np.errstate(divide="ignore", invalid="ignore"):
        return np.where(rhs > 0, lhs / np.where(rhs > 0, rhs, 1.0), 0.0)


def fast_kg_ratio(b: bnd.DerivBundle, c: float, p: int, k: int,
                  src_bundle: bnd.DerivBundle | None = None) -> np.ndarray:
    """Pointwise ratio of c^2 |v|_{p,k} to (s/t)^2 |dv|_{p+1,k+1} + |f|_{p,k}."""
    t, x1, x2 = b.t, b.x1, b.x2
    st2 = (t * t - x1 * x1 - x2 * x2) / (t * t)
    lhs = c * c * bnd.pointwise_family(b, p, k)
    rhs = st2 * bnd.gradient_family(b, p + 1, k + 1)
    if src_bundle is not None:
        rhs = rhs + bnd.pointwise_family(src_bundle, p, k)
    with np.errstate(divide="ignore", invalid="ignore"):
        return np.where(rhs > 0, lhs / np.where(rhs > 0, rhs, 1.0), 0.0)
