"""Characteristic hyperbolas and the damped transport estimate along them.

The radial curves r(t) solving dx/dt = 2t x / (t^2 + |x|^2) foliate the
interior of the light cone; along each one the weighted time derivative
U = sqrt(t) sqrt(t-r) d_t u satisfies the damped transport equation

    dU/dtau + P U = W,
    P = (t - r)(2t + 3r) / (2t (t^2 + r^2)),
    W = sqrt(t) sqrt(t-r) t^2 (box u + sum_a dbar_a dbar_a u) / (t^2 + r^2),

which integrates to a pointwise decay estimate: the sharp s^{-1} rate for
d_t u with constant controlled by data on one hyperboloid plus the damped
forcing history.

Each curve conserves C0 = (t^2 - r^2)/r, so s^2 = C0 r(t) along it: s is
strictly increasing in t, which makes entry-time location by bisection
well posed, and r(t) = sqrt(t^2 + C0^2/4) - C0/2 is closed form.  Anchors
inside the cone always have C0 > 2 (r < t - 1 forces it), so every curve
also crosses the cone shell t = r + 1 exactly once, at r = 1/(C0 - 2).
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np
from scipy.integrate import cumulative_simpson, simpson

from .bundles import DerivBundle
from .sampling import ProbeSet, WindowView

SQRT_HALF = np.sqrt(0.5)


# ---------------------------------------------------------------------------
# pointwise weights
# ---------------------------------------------------------------------------

def density_weight(t, r):
    """p(t, r) = (1 + 3r/2t)(t - r)/t^2, the undivided damping density."""
    t = np.asarray(t, dtype=float)
    return (1.0 + 1.5 * r / t) * (t - r) / t**2


def density_weight_family(t, r, alpha=0.5, beta=0.5, n=2):
    """The (n, alpha, beta) damping-density family in n spatial dimensions.

    p_{n,a,b} = ((n - a) - (a + 1)(r/t)^2 - b (t - r)/t) / t.  It stays
    nonnegative on 0 <= r < t exactly when a <= (n - 1)/2 and b <= n - a;
    ``density_weight`` is the (2, 1/2, 1/2) member.
    """
    t = np.asarray(t, dtype=float)
    r = np.asarray(r, dtype=float)
    q = r / t
    return ((n - alpha) - (alpha + 1.0) * q * q - beta * (t - r) / t) / t


def transport_damping(t, r):
    """P = t^2 p / (t^2 + r^2), the damping rate along the curves."""
    t = np.asarray(t, dtype=float)
    return (t - r) * (2.0 * t + 3.0 * r) / (2.0 * t * (t**2 + r**2))


def damping_floor(t, r):
    """Lower envelope (1/4)(s/t)^2 / t; transport_damping stays above it."""
    t = np.asarray(t, dtype=float)
    return 0.25 * (t**2 - np.asarray(r) ** 2) / t**3


def transport_weight(t, r):
    """w = sqrt(t) sqrt(t - r), the weight turning d_t u into U."""
    t = np.asarray(t, dtype=float)
    return np.sqrt(t * (t - np.asarray(r)))


# ---------------------------------------------------------------------------
# the curves
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class HyperbolaCurve:
    """One radial integral curve, pinned down by its anchor point.

    ``degenerate`` marks anchors within ``axis_tol`` of the spatial
    origin, where C0 diverges; such curves are treated as the vertical
    axis line (fixed position, s = t), the exact limit of the family.
    """

    t_anchor: float
    x1_anchor: float
    x2_anchor: float
    C0: float
    dir1: float
    dir2: float
    degenerate: bool = False

    @classmethod
    def through(cls, t: float, x1: float, x2: float,
                axis_tol: float = 0.0) -> "HyperbolaCurve":
        r0 = float(np.hypot(x1, x2))
        if not r0 < t - 1.0:
            raise ValueError(
                f"anchor (t={t}, r={r0}) is not interior to the cone shell")
        if r0 <= axis_tol:
            return cls(t_anchor=float(t), x1_anchor=float(x1),
                       x2_anchor=float(x2), C0=np.inf, dir1=0.0, dir2=0.0,
                       degenerate=True)
        return cls(t_anchor=float(t), x1_anchor=float(x1),
                   x2_anchor=float(x2), C0=(t * t - r0 * r0) / r0,
                   dir1=x1 / r0, dir2=x2 / r0)

    # -- closed-form kinematics ------------------------------------------

    def radius(self, t):
        if self.degenerate:
            return np.zeros_like(np.asarray(t, dtype=float))
        t = np.asarray(t, dtype=float)
        half = 0.5 * self.C0
        return np.sqrt(t * t + half * half) - half

    def position(self, t):
        if self.degenerate:
            t = np.asarray(t, dtype=float)
            return (np.full_like(t, self.x1_anchor),
                    np.full_like(t, self.x2_anchor))
        r = self.radius(t)
        return self.dir1 * r, self.dir2 * r

    def velocity(self, t):
        """dx/dt; matches the field 2t x/(t^2 + r^2) evaluated on the curve."""
        if self.degenerate:
            t = np.asarray(t, dtype=float)
            return np.zeros_like(t), np.zeros_like(t)
        t = np.asarray(t, dtype=float)
        half = 0.5 * self.C0
        dr = t / np.sqrt(t * t + half * half)
        return self.dir1 * dr, self.dir2 * dr

    def s_of(self, t):
        """s along the curve via the conserved product s^2 = C0 r(t),
        which cannot lose digits the way t^2 - r^2 does far out."""
        t = np.asarray(t, dtype=float)
        if self.degenerate:
            return t.copy()
        half = 0.5 * self.C0
        # C0 r = C0 t^2 / (sqrt(t^2 + C0^2/4) + C0/2), stable for huge C0
        return np.sqrt(self.C0 * t * t / (np.sqrt(t * t + half * half) + half))

    def cone_excess(self, t):
        """t - r(t) - 1: positive inside the shell, zero at the crossing."""
        t = np.asarray(t, dtype=float)
        return t - self.radius(t) - 1.0


def backtrace_entry(curve: HyperbolaCurve, s0: float,
                    tol: float = 1e-10) -> tuple[float, str]:
    """Follow the curve backward from its anchor to where it leaves the
    truncated region: the hyperboloid H_{s0} or the cone shell t = r + 1,
    whichever comes first.  Returns (entry time, "hyperboloid" | "cone").

    Both s(t) - s0 and the cone excess are strictly increasing in t, so
    each boundary is located by bisection to absolute tolerance ``tol``;
    the later of the two crossing times is the entry.
    """
    if s0 <= 0:
        raise ValueError("s0 must be positive")
    t_hi = curve.t_anchor
    if curve.s_of(t_hi) <= s0:
        raise ValueError(
            f"anchor lies at s = {float(curve.s_of(t_hi))!r} <= s0 = {s0}; "
            "nothing to trace")

    def bisect(f) -> float | None:
        a, b = s0 * 1e-3, t_hi  # f < 0 somewhere below, f(t_hi) > 0
        if f(a) >= 0:
            a *= 1e-6
            if f(a) >= 0:
                return None
        while b - a > tol:
            m = 0.5 * (a + b)
            if f(m) > 0:
                b = m
            else:
                a = m
        return 0.5 * (a + b)

    t_slice = bisect(lambda t: curve.s_of(t) - s0)
    if curve.degenerate:
        return float(t_slice), "hyperboloid"
    t_cone = bisect(curve.cone_excess)
    if t_cone is not None and t_cone > t_slice:
        return float(t_cone), "cone"
    return float(t_slice), "hyperboloid"


def curve_ode_crosscheck(curve: HyperbolaCurve, t_lo: float,
                         n_steps: int = 400) -> float:
    """RK4-integrate the defining field dx/dt = 2t x/(t^2+|x|^2) from the
    anchor backward to t_lo and report the worst position error against
    the closed form.  Degenerate curves are fixed points of the field."""
    ts = np.linspace(curve.t_anchor, t_lo, n_steps + 1)
    x = np.array([curve.x1_anchor, curve.x2_anchor])

    def f(t, x):
        return 2.0 * t * x / (t * t + x[0] ** 2 + x[1] ** 2)

    worst = 0.0
    for k in range(n_steps):
        t, dt = ts[k], ts[k + 1] - ts[k]
        k1 = f(t, x)
        k2 = f(t + 0.5 * dt, x + 0.5 * dt * k1)
        k3 = f(t + 0.5 * dt, x + 0.5 * dt * k2)
        k4 = f(t + dt, x + dt * k3)
        x = x + (dt / 6.0) * (k1 + 2 * k2 + 2 * k3 + k4)
        p1, p2 = curve.position(ts[k + 1])
        worst = max(worst, float(np.hypot(x[0] - p1, x[1] - p2)))
    return worst


# ---------------------------------------------------------------------------
# transport samples along a curve
# ---------------------------------------------------------------------------

@dataclass
class TransportSample:
    """Field history along one curve, ready for the damped transport sums.

    Arrays run from the entry time up to the anchor.  ``W`` is the full
    forcing S^w + Delta^w assembled from the numerical second derivatives,
    so the integrated identity holds up to discretization error only.
    """

    curve: HyperbolaCurve
    entry_type: str
    tau: np.ndarray
    U: np.ndarray
    P: np.ndarray
    W: np.ndarray
    s: np.ndarray
    dt_u: np.ndarray

    def damping_integral(self) -> float:
        return float(simpson(self.P, x=self.tau))

    def forcing_integral(self) -> float:
        """int W(tau) exp(-int_tau^end P) dtau over the whole history."""
        ahead = self._damping_ahead()
        return float(simpson(self.W * np.exp(-ahead), x=self.tau))

    def forcing_integral_abs(self) -> float:
        ahead = self._damping_ahead()
        return float(simpson(np.abs(self.W) * np.exp(-ahead), x=self.tau))

    def _damping_ahead(self) -> np.ndarray:
        cum = cumulative_simpson(self.P, x=self.tau, initial=0.0)
        return cum[-1] - cum

    def predicted_end(self) -> float:
        return float(self.U[0] * np.exp(-self.damping_integral())
                     + self.forcing_integral())

    def identity_residual(self) -> float:
        """U(anchor) minus the integrated transport solution; zero up to
        discretization (and tau-quadrature) error."""
        return float(self.U[-1] - self.predicted_end())


def transport_terms(curve: HyperbolaCurve, entry_type: str,
                    bundle: DerivBundle) -> TransportSample:
    """Assemble U, P, W along the curve from an order-2 bundle sampled on
    it (bundle point i at time tau_i on the curve)."""
    if bundle.order < 2:
        raise ValueError("transport forcing needs second derivatives")
    tau = bundle.t
    r = curve.radius(tau)
    pos_err = np.hypot(bundle.x1 - curve.position(tau)[0],
                       bundle.x2 - curve.position(tau)[1])
    if np.any(pos_err > 1e-8 * np.maximum(1.0, np.abs(tau))):
        raise ValueError("bundle points do not lie on the curve")
    w = transport_weight(tau, r)
    pref = w * tau**2 / (tau**2 + r**2)
    dt_u = bundle.d1[0]
    return TransportSample(
        curve=curve, entry_type=entry_type, tau=tau,
        U=w * dt_u,
        P=transport_damping(tau, r),
        W=pref * (bundle.box() + bundle.dbar_dbar_sum()),
        s=curve.s_of(tau),
        dt_u=dt_u)


def sharp_margin(sample: TransportSample, sup_sdtu_entry: float) -> dict:
    """The pointwise sharp-decay inequality at the anchor of one curve:

        (sqrt2/2) |s d_t u| <= [entry control] + |int W exp(-int P)|

    where the entry control is sup_{H_{s0}} s0 |d_t u| for hyperboloid
    entries and zero for cone entries (the solution's true support stays
    strictly inside the shell, so U vanishes there up to grid smear).
    """
    lhs = SQRT_HALF * abs(float(sample.s[-1] * sample.dt_u[-1]))
    entry_control = sup_sdtu_entry if sample.entry_type == "hyperboloid" else 0.0
    rhs = entry_control + abs(sample.forcing_integral())
    return {
        "t": float(sample.tau[-1]),
        "x1": float(sample.curve.x1_anchor),
        "x2": float(sample.curve.x2_anchor),
        "s": float(sample.s[-1]),
        "lhs": lhs,
        "rhs": rhs,
        "margin": rhs - lhs,
        "entry_type": sample.entry_type,
    }


# ---------------------------------------------------------------------------
# streaming collection during a forward run
# ---------------------------------------------------------------------------

class CurveSet:
    """Observer gathering order-2 bundles along a family of curves.

    Each anchor is backtraced to its entry (hyperboloid s = s0 or cone),
    a tau ladder is laid along the curve at roughly ``spacing`` steps of
    the run's dt, and all ladders are collected in one probe cloud during
    the forward pass.  ``samples()`` then hands back one TransportSample
    per curve.
    """

    max_order = 2

    def __init__(self, field: str, anchors, s0: float, dt: float,
                 spacing: float = 4.0, axis_tol: float = 0.0):
        self.field = field
        self.s0 = float(s0)
        self.curves: list[HyperbolaCurve] = []
        self.entry_types: list[str] = []
        self._slices: list[slice] = []
        ts, xs, ys = [], [], []
        start = 0
        for (t_a, x1_a, x2_a) in anchors:
            curve = HyperbolaCurve.through(t_a, x1_a, x2_a, axis_tol=axis_tol)
            t_e, kind = backtrace_entry(curve, s0)
            n = int(np.ceil((t_a - t_e) / (spacing * dt)))
            n = max(5, n + (n + 1) % 2)  # odd count for Simpson
            tau = np.linspace(t_e, t_a, n)
            p1, p2 = curve.position(tau)
            self.curves.append(curve)
            self.entry_types.append(kind)
            self._slices.append(slice(start, start + n))
            start += n
            ts.append(tau)
            xs.append(p1)
            ys.append(p2)
        self._probe = ProbeSet([field], np.concatenate(ts),
                               np.concatenate(xs), np.concatenate(ys), order=2)

    def on_band(self, view: WindowView, j: int) -> None:
        self._probe.on_band(view, j)

    def finalize(self, view: WindowView) -> None:
        self._probe.finalize(view)

    def samples(self) -> list[TransportSample]:
        big = self._probe.results()[self.field]
        out = []
        for curve, kind, sl in zip(self.curves, self.entry_types, self._slices):
            sub = DerivBundle(t=big.t[sl], x1=big.x1[sl], x2=big.x2[sl],
                              value=big.value[sl], d1=big.d1[..., sl],
                              d2=big.d2[..., sl])
            out.append(transport_terms(curve, kind, sub))
        return out
