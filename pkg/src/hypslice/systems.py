"""System definitions: coupled wave/Klein-Gordon models and Zakharov variants.

Each system knows its field names, the mass of each field, how to advance
one leapfrog level (dispatching to the fused kernels), how to evaluate its
right-hand sides from sampled derivative bundles (used by slice and curve
observers to reconstruct d'Alembertians without storing any history), and
how to compute initial accelerations for the Taylor start.

The model system is

    box u          = F1 = A1(du,du) + A3(du,dv) + v A4.du + B2(dv,dv) + v B3.dv + K2c v^2
    box v + c^2 v  = F2 = A5(du,du)

with A1, A3, A5 required to satisfy the null condition.  Setting every
coefficient to zero degenerates to the decoupled linear pair, which the
driver detects and steps with the cheaper single-pass kernel.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Mapping

import numpy as np

from . import kernels
from .bundles import DerivBundle
from .nullforms import MINKOWSKI, require_null


@dataclass(frozen=True)
class InitArrays:
    """Grid samples of one field's initial position/velocity profiles at t0."""

    val: np.ndarray
    vel: np.ndarray
    dx: np.ndarray
    dy: np.ndarray
    lap: np.ndarray
    dxx: np.ndarray
    dxy: np.ndarray
    dyy: np.ndarray
    vel_dx: np.ndarray
    vel_dy: np.ndarray


def _as33(a, name: str) -> np.ndarray:
    arr = np.asarray(a, dtype=float).reshape(3, 3)
    if not np.all(np.isfinite(arr)):
        raise ValueError(f"{name} has non-finite entries")
    return arr


def _as3(a, name: str) -> np.ndarray:
    arr = np.asarray(a, dtype=float).reshape(3)
    if not np.all(np.isfinite(arr)):
        raise ValueError(f"{name} has non-finite entries")
    return arr


@dataclass(frozen=True)
class ModelCoefficients:
    """Coefficient set for the model system; validated on construction."""

    A1: np.ndarray = field(default_factory=lambda: np.zeros((3, 3)))
    A3: np.ndarray = field(default_factory=lambda: np.zeros((3, 3)))
    A5: np.ndarray = field(default_factory=lambda: np.zeros((3, 3)))
    B2: np.ndarray = field(default_factory=lambda: np.zeros((3, 3)))
    A4: np.ndarray = field(default_factory=lambda: np.zeros(3))
    B3: np.ndarray = field(default_factory=lambda: np.zeros(3))
    K2c: float = 0.0
    c: float = 1.0

    def __post_init__(self):
        object.__setattr__(self, "A1", _as33(self.A1, "A1"))
        object.__setattr__(self, "A3", _as33(self.A3, "A3"))
        object.__setattr__(self, "A5", _as33(self.A5, "A5"))
        object.__setattr__(self, "B2", _as33(self.B2, "B2"))
        object.__setattr__(self, "A4", _as3(self.A4, "A4"))
        object.__setattr__(self, "B3", _as3(self.B3, "B3"))
        if self.c <= 0:
            raise ValueError(f"Klein-Gordon mass must be positive, got c={self.c}")
        require_null(self.A1, "A1")
        require_null(self.A3, "A3")
        require_null(self.A5, "A5")

    @property
    def is_linear(self) -> bool:
        return (
            not self.A1.any() and not self.A3.any() and not self.A5.any()
            and not self.B2.any() and not self.A4.any() and not self.B3.any()
            and self.K2c == 0.0
        )

    def f1(self, du: np.ndarray, dv: np.ndarray, v: np.ndarray) -> np.ndarray:
        """Wave-equation RHS from stacked gradients du, dv of shape (3, ...)."""
        out = np.einsum("ab,a...,b...->...", self.A1, du, du)
        out += np.einsum("ab,a...,b...->...", self.A3, du, dv)
        out += np.einsum("ab,a...,b...->...", self.B2, dv, dv)
        out += v * np.einsum("a,a...->...", self.A4, du)
        out += v * np.einsum("a,a...->...", self.B3, dv)
        out += self.K2c * v * v
        return out

    def f2(self, du: np.ndarray) -> np.ndarray:
        return np.einsum("ab,a...,b...->...", self.A5, du, du)


class ModelSystem:
    """Driver-facing wrapper around a ModelCoefficients set."""

    def __init__(self, coeffs: ModelCoefficients):
        self.coeffs = coeffs
        self.fields = ("u", "v")

    @property
    def needs_predictor(self) -> bool:
        return not self.coeffs.is_linear

    def mass(self, name: str) -> float:
        return 0.0 if name == "u" else self.coeffs.c

    def bundle_order_needed(self) -> int:
        return 1

    def rhs_from_bundles(self, b: Mapping[str, DerivBundle]) -> dict[str, np.ndarray]:
        cf = self.coeffs
        return {
            "u": cf.f1(b["u"].d1, b["v"].d1, b["v"].value),
            "v": cf.f2(b["u"].d1),
        }

    def accel(self, init: Mapping[str, InitArrays]) -> dict[str, np.ndarray]:
        """Initial d_t d_t of each field from analytic data (Taylor start)."""
        u, v = init["u"], init["v"]
        du = np.stack([u.vel, u.dx, u.dy])
        dv = np.stack([v.vel, v.dx, v.dy])
        cf = self.coeffs
        return {
            "u": u.lap + cf.f1(du, dv, v.val),
            "v": v.lap - cf.c**2 * v.val + cf.f2(du),
        }

    def advance(self, st: StepBuffers, mode: int) -> float:
        """One leapfrog level; returns max |new value| across fields."""
        cf = self.coeffs
        if cf.is_linear:
            mx = 0.0
            for name in self.fields:
                src = None if st.forcing is None else st.forcing.get(name)
                m = kernels.linear_step(
                    st.out[name], st.cur[name], st.old[name],
                    st.out[name] if src is None else src, src is not None,
                    st.dt2, st.ih2, self.mass(name) ** 2)
                mx = max(mx, m)
            return mx
        packed = (np.ravel(cf.A1), np.ravel(cf.A3), np.ravel(cf.A5),
                  np.ravel(cf.B2), cf.A4, cf.B3, cf.K2c, cf.c**2)
        pmode = 0 if mode == 0 else 1
        kernels.model_step(
            st.pred["u"], st.cur["u"], st.old["u"], st.older["u"], st.pred["u"],
            st.pred["v"], st.cur["v"], st.old["v"], st.older["v"], st.pred["v"],
            pmode, st.dt, st.dt2, st.ih2, st.i2h, *packed)
        st.add_forcing(st.pred)
        mx = kernels.model_step(
            st.out["u"], st.cur["u"], st.old["u"], st.older["u"], st.pred["u"],
            st.out["v"], st.cur["v"], st.old["v"], st.older["v"], st.pred["v"],
            2, st.dt, st.dt2, st.ih2, st.i2h, *packed)
        if st.forcing:
            st.add_forcing(st.out)
            mx = max(float(np.max(np.abs(st.out["u"]))),
                     float(np.max(np.abs(st.out["v"]))))
        return mx


class ZakharovSystem:
    """Concrete Klein-Gordon--Zakharov system: box E + E = E lap u, box u = |E|^2."""

    needs_predictor = False

    def __init__(self):
        self.fields = ("u", "e1", "e2")

    def mass(self, name: str) -> float:
        return 0.0 if name == "u" else 1.0

    def bundle_order_needed(self) -> int:
        return 2  # RHS of the E equations involves lap u

    def rhs_from_bundles(self, b: Mapping[str, DerivBundle]) -> dict[str, np.ndarray]:
        bu = b["u"]
        lap_u = bu.d2[1, 1] + bu.d2[2, 2]
        return {
            "u": b["e1"].value ** 2 + b["e2"].value ** 2,
            "e1": b["e1"].value * lap_u,
            "e2": b["e2"].value * lap_u,
        }

    def accel(self, init: Mapping[str, InitArrays]) -> dict[str, np.ndarray]:
        u, e1, e2 = init["u"], init["e1"], init["e2"]
        return {
            "u": u.lap + e1.val**2 + e2.val**2,
            "e1": e1.lap - e1.val + e1.val * u.lap,
            "e2": e2.lap - e2.val + e2.val * u.lap,
        }

    def advance(self, st: StepBuffers, mode: int) -> float:
        mx = kernels.zakharov_step(
            st.out["u"], st.cur["u"], st.old["u"],
            st.out["e1"], st.cur["e1"], st.old["e1"],
            st.out["e2"], st.cur["e2"], st.old["e2"],
            st.dt2, st.ih2)
        if st.forcing:
            st.add_forcing(st.out)
            mx = max(float(np.max(np.abs(st.out[f]))) for f in self.fields)
        return mx


class ScalarZakharovSystem:
    """Scalar stand-in: box u = v^2, box v + v = v P(dd u)."""

    needs_predictor = True

    def __init__(self, P):
        self.P = _as33(P, "P")
        self.fields = ("u", "v")

    def mass(self, name: str) -> float:
        return 0.0 if name == "u" else 1.0

    def bundle_order_needed(self) -> int:
        return 2

    def rhs_from_bundles(self, b: Mapping[str, DerivBundle]) -> dict[str, np.ndarray]:
        hess = np.einsum("ab,ab...->...", self.P, b["u"].d2)
        return {"u": b["v"].value ** 2, "v": b["v"].value * hess}

    def accel(self, init: Mapping[str, InitArrays]) -> dict[str, np.ndarray]:
        u, v = init["u"], init["v"]
        utt = u.lap + v.val**2
        P = self.P
        hess = (P[0, 0] * utt + (P[0, 1] + P[1, 0]) * u.vel_dx
                + (P[0, 2] + P[2, 0]) * u.vel_dy
                + P[1, 1] * u.dxx + (P[1, 2] + P[2, 1]) * u.dxy + P[2, 2] * u.dyy)
        return {"u": utt, "v": v.lap - v.val + v.val * hess}

    def advance(self, st: StepBuffers, mode: int) -> float:
        pmode = 0 if mode == 0 else 1
        kernels.zakharov_scalar_step(
            st.pred["u"], st.cur["u"], st.old["u"], st.older["u"], st.pred["u"],
            st.pred["v"], st.cur["v"], st.old["v"], st.older["v"], st.pred["v"],
            pmode, st.dt, st.dt2, st.ih2, np.ravel(self.P))
        st.add_forcing(st.pred)
        mx = kernels.zakharov_scalar_step(
            st.out["u"], st.cur["u"], st.old["u"], st.older["u"], st.pred["u"],
            st.out["v"], st.cur["v"], st.old["v"], st.older["v"], st.pred["v"],
            2, st.dt, st.dt2, st.ih2, np.ravel(self.P))
        if st.forcing:
            st.add_forcing(st.out)
            mx = max(float(np.max(np.abs(st.out[f]))) for f in self.fields)
        return mx


@dataclass
class StepBuffers:
    """Level arrays handed to System.advance: out <- f(cur, old[, older, pred]).

    ``forcing`` optionally carries per-field source arrays evaluated at the
    current level's time; dt^2 * forcing is added to the update (predicted
    levels included, so corrector time derivatives see the forced values).
    """

    out: dict
    cur: dict
    old: dict
    older: dict
    pred: dict
    dt: float
    dt2: float
    ih2: float
    i2h: float
    forcing: dict | None = None

    def add_forcing(self, target: dict) -> None:
        if self.forcing:
            for name, arr in self.forcing.items():
                target[name] += self.dt2 * arr


# ---------------------------------------------------------------------------
# derived fields for the transformed-variable estimates
# ---------------------------------------------------------------------------

def kg_shift_bundle(bu: DerivBundle, bv: DerivBundle, coeffs: ModelCoefficients) -> DerivBundle:
    """Bundle of w = v - c^{-2} A5(du, du), one order below bu.

    Removing the A5(du,du) source turns v into a Klein-Gordon field with a
    cubic-strength residual; this builds w's sampled derivatives from the
    chain rule so the residual identity can be tested numerically.
    """
    A = 0.5 * (coeffs.A5 + coeffs.A5.T)
    ic2 = 1.0 / coeffs.c**2
    order = bu.order - 1
    if order < 1 or bv.order < order:
        raise ValueError("need bu.order >= 2 and bv.order >= bu.order - 1")
    q = np.einsum("ab,a...,b...->...", A, bu.d1, bu.d1)
    value = bv.value - ic2 * q
    # d_g q = 2 A(d_g du, du)
    dq = 2.0 * np.einsum("ab,ga...,b...->g...", A, bu.d2, bu.d1)
    d1 = bv.d1 - ic2 * dq
    d2 = None
    if order >= 2:
        d2q = 2.0 * np.einsum("ab,gda...,b...->gd...", A, bu.d3, bu.d1)
        d2q += 2.0 * np.einsum("ab,ga...,db...->gd...", A, bu.d2, bu.d2)
        d2 = bv.d2 - ic2 * d2q
    return DerivBundle(t=bu.t, x1=bu.x1, x2=bu.x2, value=value, d1=d1, d2=d2)


def kg_shift_residual(bu: DerivBundle, bv: DerivBundle, coeffs: ModelCoefficients) -> np.ndarray:
    """Closed-form RHS of (box + c^2) w: the quadratic source drops out.

    box w + c^2 w = -2 c^{-2} A5(du, dF1) - 2 c^{-2} A5^{ab} m^{gd} dd_{ga}u dd_{db}u.
    """
    A = 0.5 * (coeffs.A5 + coeffs.A5.T)
    ic2 = 1.0 / coeffs.c**2
    dF1 = f1_gradient(bu, bv, coeffs)
    cross = np.einsum("ab,a...,b...->...", A, bu.d1, dF1)
    hess = np.einsum("ab,gd,ga...,db...->...", A, MINKOWSKI, bu.d2, bu.d2)
    return -2.0 * ic2 * cross - 2.0 * ic2 * hess


def f1_gradient(bu: DerivBundle, bv: DerivBundle, coeffs: ModelCoefficients) -> np.ndarray:
    """Spacetime gradient of the model wave RHS, shape (3, ...)."""
    cf = coeffs
    du, dv, v = bu.d1, bv.d1, bv.value
    g = 2.0 * np.einsum("ab,ga...,b...->g...", 0.5 * (cf.A1 + cf.A1.T), bu.d2, du)
    g += np.einsum("ab,ga...,b...->g...", cf.A3, bu.d2, dv)
    g += np.einsum("ab,a...,gb...->g...", cf.A3, du, bv.d2)
    g += 2.0 * np.einsum("ab,ga...,b...->g...", 0.5 * (cf.B2 + cf.B2.T), bv.d2, dv)
    g += dv * np.einsum("a,a...->...", cf.A4, du)[None]
    g += v * np.einsum("a,ga...->g...", cf.A4, bu.d2)
    g += dv * np.einsum("a,a...->...", cf.B3, dv)[None]
    g += v * np.einsum("a,ga...->g...", cf.B3, bv.d2)
    g += 2.0 * cf.K2c * v * dv
    return g


def wave_shift_bundle(bu: DerivBundle, coeffs: ModelCoefficients) -> DerivBundle:
    """Bundle of phi = u - (A1bar/2) u^2 with A1bar the light-cone weight of A1."""
    lam = _null_weight(coeffs.A1)
    value = bu.value - 0.5 * lam * bu.value**2
    d1 = bu.d1 * (1.0 - lam * bu.value)
    d2 = None
    if bu.order >= 2:
        d2 = bu.d2 * (1.0 - lam * bu.value) - lam * np.einsum("g...,d...->gd...", bu.d1, bu.d1)
    d3 = None
    if bu.order >= 3:
        d3 = bu.d3 * (1.0 - lam * bu.value)
        d3 = d3 - lam * (
            np.einsum("gd...,e...->gde...", bu.d2, bu.d1)
            + np.einsum("ge...,d...->gde...", bu.d2, bu.d1)
            + np.einsum("de...,g...->gde...", bu.d2, bu.d1)
        )
    return DerivBundle(t=bu.t, x1=bu.x1, x2=bu.x2, value=value, d1=d1, d2=d2, d3=d3)


def wave_shift_residual(bu: DerivBundle, bv: DerivBundle, coeffs: ModelCoefficients) -> np.ndarray:
    """box phi = (F1 without its A1 term) - A1bar u F1."""
    lam = _null_weight(coeffs.A1)
    cf = coeffs
    du, dv, v = bu.d1, bv.d1, bv.value
    f1 = cf.f1(du, dv, v)
    f1_rest = f1 - np.einsum("ab,a...,b...->...", cf.A1, du, du)
    return f1_rest - lam * bu.value * f1


def _null_weight(A: np.ndarray) -> float:
    """lambda with Sym(A) = lambda diag(1,-1,-1); errors if A is not null."""
    from .nullforms import classify_symmetric_null

    return classify_symmetric_null(0.5 * (A + A.T))
