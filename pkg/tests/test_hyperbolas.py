"""Characteristic hyperbolas: weights, kinematics, damped transport."""

import math

import numpy as np
import pytest
from hypothesis import given, strategies as st

from hypslice.bundles import DerivBundle
from hypslice.hyperbolas import (
    HyperbolaCurve,
    backtrace_entry,
    curve_ode_crosscheck,
    damping_floor,
    density_weight,
    density_weight_family,
    sharp_margin,
    transport_damping,
    transport_terms,
    transport_weight,
)

interior = st.tuples(st.floats(2.1, 300.0), st.floats(0.01, 0.99)).map(
    lambda a: (a[0], a[1] * (a[0] - 1.0)))


# ---------------------------------------------------------------------------
# damping weights
# ---------------------------------------------------------------------------

@given(p=interior)
def test_density_weight_is_family_member(p):
    t, r = p
    want = density_weight_family(t, r, alpha=0.5, beta=0.5, n=2)
    assert density_weight(t, r) == pytest.approx(want, rel=1e-12)


@given(p=interior)
def test_transport_damping_from_density(p):
    t, r = p
    want = t**2 * density_weight(t, r) / (t**2 + r**2)
    assert transport_damping(t, r) == pytest.approx(want, rel=1e-12)


def test_family_nonnegativity_threshold():
    t = 10.0
    r = np.linspace(0.0, t * 0.9999, 2000)
    # boundary-admissible members stay nonnegative ...
    for alpha, beta in [(0.5, 1.5), (0.0, 2.0), (0.5, 0.5)]:
        assert np.min(density_weight_family(t, r, alpha, beta, n=2)) >= -1e-15
    # ... and pushing either exponent past its cap goes negative
    assert np.min(density_weight_family(t, r, 0.7, 0.5, n=2)) < 0
    assert np.min(density_weight_family(t, r, 0.5, 1.7, n=2)) < 0


@given(p=interior)
def test_damping_floor_holds(p):
    t, r = p
    assert transport_damping(t, r) >= damping_floor(t, r) * (1.0 - 1e-12)


def test_transport_weight_value():
    assert transport_weight(4.0, 3.0) == pytest.approx(2.0)


# ---------------------------------------------------------------------------
# curve kinematics
# ---------------------------------------------------------------------------

@given(p=interior, ang=st.floats(0.0, 6.283))
def test_curve_anchor_consistency(p, ang):
    t, r = p
    curve = HyperbolaCurve.through(t, r * math.cos(ang), r * math.sin(ang))
    assert curve.radius(t) == pytest.approx(r, rel=1e-9, abs=1e-12)
    assert curve.s_of(t) ** 2 == pytest.approx(t * t - r * r, rel=1e-9)
    # conserved quantity: s^2 = C0 r along the whole curve
    for tt in (t, 1.5 * t, 4.0 * t):
        assert curve.s_of(tt) ** 2 == pytest.approx(
            curve.C0 * curve.radius(tt), rel=1e-9)


@given(p=interior, ang=st.floats(0.0, 6.283), fac=st.floats(0.5, 5.0))
def test_curve_velocity_matches_defining_field(p, ang, fac):
    t, r = p
    curve = HyperbolaCurve.through(t, r * math.cos(ang), r * math.sin(ang))
    tt = max(1.1, fac * t)
    x1, x2 = curve.position(tt)
    v1, v2 = curve.velocity(tt)
    rho2 = tt * tt + x1 * x1 + x2 * x2
    assert v1 == pytest.approx(2.0 * tt * x1 / rho2, rel=1e-9, abs=1e-12)
    assert v2 == pytest.approx(2.0 * tt * x2 / rho2, rel=1e-9, abs=1e-12)


def test_curve_rejects_exterior_anchor():
    with pytest.raises(ValueError):
        HyperbolaCurve.through(3.0, 2.0, 0.0)   # exactly on the shell
    with pytest.raises(ValueError):
        HyperbolaCurve.through(3.0, 2.5, 0.0)


def test_degenerate_axis_curve():
    curve = HyperbolaCurve.through(5.0, 0.0, 0.0, axis_tol=1e-9)
    assert curve.degenerate
    ts = np.array([2.0, 5.0, 11.0])
    assert np.all(curve.radius(ts) == 0.0)
    assert np.allclose(curve.s_of(ts), ts)
    v1, v2 = curve.velocity(ts)
    assert np.all(v1 == 0.0) and np.all(v2 == 0.0)


def test_cone_crossing_radius_closed_form():
    curve = HyperbolaCurve.through(5.0, 3.9, 0.0)
    lo, hi = 1.0, 5.0
    for _ in range(200):
        mid = 0.5 * (lo + hi)
        if curve.cone_excess(mid) > 0:
            hi = mid
        else:
            lo = mid
    t_star = 0.5 * (lo + hi)
    assert curve.radius(t_star) == pytest.approx(1.0 / (curve.C0 - 2.0),
                                                 rel=1e-8)


# ---------------------------------------------------------------------------
# entry backtracing and the RK4 crosscheck
# ---------------------------------------------------------------------------

def test_backtrace_hyperboloid_entry():
    curve = HyperbolaCurve.through(5.0, 0.5, 0.0)
    t_e, kind = backtrace_entry(curve, s0=3.0)
    assert kind == "hyperboloid"
    assert curve.s_of(t_e) == pytest.approx(3.0, abs=1e-8)
    assert t_e < 5.0


def test_backtrace_cone_entry():
    curve = HyperbolaCurve.through(5.0, 3.9, 0.0)
    t_e, kind = backtrace_entry(curve, s0=2.0)
    assert kind == "cone"
    assert curve.cone_excess(t_e) == pytest.approx(0.0, abs=1e-8)


def test_backtrace_rejects_anchor_below_slice():
    curve = HyperbolaCurve.through(5.0, 0.5, 0.0)
    with pytest.raises(ValueError, match="nothing to trace"):
        backtrace_entry(curve, s0=10.0)


def test_ode_crosscheck_fourth_order():
    curve = HyperbolaCurve.through(8.0, 2.0, 1.0)
    err = curve_ode_crosscheck(curve, 2.2, n_steps=2000)
    assert err < 1e-9
    coarse = curve_ode_crosscheck(curve, 2.2, n_steps=250)
    finer = curve_ode_crosscheck(curve, 2.2, n_steps=500)
    assert coarse / finer > 10.0  # ~16 for RK4


# ---------------------------------------------------------------------------
# damped transport along a curve
# ---------------------------------------------------------------------------

def _poly_bundle_on_curve(curve, t_lo, t_hi, n):
    """Exact order-2 bundle of u = t^2 x - y^2 t on curve points."""
    tau = np.linspace(t_lo, t_hi, n)
    x, y = curve.position(tau)
    value = tau**2 * x - y**2 * tau
    d1 = np.stack([2 * tau * x - y**2, tau**2, -2 * y * tau])
    d2 = np.zeros((3, 3, n))
    d2[0, 0] = 2 * x
    d2[0, 1] = d2[1, 0] = 2 * tau
    d2[0, 2] = d2[2, 0] = -2 * y
    d2[2, 2] = -2 * tau
    return DerivBundle(t=tau, x1=x, x2=y, value=value, d1=d1, d2=d2)


def test_transport_identity_on_analytic_field():
    """U(end) = U(entry) e^{-int P} + int W e^{-int P}: the residual is pure
    Simpson error and shrinks at fourth order under tau refinement."""
    curve = HyperbolaCurve.through(9.0, 1.5, -0.8)
    scale = None
    residuals = []
    for n in (201, 401):
        sample = transport_terms(curve, "hyperboloid",
                                 _poly_bundle_on_curve(curve, 2.5, 9.0, n))
        scale = np.max(np.abs(sample.U))
        residuals.append(abs(sample.identity_residual()))
    assert residuals[0] < 1e-5 * scale
    assert residuals[1] < residuals[0] / 8.0


def test_transport_terms_guards():
    curve = HyperbolaCurve.through(9.0, 1.5, -0.8)
    b = _poly_bundle_on_curve(curve, 2.5, 9.0, 21)
    with pytest.raises(ValueError, match="second derivatives"):
        transport_terms(curve, "hyperboloid",
                        DerivBundle(t=b.t, x1=b.x1, x2=b.x2, value=b.value,
                                    d1=b.d1))
    off = DerivBundle(t=b.t, x1=b.x1 + 0.01, x2=b.x2, value=b.value,
                      d1=b.d1, d2=b.d2)
    with pytest.raises(ValueError, match="on the curve"):
        transport_terms(curve, "hyperboloid", off)


def test_sharp_margin_entry_control():
    curve = HyperbolaCurve.through(9.0, 1.5, -0.8)
    sample = transport_terms(curve, "hyperboloid",
                             _poly_bundle_on_curve(curve, 2.5, 9.0, 201))
    m_h = sharp_margin(sample, sup_sdtu_entry=7.5)
    assert m_h["rhs"] == pytest.approx(7.5 + abs(sample.forcing_integral()))
    assert m_h["lhs"] == pytest.approx(
        math.sqrt(0.5) * abs(sample.s[-1] * sample.dt_u[-1]))
    assert m_h["margin"] == pytest.approx(m_h["rhs"] - m_h["lhs"])
    # cone entries carry no hyperboloid control term
    sample.entry_type = "cone"
    m_c = sharp_margin(sample, sup_sdtu_entry=7.5)
    assert m_c["rhs"] == pytest.approx(abs(sample.forcing_integral()))
    assert m_c["entry_type"] == "cone"
