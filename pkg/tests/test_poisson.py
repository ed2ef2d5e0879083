"""Case geometry, sliced source integrals, and the two wave-kernel solvers."""

import math

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from hypslice.grid import RadialField
from hypslice.poisson import (
    AccuracyWarning,
    CallableSource,
    GriddedSource,
    I_lambda,
    InitialBound,
    SourceBound,
    case_thresholds,
    classify_by_inclusion,
    classify_case,
    free_solution,
    initial_bound_constant,
    integrate_graded,
    lambda_integral_bound_check,
    retarded_solve,
    theta0,
    _angular_factor,
)

CASE_ORDER = {"I": 0, "II": 1, "III": 2, "IV": 3}


# ---------------------------------------------------------------------------
# bounds dataclasses
# ---------------------------------------------------------------------------

def test_source_bound_domain():
    SourceBound(1.0, 0.25, 0.5)
    for mu, nu in [(0.0, 0.5), (0.6, 0.7), (0.4, 0.3), (-0.1, 0.2)]:
        with pytest.raises(ValueError):
            SourceBound(1.0, mu, nu)


def test_initial_bound_domain():
    InitialBound(0.0)
    with pytest.raises(ValueError):
        InitialBound(-1.0)
    with pytest.raises(ValueError):
        InitialBound(1.0, t0=1.5)


# ---------------------------------------------------------------------------
# case classification
# ---------------------------------------------------------------------------

admissible = st.tuples(
    st.floats(4.0, 200.0), st.floats(0.01, 0.999), st.floats(0.0, 1.0)
).map(lambda a: (a[0], a[1] * (a[0] - 1.0),
                 2.0 + a[2] * (a[0] - 2.0)))


@given(geom=admissible, u=st.floats(0.0, 1.0))
def test_closed_form_labels_match_inclusion_geometry(geom, u):
    t, r, t0 = geom
    lam = t0 / t + u * (1.0 - t0 / t)
    assert classify_case(t, r, t0, lam).label == classify_by_inclusion(t, r, t0, lam)


@given(geom=admissible)
def test_threshold_ordering(geom):
    t, r, _ = geom
    th0, th1, th2 = case_thresholds(t, r)
    assert th0 <= th1 + 1e-15
    assert th0 <= th2 + 1e-15
    # the middle thresholds cross exactly at r = (t-1)/3
    assert (th1 <= th2 + 1e-15) == (r >= (t - 1.0) / 3.0 - 1e-12 * t)


def _label_sweep(t, r, n=4000):
    lams = np.linspace(2.0 / t, 1.0, n)
    return [classify_case(t, r, 2.0, lam).label for lam in lams]


def test_labels_monotone_along_lambda_ordered_regime():
    labels = _label_sweep(10.0, 6.0)  # r > (t-1)/3: thresholds in order
    idx = [CASE_ORDER[c] for c in labels]
    assert idx == sorted(idx)
    assert set(labels) == {"I", "II", "III", "IV"}


def test_crossed_regime_skips_case_three():
    """For r < (t-1)/3 the band between the crossed middle thresholds is
    genuinely case IV (B_A nested in B_O); case III never occurs."""
    labels = _label_sweep(10.0, 1.0)
    idx = [CASE_ORDER[c] for c in labels]
    assert idx == sorted(idx)
    assert set(labels) == {"I", "II", "IV"}


def test_classify_domain_errors():
    with pytest.raises(ValueError):
        classify_case(10.0, 0.0, 2.0, 0.5)      # r = 0
    with pytest.raises(ValueError):
        classify_case(10.0, 9.5, 2.0, 0.5)      # r > t-1
    with pytest.raises(ValueError):
        classify_case(10.0, 5.0, 2.0, 0.1)      # lam < t0/t
    with pytest.raises(ValueError):
        classify_case(10.0, 5.0, 12.0, 0.5)     # t0 > t


# ---------------------------------------------------------------------------
# theta0 and the angular factor
# ---------------------------------------------------------------------------

def test_theta0_concentric_limits():
    assert theta0(np.array([0.0]), 0.4, 0.0)[0] == pytest.approx(math.pi)
    # circle of radius 0.9 around the center of a disc of radius 0.6: empty
    assert theta0(np.array([0.9]), 0.4, 0.0)[0] == 0.0


def test_theta0_law_of_cosines():
    lam, R = 0.3, 0.45
    rho = np.array([0.5])
    got = theta0(rho, lam, R)[0]
    r_a = 1.0 - lam
    want = math.acos((rho[0] ** 2 + R**2 - r_a**2) / (2 * rho[0] * R))
    assert got == pytest.approx(want, rel=1e-12)


@pytest.mark.parametrize("rho", [0.05, 0.2499, 0.2501, 0.4, 0.649])
def test_angular_factor_against_direct_quadrature(rho):
    """g(rho) from elliptic integrals vs brute-force theta quadrature."""
    lam, R = 0.5, 0.25       # r_a = 0.5, tangency at rho_c = 0.25
    r_a = 1.0 - lam
    th_m = theta0(np.array([rho]), lam, R)[0]
    if th_m == 0.0:
        assert _angular_factor(np.array([rho]), lam, R)[0] == 0.0
        return

    def f(th):
        d2 = rho**2 + R**2 - 2 * rho * R * np.cos(th)
        return 2.0 / np.sqrt(r_a**2 - d2)

    want = integrate_graded(f, 0.0, th_m, depth=26, order=10,
                            hot_lo=False, hot_hi=True)
    got = _angular_factor(np.array([rho]), lam, R)[0]
    assert got == pytest.approx(want, rel=2e-3)


def test_angular_factor_finite_at_tangency():
    lam, R = 0.5, 0.25
    rhos = 0.25 + np.array([-1e-9, -1e-13, 1e-13, 1e-9])
    vals = _angular_factor(rhos, lam, R)
    assert np.all(np.isfinite(vals)) and np.all(vals > 0)


# ---------------------------------------------------------------------------
# I_lambda and the lambda integral
# ---------------------------------------------------------------------------

BOUND = SourceBound(1.0, 0.5, 0.5)


def test_I_lambda_leading_edge_vanishes():
    # at r = t-1 the backward cone only grazes the source support
    for lam in (0.25, 0.5, 0.75, 0.95):
        assert I_lambda(10.0, 9.0, 2.0, lam, BOUND) == 0.0


def test_I_lambda_positive_interior():
    assert I_lambda(40.0, 36.5, 2.0, 0.5, BOUND) > 0.0


def test_I_lambda_quadrature_converged():
    a = I_lambda(40.0, 36.5, 2.0, 0.5, BOUND, depth=18, order=10)
    b = I_lambda(40.0, 36.5, 2.0, 0.5, BOUND, depth=26, order=12)
    assert a == pytest.approx(b, rel=1e-8)


def test_lambda_bound_check_regime_guard():
    with pytest.raises(ValueError, match="regime"):
        lambda_integral_bound_check(40.0, 20.0, 2.0, BOUND)


def test_lambda_bound_check_breakdown_consistent():
    total, ratio, breakdown = lambda_integral_bound_check(
        40.0, 38.0, 2.0, BOUND, depth=16, order=8, lam_depth=8, lam_order=6)
    assert total > 0 and ratio > 0
    assert all(v >= 0 for v in breakdown.values())
    assert sum(breakdown.values()) == pytest.approx(total, rel=1e-12)
    assert set(breakdown) <= set("I II III IV".split())


# ---------------------------------------------------------------------------
# homogeneous Poisson formula
# ---------------------------------------------------------------------------

U0 = RadialField(amp=1.0, radius=0.9, kind="bump")
ZERO = RadialField(amp=0.0, radius=0.9, kind="bump")


def test_free_solution_at_data_time():
    assert free_solution(U0, ZERO, 2.0, 2.0, 0.3, 0.1) == pytest.approx(
        float(U0.val(np.array([0.3]), np.array([0.1]))[0]))
    with pytest.raises(ValueError):
        free_solution(U0, ZERO, 2.0, 1.5, 0.0, 0.0)


def test_free_solution_rotational_symmetry():
    a = free_solution(U0, ZERO, 2.0, 4.0, 0.5, 0.0)
    b = free_solution(U0, ZERO, 2.0, 4.0, 0.0, 0.5)
    c = free_solution(U0, ZERO, 2.0, 4.0, 0.5 / math.sqrt(2), 0.5 / math.sqrt(2))
    assert a == pytest.approx(b, rel=1e-9, abs=1e-12)
    assert a == pytest.approx(c, rel=1e-7, abs=1e-12)


def test_free_solution_solves_wave_equation():
    """Second differences of the quadrature solution satisfy box u = 0 and
    match the posed data, pinning kernel and normalization together."""
    t, x, y, h = 4.2, 0.6, -0.3, 0.02

    def u(tt, xx, yy):
        return free_solution(U0, ZERO, 2.0, tt, xx, yy)

    box = ((u(t + h, x, y) - 2 * u(t, x, y) + u(t - h, x, y))
           - (u(t, x + h, y) - 2 * u(t, x, y) + u(t, x - h, y))
           - (u(t, x, y + h) - 2 * u(t, x, y) + u(t, x, y - h))) / h**2
    scale = max(abs(u(t, x, y)), 0.05)
    assert abs(box) < 0.05 * scale / h  # h^2 stencil on an O(1) fourth derivative

    # short-time expansion: u(t0 + e) = u0 + O(e^2) since u1 = 0
    e = 0.02
    got = free_solution(U0, ZERO, 2.0, 2.0 + e, 0.3, 0.1)
    want = float(U0.val(np.array([0.3]), np.array([0.1]))[0])
    assert got == pytest.approx(want, abs=5e-3)


def test_initial_bound_constant_scales():
    c1 = initial_bound_constant(U0, ZERO, 0.9)
    c2 = initial_bound_constant(RadialField(amp=2.0, radius=0.9, kind="bump"),
                                ZERO, 0.9)
    assert c1 >= 1.0  # the bump attains its amplitude at the center
    assert c2 == pytest.approx(2.0 * c1, rel=1e-12)


# ---------------------------------------------------------------------------
# retarded potential
# ---------------------------------------------------------------------------

def _manufactured():
    """w = a(t) phi(x) with a(2) = a'(2) = 0, so the Duhamel integral of
    box w from t0 = 2 with zero data reproduces w."""
    phi = RadialField(amp=1.0, radius=0.8, kind="bump")

    def a(tau):
        return (tau - 2.0) ** 3 * np.exp(-tau)

    def app(tau):
        return ((6 * (tau - 2.0) - 6 * (tau - 2.0) ** 2 + (tau - 2.0) ** 3)
                * np.exp(-tau))

    def F(tau, Y1, Y2):
        v, _, _, dxx, _, dyy = phi.derivs(Y1, Y2)
        return app(tau) * v - a(tau) * (dxx + dyy)

    src = CallableSource(F, lambda tau: 0.8)

    def w(t, x1, x2):
        return a(t) * float(phi.val(np.array([x1]), np.array([x2]))[0])

    return src, w


def test_retarded_solve_manufactured():
    src, w = _manufactured()
    t, x1, x2 = 4.0, 0.3, -0.2
    got = retarded_solve(src, t, x1, x2)
    want = w(t, x1, x2)
    assert want != 0.0
    assert got == pytest.approx(want, rel=1e-2)


def test_retarded_solve_before_start():
    src, _ = _manufactured()
    assert retarded_solve(src, 2.0, 0.0, 0.0) == 0.0
    assert retarded_solve(src, 1.0, 0.0, 0.0) == 0.0


def test_gridded_source_matches_callable():
    src, _ = _manufactured()
    rng = np.random.default_rng(3)
    pts = rng.uniform(-0.7, 0.7, size=(20, 2))
    tau = 3.7
    want = src.eval(tau, pts[:, 0], pts[:, 1])
    scale = np.abs(want).max()

    times = np.linspace(2.0, 5.0, 41)

    def build(n):
        xs = np.linspace(-1.0, 1.0, n)
        X, Y = np.meshgrid(xs, xs)
        arrays = [src.eval(t, X, Y) for t in times]
        return GriddedSource(times, arrays, h=xs[1] - xs[0], x0=xs[0],
                             radius_fn=lambda tau: 0.8)

    coarse = build(161)
    err_c = np.abs(coarse.eval(tau, pts[:, 0], pts[:, 1]) - want).max()
    assert err_c < 0.03 * scale
    # bilinear in space: halving h cuts the error ~4x (the bump shoulder
    # dominates; the time-interpolation floor is an order smaller)
    fine = build(321)
    err_f = np.abs(fine.eval(tau, pts[:, 0], pts[:, 1]) - want).max()
    assert err_f < err_c / 3.0
    # zero outside the sampled box
    assert coarse.eval(tau, np.array([5.0]), np.array([0.0]))[0] == 0.0


def test_gridded_source_warns_when_undersampled():
    src, _ = _manufactured()
    xs = np.linspace(-1.0, 1.0, 9)
    X, Y = np.meshgrid(xs, xs)
    times = np.array([2.0, 5.0])
    with pytest.warns(AccuracyWarning):
        GriddedSource(times, [src.eval(t, X, Y) for t in times],
                      h=xs[1] - xs[0], x0=xs[0], min_feature=0.2)
