"""Semi-hyperboloidal frame fields and the wave-operator decomposition."""

import math

import numpy as np
import pytest
from hypothesis import given, strategies as st

from hypslice import frames
from hypslice.frames import (
    DomainError,
    SpacetimePoint,
    box_decomposition_residual,
    fd_boost,
    fd_box,
    fd_dbar,
    frame_phi,
    frame_psi,
    in_cone,
    psi_time_row,
    to_hyperbolic,
)

cone_point = st.tuples(
    st.floats(2.5, 40.0), st.floats(0.0, 0.85), st.floats(0.0, 6.283)
).map(lambda a: SpacetimePoint(a[0], a[1] * (a[0] - 1.3) * math.cos(a[2]),
                               a[1] * (a[0] - 1.3) * math.sin(a[2])))


@given(p=cone_point)
def test_point_invariants(p):
    assert p.s == pytest.approx(math.sqrt(p.t**2 - p.r**2))
    assert 0.0 < p.ratio <= 1.0
    assert p.in_cone()
    s, rat = to_hyperbolic(p.t, p.x1, p.x2)
    assert s == pytest.approx(p.s)
    assert rat == pytest.approx(p.ratio)


def test_hyperbolic_chart_boundary():
    with pytest.raises(DomainError):
        to_hyperbolic(2.0, 2.0, 0.0)
    with pytest.raises(DomainError):
        SpacetimePoint(2.0, 2.5, 0.0).s
    assert not SpacetimePoint(3.0, 2.0, 0.0).in_cone()  # r = t-1 exactly
    assert in_cone(np.array([3.0, 3.0]), np.array([1.9, 2.0]),
                   np.array([0.0, 0.0])).tolist() == [True, False]


@given(p=cone_point)
def test_frame_matrices_are_inverses(p):
    phi = frame_phi(p.t, p.x1, p.x2)
    psi = frame_psi(p.t, p.x1, p.x2)
    assert np.allclose(phi @ psi, np.eye(3), atol=1e-12)


def test_frame_matrices_vectorized_shape():
    t = np.full((4, 5), 3.0)
    phi = frame_phi(t, np.zeros_like(t), np.zeros_like(t))
    assert phi.shape == (4, 5, 3, 3)


def test_frame_matrices_need_positive_time():
    with pytest.raises(DomainError):
        frame_phi(0.0, 0.0, 0.0)


@given(p=cone_point)
def test_psi_time_row_contracts_to_ratio(p):
    """psi^0 is null-degenerate: m(psi^0, psi^0) = (s/t)^2."""
    row = psi_time_row(p.t, p.x1, p.x2)
    m = np.diag([1.0, -1.0, -1.0])
    assert row @ m @ row == pytest.approx(p.ratio**2, rel=1e-12)


def _smooth(t, x1, x2):
    return np.sin(0.3 * t) * np.exp(-0.1 * (x1**2 + x2**2)) + 0.05 * t * x1


def test_fd_derivatives_match_closed_forms():
    t, x1, x2 = 6.0, 1.2, -0.7
    h = 1e-4

    # dbar_a = (x^a/t) d_t + d_a on a product test function
    def f(tt, y1, y2):
        return tt * y1 + y2 * y2

    assert fd_dbar(f, t, x1, x2, 1, h) == pytest.approx(x1 / t * x1 + t, rel=1e-8)
    assert fd_boost(f, t, x1, x2, 2, h) == pytest.approx(x2 * x1 + t * 2 * x2,
                                                         rel=1e-8)
    # box(t^2 - x1^2 - x2^2) = 2 - (-2) - (-2) = 6; truncation vanishes for
    # quadratics so only (roundoff / h^2) noise remains
    assert fd_box(lambda tt, y1, y2: tt**2 - y1**2 - y2**2,
                  t, x1, x2, h) == pytest.approx(6.0, rel=1e-6)


def test_box_decomposition_residual_second_order():
    """The frame decomposition of the wave operator converges at O(h^2)."""
    p = SpacetimePoint(7.0, 2.1, -1.3)
    r_h = box_decomposition_residual(_smooth, p, 0.02)
    r_h2 = box_decomposition_residual(_smooth, p, 0.01)
    assert r_h2 < r_h
    assert r_h / r_h2 > 3.0  # ~4 for O(h^2)


def test_box_decomposition_requires_margin():
    p = SpacetimePoint(3.0, 1.95, 0.0)  # 0.05 from the cone boundary
    with pytest.raises(DomainError):
        box_decomposition_residual(_smooth, p, 0.05)


def test_ratio_homogeneity_bounded():
    """|d^I L^J (s/t)| / (s/t) stays O(1) on interior cone points."""
    pts = [SpacetimePoint(5.0, 1.0, 0.5), SpacetimePoint(9.0, 3.0, -2.0)]
    words = [((), ()), ((0,), ()), ((), (1,)), ((1,), (2,))]
    vals = frames.ratio_homogeneity_samples(pts, words, h=1e-3)
    assert len(vals) == len(pts) * len(words)
    assert all(np.isfinite(v) for v in vals)
    assert max(vals) < 10.0
