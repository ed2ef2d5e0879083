"""Derivative-bundle word algebra against an exact cubic field."""

import math

import numpy as np
import pytest
from hypothesis import given, strategies as st

from hypslice import bundles as B
from hypslice import frames


class CubicField:
    """f = t^3 - 2 t x y + x^2 y + 3 y with hand-written exact partials."""

    def value(self, t, x, y):
        return t**3 - 2 * t * x * y + x**2 * y + 3 * y

    def partial(self, gamma, t, x, y):
        z = np.zeros_like(np.asarray(t, dtype=float))
        table = {
            (0,): 3 * t**2 - 2 * x * y,
            (1,): -2 * t * y + 2 * x * y,
            (2,): -2 * t * x + x**2 + 3 + z,
            (0, 0): 6 * t,
            (0, 1): -2 * y,
            (0, 2): -2 * x,
            (1, 1): 2 * y,
            (1, 2): -2 * t + 2 * x,
            (2, 2): z,
            (0, 0, 0): 6.0 + z,
            (0, 1, 2): -2.0 + z,
            (1, 1, 2): 2.0 + z,
        }
        return table.get(tuple(sorted(gamma)), z)


FIELD = CubicField()


def make_bundle(pts=None, order=3):
    if pts is None:
        pts = [(5.0, 1.5, -2.0), (8.0, -3.0, 1.0), (3.0, 0.4, 0.2)]
    t, x1, x2 = (np.array(c) for c in zip(*pts))
    return B.bundle_from_field(FIELD, t, x1, x2, order=order)


def test_words_upto_structure():
    for p, k in [(0, 0), (1, 1), (2, 1), (2, 2), (3, 2)]:
        words = B.words_upto(p, k)
        assert len(words) == len(set(words))  # no duplicates
        for I, J in words:
            assert len(I) + len(J) <= p
            assert len(J) <= k
            assert tuple(sorted(I)) == I
            assert all(a in (1, 2) for a in J)
    # closed-form count: multisets of I times ordered boost words
    def count(p, k):
        tot = 0
        for n in range(p + 1):
            for nj in range(min(n, k) + 1):
                ni = n - nj
                tot += math.comb(ni + 2, 2) * 2**nj
        return tot

    assert len(B.words_upto(1, 1)) == count(1, 1) == 6
    assert len(B.words_upto(2, 1)) == count(2, 1) == 18
    assert len(B.words_upto(3, 2)) == count(3, 2)


def test_trivial_words():
    b = make_bundle()
    assert np.allclose(b.word((), ()), b.value)
    for a in (0, 1, 2):
        assert np.allclose(b.word((a,), ()), b.d1[a])


def test_boost_words_match_closed_form():
    b = make_bundle()
    for a in (1, 2):
        xa = (b.x1, b.x2)[a - 1]
        want = xa * FIELD.partial((0,), b.t, b.x1, b.x2) + b.t * FIELD.partial(
            (a,), b.t, b.x1, b.x2)
        assert np.allclose(b.word((), (a,)), want, rtol=1e-12)
        assert np.allclose(b.boost(a), want, rtol=1e-12)


def test_nested_words_match_finite_differences():
    """Second-order words agree with nested centered stencils on the cubic."""
    b = make_bundle()
    h = 1e-3
    f = FIELD.value
    for i in range(b.t.size):
        t, x1, x2 = b.t[i], b.x1[i], b.x2[i]
        fd_LL = frames.fd_boost(
            lambda tt, y1, y2: frames.fd_boost(f, tt, y1, y2, 1, h),
            t, x1, x2, 1, h)
        assert b.word((), (1, 1))[i] == pytest.approx(fd_LL, rel=1e-5, abs=1e-5)
        fd_dL = frames._fd1(
            lambda tt, y1, y2: frames.fd_boost(f, tt, y1, y2, 2, h),
            t, x1, x2, 0, h)
        assert b.word((0,), (2,))[i] == pytest.approx(fd_dL, rel=1e-5, abs=1e-5)


def test_partial_accepts_unsorted_gamma():
    b = make_bundle()
    assert np.allclose(b.partial((1, 0)), b.partial((0, 1)))
    assert np.allclose(b.partial((2, 1, 1)), b.partial((1, 1, 2)))


def test_word_depth_guard():
    b = make_bundle(order=1)
    with pytest.raises(ValueError, match="order"):
        b.word((0,), (1,))  # needs second derivatives


def test_box_closed_form():
    b = make_bundle()
    want = 6 * b.t - 2 * b.x2
    assert np.allclose(b.box(), want, rtol=1e-12)


@given(t=st.floats(2.5, 30.0), q=st.floats(0.0, 0.9), ang=st.floats(0.0, 6.283))
def test_frame_decomposition_identity(t, q, ang):
    """box f = (s/t)^2 d_t^2 f + A_m[f]/t exactly, word algebra both sides."""
    r = q * (t - 1.0)
    b = B.bundle_from_field(FIELD, np.array([t]),
                            np.array([r * math.cos(ang)]),
                            np.array([r * math.sin(ang)]), order=2)
    lhs = b.box()
    rhs = b.ratio**2 * b.d2[0, 0] + B.am_term(b) / b.t
    scale = np.max(np.abs(lhs)) + 1.0
    assert np.allclose(lhs, rhs, atol=1e-10 * scale)


def test_dbar_dbar_sum_matches_spelled_out_operator():
    b = make_bundle()
    h = 1e-3
    for i in range(b.t.size):
        t, x1, x2 = b.t[i], b.x1[i], b.x2[i]
        want = sum(
            frames.fd_dbar(
                lambda tt, y1, y2, a=a: frames.fd_dbar(FIELD.value, tt, y1, y2, a, h),
                t, x1, x2, a, h)
            for a in (1, 2))
        assert b.dbar_dbar_sum()[i] == pytest.approx(want, rel=2e-4, abs=2e-4)


def test_families_are_monotone_and_consistent():
    b = make_bundle()
    g00 = B.gradient_family(b, 0, 0)
    assert np.allclose(g00, B.nat_gradient(b))
    g11 = B.gradient_family(b, 1, 1)
    assert np.all(g11 >= g00 - 1e-12)
    p_small = B.pointwise_family(b, 1, 1)
    p_big = B.pointwise_family(b, 2, 2)
    assert np.all(p_big >= p_small - 1e-12)
    hess = B.hessian_family(b, 1, 1)
    assert np.all(hess >= 0)
    assert np.all(B.dbar_gradient(b) >= 0)


def test_rotation_and_dperp():
    b = make_bundle()
    assert np.allclose(b.rotation(), b.x1 * b.d1[2] - b.x2 * b.d1[1])
    assert np.allclose(
        b.dperp(),
        b.d1[0] + (b.x1 / b.t) * b.d1[1] + (b.x2 / b.t) * b.d1[2])
