"""Graded quadrature and the two technical integral lemmas.

Reference values computed with mpmath at 30 digits (cancellation-free
product form of the integrands); frozen here as literals.
"""

import math

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from hypslice.poisson import (
    beta_lemma_bound,
    beta_lemma_check,
    integrate_graded,
    theta_integral,
    theta_lemma_check,
)

# int_0^{th0} (cos th - cos th0)^{-1/2} dth
THETA_ORACLE = {
    math.pi / 2: 2.6220575542921198,
    2 * math.pi / 3: 3.0497736761637922,
    0.3: 2.2340018903642239,
}


def test_integrate_graded_polynomial_exact():
    got = integrate_graded(lambda x: x**3, 0.0, 1.0)
    assert got == pytest.approx(0.25, abs=1e-14)


def test_integrate_graded_endpoint_singularity():
    """Bare x^{-1/2}: grading alone converges like 2^{-depth/2}.

    (The library's own singular integrands are smoothed by substitution
    first; grading only mops up residual roughness.)
    """
    f = lambda x: 1.0 / np.sqrt(x)
    got = integrate_graded(f, 0.0, 1.0, hot_lo=True)
    assert got == pytest.approx(2.0, abs=1e-4)
    deeper = integrate_graded(f, 0.0, 1.0, depth=30, hot_lo=True)
    assert abs(deeper - 2.0) < abs(got - 2.0) / 10


def test_integrate_graded_empty_interval():
    assert integrate_graded(lambda x: x, 1.0, 1.0) == 0.0
    assert integrate_graded(lambda x: x, 2.0, 1.0) == 0.0


@pytest.mark.parametrize("th0,want", sorted(THETA_ORACLE.items()))
def test_theta_integral_oracle(th0, want):
    assert theta_integral(th0) == pytest.approx(want, abs=1e-10)


def test_theta_integral_domain():
    for bad in (0.0, -1.0, math.pi, 4.0):
        with pytest.raises(ValueError):
            theta_integral(bad)


def test_theta_integral_depth_convergence():
    coarse = theta_integral(math.pi / 2, depth=14)
    fine = theta_integral(math.pi / 2, depth=22)
    assert abs(coarse - fine) < 1e-8


def test_theta_lemma_constants():
    out = theta_lemma_check()
    vals, th0 = out["integral"], out["theta0"]
    assert np.all(np.isfinite(vals)) and np.all(vals > 0)
    # integral is increasing in theta0
    assert np.all(np.diff(vals) > 0)
    # the reported constants actually dominate their regimes
    hi = th0 >= math.pi / 3
    assert np.all(vals[hi] * np.sqrt(np.sin(th0[hi]))
                  <= out["const_sin_regime"] + 1e-12)
    lo = th0 <= math.pi / 2
    assert np.all(vals[lo] <= out["const_flat_regime"] + 1e-12)
    # flat-regime constant is attained at theta0 = pi/2 (monotonicity)
    assert out["const_flat_regime"] <= THETA_ORACLE[math.pi / 2] + 1e-6


def test_beta_lemma_arcsine_point():
    val, bound = beta_lemma_check(0.5, 0.5, 0.0, 1.0)
    assert val == pytest.approx(math.pi, abs=1e-9)
    # the sharp-constant formula gives 4 here, up to floor rounding
    assert abs(bound - 4.0) <= 1e-12


def test_beta_lemma_generic_oracle():
    val, bound = beta_lemma_check(0.3, 0.7, 1.0, 3.0)
    assert val == pytest.approx(3.8832220774509332, abs=1e-9)
    assert val <= bound


def test_beta_lemma_saturates_at_zero_exponents():
    val, bound = beta_lemma_check(0.0, 0.0, 0.0, 2.25)
    assert val == pytest.approx(2.25, abs=1e-12)
    assert bound == pytest.approx(2.25, rel=1e-15)


@settings(max_examples=40)
@given(alpha=st.floats(0.0, 0.85), beta=st.floats(0.0, 0.85),
       a=st.floats(-3.0, 1.0), width=st.floats(0.1, 4.0))
def test_beta_lemma_inequality_and_euler_integral(alpha, beta, a, width):
    b = a + width
    val, bound = beta_lemma_check(alpha, beta, a, b)
    # Euler: int = B(1-alpha, 1-beta) (b-a)^{1-alpha-beta}
    euler = (math.gamma(1 - alpha) * math.gamma(1 - beta)
             / math.gamma(2 - alpha - beta) * width ** (1 - alpha - beta))
    assert val == pytest.approx(euler, rel=1e-7)
    assert val <= bound * (1 + 1e-9)


def test_beta_lemma_rejects_bad_arguments():
    with pytest.raises(ValueError):
        beta_lemma_check(1.0, 0.5, 0.0, 1.0)
    with pytest.raises(ValueError):
        beta_lemma_check(0.5, 0.5, 1.0, 1.0)
