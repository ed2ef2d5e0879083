"""Null-form predicate, classification, and frame-component identities."""

import numpy as np
import pytest
from hypothesis import given, strategies as st

from hypslice.nullforms import (
    MINKOWSKI,
    NotNullError,
    NotSymmetricError,
    check_null,
    classify_symmetric_null,
    contract,
    evaluate_on_circle,
    frame_component_00,
    is_null,
    random_null_form,
    require_null,
)

finite = st.floats(-5.0, 5.0, allow_nan=False, allow_infinity=False)


def test_minkowski_is_null():
    assert is_null(MINKOWSKI)
    assert classify_symmetric_null(MINKOWSKI) == 1.0
    assert np.max(np.abs(evaluate_on_circle(MINKOWSKI))) < 1e-14


@given(lam=st.floats(-1e3, 1e3).filter(lambda x: abs(x) > 1e-12))
def test_multiples_of_minkowski_recovered(lam):
    got = classify_symmetric_null(lam * MINKOWSKI)
    assert abs(got - lam) <= 1e-12 * max(1.0, abs(lam))


@given(entries=st.lists(finite, min_size=3, max_size=3))
def test_antisymmetric_forms_are_null(entries):
    a, b, c = entries
    A = np.array([[0.0, a, b], [-a, 0.0, c], [-b, -c, 0.0]])
    assert is_null(A)
    # and xi (x) xi kills them exactly, not just to tolerance
    assert np.max(np.abs(evaluate_on_circle(A, np.linspace(0, 7, 23)))) < 1e-12


def test_identity_matrix_rejected_with_witness():
    with pytest.raises(NotNullError) as exc:
        require_null(np.eye(3))
    err = exc.value
    # the recorded witness angle reproduces the recorded violation
    xi = np.array([1.0, np.cos(err.theta), np.sin(err.theta)])
    assert np.isclose(xi @ err.form @ xi, err.value)
    assert abs(err.value) > 0.1


def test_classification_requires_symmetry():
    rng = np.random.default_rng(5)
    A = random_null_form(rng, symmetric=False)
    assert is_null(A)
    with pytest.raises(NotSymmetricError):
        classify_symmetric_null(A)


def test_classification_rejects_non_null_symmetric():
    with pytest.raises(NotNullError):
        classify_symmetric_null(np.diag([1.0, -1.0, 1.0]))


@given(seed=st.integers(0, 2**32 - 1), symmetric=st.booleans())
def test_random_null_forms_are_null(seed, symmetric):
    rng = np.random.default_rng(seed)
    A = random_null_form(rng, symmetric=symmetric)
    assert is_null(A)
    if symmetric:
        assert np.allclose(A, A.T)


def test_check_null_reports_worst_angle():
    # A = e1 (x) e1: A(xi,xi) = cos^2 th, worst at th = 0 among the probe set
    A = np.zeros((3, 3))
    A[1, 1] = 1.0
    chk = check_null(A)
    assert not chk.is_null
    assert chk.worst_value == pytest.approx(1.0)
    assert chk.worst_theta in (0.0, np.pi)


@given(t=st.floats(2.0, 50.0), q=st.floats(0.0, 0.95), ang=st.floats(0.0, 6.28))
def test_frame_component_of_minkowski_is_ratio_squared(t, q, ang):
    r = q * (t - 1.0)
    x1, x2 = r * np.cos(ang), r * np.sin(ang)
    s2 = t * t - r * r
    got = frame_component_00(MINKOWSKI, t, x1, x2)
    assert got == pytest.approx(s2 / t**2, rel=1e-12, abs=1e-13)


def test_contract_matches_einsum():
    rng = np.random.default_rng(11)
    A = rng.normal(size=(3, 3))
    du = rng.normal(size=(3, 4, 5))
    dv = rng.normal(size=(3, 4, 5))
    want = np.einsum("ab,aij,bij->ij", A, du, dv)
    assert np.allclose(contract(A, du, dv), want)


def test_scale_invariance_of_predicate():
    """The predicate is relative: tiny multiples of a null form stay null."""
    A = 1e-14 * MINKOWSKI
    assert is_null(A)
    B = 1e14 * MINKOWSKI
    assert is_null(B)
