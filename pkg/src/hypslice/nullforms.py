"""Null quadratic forms on 2+1D gradients: predicate, classification, frame components.

A form ``A`` (3x3, slots over (d_t, d_1, d_2)) is null when
``A(xi, xi) = 0`` for every null vector ``xi = (1, cos th, sin th)``.
The restriction to the null circle is a trigonometric polynomial of
degree 2, so 8 equispaced angles decide the predicate exactly (5 would
already determine the 5 coefficients; 8 keeps a safety margin and a
power-of-two layout).
"""

from __future__ import annotations

import dataclasses

import numpy as np

from .frames import psi_time_row

MINKOWSKI = np.diag([1.0, -1.0, -1.0])

_N_ANGLES = 8
_ANGLES = 2.0 * np.pi * np.arange(_N_ANGLES) / _N_ANGLES
_NULL_VECTORS = np.stack([np.ones(_N_ANGLES), np.cos(_ANGLES), np.sin(_ANGLES)])


class NotNullError(ValueError):
    def __init__(self, form, theta, value):
        self.form = np.asarray(form, dtype=float)
        self.theta = float(theta)
        self.value = float(value)
        xi = (1.0, np.cos(self.theta), np.sin(self.theta))
        super().__init__(
            f"form is not null: A(xi,xi)={value:.3e} at xi=(1, cos t, sin t), t={theta:.6f} "
            f"(witness xi={xi})"
        )


class NotSymmetricError(ValueError):
    pass


@dataclasses.dataclass(frozen=True)
class NullCheck:
    is_null: bool
    worst_theta: float
    worst_value: float


def evaluate_on_circle(A, thetas=None) -> np.ndarray:
    """A(xi(theta), xi(theta)) for xi = (1, cos, sin)."""
    A = np.asarray(A, dtype=float)
    if thetas is None:
        xi = _NULL_VECTORS
    else:
        thetas = np.asarray(thetas, dtype=float)
        xi = np.stack([np.ones_like(thetas), np.cos(thetas), np.sin(thetas)])
    return np.einsum("ab,an,bn->n", A, xi, xi)


def check_null(A, rel_tol: float = 1e-10) -> NullCheck:
    """Exact-by-sampling null predicate with a witness on failure."""
    A = np.asarray(A, dtype=float)
    vals = evaluate_on_circle(A)
    scale = max(np.max(np.abs(A)), 1e-300)
    worst = int(np.argmax(np.abs(vals)))
    return NullCheck(
        is_null=bool(np.max(np.abs(vals)) <= rel_tol * scale),
        worst_theta=float(_ANGLES[worst]),
        worst_value=float(vals[worst]),
    )


def is_null(A, rel_tol: float = 1e-10) -> bool:
    return check_null(A, rel_tol=rel_tol).is_null


def require_null(A, name: str = "form", rel_tol: float = 1e-10) -> None:
    chk = check_null(A, rel_tol=rel_tol)
    if not chk.is_null:
        raise NotNullError(A, chk.worst_theta, chk.worst_value)


def classify_symmetric_null(A, rel_tol: float = 1e-10) -> float:
    """Return the scalar lam with A = lam * diag(1,-1,-1).

    Only symmetric null forms admit this shape; asymmetry or a null
    violation raises.  The reconstruction gap max|A - lam m| is checked
    against 1e-12 * max(1, |lam|).
    """
    A = np.asarray(A, dtype=float)
    scale = max(np.max(np.abs(A)), 1e-300)
    if np.max(np.abs(A - A.T)) > rel_tol * scale:
        raise NotSymmetricError("classification requires a symmetric form")
    require_null(A, rel_tol=rel_tol)
    lam = float(A[0, 0])
    gap = np.max(np.abs(A - lam * MINKOWSKI))
    if gap > 1e-12 * max(1.0, abs(lam)):
        raise NotNullError(A, 0.0, gap)
    return lam


def frame_component_00(A, t, x1, x2):
    """The 00 frame component: A contracted twice with (1, -x1/t, -x2/t).

    For ``A = m`` this equals ``(s/t)^2`` identically; for any null A it
    is bounded by |A^{00}| (s/t)^2 on the cone.
    """
    A = np.asarray(A, dtype=float)
    psi0 = psi_time_row(t, x1, x2)
    return np.einsum("ab,a...,b...->...", A, psi0, psi0)


def random_null_form(rng, symmetric: bool = True, scale: float = 1.0) -> np.ndarray:
    """Draw a random null form.

    Symmetric null forms are exactly the multiples of the Minkowski
    form; the general null forms add an arbitrary antisymmetric part
    (which vanishes on every xi (x) xi).
    """
    lam = scale * rng.uniform(-2.0, 2.0)
    A = lam * MINKOWSKI
    if not symmetric:
        S = rng.uniform(-scale, scale, size=(3, 3))
        A = A + (S - S.T) / 2.0
    return A


def contract(A, du, dv) -> np.ndarray:
    """A^{ab} du_a dv_b with du, dv of shape (3, ...)."""
    return np.einsum("ab,a...,b...->...", np.asarray(A, dtype=float), du, dv)


def null_estimate_ratio(A, bu, bv, p: int = 0, k: int = 0):
    """Fitted constant for the null-form pointwise estimate.

    Checks |A du dv|_{p,k} against the null-structure bracket
    ``(s/t)^2 |du|_{p,k}|dv| + |dbar u||dv|-type`` mixed sums and
    returns (worst ratio, lhs, rhs) over the batch; 0/0 counts as 0.
    """
    from . import bundles as B

    A = np.asarray(A, dtype=float)
    if p == 0 and k == 0:
        lhs = np.abs(contract(A, bu.d1, bv.d1))
        st2 = bu.ratio**2
        rhs = (
            st2 * B.nat_gradient(bu) * B.nat_gradient(bv)
            + B.dbar_gradient(bu) * B.nat_gradient(bv)
            + B.nat_gradient(bu) * B.dbar_gradient(bv)
        )
    else:
        # |Z (A du dv)| expands by Leibniz over first-order words
        words = B.words_upto(p, k)
        lhs = None
        for I, J in words:
            val = np.zeros_like(bu.value)
            # product rule at first order: split the word between factors.
            # words_upto(1,1) only contains empty and single-letter words.
            if len(I) + len(J) == 0:
                val = contract(A, bu.d1, bv.d1)
            else:
                du_w = np.stack([bu.word(I, J, inner=(a,)) for a in (0, 1, 2)])
                dv_w = np.stack([bv.word(I, J, inner=(a,)) for a in (0, 1, 2)])
                val = contract(A, du_w, bv.d1) + contract(A, bu.d1, dv_w)
            lhs = np.abs(val) if lhs is None else np.maximum(lhs, np.abs(val))
        st2 = bu.ratio**2
        gu, gv = B.gradient_family(bu, p, k), B.gradient_family(bv, p, k)
        bu_bar = np.maximum(B.dbar_gradient(bu), np.abs(bu.ratio**2 * bu.d1[0]))
        bv_bar = np.maximum(B.dbar_gradient(bv), np.abs(bv.ratio**2 * bv.d1[0]))
        rhs = st2 * gu * gv + bu_bar * gv + gu * bv_bar
    with np.errstate(invalid="ignore", divide="ignore"):
        ratio = np.where(lhs == 0.0, 0.0, lhs / np.where(rhs == 0.0, np.inf, rhs))
    return float(np.max(ratio)), lhs, rhs
