"""Pointwise derivative bundles and the boost/frame word algebra.

A :class:`DerivBundle` carries the partial derivatives of one scalar
field at a batch of spacetime points, up to total order 3.  All the
composed operators used by the estimate checks — ``dbar_a``, boosts
``L_a``, words ``d^I L^J``, the pointwise families ``|q|_{p,k}`` — are
linear combinations of partials with polynomial coefficients in
``(t, x1, x2)``, so they are evaluated exactly from the bundle by a
small symbolic term-list expansion (no extra differencing error).

Multi-index convention: axis 0 is t, axes 1 and 2 are x1, x2.  A word
``(I, J)`` means the partials ``d^I`` applied *after* the boosts
``L^J``; boosts do not commute, so J is an ordered tuple.
"""

from __future__ import annotations

import dataclasses
import itertools
from typing import Iterable

import numpy as np

# a polynomial in (t, x1, x2): {(i, j, k): coeff} meaning t^i x1^j x2^k
_POLY_ONE = {(0, 0, 0): 1.0}


def _poly_mul_var(poly, var):
    out = {}
    for mono, c in poly.items():
        m = list(mono)
        m[var] += 1
        out[tuple(m)] = out.get(tuple(m), 0.0) + c
    return out


def _poly_diff(poly, var):
    out = {}
    for mono, c in poly.items():
        if mono[var] == 0:
            continue
        m = list(mono)
        m[var] -= 1
        out[tuple(m)] = out.get(tuple(m), 0.0) + c * mono[var]
    return out


def _poly_eval(poly, t, x1, x2):
    acc = 0.0
    for (i, j, k), c in poly.items():
        term = c
        if i:
            term = term * t**i
        if j:
            term = term * x1**j
        if k:
            term = term * x2**k
        acc = acc + term
    return acc


class _TermList:
    """Sum of poly(t,x) * (partial-derivative of f) terms."""

    def __init__(self, terms=None):
        # {sorted partial multi-tuple: poly dict}
        self.terms = terms if terms is not None else {(): dict(_POLY_ONE)}

    def _add(self, gamma, poly):
        if gamma in self.terms:
            tgt = self.terms[gamma]
            for mono, c in poly.items():
                tgt[mono] = tgt.get(mono, 0.0) + c
        else:
            self.terms[gamma] = dict(poly)

    def apply_partial(self, axis):
        out = _TermList(terms={})
        for gamma, poly in self.terms.items():
            out._add(tuple(sorted(gamma + (axis,))), poly)
            dp = _poly_diff(poly, axis)
            if dp:
                out._add(gamma, dp)
        return out

    def apply_boost(self, a):
        """L_a = x^a d_t + t d_a applied from the left."""
        out = _TermList(terms={})
        for gamma, poly in self.terms.items():
            out._add(tuple(sorted(gamma + (0,))), _poly_mul_var(poly, a))
            dp = _poly_diff(poly, 0)
            if dp:
                out._add(gamma, _poly_mul_var(dp, a))
            out._add(tuple(sorted(gamma + (a,))), _poly_mul_var(poly, 0))
            dp = _poly_diff(poly, a)
            if dp:
                out._add(gamma, _poly_mul_var(dp, 0))
        return out

    def max_order(self):
        return max((len(g) for g in self.terms), default=0)


def word_termlist(I: tuple, J: tuple, inner: tuple = ()) -> _TermList:
    """Term-list expansion of d^I L^J d^{inner} (written outermost first)."""
    tl = _TermList()
    for axis in reversed(inner):
        tl = tl.apply_partial(axis)
    for a in reversed(J):
        tl = tl.apply_boost(a)
    for axis in reversed(I):
        tl = tl.apply_partial(axis)
    return tl


@dataclasses.dataclass
class DerivBundle:
    """Partials of one scalar field at a batch of points.

    ``d1`` has shape (3, n); ``d2`` (3, 3, n) symmetric; ``d3``
    (3, 3, 3, n) symmetric.  Higher entries may be None when a consumer
    only asked for a lower order.
    """

    t: np.ndarray
    x1: np.ndarray
    x2: np.ndarray
    value: np.ndarray
    d1: np.ndarray | None = None
    d2: np.ndarray | None = None
    d3: np.ndarray | None = None

    @property
    def order(self) -> int:
        if self.d3 is not None:
            return 3
        if self.d2 is not None:
            return 2
        if self.d1 is not None:
            return 1
        return 0

    @property
    def r(self) -> np.ndarray:
        return np.hypot(self.x1, self.x2)

    @property
    def s(self) -> np.ndarray:
        return np.sqrt(self.t**2 - self.r**2)

    @property
    def ratio(self) -> np.ndarray:
        return self.s / self.t

    def partial(self, gamma: tuple) -> np.ndarray:
        g = tuple(sorted(gamma))
        if len(g) == 0:
            return self.value
        if len(g) == 1:
            return self.d1[g[0]]
        if len(g) == 2:
            return self.d2[g[0], g[1]]
        if len(g) == 3:
            return self.d3[g[0], g[1], g[2]]
        raise ValueError(f"bundle capped at total order 3, got {gamma}")

    def word(self, I: tuple = (), J: tuple = (), inner: tuple = ()) -> np.ndarray:
        """Evaluate d^I L^J d^{inner} f at every point of the batch."""
        tl = word_termlist(tuple(I), tuple(J), tuple(inner))
        if tl.max_order() > self.order:
            raise ValueError(
                f"word d^{I} L^{J} d^{inner} needs order {tl.max_order()}, bundle has {self.order}"
            )
        acc = np.zeros_like(self.value)
        for gamma, poly in tl.terms.items():
            acc = acc + _poly_eval(poly, self.t, self.x1, self.x2) * self.partial(gamma)
        return acc

    # frame fields -----------------------------------------------------

    def dbar(self, a: int) -> np.ndarray:
        xa = (self.x1, self.x2)[a - 1]
        return (xa / self.t) * self.d1[0] + self.d1[a]

    def dperp(self) -> np.ndarray:
        return self.d1[0] + (self.x1 / self.t) * self.d1[1] + (self.x2 / self.t) * self.d1[2]

    def boost(self, a: int) -> np.ndarray:
        xa = (self.x1, self.x2)[a - 1]
        return xa * self.d1[0] + self.t * self.d1[a]

    def rotation(self) -> np.ndarray:
        """Omega_12 f = x1 d_2 f - x2 d_1 f."""
        return self.x1 * self.d1[2] - self.x2 * self.d1[1]

    def dbar_dbar_sum(self) -> np.ndarray:
        """sum_a dbar_a dbar_a f, expanded into natural partials."""
        t, x1, x2 = self.t, self.x1, self.x2
        r2 = x1 * x1 + x2 * x2
        out = (r2 / t**2) * self.d2[0, 0]
        out = out + 2.0 * (x1 / t) * self.d2[0, 1] + 2.0 * (x2 / t) * self.d2[0, 2]
        out = out + self.d2[1, 1] + self.d2[2, 2]
        out = out + (2.0 - r2 / t**2) / t * self.d1[0]
        return out

    def box(self) -> np.ndarray:
        return self.d2[0, 0] - self.d2[1, 1] - self.d2[2, 2]


def words_upto(p: int, k: int) -> list[tuple[tuple, tuple]]:
    """All (I, J) with |I| + |J| <= p and |J| <= k.

    I is a sorted partial multiset, J an ordered boost word; the list is
    deterministic (lexicographic) so reductions are reproducible.
    """
    out = []
    for total in range(p + 1):
        for nj in range(min(total, k) + 1):
            ni = total - nj
            Is = sorted(set(tuple(sorted(c)) for c in itertools.product((0, 1, 2), repeat=ni)))
            Js = list(itertools.product((1, 2), repeat=nj))
            for I in Is:
                for J in Js:
                    out.append((I, J))
    return out


def pointwise_family(bundle: DerivBundle, p: int, k: int, inner: tuple = ()) -> np.ndarray:
    """|q|_{p,k} with q = d^{inner} f: max over words |d^I L^J q|.

    ``inner`` fixes innermost partials (applied to f before any word),
    e.g. ``inner=(0,)`` with p=1 gives the |d_t f|_{1,1} family.
    """
    best = None
    for I, J in words_upto(p, k):
        val = np.abs(bundle.word(I, J, inner=tuple(inner)))
        best = val if best is None else np.maximum(best, val)
    return best


def gradient_family(bundle: DerivBundle, p: int, k: int) -> np.ndarray:
    """|df|_{p,k} = max_alpha |d_alpha f|_{p,k}."""
    best = None
    for alpha in (0, 1, 2):
        val = pointwise_family(bundle, p, k, inner=(alpha,))
        best = val if best is None else np.maximum(best, val)
    return best


def hessian_family(bundle: DerivBundle, p: int, k: int) -> np.ndarray:
    """|ddf|_{p,k} = max_{alpha,beta} |d_alpha d_beta f|_{p,k}."""
    best = None
    for alpha in (0, 1, 2):
        for beta in range(alpha, 3):
            val = pointwise_family(bundle, p, k, inner=(alpha, beta))
            best = val if best is None else np.maximum(best, val)
    return best


def dbar_gradient(bundle: DerivBundle) -> np.ndarray:
    """max_a |dbar_a f| pointwise ("good" derivatives)."""
    return np.maximum(np.abs(bundle.dbar(1)), np.abs(bundle.dbar(2)))


def nat_gradient(bundle: DerivBundle) -> np.ndarray:
    """max_alpha |d_alpha f| pointwise."""
    return np.max(np.abs(bundle.d1), axis=0)


def am_term(bundle: DerivBundle) -> np.ndarray:
    """A_m[f] of the frame decomposition, from exact word algebra.

    Satisfies box f = (s/t)^2 d_t d_t f + t^{-1} A_m[f].
    """
    t, x1, x2 = bundle.t, bundle.x1, bundle.x2
    r2 = x1 * x1 + x2 * x2
    acc = (2.0 + r2 / t**2) * bundle.d1[0]
    for a in (1, 2):
        xa = (x1, x2)[a - 1]
        acc = acc + (2.0 * xa / t) * bundle.word((0,), (a,))
        acc = acc - ((xa / t) * bundle.word((0,), (a,)) + bundle.word((a,), (a,)))
        acc = acc - (xa / t) * bundle.dbar(a)
    return acc


def bundle_from_field(field, t, x1, x2, order: int = 1) -> DerivBundle:
    """Build a bundle by calling an analytic field's partials.

    ``field`` must provide ``value(t,x1,x2)`` and ``partial(gamma, t,
    x1, x2)`` for sorted gamma up to the requested order.
    """
    t = np.asarray(t, dtype=float)
    x1 = np.asarray(x1, dtype=float)
    x2 = np.asarray(x2, dtype=float)
    n = np.broadcast(t, x1, x2).shape
    val = np.broadcast_to(np.asarray(field.value(t, x1, x2), dtype=float), n).copy()
    d1 = d2 = d3 = None
    if order >= 1:
        d1 = np.stack([
            np.broadcast_to(np.asarray(field.partial((a,), t, x1, x2), dtype=float), n)
            for a in (0, 1, 2)
        ])
    if order >= 2:
        d2 = np.zeros((3, 3) + n)
        for a in range(3):
            for b in range(a, 3):
                v = np.asarray(field.partial((a, b), t, x1, x2), dtype=float)
                d2[a, b] = d2[b, a] = v
    if order >= 3:
        d3 = np.zeros((3, 3, 3) + n)
        for gamma in itertools.combinations_with_replacement((0, 1, 2), 3):
            v = np.asarray(field.partial(gamma, t, x1, x2), dtype=float)
            for perm in set(itertools.permutations(gamma)):
                d3[perm] = v
    return DerivBundle(t=t, x1=x1, x2=x2, value=val, d1=d1, d2=d2, d3=d3)
