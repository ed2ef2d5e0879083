"""Cone geometry, hyperbolic parameters, and the semi-hyperboloidal frame.

Everything here is a pure function of coordinates.  Points live in the
interior of the light cone ``{r < t - 1}`` issued from the unit disc at
``t = 2``; the hyperbolic time is ``s = sqrt(t^2 - r^2)``.  The frame
fields are ``dbar_a = (x^a/t) d_t + d_a`` and the boosts
``L_a = x^a d_t + t d_a``; the transition matrices between the natural
and the semi-hyperboloidal frame are lower-triangular with ``+-x^a/t``
in the first column.
"""

from __future__ import annotations

import dataclasses
import math

import numpy as np


class DomainError(ValueError):
    """Raised when a point is outside the chart an operation needs."""


@dataclasses.dataclass(frozen=True)
class SpacetimePoint:
    t: float
    x1: float
    x2: float

    @property
    def r(self) -> float:
        return math.hypot(self.x1, self.x2)

    @property
    def s(self) -> float:
        if self.r >= self.t:
            raise DomainError(f"r={self.r} >= t={self.t}: no hyperbolic time")
        return math.sqrt(self.t * self.t - self.r * self.r)

    @property
    def ratio(self) -> float:
        return self.s / self.t

    def in_cone(self, margin: float = 0.0) -> bool:
        """Interior-of-cone predicate r < t - 1 - margin."""
        return self.r < self.t - 1.0 - margin


def to_hyperbolic(t, x1, x2):
    """Return ``(s, s/t)`` for points with r < t.

    Accepts scalars or arrays; raises :class:`DomainError` if any point
    is on or outside the light cone from the origin.
    """
    t = np.asarray(t, dtype=float)
    r2 = np.asarray(x1, dtype=float) ** 2 + np.asarray(x2, dtype=float) ** 2
    s2 = t * t - r2
    if np.any(s2 <= 0.0):
        raise DomainError("point outside the hyperbolic chart (r >= t)")
    s = np.sqrt(s2)
    return s, s / t


def in_cone(t, x1, x2, margin: float = 0.0):
    """Vectorized predicate for the interior cone {r < t - 1 - margin}."""
    r = np.hypot(np.asarray(x1, dtype=float), np.asarray(x2, dtype=float))
    return r < np.asarray(t, dtype=float) - 1.0 - margin


def frame_phi(t, x1, x2):
    """Frame-to-natural transition matrix, rows (1,0,0),(x1/t,1,0),(x2/t,0,1).

    Vectorized: returns shape ``(..., 3, 3)``.
    """
    t = np.asarray(t, dtype=float)
    if np.any(t <= 0.0):
        raise DomainError("frame matrices need t > 0")
    shape = np.broadcast(t, x1, x2).shape
    out = np.zeros(shape + (3, 3))
    out[..., 0, 0] = 1.0
    out[..., 1, 1] = 1.0
    out[..., 2, 2] = 1.0
    out[..., 1, 0] = np.asarray(x1, dtype=float) / t
    out[..., 2, 0] = np.asarray(x2, dtype=float) / t
    return out


def frame_psi(t, x1, x2):
    """Natural-to-frame transition matrix: frame_phi with negated off-diagonals."""
    out = frame_phi(t, x1, x2)
    out[..., 1, 0] *= -1.0
    out[..., 2, 0] *= -1.0
    return out


def psi_time_row(t, x1, x2):
    """The covector ``psi^0 = (1, -x1/t, -x2/t)``.

    Contracting a quadratic form with this on both slots gives its
    ``00`` component in the semi-hyperboloidal frame.
    """
    t = np.asarray(t, dtype=float)
    return np.stack(
        [np.ones_like(t), -np.asarray(x1, dtype=float) / t, -np.asarray(x2, dtype=float) / t],
        axis=0,
    )


# ---------------------------------------------------------------------------
# Finite-difference evaluation on smooth callables f(t, x1, x2).
#
# These helpers exist for identity checking against closed-form test
# functions; field data on grids goes through sampling.window_bundle
# instead.  All stencils are 2nd-order centered.


def _fd1(f, t, x1, x2, axis, h):
    e = [0.0, 0.0, 0.0]
    e[axis] = h
    return (f(t + e[0], x1 + e[1], x2 + e[2]) - f(t - e[0], x1 - e[1], x2 - e[2])) / (2.0 * h)


def _fd2(f, t, x1, x2, axis, h):
    e = [0.0, 0.0, 0.0]
    e[axis] = h
    return (
        f(t + e[0], x1 + e[1], x2 + e[2]) - 2.0 * f(t, x1, x2) + f(t - e[0], x1 - e[1], x2 - e[2])
    ) / (h * h)


def _fd_mixed(f, t, x1, x2, ax_a, ax_b, h):
    ea = [0.0, 0.0, 0.0]
    eb = [0.0, 0.0, 0.0]
    ea[ax_a] = h
    eb[ax_b] = h
    return (
        f(t + ea[0] + eb[0], x1 + ea[1] + eb[1], x2 + ea[2] + eb[2])
        - f(t + ea[0] - eb[0], x1 + ea[1] - eb[1], x2 + ea[2] - eb[2])
        - f(t - ea[0] + eb[0], x1 - ea[1] + eb[1], x2 - ea[2] + eb[2])
        + f(t - ea[0] - eb[0], x1 - ea[1] - eb[1], x2 - ea[2] - eb[2])
    ) / (4.0 * h * h)


def fd_dbar(f, t, x1, x2, a, h):
    """dbar_a f = (x^a/t) d_t f + d_a f by centered differences."""
    xa = (x1, x2)[a - 1]
    return (xa / t) * _fd1(f, t, x1, x2, 0, h) + _fd1(f, t, x1, x2, a, h)


def fd_boost(f, t, x1, x2, a, h):
    """L_a f = x^a d_t f + t d_a f by centered differences."""
    xa = (x1, x2)[a - 1]
    return xa * _fd1(f, t, x1, x2, 0, h) + t * _fd1(f, t, x1, x2, a, h)


def fd_box(f, t, x1, x2, h):
    """Wave operator d_t^2 - d_1^2 - d_2^2 by centered second differences."""
    return (
        _fd2(f, t, x1, x2, 0, h) - _fd2(f, t, x1, x2, 1, h) - _fd2(f, t, x1, x2, 2, h)
    )


def fd_box_semihyperboloidal(f, t, x1, x2, h):
    """The same operator through the frame decomposition.

    Evaluates ``(s/t)^2 d_t d_t f + t^{-1} A_m[f]`` where

        A_m[f] = (2 x^a/t) d_t L_a f - sum_a dbar_a L_a f
                 - (x^a/t) dbar_a f + (2 + (r/t)^2) d_t f.

    The operator-ordering in the first term is d_t applied after L_a.
    """
    r2 = x1 * x1 + x2 * x2
    st2 = (t * t - r2) / (t * t)

    def La(g, a):
        return lambda tt, y1, y2: ((y1, y2)[a - 1]) * _fd1(g, tt, y1, y2, 0, h) + tt * _fd1(
            g, tt, y1, y2, a, h
        )

    # first derivatives of L_a f via nested centered stencils
    am = 0.0
    for a in (1, 2):
        xa = (x1, x2)[a - 1]
        Lf = La(f, a)
        am += (2.0 * xa / t) * _fd1(Lf, t, x1, x2, 0, h)
        am -= (xa / t) * _fd1(Lf, t, x1, x2, 0, h) + _fd1(Lf, t, x1, x2, a, h)
        am -= (xa / t) * fd_dbar(f, t, x1, x2, a, h)
    am += (2.0 + r2 / (t * t)) * _fd1(f, t, x1, x2, 0, h)
    return st2 * _fd2(f, t, x1, x2, 0, h) + am / t


def box_decomposition_residual(f, p: SpacetimePoint, h: float) -> float:
    """|direct box f - frame-decomposed box f| at p; O(h^2) for smooth f.

    The point must sit > 3h inside the cone boundary so the widest
    nested stencil (half-width 2h) stays in the cone.
    """
    if not p.in_cone(margin=3.0 * h):
        raise DomainError(f"point {p} within 3h of the cone boundary")
    direct = fd_box(f, p.t, p.x1, p.x2, h)
    framed = fd_box_semihyperboloidal(f, p.t, p.x1, p.x2, h)
    return abs(direct - framed)


def ratio_homogeneity_samples(points, words, h):
    """Sample |d^I L^J (s/t)| / (s/t) over cone points for low-order words.

    ``words`` is an iterable of (I, J) pairs with I a tuple of axes
    (0=t, 1, 2) and J a tuple of boost axes (1 or 2); returns the list
    of ratios so a caller can report the fitted constant.
    """

    def ratio_fun(t, x1, x2):
        s, rat = to_hyperbolic(t, x1, x2)
        return rat

    out = []
    for p in points:
        base = ratio_fun(p.t, p.x1, p.x2)
        for I, J in words:
            g = ratio_fun
            for a in J:
                g = _lift_boost(g, a, h)
            val = _apply_partials(g, p.t, p.x1, p.x2, I, h)
            out.append(abs(val) / base)
    return out


def _lift_boost(g, a, h):
    return lambda t, x1, x2: fd_boost(g, t, x1, x2, a, h)


def _apply_partials(g, t, x1, x2, I, h):
    if len(I) == 0:
        return g(t, x1, x2)
    if len(I) == 1:
        return _fd1(g, t, x1, x2, I[0], h)
    if len(I) == 2:
        if I[0] == I[1]:
            return _fd2(g, t, x1, x2, I[0], h)
        return _fd_mixed(g, t, x1, x2, I[0], I[1], h)
    raise NotImplementedError("partial words capped at order 2 here")
