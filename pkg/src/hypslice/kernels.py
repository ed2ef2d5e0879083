"""Numba stencil kernels for the leapfrog cores.

All updates are fused single passes (laplacian + nonlinear RHS + level
combination + running max for blow-up detection) to keep memory traffic
at one read of each input level and one write of the output.  The
5-point laplacian fixes the CFL constant dt <= h/sqrt(2).

Time-derivative modes for the model RHS:
  mode 0: first step, 2-level backward difference
  mode 1: predictor, 2nd-order one-sided backward (levels n, n-1, n-2)
  mode 2: corrector, centered using a predicted n+1 level
"""

from __future__ import annotations

import numpy as np
from numba import njit, prange

_KW = dict(parallel=True, fastmath=True, cache=True)


@njit(**_KW)
def linear_step(out, u1, u0, forcing, has_forcing, dt2, ih2, csq):
    """out = 2 u1 - u0 + dt^2 (lap u1 - csq u1 [+ forcing]); returns max|out|."""
    n = u1.shape[0]
    mx = 0.0
    for i in prange(1, n - 1):
        row_mx = 0.0
        for j in range(1, n - 1):
            lap = (u1[i - 1, j] + u1[i + 1, j] + u1[i, j - 1] + u1[i, j + 1] - 4.0 * u1[i, j]) * ih2
            val = 2.0 * u1[i, j] - u0[i, j] + dt2 * (lap - csq * u1[i, j])
            if has_forcing:
                val += dt2 * forcing[i, j]
            out[i, j] = val
            a = abs(val)
            if a > row_mx:
                row_mx = a
        if row_mx > mx:
            mx = row_mx
    return mx


@njit(**_KW)
def model_step(
    uo, u1, u0, um, up,
    vo, v1, v0, vm, vp,
    mode, dt, dt2, ih2, i2h,
    a1, a3, a5, b2, a4, b3, k2c, csq,
):
    """One fused model-system update writing levels n+1 for u and v.

    u obeys box u = F1, v obeys box v + csq v = F2 with
      F1 = A1 du du + A3 du dv + (A4.du) v + B2 dv dv + (B3.dv) v + k2c v^2
      F2 = A5 du du
    du = (d_t u, d_1 u, d_2 u) at level n; the time slot depends on mode.
    Returns max(|u^{n+1}|, |v^{n+1}|).
    """
    n = u1.shape[0]
    mx = 0.0
    for i in prange(2, n - 2):
        row_mx = 0.0
        for j in range(2, n - 2):
            lap_u = (u1[i - 1, j] + u1[i + 1, j] + u1[i, j - 1] + u1[i, j + 1] - 4.0 * u1[i, j]) * ih2
            lap_v = (v1[i - 1, j] + v1[i + 1, j] + v1[i, j - 1] + v1[i, j + 1] - 4.0 * v1[i, j]) * ih2

            if mode == 0:
                ut = (u1[i, j] - u0[i, j]) / dt
                vt = (v1[i, j] - v0[i, j]) / dt
            elif mode == 1:
                ut = (3.0 * u1[i, j] - 4.0 * u0[i, j] + um[i, j]) / (2.0 * dt)
                vt = (3.0 * v1[i, j] - 4.0 * v0[i, j] + vm[i, j]) / (2.0 * dt)
            else:
                ut = (up[i, j] - u0[i, j]) / (2.0 * dt)
                vt = (vp[i, j] - v0[i, j]) / (2.0 * dt)

            ux = (u1[i, j + 1] - u1[i, j - 1]) * i2h
            uy = (u1[i + 1, j] - u1[i - 1, j]) * i2h
            vx = (v1[i, j + 1] - v1[i, j - 1]) * i2h
            vy = (v1[i + 1, j] - v1[i - 1, j]) * i2h
            v = v1[i, j]

            f1 = 0.0
            f2 = 0.0
            du0 = ut
            du1 = ux
            du2 = uy
            dv0 = vt
            dv1 = vx
            dv2 = vy
            # quadratic forms, unrolled 3x3 row-major
            f1 += a1[0] * du0 * du0 + a1[1] * du0 * du1 + a1[2] * du0 * du2
            f1 += a1[3] * du1 * du0 + a1[4] * du1 * du1 + a1[5] * du1 * du2
            f1 += a1[6] * du2 * du0 + a1[7] * du2 * du1 + a1[8] * du2 * du2
            f1 += a3[0] * du0 * dv0 + a3[1] * du0 * dv1 + a3[2] * du0 * dv2
            f1 += a3[3] * du1 * dv0 + a3[4] * du1 * dv1 + a3[5] * du1 * dv2
            f1 += a3[6] * du2 * dv0 + a3[7] * du2 * dv1 + a3[8] * du2 * dv2
            f1 += b2[0] * dv0 * dv0 + b2[1] * dv0 * dv1 + b2[2] * dv0 * dv2
            f1 += b2[3] * dv1 * dv0 + b2[4] * dv1 * dv1 + b2[5] * dv1 * dv2
            f1 += b2[6] * dv2 * dv0 + b2[7] * dv2 * dv1 + b2[8] * dv2 * dv2
            f1 += v * (a4[0] * du0 + a4[1] * du1 + a4[2] * du2)
            f1 += v * (b3[0] * dv0 + b3[1] * dv1 + b3[2] * dv2)
            f1 += k2c * v * v
            f2 += a5[0] * du0 * du0 + a5[1] * du0 * du1 + a5[2] * du0 * du2
            f2 += a5[3] * du1 * du0 + a5[4] * du1 * du1 + a5[5] * du1 * du2
            f2 += a5[6] * du2 * du0 + a5[7] * du2 * du1 + a5[8] * du2 * du2

            un = 2.0 * u1[i, j] - u0[i, j] + dt2 * (lap_u + f1)
            vn = 2.0 * v1[i, j] - v0[i, j] + dt2 * (lap_v - csq * v + f2)
            uo[i, j] = un
            vo[i, j] = vn
            a = abs(un)
            b = abs(vn)
            if b > a:
                a = b
            if a > row_mx:
                row_mx = a
        if row_mx > mx:
            mx = row_mx
    return mx


@njit(**_KW)
def zakharov_step(uo, u1, u0, e1o, e11, e10, e2o, e21, e20, dt2, ih2):
    """Concrete Klein-Gordon--Zakharov update: box E + E = E lap u, box u = |E|^2."""
    n = u1.shape[0]
    mx = 0.0
    for i in prange(1, n - 1):
        row_mx = 0.0
        for j in range(1, n - 1):
            lap_u = (u1[i - 1, j] + u1[i + 1, j] + u1[i, j - 1] + u1[i, j + 1] - 4.0 * u1[i, j]) * ih2
            lap_1 = (e11[i - 1, j] + e11[i + 1, j] + e11[i, j - 1] + e11[i, j + 1] - 4.0 * e11[i, j]) * ih2
            lap_2 = (e21[i - 1, j] + e21[i + 1, j] + e21[i, j - 1] + e21[i, j + 1] - 4.0 * e21[i, j]) * ih2
            p = e11[i, j]
            q = e21[i, j]
            un = 2.0 * u1[i, j] - u0[i, j] + dt2 * (lap_u + p * p + q * q)
            pn = 2.0 * p - e10[i, j] + dt2 * (lap_1 - p + p * lap_u)
            qn = 2.0 * q - e20[i, j] + dt2 * (lap_2 - q + q * lap_u)
            uo[i, j] = un
            e1o[i, j] = pn
            e2o[i, j] = qn
            a = abs(un)
            if abs(pn) > a:
                a = abs(pn)
            if abs(qn) > a:
                a = abs(qn)
            if a > row_mx:
                row_mx = a
        if row_mx > mx:
            mx = row_mx
    return mx


@njit(**_KW)
def zakharov_scalar_step(
    uo, u1, u0, um, up,
    vo, v1, v0, vm, vp,
    mode, dt, dt2, ih2,
    pform,
):
    """Scalar variant: box u = v^2, box v + v = v P^{ab} d_a d_b u.

    The Hessian of u needs d_t d_t u; modes as in model_step (the
    corrector recomputes it centered from the predicted level).
    """
    n = u1.shape[0]
    mx = 0.0
    idt2 = 1.0 / dt2
    h = 1.0 / np.sqrt(ih2)
    for i in prange(2, n - 2):
        row_mx = 0.0
        for j in range(2, n - 2):
            lap_u = (u1[i - 1, j] + u1[i + 1, j] + u1[i, j - 1] + u1[i, j + 1] - 4.0 * u1[i, j]) * ih2
            lap_v = (v1[i - 1, j] + v1[i + 1, j] + v1[i, j - 1] + v1[i, j + 1] - 4.0 * v1[i, j]) * ih2
            v = v1[i, j]

            # spatial hessian of u at level n
            uxx = (u1[i, j + 1] - 2.0 * u1[i, j] + u1[i, j - 1]) * ih2
            uyy = (u1[i + 1, j] - 2.0 * u1[i, j] + u1[i - 1, j]) * ih2
            uxy = (u1[i + 1, j + 1] - u1[i + 1, j - 1] - u1[i - 1, j + 1] + u1[i - 1, j - 1]) * ih2 * 0.25

            if mode == 0:
                # first step: no second difference available; use the PDE
                # box u = v^2 to trade d_t d_t for lap + v^2
                utt = lap_u + v * v
                utx = ((u1[i, j + 1] - u0[i, j + 1]) - (u1[i, j - 1] - u0[i, j - 1])) / (2.0 * h * dt)
                uty = ((u1[i + 1, j] - u0[i + 1, j]) - (u1[i - 1, j] - u0[i - 1, j])) / (2.0 * h * dt)
            elif mode == 1:
                utt = (u1[i, j] - 2.0 * u0[i, j] + um[i, j]) * idt2
                utx = ((u1[i, j + 1] - u0[i, j + 1]) - (u1[i, j - 1] - u0[i, j - 1])) / (2.0 * h * dt)
                uty = ((u1[i + 1, j] - u0[i + 1, j]) - (u1[i - 1, j] - u0[i - 1, j])) / (2.0 * h * dt)
            else:
                utt = (up[i, j] - 2.0 * u1[i, j] + u0[i, j]) * idt2
                utx = ((up[i, j + 1] - u0[i, j + 1]) - (up[i, j - 1] - u0[i, j - 1])) / (4.0 * h * dt)
                uty = ((up[i + 1, j] - u0[i + 1, j]) - (up[i - 1, j] - u0[i - 1, j])) / (4.0 * h * dt)

            pc = (
                pform[0] * utt + pform[1] * utx + pform[2] * uty
                + pform[3] * utx + pform[4] * uxx + pform[5] * uxy
                + pform[6] * uty + pform[7] * uxy + pform[8] * uyy
            )
            un = 2.0 * u1[i, j] - u0[i, j] + dt2 * (lap_u + v * v)
            vn = 2.0 * v1[i, j] - v0[i, j] + dt2 * (lap_v - v + v * pc)
            uo[i, j] = un
            vo[i, j] = vn
            a = abs(un)
            if abs(vn) > a:
                a = abs(vn)
            if a > row_mx:
                row_mx = a
        if row_mx > mx:
            mx = row_mx
    return mx


@njit(**_KW)
def masked_abs_max(field, x0, h, r2_lo, r2_hi):
    """max |field| over nodes with r2_lo <= x^2+y^2 < r2_hi."""
    n = field.shape[0]
    mx = 0.0
    for i in prange(n):
        y = x0 + i * h
        row_mx = 0.0
        for j in range(n):
            x = x0 + j * h
            r2 = x * x + y * y
            if r2_lo <= r2 < r2_hi:
                a = abs(field[i, j])
                if a > row_mx:
                    row_mx = a
        if row_mx > mx:
            mx = row_mx
    return mx
