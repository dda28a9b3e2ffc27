"""Scalar kernels for the example systems.

Flat coordinate order follows ``(x, g)``:

* charged particle: ``(q1, q2, q3, theta)``
* pendulum: ``(phi1, vtheta2, phi2, vtheta1)``

Every discrete kernel takes the step in increment form ``(u0, du)`` with
``u1 = u0 + du`` so the velocity ``du / h`` never suffers the cancellation
of ``u1 - u0``.  The gradient kernels are written to accept complex input,
which gives their Jacobians with respect to ``du`` by the complex-step
method, accurate to round-off.
"""
from __future__ import annotations

import numpy as np

from .._jit import njit

# --------------------------------------------------------------------------
# charged particle, Kaluza-Klein form; c = (m, B0)


@njit
def charged_ld(u0, du, h, c):
    m, b = c[0], c[1]
    a1 = -0.5 * b * u0[1]
    a2 = 0.5 * b * u0[0]
    s = a1 * du[0] + a2 * du[1] + du[3]
    kin = du[0] * du[0] + du[1] * du[1] + du[2] * du[2]
    return 0.5 * m * kin / h + 0.5 * s * s / h


@njit
def charged_grad(u0, du, h, c):
    m, b = c[0], c[1]
    a1 = -0.5 * b * u0[1]
    a2 = 0.5 * b * u0[0]
    s = (a1 * du[0] + a2 * du[1] + du[3]) / h
    d1 = np.zeros_like(du)
    d2 = np.zeros_like(du)
    d2[0] = m * du[0] / h + s * a1
    d2[1] = m * du[1] / h + s * a2
    d2[2] = m * du[2] / h
    d2[3] = s
    # d(A(q0).dq)/dq0 = (B0/2)(dq2, -dq1, 0)
    d1[0] = -d2[0] + s * 0.5 * b * du[1]
    d1[1] = -d2[1] - s * 0.5 * b * du[0]
    d1[2] = -d2[2]
    d1[3] = -s
    return d1, d2


# --------------------------------------------------------------------------
# double spherical pendulum; c = (A, B, K, G1, G2) with
# A = (m1+m2) l1^2, B = m2 l2^2, K = m2 l1 l2, G1 = g (m1+m2) l1, G2 = g m2 l2


@njit
def pendulum_l(q, v, c):
    A, B, K, G1, G2 = c[0], c[1], c[2], c[3], c[4]
    s1, c1 = np.sin(q[0]), np.cos(q[0])
    s2, c2 = np.sin(q[2]), np.cos(q[2])
    d = -2.0 * q[1]
    sd, cd = np.sin(d), np.cos(d)
    f1, f2 = v[0], v[2]
    t1 = v[3] - v[1]
    t2 = v[3] + v[1]
    T = 0.5 * A * (f1 * f1 + t1 * t1 * s1 * s1) + 0.5 * B * (f2 * f2 + t2 * t2 * s2 * s2)
    T += K * (
        f1 * f2 * (s1 * s2 + c1 * c2 * cd)
        + f1 * t2 * c1 * s2 * sd
        - f2 * t1 * s1 * c2 * sd
        + t1 * t2 * s1 * s2 * cd
    )
    return T - G1 * c1 - G2 * c2


@njit
def pendulum_partials(q, v, c):
    """``(dL/dq, dL/dv)`` of the continuous Lagrangian."""
    A, B, K, G1, G2 = c[0], c[1], c[2], c[3], c[4]
    s1, c1 = np.sin(q[0]), np.cos(q[0])
    s2, c2 = np.sin(q[2]), np.cos(q[2])
    d = -2.0 * q[1]
    sd, cd = np.sin(d), np.cos(d)
    f1, f2 = v[0], v[2]
    t1 = v[3] - v[1]
    t2 = v[3] + v[1]
    C = s1 * s2 + c1 * c2 * cd

    Tf1 = A * f1 + K * (f2 * C + t2 * c1 * s2 * sd)
    Tf2 = B * f2 + K * (f1 * C - t1 * s1 * c2 * sd)
    Tt1 = A * t1 * s1 * s1 + K * (-f2 * s1 * c2 * sd + t2 * s1 * s2 * cd)
    Tt2 = B * t2 * s2 * s2 + K * (f1 * c1 * s2 * sd + t1 * s1 * s2 * cd)

    Tp1 = A * t1 * t1 * s1 * c1 + K * (
        f1 * f2 * (c1 * s2 - s1 * c2 * cd)
        - f1 * t2 * s1 * s2 * sd
        - f2 * t1 * c1 * c2 * sd
        + t1 * t2 * c1 * s2 * cd
    )
    Tp2 = B * t2 * t2 * s2 * c2 + K * (
        f1 * f2 * (s1 * c2 - c1 * s2 * cd)
        + f1 * t2 * c1 * c2 * sd
        + f2 * t1 * s1 * s2 * sd
        + t1 * t2 * s1 * c2 * cd
    )
    Td = K * (
        -f1 * f2 * c1 * c2 * sd
        + f1 * t2 * c1 * s2 * cd
        - f2 * t1 * s1 * c2 * cd
        - t1 * t2 * s1 * s2 * sd
    )

    lq = np.zeros_like(v)
    lv = np.zeros_like(v)
    lq[0] = Tp1 + G1 * s1
    lq[1] = -2.0 * Td
    lq[2] = Tp2 + G2 * s2
    lq[3] = 0.0
    lv[0] = Tf1
    lv[1] = Tt2 - Tt1
    lv[2] = Tf2
    lv[3] = Tt1 + Tt2
    return lq, lv


@njit
def midpoint_ld(u0, du, h, c):
    return h * pendulum_l(u0 + 0.5 * du, du / h, c)


@njit
def midpoint_grad(u0, du, h, c):
    lq, lv = pendulum_partials(u0 + 0.5 * du, du / h, c)
    hq = 0.5 * h * lq
    return hq - lv, hq + lv


CSTEP = 1e-30


@njit
def charged_hess(u0, du, h, c):
    """``(dD1/d du, dD2/d du)``."""
    n = du.shape[0]
    j1 = np.empty((n, n))
    j2 = np.empty((n, n))
    z0 = u0 + 0j
    for k in range(n):
        z = du + 0j
        z[k] += CSTEP * 1j
        d1, d2 = charged_grad(z0, z, h, c)
        j1[:, k] = d1.imag / CSTEP
        j2[:, k] = d2.imag / CSTEP
    return j1, j2


@njit
def midpoint_hess(u0, du, h, c):
    n = du.shape[0]
    j1 = np.empty((n, n))
    j2 = np.empty((n, n))
    z0 = u0 + 0j
    for k in range(n):
        z = du + 0j
        z[k] += CSTEP * 1j
        d1, d2 = midpoint_grad(z0, z, h, c)
        j1[:, k] = d1.imag / CSTEP
        j2[:, k] = d2.imag / CSTEP
    return j1, j2
