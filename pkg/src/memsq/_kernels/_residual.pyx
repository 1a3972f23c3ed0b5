# cython: boundscheck=False, wraparound=False, cdivision=True, language_level=3
"""Compiled twin of numpy_impl: dtau-scaled backward-Euler DAE residual.

Formula-for-formula identical to the vectorized reference; kept in plain C
loops so the per-call cost stays flat while the finite-difference Jacobian
evaluates the residual a few hundred times per time step.
"""

import numpy as np

cimport numpy as cnp
from libc.math cimport pow

cnp.import_array()


def simpson_weighted(const double[::1] f, const double[::1] x, int p):
    """Composite Simpson with exact nonuniform pair weights, weight x^p,
    trailing trapezoid on an odd panel count."""
    cdef Py_ssize_t n = x.shape[0] - 1
    cdef Py_ssize_t i, k
    cdef double h0, h1, h, w0, w1, w2, total = 0.0
    cdef double f0, f1, f2
    for k in range(n // 2):
        i = 2 * k
        h0 = x[i + 1] - x[i]
        h1 = x[i + 2] - x[i + 1]
        h = h0 + h1
        w0 = h * (2.0 * h0 - h1) / (6.0 * h0)
        w1 = h * h * h / (6.0 * h0 * h1)
        w2 = h * (2.0 * h1 - h0) / (6.0 * h1)
        if p:
            f0 = f[i] * pow(x[i], p)
            f1 = f[i + 1] * pow(x[i + 1], p)
            f2 = f[i + 2] * pow(x[i + 2], p)
        else:
            f0 = f[i]
            f1 = f[i + 1]
            f2 = f[i + 2]
        total += w0 * f0 + w1 * f1 + w2 * f2
    if n % 2:
        if p:
            f1 = f[n - 1] * pow(x[n - 1], p)
            f2 = f[n] * pow(x[n], p)
        else:
            f1 = f[n - 1]
            f2 = f[n]
        total += 0.5 * (x[n] - x[n - 1]) * (f1 + f2)
    return total


def residual(
    double[::1] out,
    const double[::1] z,
    const double[::1] u_prev,
    const double[::1] x_prev,
    double t_prev,
    double dtau,
    double lam,
    double alpha,
    double beta,
    int ndim,
    bint radial,
    double epsilon,
    double floor,
    bint smooth,
    double gcoef,
    bint freeze,
):
    """Fill ``out`` with the dtau-scaled backward-Euler DAE residual at z."""
    cdef Py_ssize_t Mn = u_prev.shape[0] - 1
    cdef double dxi = 1.0 / Mn
    cdef double t_new = z[0]
    cdef Py_ssize_t i

    u_arr = np.empty(Mn + 1)
    x_arr = np.empty(Mn + 1)
    mon_arr = np.empty(Mn + 1)
    ms_arr = np.empty(Mn + 1)
    f_arr = np.empty(Mn + 1)
    cdef double[::1] u = u_arr
    cdef double[::1] x = x_arr
    cdef double[::1] mon = mon_arr
    cdef double[::1] ms = ms_arr
    cdef double[::1] f = f_arr

    for i in range(Mn):
        u[i] = z[1 + i]
    x[0] = x_prev[0]
    for i in range(1, Mn):
        x[i] = z[Mn + i]
    x[Mn] = x_prev[Mn]
    u[Mn] = u[Mn - 1] / (1.0 + beta * (x[Mn] - x[Mn - 1]))

    cdef double one, mmax = 0.0
    for i in range(Mn + 1):
        one = 1.0 - u[i]
        mon[i] = 1.0 / (one * one) + floor
        if mon[i] > mmax:
            mmax = mon[i]
    cdef double g = 1.0 / mmax

    if smooth:
        ms[0] = mon[0]
        ms[Mn] = mon[Mn]
        for i in range(1, Mn):
            ms[i] = 0.25 * mon[i - 1] + 0.5 * mon[i] + 0.25 * mon[i + 1]
    else:
        for i in range(Mn + 1):
            ms[i] = mon[i]

    cdef int p = ndim - 1 if radial else 0
    for i in range(Mn + 1):
        f[i] = 1.0 / (1.0 - u[i])
    cdef double integral = gcoef * simpson_weighted(f, x, p)
    cdef double K = (1.0 + alpha * integral) * (1.0 + alpha * integral)
    for i in range(Mn + 1):
        one = 1.0 - u[i]
        f[i] = lam / (one * one * K)

    out[0] = (t_new - t_prev) - dtau * g

    cdef double h0 = x[1] - x[0]
    cdef double lap0 = 2.0 * (u[1] - u[0]) / (h0 * h0)
    cdef double fac0 = <double> ndim if radial else 1.0
    out[1] = (u[0] - u_prev[0]) - dtau * g * (fac0 * lap0 + f[0])

    cdef double hi, hip, dxu, lap, rad, dxm, dxp, phi
    for i in range(1, Mn):
        hi = x[i] - x[i - 1]
        hip = x[i + 1] - x[i]
        dxu = (u[i + 1] - u[i - 1]) / (x[i + 1] - x[i - 1])
        lap = 2.0 * ((u[i + 1] - u[i]) / hip - (u[i] - u[i - 1]) / hi) / (hi + hip)
        rad = (ndim - 1.0) * dxu / x[i] if radial else 0.0
        out[1 + i] = (
            (u[i] - u_prev[i]) - dxu * (x[i] - x_prev[i]) - dtau * g * (lap + rad + f[i])
        )

    if freeze:
        for i in range(1, Mn):
            out[Mn + i] = x[i] - x_prev[i]
    else:
        for i in range(1, Mn):
            dxm = (x[i] - x_prev[i]) - (x[i - 1] - x_prev[i - 1])
            dxp = (x[i + 1] - x_prev[i + 1]) - (x[i] - x_prev[i])
            phi = (
                (ms[i + 1] + ms[i]) * (x[i + 1] - x[i])
                - (ms[i] + ms[i - 1]) * (x[i] - x[i - 1])
            ) / (2.0 * dxi * dxi)
            out[Mn + i] = -(dxp - dxm) / (dxi * dxi) - dtau * (g / epsilon) * phi
