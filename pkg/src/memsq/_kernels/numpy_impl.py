"""Vectorized reference implementation of the hot residual kernel.

The compiled twin in ``_residual.pyx`` mirrors these formulas loop-for-loop;
parity between the two backends is asserted by the test suite.  The free
unknown layout is

    z = [t, u_0 .. u_{M-1}, X_1 .. X_{M-1}]            (length 2M)

with u_M eliminated through the discrete Robin relation
u_M = u_{M-1} / (1 + beta (X_M - X_{M-1})) and the end nodes X_0, X_M pinned.
The residual is the dtau-scaled backward-Euler system: all terms are
evaluated at the trial state (fully implicit).
"""

from __future__ import annotations

import numpy as np


def simpson_weighted(f: np.ndarray, x: np.ndarray, p: int) -> float:
    """Composite Simpson with exact nonuniform pair weights, weight x^p,
    trailing trapezoid on an odd panel count."""
    if p:
        f = f * x**p
    n = x.size - 1
    total = 0.0
    npairs = n // 2
    if npairs:
        i = 2 * np.arange(npairs)
        h0 = x[i + 1] - x[i]
        h1 = x[i + 2] - x[i + 1]
        h = h0 + h1
        w0 = h * (2.0 * h0 - h1) / (6.0 * h0)
        w1 = h**3 / (6.0 * h0 * h1)
        w2 = h * (2.0 * h1 - h0) / (6.0 * h1)
        total = float(np.sum(w0 * f[i] + w1 * f[i + 1] + w2 * f[i + 2]))
    if n % 2:
        total += 0.5 * (x[-1] - x[-2]) * (f[-1] + f[-2])
    return total


def residual(
    out: np.ndarray,
    z: np.ndarray,
    u_prev: np.ndarray,
    x_prev: np.ndarray,
    t_prev: float,
    dtau: float,
    lam: float,
    alpha: float,
    beta: float,
    ndim: int,
    radial: bool,
    epsilon: float,
    floor: float,
    smooth: bool,
    gcoef: float,
    freeze: bool,
) -> None:
    """Fill ``out`` with the dtau-scaled backward-Euler DAE residual at z."""
    Mn = u_prev.size - 1
    dxi = 1.0 / Mn
    t_new = z[0]

    u = np.empty(Mn + 1)
    x = np.empty(Mn + 1)
    u[:Mn] = z[1 : Mn + 1]
    x[0] = x_prev[0]
    x[1:Mn] = z[Mn + 1 : 2 * Mn]
    x[Mn] = x_prev[Mn]
    u[Mn] = u[Mn - 1] / (1.0 + beta * (x[Mn] - x[Mn - 1]))

    one = 1.0 - u
    mon = one**-2 + floor
    g = 1.0 / mon.max()
    if smooth:
        ms = mon.copy()
        ms[1:-1] = 0.25 * mon[:-2] + 0.5 * mon[1:-1] + 0.25 * mon[2:]
    else:
        ms = mon

    p = ndim - 1 if radial else 0
    integral = gcoef * simpson_weighted(1.0 / one, x, p)
    K = (1.0 + alpha * integral) ** 2
    f = lam / (one * one * K)

    out[0] = (t_new - t_prev) - dtau * g

    h = np.diff(x)
    lap0 = 2.0 * (u[1] - u[0]) / (h[0] * h[0])
    fac0 = float(ndim) if radial else 1.0
    out[1] = (u[0] - u_prev[0]) - dtau * g * (fac0 * lap0 + f[0])

    i = np.arange(1, Mn)
    hi = h[i - 1]
    hip = h[i]
    dxu = (u[i + 1] - u[i - 1]) / (x[i + 1] - x[i - 1])
    lap = 2.0 * ((u[i + 1] - u[i]) / hip - (u[i] - u[i - 1]) / hi) / (hi + hip)
    rad = (ndim - 1.0) * dxu / x[i] if radial else 0.0
    out[1 + i] = (
        (u[i] - u_prev[i]) - dxu * (x[i] - x_prev[i]) - dtau * g * (lap + rad + f[i])
    )

    if freeze:
        out[Mn + i] = x[i] - x_prev[i]
    else:
        dX = x - x_prev  # pinned ends contribute zero
        lapxi = (dX[i + 1] - 2.0 * dX[i] + dX[i - 1]) / dxi**2
        phi = (
            (ms[i + 1] + ms[i]) * (x[i + 1] - x[i])
            - (ms[i] + ms[i - 1]) * (x[i] - x[i - 1])
        ) / (2.0 * dxi**2)
        out[Mn + i] = -lapxi - dtau * (g / epsilon) * phi
