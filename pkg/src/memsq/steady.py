"""Steady-state branches, fold location, and analytic bounds.

For the 1-D slab the steady problem reduces, via W = 1 - w and the first
integral of W'' = mu / W^2, to two scalar relations between the boundary
values m = W(0) and M = W(1):

    1 = sqrt(m/(2 mu)) * B(m, M),
    mu = beta^2 (1-M)^2 m M / (2 (M-m)),          (Robin condition)

with B(m, M) = sqrt(M(M-m)) - (m/2) ln m + m ln(sqrt(M) + sqrt(M-m)).
The pair (m, mu) is independent of the capacitance alpha; the forcing on the
branch is lam = mu * (1 + alpha*I)^2 where I = 2L/B is the full-slab integral
of 1/W, L = ln((2M - m + 2 sqrt(M(M-m)))/m).  Eliminating mu gives the scalar
gap used for bracketing and fallback bisection:

    G(m) = sqrt(M-m) * B(m, M) - beta (1-M) sqrt(M).

Radial steady states on the ball are generated by shooting in the center
value a = w(0); the fold is located by continuation in a.
"""

from __future__ import annotations

import warnings
from dataclasses import dataclass
from functools import lru_cache

import numpy as np
from scipy.integrate import solve_ivp
from scipy.optimize import brentq

from .core import (
    Geometry,
    MeshState,
    ParameterError,
    ProblemParams,
    geometry_facts,
    unit_ball_volume,
    validate,
)
from .quadrature import composite_integral, nonlocal_gain

__all__ = [
    "BranchError",
    "BranchPoint",
    "Branch",
    "Eigenpair",
    "ThresholdReport",
    "BoundsReport",
    "RadialFold",
    "CANONICAL_M_GRID",
    "local_branch_point",
    "nonlocal_branch_point",
    "trace_branch",
    "dirichlet_limit_lambda",
    "reconstruct_profile",
    "principal_eigenpair",
    "pohozaev_lower_bound",
    "upper_bound_lambda_star",
    "mu_star_lower_bound",
    "quench_threshold_lambda",
    "pohozaev_residual",
    "radial_profile",
    "radial_fold",
    "bounds_report",
]

#: Default M sweep for fold location on the slab (step 1e-3 over [0.01, 0.99]).
CANONICAL_M_GRID = np.linspace(0.01, 0.99, 981)

_NEWTON_TOL = 1.0e-12
_NEWTON_MAXIT = 50


class BranchError(RuntimeError):
    """Raised when a steady-state solve or branch trace cannot proceed."""


@dataclass(frozen=True)
class BranchPoint:
    """One steady state: boundary values (m, M), reduced forcing mu, forcing lam."""

    M: float
    m: float
    mu: float
    lam: float


@dataclass(frozen=True)
class Branch:
    """A traced branch with its fold.

    ``fold`` is the discrete maximizer of lam over the supplied grid (the
    tested contract); ``fold_refined`` sharpens it by golden-section search
    to 1e-10 in M.  ``skipped`` lists grid values admitting no steady state.
    """

    points: tuple[BranchPoint, ...]
    fold: BranchPoint
    fold_refined: BranchPoint
    skipped: tuple[float, ...]
    fold_on_edge: bool


@dataclass(frozen=True)
class Eigenpair:
    """Principal Robin eigenpair, normalized to unit domain integral."""

    lambda1: float
    m1: float
    x: np.ndarray
    phi: np.ndarray


@dataclass(frozen=True)
class ThresholdReport:
    """Energy-based quenching threshold; lambda_tilde None when vacuous."""

    lambda_tilde: float | None
    q_alpha: float
    A_alpha: float


@dataclass(frozen=True)
class BoundsReport:
    """Collected analytic estimates for the fold lam*."""

    pohozaev_lower: float | None
    upper: float
    mu_star_lower: float | None
    lambda_tilde: float | None
    lambda1: float
    m1: float


@dataclass(frozen=True)
class RadialFold:
    """Fold of the radial branch lam(a) located by shooting continuation."""

    a: float
    mu: float
    lam: float
    integral: float


# ---------------------------------------------------------------------------
# slab branch: scalar reduction and Newton systems


def _bracket_B(m: float, M: float) -> float:
    return (
        np.sqrt(M * (M - m))
        - 0.5 * m * np.log(m)
        + m * np.log(np.sqrt(M) + np.sqrt(M - m))
    )


def _bracket_B_dm(m: float, M: float) -> float:
    root = np.sqrt(M * (M - m))
    s = np.sqrt(M) + np.sqrt(M - m)
    return (
        -M / (2.0 * root)
        - 0.5 * np.log(m)
        - 0.5
        + np.log(s)
        - m / (2.0 * np.sqrt(M - m) * s)
    )


def _scalar_gap(m: float, M: float, beta: float) -> float:
    return np.sqrt(M - m) * _bracket_B(m, M) - beta * (1.0 - M) * np.sqrt(M)


def _log_S(m: float, M: float) -> float:
    return np.log((2.0 * M - m + 2.0 * np.sqrt(M * (M - m))) / m)


def _feasible(M: float, beta: float) -> bool:
    # G(0+) = sqrt(M) * (M - beta*(1-M)) must be positive for a root to exist
    return M - beta * (1.0 - M) > 0.0


def _solve_m(M: float, beta: float) -> float:
    """Root of the scalar gap in (0, M); assumes feasibility."""
    lo, hi = 1.0e-200, M * (1.0 - 1.0e-14)
    return brentq(_scalar_gap, lo, hi, args=(M, beta), xtol=5.0e-17, rtol=8.9e-16, maxiter=200)


def _mu_of(m: float, M: float, beta: float) -> float:
    return beta**2 * (1.0 - M) ** 2 * m * M / (2.0 * (M - m))


def _slab_integral(m: float, M: float, mu: float) -> float:
    """Full-slab integral of 1/W along the profile with boundary values (m, M)."""
    return 2.0 * np.sqrt(m / (2.0 * mu)) * _log_S(m, M)


def _check_inputs(M: float, beta: float) -> None:
    if not (0.0 < M < 1.0):
        raise ParameterError(f"M must lie in (0, 1), got {M}")
    if beta <= 0.0:
        raise ParameterError(f"beta must be > 0, got {beta}")


def local_branch_point(M: float, beta: float) -> BranchPoint:
    """Solve the local (alpha = 0) slab system for (lam, m) at fixed M = W(1).

    Damped Newton with the analytic Jacobian on

        F1 = m - 2 lam M / (2 lam + M beta^2 (1-M)^2),
        F2 = sqrt(m/(2 lam)) * B(m, M) - 1,

    seeded by (and falling back to) bisection on the scalar gap G(m).

    Raises
    ------
    BranchError
        If no steady state exists at this M (the branch does not extend
        past M = beta/(1+beta)).
    """
    _check_inputs(M, beta)
    if not _feasible(M, beta):
        raise BranchError(f"no steady state at M={M} for beta={beta}")
    m = _solve_m(M, beta)
    lam = _mu_of(m, M, beta)
    c = M * beta**2 * (1.0 - M) ** 2

    def residual(lam_: float, m_: float) -> np.ndarray:
        s = np.sqrt(m_ / (2.0 * lam_))
        return np.array(
            [m_ - 2.0 * lam_ * M / (2.0 * lam_ + c), s * _bracket_B(m_, M) - 1.0]
        )

    def jacobian(lam_: float, m_: float) -> np.ndarray:
        s = np.sqrt(m_ / (2.0 * lam_))
        B = _bracket_B(m_, M)
        return np.array(
            [
                [-2.0 * M * c / (2.0 * lam_ + c) ** 2, 1.0],
                [-s * B / (2.0 * lam_), s * (B / (2.0 * m_) + _bracket_B_dm(m_, M))],
            ]
        )

    lam, m = _damped_newton_2d(residual, jacobian, lam, m, hi_m=M)
    return BranchPoint(M=float(M), m=float(m), mu=float(lam), lam=float(lam))


def _damped_newton_2d(residual, jacobian, x0: float, y0: float, hi_m: float):
    """Newton with half-step backtracking on a 2-d system in (x, y=m)."""
    x, y = x0, y0
    r = residual(x, y)
    for _ in range(_NEWTON_MAXIT):
        nr = np.max(np.abs(r))
        if nr <= _NEWTON_TOL:
            break
        try:
            dx, dy = np.linalg.solve(jacobian(x, y), -r)
        except np.linalg.LinAlgError:
            break
        step = 1.0
        for _ in range(30):
            xn, yn = x + step * dx, y + step * dy
            if xn > 0.0 and 0.0 < yn < hi_m:
                rn = residual(xn, yn)
                if np.all(np.isfinite(rn)) and np.max(np.abs(rn)) < nr:
                    x, y, r = xn, yn, rn
                    break
            step *= 0.5
        else:
            break  # no improving step; keep the seed (bisection fallback values)
    return x, y


def nonlocal_branch_point(M: float, alpha: float, beta: float) -> BranchPoint:
    """Solve the nonlocal slab system for (lam, m, mu) at fixed M = W(1).

    Damped Newton with the analytic Jacobian on

        F1 = sqrt(m/(2 mu)) * B(m, M) - 1,
        F2 = beta^2 (M-1)^2 m M / (2(M-m)) - lam * (1 + alpha I(m, mu))^(-2),
        F3 = mu - lam * (1 + alpha I(m, mu))^(-2),

    where I(m, mu) = 2 sqrt(m/(2 mu)) ln((2M - m + 2 sqrt(M(M-m)))/m) is the
    full-slab integral of 1/W.  At alpha = 0 this reduces exactly to
    ``local_branch_point``.  Seeded by bisection on the scalar gap.
    """
    _check_inputs(M, beta)
    if alpha < 0.0:
        raise ParameterError(f"alpha must be >= 0, got {alpha}")
    if not _feasible(M, beta):
        raise BranchError(f"no steady state at M={M} for beta={beta}")
    m = _solve_m(M, beta)
    mu = _mu_of(m, M, beta)
    if alpha == 0.0:
        pt = local_branch_point(M, beta)
        return pt
    I0 = _slab_integral(m, M, mu)
    lam = mu * (1.0 + alpha * I0) ** 2

    def parts(lam_: float, m_: float, mu_: float):
        s = np.sqrt(m_ / (2.0 * mu_))
        L = _log_S(m_, M)
        I = 2.0 * s * L
        P = (1.0 + alpha * I) ** (-2)
        return s, L, I, P

    def residual(v: np.ndarray) -> np.ndarray:
        lam_, m_, mu_ = v
        s, L, I, P = parts(lam_, m_, mu_)
        return np.array(
            [
                s * _bracket_B(m_, M) - 1.0,
                _mu_of(m_, M, beta) - lam_ * P,
                mu_ - lam_ * P,
            ]
        )

    def jacobian(v: np.ndarray) -> np.ndarray:
        lam_, m_, mu_ = v
        s, L, I, P = parts(lam_, m_, mu_)
        B = _bracket_B(m_, M)
        root = np.sqrt(M * (M - m_))
        S = 2.0 * M - m_ + 2.0 * root
        dL_dm = (-1.0 - M / root) / S - 1.0 / m_
        dI_dm = 2.0 * (s / (2.0 * m_) * L + s * dL_dm)
        dI_dmu = -I / (2.0 * mu_)
        dP = -2.0 * alpha * (1.0 + alpha * I) ** (-3)
        dmu_dm = beta**2 * (1.0 - M) ** 2 * M**2 / (2.0 * (M - m_) ** 2)
        return np.array(
            [
                [0.0, s * (B / (2.0 * m_) + _bracket_B_dm(m_, M)), -s * B / (2.0 * mu_)],
                [-P, dmu_dm - lam_ * dP * dI_dm, -lam_ * dP * dI_dmu],
                [-P, -lam_ * dP * dI_dm, 1.0 - lam_ * dP * dI_dmu],
            ]
        )

    v = np.array([lam, m, mu])
    r = residual(v)
    for _ in range(_NEWTON_MAXIT):
        nr = np.max(np.abs(r))
        if nr <= _NEWTON_TOL:
            break
        try:
            dv = np.linalg.solve(jacobian(v), -r)
        except np.linalg.LinAlgError:
            break
        step = 1.0
        for _ in range(30):
            vn = v + step * dv
            if vn[0] > 0.0 and 0.0 < vn[1] < M and vn[2] > 0.0:
                rn = residual(vn)
                if np.all(np.isfinite(rn)) and np.max(np.abs(rn)) < nr:
                    v, r = vn, rn
                    break
            step *= 0.5
        else:
            break
    lam, m, mu = v
    return BranchPoint(M=float(M), m=float(m), mu=float(mu), lam=float(lam))


def _lam_at(M: float, alpha: float, beta: float) -> float:
    return nonlocal_branch_point(M, alpha, beta).lam


def trace_branch(alpha: float, beta: float, M_grid: np.ndarray) -> Branch:
    """Sweep the branch over a strictly increasing M grid and locate the fold.

    Grid values admitting no steady state (M <= beta/(1+beta)) are skipped
    and recorded; at least two solvable points are required.  ``fold`` is the
    grid maximizer of lam; ``fold_refined`` golden-sections the bracketing
    triple to 1e-10 in M.  A fold on the edge of the solvable grid sets
    ``fold_on_edge`` and emits a warning.
    """
    grid = np.asarray(M_grid, dtype=float)
    if grid.ndim != 1 or grid.size < 50:
        raise ParameterError("M_grid must hold at least 50 values")
    if np.any(np.diff(grid) <= 0.0):
        raise ParameterError("M_grid must be strictly increasing")
    if grid[0] <= 0.0 or grid[-1] >= 1.0:
        raise ParameterError("M_grid must lie inside (0, 1)")

    points: list[BranchPoint] = []
    skipped: list[float] = []
    for M in grid:
        if not _feasible(M, beta):
            skipped.append(float(M))
            continue
        points.append(nonlocal_branch_point(M, alpha, beta))
    if len(points) < 2:
        raise BranchError("fewer than two solvable grid points")

    lams = np.array([p.lam for p in points])
    k = int(np.argmax(lams))
    fold = points[k]
    on_edge = k == 0 or k == len(points) - 1
    if on_edge:
        warnings.warn("fold lies on the edge of the solvable grid", stacklevel=2)
        refined = fold
    else:
        a, b = points[k - 1].M, points[k + 1].M
        Mstar = _golden_max(lambda M: _lam_at(M, alpha, beta), a, b, xtol=1.0e-10)
        refined = nonlocal_branch_point(Mstar, alpha, beta)
        if refined.lam < fold.lam:
            refined = fold
    return Branch(
        points=tuple(points),
        fold=fold,
        fold_refined=refined,
        skipped=tuple(skipped),
        fold_on_edge=on_edge,
    )


def _golden_max(f, a: float, b: float, xtol: float) -> float:
    """Golden-section maximizer of f on [a, b]."""
    invphi = (np.sqrt(5.0) - 1.0) / 2.0
    x1 = b - invphi * (b - a)
    x2 = a + invphi * (b - a)
    f1, f2 = f(x1), f(x2)
    while b - a > xtol:
        if f1 < f2:
            a, x1, f1 = x1, x2, f2
            x2 = a + invphi * (b - a)
            f2 = f(x2)
        else:
            b, x2, f2 = x2, x1, f1
            x1 = b - invphi * (b - a)
            f1 = f(x1)
    return 0.5 * (a + b)


def dirichlet_limit_lambda(m: float) -> float:
    """Forcing along the clamped (beta -> infinity) branch, parameterized by m = W(0).

    lam(m) = (m/2) [sqrt(1-m) - (m/2) ln m + m ln(1 + sqrt(1-m))]^2.
    """
    if not (0.0 < m < 1.0):
        raise ParameterError(f"m must lie in (0, 1), got {m}")
    return 0.5 * m * _bracket_B(m, 1.0) ** 2


def reconstruct_profile(point: BranchPoint, nsamples: int = 401) -> tuple[np.ndarray, np.ndarray]:
    """Invert the quadrature map x(W) to sample W(x) on a uniform grid of [0, 1].

    The forward map along the steady profile is

        x(W) = sqrt(m/(2 mu)) [sqrt(W(W-m)) - (m/2) ln m + m ln(sqrt(W) + sqrt(W-m))],

    strictly increasing from x(m) = 0 to x(M) = 1 (checked to 1e-8).  Each
    sample is recovered by bisection to machine accuracy; the deflection is
    w = 1 - W.
    """
    if nsamples < 2:
        raise ParameterError("nsamples must be at least 2")
    m, M, mu = point.m, point.M, point.mu
    coef = np.sqrt(m / (2.0 * mu))

    def xmap(W: float) -> float:
        return coef * (
            np.sqrt(W * (W - m))
            - 0.5 * m * np.log(m)
            + m * np.log(np.sqrt(W) + np.sqrt(W - m))
        )

    x_right = xmap(M)
    if abs(x_right - 1.0) > 1.0e-8:
        raise BranchError(f"branch point does not close the profile: x(M) = {x_right!r}")
    xs = np.linspace(0.0, 1.0, nsamples)
    Ws = np.empty(nsamples)
    Ws[0], Ws[-1] = m, M
    for i in range(1, nsamples - 1):
        Ws[i] = brentq(lambda W: xmap(W) - xs[i], m, M, xtol=1.0e-15, rtol=8.9e-16)
    return xs, Ws


# ---------------------------------------------------------------------------
# principal Robin eigenpair


def principal_eigenpair(
    geometry: Geometry,
    beta: float,
    dim: int = 1,
    nsamples: int = 401,
) -> Eigenpair:
    """Principal eigenpair of -Laplacian with du/dnu + beta*u = 0, unit integral.

    Slab: lambda1 = s^2 with s the root of s tan s = beta in (0, pi/2) and
    phi1 = c cos(s x), c = s / (2 sin s); m1 = phi1(1).  Ball: radial shooting
    phi'' + (N-1)/r phi' = -lambda phi with phi'(0) = 0, normalized so the
    full-ball integral is 1; m1 = phi(R).
    """
    if beta <= 0.0:
        raise ParameterError(f"beta must be > 0, got {beta}")
    if geometry.kind == "interval":
        # s*sin(s) - beta*cos(s) avoids the tangent pole at pi/2
        s = brentq(
            lambda t: t * np.sin(t) - beta * np.cos(t),
            1.0e-12,
            np.pi / 2.0 - 1.0e-14,
            xtol=1.0e-15,
            rtol=8.9e-16,
        )
        c = s / (2.0 * np.sin(s))
        x = np.linspace(0.0, 1.0, nsamples)
        phi = c * np.cos(s * x)
        return Eigenpair(lambda1=float(s * s), m1=float(c * np.cos(s)), x=x, phi=phi)

    n = int(dim)
    if n < 2:
        raise ParameterError(f"ball dimension must be >= 2, got {dim}")
    R = geometry.radius

    def hit(lam: float) -> float:
        sol = _eigen_shoot(lam, n, R)
        return sol.y[1][-1] + beta * sol.y[0][-1]

    lam_cap = (np.pi / R) ** 2 * (n + 2.0)
    lam_lo, f_lo = 1.0e-8, hit(1.0e-8)
    lam1 = None
    for lam_hi in np.linspace(lam_cap / 400.0, lam_cap, 400):
        f_hi = hit(lam_hi)
        if f_lo > 0.0 >= f_hi:
            lam1 = brentq(hit, lam_lo, lam_hi, xtol=1.0e-13, rtol=8.9e-16)
            break
        lam_lo, f_lo = lam_hi, f_hi
    if lam1 is None:
        raise BranchError("principal eigenvalue bracket not found")
    sol = _eigen_shoot(lam1, n, R)
    r = np.linspace(0.0, R, nsamples)
    phi = sol.sol(np.maximum(r, sol.t[0]))[0]
    phi[0] = sol.y[0][0]  # series value at the origin
    if phi.min() <= 0.0:
        raise BranchError("principal eigenfunction is not positive on the ball")
    total = n * unit_ball_volume(n) * composite_integral(phi, r, weight_power=n - 1)
    phi = phi / total
    return Eigenpair(lambda1=float(lam1), m1=float(phi[-1]), x=r, phi=phi)


def _eigen_shoot(lam: float, n: int, R: float):
    r0 = 1.0e-8
    y0 = [1.0 - lam * r0**2 / (2.0 * n), -lam * r0 / n]

    def rhs(r, y):
        return [y[1], -(n - 1.0) / r * y[1] - lam * y[0]]

    return solve_ivp(
        rhs, (r0, R), y0, method="DOP853", rtol=1.0e-11, atol=1.0e-13, dense_output=True
    )


# ---------------------------------------------------------------------------
# bounds


def pohozaev_lower_bound(params: ProblemParams) -> float | None:
    """Pohozaev-type fold estimate on the ball (None when N - 2(1 + beta R) <= 0).

    lam_* = beta A(dB_R) (N-2) / (N - 2(1 + beta R)) * (1 + alpha |B_R|)^2 / |B_R|,
    with A(dB_R) = N omega_N R^(N-1) and |B_R| = omega_N R^N.
    """
    validate(params)
    if not params.radial:
        raise ParameterError("pohozaev_lower_bound requires ball geometry")
    n = int(params.dim)
    R = params.geometry.radius
    if n - 2.0 * (1.0 + params.beta * R) <= 0.0:
        return None
    facts = geometry_facts(params)
    vol, area = facts.volume, facts.surface
    return (
        params.beta
        * area
        * (n - 2.0)
        / (n - 2.0 * (1.0 + params.beta * R))
        * (1.0 + params.alpha * vol) ** 2
        / vol
    )


def upper_bound_lambda_star(params: ProblemParams) -> float:
    """Eigenvalue upper estimate 2 lambda1 (1 + alpha^2 |Omega|^2) / (m1 |Omega|)."""
    validate(params)
    pair = principal_eigenpair(params.geometry, params.beta, params.dim)
    vol = geometry_facts(params).volume
    return 2.0 * pair.lambda1 * (1.0 + params.alpha**2 * vol**2) / (pair.m1 * vol)


@lru_cache(maxsize=32)
def _local_fold_lam(beta: float) -> float:
    branch = trace_branch(0.0, beta, CANONICAL_M_GRID)
    return branch.fold.lam


def mu_star_lower_bound(params: ProblemParams) -> float:
    """Existence-region estimate (1 + alpha |Omega|)^2 mu* for the slab.

    mu* is the local fold on the canonical M grid (the same convention the
    branch tracer reports), so the bound is tight at alpha = 0.
    """
    validate(params)
    if params.radial:
        raise ParameterError("mu_star_lower_bound requires interval geometry")
    mu_star = _local_fold_lam(params.beta)
    vol = geometry_facts(params).volume
    return (1.0 + params.alpha * vol) ** 2 * mu_star


def quench_threshold_lambda(
    u0: np.ndarray,
    mesh: MeshState | np.ndarray,
    params: ProblemParams,
) -> ThresholdReport:
    """Energy threshold: forcing above lambda_tilde quenches the initial state.

    q_alpha = 1 when |Omega| <= 1/(3 alpha), else 1/(3 alpha |Omega|);
    A_alpha = q_alpha - 2 alpha / (1 + alpha * I(u0));
    lambda_tilde = 2 alpha (0.5 int |grad u0|^2 + (beta/2) surface u0^2) / A_alpha,
    None (vacuous) when A_alpha <= 0.  Requires alpha > 0.
    """
    validate(params)
    if params.alpha <= 0.0:
        raise ParameterError("quench_threshold_lambda requires alpha > 0")
    u0 = np.asarray(u0, dtype=float)
    x = mesh.X if isinstance(mesh, MeshState) else np.asarray(mesh, dtype=float)
    vol = geometry_facts(params).volume
    alpha = params.alpha

    q_alpha = 1.0 if vol <= 1.0 / (3.0 * alpha) else 1.0 / (3.0 * alpha * vol)
    gain = nonlocal_gain(u0, x, params)
    A_alpha = q_alpha - 2.0 * alpha / (1.0 + alpha * gain.integral)

    ux = np.gradient(u0, x, edge_order=2)
    if params.radial:
        n = int(params.dim)
        dirichlet = 0.5 * n * unit_ball_volume(n) * composite_integral(ux**2, x, n - 1)
        boundary = 0.5 * params.beta * geometry_facts(params).surface * u0[-1] ** 2
    else:
        dirichlet = 0.5 * 2.0 * composite_integral(ux**2, x)
        boundary = 0.5 * params.beta * 2.0 * u0[-1] ** 2
    numerator = 2.0 * alpha * (dirichlet + boundary)
    lam_tilde = numerator / A_alpha if A_alpha > 0.0 else None
    return ThresholdReport(lambda_tilde=lam_tilde, q_alpha=q_alpha, A_alpha=A_alpha)


def pohozaev_residual(
    r: np.ndarray,
    w: np.ndarray,
    mu: float,
    params: ProblemParams,
) -> float:
    """Relative defect of the Pohozaev identity on a radial steady profile.

    For Delta w + mu/(1-w)^2 = 0 on B_R with the Robin condition,

        mu (N-2)/2 int_B w/(1-w)^2 - mu N int_B w/(1-w)
          = A(dB_R) [ ((N-2)/(2 beta) - R/2) w_r(R)^2 - mu R w(R)/(1-w(R)) ],

    with w_r(R) from a one-sided second-order difference on the last three
    samples.  Returns |LHS - RHS| / max(|LHS|, |RHS|).
    """
    validate(params)
    if not params.radial:
        raise ParameterError("pohozaev_residual requires ball geometry")
    n = int(params.dim)
    R = params.geometry.radius
    r = np.asarray(r, dtype=float)
    w = np.asarray(w, dtype=float)
    area = geometry_facts(params).surface
    meas = n * unit_ball_volume(n)

    lhs = mu * (n - 2.0) / 2.0 * meas * composite_integral(w / (1.0 - w) ** 2, r, n - 1)
    lhs -= mu * n * meas * composite_integral(w / (1.0 - w), r, n - 1)

    h1 = r[-1] - r[-2]
    h2 = r[-2] - r[-3]
    wr = (
        h1 / (h2 * (h1 + h2)) * w[-3]
        - (h1 + h2) / (h1 * h2) * w[-2]
        + (2.0 * h1 + h2) / (h1 * (h1 + h2)) * w[-1]
    )
    rhs = area * (
        ((n - 2.0) / (2.0 * params.beta) - R / 2.0) * wr**2
        - mu * R * w[-1] / (1.0 - w[-1])
    )
    return abs(lhs - rhs) / max(abs(lhs), abs(rhs))


# ---------------------------------------------------------------------------
# radial steady states by shooting


def _steady_shoot(a: float, mu: float, n: int, R: float, rtol: float = 1.0e-10):
    r0 = 1.0e-8
    c2 = -mu / ((1.0 - a) ** 2 * 2.0 * n)
    y0 = [a + c2 * r0**2, 2.0 * c2 * r0]

    def rhs(r, y):
        return [y[1], -(n - 1.0) / r * y[1] - mu / (1.0 - y[0]) ** 2]

    def touch(r, y):
        return 1.0 - y[0] - 1.0e-9

    touch.terminal = True
    return solve_ivp(
        rhs, (r0, R), y0, method="DOP853", rtol=rtol, atol=rtol * 1.0e-2,
        dense_output=True, events=touch,
    )


def _robin_gap_mu(mu: float, a: float, n: int, beta: float, R: float) -> float:
    sol = _steady_shoot(a, mu, n, R)
    if sol.t[-1] < R * (1.0 - 1.0e-12):
        return -1.0e6  # touched down before the boundary
    return sol.y[1][-1] + beta * sol.y[0][-1]


def _mu_at_center(a: float, n: int, beta: float, R: float, guess: float | None = None) -> float:
    """The unique mu > 0 with Robin closure for center deflection a = w(0)."""
    if guess is not None:
        lo, hi = 0.5 * guess, 2.0 * guess
        while _robin_gap_mu(lo, a, n, beta, R) <= 0.0 and lo > 1.0e-12:
            lo *= 0.5
        while _robin_gap_mu(hi, a, n, beta, R) > 0.0 and hi < 1.0e6:
            hi *= 2.0
    else:
        lo, hi = 1.0e-8, 1.0
        while _robin_gap_mu(hi, a, n, beta, R) > 0.0 and hi < 1.0e6:
            hi *= 2.0
    return brentq(_robin_gap_mu, lo, hi, args=(a, n, beta, R), xtol=1.0e-14, rtol=1.0e-12)


@lru_cache(maxsize=8)
def _radial_branch(n: int, beta: float, R: float, npts: int = 49):
    """Continuation arrays (a, mu, I) along the radial branch (alpha-free)."""
    a_grid = np.linspace(0.02, 0.985, npts)
    mus, integrals = [], []
    guess = None
    for a in a_grid:
        mu = _mu_at_center(a, n, beta, R, guess)
        guess = mu
        sol = _steady_shoot(a, mu, n, R)
        rr = np.linspace(sol.t[0], R, 2001)
        ww = sol.sol(rr)[0]
        integrals.append(n * unit_ball_volume(n) * composite_integral(1.0 / (1.0 - ww), rr, n - 1))
        mus.append(mu)
    return a_grid, np.array(mus), np.array(integrals)


def _lam_at_center(a: float, n: int, beta: float, R: float, alpha: float, guess: float) -> tuple[float, float, float]:
    mu = _mu_at_center(a, n, beta, R, guess)
    sol = _steady_shoot(a, mu, n, R)
    rr = np.linspace(sol.t[0], R, 2001)
    ww = sol.sol(rr)[0]
    integral = n * unit_ball_volume(n) * composite_integral(1.0 / (1.0 - ww), rr, n - 1)
    return mu * (1.0 + alpha * integral) ** 2, mu, integral


def radial_fold(params: ProblemParams) -> RadialFold:
    """Fold of the radial branch lam(a) = mu(a)(1 + alpha I(a))^2 on the ball.

    Continuation in the center deflection a = w(0) (shooting for mu at each
    a), discrete maximum over the a grid, then golden-section refinement.
    """
    validate(params)
    if not params.radial:
        raise ParameterError("radial_fold requires ball geometry")
    n, beta, R, alpha = int(params.dim), params.beta, params.geometry.radius, params.alpha
    a_grid, mus, integrals = _radial_branch(n, beta, R)
    lams = mus * (1.0 + alpha * integrals) ** 2
    k = int(np.argmax(lams))
    if k == 0 or k == len(a_grid) - 1:
        warnings.warn("radial fold lies on the edge of the continuation grid", stacklevel=2)
        return RadialFold(a=float(a_grid[k]), mu=float(mus[k]), lam=float(lams[k]), integral=float(integrals[k]))
    guess = mus[k]

    def lam_of(a: float) -> float:
        return _lam_at_center(a, n, beta, R, alpha, guess)[0]

    a_star = _golden_max(lam_of, a_grid[k - 1], a_grid[k + 1], xtol=1.0e-6)
    lam, mu, integral = _lam_at_center(a_star, n, beta, R, alpha, guess)
    if lam < lams[k]:
        return RadialFold(a=float(a_grid[k]), mu=float(mus[k]), lam=float(lams[k]), integral=float(integrals[k]))
    return RadialFold(a=float(a_star), mu=float(mu), lam=float(lam), integral=float(integral))


def radial_profile(
    mu: float,
    params: ProblemParams,
    nsamples: int = 2001,
) -> tuple[np.ndarray, np.ndarray]:
    """Minimal radial steady state at reduced forcing mu, by shooting in a = w(0).

    Scans the center deflection upward for the first Robin closure and
    sharpens it by bisection; raises BranchError when mu exceeds the fold.
    """
    validate(params)
    if not params.radial:
        raise ParameterError("radial_profile requires ball geometry")
    n, beta, R = int(params.dim), params.beta, params.geometry.radius

    def gap(a: float) -> float:
        sol = _steady_shoot(a, mu, n, R)
        if sol.t[-1] < R * (1.0 - 1.0e-12):
            return -1.0e6
        return sol.y[1][-1] + beta * sol.y[0][-1]

    a_prev, g_prev = 1.0e-6, gap(1.0e-6)
    a_root = None
    for a in np.linspace(0.02, 0.995, 120):
        g = gap(a)
        if g_prev < 0.0 <= g:
            a_root = brentq(gap, a_prev, a, xtol=1.0e-14, rtol=1.0e-13)
            break
        a_prev, g_prev = a, g
    if a_root is None:
        raise BranchError(f"no radial steady state at mu={mu}")
    sol = _steady_shoot(a_root, mu, n, R, rtol=1.0e-11)
    r = np.linspace(0.0, R, nsamples)
    w = sol.sol(np.maximum(r, sol.t[0]))[0]
    w[0] = a_root
    return r, w


def bounds_report(params: ProblemParams, M: int = 200) -> BoundsReport:
    """Assemble every applicable analytic estimate for the given problem."""
    validate(params)
    pair = principal_eigenpair(params.geometry, params.beta, params.dim)
    upper = upper_bound_lambda_star(params)
    pohozaev = pohozaev_lower_bound(params) if params.radial else None
    mu_lower = None if params.radial else mu_star_lower_bound(params)
    if params.alpha > 0.0:
        x = np.linspace(0.0, params.geometry.right, M + 1)
        report = quench_threshold_lambda(np.zeros(M + 1), x, params)
        lam_tilde = report.lambda_tilde
    else:
        lam_tilde = None
    return BoundsReport(
        pohozaev_lower=pohozaev,
        upper=upper,
        mu_star_lower=mu_lower,
        lambda_tilde=lam_tilde,
        lambda1=pair.lambda1,
        m1=pair.m1,
    )
