"""Trajectory post-processing: energy ledger, touchdown time and rate fits.

Touchdown of the deflection (max u reaching 1) follows the one-third law
1 - max u ~ C (T_q - t)^(1/3), so the cube of the gap is asymptotically
linear in t and T_q drops out of a plain linear fit.  All fits share one
window rule: the decade of 1 - max u nearest touchdown, widened until it
holds at least MIN_FIT_POINTS ledger rows, always excluding the final
TAIL_EXCLUDE rows where the mesh resolution limits the ledger.
"""

from __future__ import annotations

from dataclasses import dataclass, replace
from typing import TYPE_CHECKING

import numpy as np

from .core import MeshState, ParameterError, ProblemParams, geometry_facts, validate
from .quadrature import composite_integral, nonlocal_gain

if TYPE_CHECKING:
    from .evolve import Trajectory

__all__ = [
    "MIN_FIT_POINTS",
    "TAIL_EXCLUDE",
    "POOR_FIT_R2",
    "EnergyRecord",
    "FitWindow",
    "ProfileFit",
    "SinglePointCheck",
    "QuenchReport",
    "energy",
    "detect_and_extrapolate",
    "fit_rate",
    "profile_fit",
    "largest_initial_constant",
    "single_point_check",
    "quench_report",
]

MIN_FIT_POINTS = 20
TAIL_EXCLUDE = 3
POOR_FIT_R2 = 0.999


@dataclass(frozen=True)
class EnergyRecord:
    """Energy split E = dirichlet + boundary + nonlocal at one instant."""

    t: float
    dirichlet_part: float
    boundary_part: float
    nonlocal_part: float

    @property
    def total(self) -> float:
        return self.dirichlet_part + self.boundary_part + self.nonlocal_part


@dataclass(frozen=True)
class FitWindow:
    """Half-open ledger index range [start, stop) used by the fits."""

    start: int
    stop: int
    t0: float
    t1: float

    @property
    def npoints(self) -> int:
        return self.stop - self.start


@dataclass(frozen=True)
class ProfileFit:
    """Least-squares constant of 1-u against (r^2/|ln r|)^(1/3)."""

    constant: float
    residual: float
    window: tuple[float, float]
    npoints: int


@dataclass(frozen=True)
class SinglePointCheck:
    """Outcome of the pointwise barrier 1-u >= Ck * r^k away from r = 0."""

    passed: bool
    margin: float
    constant: float
    exponent: float


@dataclass(frozen=True)
class QuenchReport:
    """Touchdown summary: extrapolated time, location, and fitted laws."""

    quenched: bool
    Tq: float
    x_star: float
    r_squared: float
    poor_fit: bool
    fit_window: FitWindow
    rate_exponent: float | None = None
    rate_constant: float | None = None
    profile_constant: float | None = None
    profile_residual: float | None = None


def energy(
    u: np.ndarray,
    mesh: MeshState | np.ndarray,
    params: ProblemParams,
    t: float = 0.0,
) -> EnergyRecord:
    """Full-domain energy split at a nodal state.

    The gradient part uses the centered nonuniform first-derivative stencil
    (one-sided at the ends); the boundary part is beta/2 times the boundary
    integral of u^2 (two symmetric points for the slab, the sphere area for
    the ball).  For alpha > 0 the capacitance part is (lam/alpha)/H with
    H = 1 + alpha * integral of 1/(1-u); at alpha = 0 that expression is
    undefined and the local Lyapunov potential -lam * integral of 1/(1-u)
    takes its place, for which only monotone decrease is meaningful.
    """
    validate(params)
    x = mesh.X if isinstance(mesh, MeshState) else np.asarray(mesh, dtype=float)
    u = np.asarray(u, dtype=float)
    gain = nonlocal_gain(u, x, params)
    ux = np.gradient(u, x, edge_order=2)
    facts = geometry_facts(params)
    if params.radial:
        n = int(params.dim)
        # full-ball measure N*omega_N on the r^(N-1)-weighted radial integral
        sphere = facts.surface / x[-1] ** (n - 1)
        dirichlet = 0.5 * sphere * composite_integral(ux * ux, x, weight_power=n - 1)
        boundary = 0.5 * params.beta * facts.surface * u[-1] ** 2
    else:
        dirichlet = composite_integral(ux * ux, x)
        boundary = params.beta * u[-1] ** 2
    if params.alpha > 0.0:
        nonlocal_part = (params.lam / params.alpha) / gain.H
    else:
        nonlocal_part = -params.lam * gain.integral
    return EnergyRecord(
        t=t,
        dirichlet_part=float(dirichlet),
        boundary_part=float(boundary),
        nonlocal_part=float(nonlocal_part),
    )


def _fit_window(t: np.ndarray, v: np.ndarray, min_points: int) -> FitWindow:
    """Decade window of v nearest touchdown, excluding the resolution tail."""
    stop = t.size - TAIL_EXCLUDE
    if stop < 2:
        raise ParameterError("ledger too short for a fit window")
    v_end = v[stop - 1]
    if v_end <= 0.0:
        raise ParameterError("ledger reaches 1 - max u <= 0; cannot fit")
    decade = 10.0
    while True:
        idx = np.nonzero(v[:stop] <= decade * v_end)[0]
        if idx.size >= min_points or (idx.size and idx[0] == 0):
            break
        decade *= 10.0
    if idx.size < min_points:
        raise ParameterError(
            f"only {idx.size} ledger points available; need {min_points}"
        )
    start = int(idx[0])
    return FitWindow(start=start, stop=stop, t0=float(t[start]), t1=float(t[stop - 1]))


def _linear_fit(x: np.ndarray, y: np.ndarray) -> tuple[float, float, float]:
    slope, intercept = np.polyfit(x, y, 1)
    fitted = intercept + slope * x
    ss_res = float(np.sum((y - fitted) ** 2))
    ss_tot = float(np.sum((y - y.mean()) ** 2))
    r2 = 1.0 - ss_res / ss_tot if ss_tot > 0.0 else 1.0
    return float(slope), float(intercept), r2


def detect_and_extrapolate(traj: "Trajectory") -> QuenchReport:
    """Extrapolate the touchdown time from the cube of the ledger gap.

    Under the one-third law (1 - max u)^3 is linear in t, so T_q is the
    zero crossing of a linear fit over the shared window.  The report flags
    a poor fit when R^2 < POOR_FIT_R2; the location x_star is the arg-max
    node of the final snapshot.
    """
    if traj.status != "quenched":
        raise ParameterError(f"trajectory status is {traj.status!r}, not quenched")
    t = np.asarray(traj.t, dtype=float)
    v = 1.0 - np.asarray(traj.umax, dtype=float)
    window = _fit_window(t, v, MIN_FIT_POINTS)
    sl = slice(window.start, window.stop)
    slope, intercept, r2 = _linear_fit(t[sl], v[sl] ** 3)
    if slope >= 0.0:
        raise ParameterError("ledger gap is not shrinking; no touchdown to date")
    Tq = max(-intercept / slope, float(t[-1]))
    snap = traj.snapshots[-1]
    x_star = float(snap.X[int(np.argmax(snap.u))])
    return QuenchReport(
        quenched=True,
        Tq=Tq,
        x_star=x_star,
        r_squared=r2,
        poor_fit=r2 < POOR_FIT_R2,
        fit_window=window,
    )


def fit_rate(traj: "Trajectory", Tq: float) -> tuple[float, float]:
    """Least-squares exponent and constant of 1 - max u ~ C (Tq - t)^gamma.

    Fits log gap against log remaining time over the shared window; rows
    with t >= Tq are skipped (they carry no remaining time).
    """
    t = np.asarray(traj.t, dtype=float)
    v = 1.0 - np.asarray(traj.umax, dtype=float)
    window = _fit_window(t, v, MIN_FIT_POINTS)
    sl = slice(window.start, window.stop)
    rem = Tq - t[sl]
    keep = rem > 0.0
    if int(keep.sum()) < MIN_FIT_POINTS:
        raise ParameterError("insufficient points with positive remaining time")
    slope, intercept, _ = _linear_fit(np.log(rem[keep]), np.log(v[sl][keep]))
    return float(slope), float(np.exp(intercept))


def profile_fit(
    X: np.ndarray,
    u: np.ndarray,
    window: tuple[float, float] | None = None,
) -> ProfileFit:
    """Fit the touchdown profile law 1 - u = C* (r^2/|ln r|)^(1/3) near r = 0.

    The default window [2*dr, 0.1] (dr the uniform-equivalent spacing)
    excludes the innermost cells, where the arg-max node sits, and the far
    field, where the similarity form no longer applies.  The residual is
    the largest relative deviation over the window.
    """
    X = np.asarray(X, dtype=float)
    u = np.asarray(u, dtype=float)
    if window is None:
        dr = X[-1] / (X.size - 1)
        window = (2.0 * dr, 0.1)
    rmin, rmax = window
    mask = (X >= rmin) & (X <= rmax) & (X > 0.0) & (X < 1.0)
    if not mask.any():
        raise ParameterError(f"no nodes inside the fit window {window}")
    r = X[mask]
    v = 1.0 - u[mask]
    phi = (r * r / np.abs(np.log(r))) ** (1.0 / 3.0)
    c_star = float(np.dot(phi, v) / np.dot(phi, phi))
    if c_star <= 0.0:
        raise ParameterError("profile fit produced a non-positive constant")
    residual = float(np.max(np.abs(v - c_star * phi) / (c_star * phi)))
    return ProfileFit(
        constant=c_star, residual=residual, window=(float(rmin), float(rmax)),
        npoints=int(r.size),
    )


def largest_initial_constant(
    u0: np.ndarray, X: np.ndarray, k: float, rmin: float | None = None
) -> float:
    """Largest Ck with 1 - u0 >= Ck * r^k for all nodes with r >= rmin."""
    X = np.asarray(X, dtype=float)
    u0 = np.asarray(u0, dtype=float)
    if rmin is None:
        rmin = 2.0 * X[-1] / (X.size - 1)
    mask = X >= rmin
    if not mask.any():
        raise ParameterError("no nodes at or beyond rmin")
    return float(np.min((1.0 - u0[mask]) / X[mask] ** k))


def single_point_check(
    X: np.ndarray,
    u: np.ndarray,
    k: float,
    Ck: float | None = None,
) -> SinglePointCheck:
    """Check the barrier 1 - u >= Ck * r^k on the nodes with r >= 2*dr.

    Requires k > 2/3 (the barrier is false below that exponent).  When Ck
    is not given it defaults to a quarter of the largest constant
    admissible for the flat start u0 = 0; the factor absorbs both the
    growth of u at the Robin boundary and the dip of the touchdown
    profile (~ r^(2/3) / |ln r|^(1/3)) just above the resolution scale.
    """
    if not k > 2.0 / 3.0:
        raise ParameterError("exponent k must exceed 2/3")
    X = np.asarray(X, dtype=float)
    u = np.asarray(u, dtype=float)
    if Ck is None:
        Ck = 0.25 * X[-1] ** (-k)
    dr = X[-1] / (X.size - 1)
    mask = X >= 2.0 * dr
    margin = float(np.min((1.0 - u[mask]) - Ck * X[mask] ** k))
    return SinglePointCheck(passed=margin >= 0.0, margin=margin, constant=float(Ck), exponent=float(k))


def quench_report(traj: "Trajectory") -> QuenchReport:
    """Full touchdown summary: time, location, rate fit and profile fit."""
    report = detect_and_extrapolate(traj)
    gamma, c_rate = fit_rate(traj, report.Tq)
    snap = traj.snapshots[-1]
    prof = profile_fit(snap.X, snap.u)
    return replace(
        report,
        rate_exponent=gamma,
        rate_constant=c_rate,
        profile_constant=prof.constant,
        profile_residual=prof.residual,
    )
