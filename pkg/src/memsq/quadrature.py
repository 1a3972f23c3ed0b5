"""Composite quadrature on nonuniform meshes and the nonlocal gain.

The moving-mesh scheme produces strictly increasing but nonuniform node
positions, so the composite Simpson rule here uses the exact three-point
Newton-Cotes weights of each panel pair; an odd panel count is closed with a
trailing trapezoid.  Radial integrands carry the weight r^(N-1); full-domain
values multiply by the geometry factor (2 for the symmetric slab,
N*omega_N for the ball).
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .core import MeshState, ProblemParams, unit_ball_volume, validate

__all__ = [
    "QuenchedStateError",
    "NonlocalGain",
    "composite_integral",
    "nonlocal_gain",
    "reaction",
]


class QuenchedStateError(ValueError):
    """Raised when a state with max(u) >= 1 reaches a 1/(1-u) integrand."""


@dataclass(frozen=True)
class NonlocalGain:
    """Full-domain integral of 1/(1-u), H = 1 + alpha*integral, K = H^2."""

    integral: float
    H: float
    K: float


def _mesh_array(mesh: MeshState | np.ndarray) -> np.ndarray:
    x = mesh.X if isinstance(mesh, MeshState) else np.asarray(mesh, dtype=float)
    if x.ndim != 1 or x.size < 2:
        raise ValueError("mesh must hold at least two nodes")
    if np.any(np.diff(x) <= 0.0):
        raise ValueError("mesh nodes must be strictly increasing")
    return x


def composite_integral(
    values: np.ndarray,
    mesh: MeshState | np.ndarray,
    weight_power: int = 0,
) -> float:
    """Integrate samples over the computational interval.

    Parameters
    ----------
    values : array of node samples
    mesh : MeshState or strictly increasing node array
    weight_power : int
        Power p in the weight x^p (p = N - 1 for radial integrands, 0 else).

    Returns
    -------
    float
        Composite Simpson value with exact nonuniform panel-pair weights and
        a trailing trapezoid when the panel count is odd.  Exact for cubics
        on uniform meshes.
    """
    x = _mesh_array(mesh)
    f = np.asarray(values, dtype=float)
    if f.shape != x.shape:
        raise ValueError(f"values shape {f.shape} does not match mesh shape {x.shape}")
    if weight_power:
        f = f * x ** weight_power
    n = x.size - 1  # panels
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


def nonlocal_gain(
    u: np.ndarray,
    mesh: MeshState | np.ndarray,
    params: ProblemParams,
) -> NonlocalGain:
    """Full-domain integral of 1/(1-u) and the induced gain K = (1+alpha*I)^2.

    The integral is reported over the full domain: twice the half-slab value,
    or N*omega_N times the radial r^(N-1)-weighted value.  For admissible
    states it is bounded below by the domain volume.
    """
    validate(params)
    u = np.asarray(u, dtype=float)
    if u.max() >= 1.0:
        raise QuenchedStateError("state already quenched: max(u) >= 1")
    vals = 1.0 / (1.0 - u)
    if params.radial:
        n = int(params.dim)
        half = composite_integral(vals, mesh, weight_power=n - 1)
        integral = n * unit_ball_volume(n) * half
    else:
        integral = 2.0 * composite_integral(vals, mesh)
    H = 1.0 + params.alpha * integral
    return NonlocalGain(integral=integral, H=H, K=H * H)


def reaction(
    u: np.ndarray,
    mesh: MeshState | np.ndarray,
    params: ProblemParams,
) -> np.ndarray:
    """Pointwise forcing lam / [(1-u)^2 * K(u)] at the mesh nodes."""
    gain = nonlocal_gain(u, mesh, params)
    u = np.asarray(u, dtype=float)
    return params.lam / ((1.0 - u) ** 2 * gain.K)
