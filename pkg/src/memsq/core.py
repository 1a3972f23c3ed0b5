"""Problem definition and discrete state containers.

The model is a parabolic equation for the normalized plate deflection
``0 <= u < 1``,

    u_t = Laplacian(u) + lam / [(1 - u)^2 * (1 + alpha * I(u))^2],

with the Robin condition ``du/dnu + beta*u = 0`` on the boundary and
``I(u) = integral over the domain of 1/(1 - u)``.  Two symmetric domains are
supported and both are reduced to a half/radial computational interval:

* ``interval``: the slab (-1, 1), computed on [0, 1] with a symmetry node
  at x = 0 (volume 2, two boundary points);
* ``ball``: the ball of radius R in R^N, computed radially on [0, R].

Full-domain integrals are always reported (interval quantities are twice the
half-domain integral; radial ones carry the N*omega_N*r^(N-1) measure).
"""

from __future__ import annotations

from dataclasses import dataclass, field
from math import gamma, pi
from typing import Callable, Sequence

import numpy as np

__all__ = [
    "ParameterError",
    "Geometry",
    "ProblemParams",
    "GeometryFacts",
    "MeshState",
    "FieldState",
    "validate",
    "geometry_facts",
    "initial_state",
]

#: Absolute tolerance for the boundary-condition check on supplied profiles.
ROBIN_TOL = 1.0e-8

#: Minimum number of mesh panels.
MIN_PANELS = 8


class ParameterError(ValueError):
    """Raised when a problem definition is rejected."""


@dataclass(frozen=True)
class Geometry:
    """Domain shape: the slab (-1, 1) or the ball of radius ``radius``."""

    kind: str
    radius: float = 1.0

    @classmethod
    def interval(cls) -> "Geometry":
        return cls(kind="interval", radius=1.0)

    @classmethod
    def ball(cls, radius: float = 1.0) -> "Geometry":
        return cls(kind="ball", radius=float(radius))

    @property
    def right(self) -> float:
        """Right end of the computational interval ([0, right])."""
        return 1.0 if self.kind == "interval" else self.radius


@dataclass(frozen=True)
class ProblemParams:
    """Continuous problem: forcing lam, capacitance alpha, Robin beta, dimension."""

    lam: float
    alpha: float
    beta: float
    dim: int = 1
    geometry: Geometry = field(default_factory=Geometry.interval)

    @property
    def is_local(self) -> bool:
        return self.alpha == 0.0

    @property
    def radial(self) -> bool:
        return self.geometry.kind == "ball"


@dataclass(frozen=True)
class GeometryFacts:
    """Measures of the full domain; ``surface`` is None for the slab."""

    volume: float
    surface: float | None


def _readonly(a: np.ndarray) -> np.ndarray:
    out = np.array(a, dtype=float, copy=True)
    out.flags.writeable = False
    return out


@dataclass(frozen=True)
class MeshState:
    """Computational coordinates xi (uniform) and physical node positions X."""

    xi: np.ndarray
    X: np.ndarray

    def __post_init__(self) -> None:
        object.__setattr__(self, "xi", _readonly(self.xi))
        object.__setattr__(self, "X", _readonly(self.X))

    @property
    def npoints(self) -> int:
        return self.xi.size


@dataclass(frozen=True)
class FieldState:
    """Deflection samples at the mesh nodes plus physical and computational time."""

    u: np.ndarray
    t: float = 0.0
    tau: float = 0.0

    def __post_init__(self) -> None:
        object.__setattr__(self, "u", _readonly(self.u))


def validate(params: ProblemParams) -> ProblemParams:
    """Check a problem definition, returning it unchanged if admissible.

    Raises
    ------
    ParameterError
        If any of lam >= 0, alpha >= 0, beta > 0, the geometry kind, the
        dimension (1 for the slab, >= 2 integer for the ball) or radius > 0
        is violated.
    """
    if not np.isfinite(params.lam) or params.lam < 0.0:
        raise ParameterError(f"lam must be finite and >= 0, got {params.lam}")
    if not np.isfinite(params.alpha) or params.alpha < 0.0:
        raise ParameterError(f"alpha must be finite and >= 0, got {params.alpha}")
    if not np.isfinite(params.beta) or params.beta <= 0.0:
        raise ParameterError(f"beta must be finite and > 0, got {params.beta}")
    geom = params.geometry
    if geom.kind not in ("interval", "ball"):
        raise ParameterError(f"unknown geometry kind {geom.kind!r}")
    if not np.isfinite(geom.radius) or geom.radius <= 0.0:
        raise ParameterError(f"radius must be finite and > 0, got {geom.radius}")
    if geom.kind == "interval":
        if params.dim != 1:
            raise ParameterError("the slab problem is one-dimensional (dim must be 1)")
    else:
        if int(params.dim) != params.dim or params.dim < 2:
            raise ParameterError(f"ball dimension must be an integer >= 2, got {params.dim}")
    return params


def unit_ball_volume(dim: int) -> float:
    """omega_N, the volume of the unit ball in R^N."""
    return pi ** (dim / 2.0) / gamma(dim / 2.0 + 1.0)


def geometry_facts(params: ProblemParams) -> GeometryFacts:
    """Full-domain volume and boundary surface measure.

    The slab (-1, 1) has volume 2 and a two-point boundary (no surface
    scalar); the ball has volume omega_N R^N and surface N omega_N R^(N-1).
    """
    validate(params)
    geom = params.geometry
    if geom.kind == "interval":
        return GeometryFacts(volume=2.0, surface=None)
    n = int(params.dim)
    omega = unit_ball_volume(n)
    return GeometryFacts(
        volume=omega * geom.radius**n,
        surface=n * omega * geom.radius ** (n - 1),
    )


def _boundary_slope(u: np.ndarray, X: np.ndarray) -> float:
    """One-sided second-order derivative at the right boundary node."""
    h1 = X[-1] - X[-2]
    h2 = X[-2] - X[-3]
    # three-point backward difference on a possibly nonuniform mesh
    a = h1 / (h2 * (h1 + h2))
    b = -(h1 + h2) / (h1 * h2)
    c = (2.0 * h1 + h2) / (h1 * (h1 + h2))
    return a * u[-3] + b * u[-2] + c * u[-1]


def initial_state(
    params: ProblemParams,
    M: int,
    u0: str | Sequence[float] | np.ndarray | Callable[[np.ndarray], np.ndarray] = "zero",
) -> tuple[MeshState, FieldState]:
    """Build the uniform initial mesh and the initial deflection.

    Parameters
    ----------
    params : ProblemParams
        Validated problem definition.
    M : int
        Number of mesh panels (M + 1 nodes); at least 8.
    u0 : "zero", array of M + 1 samples, or callable x -> u
        Initial profile on [0, right].  Non-flat profiles must satisfy
        0 <= u0 < 1 and the Robin condition at the right boundary to
        absolute tolerance 1e-8 (one-sided second-order difference).

    Returns
    -------
    (MeshState, FieldState)
        Uniform mesh on [0, right] and the profile at t = tau = 0.
    """
    validate(params)
    if int(M) != M or M < MIN_PANELS:
        raise ParameterError(f"M must be an integer >= {MIN_PANELS}, got {M}")
    M = int(M)
    xi = np.linspace(0.0, 1.0, M + 1)
    X = np.linspace(0.0, params.geometry.right, M + 1)

    if isinstance(u0, str):
        if u0 != "zero":
            raise ParameterError(f"unknown initial profile {u0!r}")
        u = np.zeros(M + 1)
    elif callable(u0):
        u = np.asarray(u0(X), dtype=float)
    else:
        u = np.asarray(u0, dtype=float)
    if u.shape != (M + 1,):
        raise ParameterError(f"u0 must have {M + 1} samples, got shape {u.shape}")
    if not np.all(np.isfinite(u)):
        raise ParameterError("u0 must be finite")
    if u.min() < 0.0 or u.max() >= 1.0:
        raise ParameterError("u0 must satisfy 0 <= u0 < 1")
    if np.any(u != 0.0):
        robin = _boundary_slope(u, X) + params.beta * u[-1]
        if abs(robin) > ROBIN_TOL:
            raise ParameterError(
                f"u0 violates the Robin boundary condition: residual {robin:.3e}"
            )
    return MeshState(xi=xi, X=X), FieldState(u=u, t=0.0, tau=0.0)
