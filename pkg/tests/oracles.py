"""Independent reference computations used to cross-check the package.

Everything here is written against the continuous problem directly (shooting
on the steady ODE, a fixed-grid method-of-lines integrator, transcendental
eigenvalue roots) without importing the package, so agreement is evidence
rather than tautology.
"""

from __future__ import annotations

import numpy as np
from scipy.integrate import simpson, solve_ivp
from scipy.optimize import brentq, root
from scipy.special import jn_zeros


def shoot_branch_point(M: float, alpha: float, beta: float) -> tuple[float, float, float, float]:
    """Slab steady state by shooting on W'' = mu/W^2, W(0)=m, W'(0)=0.

    Solves for (m, mu) such that W(1) = M and W'(1) = beta (1 - M), then
    evaluates lam = mu (1 + alpha I)^2 with I = 2 * integral of 1/W.
    Returns (m, mu, lam, I).
    """

    def trace(m: float, mu: float):
        def rhs(x, y):
            return [y[1], mu / (y[0] * y[0])]

        return solve_ivp(
            rhs, (0.0, 1.0), [m, 0.0], method="DOP853",
            rtol=1e-12, atol=1e-14, dense_output=True,
        )

    def residual(q):
        m, mu = q
        if not (0.0 < m < M) or mu <= 0.0:
            return [1e3, 1e3]
        sol = trace(m, mu)
        W1, dW1 = sol.y[0, -1], sol.y[1, -1]
        return [W1 - M, dW1 - beta * (1.0 - M)]

    ans = None
    for frac in (0.8, 0.5, 0.95, 0.2):
        m0 = frac * M
        mu0 = beta**2 * (1.0 - M) ** 2 * m0 * M / (2.0 * (M - m0))
        trial = root(residual, [m0, mu0], method="hybr", tol=1e-13)
        if trial.success and np.max(np.abs(trial.fun)) < 1e-10:
            ans = trial
            break
    assert ans is not None, f"shooting failed to close at M={M}"
    m, mu = ans.x
    sol = trace(m, mu)
    xs = np.linspace(0.0, 1.0, 4001)
    I = 2.0 * simpson(1.0 / sol.sol(xs)[0], x=xs)
    lam = mu * (1.0 + alpha * I) ** 2
    return float(m), float(mu), float(lam), float(I)


def dirichlet_lambda(m: float) -> float:
    """Closed-form branch lam(m) of the Dirichlet problem (boundary value 1)."""
    root_term = np.sqrt(1.0 - m)
    B = root_term - 0.5 * m * np.log(m) + m * np.log(1.0 + root_term)
    return 0.5 * m * B * B


def dirichlet_lambda_max(samples: int = 200001) -> float:
    """Maximum of the Dirichlet closed form over m in (0, 1)."""
    ms = np.linspace(1e-6, 1.0 - 1e-6, samples)
    return float(np.max(dirichlet_lambda(ms)))


def robin_root(beta: float) -> float:
    """Root s in (0, pi/2) of s tan s = beta."""
    return brentq(
        lambda s: s * np.tan(s) - beta, 1e-12, np.pi / 2.0 - 1e-12,
        xtol=1e-15, rtol=8.9e-16,
    )


def ball_dirichlet_lambda1() -> float:
    """First Dirichlet eigenvalue of the unit disk: squared first J0 zero."""
    return float(jn_zeros(0, 1)[0] ** 2)


def mol_profiles(
    lam: float,
    alpha: float,
    beta: float,
    M: int,
    t_eval: np.ndarray,
    rtol: float = 1e-10,
    atol: float = 1e-12,
) -> np.ndarray:
    """Fixed-grid method-of-lines solution of the slab problem.

    Uniform grid on [0, 1], symmetric node at 0, first-order Robin
    elimination at the right end, stiff BDF integration.  Returns an array
    of shape (len(t_eval), M + 1).
    """
    X = np.linspace(0.0, 1.0, M + 1)
    h = X[1] - X[0]

    def full(v: np.ndarray) -> np.ndarray:
        u = np.empty(M + 1)
        u[:M] = v
        u[M] = v[M - 1] / (1.0 + beta * h)
        return u

    def rhs(t, v):
        u = full(v)
        I = 2.0 * simpson(1.0 / (1.0 - u), x=X)
        K = (1.0 + alpha * I) ** 2
        f = lam / ((1.0 - u) ** 2 * K)
        du = np.empty(M)
        du[0] = 2.0 * (u[1] - u[0]) / h**2 + f[0]
        du[1:M] = (u[2 : M + 1] - 2.0 * u[1:M] + u[0 : M - 1]) / h**2 + f[1:M]
        return du

    sol = solve_ivp(
        rhs, (0.0, float(t_eval[-1])), np.zeros(M), method="BDF",
        rtol=rtol, atol=atol, t_eval=t_eval,
    )
    assert sol.success, sol.message
    return np.stack([full(sol.y[:, k]) for k in range(sol.y.shape[1])])


def cube_law_ledger(
    Tq: float, C: float, n: int, v_hi: float, v_lo: float, gamma: float = 1.0 / 3.0
) -> tuple[np.ndarray, np.ndarray]:
    """Synthetic ledger obeying 1 - umax = C (Tq - t)^gamma exactly.

    Rows are geometrically spaced in the gap v from v_hi down to v_lo, the
    spacing the step controller produces near touchdown.  Returns (t, umax).
    """
    v = np.geomspace(v_hi, v_lo, n)
    t = Tq - (v / C) ** (1.0 / gamma)
    return t, 1.0 - v
