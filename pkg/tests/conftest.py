"""Shared fixtures.  Expensive trajectories are session-scoped and reused."""

from __future__ import annotations

import numpy as np
import pytest

from memsq import (
    CANONICAL_M_GRID,
    Geometry,
    ProblemParams,
    integrate,
    trace_branch,
)


@pytest.fixture(scope="session")
def branch_local():
    return trace_branch(0.0, 1.0, CANONICAL_M_GRID)


@pytest.fixture(scope="session")
def branch_nonlocal():
    return trace_branch(1.0, 1.0, CANONICAL_M_GRID)


@pytest.fixture(scope="session")
def traj_steady():
    params = ProblemParams(lam=0.05, alpha=0.0, beta=1.0)
    return integrate(params, M=141)


@pytest.fixture(scope="session")
def traj_quench_local():
    params = ProblemParams(lam=1.0, alpha=0.0, beta=1.0)
    return integrate(params, M=141)


@pytest.fixture(scope="session")
def traj_quench_nonlocal():
    params = ProblemParams(lam=3.0, alpha=1.0, beta=1.0)
    return integrate(params, M=141)


@pytest.fixture(scope="session")
def lam_sweep(traj_quench_nonlocal):
    out = {3.0: traj_quench_nonlocal}
    for lam in (2.5, 3.5, 4.0):
        params = ProblemParams(lam=lam, alpha=1.0, beta=1.0)
        out[lam] = integrate(params, M=141)
    return out


@pytest.fixture(scope="session")
def alpha_sweep():
    out = {}
    for alpha in (0.0, 0.25, 0.5, 1.0):
        params = ProblemParams(lam=2.0, alpha=alpha, beta=1.0)
        out[alpha] = integrate(params, M=141)
    return out


@pytest.fixture(scope="session")
def radial_steady():
    params = ProblemParams(lam=0.05, alpha=0.0, beta=1.0, dim=2,
                           geometry=Geometry.ball())
    return integrate(params, M=141)


@pytest.fixture(scope="session")
def radial_nonlocal():
    params = ProblemParams(lam=0.2, alpha=1.0, beta=1.0, dim=2,
                           geometry=Geometry.ball())
    return integrate(params, M=141)


@pytest.fixture(scope="session")
def ball3_quench():
    # About twice the nonlocal radial fold (lam* ~ 25.8 in three dimensions).
    params = ProblemParams(lam=51.5, alpha=1.0, beta=1.0, dim=3,
                           geometry=Geometry.ball())
    return integrate(params, M=141)


def assert_close(got, want, tol, label=""):
    got = float(got)
    want = float(want)
    err = abs(got - want)
    assert err <= tol, f"{label}: got {got!r}, want {want!r}, err {err:.3e} > {tol:.1e}"
