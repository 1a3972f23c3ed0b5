"""Backend parity and dispatch for the compiled residual kernel."""

import os
import subprocess
import sys

import numpy as np
import pytest

import memsq
from memsq import ProblemParams, SchemeConfig, composite_integral
from memsq._kernels import numpy_impl

try:
    from memsq._kernels import _residual as cython_impl
except ImportError:
    cython_impl = None

needs_cython = pytest.mark.skipif(
    cython_impl is None, reason="compiled kernel not built"
)


def residual_args(M=61, radial=False, ndim=1, alpha=0.0, seed=3, trial_shift=True):
    """An admissible previous state and a nearby trial vector."""
    rng = np.random.default_rng(seed)
    x = np.linspace(0.0, 1.0, M + 1)
    x[1:-1] += 0.25 / M * rng.uniform(-1.0, 1.0, M - 1)
    u = 0.4 * (1.0 - x * x / 3.0) + 0.01 * np.sin(2.0 * np.pi * x)
    z = np.empty(2 * M)
    z[0] = 0.37
    z[1 : M + 1] = u[:M]
    z[M + 1 : 2 * M] = x[1:M]
    if trial_shift:
        z[1 : M + 1] *= 1.01
        z[M + 1 : 2 * M] += 0.05 / M * rng.uniform(-1.0, 1.0, M - 1)
    return z, u, x


PARITY_CASES = [
    dict(ndim=1, radial=False, alpha=0.0),
    dict(ndim=1, radial=False, alpha=0.7),
    dict(ndim=2, radial=True, alpha=0.7),
    dict(ndim=3, radial=True, alpha=0.0),
]


class TestSimpsonWeighted:
    def test_matches_composite_integral(self):
        rng = np.random.default_rng(7)
        x = np.sort(np.r_[0.0, rng.uniform(0.05, 0.95, 39), 1.0])
        f = np.cos(3.0 * x)
        for p in (0, 2):
            got = numpy_impl.simpson_weighted(f, x, p)
            assert got == pytest.approx(composite_integral(f, x, weight_power=p), rel=1e-14)

    @needs_cython
    def test_backend_parity(self):
        rng = np.random.default_rng(8)
        x = np.sort(np.r_[0.0, rng.uniform(0.05, 0.95, 40), 1.0])
        f = 1.0 / (1.0 - 0.5 * np.sin(x))
        for p in (0, 1, 4):
            a = numpy_impl.simpson_weighted(f, x, p)
            b = cython_impl.simpson_weighted(f, x, p)
            assert b == pytest.approx(a, rel=1e-13)


class TestResidual:
    @pytest.mark.parametrize("case", PARITY_CASES)
    @pytest.mark.parametrize("smooth", [True, False])
    @pytest.mark.parametrize("freeze", [True, False])
    @needs_cython
    def test_backend_parity(self, case, smooth, freeze):
        z, u, x = residual_args(radial=case["radial"], ndim=case["ndim"])
        gcoef = (
            case["ndim"] * memsq.unit_ball_volume(case["ndim"])
            if case["radial"]
            else 2.0
        )
        args = (
            z, u, x, 0.3, 1e-3, 1.5, case["alpha"], 1.0, case["ndim"],
            case["radial"], 1e-2, 1.0, smooth, gcoef, freeze,
        )
        out_np = np.empty(z.size)
        out_cy = np.empty(z.size)
        numpy_impl.residual(out_np, *args)
        cython_impl.residual(out_cy, *args)
        np.testing.assert_allclose(out_cy, out_np, rtol=1e-12, atol=1e-14)

    @pytest.mark.parametrize("impl", ["numpy", "cython"])
    def test_vanishes_at_identity(self, impl):
        # with dtau = 0 and trial state equal to the previous state every
        # difference row is identically zero
        if impl == "cython":
            if cython_impl is None:
                pytest.skip("compiled kernel not built")
            mod = cython_impl
        else:
            mod = numpy_impl
        z, u, x = residual_args(trial_shift=False)
        out = np.empty(z.size)
        mod.residual(out, z, u, x, 0.37, 0.0, 1.5, 0.5, 1.0, 1, False,
                     1e-2, 1.0, True, 2.0, False)
        np.testing.assert_allclose(out, 0.0, atol=1e-15)

    def test_freeze_pins_mesh_rows(self):
        # frozen mesh rows reduce to delta-X = 0, independent of the monitor
        z, u, x = residual_args()
        M = u.size - 1
        out = np.empty(z.size)
        numpy_impl.residual(out, z, u, x, 0.3, 1e-3, 1.5, 0.0, 1.0, 1, False,
                            1e-2, 1.0, True, 2.0, True)
        np.testing.assert_allclose(out[M + 1 :], z[M + 1 : 2 * M] - x[1:M], rtol=1e-14)


class TestDispatch:
    def _backend_under(self, env_value):
        env = dict(os.environ)
        if env_value is None:
            env.pop("MEMSQ_KERNEL", None)
        else:
            env["MEMSQ_KERNEL"] = env_value
        return subprocess.run(
            [sys.executable, "-c", "import memsq; print(memsq.kernel_backend)"],
            capture_output=True,
            text=True,
            env=env,
        )

    def test_default_backend(self):
        proc = self._backend_under(None)
        assert proc.returncode == 0
        assert proc.stdout.strip() in ("cython", "numpy")

    def test_forced_numpy(self):
        proc = self._backend_under("numpy")
        assert proc.returncode == 0
        assert proc.stdout.strip() == "numpy"

    @needs_cython
    def test_forced_cython(self):
        proc = self._backend_under("cython")
        assert proc.returncode == 0
        assert proc.stdout.strip() == "cython"

    def test_unknown_backend_rejected(self):
        proc = self._backend_under("fortran")
        assert proc.returncode != 0
        assert "MEMSQ_KERNEL" in proc.stderr

    @needs_cython
    def test_trajectory_agreement_across_backends(self):
        # the same quench run on the numpy backend lands on the same answer
        code = (
            "import memsq;"
            "tr = memsq.integrate(memsq.ProblemParams(lam=1.0, alpha=0.0, beta=1.0), M=71);"
            "print(tr.status, repr(float(tr.t[-1])), repr(float(tr.umax[-1])))"
        )
        env = dict(os.environ, MEMSQ_KERNEL="numpy")
        proc = subprocess.run(
            [sys.executable, "-c", code], capture_output=True, text=True, env=env
        )
        assert proc.returncode == 0, proc.stderr
        status, t_end, umax_end = proc.stdout.split()
        tr = memsq.integrate(ProblemParams(lam=1.0, alpha=0.0, beta=1.0), M=71)
        assert memsq.kernel_backend == "cython"
        assert status == tr.status
        assert float(t_end) == pytest.approx(tr.t[-1], abs=1e-8)
        assert float(umax_end) == pytest.approx(tr.umax[-1], abs=1e-8)
