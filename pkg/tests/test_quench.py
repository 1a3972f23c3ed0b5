"""Energy split, touchdown detection, rate and profile fits, barrier check."""

import numpy as np
import pytest
from scipy.integrate import quad

from memsq import (
    DaeVector,
    Geometry,
    ParameterError,
    ProblemParams,
    QuenchReport,
    SchemeConfig,
    Snapshot,
    Trajectory,
    energy,
    detect_and_extrapolate,
    fit_rate,
    profile_fit,
    quench_report,
    single_point_check,
    unit_ball_volume,
)
from memsq.quench import (
    MIN_FIT_POINTS,
    TAIL_EXCLUDE,
    largest_initial_constant,
)

import oracles

SLAB = ProblemParams(lam=1.0, alpha=0.0, beta=1.0)


def similarity_gap(r, c_star):
    """1 - u of the touchdown form c* (r^2/|ln r|)^(1/3), regular at 0."""
    # clip away from r = 1 where |ln r| vanishes; fit windows never reach it
    rr = np.minimum(r, 0.999)
    v = np.empty_like(r)
    v[0] = 1e-9
    v[1:] = c_star * (rr[1:] * rr[1:] / np.abs(np.log(rr[1:]))) ** (1.0 / 3.0)
    return v


def synthetic_quench(gamma, Tq=2.0, C=0.9, n=80, v_hi=0.5, v_lo=1e-3, c_star=0.25):
    """Ledger obeying 1 - umax = C (Tq - t)^gamma plus a similarity snapshot."""
    t, umax = oracles.cube_law_ledger(Tq, C, n, v_hi, v_lo, gamma)
    m = t.size
    r = np.linspace(0.0, 1.0, 142)
    u = 1.0 - similarity_gap(r, c_star)
    snap = Snapshot(t=t[-1], X=r, u=u)
    return Trajectory(
        params=SLAB,
        config=SchemeConfig(),
        t=t,
        umax=umax,
        u_boundary=np.zeros(m),
        energy=np.zeros(m),
        gain=np.ones(m),
        dilation=np.ones(m),
        dtau=np.r_[0.0, np.diff(t)],
        snapshots=[snap],
        status="quenched",
        failures=0,
        final=DaeVector(t=t[-1], u=np.zeros(142), X=r),
    )


class TestEnergy:
    def test_flat_slab_local(self):
        x = np.linspace(0.0, 1.0, 101)
        rec = energy(np.zeros(101), x, SLAB, t=1.5)
        assert rec.dirichlet_part == 0.0
        assert rec.boundary_part == 0.0
        # local Lyapunov potential -lam * I(0) = -lam * volume
        assert rec.nonlocal_part == pytest.approx(-2.0, rel=1e-12)
        assert rec.total == pytest.approx(-2.0, rel=1e-12)
        assert rec.t == 1.5

    def test_flat_slab_nonlocal(self):
        p = ProblemParams(lam=1.0, alpha=0.5, beta=1.0)
        x = np.linspace(0.0, 1.0, 101)
        rec = energy(np.zeros(101), x, p)
        # (lam/alpha) / (1 + alpha V) = 2 / 2
        assert rec.nonlocal_part == pytest.approx(1.0, rel=1e-12)

    def test_slab_quadratic_profile(self):
        # gradient and boundary parts against direct quadrature of the
        # closed-form profile
        beta, a = 1.0, 0.2
        x = np.linspace(0.0, 1.0, 801)
        u = a * (1.0 - beta * x * x / (2.0 + beta))
        rec = energy(u, x, SLAB)
        grad2 = quad(lambda s: (2.0 * a * beta * s / (2.0 + beta)) ** 2, 0.0, 1.0)[0]
        assert rec.dirichlet_part == pytest.approx(grad2, rel=1e-6)
        assert rec.boundary_part == pytest.approx(beta * (2.0 * a / (2.0 + beta)) ** 2, rel=1e-12)

    def test_ball_quadratic_profile(self):
        beta, a, n = 1.0, 0.2, 3
        p = ProblemParams(lam=1.0, alpha=0.0, beta=beta, dim=n, geometry=Geometry.ball())
        r = np.linspace(0.0, 1.0, 801)
        u = a * (1.0 - beta * r * r / (2.0 + beta))
        rec = energy(u, r, p)
        meas = n * unit_ball_volume(n)
        grad2 = quad(
            lambda s: (2.0 * a * beta * s / (2.0 + beta)) ** 2 * s ** (n - 1), 0.0, 1.0
        )[0]
        assert rec.dirichlet_part == pytest.approx(0.5 * meas * grad2, rel=1e-6)
        want_boundary = 0.5 * beta * meas * (2.0 * a / (2.0 + beta)) ** 2
        assert rec.boundary_part == pytest.approx(want_boundary, rel=1e-12)

    def test_total_is_sum(self):
        x = np.linspace(0.0, 1.0, 51)
        u = 0.1 * (1.0 - x * x / 3.0)
        rec = energy(u, x, ProblemParams(lam=2.0, alpha=1.0, beta=1.0))
        assert rec.total == rec.dirichlet_part + rec.boundary_part + rec.nonlocal_part


class TestDetectAndExtrapolate:
    def test_exact_cube_law(self):
        tr = synthetic_quench(1.0 / 3.0)
        rep = detect_and_extrapolate(tr)
        assert rep.quenched
        assert rep.Tq == pytest.approx(2.0, abs=1e-9)
        assert rep.r_squared > 0.999999
        assert not rep.poor_fit
        assert rep.x_star == 0.0

    def test_window_excludes_tail(self):
        tr = synthetic_quench(1.0 / 3.0)
        rep = detect_and_extrapolate(tr)
        assert rep.fit_window.stop == tr.t.size - TAIL_EXCLUDE
        assert rep.fit_window.npoints >= MIN_FIT_POINTS
        # one decade of the gap, up to the tail exclusion
        v = 1.0 - tr.umax
        assert v[rep.fit_window.start] <= 10.0 * v[rep.fit_window.stop - 1] * (1.0 + 1e-12)

    def test_contaminated_exponent_flags_poor_fit(self):
        # a square-root law must not satisfy the cubic-gap linearity
        tr = synthetic_quench(0.5)
        rep = detect_and_extrapolate(tr)
        assert rep.r_squared < 0.999
        assert rep.poor_fit

    def test_rejects_non_quenched(self, traj_steady):
        with pytest.raises(ParameterError):
            detect_and_extrapolate(traj_steady)

    def test_rejects_short_ledger(self):
        tr = synthetic_quench(1.0 / 3.0, n=15)
        with pytest.raises(ParameterError):
            detect_and_extrapolate(tr)

    def test_extrapolated_time_beyond_ledger(self):
        tr = synthetic_quench(1.0 / 3.0)
        rep = detect_and_extrapolate(tr)
        assert rep.Tq >= tr.t[-1]


class TestFitRate:
    def test_recovers_exact_exponent(self):
        tr = synthetic_quench(1.0 / 3.0)
        rep = detect_and_extrapolate(tr)
        gamma, c = fit_rate(tr, rep.Tq)
        assert gamma == pytest.approx(1.0 / 3.0, abs=1e-5)
        assert c == pytest.approx(0.9, rel=1e-3)

    def test_recovers_alternate_exponent(self):
        # the log-log fit itself is law-agnostic; feed it the true Tq
        tr = synthetic_quench(0.5)
        gamma, c = fit_rate(tr, 2.0)
        assert gamma == pytest.approx(0.5, abs=1e-6)
        assert c == pytest.approx(0.9, rel=1e-4)

    def test_rejects_exhausted_window(self):
        tr = synthetic_quench(1.0 / 3.0)
        with pytest.raises(ParameterError):
            fit_rate(tr, tr.t[0])


class TestProfileFit:
    def test_recovers_exact_constant(self):
        r = np.linspace(0.0, 1.0, 142)
        fit = profile_fit(r, 1.0 - similarity_gap(r, 2.0))
        assert fit.constant == pytest.approx(2.0, rel=1e-12)
        assert fit.residual < 1e-12
        assert fit.npoints >= 10

    def test_far_field_does_not_leak(self):
        # the fit reads only [2 dr, 0.1]; wrecking the far field changes nothing
        r = np.linspace(0.0, 1.0, 142)
        u = 1.0 - similarity_gap(r, 2.0)
        u_wrecked = u.copy()
        u_wrecked[r > 0.2] = 0.0
        assert profile_fit(r, u_wrecked).constant == profile_fit(r, u).constant

    def test_explicit_window(self):
        r = np.linspace(0.0, 1.0, 142)
        u = 1.0 - similarity_gap(r, 2.0)
        fit = profile_fit(r, u, window=(0.05, 0.09))
        assert fit.window == (0.05, 0.09)
        assert fit.constant == pytest.approx(2.0, rel=1e-12)

    def test_empty_window_raises(self):
        r = np.linspace(0.0, 1.0, 142)
        with pytest.raises(ParameterError):
            profile_fit(r, np.zeros(142), window=(0.0101, 0.0102))

    def test_reports_model_misfit(self):
        # a pure r^2 cap is not the similarity form: the residual is O(1)
        r = np.linspace(0.0, 1.0, 142)
        u = 1.0 - np.maximum(0.5 * r * r, 1e-9)
        fit = profile_fit(r, u)
        assert fit.residual > 0.05


class TestBarrier:
    def test_flat_start_constant(self):
        r = np.linspace(0.0, 1.0, 142)
        assert largest_initial_constant(np.zeros(142), r, 0.8) == pytest.approx(1.0)

    def test_default_quarter_factor(self):
        r = np.linspace(0.0, 1.0, 142)
        chk = single_point_check(r, np.zeros(142), 0.8)
        assert chk.constant == pytest.approx(0.25)
        assert chk.exponent == 0.8
        assert chk.passed

    def test_touchdown_profile_respects_barrier(self):
        # the similarity dip just above resolution stays over Ck r^0.8 for
        # the default constant but crosses it at twice that
        r = np.linspace(0.0, 1.0, 142)
        u = 1.0 - similarity_gap(r, 0.25)
        assert single_point_check(r, u, 0.8).passed
        assert not single_point_check(r, u, 0.8, Ck=0.5).passed

    def test_rejects_low_exponent(self):
        r = np.linspace(0.0, 1.0, 142)
        with pytest.raises(ParameterError):
            single_point_check(r, np.zeros(142), 0.5)


class TestQuenchReport:
    def test_synthetic_full_report(self):
        tr = synthetic_quench(1.0 / 3.0)
        rep = quench_report(tr)
        assert isinstance(rep, QuenchReport)
        assert rep.rate_exponent == pytest.approx(1.0 / 3.0, abs=1e-5)
        assert rep.rate_constant == pytest.approx(0.9, rel=1e-3)
        assert rep.profile_constant == pytest.approx(0.25, rel=1e-10)
        assert rep.profile_residual < 1e-9

    def test_real_trajectory(self, traj_quench_local):
        rep = quench_report(traj_quench_local)
        assert rep.quenched and not rep.poor_fit
        assert rep.x_star == 0.0
        assert rep.Tq == pytest.approx(0.3329, abs=2e-3)
        assert rep.rate_exponent == pytest.approx(1.0 / 3.0, abs=0.05)
        assert rep.profile_constant > 0.0
        assert rep.r_squared > 0.999
