"""Moment machinery, comparison ODEs, and blow-up certification.

Closed-form oracle values used below (independent quadrature, 40-digit):

    moment(w=s, gamma=1/2, s1=1)    = 4/15
    moment(w=s, gamma=1/2, s1=1/2)  = (1/2)^(5/2) * 4/15 = 0.04714045207910317
    moment of w = s - 1/2 supported on [1/2, 1], gamma = 1/2, s1 = 1
                                    = 0.024264068711928515
    weighted_square_moment(w=s, gamma=1/2, s1=1) = 2/5
"""

import dataclasses
import math

import mpmath as mp
import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from degenchem import (SGrid, SolverConfig, WInitial, WProfile,
                       cauchy_schwarz_sides, certify_blowup, check_comparison,
                       check_concavity, check_supersolution, choose_gamma,
                       choose_thresholds, config_violations, evolve,
                       lower_ode, make_concave_compatible, make_concentrated,
                       make_moment_config, make_params, make_sgrid, moment,
                       moment_constants, riccati, weighted_square_moment)
from degenchem.analysis import MomentConstants


def line_profile(grid, params=None, slope=1.0):
    return WProfile(grid=grid, values=slope * grid.nodes, params=params)


class TestRiccati:
    def test_closed_form_values(self):
        value, t_star = riccati(1.0, 2, 0.25)
        assert value == 2.0
        assert t_star == 0.5

    def test_blowup_time(self):
        _, t_star = riccati(0.5, 3, 0.0)
        assert t_star == pytest.approx(1.0 / 1.5, rel=1e-15)

    def test_rejects_time_at_blowup(self):
        with pytest.raises(ValueError):
            riccati(1.0, 2, 0.5)
        with pytest.raises(ValueError):
            riccati(1.0, 2, 0.7)

    def test_rejects_bad_arguments(self):
        with pytest.raises(ValueError):
            riccati(0.0, 2, 0.1)
        with pytest.raises(ValueError):
            riccati(1.0, 2, -0.1)


class TestChooseGamma:
    def test_moderate_cases(self):
        assert choose_gamma(2, 1.0) == 0.5
        assert choose_gamma(3, 1.0) == pytest.approx(2.0 / 3.0, rel=1e-15)

    def test_capped_at_nine_tenths(self):
        assert choose_gamma(3, 3.0) == 0.9

    def test_rejects_nonpositive_bound(self):
        # bound 1 - 2/n + beta/n needs beta > 2 - n
        with pytest.raises(ValueError):
            choose_gamma(1, 0.5)

    def test_override(self):
        assert choose_gamma(2, 1.0, override=0.3) == 0.3
        with pytest.raises(ValueError):
            choose_gamma(2, 1.0, override=0.6)


class TestMomentConstants:
    def test_reference_values(self):
        # n=2, beta=1, gamma=1/2: c1 = 128/3, c2 = 4/(2.5*(2 pi)^2),
        # c3 = 1/(2 pi)
        c = moment_constants(2, 1.0, 0.5, 2.0 * math.pi)
        assert c.c1 == pytest.approx(128.0 / 3.0, rel=1e-14)
        assert c.c2 == pytest.approx(4.0 / (2.5 * (2 * math.pi) ** 2), rel=1e-14)
        assert c.c3 == pytest.approx(1.0 / (2.0 * math.pi), rel=1e-14)

    def test_rounded_literature_values(self):
        c = moment_constants(2, 1.0, 0.5, 2.0 * math.pi)
        assert c.c1 == pytest.approx(42.6667, rel=1e-4)
        assert c.c2 == pytest.approx(0.040528, rel=1e-4)
        assert c.c3 == pytest.approx(0.159155, rel=1e-4)

    def test_rejects_undefined_denominator(self):
        # n=1, beta=1/2: denominator 3 - 4 + 1 - 0.9 < 0
        with pytest.raises(ValueError):
            moment_constants(1, 0.5, 0.9, 2.0)
        # gamma outside (0, 1)
        with pytest.raises(ValueError):
            moment_constants(2, 1.0, 0.0, 2.0 * math.pi)


class TestThresholds:
    def test_s1_scales_with_m0_squared(self):
        # n=2, beta=1: the first size bound has unit exponent, so s1 ~ m0^2
        # while it binds
        p = make_params(2, 1.0, 1.0, 2 * math.pi)
        gamma = choose_gamma(p.n, p.beta)
        c = moment_constants(p.n, p.beta, gamma, p.omega_n)
        a = choose_thresholds(p, p.m / 50.0, c, gamma)
        b = choose_thresholds(p, p.m / 25.0, c, gamma)
        assert b.s1 / a.s1 == pytest.approx(4.0, rel=1e-12)
        assert a.s0 == a.s1 / 2.0
        assert a.r0 == pytest.approx(math.sqrt(a.s0), rel=1e-14)

    def test_blowup_configuration_values(self):
        p = make_params(2, 1.0, 1.0, 2 * math.pi)
        cfg = make_moment_config(p, m0=p.m)
        assert cfg.gamma == 0.5
        # with m0 = m = 2 pi the first bound reduces to the dyadic 3/512
        assert cfg.s1 == pytest.approx(3.0 / 512.0, rel=1e-12)
        assert cfg.s0 == cfg.s1 / 2.0
        assert config_violations(cfg, p) == []

    def test_violations_reported(self):
        p = make_params(2, 1.0, 1.0, 2 * math.pi)
        cfg = make_moment_config(p, m0=p.m)
        tampered = dataclasses.replace(cfg, s0=cfg.s1 / 3.0)
        bad = config_violations(tampered, p)
        assert len(bad) >= 1
        assert any("s0" in b for b in bad)
        tampered = dataclasses.replace(cfg, gamma=0.95)
        assert config_violations(tampered, p)


class TestMoment:
    def grid(self):
        return make_sgrid(1.0, 257, "uniform")

    def test_linear_profile_full_window(self):
        w = line_profile(self.grid())
        assert moment(w, 0.5, 1.0) == pytest.approx(4.0 / 15.0, abs=1e-15)

    def test_linear_profile_interior_window(self):
        w = line_profile(self.grid())
        assert moment(w, 0.5, 0.5) == pytest.approx(0.04714045207910317,
                                                    abs=1e-15)

    def test_zero_extension_below_grid(self):
        nodes = np.linspace(0.5, 1.0, 65)
        w = WProfile(grid=SGrid(nodes), values=nodes - 0.5)
        assert moment(w, 0.5, 1.0) == pytest.approx(0.024264068711928515,
                                                    abs=1e-15)

    def test_weighted_square(self):
        w = line_profile(self.grid())
        assert weighted_square_moment(w, 0.5, 1.0) == pytest.approx(
            0.4, abs=1e-15)

    def test_cauchy_schwarz_sides(self):
        w = line_profile(self.grid())
        lhs, rhs = cauchy_schwarz_sides(w, 0.5, 1.0)
        assert lhs == pytest.approx((4.0 / 15.0) ** 2, rel=1e-13)
        assert rhs == pytest.approx(0.4 * 1.0 / 0.5, rel=1e-13)
        assert lhs <= rhs

    def test_gamma_range_enforced(self):
        w = line_profile(self.grid())
        for g in (0.0, 1.0, -0.5, 1.5):
            with pytest.raises(ValueError):
                moment(w, g, 1.0)
            with pytest.raises(ValueError):
                weighted_square_moment(w, g, 1.0)

    @given(seed=st.integers(min_value=0, max_value=2**32 - 1),
           gamma=st.floats(min_value=0.05, max_value=0.95),
           s1_frac=st.floats(min_value=0.1, max_value=1.0))
    @settings(max_examples=25, deadline=None)
    def test_matches_high_precision_quadrature(self, seed, gamma, s1_frac):
        """Product integration is exact for piecewise-linear data, so a
        50-digit adaptive quadrature of the same integrand must agree to
        near machine precision."""
        rng = np.random.default_rng(seed)
        nodes = np.concatenate(([0.0], np.cumsum(rng.uniform(0.05, 1.0, 12))))
        nodes /= nodes[-1]
        vals = np.concatenate(([0.0], np.cumsum(rng.uniform(0.0, 1.0, 12))))
        w = WProfile(grid=SGrid(nodes), values=vals)
        s1 = float(s1_frac)

        with mp.workdps(50):
            gm = mp.mpf(gamma)
            total = mp.mpf(0)
            for a, b, wa, wb in zip(nodes[:-1], nodes[1:], vals[:-1], vals[1:]):
                lo, hi = mp.mpf(a), min(mp.mpf(b), mp.mpf(s1))
                if hi <= lo:
                    continue
                sl = (mp.mpf(wb) - mp.mpf(wa)) / (mp.mpf(b) - mp.mpf(a))
                f = lambda s: s**(-gm) * (mp.mpf(s1) - s) \
                    * (mp.mpf(wa) + sl * (s - mp.mpf(a)))
                total += mp.quad(f, [lo, hi])
            expect = float(total)

        got = moment(w, gamma, s1)
        assert got == pytest.approx(expect, rel=1e-12, abs=1e-15)


class TestLowerOde:
    def constants(self):
        p = make_params(2, 1.0, 1.0, 2 * math.pi)
        cfg = make_moment_config(p, m0=p.m)
        return p, cfg, MomentConstants(cfg.c1, cfg.c2, cfg.c3)

    def test_closed_form_blowup_time(self):
        p, cfg, consts = self.constants()
        y0 = 2.0 * cfg.c3 * cfg.m0 * cfg.s1 ** (2.0 - cfg.gamma)
        res = lower_ode(y0, consts, cfg.gamma, cfg.s1, p)
        assert res.hypotheses_met
        assert res.guaranteed
        # partial fractions: T = ln(1/k)/(2 A yc), k = (y0-yc)/(y0+yc)
        yc = math.sqrt(res.B / res.A)
        k = (y0 - yc) / (y0 + yc)
        expect = math.log(1.0 / k) / (2.0 * res.A * yc)
        assert res.blowup_time_closed_form == pytest.approx(expect, rel=1e-13)
        assert res.blowup_time_numeric == pytest.approx(
            res.blowup_time_closed_form, rel=1e-9)

    def test_sampled_trajectory_is_increasing(self):
        p, cfg, consts = self.constants()
        y0 = 2.0 * cfg.c3 * cfg.m0 * cfg.s1 ** (2.0 - cfg.gamma)
        T = lower_ode(y0, consts, cfg.gamma, cfg.s1, p).blowup_time_closed_form
        ts = np.linspace(0.0, 0.9 * T, 12)
        res = lower_ode(y0, consts, cfg.gamma, cfg.s1, p, sample_times=ts)
        assert res.values is not None
        assert np.array_equal(res.times, ts)
        assert np.all(np.diff(res.values) > 0)
        assert res.values[0] == y0

    def test_subcritical_start_is_flagged(self):
        p, cfg, consts = self.constants()
        yc = math.sqrt(
            (cfg.c1 * cfg.s1 ** (3.0 - 4.0 / p.n + 2.0 * p.beta / p.n - cfg.gamma)
             + cfg.c2 * p.m**2 / p.R ** (2 * p.n) * cfg.s1 ** (3.0 - cfg.gamma))
            / (4.0 * (1.0 - cfg.gamma) / p.n * cfg.s1 ** (cfg.gamma - 3.0)))
        res = lower_ode(0.5 * yc, consts, cfg.gamma, cfg.s1, p)
        assert not res.hypotheses_met
        assert not res.guaranteed
        assert math.isinf(res.blowup_time_closed_form)


@pytest.fixture(scope="module")
def blowup_run():
    """Small but genuinely blowing-up configuration (513-node graded grid)."""
    p = make_params(2, 1.0, 1.0, 2 * math.pi)
    cfg_m = make_moment_config(p, m0=p.m)
    g = make_sgrid(p.s_max, 513, "geometric")
    w0 = make_concentrated(p, p.m, cfg_m.s0, g)
    run = evolve(w0.profile, p, SolverConfig(t_end=1e-3, snapshot_dt=2.5e-7))
    return p, cfg_m, w0, run


class TestCertifyBlowup:
    def test_certified(self, blowup_run):
        p, cfg_m, w0, run = blowup_run
        cert = certify_blowup(run, w0, cfg_m, p)
        assert cert.verdict == "certified"
        assert all(c.passed for c in cert.checks.values())
        assert run.t_final <= 1.1 * cert.lower_ode_blowup_time
        assert cert.y0 >= cfg_m.c3 * cfg_m.m0 * cfg_m.s1 ** (2.0 - cfg_m.gamma) \
            * (1.0 - 1e-12)

    def test_check_order(self, blowup_run):
        p, cfg_m, w0, run = blowup_run
        cert = certify_blowup(run, w0, cfg_m, p)
        assert list(cert.checks) == ["config", "initial_data",
                                     "initial_moment", "ratio",
                                     "moment_series", "termination"]

    def test_tampered_termination_is_inconclusive(self, blowup_run):
        p, cfg_m, w0, run = blowup_run
        tampered = dataclasses.replace(run, termination="t_end")
        cert = certify_blowup(tampered, w0, cfg_m, p)
        assert cert.verdict == "inconclusive"
        assert not cert.checks["termination"].passed

    def test_stationary_run_fails_hypotheses(self, p2):
        g = make_sgrid(p2.s_max, 257, "geometric")
        w0p = WProfile(grid=g, values=p2.mu / p2.n * g.nodes, params=p2)
        cfg_m = make_moment_config(p2, m0=p2.m)
        run = evolve(w0p, p2, SolverConfig(t_end=0.01, snapshot_dt=0.005))
        cert = certify_blowup(run, WInitial.from_profile(w0p), cfg_m, p2)
        assert cert.verdict == "hypotheses-not-met"
        # the stationary line is nowhere near concentrated: both the
        # pointwise condition and the moment floor fail
        assert not cert.checks["initial_data"].passed
        assert not cert.checks["initial_moment"].passed


class TestSupersolution:
    def test_concave_run_stays_below_riccati_line(self, p2):
        g = make_sgrid(p2.s_max, 257, "geometric")
        w0 = make_concave_compatible(p2, 1.0, g)
        run = evolve(w0.profile, p2, SolverConfig(t_end=0.25, snapshot_dt=0.05))
        rep = check_supersolution(run, run.initial_max_slope, p2)
        assert rep.passed
        assert rep.worst_violation <= 0.0
        assert rep.blowup_time == pytest.approx(0.5, rel=1e-12)
        assert rep.checked_snapshots == len(run.snapshots)


class TestComparison:
    def make_pair(self, p2):
        g = make_sgrid(p2.s_max, 201, "uniform")
        lo = line_profile(g, params=p2, slope=p2.w_max / p2.s_max)
        hi = make_concave_compatible(p2, 1.0, g).profile
        cfg = SolverConfig(t_end=0.01, dt_policy="fixed", dt=1e-4,
                           snapshot_dt=2e-3)
        return evolve(lo, p2, cfg), evolve(hi, p2, cfg)

    def test_ordered_pair_stays_ordered(self, p2):
        rl, rh = self.make_pair(p2)
        rep = check_comparison(rl, rh)
        assert rep.passed
        assert rep.worst_violation <= 1e-8
        assert rep.snapshots_checked == len(rl.snapshots)

    def test_mismatched_grids_rejected(self, p2):
        rl, _ = self.make_pair(p2)
        g2 = make_sgrid(p2.s_max, 101, "uniform")
        other = evolve(make_concave_compatible(p2, 1.0, g2).profile, p2,
                       SolverConfig(t_end=0.01, dt_policy="fixed", dt=1e-4,
                                    snapshot_dt=2e-3))
        with pytest.raises(ValueError):
            check_comparison(rl, other)


class TestConcavity:
    def test_concave_profile_passes(self, p2):
        g = make_sgrid(p2.s_max, 129, "uniform")
        w = make_concave_compatible(p2, 1.0, g).profile
        assert check_concavity(w) <= 1e-9

    def test_convex_profile_fails_loudly(self):
        p = make_params(1, 1.0, 1.5, 2.0)  # w_max = 1, scale = 1
        g = make_sgrid(p.s_max, 65, "uniform")
        w = WProfile(grid=g, values=g.nodes**2, params=p)
        assert check_concavity(w) == pytest.approx(2.0, rel=1e-10)
