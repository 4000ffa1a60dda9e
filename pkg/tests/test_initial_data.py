"""Initial profile generators and their hypothesis bookkeeping."""

import math

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from degenchem import (WInitial, WProfile, eps_subgrid, make_concave_compatible,
                       make_concentrated, make_moment_config, make_params,
                       make_sgrid, regularized_initial,
                       scaled_second_differences, validate)


class TestConcaveCompatible:
    def test_quartic_midpoint_value(self, p2):
        # P(x) = 2x - 2x^3 + x^4, P(1/2) = 13/16 = 0.8125 exactly
        g = make_sgrid(p2.s_max, 9, "uniform")
        w0 = make_concave_compatible(p2, 1.0, g)
        k = np.searchsorted(g.nodes, 0.5)
        assert g.nodes[k] == 0.5
        assert w0.profile.values[k] == pytest.approx(0.8125 * p2.w_max,
                                                     rel=1e-14)

    def test_quartic_flags_and_derivatives(self, p2):
        g = make_sgrid(p2.s_max, 129, "uniform")
        w0 = make_concave_compatible(p2, 1.0, g)
        assert w0.hypothesis_flags == {
            "boundary_values": True, "monotone": True, "concave": True,
            "endpoint_compatible": True, "concentrated": False,
        }
        d = w0.endpoint_derivatives
        assert d["d2_left"] == 0.0
        assert d["d1_right"] == 0.0
        assert d["d2_right"] == 0.0

    def test_boundary_values_exact(self, p2):
        g = make_sgrid(p2.s_max, 65, "geometric")
        w0 = make_concave_compatible(p2, 3.0, g)
        assert w0.profile.values[0] == 0.0
        assert w0.profile.values[-1] == p2.w_max

    def test_plateau_beyond_ramp(self, p2):
        g = make_sgrid(p2.s_max, 129, "uniform")
        w0 = make_concave_compatible(p2, 2.0, g)
        past = g.nodes >= 0.5
        assert np.all(w0.profile.values[past] == p2.w_max)
        # the plateau makes the right endpoint derivatives exact zeros
        assert w0.endpoint_derivatives["d1_right"] == 0.0
        assert w0.endpoint_derivatives["d2_right"] == 0.0

    def test_quadratic_is_concave_but_not_compatible(self, p2):
        g = make_sgrid(p2.s_max, 129, "uniform")
        w0 = make_concave_compatible(p2, 1.0, g, shape="quadratic")
        assert w0.hypothesis_flags["concave"] is True
        assert w0.hypothesis_flags["endpoint_compatible"] is False
        # P''(0) = -2 for x(2 - x)
        assert w0.endpoint_derivatives["d2_left"] == pytest.approx(
            -2.0 * p2.w_max / p2.s_max**2, rel=1e-14)

    def test_quintic_rejected_by_concavity_check(self, p2):
        # the smoothstep has flat endpoints but is convex on the lower half
        g = make_sgrid(p2.s_max, 129, "uniform")
        with pytest.raises(ValueError, match="not concave"):
            make_concave_compatible(p2, 1.0, g, shape="quintic")

    def test_bad_arguments(self, p2):
        g = make_sgrid(p2.s_max, 33, "uniform")
        with pytest.raises(ValueError):
            make_concave_compatible(p2, 0.5, g)
        with pytest.raises(ValueError):
            make_concave_compatible(p2, 1.0, g, shape="bump")
        offset = make_sgrid(p2.s_max, 33, "uniform", start=0.1)
        with pytest.raises(ValueError):
            make_concave_compatible(p2, 1.0, offset)


class TestConcentrated:
    def test_plateau_level(self, p2):
        g = make_sgrid(p2.s_max, 513, "uniform")
        m0, s0 = p2.m / 2.0, 0.25
        w0 = make_concentrated(p2, m0, s0, g)
        k = np.searchsorted(g.nodes, s0)
        assert g.nodes[k] == s0
        assert w0.profile.values[k] == m0 / p2.omega_n
        flags = w0.hypothesis_flags
        assert flags["concentrated"] is True
        assert flags["monotone"] is True
        # the tail kinks upward at s0 when m0 < m
        assert flags["concave"] is False

    def test_full_mass_profile_is_concave(self, p2):
        g = make_sgrid(p2.s_max, 513, "geometric")
        w0 = make_concentrated(p2, p2.m, 0.25, g)
        assert w0.hypothesis_flags["concave"] is True
        assert np.all(np.diff(w0.profile.values) >= 0.0)

    def test_bad_arguments(self, p2):
        g = make_sgrid(p2.s_max, 33, "uniform")
        for m0, s0, rf in [(0.0, 0.25, 0.005), (2 * p2.m, 0.25, 0.005),
                           (p2.m, 0.0, 0.005), (p2.m, 1.5, 0.005),
                           (p2.m, 0.25, 0.0), (p2.m, 0.25, 1.0)]:
            with pytest.raises(ValueError):
                make_concentrated(p2, m0, s0, g, ramp_frac=rf)


class TestValidate:
    def test_quartic_passes_everything(self, p2):
        g = make_sgrid(p2.s_max, 257, "geometric")
        w0 = make_concave_compatible(p2, 2.0, g)
        report = validate(w0, p2)
        assert report.all_passed, "\n".join(report.lines())

    def test_concentration_check_with_config(self):
        p = make_params(2, 1.0, 1.0, 2 * math.pi)
        cfg = make_moment_config(p, m0=p.m)
        g = make_sgrid(p.s_max, 1025, "geometric")
        w0 = make_concentrated(p, cfg.m0, cfg.s0, g)
        report = validate(w0, p, moment_config=cfg)
        assert "concentration" in report.entries
        assert report.entries["concentration"].passed

    def test_detects_monotonicity_violation(self, p2):
        g = make_sgrid(p2.s_max, 33, "uniform")
        vals = p2.w_max * g.nodes / p2.s_max
        vals = vals.copy()
        vals[10] = vals[12]  # local decrease at node 11
        w0 = WInitial.from_profile(WProfile(grid=g, values=vals, params=p2))
        report = validate(w0, p2)
        assert not report.entries["monotone"].passed
        assert not report.all_passed

    def test_detects_boundary_violation(self, p2):
        g = make_sgrid(p2.s_max, 33, "uniform")
        vals = 0.5 * p2.w_max * g.nodes / p2.s_max  # ends below m/omega_n
        w0 = WInitial.from_profile(WProfile(grid=g, values=vals, params=p2))
        report = validate(w0, p2)
        assert not report.entries["boundary_values"].passed


class TestScaledSecondDifferences:
    def test_parabola(self):
        p = make_params(1, 1.0, 1.5, 2.0)  # w_max = 1, scale = 1
        g = make_sgrid(p.s_max, 65, "uniform")
        w = WProfile(grid=g, values=g.nodes**2, params=p)
        d2 = scaled_second_differences(w, p)
        assert np.allclose(d2, 2.0, rtol=1e-10)

    def test_linear_profile_is_flat(self, p2):
        g = make_sgrid(p2.s_max, 65, "uniform")
        w = WProfile(grid=g, values=0.31 * g.nodes, params=p2)
        assert np.abs(scaled_second_differences(w, p2)).max() < 1e-12


class TestEpsSubgrid:
    # dyadic 9-node grid so eps values land exactly on nodes when intended
    def base(self):
        return make_sgrid(1.0, 9, "uniform")

    def test_exact_node_is_kept(self):
        base = self.base()
        sub = eps_subgrid(base, 0.25)
        assert np.array_equal(sub.nodes, base.nodes[2:])

    def test_inserted_node(self):
        base = self.base()
        sub = eps_subgrid(base, 0.2)
        assert sub.nodes[0] == 0.2
        # 0.25 sits within half a cell of eps, so it is dropped
        assert sub.nodes[1] == 0.375
        assert np.all(np.diff(sub.nodes) > 0)

    def test_rejects_eps_outside_range(self):
        base = self.base()
        with pytest.raises(ValueError):
            eps_subgrid(base, 1.0)
        with pytest.raises(ValueError):
            eps_subgrid(base, -0.1)
        with pytest.raises(ValueError):
            eps_subgrid(base, 0.99)  # fewer than 3 nodes left


class TestRegularizedInitial:
    def test_linear_profile_closed_form(self):
        p = make_params(1, 1.0, 1.0, 2.0)  # omega_1 = 2, w_max = 1
        base = make_sgrid(p.s_max, 21, "uniform")
        w0 = WInitial.from_profile(
            WProfile(grid=base, values=base.nodes.copy(), params=p))
        we = regularized_initial(w0, 0.5)
        # pullback of w(s) = s with eps = 1/2 is 2s - 1 on [1/2, 1]
        assert np.allclose(we.values, 2.0 * we.grid.nodes - 1.0, atol=1e-14)
        assert we.values[0] == 0.0
        assert we.values[-1] == p.w_max == 1.0

    def test_endpoints_pinned(self, p2):
        g = make_sgrid(p2.s_max, 257, "geometric")
        w0 = make_concave_compatible(p2, 2.0, g)
        we = regularized_initial(w0, 0.1)
        assert we.grid.start == 0.1
        assert we.values[0] == 0.0
        assert we.values[-1] == p2.w_max

    @given(e1=st.floats(min_value=0.02, max_value=0.4),
           shrink=st.floats(min_value=0.1, max_value=0.9),
           steep=st.floats(min_value=1.0, max_value=5.0))
    @settings(max_examples=40, deadline=None)
    def test_family_is_ordered_in_eps(self, e1, shrink, steep):
        """Larger eps squeezes the profile toward the outer boundary, so
        profiles increase pointwise as eps decreases."""
        p = make_params(2, 1.0, 1.0, math.pi)
        base = make_sgrid(p.s_max, 101, "uniform")
        w0 = make_concave_compatible(p, steep, base)
        e2 = shrink * e1
        wa = regularized_initial(w0, e1)
        wb = regularized_initial(w0, e2)
        probe = base.nodes[base.nodes >= e1]
        va = np.interp(probe, wa.grid.nodes, wa.values)
        vb = np.interp(probe, wb.grid.nodes, wb.values)
        assert np.all(va <= vb + 1e-12 * p.w_max)
