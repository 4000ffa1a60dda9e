"""Certificates: supersolution bounds, the singular moment functional, the
blow-up evidence chain, and discrete ordering/concavity checkers.

The blow-up certificate is a consistency record, not a proof: it verifies
numerically that a run's configuration satisfies the concentration
hypotheses, that the initial moment clears its theoretical floor, that the
sampled moment both satisfies the discrete integral inequality and dominates
the exploding comparison ODE, and that the solver terminated at the gradient
threshold no later than 10% past the ODE's blow-up time.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import NamedTuple

import numpy as np

from .domain import Params
from .initial_data import WInitial, validate
from .solver import EvolutionResult
from .transform import WProfile, _pow_diff

__all__ = [
    "MomentConfig",
    "MomentConstants",
    "Thresholds",
    "LowerOdeResult",
    "BlowupCertificate",
    "CheckOutcome",
    "SupersolutionReport",
    "ComparisonReport",
    "riccati",
    "check_supersolution",
    "choose_gamma",
    "moment_constants",
    "choose_thresholds",
    "make_moment_config",
    "config_violations",
    "moment",
    "weighted_square_moment",
    "cauchy_schwarz_sides",
    "lower_ode",
    "certify_blowup",
    "check_comparison",
    "check_concavity",
]

ODE_CEILING = 1e12  # a trajectory passing this counts as blown up


class MomentConstants(NamedTuple):
    c1: float
    c2: float
    c3: float


class Thresholds(NamedTuple):
    s0: float
    s1: float
    r0: float


@dataclass(frozen=True)
class MomentConfig:
    """Parameters of the singular moment functional and its thresholds."""

    gamma: float
    s0: float
    s1: float
    c1: float
    c2: float
    c3: float
    m0: float


def riccati(y0: float, n: int, t: float):
    """Closed-form solution of y' = n*y**2: y(t) = y0/(1 - n*y0*t).

    Returns (value, blowup_time) with blowup_time T* = 1/(n*y0).
    """
    if y0 <= 0:
        raise ValueError("y0 must be positive")
    if t < 0:
        raise ValueError("t must be nonnegative")
    t_star = 1.0 / (n * y0)
    if t >= t_star:
        raise ValueError(f"t = {t} is at or past the blow-up time {t_star}")
    return y0 / (1.0 - n * y0 * t), t_star


@dataclass(frozen=True)
class SupersolutionReport:
    passed: bool
    worst_violation: float
    worst_time: float
    worst_node: int
    blowup_time: float
    checked_snapshots: int


def check_supersolution(run: EvolutionResult, y0: float, params: Params,
                        tol: float = 1e-8) -> SupersolutionReport:
    """Verify w(s,t) <= y(t)*s nodewise on every snapshot with t < 0.95*T*,
    where y solves the slope Riccati equation from y0."""
    t_star = 1.0 / (params.n * y0)
    worst = -math.inf
    worst_t = 0.0
    worst_node = 0
    count = 0
    for snap in run.snapshots:
        if snap.time >= 0.95 * t_star:
            continue
        count += 1
        y = y0 / (1.0 - params.n * y0 * snap.time)
        gap = snap.values - y * snap.grid.nodes
        k = int(np.argmax(gap))
        if gap[k] > worst:
            worst, worst_t, worst_node = float(gap[k]), snap.time, k
    return SupersolutionReport(passed=worst <= tol, worst_violation=worst,
                               worst_time=worst_t, worst_node=worst_node,
                               blowup_time=t_star, checked_snapshots=count)


def choose_gamma(n: int, beta: float, override: float | None = None) -> float:
    """Largest admissible singular exponent, capped at 0.9.

    The admissibility bound is 1 - 2/n + beta/n, which must be positive
    (equivalently beta > 2 - n).
    """
    bound = 1.0 - 2.0 / n + beta / n
    if bound <= 0:
        raise ValueError(
            f"no admissible gamma: 1 - 2/n + beta/n = {bound} <= 0 "
            f"(requires beta > 2 - n)")
    if override is not None:
        if not (0.0 < override < 1.0 and override <= bound + 1e-15):
            raise ValueError(
                f"gamma override {override} outside (0, 1) or above the "
                f"admissible bound {bound}")
        return float(override)
    return min(bound, 0.9)


def moment_constants(n: int, beta: float, gamma: float,
                     omega_n: float) -> MomentConstants:
    """The three constants attached to the moment functional."""
    if not (0.0 < gamma < 1.0):
        raise ValueError("gamma must lie in (0, 1)")
    e = 2.0 - 2.0 / n + beta / n - gamma
    den = 3.0 - 4.0 / n + 2.0 * beta / n - gamma
    if den <= 0:
        raise ValueError(f"constant c1 undefined: denominator {den} <= 0")
    c1 = 8.0 * e * e * n**3 / den
    c2 = 2.0 * n / ((3.0 - gamma) * omega_n**2)
    c3 = (3.0 / (4.0 * omega_n)) * (1.0 / (1.0 - gamma) - 1.0 / (2.0 - gamma))
    return MomentConstants(c1=c1, c2=c2, c3=c3)


def choose_thresholds(params: Params, m0: float,
                      constants: MomentConstants, gamma: float) -> Thresholds:
    """Largest concentration thresholds compatible with both size bounds.

    s1 is the largest value at most (1 - 1e-6)*R^n satisfying
    s1^(2-4/n+2beta/n) <= (1-gamma)*c3^2*m0^2/(n*c1) and
    s1^2 <= (1-gamma)*c3^2*m0^2*R^(2n)/(n*c2*m^2); s0 = s1/2, and r0 is the
    concentration radius s0^(1/n).
    """
    if not (0 < m0 <= params.m):
        raise ValueError(f"need 0 < m0 <= m, got {m0!r}")
    n, beta = params.n, params.beta
    e1 = 2.0 - 4.0 / n + 2.0 * beta / n
    if e1 <= 0:
        raise ValueError(
            f"threshold exponent 2 - 4/n + 2*beta/n = {e1} <= 0 "
            f"(requires beta > 2 - n)")
    c1, c2, c3 = constants
    rhs1 = (1.0 - gamma) * c3**2 * m0**2 / (n * c1)
    bound1 = rhs1 ** (1.0 / e1)
    bound2 = math.sqrt((1.0 - gamma) * c3**2 * m0**2 * params.R ** (2 * n)
                       / (n * c2 * params.m**2))
    s1 = min(bound1, bound2, (1.0 - 1e-6) * params.s_max)
    th = Thresholds(s0=s1 / 2.0, s1=s1, r0=(s1 / 2.0) ** (1.0 / n))
    # post-hoc recheck of both size bounds
    assert s1 ** e1 <= rhs1 * (1 + 1e-12)
    assert s1**2 <= (1.0 - gamma) * c3**2 * m0**2 * params.R ** (2 * n) \
        / (n * c2 * params.m**2) * (1 + 1e-12)
    return th


def make_moment_config(params: Params, m0: float,
                       gamma_override: float | None = None) -> MomentConfig:
    """Full pipeline: exponent, constants, thresholds, bundled config."""
    gamma = choose_gamma(params.n, params.beta, override=gamma_override)
    consts = moment_constants(params.n, params.beta, gamma, params.omega_n)
    th = choose_thresholds(params, m0, consts, gamma)
    cfg = MomentConfig(gamma=gamma, s0=th.s0, s1=th.s1, c1=consts.c1,
                       c2=consts.c2, c3=consts.c3, m0=m0)
    bad = config_violations(cfg, params)
    if bad:
        raise ValueError("constructed config violates invariants: " + "; ".join(bad))
    return cfg


def config_violations(config: MomentConfig, params: Params) -> list:
    """All violated structural conditions of a moment config (empty = valid)."""
    n, beta = params.n, params.beta
    g = config.gamma
    out = []
    if not (0.0 < g < 1.0):
        out.append(f"gamma = {g} outside (0, 1)")
    bound = 1.0 - 2.0 / n + beta / n
    if g > bound + 1e-12:
        out.append(f"gamma = {g} exceeds admissible bound {bound}")
    if abs(config.s1 - 2.0 * config.s0) > 1e-12 * config.s1:
        out.append(f"s1 = {config.s1} is not 2*s0 = {2 * config.s0}")
    if not (0.0 < config.s0 < params.s_max / 2.0):
        out.append(f"s0 = {config.s0} outside (0, R^n/2)")
    if not (0.0 < config.m0 <= params.m):
        out.append(f"m0 = {config.m0} outside (0, m]")
    e1 = 2.0 - 4.0 / n + 2.0 * beta / n
    if e1 <= 0:
        out.append(f"threshold exponent {e1} <= 0")
    else:
        rhs1 = (1.0 - g) * config.c3**2 * config.m0**2 / (n * config.c1)
        if config.s1**e1 > rhs1 * (1 + 1e-12):
            out.append(
                f"size bound on s1^{e1:g} fails: {config.s1 ** e1:.6g} > {rhs1:.6g}")
        rhs2 = (1.0 - g) * config.c3**2 * config.m0**2 \
            * params.R ** (2 * n) / (n * config.c2 * params.m**2)
        if config.s1**2 > rhs2 * (1 + 1e-12):
            out.append(
                f"size bound on s1^2 fails: {config.s1 ** 2:.6g} > {rhs2:.6g}")
    return out


def _pl_cells(w: WProfile, s1: float):
    """Cell endpoints and linear coefficients of w on [grid start, s1]."""
    s = w.grid.nodes
    v = w.values
    if s1 > s[-1] * (1 + 1e-12):
        raise ValueError(f"s1 = {s1} beyond the profile's domain end {s[-1]}")
    hi = int(np.searchsorted(s, s1, side="left"))
    a = s[:hi]
    b = np.minimum(s[1:hi + 1], s1)
    sigma = (v[1:hi + 1] - v[:hi]) / (s[1:hi + 1] - s[:hi])
    alpha = v[:hi] - sigma * a
    keep = b > a
    return a[keep], b[keep], alpha[keep], sigma[keep]


def moment(w: WProfile, gamma: float, s1: float) -> float:
    """Singularly weighted moment: integral of s^(-gamma)*(s1-s)*w over [0, s1].

    Product integration: w is piecewise linear on its grid and the weight is
    integrated exactly against it cell by cell, including the integrable
    singularity at s = 0.  Profiles on [eps, R^n] are extended by zero below
    their left endpoint.
    """
    if not (0.0 < gamma < 1.0):
        raise ValueError("gamma must lie in (0, 1)")
    if s1 <= 0:
        raise ValueError("s1 must be positive")
    a, b, alpha, sigma = _pl_cells(w, s1)
    i0 = _pow_diff(a, b, 1.0 - gamma) / (1.0 - gamma)
    i1 = _pow_diff(a, b, 2.0 - gamma) / (2.0 - gamma)
    i2 = _pow_diff(a, b, 3.0 - gamma) / (3.0 - gamma)
    cells = (alpha * s1 * i0 + (sigma * s1 - alpha) * i1 - sigma * i2)
    return float(np.sum(cells.astype(np.longdouble)))


def weighted_square_moment(w: WProfile, gamma: float, s1: float) -> float:
    """Integral of s^(-gamma)*w(s)^2 over [0, s1], exact for piecewise-linear w."""
    if not (0.0 < gamma < 1.0):
        raise ValueError("gamma must lie in (0, 1)")
    a, b, alpha, sigma = _pl_cells(w, s1)
    i0 = _pow_diff(a, b, 1.0 - gamma) / (1.0 - gamma)
    i1 = _pow_diff(a, b, 2.0 - gamma) / (2.0 - gamma)
    i2 = _pow_diff(a, b, 3.0 - gamma) / (3.0 - gamma)
    cells = alpha**2 * i0 + 2.0 * alpha * sigma * i1 + sigma**2 * i2
    return float(np.sum(cells.astype(np.longdouble)))


def cauchy_schwarz_sides(w: WProfile, gamma: float, s1: float):
    """Both sides of the moment's Cauchy-Schwarz bound:
    lhs = moment^2, rhs = (integral of s^(-gamma) w^2) * s1^(3-gamma)/(1-gamma)."""
    lhs = moment(w, gamma, s1) ** 2
    rhs = weighted_square_moment(w, gamma, s1) * s1 ** (3.0 - gamma) / (1.0 - gamma)
    return lhs, rhs


@dataclass(frozen=True)
class LowerOdeResult:
    """Trajectory of the drained Riccati comparison ODE.

    The ODE is ybar' = A*ybar^2 - B with A = 4*(1-gamma)/n * s1^(gamma-3)
    and constant drain B; its closed-form blow-up time (partial fractions)
    is cross-checked against the numerical integration.  hypotheses_met
    records the ratio condition B <= (A/2)*y0^2.
    """

    A: float
    B: float
    y0: float
    ratio: float
    hypotheses_met: bool
    yc: float
    blowup_time_closed_form: float
    blowup_time_numeric: float
    times: np.ndarray | None
    values: np.ndarray | None
    guaranteed: bool


def _rk4_span(y: float, t0: float, t1: float, A: float, B: float) -> float:
    """Integrate ybar' = A*ybar^2 - B from t0 to t1 with adaptive RK4."""
    t = t0
    while t < t1:
        f0 = A * y * y - B
        scale = abs(y) / max(abs(f0), 1e-300)
        dt = min(0.002 * scale, t1 - t)
        if dt <= 0 or not np.isfinite(dt):
            dt = t1 - t
        if t + dt == t:
            # dt has underflowed against t: y is already effectively
            # infinite on this span's scale, stop instead of spinning
            break
        k1 = A * y * y - B
        y2 = y + 0.5 * dt * k1
        k2 = A * y2 * y2 - B
        y3 = y + 0.5 * dt * k2
        k3 = A * y3 * y3 - B
        y4 = y + dt * k3
        k4 = A * y4 * y4 - B
        y = y + dt / 6.0 * (k1 + 2 * k2 + 2 * k3 + k4)
        t += dt
        if y > ODE_CEILING:
            break
    return y


def lower_ode(y0: float, constants: MomentConstants, gamma: float, s1: float,
              params: Params, sample_times=None) -> LowerOdeResult:
    """Build and integrate the comparison ODE for an initial moment y0."""
    n, beta = params.n, params.beta
    A = 4.0 * (1.0 - gamma) / n * s1 ** (gamma - 3.0)
    B = constants.c1 * s1 ** (3.0 - 4.0 / n + 2.0 * beta / n - gamma) \
        + constants.c2 * params.m**2 / params.R ** (2 * n) * s1 ** (3.0 - gamma)
    if y0 > 0:
        ratio = B / ((2.0 * (1.0 - gamma) / n) * s1 ** (gamma - 3.0) * y0**2)
    else:
        ratio = math.inf
    hypotheses_met = ratio <= 1.0 + 1e-12

    if B == 0.0:
        yc = 0.0
        T_closed = 1.0 / (A * y0) if y0 > 0 else math.inf
    else:
        yc = math.sqrt(B / A)
        if y0 > yc:
            k = (y0 - yc) / (y0 + yc)
            T_closed = math.log(1.0 / k) / (2.0 * A * yc)
        else:
            T_closed = math.inf
    guaranteed = hypotheses_met and math.isfinite(T_closed)

    # numerical trajectory at the requested sample times
    values = None
    times = None
    if sample_times is not None:
        times = np.asarray(sample_times, dtype=float)
        values = np.empty_like(times)
        y = y0
        t_prev = 0.0
        for i, ti in enumerate(times):
            if ti > t_prev:
                y = _rk4_span(y, t_prev, ti, A, B)
                t_prev = ti
            values[i] = min(y, ODE_CEILING)

    # numerical blow-up time, independent of the sampling
    T_num = math.inf
    if math.isfinite(T_closed):
        y = y0
        t = 0.0
        while y < ODE_CEILING:
            f = A * y * y - B
            if f <= 0:
                t = math.inf
                break
            dt = 0.002 * y / f
            if t + dt == t:
                break  # time step underflowed: y is past any finite scale
            y = _rk4_span(y, t, t + dt, A, B)
            t += dt
        if math.isfinite(t):
            # analytic tail: time-to-infinity from a large y is ~ 1/(A*y)
            T_num = t + 1.0 / (A * max(y, 1.0))

    return LowerOdeResult(A=A, B=B, y0=y0, ratio=ratio,
                          hypotheses_met=hypotheses_met, yc=yc,
                          blowup_time_closed_form=T_closed,
                          blowup_time_numeric=T_num,
                          times=times, values=values, guaranteed=guaranteed)


@dataclass(frozen=True)
class CheckOutcome:
    passed: bool
    detail: str


@dataclass(frozen=True)
class BlowupCertificate:
    """Recorded evidence chain for a blow-up run.

    verdict is one of "certified", "hypotheses-not-met", "inconclusive".
    Certified means: the configuration and initial data satisfied every
    concentration hypothesis, the initial moment cleared its floor, the
    ratio condition held, the sampled moment satisfied the discrete integral
    inequality while dominating the comparison ODE, and the solver hit the
    gradient threshold no later than 1.1x the ODE blow-up time.  This is a
    numerical consistency record, not a proof.
    """

    config: MomentConfig
    y0: float
    lower: LowerOdeResult
    moment_times: np.ndarray
    moment_values: np.ndarray
    lower_values: np.ndarray | None
    checks: dict
    verdict: str

    @property
    def lower_ode_blowup_time(self) -> float:
        return self.lower.blowup_time_closed_form


def certify_blowup(run: EvolutionResult, w0: WInitial, config: MomentConfig,
                   params: Params) -> BlowupCertificate:
    """Assemble the evidence chain for a run that should blow up."""
    checks = {}

    bad = config_violations(config, params)
    checks["config"] = CheckOutcome(not bad, "; ".join(bad) or "all invariants hold")

    report = validate(w0, params, moment_config=config)
    names = ("boundary_values", "monotone", "concentration")
    fails = [nm for nm in names if nm in report.entries
             and not report.entries[nm].passed]
    checks["initial_data"] = CheckOutcome(
        not fails, ("violated: " + ", ".join(fails)) if fails
        else "boundary, monotonicity, and concentration hold")

    y0m = moment(w0.profile, config.gamma, config.s1)
    floor = config.c3 * config.m0 * config.s1 ** (2.0 - config.gamma)
    ok_y0 = y0m >= floor * (1.0 - 1e-12)
    checks["initial_moment"] = CheckOutcome(
        ok_y0, f"moment(w0) = {y0m:.6g} vs floor {floor:.6g}")

    constants = MomentConstants(config.c1, config.c2, config.c3)
    snap_times = np.array([s.time for s in run.snapshots])
    low = lower_ode(y0m, constants, config.gamma, config.s1, params,
                    sample_times=snap_times)
    checks["ratio"] = CheckOutcome(
        low.hypotheses_met, f"drain ratio = {low.ratio:.6g} (needs <= 1)")

    hypotheses_ok = all(checks[k].passed for k in
                        ("config", "initial_data", "initial_moment", "ratio"))

    y_vals = np.array([moment(s, config.gamma, config.s1) for s in run.snapshots])
    worst_ineq = math.inf
    worst_dom = math.inf
    if len(y_vals) >= 1:
        integrand = y_vals**2
        acc = np.concatenate(([0.0], np.cumsum(
            0.5 * (integrand[1:] + integrand[:-1]) * np.diff(snap_times))))
        required = y_vals[0] + low.A * acc - low.B * snap_times
        slack = 1e-9 * np.maximum.reduce([
            np.full_like(required, abs(y_vals[0])),
            np.abs(low.A * acc), np.abs(low.B * snap_times), np.abs(y_vals)])
        worst_ineq = float(np.min(y_vals - (required - slack)))
        if low.values is not None:
            worst_dom = float(np.min(y_vals - low.values * (1.0 - 1e-9)))
    series_ok = worst_ineq >= 0.0 and worst_dom >= 0.0
    checks["moment_series"] = CheckOutcome(
        series_ok,
        f"worst integral-inequality margin {worst_ineq:.3e}, "
        f"worst domination margin {worst_dom:.3e}")

    term_ok = (run.termination == "gradient_threshold"
               and math.isfinite(low.blowup_time_closed_form)
               and run.t_final <= 1.1 * low.blowup_time_closed_form)
    checks["termination"] = CheckOutcome(
        term_ok,
        f"termination = {run.termination} at t = {run.t_final:.6g}, "
        f"ODE blow-up time T = {low.blowup_time_closed_form:.6g} "
        f"(timing bound 1.1*T is an artifact choice)")

    if not hypotheses_ok:
        verdict = "hypotheses-not-met"
    elif series_ok and term_ok:
        verdict = "certified"
    else:
        verdict = "inconclusive"

    return BlowupCertificate(config=config, y0=y0m, lower=low,
                             moment_times=snap_times, moment_values=y_vals,
                             lower_values=low.values, checks=checks,
                             verdict=verdict)


@dataclass(frozen=True)
class ComparisonReport:
    passed: bool
    worst_violation: float
    worst_time: float
    worst_node: int
    snapshots_checked: int


def check_comparison(lower: EvolutionResult, upper: EvolutionResult,
                     tol: float = 1e-8) -> ComparisonReport:
    """Verify nodewise ordering lower <= upper at every shared snapshot.

    Both runs must share the grid and the snapshot times; comparison runs
    are produced with a fixed time step for exactly this reason.
    """
    ga = lower.snapshots[0].grid.nodes
    gb = upper.snapshots[0].grid.nodes
    if ga.shape != gb.shape or not np.array_equal(ga, gb):
        raise ValueError("runs use different grids; ordering is undefined")
    if len(lower.snapshots) != len(upper.snapshots):
        raise ValueError("runs recorded different snapshot counts")
    ta, tb = lower.times, upper.times
    if not np.allclose(ta, tb, rtol=0.0, atol=1e-12 * max(1.0, ta[-1])):
        raise ValueError("runs recorded different snapshot times")

    worst = -math.inf
    worst_t = 0.0
    worst_node = 0
    for sa, sb in zip(lower.snapshots, upper.snapshots):
        gap = sa.values - sb.values
        k = int(np.argmax(gap))
        if gap[k] > worst:
            worst, worst_t, worst_node = float(gap[k]), sa.time, k
    return ComparisonReport(passed=worst <= tol, worst_violation=worst,
                            worst_time=worst_t, worst_node=worst_node,
                            snapshots_checked=len(lower.snapshots))


def check_concavity(w: WProfile) -> float:
    """Worst (most positive) divided second difference over interior nodes,
    scaled by the natural curvature unit (m/omega_n)/R^(2n).

    Values at or below ~1e-9 mean the profile is concave to tolerance; a
    convex profile returns a large positive value.
    """
    if w.params is None:
        raise ValueError("profile carries no params")
    s = w.grid.nodes
    h = np.diff(s)
    cell = np.diff(w.values) / h
    d2 = 2.0 * np.diff(cell) / (h[:-1] + h[1:])
    scale = w.params.w_max / w.params.s_max**2
    return float(np.max(d2) / scale)
