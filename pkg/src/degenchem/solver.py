"""Time integration of the degenerate problem and its regularized family.

The marching scheme treats the degenerate diffusion implicitly (theta-scheme,
tridiagonal solve) and the advection explicitly with first-order upwinding,
the direction chosen per node by the sign of the local speed n*w - mu*(s-eps).
Dirichlet values are re-imposed exactly after every step, which pins the
boundary mass.  The time step follows a per-cell CFL bound on the advection
speed; diffusion adds no constraint at theta = 1.
"""

from __future__ import annotations

import time as _time
from dataclasses import dataclass, field, replace

import numpy as np

from . import kernels
from .domain import Params, SGrid
from .initial_data import WInitial, regularized_initial, eps_subgrid
from .transform import WProfile

__all__ = [
    "SolverConfig",
    "EvolutionResult",
    "FamilyResult",
    "step_eps",
    "evolve",
    "limit_family",
    "default_max_gradient",
]

DIAG_KEYS = ("t", "dt", "w_min", "w_max", "slope_min", "slope_max",
             "d2_min_scaled", "d2_max_scaled", "mass")


def default_max_gradient(params: Params) -> float:
    """Abort threshold for the max discrete slope: 1e6 mean slopes."""
    return 1e6 * params.w_max / params.s_max


@dataclass(frozen=True)
class SolverConfig:
    """Marching parameters.

    dt_policy "cfl" derives dt each step from the advection speeds (safety
    factor cfl_safety, cap dt_max, default t_end/100 so zero-speed states
    still march); "fixed" uses dt verbatim, which keeps time grids identical
    across comparison runs.  snapshot_dt lands snapshots on exact multiples
    by clipping dt; snapshot_stride records every k-th step instead.
    """

    t_end: float
    theta: float = 1.0
    dt_policy: str = "cfl"
    dt: float | None = None
    dt_max: float | None = None
    cfl_safety: float = 0.5
    eps_list: tuple = ()
    max_gradient: float | None = None
    snapshot_dt: float | None = None
    snapshot_stride: int | None = None

    def __post_init__(self):
        if not self.t_end > 0:
            raise ValueError("t_end must be positive")
        if not 0.0 <= self.theta <= 1.0:
            raise ValueError("theta must lie in [0, 1]")
        if self.dt_policy not in ("cfl", "fixed"):
            raise ValueError(f"unknown dt_policy {self.dt_policy!r}")
        if self.dt_policy == "fixed" and not (self.dt and self.dt > 0):
            raise ValueError("fixed dt_policy requires dt > 0")
        if not 0.0 < self.cfl_safety <= 1.0:
            raise ValueError("cfl_safety must lie in (0, 1]")
        eps = tuple(float(e) for e in self.eps_list)
        if any(e <= 0 for e in eps):
            raise ValueError("eps_list entries must be positive")
        if any(a <= b for a, b in zip(eps, eps[1:])):
            raise ValueError("eps_list must be strictly decreasing")
        object.__setattr__(self, "eps_list", eps)
        if self.max_gradient is not None and self.max_gradient <= 0:
            raise ValueError("max_gradient must be positive")


@dataclass
class EvolutionResult:
    """Trajectory snapshots plus per-step diagnostic scalars."""

    snapshots: list
    diagnostics: dict
    termination: str  # "t_end" | "gradient_threshold" | "step_failure"
    t_final: float
    eps: float
    params: Params
    initial_max_slope: float
    steps: int
    wall_time_s: float
    backend: str
    message: str = ""

    @property
    def times(self) -> np.ndarray:
        return np.array([s.time for s in self.snapshots])


def _stencils(grid: SGrid, params: Params):
    """Diffusion coefficient and divided-second-difference weights."""
    s = grid.nodes
    h = grid.spacings
    hl, hr = h[:-1], h[1:]
    cL = 2.0 / (hl * (hl + hr))
    cC = -2.0 / (hl * hr)
    cR = 2.0 / (hr * (hl + hr))
    p = 2.0 - 2.0 / params.n + params.beta / params.n
    kappa = params.n**2 * s[1:-1] ** p
    return s, h, kappa, cL, cC, cR


def step_eps(w: WProfile, dt: float, eps: float, params: Params,
             cfg: SolverConfig) -> WProfile:
    """Advance one step.  Boundary values are re-imposed from the profile's
    own end values, so the zero profile and regularized data are handled
    uniformly."""
    if dt <= 0:
        raise ValueError("dt must be positive")
    s, h, kappa, cL, cC, cR = _stencils(w.grid, params)
    vals = kernels.step(w.values, s, h, kappa, cL, cC, cR, params.n,
                        params.mu, eps, dt, cfg.theta,
                        float(w.values[0]), float(w.values[-1]))
    if not np.all(np.isfinite(vals)):
        raise FloatingPointError("step produced non-finite values")
    return WProfile(grid=w.grid, values=vals, time=w.time + dt, params=params)


def _cfl_dt(vals, s, h, n, mu, eps, safety, theta, kappa_cells):
    a = np.abs(kernels.advection_speeds(vals, s, n, mu, eps))
    cell_speed = np.maximum(a[:-1], a[1:])
    with np.errstate(divide="ignore"):
        dt = safety * np.min(np.where(cell_speed > 0, h / cell_speed, np.inf))
    if theta < 1.0:
        # explicit share of diffusion needs its own stability bound
        diff = np.min(h[:-1] * h[1:] / np.maximum(kappa_cells, 1e-300))
        dt = min(dt, safety * diff / (2.0 * (1.0 - theta)))
    return dt


def evolve(w0: WProfile, params: Params, cfg: SolverConfig,
           eps: float = 0.0) -> EvolutionResult:
    """March from w0 until t_end, the gradient threshold, or a failure.

    Diagnostics are recorded after every accepted step; snapshots at t = 0,
    at the configured cadence, and at the final state.
    """
    if eps < 0:
        raise ValueError("eps must be nonnegative")
    grid = w0.grid
    if eps > 0 and abs(grid.start - eps) > 1e-12 * params.s_max:
        raise ValueError("profile grid must start at eps for a regularized run")
    s, h, kappa, cL, cC, cR = _stencils(grid, params)
    max_grad = cfg.max_gradient if cfg.max_gradient is not None \
        else default_max_gradient(params)
    dt_max = cfg.dt_max if cfg.dt_max is not None else cfg.t_end / 100.0

    snap_times = None
    if cfg.snapshot_dt is not None:
        k = int(np.floor(cfg.t_end / cfg.snapshot_dt + 1e-9))
        snap_times = [i * cfg.snapshot_dt for i in range(1, k + 1)]
        if not snap_times or snap_times[-1] < cfg.t_end - 1e-12 * cfg.t_end:
            snap_times.append(cfg.t_end)
    stride = cfg.snapshot_stride

    vals = w0.values.copy()
    t = 0.0
    diags = {k: [] for k in DIAG_KEYS}
    w_left, w_right = float(vals[0]), float(vals[-1])
    initial_slope = float(np.max(np.diff(vals) / h))
    snapshots = [WProfile(grid=grid, values=vals.copy(), time=0.0, params=params)]
    termination = "t_end"
    message = ""
    scale_d2 = params.w_max / params.s_max**2
    backend = kernels.active_backend()
    next_snap_idx = 0
    wall0 = _time.perf_counter()
    step_count = 0

    while t < cfg.t_end * (1.0 - 1e-14):
        if cfg.dt_policy == "fixed":
            dt = cfg.dt
        else:
            dt = _cfl_dt(vals, s, h, params.n, params.mu, eps,
                         cfg.cfl_safety, cfg.theta, kappa)
            dt = min(dt, dt_max)
        dt = float(min(dt, cfg.t_end - t))
        if not np.isfinite(dt) or dt <= 1e-18 * cfg.t_end:
            termination = "step_failure"
            message = f"time step underflow (dt = {dt:.3g}) at t = {t:.6g}"
            break
        t_target = None
        if snap_times and next_snap_idx < len(snap_times):
            t_next = snap_times[next_snap_idx]
            if t + dt >= t_next - 1e-12 * max(t_next, dt):
                dt = t_next - t
                t_target = t_next

        new_vals = kernels.step(vals, s, h, kappa, cL, cC, cR, params.n,
                                params.mu, eps, dt, cfg.theta,
                                w_left, w_right)
        step_count += 1
        if not np.all(np.isfinite(new_vals)):
            termination = "step_failure"
            message = f"non-finite values at t = {t + dt:.6g} (step {step_count})"
            break
        vals = new_vals
        t = t_target if t_target is not None else t + dt

        slopes = np.diff(vals) / h
        cell2 = np.diff(slopes) / (0.5 * (h[:-1] + h[1:]))
        diags["t"].append(t)
        diags["dt"].append(dt)
        diags["w_min"].append(float(vals.min()))
        diags["w_max"].append(float(vals.max()))
        diags["slope_min"].append(float(slopes.min()))
        diags["slope_max"].append(float(slopes.max()))
        diags["d2_min_scaled"].append(float(cell2.min()) / scale_d2)
        diags["d2_max_scaled"].append(float(cell2.max()) / scale_d2)
        diags["mass"].append(params.omega_n * float(vals[-1]))

        took_snapshot = False
        if t_target is not None:
            next_snap_idx += 1
            snapshots.append(WProfile(grid=grid, values=vals.copy(), time=t,
                                      params=params))
            took_snapshot = True
        elif stride and step_count % stride == 0:
            snapshots.append(WProfile(grid=grid, values=vals.copy(), time=t,
                                      params=params))
            took_snapshot = True

        if diags["slope_max"][-1] > max_grad:
            termination = "gradient_threshold"
            message = (f"max slope {diags['slope_max'][-1]:.4g} exceeded "
                       f"{max_grad:.4g} at t = {t:.6g}")
            if not took_snapshot:
                snapshots.append(WProfile(grid=grid, values=vals.copy(),
                                          time=t, params=params))
            break

    wall = _time.perf_counter() - wall0
    if termination == "t_end" and snapshots[-1].time < t:
        snapshots.append(WProfile(grid=grid, values=vals.copy(), time=t,
                                  params=params))
    diag_arrays = {k: np.asarray(v, dtype=float) for k, v in diags.items()}
    return EvolutionResult(
        snapshots=snapshots, diagnostics=diag_arrays, termination=termination,
        t_final=float(t), eps=eps, params=params,
        initial_max_slope=initial_slope,
        steps=step_count, wall_time_s=wall, backend=backend, message=message)


@dataclass
class FamilyResult:
    """Monotone regularization family plus convergence indicators.

    probe_s are grid coordinates shared by all members (zero extension below
    a member's left endpoint); member_probe_values[i] has one row per shared
    snapshot time.  increments are sup-norm gaps between consecutive members
    at the final shared time on the probe window; t0_departure is the first
    snapshot time at which the finest member leaves zero near its left end
    (diagnostic only).
    """

    eps_list: tuple
    results: list
    probe_s: np.ndarray
    snapshot_times: np.ndarray
    member_probe_values: list
    worst_monotonicity_violation: float
    increments: list
    t0_departure: float | None
    failed: dict = field(default_factory=dict)

    @property
    def limit(self):
        done = [r for r in self.results if r.termination != "step_failure"]
        return done[-1] if done else None


def _eval_profile(prof: WProfile, where: np.ndarray) -> np.ndarray:
    """Piecewise-linear evaluation with zero extension below the grid."""
    out = np.interp(where, prof.grid.nodes, prof.values)
    out[where < prof.grid.start] = 0.0
    return out


def limit_family(w0: WInitial, params: Params, cfg: SolverConfig) -> FamilyResult:
    """Run every member of the regularization family and compare them.

    Members march from regularized_initial(w0, eps) on the eps-restricted
    grid; snapshot times are landed exactly so members are comparable.
    """
    if not cfg.eps_list:
        raise ValueError("cfg.eps_list must be nonempty")
    if any(e >= params.s_max for e in cfg.eps_list):
        raise ValueError("eps values must lie in (0, R**n)")
    if cfg.snapshot_dt is None:
        cfg = replace(cfg, snapshot_dt=cfg.t_end / 10.0)

    base = w0.profile.grid
    results = []
    failed = {}
    for e in cfg.eps_list:
        we = regularized_initial(w0, e, grid=eps_subgrid(base, e))
        res = evolve(we, params, cfg, eps=e)
        if res.termination == "step_failure":
            failed[e] = res.message
        results.append(res)

    ok = [r for r in results if r.termination != "step_failure"]
    if not ok:
        raise RuntimeError("every family member failed: " + "; ".join(failed.values()))
    n_snap = min(len(r.snapshots) for r in ok)
    times = ok[0].times[:n_snap]
    for r in ok[1:]:
        if not np.allclose(r.times[:n_snap], times, rtol=0, atol=1e-12):
            raise RuntimeError("family members disagree on snapshot times")

    lo = params.s_max / 10.0
    probe_s = base.nodes[base.nodes >= lo - 1e-12 * params.s_max]
    member_vals = []
    for r in ok:
        rows = [_eval_profile(r.snapshots[i], probe_s) for i in range(n_snap)]
        member_vals.append(np.asarray(rows))

    worst = 0.0
    for a, b in zip(member_vals, member_vals[1:]):
        # b belongs to the smaller eps and must dominate a
        worst = max(worst, float(np.max(a - b)))

    increments = [float(np.max(np.abs(b[-1] - a[-1])))
                  for a, b in zip(member_vals, member_vals[1:])]

    t0_departure = None
    fine = ok[-1]
    tol0 = 1e-3 * params.w_max
    probe0 = fine.snapshots[0].grid.nodes[1]
    for i in range(n_snap):
        v = float(np.interp(probe0, fine.snapshots[i].grid.nodes,
                            fine.snapshots[i].values))
        if v > tol0:
            t0_departure = float(times[i])
            break

    return FamilyResult(
        eps_list=cfg.eps_list, results=results, probe_s=probe_s,
        snapshot_times=times, member_probe_values=member_vals,
        worst_monotonicity_violation=worst, increments=increments,
        t0_departure=t0_departure, failed=failed)
