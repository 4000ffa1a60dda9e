"""Generators and validators for admissible initial accumulation profiles.

Two families are provided: concave profiles with flat endpoint derivatives
(the hypotheses under which concavity is preserved and the gradient stays
bounded for a while), and concentrated profiles placing a prescribed mass
fraction inside a small volume (the hypothesis driving the blow-up
certificate).  Validation re-checks every advertised hypothesis on the
discrete data and reports worst violations.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from .domain import Params, SGrid
from .transform import WProfile

__all__ = [
    "WInitial",
    "CheckResult",
    "HypothesisReport",
    "make_concave_compatible",
    "make_concentrated",
    "validate",
    "regularized_initial",
    "eps_subgrid",
    "scaled_second_differences",
]

# ramp shapes P: [0,1] -> [0,1]; each entry is (P, P', P'', smoothness tag)
# quartic: concave everywhere with P''(0)=P'(1)=P''(1)=0, the only shape here
# meeting both the concavity and the endpoint-flatness requirements exactly
_SHAPES = {
    "quartic": (
        lambda x: x * (2.0 + x * x * (x - 2.0)),
        lambda x: 2.0 - 6.0 * x * x + 4.0 * x**3,
        lambda x: 12.0 * x * (x - 1.0),
        "C2-compatible(quartic)",
    ),
    "quadratic": (
        lambda x: x * (2.0 - x),
        lambda x: 2.0 - 2.0 * x,
        lambda x: -2.0 * np.ones_like(np.asarray(x, dtype=float)),
        "C1(quadratic)",
    ),
    "quintic": (
        lambda x: x**3 * (10.0 + x * (6.0 * x - 15.0)),
        lambda x: 30.0 * x**2 * (x - 1.0) ** 2,
        lambda x: 60.0 * x * (2.0 * x - 1.0) * (x - 1.0),
        "C2-compatible(quintic)",
    ),
}

CONCAVITY_TOL = 1e-9  # on second differences scaled by (m/omega_n)/R^(2n)


@dataclass(frozen=True)
class WInitial:
    """A generated initial profile with its advertised hypotheses.

    hypothesis_flags keys: boundary_values, monotone, concave,
    endpoint_compatible, concentrated.  endpoint_derivatives, when present,
    carries the generator's closed-form w_ss(0), w_s(R^n), w_ss(R^n); grid
    estimates of these are first-order at best, so validation prefers the
    exact values.
    """

    profile: WProfile
    smoothness_tag: str
    hypothesis_flags: dict = field(default_factory=dict)
    endpoint_derivatives: dict | None = None

    @classmethod
    def from_profile(cls, profile: WProfile, tag: str = "file") -> "WInitial":
        return cls(profile=profile, smoothness_tag=tag)


@dataclass(frozen=True)
class CheckResult:
    passed: bool
    worst_value: float
    worst_node: int
    detail: str = ""


@dataclass(frozen=True)
class HypothesisReport:
    entries: dict

    @property
    def all_passed(self) -> bool:
        return all(e.passed for e in self.entries.values())

    def lines(self) -> list[str]:
        out = []
        for name, e in self.entries.items():
            status = "pass" if e.passed else "FAIL"
            out.append(f"{name}: {status} worst={e.worst_value:.3e}"
                       f" node={e.worst_node} {e.detail}".rstrip())
        return out


def scaled_second_differences(w: WProfile, params: Params) -> np.ndarray:
    """Divided second differences at interior nodes, in units of the
    profile's natural curvature scale (m/omega_n)/R^(2n)."""
    s = w.grid.nodes
    h = np.diff(s)
    cell = np.diff(w.values) / h
    d2 = 2.0 * np.diff(cell) / (h[:-1] + h[1:])
    scale = params.w_max / params.s_max**2
    return d2 / scale


def _require_full_domain(grid: SGrid, params: Params):
    if abs(grid.start) > 1e-12 * params.s_max:
        raise ValueError("initial-data grid must start at s = 0")
    if abs(grid.stop - params.s_max) > 1e-9 * params.s_max:
        raise ValueError(
            f"grid ends at {grid.stop}, expected R**n = {params.s_max}")


def make_concave_compatible(params: Params, steepness: float, grid: SGrid,
                            shape: str = "quartic") -> WInitial:
    """Concave monotone profile rising to m/omega_n over s in [0, R^n/steepness].

    The profile is w0(s) = (m/omega_n) * P(min(s/s_c, 1)) with s_c =
    R^n/steepness.  The default quartic ramp P(x) = 2x - 2x^3 + x^4 is
    concave with P''(0) = P'(1) = P''(1) = 0, so both the concavity and the
    endpoint-flatness hypotheses hold exactly.  The quadratic ramp x(2-x) is
    concave but has P''(0) = -2 (endpoint flag honest False); the quintic
    smoothstep has flat endpoints but is convex on the lower half of the
    ramp, so the mandatory per-profile concavity verification rejects it.
    """
    if shape not in _SHAPES:
        raise ValueError(f"unknown shape {shape!r}; choose from {sorted(_SHAPES)}")
    if not steepness >= 1.0:
        raise ValueError("steepness must be >= 1 so the ramp completes inside the domain")
    _require_full_domain(grid, params)
    P, dP, d2P, tag = _SHAPES[shape]
    s_c = params.s_max / steepness
    x = np.minimum(grid.nodes / s_c, 1.0)
    values = params.w_max * P(x)
    values[0] = 0.0
    values[-1] = params.w_max
    profile = WProfile(grid=grid, values=values, time=0.0, params=params)

    worst = scaled_second_differences(profile, params)
    k = int(np.argmax(worst))
    if worst[k] > CONCAVITY_TOL:
        raise ValueError(
            f"generated profile is not concave on this grid: scaled second "
            f"difference {worst[k]:.3e} at node {k + 1} "
            f"(s = {grid.nodes[k + 1]:.6g}) exceeds {CONCAVITY_TOL}; "
            f"shape {shape!r} with steepness {steepness} is inadmissible")

    # closed-form endpoint derivatives of the construction
    amp = params.w_max
    if steepness > 1.0:
        d1_right, d2_right = 0.0, 0.0  # constant plateau beyond s_c
    else:
        d1_right = amp * float(dP(1.0)) / s_c
        d2_right = amp * float(d2P(1.0)) / s_c**2
    endpoint = {
        "d2_left": amp * float(d2P(0.0)) / s_c**2,
        "d1_right": d1_right,
        "d2_right": d2_right,
    }
    compatible = (abs(endpoint["d2_left"]) <= 1e-15 * amp / s_c**2
                  and abs(endpoint["d1_right"]) <= 1e-15 * amp / s_c
                  and abs(endpoint["d2_right"]) <= 1e-15 * amp / s_c**2)
    flags = {
        "boundary_values": True,
        "monotone": True,
        "concave": True,
        "endpoint_compatible": compatible,
        "concentrated": False,
    }
    return WInitial(profile=profile, smoothness_tag=tag,
                    hypothesis_flags=flags, endpoint_derivatives=endpoint)


def make_concentrated(params: Params, m0: float, s0: float, grid: SGrid,
                      ramp_frac: float = 0.005) -> WInitial:
    """Profile carrying mass m0 inside the volume s0.

    A concave quadratic ramp lifts w0 from 0 to m0/omega_n over [0, s_r]
    with s_r = ramp_frac*s0, a plateau holds that value through s0, and a
    linear segment carries the remaining mass up to m/omega_n at R^n.  The
    narrow ramp keeps the singularly weighted moment of the profile above
    the theoretical floor for the concentration it advertises.
    """
    if not (0 < m0 <= params.m):
        raise ValueError(f"need 0 < m0 <= m, got m0 = {m0!r} with m = {params.m}")
    if not (0 < s0 < params.s_max):
        raise ValueError(f"need 0 < s0 < R**n = {params.s_max}, got {s0!r}")
    if not (0 < ramp_frac < 1):
        raise ValueError(f"ramp_frac must lie in (0, 1), got {ramp_frac!r}")
    _require_full_domain(grid, params)

    s = grid.nodes
    s_r = ramp_frac * s0
    level = m0 / params.omega_n
    values = np.empty_like(s)

    ramp = s < s_r
    x = s[ramp] / s_r
    values[ramp] = level * x * (2.0 - x)
    plateau = (s >= s_r) & (s <= s0)
    values[plateau] = level
    tail = s > s0
    values[tail] = level + (params.w_max - level) * (s[tail] - s0) \
        / (params.s_max - s0)
    values[0] = 0.0
    values[-1] = params.w_max

    profile = WProfile(grid=grid, values=values, time=0.0, params=params)
    d2 = scaled_second_differences(profile, params)
    flags = {
        "boundary_values": True,
        "monotone": True,
        "concave": bool(np.max(d2) <= CONCAVITY_TOL),
        "endpoint_compatible": False,
        "concentrated": True,
    }
    return WInitial(profile=profile, smoothness_tag="continuous(concentrated)",
                    hypothesis_flags=flags, endpoint_derivatives=None)


def validate(w0: WInitial, params: Params, moment_config=None) -> HypothesisReport:
    """Re-check every structural hypothesis on the discrete profile.

    Reports boundary values, monotonicity, concavity, endpoint
    compatibility, and (when a moment config is supplied) the concentration
    condition w0(s0) >= m0/omega_n.  Endpoint compatibility uses the
    generator's closed-form derivatives when available; otherwise it falls
    back to grid estimates, whose truncation error forces a looser 1e-6
    tolerance.
    """
    prof = w0.profile
    s = prof.grid.nodes
    vals = prof.values
    entries = {}

    b0 = abs(vals[0])
    b1 = abs(vals[-1] - params.w_max)
    worst_b = max(b0, b1)
    entries["boundary_values"] = CheckResult(
        passed=worst_b <= 1e-12 * params.w_max,
        worst_value=worst_b,
        worst_node=0 if b0 >= b1 else len(vals) - 1)

    slopes = np.diff(vals) / np.diff(s)
    k = int(np.argmin(slopes))
    slope_tol = 1e-10 * params.w_max / params.s_max
    entries["monotone"] = CheckResult(
        passed=bool(slopes[k] >= -slope_tol),
        worst_value=float(slopes[k]), worst_node=k)

    d2 = scaled_second_differences(prof, params)
    k = int(np.argmax(d2))
    entries["concave"] = CheckResult(
        passed=bool(d2[k] <= CONCAVITY_TOL),
        worst_value=float(d2[k]), worst_node=k + 1,
        detail="scaled by (m/omega_n)/R^(2n)")

    scale1 = params.w_max / params.s_max
    scale2 = params.w_max / params.s_max**2
    if w0.endpoint_derivatives is not None:
        e = w0.endpoint_derivatives
        viol = max(abs(e["d2_left"]) / scale2, abs(e["d1_right"]) / scale1,
                   abs(e["d2_right"]) / scale2)
        entries["endpoint_compatibility"] = CheckResult(
            passed=viol <= 1e-9, worst_value=viol, worst_node=0,
            detail="closed-form endpoint derivatives")
    else:
        h = np.diff(s)
        cell = np.diff(vals) / h
        d2l = 2.0 * (cell[1] - cell[0]) / (h[0] + h[1])
        d2r = 2.0 * (cell[-1] - cell[-2]) / (h[-1] + h[-2])
        d1r = cell[-1] * (2 * h[-1] + h[-2]) / (h[-1] + h[-2]) \
            - cell[-2] * h[-1] / (h[-1] + h[-2])
        viol = max(abs(d2l) / scale2, abs(d1r) / scale1, abs(d2r) / scale2)
        entries["endpoint_compatibility"] = CheckResult(
            passed=viol <= 1e-6, worst_value=viol, worst_node=0,
            detail="grid estimate (first-order), tolerance 1e-6")

    if moment_config is not None:
        w_at_s0 = float(np.interp(moment_config.s0, s, vals))
        need = moment_config.m0 / params.omega_n
        entries["concentration"] = CheckResult(
            passed=w_at_s0 >= need - 1e-12 * params.w_max,
            worst_value=w_at_s0 - need, worst_node=int(np.searchsorted(s, moment_config.s0)),
            detail=f"w0(s0) = {w_at_s0:.6g} vs m0/omega_n = {need:.6g}")

    return HypothesisReport(entries=entries)


def eps_subgrid(base: SGrid, eps: float) -> SGrid:
    """Restrict a grid to [eps, stop], inserting eps as the first node.

    Base nodes closer to eps than half the local spacing are dropped so the
    inserted node cannot create a degenerate cell; every kept node is a base
    node, which keeps members of a regularization family comparable at
    genuinely shared coordinates.
    """
    nodes = base.nodes
    if not (base.start <= eps < base.stop):
        raise ValueError(f"eps = {eps!r} outside grid range")
    i = int(np.searchsorted(nodes, eps, side="left"))
    if i < nodes.size and abs(nodes[i] - eps) == 0.0:
        kept = nodes[i:]
    else:
        h_local = nodes[i] - nodes[i - 1] if i > 0 else nodes[1] - nodes[0]
        j = i
        while j < nodes.size - 1 and nodes[j] - eps < 0.5 * h_local:
            j += 1
        kept = np.concatenate(([eps], nodes[j:]))
    if kept.size < 3:
        raise ValueError("eps leaves fewer than 3 grid nodes")
    return SGrid(kept, grading=base.grading)


def regularized_initial(w0: WInitial, eps: float,
                        grid: SGrid | None = None) -> WProfile:
    """Initial datum of the regularized problem on [eps, R^n].

    w0_eps(s) = w0(R^n (s - eps)/(R^n - eps)), evaluated by monotone
    piecewise-linear interpolation of the sampled profile; endpoint values
    are imposed exactly.  The family is pointwise nondecreasing as eps
    decreases.
    """
    prof = w0.profile
    params = prof.params
    s_max = params.s_max
    if not (0 < eps < s_max):
        raise ValueError(f"need 0 < eps < R**n = {s_max}, got {eps!r}")
    if grid is None:
        grid = eps_subgrid(prof.grid, eps)
    if abs(grid.start - eps) > 1e-12 * s_max:
        raise ValueError("target grid must start at eps")
    pulled = s_max * (grid.nodes - eps) / (s_max - eps)
    vals = np.interp(pulled, prof.grid.nodes, prof.values)
    vals[0] = 0.0
    vals[-1] = prof.values[-1]
    return WProfile(grid=grid, values=vals, time=0.0, params=params)
