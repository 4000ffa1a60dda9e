"""Change of variables between radial densities and mass-accumulation profiles.

The forward map takes a radial density u(r) on (0, R] to
w(s) = integral of rho**(n-1)*u(rho) over [0, s**(1/n)], the cumulative mass
per solid angle as a function of the volume variable s = r**n.  The inverse
map is u(r) = n*w_s(r**n).  Signal quantities v_r and v are recovered from u
by the explicit integral formula, with v normalized to zero mean on [0, R].

All quadrature here is exact for piecewise-linear integrand data; cumulative
sums are carried in extended precision so that million-node profiles keep
~1e-13 relative accuracy.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .domain import Params, SGrid

__all__ = [
    "RadialProfile",
    "WProfile",
    "accumulate",
    "density_from_w",
    "signal_gradient",
    "signal_reconstruct",
    "total_mass",
    "radial_mass",
    "retransformed_mass",
]


@dataclass(frozen=True)
class RadialProfile:
    """Nodal values of a radial field (u, v_r, or v) on radii in (0, R]."""

    r_nodes: np.ndarray
    values: np.ndarray
    params: Params

    def __post_init__(self):
        r = np.asarray(self.r_nodes, dtype=float)
        vals = np.asarray(self.values, dtype=float)
        if r.ndim != 1 or r.size < 2:
            raise ValueError("radial profile needs at least 2 nodes")
        if vals.shape != r.shape:
            raise ValueError("values shape does not match r_nodes")
        if r[0] <= 0:
            raise ValueError("radial nodes must be positive (profiles live on (0, R])")
        if not np.all(np.diff(r) > 0):
            raise ValueError("radial nodes must be strictly increasing")
        r.setflags(write=False)
        vals.setflags(write=False)
        object.__setattr__(self, "r_nodes", r)
        object.__setattr__(self, "values", vals)


@dataclass(frozen=True)
class WProfile:
    """Spatial snapshot of the mass-accumulation function on an s-grid."""

    grid: SGrid
    values: np.ndarray
    time: float = 0.0
    params: Params | None = None

    def __post_init__(self):
        vals = np.asarray(self.values, dtype=float)
        if vals.shape != self.grid.nodes.shape:
            raise ValueError("values shape does not match grid")
        if self.time < 0:
            raise ValueError("time must be nonnegative")
        vals.setflags(write=False)
        object.__setattr__(self, "values", vals)

    def slopes(self) -> np.ndarray:
        """Per-cell divided differences (discrete w_s)."""
        return np.diff(self.values) / self.grid.spacings


def _pow_diff(a, b, p: float):
    """b**p - a**p elementwise for 0 <= a <= b, stable when b is near a.

    Near-equal endpoints go through expm1/log1p so the difference keeps full
    relative accuracy instead of cancelling.
    """
    a = np.asarray(a, dtype=float)
    b = np.asarray(b, dtype=float)
    near = (a > 0.0) & (b <= 1.5 * a)
    with np.errstate(divide="ignore", invalid="ignore"):
        rel = np.where(near, (b - a) / np.where(a > 0, a, 1.0), 0.0)
        stable = a**p * np.expm1(p * np.log1p(rel))
    direct = b**p - a**p
    out = np.where(near, stable, direct)
    return out if out.ndim else float(out)


def _cumulative_radial_integral(r: np.ndarray, u: np.ndarray, n: int,
                                extend_constant: bool = True) -> np.ndarray:
    """Prefix sums of integral(rho**(n-1)*u(rho)) at the nodes of r.

    u is taken piecewise linear between nodes; below the first node it is
    extended by the constant u[0] (integrable extension of bounded data).
    Accumulation runs in longdouble so the prefix sums stay accurate for
    very large node counts.
    """
    cells = np.empty(r.size, dtype=np.longdouble)
    r0 = r[0]
    cells[0] = (u[0] * r0**n / n) if extend_constant else 0.0
    a, b = r[:-1], r[1:]
    slope = np.diff(u) / np.diff(r)
    alpha = u[:-1] - slope * a
    cells[1:] = alpha * _pow_diff(a, b, n) / n \
        + slope * _pow_diff(a, b, n + 1) / (n + 1)
    return np.cumsum(cells)


def accumulate(u0: RadialProfile, grid: SGrid) -> WProfile:
    """Transform a radial density to its mass-accumulation profile.

    w(s) = integral of rho**(n-1)*u0(rho) over [0, s**(1/n)], evaluated at
    every grid node by quadrature exact for piecewise-linear u0 (with
    constant extension below the first radial node).
    """
    p = u0.params
    n = p.n
    if abs(grid.stop - p.s_max) > 1e-9 * p.s_max:
        raise ValueError(
            f"grid ends at {grid.stop}, expected R**n = {p.s_max}")
    if abs(u0.r_nodes[-1] - p.R) > 1e-9 * p.R:
        raise ValueError(
            f"density ends at r = {u0.r_nodes[-1]}, expected R = {p.R}")
    r = u0.r_nodes
    u = u0.values
    prefix = _cumulative_radial_integral(r, u, n)

    targets = np.clip(grid.nodes, 0.0, None) ** (1.0 / n)
    targets = np.minimum(targets, r[-1])  # clamp roundoff past the last node
    idx = np.searchsorted(r, targets, side="right") - 1

    w = np.empty(targets.size, dtype=np.longdouble)
    slope_full = np.diff(u) / np.diff(r)
    for j, (t, i) in enumerate(zip(targets, idx)):
        if i < 0:
            # inside the constant extension below the first node
            w[j] = u[0] * t**n / n
            continue
        base = prefix[i]
        if t > r[i] and i < r.size - 1:
            sl = slope_full[i]
            al = u[i] - sl * r[i]
            base = base + al * _pow_diff(r[i], t, n) / n \
                + sl * _pow_diff(r[i], t, n + 1) / (n + 1)
        w[j] = base
    return WProfile(grid=grid, values=w.astype(float), time=0.0, params=p)


def _nodal_slopes(s: np.ndarray, vals: np.ndarray,
                  clamp_ends: bool = False) -> np.ndarray:
    """Discrete first derivative at every node of a nonuniform grid.

    Interior nodes use the second-order three-point formula (a convex
    combination of the two adjacent cell slopes, so monotone data give
    nonnegative results).  End nodes use the second-order one-sided formula,
    optionally clamped at zero: the one-sided estimate can undershoot for
    monotone data with strong curvature.
    """
    h = np.diff(s)
    cell = np.diff(vals) / h
    out = np.empty_like(vals)
    hl, hr = h[:-1], h[1:]
    out[1:-1] = (hl * cell[1:] + hr * cell[:-1]) / (hl + hr)
    out[0] = cell[0] * (2 * h[0] + h[1]) / (h[0] + h[1]) \
        - cell[1] * h[0] / (h[0] + h[1])
    out[-1] = cell[-1] * (2 * h[-1] + h[-2]) / (h[-1] + h[-2]) \
        - cell[-2] * h[-1] / (h[-1] + h[-2])
    if clamp_ends:
        out[0] = max(out[0], 0.0)
        out[-1] = max(out[-1], 0.0)
    return out


def density_from_w(w: WProfile) -> RadialProfile:
    """Retransform an accumulation profile to the radial density u = n*w_s.

    Output nodes are r = s**(1/n) for every grid node with s > 0.
    """
    if w.params is None:
        raise ValueError("profile carries no params; cannot retransform")
    if w.grid.n_nodes < 3:
        raise ValueError("need at least 3 nodes to differentiate")
    n = w.params.n
    s = w.grid.nodes
    u = w.params.n * _nodal_slopes(s, w.values, clamp_ends=True)
    keep = s > 0
    return RadialProfile(r_nodes=s[keep] ** (1.0 / n), values=u[keep],
                         params=w.params)


def signal_gradient(u: RadialProfile, params: Params) -> RadialProfile:
    """Radial derivative of the chemotactic signal.

    v_r(r) = (mu*r**n/n - integral of rho**(n-1)*u over [0, r]) / r**(n-1),
    evaluated at the nodes of u.  For a density of total mass m this
    vanishes at r = R up to quadrature error.
    """
    n = params.n
    r = u.r_nodes
    prefix = _cumulative_radial_integral(r, u.values, n).astype(float)
    vr = (params.mu * r**n / n - prefix) / r ** (n - 1)
    return RadialProfile(r_nodes=r, values=vr, params=params)


def signal_reconstruct(v_r: RadialProfile) -> RadialProfile:
    """Antiderivative of v_r, shifted so the signal has zero mean on [0, R].

    Trapezoid accumulation from r = 0 with linear extrapolation of v_r onto
    the (0, r_0] gap; the mean is removed with the trapezoid rule corrected
    for piecewise-quadratic antiderivatives, so affine v_r reconstructs
    exactly.
    """
    r = v_r.r_nodes
    g = v_r.values
    R = v_r.params.R
    # extrapolated value at r = 0; exact for affine v_r
    g0 = g[0] - r[0] * (g[1] - g[0]) / (r[1] - r[0])
    A = np.empty(r.size, dtype=np.longdouble)
    A[0] = r[0] * (g0 + g[0]) / 2.0
    h = np.diff(r)
    np.cumsum(h * (g[:-1] + g[1:]) / 2.0, out=A[1:])
    A[1:] += A[0]
    A = A.astype(float)

    # integral of A over [0, R]: per-cell trapezoid with the O(h^2)
    # end-correction that makes it exact for quadratic A
    first = r[0] * (0.0 + A[0]) / 2.0 - r[0] ** 2 * (g[0] - g0) / 12.0
    cells = h * (A[:-1] + A[1:]) / 2.0 - h**2 * (g[1:] - g[:-1]) / 12.0
    mean = (first + cells.sum()) / R
    return RadialProfile(r_nodes=r, values=A - mean, params=v_r.params)


def total_mass(w: WProfile) -> float:
    """Mass carried by an accumulation profile: omega_n * w at the outer boundary."""
    if w.params is None:
        raise ValueError("profile carries no params")
    return w.params.omega_n * float(w.values[-1])


def radial_mass(u: RadialProfile) -> float:
    """Mass of a radial density by quadrature exact for piecewise-linear u."""
    prefix = _cumulative_radial_integral(u.r_nodes, u.values, u.params.n)
    return float(u.params.omega_n * prefix[-1])


def retransformed_mass(w: WProfile) -> float:
    """Mass of the retransformed density, by the conservative pairing.

    The density is taken at cell midpoints as u = n * (cell slope of w) and
    integrated by the matching rule omega_n/n * sum(u * ds); the product
    telescopes, so this equals total_mass up to roundoff on every profile,
    including ones whose density a nodal stencil cannot resolve.
    """
    if w.params is None:
        raise ValueError("profile carries no params")
    ds = w.grid.spacings
    u_mid = w.params.n * np.diff(w.values) / ds
    acc = np.sum(u_mid.astype(np.longdouble) * ds) / w.params.n
    return float(w.params.omega_n * acc)
