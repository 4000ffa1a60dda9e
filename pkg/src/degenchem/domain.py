"""Problem parameters and spatial grids for the mass-accumulation variable.

The radial problem on a ball of radius R in dimension n is rewritten in the
variable s = r**n on [0, R**n].  Everything downstream (transforms, solver,
analysis) works on these two objects: a validated parameter set and a strictly
increasing node set in s.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

__all__ = [
    "unit_sphere_area",
    "Params",
    "make_params",
    "SGrid",
    "make_sgrid",
]


def unit_sphere_area(n: int) -> float:
    """Surface area of the unit sphere in R**n: 2*pi**(n/2)/Gamma(n/2)."""
    if n < 1 or n != int(n):
        raise ValueError(f"dimension must be a positive integer, got {n!r}")
    return 2.0 * math.pi ** (n / 2.0) / math.gamma(n / 2.0)


@dataclass(frozen=True)
class Params:
    """Validated problem parameters.

    mu = n*m/(omega_n*R**n) is the slope of the stationary accumulation
    profile w(s) = mu*s/n; it shows up in the advection speed and in the
    signal gradient.
    """

    n: int
    R: float
    beta: float
    m: float
    omega_n: float
    mu: float

    @property
    def s_max(self) -> float:
        return self.R**self.n

    @property
    def w_max(self) -> float:
        # boundary value of every admissible accumulation profile
        return self.m / self.omega_n


def make_params(n: int, R: float, beta: float, m: float) -> Params:
    """Build a Params, rejecting out-of-range inputs."""
    if n != int(n) or n < 1:
        raise ValueError(f"dimension n must be a positive integer, got {n!r}")
    n = int(n)
    if not (R > 0):
        raise ValueError(f"radius R must be positive, got {R!r}")
    if not (beta > 0):
        raise ValueError(f"diffusion exponent beta must be positive, got {beta!r}")
    if not (m > 0):
        raise ValueError(f"total mass m must be positive, got {m!r}")
    omega_n = unit_sphere_area(n)
    mu = n * m / (omega_n * R**n)
    return Params(n=n, R=float(R), beta=float(beta), m=float(m),
                  omega_n=omega_n, mu=mu)


@dataclass(frozen=True)
class SGrid:
    """Strictly increasing nodes in the transformed variable s.

    nodes is read-only; spacings are derived on demand.
    """

    nodes: np.ndarray
    grading: str = "uniform"

    def __post_init__(self):
        nodes = np.asarray(self.nodes, dtype=float)
        if nodes.ndim != 1 or nodes.size < 3:
            raise ValueError("grid needs at least 3 nodes")
        if not np.all(np.diff(nodes) > 0):
            raise ValueError("grid nodes must be strictly increasing")
        nodes.setflags(write=False)
        object.__setattr__(self, "nodes", nodes)

    @property
    def start(self) -> float:
        return float(self.nodes[0])

    @property
    def stop(self) -> float:
        return float(self.nodes[-1])

    @property
    def n_nodes(self) -> int:
        return int(self.nodes.size)

    @property
    def spacings(self) -> np.ndarray:
        return np.diff(self.nodes)


def make_sgrid(stop: float, n_nodes: int, grading: str = "geometric", *,
               ratio: float = 1.05, min_spacing_frac: float = 1e-8,
               start: float = 0.0) -> SGrid:
    """Build a grid on [start, stop].

    "uniform" spaces nodes evenly.  "geometric" grows spacings by `ratio`
    from the left end (where the diffusion coefficient degenerates and the
    blow-up profiles steepen), but caps how small the first cell may get:
    the first spacing is floored at min_spacing_frac times the domain
    length, and once the geometric growth would overshoot the total length
    the remaining cells are made equal.  Adjacent spacings never differ by
    more than `ratio` either way.
    """
    if not (stop > start):
        raise ValueError(f"need stop > start, got [{start!r}, {stop!r}]")
    if n_nodes < 3:
        raise ValueError(f"need at least 3 nodes, got {n_nodes}")
    if grading == "uniform":
        return SGrid(np.linspace(start, stop, n_nodes), grading="uniform")
    if grading != "geometric":
        raise ValueError(f"unknown grading {grading!r}")
    if not (ratio > 1.0):
        raise ValueError(f"geometric ratio must exceed 1, got {ratio!r}")

    length = stop - start
    ncells = n_nodes - 1
    # first spacing of the uncapped geometric sequence, floored
    h0_pure = length * (ratio - 1.0) / (ratio**ncells - 1.0)
    h0 = max(h0_pure, min_spacing_frac * length)
    s_target = length / h0  # total length in units of the first spacing
    if s_target <= ncells:
        # floor so coarse the geometric profile collapses to uniform
        return SGrid(np.linspace(start, stop, n_nodes), grading="geometric")

    # weights w_i = min(ratio**i, cap); find the cap so the weights sum to
    # s_target.  k = number of uncapped (strictly growing) cells.
    weights = None
    for k in range(ncells):
        geo_sum = (ratio**k - 1.0) / (ratio - 1.0)
        cap = (s_target - geo_sum) / (ncells - k)
        lo = ratio ** (k - 1) if k > 0 else 0.0
        if lo <= cap <= ratio**k:
            w = np.empty(ncells)
            w[:k] = ratio ** np.arange(k)
            w[k:] = cap
            weights = w
            break
    if weights is None:
        # all cells grow geometrically (floor inactive beyond roundoff)
        weights = ratio ** np.arange(ncells)

    spac = weights * (length / weights.sum())
    nodes = np.empty(n_nodes)
    nodes[0] = start
    np.cumsum(spac, out=nodes[1:])
    nodes[1:] += start
    nodes[-1] = stop  # kill accumulation roundoff at the boundary
    return SGrid(nodes, grading="geometric")
