"""Time-step kernels: jitted and pure-numpy twins.

One step advances the semi-discretization of

    w_t = kappa(s) * w_ss + (n*w - mu*(s - eps)) * w_s

with theta-weighted implicit diffusion and explicit first-order upwind
advection, Dirichlet values re-imposed at both ends.  The jitted kernel
fuses the upwind sweep, the tridiagonal assembly, and an in-place Thomas
solve; the numpy twin vectorizes the sweep and hands the solve to LAPACK.
Both produce the same update to roundoff.

Backend selection: the environment variable DEGENCHEM_NUMBA set to "0" or
"false" forces the numpy path; anything else (including unset) uses the
jitted path when numba imports cleanly.
"""

from __future__ import annotations

import os

import numpy as np
from scipy.linalg import solve_banded

__all__ = [
    "NUMBA_AVAILABLE",
    "active_backend",
    "step",
    "step_numpy",
    "step_numba",
    "advection_speeds",
]


def advection_speeds(w: np.ndarray, s: np.ndarray, n: int, mu: float,
                     eps: float) -> np.ndarray:
    """Local advection speed n*w - mu*(s - eps) at every node."""
    return n * w - mu * (s - eps)


def step_numpy(w: np.ndarray, s: np.ndarray, h: np.ndarray,
               kappa: np.ndarray, cL: np.ndarray, cC: np.ndarray,
               cR: np.ndarray, n: int, mu: float, eps: float, dt: float,
               theta: float, w_left: float, w_right: float) -> np.ndarray:
    """One step, vectorized numpy with a banded LAPACK solve.

    h are the cell widths; kappa, cL, cC, cR are the diffusion coefficient
    and divided-second-difference weights at interior nodes.
    """
    a = n * w[1:-1] - mu * (s[1:-1] - eps)
    fwd = (w[2:] - w[1:-1]) / h[1:]
    bwd = (w[1:-1] - w[:-2]) / h[:-1]
    upw = np.where(a > 0.0, fwd, np.where(a < 0.0, bwd, 0.0))

    out = np.empty_like(w)
    out[0] = w_left
    out[-1] = w_right
    out[1:-1] = w[1:-1] + dt * a * upw
    if theta < 1.0:
        d2 = cL * w[:-2] + cC * w[1:-1] + cR * w[2:]
        out[1:-1] += dt * (1.0 - theta) * kappa * d2
    if theta > 0.0:
        # increment form: solve for d = w_new - out so that where the
        # diffusion increment vanishes the advected values pass through
        # untouched (a direct solve would re-round every node)
        lam = dt * theta * kappa
        g = lam * (cL * out[:-2] + cC * out[1:-1] + cR * out[2:])
        diag = 1.0 - lam * cC
        mi = g.size
        ab = np.zeros((3, mi))
        ab[0, 1:] = (-lam * cR)[:-1]
        ab[1, :] = diag
        ab[2, :-1] = (-lam * cL)[1:]
        out[1:-1] += solve_banded((1, 1), ab, g)
    return out


def _step_loop(w, s, h, kappa, cL, cC, cR, n, mu, eps, dt, theta,
               w_left, w_right):
    # fused upwind sweep + tridiagonal assembly + Thomas solve
    m = w.shape[0]
    mi = m - 2
    out = np.empty_like(w)
    out[0] = w_left
    out[m - 1] = w_right
    for j in range(1, m - 1):
        a = n * w[j] - mu * (s[j] - eps)
        if a > 0.0:
            upw = (w[j + 1] - w[j]) / h[j]
        elif a < 0.0:
            upw = (w[j] - w[j - 1]) / h[j - 1]
        else:
            upw = 0.0
        r = w[j] + dt * a * upw
        if theta < 1.0:
            d2 = cL[j - 1] * w[j - 1] + cC[j - 1] * w[j] + cR[j - 1] * w[j + 1]
            r += dt * (1.0 - theta) * kappa[j - 1] * d2
        out[j] = r

    if theta > 0.0:
        # increment form, same algebra as the numpy twin: Thomas solve of
        # (I - lam*L) d = lam*L(out), then out += d
        cp = np.empty(mi)
        dp = np.empty(mi)
        lam0 = dt * theta * kappa[0]
        diag0 = 1.0 - lam0 * cC[0]
        g0 = lam0 * (cL[0] * out[0] + cC[0] * out[1] + cR[0] * out[2])
        cp[0] = -lam0 * cR[0] / diag0
        dp[0] = g0 / diag0
        for i in range(1, mi):
            lam = dt * theta * kappa[i]
            lower = -lam * cL[i]
            diag = 1.0 - lam * cC[i]
            upper = -lam * cR[i]
            g = lam * (cL[i] * out[i] + cC[i] * out[i + 1]
                       + cR[i] * out[i + 2])
            denom = diag - lower * cp[i - 1]
            cp[i] = upper / denom
            dp[i] = (g - lower * dp[i - 1]) / denom
        prev = dp[mi - 1]
        out[mi] += prev
        for i in range(mi - 2, -1, -1):
            prev = dp[i] - cp[i] * prev
            out[i + 1] += prev
    return out


NUMBA_AVAILABLE = False
step_numba = None
try:
    import numba

    step_numba = numba.njit(cache=True)(_step_loop)
    NUMBA_AVAILABLE = True
except ImportError:
    pass


def _want_numba() -> bool:
    return os.environ.get("DEGENCHEM_NUMBA", "1").lower() not in ("0", "false")


if NUMBA_AVAILABLE and _want_numba():
    _ACTIVE = "numba"
    step = step_numba
else:
    _ACTIVE = "numpy"
    step = step_numpy


def active_backend() -> str:
    return _ACTIVE
