import numpy as np
import pytest

from degenchem import SolverConfig, evolve, make_params, make_sgrid
from degenchem.transform import WProfile


@pytest.fixture(scope="session", autouse=True)
def warm_kernels():
    # compile (or load) the jitted kernel once up front so tests that
    # assert on wall time measure marching, not compilation
    p = make_params(2, 1.0, 1.0, np.pi)
    g = make_sgrid(p.s_max, 17, "uniform")
    w0 = WProfile(grid=g, values=p.mu / p.n * g.nodes, params=p)
    evolve(w0, p, SolverConfig(t_end=1e-3))


@pytest.fixture
def p2():
    """n=2, R=1, beta=1, m=pi, so mu = 1 exactly."""
    return make_params(2, 1.0, 1.0, np.pi)
