"""Shared random-instance generators for the test suite."""
import numpy as np

from paracut import random_grid
from paracut.oracle import BRUTE_FORCE_MAX_NODES

CONNS = ("2D-4", "2D-8", "3D-6")


def tiny_dims(rng, conn, max_nodes=BRUTE_FORCE_MAX_NODES):
    while True:
        if conn == "3D-6":
            dims = tuple(int(v) for v in rng.integers(1, 4, size=3))
        else:
            dims = tuple(int(v) for v in rng.integers(1, 5, size=2))
        if np.prod(dims) <= max_nodes:
            return dims


def tiny_grid(rng, conn=None, **kw):
    if conn is None:
        conn = CONNS[int(rng.integers(len(CONNS)))]
    return random_grid(tiny_dims(rng, conn), conn, rng, **kw)


def chain_case(rng, m_max=50):
    """Random 1D chain (signal, weights) over assorted weight regimes."""
    m = int(rng.integers(1, m_max + 1))
    s = rng.normal(0.0, 2.0, size=m)
    kind = int(rng.integers(5))
    if kind == 0:
        a = rng.uniform(0.0, 2.0, size=m - 1)
    elif kind == 1:  # many exact zeros: chain effectively split
        a = rng.uniform(0.0, 2.0, size=m - 1) * (rng.random(m - 1) < 0.5)
    elif kind == 2:  # huge weights: heavy fusing
        a = rng.uniform(5.0, 50.0, size=m - 1)
    elif kind == 3:  # tie-prone integer data
        s = rng.integers(-2, 3, size=m).astype(float)
        a = rng.integers(0, 3, size=m - 1).astype(float)
    else:  # near-critical two-sided weights
        a = np.abs(rng.normal(0.0, 0.5, size=m - 1))
    return s, a
