"""Exact weighted total-variation denoising on a chain.

This is the inner kernel of every polytope projection: the prox

    argmin_x  0.5 * ||x - s||^2  +  sum_i a_i |x_{i+1} - x_i|

is solved by a taut-string walk with per-edge tube radii a_i.  The output
is piecewise constant with values equal to segment means (plus the tube
offsets at touched boundaries); ties in tube-touching order are broken by
the earliest index, so the result is deterministic.
"""
from __future__ import annotations

import numpy as np

from . import _kernels

# Absolute tolerance for dual feasibility checks: comfortably below solver
# tolerances but above accumulated double-precision noise.
DUAL_FEAS_TOL = 1e-9


class Chain:
    """A weighted path: global node ids plus one weight per edge."""

    def __init__(self, node_ids, weights):
        self.node_ids = np.ascontiguousarray(node_ids, dtype=np.int64)
        self.weights = np.ascontiguousarray(weights, dtype=np.float64)
        if self.node_ids.ndim != 1 or self.node_ids.size < 1:
            raise ValueError("chain needs at least one node")
        if self.weights.shape != (self.node_ids.size - 1,):
            raise ValueError("need exactly one weight per chain edge")
        if np.unique(self.node_ids).size != self.node_ids.size:
            raise ValueError("chain nodes must be distinct")
        if self.weights.size and self.weights.min() < 0:
            raise ValueError("chain weights must be nonnegative")

    def __len__(self):
        return self.node_ids.size


def tv1d_prox(signal, weights):
    """Exact minimizer of 0.5*||x - signal||^2 + sum weights_i |x_{i+1} - x_i|.

    Parameters
    ----------
    signal : array of m reals, m >= 1.
    weights : array of m-1 nonnegative reals.

    Returns
    -------
    x : array of m reals, piecewise constant.
    """
    s = np.ascontiguousarray(signal, dtype=np.float64)
    a = np.ascontiguousarray(weights, dtype=np.float64)
    if s.ndim != 1 or s.size == 0:
        raise ValueError("signal must be a nonempty 1D vector")
    m = s.size
    if a.shape != (m - 1,):
        raise ValueError("expected %d weights, got %r" % (m - 1, a.shape))
    if a.size and a.min() < 0:
        raise ValueError("weights must be nonnegative")
    x = np.empty(m, dtype=np.float64)
    cex = np.empty(m + 1, dtype=np.int64)
    cey = np.empty(m + 1, dtype=np.float64)
    flx = np.empty(m + 1, dtype=np.int64)
    fly = np.empty(m + 1, dtype=np.float64)
    _kernels.taut_string(s, a, x, cex, cey, flx, fly)
    return x


def chain_dual_feasible(y, weights, tol=DUAL_FEAS_TOL):
    """Membership test for the chain base polytope.

    y lies in the polytope iff its partial sums t_k = sum_{i<=k} y_i satisfy
    |t_k| <= weights_k for k < m and t_m = 0 (within tol).  This is the set
    of vectors D^T t with |t_i| <= a_i.
    """
    y = np.asarray(y, dtype=np.float64)
    a = np.asarray(weights, dtype=np.float64)
    if y.ndim != 1 or y.size == 0 or a.shape != (y.size - 1,):
        raise ValueError("length mismatch")
    t = np.cumsum(y)
    if abs(t[-1]) > tol:
        return False
    if a.size == 0:
        return True
    return bool(np.all(np.abs(t[:-1]) <= a + tol))
