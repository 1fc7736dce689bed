"""Projections and reflections for the product polytope K and the set L.

The dual problem couples y = (y_1, ..., y_r), one vector per chain class,
through two convex sets:

    K = K_1 x ... x K_r      base polytope of f_j, coordinatewise {0} off
                             the class support;
    L = { lam : sum_j lam_j = w on covered coordinates, lam_j = 0 off
          support }.

Pi_K factors into independent chain proxes (Moreau: Pi(v) = v - prox(v)),
which is where all the parallel work lives.  Pi_L is a closed-form averaging
step weighted by the per-node class degree.  Reflections are 2*Pi - I.

States are stacked as (r, n) float64 arrays.  Aggregation and averaging
use a fixed class-then-index order, and chains are vertex-disjoint within
a class, so every result is bitwise independent of the worker count.
"""
from __future__ import annotations

from concurrent.futures import ThreadPoolExecutor

import numpy as np

from . import _kernels


class DualState:
    """Solver dual variables: y in K, lambda in L, AAR point z.

    Each field is an (r, n) array or None; fingerprint identifies the
    instance geometry (dims, connectivity, pairwise weights) that produced
    the state, guarding warm starts.
    """

    def __init__(self, y=None, lam=None, z=None, fingerprint=None):
        self.y = y
        self.lam = lam
        self.z = z
        self.fingerprint = fingerprint

    def copy(self):
        cp = lambda a: None if a is None else a.copy()
        return DualState(cp(self.y), cp(self.lam), cp(self.z), self.fingerprint)


class ChainPool:
    """Fans chain prox batches out to worker threads.

    The kernels are nogil, so plain threads give real concurrency; with
    one thread everything runs inline.  Closing is idempotent.
    """

    def __init__(self, threads=1):
        self.threads = max(1, int(threads))
        self._ex = ThreadPoolExecutor(self.threads) if self.threads > 1 else None

    def run_class(self, cls, v, out, as_projection=True):
        nch = cls.num_chains
        if nch == 0:
            return
        if self._ex is None or nch == 1:
            _kernels.prox_chains(cls.node_idx, cls.chain_ptr, cls.edge_w,
                                 0, nch, v, out, as_projection)
            return
        blocks = min(self.threads, nch)
        bounds = np.linspace(0, nch, blocks + 1).astype(np.int64)
        futures = [
            self._ex.submit(_kernels.prox_chains, cls.node_idx, cls.chain_ptr,
                            cls.edge_w, bounds[b], bounds[b + 1], v, out,
                            as_projection)
            for b in range(blocks)
        ]
        for f in futures:
            f.result()

    def close(self):
        if self._ex is not None:
            self._ex.shutdown(wait=True)
            self._ex = None

    def __enter__(self):
        return self

    def __exit__(self, *exc):
        self.close()


def project_K(dec, v, pool=None):
    """Componentwise projection onto K: out_j = Pi_{K_j}(v_j).

    Computed chain by chain as v_j - tv1d_prox(v_j restricted to the
    chain); coordinates off every chain of class j map to 0.
    """
    out = np.zeros_like(v)
    if pool is None:
        for j, cls in enumerate(dec.classes):
            if cls.num_chains:
                _kernels.prox_chains(cls.node_idx, cls.chain_ptr, cls.edge_w,
                                     0, cls.num_chains, v[j], out[j], True)
    else:
        for j, cls in enumerate(dec.classes):
            pool.run_class(cls, v[j], out[j], True)
    return out


def project_L(w, dec, v):
    """Closed-form projection onto L.

    Per coordinate i with class degree d_i >= 1:
        lam_j,i = v_j,i + (w_i - sum_k v_k,i) / d_i   for supporting j,
    and 0 off support; the result sums to w on covered coordinates.
    """
    d = dec.degree
    uncovered = d == 0
    if np.any(uncovered & (np.asarray(w) != 0.0)):
        raise ValueError("w has mass on coordinates covered by no class")
    total = v.sum(axis=0)
    corr = np.zeros(dec.n)
    cov = ~uncovered
    corr[cov] = (w[cov] - total[cov]) / d[cov]
    return (v + corr) * dec.support


def reflect_K(dec, v, pool=None):
    return 2.0 * project_K(dec, v, pool) - v


def reflect_L(w, dec, v):
    return 2.0 * project_L(w, dec, v) - v


def aggregate(y):
    """s = sum_j y_j in fixed class order; s in K when each y_j in K_j."""
    if y.shape[0] == 0:
        return np.zeros(y.shape[1])
    return y.sum(axis=0)
