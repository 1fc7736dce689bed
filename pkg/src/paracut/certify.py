"""Duality-gap certificates linking continuous dual iterates to cuts.

For any aggregate dual vector s in K and any labeling x:

    gap(x, s) = f(x) - w.x - sum_i min{s_i - w_i, 0}  >=  0,

with equality exactly at an optimal primal/dual pair, so a zero gap is a
proof of discrete optimality that costs one energy evaluation.
"""
from __future__ import annotations

import numpy as np

from .graph import energy
from .tv1d import chain_dual_feasible


class Certificate:
    """Aggregate dual s, its objective, and the discrete gap for one x."""

    def __init__(self, s, gap, dual_objective, primal_energy):
        self.s = s
        self.gap = float(gap)
        self.dual_objective = float(dual_objective)
        self.primal_energy = float(primal_energy)

    def __repr__(self):
        return "Certificate(gap=%.3e, energy=%.6f)" % (self.gap, self.primal_energy)


def discrete_gap(g, x_hat, s, dec=None, y=None):
    """Certificate for labeling x_hat with aggregate dual s.

    s must aggregate feasible per-class duals, which is guaranteed when it
    comes out of project_K; passing the stacked per-class duals y together
    with the decomposition re-verifies chain feasibility before trusting s
    (debug only, it is not free).
    """
    s = np.asarray(s, dtype=np.float64)
    if y is not None and dec is not None:
        for j, cls in enumerate(dec.classes):
            for ch in cls.chains:
                if not chain_dual_feasible(y[j][ch.node_ids], ch.weights):
                    raise AssertionError("dual infeasible on a class-%d chain" % j)
    primal = energy(g, x_hat)
    dual = float(np.minimum(s - g.w, 0.0).sum())
    return Certificate(s, primal - dual, dual, primal)


def best_level_set_gap(g, x, s):
    """Best certificate over all level sets of x.

    Evaluates discrete_gap at every level-set labeling of x and returns the
    (labeling, certificate) pair with the smallest gap; never worse than
    thresholding at 0, which is itself one of the level sets.
    """
    from .solvers import level_sets
    best = None
    best_lab = None
    for lab in level_sets(x):
        cert = discrete_gap(g, lab, s)
        if best is None or cert.gap < best.gap:
            best = cert
            best_lab = lab
    return best_lab, best


def jaccard_distance(a, b):
    """1 - |A & B| / |A | B| over the 1-sets of two labelings; 0 if both empty."""
    a = np.asarray(a).astype(bool)
    b = np.asarray(b).astype(bool)
    if a.shape != b.shape:
        raise ValueError("length mismatch")
    union = np.logical_or(a, b).sum()
    if union == 0:
        return 0.0
    inter = np.logical_and(a, b).sum()
    return float(1.0 - inter / union)
