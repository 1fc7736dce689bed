"""Independent exact solvers used to verify the convex machinery.

brute_force_mincut enumerates all labelings of tiny instances;
maxflow_mincut solves the standard s-t network with shortest augmenting
paths and scales to medium grids.  Energies (never labelings) are the
quantities that must agree across oracles and solvers: labelings may
differ when energies tie.
"""
from __future__ import annotations

import numpy as np

from . import _kernels
from .graph import energy

BRUTE_FORCE_MAX_NODES = 24
_CHUNK_BITS = 16


def brute_force_mincut(g):
    """Exact minimizer of the energy over all 2^n labelings.

    Ties are broken by the lexicographically smallest labeling, reading
    x_0 as the most significant position.  Enforces n <= 24.
    """
    n = g.n
    if n > BRUTE_FORCE_MAX_NODES:
        raise ValueError("brute force limited to n <= %d" % BRUTE_FORCE_MAX_NODES)
    ei, ej, ea = g.edge_arrays()
    shifts = np.arange(n - 1, -1, -1, dtype=np.uint32)  # x_0 = MSB
    best_energy = np.inf
    best_code = -1
    for lo in range(0, 1 << n, 1 << _CHUNK_BITS):
        hi = min(lo + (1 << _CHUNK_BITS), 1 << n)
        codes = np.arange(lo, hi, dtype=np.uint32)
        labs = ((codes[:, None] >> shifts) & 1).astype(np.float64)
        vals = -labs @ g.w
        if ea.size:
            vals += np.abs(labs[:, ei] - labs[:, ej]) @ ea
        k = int(np.argmin(vals))  # first minimum = lexicographically smallest
        if vals[k] < best_energy:
            best_energy = float(vals[k])
            best_code = lo + k
    lab = ((best_code >> shifts) & 1).astype(np.uint8)
    return lab, best_energy


def _build_network(g):
    """Paired-arc CSR residual network: arc 2k+1 reverses arc 2k."""
    n = g.n
    ei, ej, ea = g.edge_arrays()
    src, snk = n, n + 1
    pos = g.w > 0
    neg = g.w < 0
    # arc pairs: (from, to, cap_fwd, cap_rev)
    frm = np.concatenate([np.full(pos.sum(), src, dtype=np.int64),
                          np.flatnonzero(neg).astype(np.int64), ei])
    to = np.concatenate([np.flatnonzero(pos).astype(np.int64),
                         np.full(neg.sum(), snk, dtype=np.int64), ej])
    cf = np.concatenate([g.w[pos], -g.w[neg], ea])
    # undirected pairwise terms carry capacity a_ij in both directions
    cr = np.concatenate([np.zeros(pos.sum()), np.zeros(neg.sum()), ea])
    npairs = frm.size
    arc_to = np.empty(2 * npairs, dtype=np.int64)
    arc_from = np.empty(2 * npairs, dtype=np.int64)
    cap = np.empty(2 * npairs, dtype=np.float64)
    arc_to[0::2] = to
    arc_to[1::2] = frm
    arc_from[0::2] = frm
    arc_from[1::2] = to
    cap[0::2] = cf
    cap[1::2] = cr
    nn = n + 2
    order = np.argsort(arc_from, kind="stable")
    adj_arc = order.astype(np.int64)
    counts = np.bincount(arc_from, minlength=nn)
    adj_ptr = np.zeros(nn + 1, dtype=np.int64)
    np.cumsum(counts, out=adj_ptr[1:])
    return adj_ptr, adj_arc, arc_to, cap, src, snk


def maxflow_mincut(g):
    """Min cut via max-flow on the standard s-t construction.

    Node i gets a source arc of capacity w_i when w_i > 0, else a sink arc
    of capacity -w_i; every pairwise term becomes symmetric arcs of
    capacity a_ij.  The flow value equals energy(x) + sum max{w_i, 0} at
    the optimum; the returned energy is evaluated directly on the
    extracted source-side labeling, so it is comparable to brute force
    without constants.
    """
    n = g.n
    adj_ptr, adj_arc, arc_to, cap, src, snk = _build_network(g)
    orig_cap = cap.copy()
    flow, seen = _kernels.max_flow(adj_ptr, adj_arc, arc_to, cap, src, snk)
    lab = seen[:n].astype(np.uint8)
    # internal max-flow = min-cut consistency check
    side = seen.astype(bool)
    arc_from = arc_to[np.arange(arc_to.size) ^ 1]
    crossing = side[arc_from] & ~side[arc_to]
    cut = float(orig_cap[crossing].sum())
    if not np.isclose(flow, cut, rtol=1e-9, atol=1e-6):
        raise AssertionError("max-flow %.9g != cut %.9g" % (flow, cut))
    return lab, energy(g, lab)
