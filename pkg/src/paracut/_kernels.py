"""Compiled inner loops: weighted taut string, batched chain prox, max-flow.

All kernels are nogil so chain-level work can fan out over a thread pool;
none of them uses fastmath, so results are bitwise reproducible for any
worker count.
"""
import numpy as np
from numba import njit


@njit(cache=True, nogil=True)
def taut_string(s, a, x, cex, cey, flx, fly):
    """Weighted 1D-TV prox of signal s with per-edge weights a, into x.

    Solves min_x 0.5*sum (x_i - s_i)^2 + sum a_i |x_{i+1} - x_i| by walking
    the taut string through the tube S_k +- a_k around the running sums S_k,
    with a restart at every point where the string is forced onto the tube
    boundary.  Linear time in practice, quadratic in the worst case.

    cex/cey and flx/fly are caller-provided scratch arrays of length >= m+1
    (ceiling hull and floor hull: gate index and value).
    """
    m = s.shape[0]
    if m == 1:
        x[0] = s[0]
        return

    i0 = 0       # anchor gate
    a_val = 0.0  # string value at the anchor
    a_t = 0      # which tube bound the anchor touches: -1 floor, +1 ceiling
    a_S = 0.0    # running sum S at the anchor gate

    while i0 < m:
        nc = 0
        nf = 0
        sk = a_S
        bend_k = -1
        bend_y = 0.0
        bend_t = 0
        k = i0
        while k < m:
            k += 1
            sk += s[k - 1]
            rk = a[k - 1] if k < m else 0.0

            # push ceiling point (k, sk+rk); hull convex from the anchor
            uy = sk + rk
            while nc >= 1:
                if nc >= 2:
                    px = cex[nc - 2]
                    py = cey[nc - 2]
                else:
                    px = i0
                    py = a_val
                qx = cex[nc - 1]
                qy = cey[nc - 1]
                if (qy - py) * (k - qx) >= (uy - qy) * (qx - px):
                    nc -= 1
                else:
                    break
            cex[nc] = k
            cey[nc] = uy
            nc += 1
            if nf >= 1 and ((cey[0] - a_val) * (flx[0] - i0)
                            < (fly[0] - a_val) * (cex[0] - i0)):
                # ceiling dips below the floor cone: string bends at the
                # first floor hull point (touches the lower tube bound)
                bend_k = flx[0]
                bend_y = fly[0]
                bend_t = -1
                break

            # push floor point (k, sk-rk); hull concave from the anchor
            ly = sk - rk
            while nf >= 1:
                if nf >= 2:
                    px = flx[nf - 2]
                    py = fly[nf - 2]
                else:
                    px = i0
                    py = a_val
                qx = flx[nf - 1]
                qy = fly[nf - 1]
                if (qy - py) * (k - qx) <= (ly - qy) * (qx - px):
                    nf -= 1
                else:
                    break
            flx[nf] = k
            fly[nf] = ly
            nf += 1
            if (fly[0] - a_val) * (cex[0] - i0) > (cey[0] - a_val) * (flx[0] - i0):
                bend_k = cex[0]
                bend_y = cey[0]
                bend_t = 1
                break

        if bend_k < 0:
            # all gates processed; sk is now S_m, the mandatory end point,
            # which sits in both hulls.  A straight segment to it is only
            # feasible if no earlier hull point blocks the line of sight.
            if cex[0] != m and ((cey[0] - a_val) * (m - i0)
                                < (sk - a_val) * (cex[0] - i0)):
                bend_k = cex[0]
                bend_y = cey[0]
                bend_t = 1
            elif flx[0] != m and ((fly[0] - a_val) * (m - i0)
                                  > (sk - a_val) * (flx[0] - i0)):
                bend_k = flx[0]
                bend_y = fly[0]
                bend_t = -1
            else:
                bend_k = m
                bend_y = sk
                bend_t = 0

        # fix the segment i0..bend_k; its slope is constant.  The fill is
        # computed from a fresh sum over the segment plus the tube offsets
        # of its endpoints so that untouched constant stretches reproduce
        # the signal exactly.
        ref = s[i0]
        tot = 0.0
        alleq = True
        for j in range(i0, bend_k):
            tot += s[j]
            if s[j] != ref:
                alleq = False
        corr = 0.0
        if bend_t != 0:
            corr += bend_t * a[bend_k - 1]
        if a_t != 0:
            corr -= a_t * a[i0 - 1]
        if alleq and corr == 0.0:
            fill = ref
        else:
            fill = (tot + corr) / (bend_k - i0)
        for j in range(i0, bend_k):
            x[j] = fill

        i0 = bend_k
        a_val = bend_y
        a_t = bend_t
        a_S = bend_y if bend_t == 0 else bend_y - bend_t * a[bend_k - 1]


@njit(cache=True, nogil=True)
def prox_chains(node_idx, chain_ptr, edge_w, c_lo, c_hi, v, out, as_projection):
    """Solve the TV prox on chains [c_lo, c_hi) of one class.

    Gathers v along each chain, runs the taut string, and scatters either
    the prox itself or the base-polytope projection v - prox into out.
    Chains are vertex-disjoint, so concurrent calls on disjoint chain
    ranges may share out.
    """
    maxm = 0
    for c in range(c_lo, c_hi):
        mm = chain_ptr[c + 1] - chain_ptr[c]
        if mm > maxm:
            maxm = mm
    if maxm == 0:
        return
    sig = np.empty(maxm, np.float64)
    px = np.empty(maxm, np.float64)
    cex = np.empty(maxm + 1, np.int64)
    cey = np.empty(maxm + 1, np.float64)
    flx = np.empty(maxm + 1, np.int64)
    fly = np.empty(maxm + 1, np.float64)
    for c in range(c_lo, c_hi):
        b = chain_ptr[c]
        e = chain_ptr[c + 1]
        mm = e - b
        wb = b - c  # edges of chain c start at chain_ptr[c] - c
        for i in range(mm):
            sig[i] = v[node_idx[b + i]]
        taut_string(sig[:mm], edge_w[wb:wb + mm - 1], px[:mm], cex, cey, flx, fly)
        if as_projection:
            for i in range(mm):
                out[node_idx[b + i]] = sig[i] - px[i]
        else:
            for i in range(mm):
                out[node_idx[b + i]] = px[i]


FLOW_EPS = 1e-11


@njit(cache=True)
def max_flow(adj_ptr, adj_arc, arc_to, cap, src, snk):
    """Shortest-augmenting-path max-flow on a paired-arc residual graph.

    Arc 2k and 2k+1 are mutual reverses.  cap is mutated in place.  Returns
    (flow value, source-side mask from the final reachability search).
    """
    nn = adj_ptr.shape[0] - 1
    prev = np.empty(nn, np.int64)
    seen = np.empty(nn, np.uint8)
    queue = np.empty(nn, np.int64)
    flow = 0.0
    while True:
        for i in range(nn):
            seen[i] = 0
            prev[i] = -1
        head = 0
        tail = 0
        queue[tail] = src
        tail += 1
        seen[src] = 1
        found = False
        while head < tail and not found:
            u = queue[head]
            head += 1
            for ai in range(adj_ptr[u], adj_ptr[u + 1]):
                arc = adj_arc[ai]
                if cap[arc] > FLOW_EPS:
                    v = arc_to[arc]
                    if seen[v] == 0:
                        seen[v] = 1
                        prev[v] = arc
                        if v == snk:
                            found = True
                            break
                        queue[tail] = v
                        tail += 1
        if not found:
            break
        bot = np.inf
        v = snk
        while v != src:
            arc = prev[v]
            if cap[arc] < bot:
                bot = cap[arc]
            v = arc_to[arc ^ 1]
        v = snk
        while v != src:
            arc = prev[v]
            cap[arc] -= bot
            cap[arc ^ 1] += bot
            v = arc_to[arc ^ 1]
        flow += bot
    return flow, seen


@njit(cache=True, nogil=True)
def labeling_cut(node_idx, chain_ptr, edge_w, x):
    """Sum of chain edge weights cut by binary x (used in diagnostics)."""
    total = 0.0
    nchains = chain_ptr.shape[0] - 1
    for c in range(nchains):
        b = chain_ptr[c]
        e = chain_ptr[c + 1]
        wb = b - c
        for i in range(b, e - 1):
            if x[node_idx[i]] != x[node_idx[i + 1]]:
                total += edge_w[wb + (i - b)]
    return total
