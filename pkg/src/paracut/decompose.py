"""Split a grid energy into classes of vertex-disjoint weighted chains.

The pairwise part f decomposes as f = f_1 + ... + f_r where each f_j is a
sum of chain TVs over vertex-disjoint chains, so projecting onto the base
polytope of f_j reduces to independent 1D prox calls:

    2D 4-connected:  r = 2   rows, columns
    2D 8-connected:  r = 4   rows, columns, two classes of zig-zag paths
                             that alternate single diagonal steps between
                             adjacent row pairs, enumerated from the
                             top/left border
    3D 6-connected:  r = 3   lines along each axis

Edges absent from the grid (zero weight) split their line into separate
chains, and pieces reduced to a single node are kept as edgeless chains
(base polytope {0}).  Every class therefore partitions the full vertex
set, which keeps the coupling projection a uniform average over the r
classes.  Chain node order follows the memory order of the grid where
possible.
"""
from __future__ import annotations

import numpy as np

from .graph import DIRECTIONS, GridEnergy
from .tv1d import Chain


class ChainClass:
    """Vertex-disjoint chains of one class, stored back to back.

    node_idx holds the node ids of all chains concatenated, chain_ptr the
    CSR-style offsets (chain c occupies node_idx[chain_ptr[c]:chain_ptr[c+1]]),
    and edge_w the per-chain edge weights concatenated in the same order.
    """

    def __init__(self, n, node_idx, chain_ptr, edge_w):
        self.n = int(n)
        self.node_idx = np.ascontiguousarray(node_idx, dtype=np.int64)
        self.chain_ptr = np.ascontiguousarray(chain_ptr, dtype=np.int64)
        self.edge_w = np.ascontiguousarray(edge_w, dtype=np.float64)
        self.support = np.zeros(self.n, dtype=bool)
        self.support[self.node_idx] = True
        # weights aligned with positions of diff(x[node_idx]); zero at the
        # seams between consecutive chains, so f_j(x) = |diff| @ _diff_w
        self._diff_w = np.zeros(max(self.node_idx.size - 1, 0))
        if self.num_chains:
            keep = np.ones(self.node_idx.size - 1, dtype=bool)
            keep[self.chain_ptr[1:-1] - 1] = False
            self._diff_w[keep] = self.edge_w

    @property
    def num_chains(self):
        return self.chain_ptr.size - 1

    @property
    def num_edges(self):
        return self.edge_w.size

    @property
    def chains(self):
        out = []
        for c in range(self.num_chains):
            b, e = self.chain_ptr[c], self.chain_ptr[c + 1]
            out.append(Chain(self.node_idx[b:e], self.edge_w[b - c:e - c - 1]))
        return out

    def tv(self, x):
        """f_j(x): sum of chain TVs of this class."""
        if self.node_idx.size < 2:
            return 0.0
        return float(np.abs(np.diff(x[self.node_idx])) @ self._diff_w)

    def edge_pairs(self):
        """(i, j, a) arrays of all chain edges, endpoints unordered."""
        if self.num_chains == 0:
            return (np.zeros(0, np.int64), np.zeros(0, np.int64), self.edge_w)
        keep = np.ones(max(self.node_idx.size - 1, 0), dtype=bool)
        keep[self.chain_ptr[1:-1] - 1] = False
        return self.node_idx[:-1][keep], self.node_idx[1:][keep], self.edge_w


class ChainDecomposition:
    """f = sum_j f_j with every grid edge in exactly one chain of one class."""

    def __init__(self, n, classes):
        self.n = int(n)
        self.classes = list(classes)
        self.support = np.stack([c.support for c in self.classes]) \
            if self.classes else np.zeros((0, n), dtype=bool)
        self.degree = self.support.sum(axis=0).astype(np.int64)

    @property
    def r(self):
        return len(self.classes)

    def tv(self, x):
        return sum(c.tv(x) for c in self.classes)


def _build_class(n, node_mat, weight_mat, leftover=None):
    """ChainClass from equal-length rows, splitting at zero-weight edges.

    node_mat: (num_chains, L) node ids; weight_mat: (num_chains, L-1).
    Every class keeps a complete partition of the n nodes: pieces that end
    up as single nodes stay as edgeless chains (their polytope is {0}), and
    `leftover` lists nodes outside node_mat to append the same way.  Full
    coverage keeps the coupling projection a plain average, every node
    being covered exactly once per class.
    """
    node_mat = np.asarray(node_mat, dtype=np.int64)
    weight_mat = np.asarray(weight_mat, dtype=np.float64)
    if leftover is not None and len(leftover) == 0:
        leftover = None
    if node_mat.size and (weight_mat.size == 0 or weight_mat.min() > 0.0) \
            and leftover is None:
        L = node_mat.shape[1]
        ptr = np.arange(node_mat.shape[0] + 1, dtype=np.int64) * L
        return ChainClass(n, node_mat.ravel(), ptr, weight_mat.ravel())
    nodes, ptr, wout = [], [0], []
    if node_mat.size:
        L = node_mat.shape[1]
        for row, wrow in zip(node_mat, weight_mat):
            start = 0
            for cut in list(np.flatnonzero(wrow == 0.0)) + [L - 1]:
                stop = cut + 1  # piece = row[start:stop]
                nodes.append(row[start:stop])
                wout.append(wrow[start:stop - 1])
                ptr.append(ptr[-1] + (stop - start))
                start = stop
    if leftover is not None:
        single = np.asarray(leftover, dtype=np.int64)
        nodes.append(single)
        base = ptr[-1]
        ptr.extend(base + 1 + np.arange(single.size, dtype=np.int64))
    if not nodes:
        return ChainClass(n, [], [0], [])
    return ChainClass(n, np.concatenate(nodes), np.array(ptr),
                      np.concatenate(wout) if wout else np.zeros(0))


def _line_class(g, axis, dir_index):
    grid = np.arange(g.n, dtype=np.int64).reshape(g.dims)
    L = g.dims[axis]
    nodes = np.moveaxis(grid, axis, -1).reshape(-1, L)
    if L < 2:
        wmat = np.zeros((nodes.shape[0], 0))
    else:
        wmat = np.moveaxis(g.dir_weights[dir_index], axis, -1).reshape(-1, L - 1)
    return _build_class(g.n, nodes, wmat)


def _zigzag_class(g, phase):
    """Zig-zag paths through the diagonal edges of an 8-connected grid.

    Between each pair of adjacent rows (r, r+1) one path runs left to
    right alternating the two diagonal steps; phase 0 starts at (r, 0),
    phase 1 at (r+1, 0).  Within a phase the paths of different row pairs
    use opposite column parities on the shared row, so they are
    vertex-disjoint, and the two phases together cover every diagonal
    edge exactly once.
    """
    H, W = g.dims
    if H < 2 or W < 2:
        return _build_class(g.n, np.zeros((0, 0), dtype=np.int64),
                            np.zeros((0, 0)), leftover=np.arange(g.n))
    d1 = g.dir_weights[2]  # (r, c) -- (r+1, c+1)
    d2 = g.dir_weights[3]  # (r, c+1) -- (r+1, c)
    cols = np.arange(W, dtype=np.int64)
    par = cols % 2
    even_edge = (cols[:-1] % 2) == 0
    node_rows, weight_rows = [], []
    for r in range(H - 1):
        rows = r + par if phase == 0 else r + 1 - par
        node_rows.append(rows * W + cols)
        if phase == 0:
            weight_rows.append(np.where(even_edge, d1[r], d2[r]))
        else:
            weight_rows.append(np.where(even_edge, d2[r], d1[r]))
    covered = np.zeros(g.n, dtype=bool)
    covered[np.concatenate(node_rows)] = True
    return _build_class(g.n, np.stack(node_rows), np.stack(weight_rows),
                        leftover=np.flatnonzero(~covered))


def decompose_grid(g):
    """Chain decomposition of a grid energy; see module docstring."""
    if not isinstance(g, GridEnergy):
        raise ValueError("chain decomposition requires a grid instance")
    if g.connectivity == "2D-4":
        classes = [_line_class(g, 1, 0), _line_class(g, 0, 1)]
    elif g.connectivity == "2D-8":
        classes = [_line_class(g, 1, 0), _line_class(g, 0, 1),
                   _zigzag_class(g, 0), _zigzag_class(g, 1)]
    elif g.connectivity == "3D-6":
        classes = [_line_class(g, 2, 0), _line_class(g, 1, 1),
                   _line_class(g, 0, 2)]
    else:
        raise ValueError("unsupported connectivity %r" % (g.connectivity,))
    return ChainDecomposition(g.n, classes)


def validate(dec, g, rng=None, report=None):
    """Check decomposition invariants against its grid.

    Verifies that chain edges partition the grid's edge list with weights
    intact, that the chains of each class partition the vertex set, and
    that sum_j f_j(x) = f(x) on random real vectors (relative tolerance
    1e-10).  Returns True/False; diagnostics are appended to `report` if
    given.
    """
    problems = []
    all_edges = []
    for k, cls in enumerate(dec.classes):
        if cls.num_chains and np.unique(cls.node_idx).size != cls.node_idx.size:
            problems.append("class %d: chains share a vertex" % k)
        if cls.node_idx.size != g.n:
            problems.append("class %d: chains do not partition every node" % k)
        ei, ej, ea = cls.edge_pairs()
        lo, hi = np.minimum(ei, ej), np.maximum(ei, ej)
        all_edges.extend(zip(lo.tolist(), hi.tolist(), ea.tolist()))
        if ea.size and ea.min() <= 0:
            problems.append("class %d: nonpositive chain edge weight" % k)
    seen = {}
    for i, j, a in all_edges:
        if (i, j) in seen:
            problems.append("edge (%d,%d) appears in more than one chain" % (i, j))
        seen[(i, j)] = a
    grid_edges = {(int(i), int(j)): float(a)
                  for i, j, a in zip(*g.edge_arrays())}
    if set(seen) != set(grid_edges):
        missing = set(grid_edges) - set(seen)
        extra = set(seen) - set(grid_edges)
        if missing:
            problems.append("%d grid edges missing from chains" % len(missing))
        if extra:
            problems.append("%d chain edges not in the grid" % len(extra))
    else:
        for key, a in seen.items():
            if a != grid_edges[key]:
                problems.append("edge %r weight altered" % (key,))
                break
    if rng is None:
        rng = np.random.default_rng(0)
    for _ in range(5):
        x = rng.uniform(-2, 2, g.n)
        fx = g.tv(x)
        if abs(dec.tv(x) - fx) > 1e-10 * max(1.0, abs(fx)):
            problems.append("sum_j f_j(x) != f(x) on a random vector")
            break
    if report is not None:
        report.extend(problems)
    return not problems
