"""Energy model for binary labeling problems on grids and general graphs.

The energy of a labeling x in {0,1}^n is

    E(x) = sum_{ij} a_ij |x_i - x_j|  -  sum_i w_i x_i    (+ const)

with a_ij >= 0.  The pairwise part, extended to real vectors, is the total
variation f(x) = sum a_ij |x_i - x_j|; on binary x it equals the cut value.
Reductions from general submodular pairwise potentials shift energies by a
constant which is reported but never needed for the argmin.
"""
from __future__ import annotations

import hashlib

import numpy as np

CONNECTIVITIES = ("2D-4", "2D-8", "3D-6")

# Edge directions per connectivity, as index offsets applied to a base cell.
# Line directions come first (fastest-varying axis first), diagonals after.
# This order is also the serialization order of the per-direction weight
# arrays in the grid file format.
DIRECTIONS = {
    "2D-4": ((0, 1), (1, 0)),
    "2D-8": ((0, 1), (1, 0), (1, 1), (1, -1)),
    "3D-6": ((0, 0, 1), (0, 1, 0), (1, 0, 0)),
}


def direction_shape(dims, d):
    """Shape of the weight array for edges in direction d."""
    return tuple(s - abs(k) for s, k in zip(dims, d))


def direction_slices(dims, d):
    """Index slices (sa, sb) with grid[sa] adjacent to grid[sb] along d."""
    sa = tuple(slice(0, s - k) if k >= 0 else slice(-k, s) for s, k in zip(dims, d))
    sb = tuple(slice(k, s) if k >= 0 else slice(0, s + k) for s, k in zip(dims, d))
    return sa, sb


class CutInstance:
    """General instance: unary weights w plus symmetric pairwise weights.

    Edges are kept as a flat list sorted by (i, j) with i < j and a_ij > 0;
    zero-weight edges are dropped at construction since they contribute
    nothing to f.
    """

    def __init__(self, w, edges):
        self.w = np.ascontiguousarray(w, dtype=np.float64)
        if self.w.ndim != 1 or self.w.size < 1:
            raise ValueError("w must be a nonempty 1D vector")
        n = self.w.size
        if len(edges) == 0:
            ei = np.zeros(0, dtype=np.int64)
            ej = np.zeros(0, dtype=np.int64)
            ea = np.zeros(0, dtype=np.float64)
        else:
            arr = np.asarray(edges, dtype=np.float64)
            ei = arr[:, 0].astype(np.int64)
            ej = arr[:, 1].astype(np.int64)
            ea = np.ascontiguousarray(arr[:, 2])
        if np.any(ea < 0):
            raise ValueError("edge weights must be nonnegative")
        lo = np.minimum(ei, ej)
        hi = np.maximum(ei, ej)
        if np.any(lo < 0) or np.any(hi >= n) or np.any(lo == hi):
            raise ValueError("edge endpoints out of bounds or self-loop")
        keep = ea > 0.0
        lo, hi, ea = lo[keep], hi[keep], ea[keep]
        order = np.lexsort((hi, lo))
        self.edge_i = np.ascontiguousarray(lo[order])
        self.edge_j = np.ascontiguousarray(hi[order])
        self.edge_a = np.ascontiguousarray(ea[order])
        if self.edge_i.size > 1:
            dup = (np.diff(self.edge_i) == 0) & (np.diff(self.edge_j) == 0)
            if np.any(dup):
                raise ValueError("duplicate edges")

    @property
    def n(self):
        return self.w.size

    @property
    def num_edges(self):
        return self.edge_i.size

    def edge_arrays(self):
        return self.edge_i, self.edge_j, self.edge_a

    def tv(self, x):
        x = np.asarray(x, dtype=np.float64)
        if x.shape != (self.n,):
            raise ValueError("length mismatch")
        if self.edge_i.size == 0:
            return 0.0
        return float(np.abs(x[self.edge_i] - x[self.edge_j]) @ self.edge_a)

    def energy(self, x):
        x = np.asarray(x, dtype=np.float64)
        if x.shape != (self.n,):
            raise ValueError("length mismatch")
        return self.tv(x) - float(self.w @ x)

    def scaled_pairwise(self, factor):
        """Copy of the instance with every a_ij multiplied by factor."""
        if factor < 0:
            raise ValueError("scale factor must be nonnegative")
        edges = np.column_stack([self.edge_i, self.edge_j,
                                 self.edge_a * factor])
        return CutInstance(self.w.copy(), edges)


class GridEnergy(CutInstance):
    """Cut instance on a 2D or 3D grid with fixed connectivity.

    Pairwise weights are held per direction in dense arrays (zero entries
    mark absent edges); the flat sorted edge list of CutInstance is derived
    from them.  Nodes are indexed in C (row-major) order of `dims`.
    Immutable after construction, safe for concurrent reads.
    """

    def __init__(self, dims, connectivity, w, dir_weights):
        if connectivity not in CONNECTIVITIES:
            raise ValueError("unsupported connectivity %r" % (connectivity,))
        dims = tuple(int(s) for s in dims)
        if len(dims) != len(DIRECTIONS[connectivity][0]):
            raise ValueError("dims rank does not match connectivity")
        if any(s < 1 for s in dims):
            raise ValueError("dims must be positive")
        n = int(np.prod(dims))
        w = np.ascontiguousarray(w, dtype=np.float64)
        if w.shape != (n,):
            raise ValueError("w length must equal product of dims")
        dirs = DIRECTIONS[connectivity]
        if len(dir_weights) != len(dirs):
            raise ValueError("expected %d direction arrays" % len(dirs))
        self.dims = dims
        self.connectivity = connectivity
        self.dir_weights = []
        for d, arr in zip(dirs, dir_weights):
            arr = np.ascontiguousarray(arr, dtype=np.float64)
            shape = direction_shape(dims, d)
            if arr.shape != shape:
                raise ValueError("direction %r weights must have shape %r" % (d, shape))
            if arr.size and np.any(arr < 0):
                raise ValueError("edge weights must be nonnegative")
            self.dir_weights.append(arr)

        grid = np.arange(n, dtype=np.int64).reshape(dims)
        eis, ejs, eas = [], [], []
        for d, arr in zip(dirs, self.dir_weights):
            sa, sb = direction_slices(dims, d)
            eis.append(grid[sa].ravel())
            ejs.append(grid[sb].ravel())
            eas.append(arr.ravel())
        edges = np.column_stack([np.concatenate(eis), np.concatenate(ejs),
                                 np.concatenate(eas)]) if n > 1 else []
        super().__init__(w, edges)

    def direction_pairs(self, k):
        """Flat node index arrays (ia, ib) for all slots of direction k."""
        grid = np.arange(self.n, dtype=np.int64).reshape(self.dims)
        sa, sb = direction_slices(self.dims, DIRECTIONS[self.connectivity][k])
        return grid[sa].ravel(), grid[sb].ravel()

    def tv(self, x):
        x = np.asarray(x, dtype=np.float64)
        if x.shape != (self.n,):
            raise ValueError("length mismatch")
        xg = x.reshape(self.dims)
        total = 0.0
        for d, arr in zip(DIRECTIONS[self.connectivity], self.dir_weights):
            if arr.size == 0:
                continue
            sa, sb = direction_slices(self.dims, d)
            total += float((np.abs(xg[sa] - xg[sb]) * arr).sum())
        return total

    def scaled_pairwise(self, factor):
        """Copy of the instance with every a_ij multiplied by factor."""
        if factor < 0:
            raise ValueError("scale factor must be nonnegative")
        return GridEnergy(self.dims, self.connectivity, self.w.copy(),
                          [arr * factor for arr in self.dir_weights])


def energy(g, x):
    """E(x) = f(x) - w.x for binary x (constant from reductions omitted)."""
    return g.energy(x)


def instance_fingerprint(g):
    """Hash of topology and pairwise weights, excluding unaries.

    Warm starts carry this to detect being replayed against a different
    instance.  Unaries are deliberately left out: dual iterates stay
    useful when only w changes (sequences of frames over one grid), so
    only a change in structure or edge strength invalidates them.
    """
    h = hashlib.sha256()
    if isinstance(g, GridEnergy):
        h.update(("grid:%s:%r" % (g.connectivity, tuple(g.dims))).encode())
        for arr in g.dir_weights:
            h.update(np.ascontiguousarray(arr, dtype=np.float64).tobytes())
    else:
        h.update(("cut:%d" % g.n).encode())
        h.update(g.edge_i.tobytes())
        h.update(g.edge_j.tobytes())
        h.update(g.edge_a.tobytes())
    return h.hexdigest()


def tv_value(g, x):
    """Total variation f(x) = sum a_ij |x_i - x_j|; cut value on binary x."""
    return g.tv(x)


class PairwisePotential:
    """Submodular pairwise term theta(x_i, x_j) on a node pair (i, j)."""

    def __init__(self, i, j, theta00, theta01, theta10, theta11):
        self.i = int(i)
        self.j = int(j)
        self.theta00 = float(theta00)
        self.theta01 = float(theta01)
        self.theta10 = float(theta10)
        self.theta11 = float(theta11)

    def __call__(self, xi, xj):
        return (self.theta00, self.theta01, self.theta10, self.theta11)[2 * xi + xj]


def reduce_pairwise(n, unary, potentials):
    """Reduce -sum u_i x_i + sum theta_ij(x_i, x_j) to cut form.

    Returns (instance, const) with instance a CutInstance such that for all
    binary x:  -u.x + sum theta = instance.energy(x) + const.  Uses the
    standard reduction a_ij = (theta01 + theta10 - theta00 - theta11) / 2
    with the linear remainder absorbed into w and constants collected.
    Raises on any non-submodular potential, reporting the violating pair.
    """
    unary = np.asarray(unary, dtype=np.float64)
    if unary.shape != (n,):
        raise ValueError("unary length mismatch")
    w = unary.copy()
    const = 0.0
    acc = {}
    for p in potentials:
        if not (0 <= p.i < n and 0 <= p.j < n) or p.i == p.j:
            raise ValueError("bad node pair (%d, %d)" % (p.i, p.j))
        gap = p.theta01 + p.theta10 - p.theta00 - p.theta11
        if gap < 0:
            raise ValueError(
                "non-submodular potential on pair (%d, %d): "
                "theta01+theta10 < theta00+theta11" % (p.i, p.j))
        a = 0.5 * gap
        # theta(xi,xj) = a|xi-xj| + (theta10-theta00-a) xi
        #                        + (theta01-theta00-a) xj + theta00
        w[p.i] -= p.theta10 - p.theta00 - a
        w[p.j] -= p.theta01 - p.theta00 - a
        const += p.theta00
        key = (min(p.i, p.j), max(p.i, p.j))
        acc[key] = acc.get(key, 0.0) + a
    edges = [(i, j, a) for (i, j), a in sorted(acc.items())]
    return CutInstance(w, edges), const


def random_grid(dims, connectivity, rng, w_range=(-2.0, 2.0), a_range=(0.0, 2.0)):
    """Random instance with uniform unaries and edge weights."""
    n = int(np.prod(dims))
    w = rng.uniform(w_range[0], w_range[1], size=n)
    dw = [rng.uniform(a_range[0], a_range[1], size=direction_shape(dims, d))
          for d in DIRECTIONS[connectivity]]
    return GridEnergy(dims, connectivity, w, dw)
