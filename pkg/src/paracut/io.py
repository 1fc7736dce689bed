"""Instance and result serialization.

Two instance formats: DIMACS max-flow text files (general graphs, the
form benchmark corpora ship in) and a native grid container that keeps
the per-direction weight arrays, so grid structure survives a round trip.
Dual snapshots and CSV traces round out the artifact surface.

All round trips are bitwise exact: binary payloads are little-endian
float64, text payloads use shortest round-trip float formatting.
"""
from __future__ import annotations

import csv
import struct

import numpy as np

from .graph import CONNECTIVITIES, DIRECTIONS, CutInstance, GridEnergy, \
    direction_shape
from .projections import DualState

_MAGIC_BIN = b"PCUT1B"
_MAGIC_TEXT = "PCUT1T"


# ---------------------------------------------------------------- DIMACS

def read_dimacs(path):
    """Parse a DIMACS max-flow file into a cut instance.

    Source and sink arcs become unaries, w_i = cap(s->i) - cap(i->t).
    Antiparallel inner arcs (u->v cap c, v->u cap c') are exactly
    equivalent to the undirected edge a_uv = (c + c')/2 plus the unary
    shifts w_u -= (c - c')/2, w_v += (c - c')/2; cuts are preserved up to
    a constant.  The grid structure, if any, is not recoverable here; the
    result is a general instance for the oracles.
    """
    n_total = None
    src = snk = None
    caps = {}
    wsrc = {}
    wsnk = {}
    with open(path) as fh:
        for lineno, line in enumerate(fh, 1):
            tok = line.split()
            if not tok or tok[0] == "c":
                continue
            if tok[0] == "p":
                if n_total is not None or len(tok) != 4 or tok[1] != "max":
                    raise ValueError("%s:%d: malformed problem line" % (path, lineno))
                n_total = int(tok[2])
                int(tok[3])
                if n_total < 2:
                    raise ValueError("%s:%d: need at least source and sink" % (path, lineno))
            elif tok[0] == "n":
                if n_total is None or len(tok) != 3 or tok[2] not in ("s", "t"):
                    raise ValueError("%s:%d: malformed node line" % (path, lineno))
                nid = int(tok[1])
                if not 1 <= nid <= n_total:
                    raise ValueError("%s:%d: node id out of range" % (path, lineno))
                if tok[2] == "s":
                    if src is not None:
                        raise ValueError("%s:%d: duplicate source" % (path, lineno))
                    src = nid
                else:
                    if snk is not None:
                        raise ValueError("%s:%d: duplicate sink" % (path, lineno))
                    snk = nid
            elif tok[0] == "a":
                if n_total is None or src is None or snk is None or len(tok) != 4:
                    raise ValueError("%s:%d: malformed arc line" % (path, lineno))
                u, v = int(tok[1]), int(tok[2])
                cap = float(tok[3])
                if not (1 <= u <= n_total and 1 <= v <= n_total):
                    raise ValueError("%s:%d: arc endpoint out of range" % (path, lineno))
                if cap < 0 or not np.isfinite(cap):
                    raise ValueError("%s:%d: bad capacity" % (path, lineno))
                if u == v or v == src or u == snk or (u == src and v == snk):
                    raise ValueError("%s:%d: arc references source/sink "
                                     "incorrectly" % (path, lineno))
                if u == src:
                    wsrc[v] = wsrc.get(v, 0.0) + cap
                elif v == snk:
                    wsnk[u] = wsnk.get(u, 0.0) + cap
                else:
                    caps[(u, v)] = caps.get((u, v), 0.0) + cap
            else:
                raise ValueError("%s:%d: unknown line type %r" % (path, lineno, tok[0]))
    if n_total is None:
        raise ValueError("%s: missing problem line" % path)
    if src is None or snk is None or src == snk:
        raise ValueError("%s: source and sink must both be designated" % path)

    ids = [i for i in range(1, n_total + 1) if i != src and i != snk]
    index = {nid: k for k, nid in enumerate(ids)}
    w = np.zeros(len(ids))
    for nid, c in wsrc.items():
        w[index[nid]] += c
    for nid, c in wsnk.items():
        w[index[nid]] -= c
    edges = []
    for (u, v), c in caps.items():
        if (v, u) in caps and u > v:
            continue  # handled from the (v, u) side
        cr = caps.get((v, u), 0.0)
        i, j = index[u], index[v]
        edges.append((i, j, (c + cr) / 2.0))
        w[i] -= (c - cr) / 2.0
        w[j] += (c - cr) / 2.0
    return CutInstance(w, edges)


def write_dimacs(inst, path):
    """Write an instance as a DIMACS max-flow problem.

    Internal nodes keep their order as ids 1..n; source is n+1, sink n+2.
    Every undirected edge becomes a pair of antiparallel arcs of equal
    capacity, which read_dimacs folds back to the identical instance.
    """
    n = inst.n
    ei, ej, ea = inst.edge_arrays()
    src, snk = n + 1, n + 2
    lines = ["c binary cut instance, %d nodes, %d edges" % (n, len(ea))]
    arcs = []
    for i, wi in enumerate(inst.w):
        if wi > 0:
            arcs.append("a %d %d %s" % (src, i + 1, repr(float(wi))))
        elif wi < 0:
            arcs.append("a %d %d %s" % (i + 1, snk, repr(float(-wi))))
    for i, j, a in zip(ei, ej, ea):
        arcs.append("a %d %d %s" % (i + 1, j + 1, repr(float(a))))
        arcs.append("a %d %d %s" % (j + 1, i + 1, repr(float(a))))
    lines.append("p max %d %d" % (n + 2, len(arcs)))
    lines.append("n %d s" % src)
    lines.append("n %d t" % snk)
    lines.extend(arcs)
    with open(path, "w") as fh:
        fh.write("\n".join(lines) + "\n")


# ------------------------------------------------------------ grid files

def write_grid(g, path, text=False):
    """Serialize a grid instance; binary by default, text for eyeballs."""
    if not isinstance(g, GridEnergy):
        raise ValueError("write_grid needs a grid instance")
    if text:
        with open(path, "w") as fh:
            fh.write("%s %s %s\n" % (_MAGIC_TEXT, g.connectivity,
                                     " ".join(str(d) for d in g.dims)))
            fh.write(" ".join(repr(float(v)) for v in g.w) + "\n")
            for arr in g.dir_weights:
                fh.write(" ".join(repr(float(v)) for v in arr.ravel()) + "\n")
        return
    code = CONNECTIVITIES.index(g.connectivity)
    with open(path, "wb") as fh:
        fh.write(_MAGIC_BIN)
        fh.write(struct.pack("<BB", code, len(g.dims)))
        fh.write(struct.pack("<%dQ" % len(g.dims), *g.dims))
        fh.write(g.w.astype("<f8").tobytes())
        for arr in g.dir_weights:
            fh.write(np.ascontiguousarray(arr, dtype="<f8").tobytes())


def _read_grid_text(path):
    with open(path) as fh:
        header = fh.readline().split()
        if not header or header[0] != _MAGIC_TEXT:
            raise ValueError("%s: not a grid file" % path)
        conn = header[1]
        if conn not in CONNECTIVITIES:
            raise ValueError("%s: unknown connectivity %r" % (path, conn))
        dims = tuple(int(v) for v in header[2:])
        if len(dims) != len(DIRECTIONS[conn][0]):
            raise ValueError("%s: dimension count does not match connectivity" % path)
        def row(shape):
            parts = fh.readline().split()
            n = int(np.prod(shape))
            if len(parts) != n:
                raise ValueError("%s: truncated payload" % path)
            return np.array([float(p) for p in parts]).reshape(shape)
        w = row((int(np.prod(dims)),))
        dws = [row(direction_shape(dims, d)) for d in DIRECTIONS[conn]]
    return GridEnergy(dims, conn, w, dws)


def read_grid(path):
    """Load a grid instance written by write_grid (either variant)."""
    with open(path, "rb") as fh:
        magic = fh.read(6)
        if magic == _MAGIC_TEXT.encode():
            pass
        elif magic != _MAGIC_BIN:
            raise ValueError("%s: not a grid file" % path)
        else:
            head = fh.read(2)
            if len(head) < 2:
                raise ValueError("%s: truncated header" % path)
            code, ndim = struct.unpack("<BB", head)
            if code >= len(CONNECTIVITIES):
                raise ValueError("%s: unknown connectivity code %d" % (path, code))
            conn = CONNECTIVITIES[code]
            if ndim != len(DIRECTIONS[conn][0]):
                raise ValueError("%s: dimension count does not match "
                                 "connectivity" % path)
            raw = fh.read(8 * ndim)
            if len(raw) < 8 * ndim:
                raise ValueError("%s: truncated header" % path)
            dims = struct.unpack("<%dQ" % ndim, raw)
            if any(d < 1 for d in dims):
                raise ValueError("%s: empty dimension" % path)
            counts = [int(np.prod(dims))]
            counts += [int(np.prod(direction_shape(dims, d)))
                       for d in DIRECTIONS[conn]]
            payload = fh.read()
            if len(payload) != 8 * sum(counts):
                raise ValueError("%s: truncated payload" % path)
            flat = np.frombuffer(payload, dtype="<f8")
            parts = np.split(flat, np.cumsum(counts)[:-1])
            w = parts[0].astype(np.float64)
            dws = [p.reshape(direction_shape(dims, d))
                   for p, d in zip(parts[1:], DIRECTIONS[conn])]
            return GridEnergy(dims, conn, w, dws)
    return _read_grid_text(path)


# --------------------------------------------------------- dual snapshots

def save_dual(state, path):
    """Snapshot a dual state; arrays round-trip bitwise via npz."""
    payload = {}
    for name in ("y", "lam", "z"):
        v = getattr(state, name)
        if v is not None:
            payload[name] = v
    if state.fingerprint is not None:
        payload["fingerprint"] = np.array(state.fingerprint)
    with open(path, "wb") as fh:  # keep the exact path, savez would append .npz
        np.savez(fh, **payload)


def load_dual(path):
    with np.load(path, allow_pickle=False) as data:
        fp = str(data["fingerprint"]) if "fingerprint" in data else None
        return DualState(y=data.get("y"), lam=data.get("lam"),
                         z=data.get("z"), fingerprint=fp)


# ----------------------------------------------------------------- traces

def write_trace(trace, path):
    """CSV of per-checkpoint solver progress."""
    with open(path, "w", newline="") as fh:
        out = csv.writer(fh)
        out.writerow(["iter", "gap", "dual_objective", "jaccard_to_final",
                      "wall_ms"])
        for row in trace:
            jac = "" if np.isnan(row.jaccard) else repr(float(row.jaccard))
            out.writerow([row.iteration, repr(float(row.gap)),
                          repr(float(row.dual_objective)), jac,
                          repr(float(row.wall_s) * 1000.0)])


def load_instance(path, fmt="auto"):
    """Read an instance by format name or by sniffing the magic bytes."""
    if fmt == "auto":
        with open(path, "rb") as fh:
            head = fh.read(6)
        fmt = "grid" if head in (_MAGIC_BIN, _MAGIC_TEXT.encode()) else "dimacs"
    if fmt == "grid":
        return read_grid(path)
    if fmt == "dimacs":
        return read_dimacs(path)
    raise ValueError("unknown format %r" % (fmt,))
