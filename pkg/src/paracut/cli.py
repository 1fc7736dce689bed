"""Command line front end.

Three subcommands: `solve` runs one algorithm on one instance and writes
the labeling, `bench` sweeps algorithms x threads x weight scales on one
instance and emits a CSV comparison, `verify` cross-checks the solvers
against the exact oracles on freshly generated instances.

Exit codes: 0 success, 2 bad arguments, 3 I/O or format error, 4 solve
finished without reaching the requested certificate.
"""
from __future__ import annotations

import argparse
import csv
import os
import sys
import time

import numpy as np

from . import io as pio
from .decompose import decompose_grid, validate
from .graph import GridEnergy, random_grid
from .oracle import BRUTE_FORCE_MAX_NODES, brute_force_mincut, maxflow_mincut
from .projections import project_K, project_L
from .solvers import ALGORITHMS, SolverConfig, solve
from .tv1d import chain_dual_feasible, tv1d_prox

EXIT_OK = 0
EXIT_USAGE = 2
EXIT_IO = 3
EXIT_NOT_CERTIFIED = 4


def _default_threads():
    try:
        return max(1, int(os.environ.get("PARACUT_THREADS", "1")))
    except ValueError:
        return 1


def _add_instance_flags(p):
    p.add_argument("--input", required=True, help="instance file")
    p.add_argument("--format", choices=("auto", "dimacs", "grid"),
                   default="auto")
    p.add_argument("--scale-pairwise", type=float, default=1.0,
                   metavar="F", help="multiply all edge weights by F")


class _UsageError(Exception):
    pass


def _load(args):
    if args.scale_pairwise < 0:
        raise _UsageError("--scale-pairwise must be nonnegative")
    g = pio.load_instance(args.input, args.format)
    if args.scale_pairwise != 1.0:
        g = g.scaled_pairwise(args.scale_pairwise)
    return g


def _solver_config(args, algo, **over):
    kw = dict(algorithm=algo, max_iters=args.max_iters, gap_tol=args.gap_tol,
              check_every=args.check_every)
    kw.update(over)
    return SolverConfig(**kw)


def cmd_solve(args):
    g = _load(args)
    if args.algo == "maxflow":
        t0 = time.perf_counter()
        lab, energy = maxflow_mincut(g)
        wall = time.perf_counter() - t0
        gap, iters, certified = 0.0, 0, True
        dual_state = trace = None
    else:
        if not isinstance(g, GridEnergy):
            print("error: %r is a general instance; chain decomposition "
                  "needs a grid, use --algo maxflow" % args.input,
                  file=sys.stderr)
            return EXIT_USAGE
        warm = pio.load_dual(args.warm_start) if args.warm_start else None
        cfg = _solver_config(args, args.algo, threads=args.threads,
                             warm_start=warm, force_warm=args.force)
        res = solve(g, decompose_grid(g), cfg)
        lab, energy, gap = res.labeling, res.energy, res.gap
        iters, certified, wall = res.iterations, res.certified, res.wall_time
        dual_state, trace = res.dual_state, res.trace
    if args.out:
        with open(args.out, "w") as fh:
            fh.write("\n".join(str(int(v)) for v in lab) + "\n")
    if args.save_dual and dual_state is not None:
        pio.save_dual(dual_state, args.save_dual)
    if args.trace and trace is not None:
        pio.write_trace(trace, args.trace)
    print("energy %s" % repr(energy))
    print("gap %s" % repr(gap))
    print("iterations %d" % iters)
    print("wall_s %.6f" % wall)
    return EXIT_OK if certified else EXIT_NOT_CERTIFIED


def _first_iter_below(pairs, thresh):
    for it, v in pairs:
        if v < thresh:
            return it
    return None


def cmd_bench(args):
    g0 = _load(args)
    if not isinstance(g0, GridEnergy):
        print("error: bench needs a grid instance", file=sys.stderr)
        return EXIT_USAGE
    algos = [a.strip() for a in args.algos.split(",") if a.strip()]
    for a in algos:
        if a not in ALGORITHMS:
            raise _UsageError("unknown algorithm %r" % a)
    try:
        threads = [int(v) for v in args.threads_list.split(",")]
        scales = [float(v) for v in args.scales.split(",")]
    except ValueError:
        raise _UsageError("--threads-list and --scales take comma-separated "
                          "numbers") from None

    rows = []
    for scale in scales:
        g = g0 if scale == 1.0 else g0.scaled_pairwise(scale)
        dec = decompose_grid(g)
        # reference energy and labeling from a tight run, not timed
        ref = solve(g, dec, SolverConfig(algorithm="aar",
                                         max_iters=max(args.max_iters, 20000),
                                         check_every=args.check_every))
        if not ref.certified:
            print("warning: reference run not certified at scale %g"
                  % scale, file=sys.stderr)
        for algo in algos:
            for th in threads:
                cfg = _solver_config(args, algo, threads=th,
                                     reference=ref.labeling)
                res = solve(g, dec, cfg)
                e0 = res.trace[0].energy
                span = e0 - ref.energy
                if span <= 0:
                    it10 = it2 = res.trace[0].iteration
                else:
                    errs = [(r.iteration, (r.energy - ref.energy) / span)
                            for r in res.trace]
                    it10 = _first_iter_below(errs, 0.10)
                    it2 = _first_iter_below(errs, 0.02)
                jds = [(r.iteration, r.jaccard) for r in res.trace]
                rows.append({
                    "algo": algo, "threads": th, "scale": scale,
                    "iterations": res.iterations,
                    "certified": int(res.certified),
                    "energy": repr(res.energy),
                    "wall_s": "%.6f" % res.wall_time,
                    "iter_err_lt_10pct": it10,
                    "iter_err_lt_2pct": it2,
                    "iter_jd_lt_0.1": _first_iter_below(jds, 0.1),
                    "iter_jd_lt_0.02": _first_iter_below(jds, 0.02),
                })
    fields = ["algo", "threads", "scale", "iterations", "certified",
              "energy", "wall_s", "iter_err_lt_10pct", "iter_err_lt_2pct",
              "iter_jd_lt_0.1", "iter_jd_lt_0.02"]
    out = open(args.out, "w", newline="") if args.out else sys.stdout
    try:
        wr = csv.DictWriter(out, fieldnames=fields)
        wr.writeheader()
        for row in rows:
            wr.writerow({k: ("" if row[k] is None else row[k]) for k in fields})
    finally:
        if args.out:
            out.close()
    return EXIT_OK


def _verify_instances(rng, trials):
    for t in range(trials):
        conn = ("2D-4", "2D-8", "3D-6")[t % 3]
        while True:
            if conn == "3D-6":
                dims = tuple(int(v) for v in rng.integers(1, 4, size=3))
            else:
                dims = tuple(int(v) for v in rng.integers(1, 5, size=2))
            if np.prod(dims) <= BRUTE_FORCE_MAX_NODES:
                break
        yield t, random_grid(dims, conn, rng)


def cmd_verify(args):
    rng = np.random.default_rng(args.seed)
    failures = 0

    def report(ok, label):
        nonlocal failures
        if not ok:
            failures += 1
        print("%s %s" % ("ok  " if ok else "FAIL", label))

    for t, g in _verify_instances(rng, args.trials):
        dec = decompose_grid(g)
        diag = []
        dec_ok = validate(dec, g, rng, report=diag)
        report(dec_ok, "trial %d decomposition %s %r%s"
               % (t, g.connectivity, g.dims,
                  "" if dec_ok else " (" + "; ".join(diag) + ")"))

        if args.inject_corruption and t == 0:
            bad = decompose_grid(g)
            cls = next((c for c in bad.classes if c.edge_w.size), None)
            if cls is not None:
                cls.edge_w[0] += 0.5
                report(not validate(bad, g, rng),
                       "trial %d corruption detected" % t)

        lab_bf, e_bf = brute_force_mincut(g)
        lab_mf, e_mf = maxflow_mincut(g)
        report(abs(e_bf - e_mf) < 1e-9,
               "trial %d oracle agreement energy %s" % (t, repr(e_bf)))
        for algo in ALGORITHMS:
            res = solve(g, dec, SolverConfig(algorithm=algo, max_iters=20000,
                                             check_every=5))
            ok = res.certified and abs(res.energy - e_bf) < 1e-9
            report(ok, "trial %d %s energy %s gap %.3g iters %d"
                   % (t, algo, repr(res.energy), res.gap, res.iterations))

        # prox/projection identities on vectors drawn for this instance
        v = rng.normal(size=g.n)
        y = project_K(dec, np.tile(v, (dec.r, 1)))
        feas = all(chain_dual_feasible(y[j][ch.node_ids], ch.weights)
                   for j, cls in enumerate(dec.classes) for ch in cls.chains)
        report(feas, "trial %d projection feasibility" % t)
        lam = project_L(g.w, dec, np.tile(v, (dec.r, 1)))
        agg_ok = np.allclose(lam.sum(axis=0), g.w, rtol=0, atol=1e-9)
        report(agg_ok, "trial %d coupling projection aggregate" % t)

    for t in range(args.trials):
        m = int(rng.integers(2, 40))
        s = rng.normal(size=m) * 2
        a = rng.uniform(0, 2, size=m - 1)
        x = tv1d_prox(s, a)
        ok = chain_dual_feasible(s - x, a)
        report(ok, "tv chain %d dual feasible m=%d" % (t, m))

    print("verify: %d checks failed" % failures)
    return EXIT_OK if failures == 0 else 1


def build_parser():
    ap = argparse.ArgumentParser(
        prog="paracut",
        description="binary grid cuts via parallel TV projections")
    sub = ap.add_subparsers(dest="command", required=True)

    ps = sub.add_parser("solve", help="solve one instance")
    _add_instance_flags(ps)
    ps.add_argument("--algo", choices=ALGORITHMS + ("maxflow",),
                    default="aar")
    ps.add_argument("--gap-tol", type=float, default=0.0)
    ps.add_argument("--max-iters", type=int, default=100000)
    ps.add_argument("--threads", type=int, default=_default_threads())
    ps.add_argument("--check-every", type=int, default=10)
    ps.add_argument("--warm-start", metavar="PATH",
                    help="dual snapshot to start from")
    ps.add_argument("--force", action="store_true",
                    help="use warm start even if its fingerprint mismatches")
    ps.add_argument("--save-dual", metavar="PATH")
    ps.add_argument("--out", metavar="PATH", help="labeling, one 0/1 per line")
    ps.add_argument("--trace", metavar="PATH", help="per-checkpoint CSV")
    ps.set_defaults(func=cmd_solve)

    pb = sub.add_parser("bench", help="compare algorithms on one instance")
    _add_instance_flags(pb)
    pb.add_argument("--algos", default=",".join(ALGORITHMS))
    pb.add_argument("--threads-list", default=str(_default_threads()),
                    metavar="N[,N...]")
    pb.add_argument("--scales", default="1.0", metavar="F[,F...]")
    pb.add_argument("--gap-tol", type=float, default=0.0)
    pb.add_argument("--max-iters", type=int, default=20000)
    pb.add_argument("--check-every", type=int, default=1)
    pb.add_argument("--out", metavar="PATH", help="CSV output (default stdout)")
    pb.set_defaults(func=cmd_bench)

    pv = sub.add_parser("verify", help="cross-check solvers against oracles")
    pv.add_argument("--seed", type=int, default=0)
    pv.add_argument("--trials", type=int, default=10)
    pv.add_argument("--inject-corruption", action="store_true",
                    help="corrupt one decomposition and expect detection")
    pv.set_defaults(func=cmd_verify)
    return ap


def main(argv=None):
    ap = build_parser()
    args = ap.parse_args(argv)
    try:
        return args.func(args)
    except _UsageError as e:
        print("error: %s" % e, file=sys.stderr)
        return EXIT_USAGE
    except (OSError, ValueError) as e:
        print("error: %s" % e, file=sys.stderr)
        return EXIT_IO


if __name__ == "__main__":
    sys.exit(main())
