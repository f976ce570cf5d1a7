"""Command-line entry point.

Exit codes: 0 success, 1 a check failed or the data was rejected, 2 usage
error (bad flags or parameters), 3 I/O or parse error.
"""

import argparse
import csv
import logging
import sys

import numpy as np

from .depth import depth_sort, edge_digraph, is_linear_extension, tet_digraph, verify_acyclic
from .errors import BadGrid, BadParameters, GeometryError, ParseError, UnknownScenario
from .experiments import (SCENARIOS, RunRecord, emit_csv, parse_grid,
                          run_scenario)
from .generators import KINDS, GenSpec, generate
from .geom import WeightedPoint
from .metrics import order_k_spread, spread
from .pointio import read_points, write_points
from .triangulation import build_delaunay, build_regular, stats, verify_delaunay_bruteforce
from .wspd import build_octree, coverage_check, wspd_pairs

OK, FAILED, USAGE, IO = 0, 1, 2, 3


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        self.print_usage(sys.stderr)
        print(f"{self.prog}: error: {message}", file=sys.stderr)
        raise SystemExit(USAGE)


def _kind_params(args):
    names = ("m", "n", "delta", "k", "pitch", "side", "tilt")
    p = {k: getattr(args, k) for k in names if getattr(args, k) is not None}
    if args.transport:
        p["transport"] = True
    return p


def cmd_generate(args):
    points, meta = generate(GenSpec(args.kind, _kind_params(args), args.seed, args.jitter))
    note = f"{meta.kind} n={meta.n} seed={meta.seed} jitter={meta.jitter!r} rng={meta.rng}"
    write_points(args.out, points, comment=note)
    print(f"wrote {meta.n} points to {args.out}")
    return OK


def _load(path, weighted):
    points = read_points(path)
    if weighted and points and not isinstance(points[0], WeightedPoint):
        points = tuple(WeightedPoint(p, 0.0) for p in points)
    return points


def cmd_triangulate(args):
    points = _load(args.inp, args.weighted)
    mesh = (build_regular if args.weighted else build_delaunay)(points, seed=args.seed)
    st = stats(mesh)
    rec = RunRecord(scenario="triangulate", kind="FILE", gen={"path": args.inp}, n=st.n,
                    edges=st.edges, triangles=st.triangles, tets=st.tets,
                    max_degree=st.max_degree, build_millis=st.build_millis, seed=args.seed,
                    spread=spread(points).spread if len(points) > 1 else None)
    emit_csv([rec], args.stats_out)
    print(f"n={st.n} redundant={st.n_redundant} edges={st.edges} triangles={st.triangles} "
          f"tets={st.tets} max_degree={st.max_degree}")
    return OK


def cmd_verify(args):
    points = _load(args.inp, args.weighted)
    build = build_regular if args.weighted else build_delaunay
    mesh = build(points, seed=args.seed)
    oracle = verify_delaunay_bruteforce(points, weighted=args.weighted)
    if mesh.same_complex(oracle):
        print(f"match: {len(mesh.simplices())} simplices")
        return OK
    a, b = mesh.tet_set(), oracle.tet_set()
    print(f"MISMATCH: {len(a - b)} tets only in the build, {len(b - a)} only in the oracle")
    return FAILED


def cmd_spread(args):
    points = read_points(args.inp)
    rep = spread(points)
    i, j, d = rep.closest_pair
    print(f"diameter {rep.diameter!r}")
    print(f"closest_pair {i} {j} {d!r}")
    print(f"spread {rep.spread!r}")
    if args.k is not None:
        ok = order_k_spread(points, args.k)
        print(f"k {ok.k}")
        print(f"r_hat {ok.r_hat!r}")
        print(f"delta_k_hat {ok.delta_k_hat!r}")
    return OK


def cmd_wspd(args):
    points = read_points(args.inp)
    tree = build_octree(points)
    pairs = wspd_pairs(tree)
    members = {}
    with open(args.out, "w", encoding="utf-8", newline="") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(["level", "ax", "ay", "az", "bx", "by", "bz", "separation", "size_a", "size_b"])
        for i in range(len(pairs)):
            lev = int(pairs.level[i])
            if lev not in members:
                members[lev] = tree.cell_members(lev)
            a, b = tuple(map(int, pairs.a[i])), tuple(map(int, pairs.b[i]))
            w.writerow([lev, *a, *b, repr(float(pairs.separation[i])),
                        len(members[lev][a]), len(members[lev][b])])
    print(f"{len(pairs)} pairs over {tree.depth + 1} levels")
    if args.check_coverage:
        rep = coverage_check(pairs, points, scale=tree.scale)
        print(f"coverage: {rep.checked} far pairs, {len(rep.violations)} uncovered")
        return OK if rep.ok else FAILED
    return OK


def cmd_depth(args):
    points = read_points(args.inp)
    weighted = points and isinstance(points[0], WeightedPoint)
    mesh = (build_regular if weighted else build_delaunay)(points, seed=args.seed)
    rng = np.random.Generator(np.random.PCG64(args.seed))
    lo, hi = mesh.xyz.min(axis=0), mesh.xyz.max(axis=0)
    pad = np.maximum(hi - lo, 1.0)
    failures = 0
    for v in range(args.viewpoints):
        x = rng.uniform(lo - pad, hi + pad)
        order = depth_sort(mesh, x)
        g = tet_digraph(mesh, x)
        ok_t, cyc = verify_acyclic(g)
        ok_e, ecyc = verify_acyclic(edge_digraph(mesh, x)) if args.edges else (True, None)
        ext = is_linear_extension(order, g)
        if not (ok_t and ok_e and ext):
            failures += 1
            print(f"viewpoint {v} {x.tolist()}: acyclic={ok_t} edges_acyclic={ok_e} "
                  f"extension={ext} cycle={cyc or ecyc}")
    print(f"{args.viewpoints - failures}/{args.viewpoints} viewpoints consistent")
    return OK if failures == 0 else FAILED


def cmd_experiment(args):
    grid = parse_grid(args.grid)
    try:
        seeds = [int(s) for s in args.seeds.split(",") if s.strip()]
    except ValueError:
        raise BadGrid(f"seeds must be integers: {args.seeds!r}") from None
    rows = run_scenario(args.name, grid, seeds, timing=args.timing)
    emit_csv(rows, args.csv)
    if args.svg:
        from .plotting import emit_svg
        emit_svg(rows, args.svg, x_field=args.x, y_field=args.y, title=args.name)
    bad = [r for r in rows if r.error]
    for r in bad:
        print(f"row n={r.n} seed={r.seed}: {r.error}", file=sys.stderr)
    print(f"{len(rows)} rows -> {args.csv}")
    return FAILED if bad else OK


def build_parser():
    p = _Parser(prog="dense-delaunay", description=__doc__.splitlines()[0])
    p.add_argument("-v", "--verbose", action="store_true")
    sub = p.add_subparsers(dest="command", required=True, parser_class=_Parser)

    g = sub.add_parser("generate", help="write a generated point set")
    g.add_argument("--kind", required=True, choices=KINDS)
    g.add_argument("--out", required=True)
    g.add_argument("--seed", type=int, default=0)
    g.add_argument("--jitter", type=float, default=0.0)
    for name in ("m", "n", "delta", "k"):
        g.add_argument(f"--{name}", type=int)
    for name in ("pitch", "side", "tilt"):
        g.add_argument(f"--{name}", type=float)
    g.add_argument("--transport", action="store_true",
                   help="SEGMENT_LATTICE: apply (x, y, z) -> (x, y, delta*z) with weights")
    g.set_defaults(func=cmd_generate)

    t = sub.add_parser("triangulate", help="build and count a triangulation")
    t.add_argument("--in", dest="inp", required=True)
    t.add_argument("--weighted", action="store_true")
    t.add_argument("--stats-out", required=True)
    t.add_argument("--seed", type=int, default=0)
    t.set_defaults(func=cmd_triangulate)

    v = sub.add_parser("verify", help="compare against the brute-force oracle (n <= 40)")
    v.add_argument("--in", dest="inp", required=True)
    v.add_argument("--weighted", action="store_true")
    v.add_argument("--seed", type=int, default=0)
    v.set_defaults(func=cmd_verify)

    s = sub.add_parser("spread", help="spread and order-k spread")
    s.add_argument("--in", dest="inp", required=True)
    s.add_argument("--k", type=int)
    s.set_defaults(func=cmd_spread)

    w = sub.add_parser("wspd", help="octree well-separated pairs")
    w.add_argument("--in", dest="inp", required=True)
    w.add_argument("--out", required=True)
    w.add_argument("--check-coverage", action="store_true")
    w.set_defaults(func=cmd_wspd)

    d = sub.add_parser("depth-order", help="check depth orders from random viewpoints")
    d.add_argument("--in", dest="inp", required=True)
    d.add_argument("--viewpoints", type=int, required=True)
    d.add_argument("--seed", type=int, default=0)
    d.add_argument("--edges", action="store_true", help="also check the edge digraph")
    d.set_defaults(func=cmd_depth)

    e = sub.add_parser("experiment", help="run a scenario over a parameter grid")
    e.add_argument("--name", required=True, choices=sorted(SCENARIOS))
    e.add_argument("--grid", required=True, help='e.g. "m=4,6,8" or "n=256;delta=16"')
    e.add_argument("--seeds", required=True, help="comma-separated integers")
    e.add_argument("--csv", required=True)
    e.add_argument("--svg")
    e.add_argument("--x", default="n", help="SVG x field")
    e.add_argument("--y", default="edges", help="SVG y field")
    e.add_argument("--timing", action="store_true",
                   help="record median build times (makes the CSV run-dependent)")
    e.set_defaults(func=cmd_experiment)
    return p


def main(argv=None):
    parser = build_parser()
    args = parser.parse_args(argv)
    logging.basicConfig(level=logging.DEBUG if args.verbose else logging.WARNING)
    try:
        return args.func(args)
    except ParseError as err:
        print(f"parse error: {err}", file=sys.stderr)
        return IO
    except OSError as err:
        print(f"I/O error: {err}", file=sys.stderr)
        return IO
    except (BadParameters, BadGrid, UnknownScenario) as err:
        print(f"usage error: {err}", file=sys.stderr)
        return USAGE
    except GeometryError as err:
        print(f"{type(err).__name__}: {err}", file=sys.stderr)
        return FAILED


if __name__ == "__main__":
    sys.exit(main())
