"""Command-line entry point ``capprox``.

Every invocation prints exactly one JSON run record on stdout::

    {"subcommand": ..., "parameters": {...}, "outputs": {...},
     "timing": {"seconds": ...}, "warnings": [...], "status": "ok" | "error",
     "exit_code": 0}

Exit codes: 0 success, 2 argument or schema error, 3 numeric or
convergence failure, 4 I/O error. Results can be written to files with
``--out``; nothing is written anywhere else.
"""

import argparse
import math
import sys
import time

import numpy as np

from . import _parallel, io
from .compactset import hausdorff, image, make_net
from .errors import ArgumentError, CapproxError, CapproxIOError, NumericError, SelectionError
from .funcparser import parse, parse_complex, parse_point, to_rational
from .numeric import TAU_SING

NET_WARNING = "values are computed on the net points only; accuracy between net points is not certified"
LOWER_WARNING = "extremal values are lower estimates over a finite polynomial family"
EXIT_OK, EXIT_ARG, EXIT_NUMERIC, EXIT_IO = 0, 2, 3, 4


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        self.print_usage(sys.stderr)
        raise ArgumentError(message)


def _net(path):
    return io.load_net(path)


def _emit_net(K, out):
    if out:
        io.save(K.to_json(), out)
        return {"net": out, "points": len(K), "mesh": K.mesh}
    return {"net": K.to_json(), "points": len(K), "mesh": K.mesh}


def _family(args, dim):
    from .extremal import make_family

    seg = tuple(parse_point(args.segment)) if getattr(args, "segment", None) else (-1, 1)
    return make_family(args.family, args.deg, dim, args.height, seg)


# subcommands -----------------------------------------------------------------

def cmd_shape(args):
    params = {}
    if args.kind in ("disk", "circle"):
        params = {"center": parse_complex(args.center), "radius": args.radius}
    elif args.kind == "annulus":
        params = {"center": parse_complex(args.center), "r1": args.r1, "r2": args.r2}
    elif args.kind == "segment":
        params = {"a": parse_complex(args.a), "b": parse_complex(args.b)}
    elif args.kind == "torus":
        params = {"radii": [float(x) for x in args.radii.split(",")]}
        if args.center_point:
            params["center"] = parse_point(args.center_point)
    elif args.kind == "box":
        params = {"lower": parse_point(args.lower), "upper": parse_point(args.upper)}
    elif args.kind == "points":
        pts = [parse_point(p) for p in args.points.split(";")]
        params = {"points": np.array(pts)}
    K = make_net(args.kind, args.h, **params)
    return _emit_net(K, args.out), []


def cmd_hausdorff(args):
    return {"distance": hausdorff(_net(args.a), _net(args.b))}, []


def cmd_image(args):
    K = _net(args.k)
    fs = [parse(f, K.dim) for f in args.f]
    return _emit_net(image(K, fs if len(fs) > 1 else fs[0]), args.out), [NET_WARNING]


def cmd_contour(args):
    from .contour import build_contour

    K = _net(args.k)
    gamma = build_contour(K, margin=args.margin, cell=args.cell)
    out = {
        "cycles": len(gamma.cycles),
        "vertices": gamma.vertex_count,
        "length": gamma.length,
        "cell": gamma.cell,
        "distance_to_K": float(gamma.distance(K.points[:, 0]).min()),
    }
    if args.out:
        io.save(gamma.to_json(), args.out)
        out["contour"] = args.out
    else:
        out["contour"] = gamma.to_json()
    return out, []


def cmd_runge(args):
    from .runge import approximate

    K = _net(args.k)
    res = approximate(
        parse(args.f, 1), K, args.margin, args.eps, cell=args.cell, max_halvings=args.max_halvings,
        assume_holomorphic=args.assume_holomorphic,
    )
    out = {
        "achieved_error": res.achieved_error,
        "delta": res.delta,
        "terms": len(res.rational),
        "pole_clearance": res.pole_clearance,
        "history": [{"delta": d, "nodes": n, "error": e} for d, n, e in res.history],
    }
    if args.out:
        io.save(res.rational.to_json(), args.out)
        out["rational"] = args.out
    return out, [NET_WARNING]


def _series_out(t, args):
    entries = [{"nu": list(nu), "re": c.real, "im": c.imag} for nu, c in sorted(t.nonzero(args.tol).items())]
    out = {"kind": t.kind, "dim": t.dim, "radii": list(t.radii), "nodes": t.nodes, "order": t.order,
           "nonzero": len(entries)}
    if args.out:
        io.save(t.to_json(), args.out)
        out["table"] = args.out
    else:
        out["entries"] = entries
    return out


def _radius_arg(text):
    vals = [float(x) for x in str(text).split(",")]
    return vals[0] if len(vals) == 1 else vals


def cmd_taylor(args):
    from .series import taylor_table

    t = taylor_table(parse(args.f, args.dim), args.degree, _radius_arg(args.rho), args.m, args.dim,
                     args.assume_holomorphic)
    return _series_out(t, args), []


def cmd_laurent(args):
    from .series import laurent_table

    t = laurent_table(parse(args.f, args.dim), args.order, _radius_arg(args.rho), args.m, args.dim,
                      args.assume_holomorphic)
    return _series_out(t, args), []


def _hull_out(rep, K, args):
    out = {
        "survivors": rep.survivors,
        "family_size": rep.family_size,
        "effective_size": rep.effective_size,
        "candidates": rep.candidates,
        "defect": hausdorff(K, rep.net),
    }
    if rep.skipped is not None:
        out["skipped"] = rep.skipped
    out.update({k: v for k, v in _emit_net(rep.net, args.out).items() if k == "net"})
    return out


def cmd_hull(args):
    from .hulls import CandidateGrid, poly_hull
    from .numeric import FamilySpec

    K = _net(args.k)
    fam = FamilySpec(K.dim, args.deg, args.height, cap=args.cap)
    grid = CandidateGrid.around(K, args.res)
    rep = poly_hull(K, fam, grid, args.slack, compensate=args.compensate, report=True)
    return _hull_out(rep, K, args), [NET_WARNING]


def cmd_rhull(args):
    from .hulls import CandidateGrid, rational_hull
    from .numeric import FamilySpec

    K = _net(args.k)
    fam = None if args.height == 0 else FamilySpec(K.dim, args.deg, args.height, cap=args.cap)
    rats = [to_rational(r, K.dim) for r in args.rational]
    grid = CandidateGrid.around(K, args.res)
    rep = rational_hull(K, fam, rats, grid, args.slack, tau_sing=args.tau_sing, report=True)
    return _hull_out(rep, K, args), [NET_WARNING]


def cmd_siciak(args, kind="siciak"):
    from .extremal import green, siciak

    K = _net(args.k)
    z = parse_point(args.z, K.dim)
    est = (green if kind == "green" else siciak)(K, z, _family(args, K.dim), args.normalize)
    return est.to_json(), [LOWER_WARNING, NET_WARNING]


def cmd_green(args):
    return cmd_siciak(args, "green")


def cmd_random_demo(args):
    from .compactset import circle, disk
    from .numeric import FamilySpec
    from .randomness import (
        RandomCompactSet, constant_table, is_measurable, random_hull, random_image, random_siciak, random_space,
    )

    rng = np.random.default_rng(args.seed)
    space = random_space(rng, args.outcomes, args.atoms)
    shapes = {}
    for a, atom in enumerate(space.atoms):
        r = float(rng.uniform(0.5, 1.5))
        shapes[a] = circle(0, r, args.h) if rng.integers(2) else disk(0, r, args.h)
    K = RandomCompactSet(space, {w: shapes[space.atom_of(w)] for w in space.outcomes})
    fam = FamilySpec(1, args.deg, args.height)
    H = random_hull(K, fam, res=args.res)
    X = K[space.outcomes[0]]
    G = random_image(X, constant_table(space, "z^2"))
    phi = random_siciak(K, 2, fam)
    out = {
        "space": space.to_json(),
        "input_measurable": is_measurable(K),
        "hull_measurable": is_measurable(H),
        "image_measurable": is_measurable(G),
        "siciak_measurable": is_measurable(space, phi),
        "per_atom": [
            {"atom": a, "points": len(shapes[a]), "hull_points": len(H[atom[0]]), "siciak_at_2": phi[atom[0]]}
            for a, atom in enumerate(space.atoms)
        ],
    }
    if args.out:
        io.save(H.to_json(), args.out)
        out["hull"] = args.out
    return out, [NET_WARNING, LOWER_WARNING]


def cmd_select(args):
    from .randomness import select_uniform, taylor_offset_battery

    K, f_seq, target, offsets = taylor_offset_battery(args.outcomes, args.max_index, args.max_offset, args.seed,
                                                      args.h, args.atoms)
    res = select_uniform(K, f_seq, target, args.eps)
    out = res.to_json()
    out["offsets"] = offsets
    out["atoms"] = [list(a) for a in K.space.atoms]
    return out, [NET_WARNING]


def cmd_okaweil(args):
    from .randomness import FiniteSampleSpace, constant_compact, constant_table, oka_weil_select

    if args.k:
        K = io.load_random_compact(args.k)
    else:
        space = FiniteSampleSpace([f"w{i}" for i in range(args.outcomes)])
        K = constant_compact(space, make_net("disk", args.h, center=0, radius=args.radius))
    f = io.load_random_function(args.ftable) if args.ftable else constant_table(K.space, args.f, K.dim)
    res = oka_weil_select(K, f, args.eps, args.degree, _radius_arg(args.polydisc or args.radius), args.m)
    return res.to_json(), [NET_WARNING]


# argument parsing ------------------------------------------------------------

def build_parser():
    p = _Parser(prog="capprox", description="Numerics for compact nets in C^n and random compact sets.")
    p.add_argument("--threads", type=int, default=None, help="worker threads (default: CAPPROX_THREADS or all cores)")
    sub = p.add_subparsers(dest="subcommand", parser_class=_Parser)

    s = sub.add_parser("shape", help="build a net of a standard shape")
    s.add_argument("--kind", required=True, choices=["disk", "circle", "annulus", "segment", "torus", "box", "points"])
    s.add_argument("--h", type=float, required=True)
    s.add_argument("--center", default="0")
    s.add_argument("--radius", type=float, default=1.0)
    s.add_argument("--r1", type=float)
    s.add_argument("--r2", type=float)
    s.add_argument("--a", default="-1")
    s.add_argument("--b", default="1")
    s.add_argument("--radii", default="1,1")
    s.add_argument("--center-point", dest="center_point")
    s.add_argument("--lower")
    s.add_argument("--upper")
    s.add_argument("--points", help="semicolon-separated points, coordinates separated by commas")
    s.add_argument("--out")

    s = sub.add_parser("hausdorff", help="Hausdorff distance of two nets")
    s.add_argument("--a", required=True)
    s.add_argument("--b", required=True)

    s = sub.add_parser("image", help="image of a net under one or more functions")
    s.add_argument("--k", required=True)
    s.add_argument("--f", required=True, action="append")
    s.add_argument("--out")

    s = sub.add_parser("contour", help="grid contour around a planar net")
    s.add_argument("--k", required=True)
    s.add_argument("--margin", type=float, required=True)
    s.add_argument("--cell", type=float)
    s.add_argument("--out")

    s = sub.add_parser("runge", help="rational approximation from Cauchy Riemann sums")
    s.add_argument("--f", required=True)
    s.add_argument("--k", required=True)
    s.add_argument("--margin", type=float, required=True)
    s.add_argument("--eps", type=float, required=True)
    s.add_argument("--cell", type=float)
    s.add_argument("--max-halvings", dest="max_halvings", type=int, default=24)
    s.add_argument("--assume-holomorphic", dest="assume_holomorphic", action="store_true")
    s.add_argument("--out")

    for name, order_flag in (("taylor", "--degree"), ("laurent", "--order")):
        s = sub.add_parser(name, help=f"{name} coefficients by torus quadrature")
        s.add_argument("--f", required=True)
        s.add_argument("--dim", type=int, default=1)
        s.add_argument(order_flag, type=int, required=True)
        s.add_argument("--rho", default="1.0", help="radius, or comma-separated radii")
        s.add_argument("--m", type=int, default=128)
        s.add_argument("--tol", type=float, default=0.0, help="omit coefficients with modulus <= tol")
        s.add_argument("--assume-holomorphic", dest="assume_holomorphic", action="store_true")
        s.add_argument("--out")

    for name in ("hull", "rhull"):
        s = sub.add_parser(name, help="polynomial hull" if name == "hull" else "rational hull")
        s.add_argument("--k", required=True)
        s.add_argument("--deg", type=int, required=True)
        s.add_argument("--height", type=int, required=True)
        s.add_argument("--grid-res", "--res", dest="res", type=float, default=0.05, help="candidate grid spacing")
        s.add_argument("--slack", type=float, default=1e-9)
        s.add_argument("--cap", type=int)
        s.add_argument("--out")
        if name == "hull":
            s.add_argument("--compensate", action="store_true")
        else:
            s.add_argument("--rational", action="append", default=[], help="rational expression, e.g. 1/z")
            s.add_argument("--tau-sing", dest="tau_sing", type=float, default=TAU_SING,
                           help="skip rationals with a singularity this close to K")

    for name in ("siciak", "green"):
        s = sub.add_parser(name, help=f"{name} lower estimate")
        s.add_argument("--k", required=True)
        s.add_argument("--z", required=True)
        s.add_argument("--family", choices=["monomial", "chebyshev", "rational"], default="monomial")
        s.add_argument("--deg", type=int, required=True)
        s.add_argument("--height", type=int, default=1)
        s.add_argument("--segment", help="segment endpoints a,b for the Chebyshev family")
        s.add_argument("--normalize", action="store_true")

    s = sub.add_parser("random-demo", help="random compact set on a random finite sample space")
    s.add_argument("--seed", type=int, default=0)
    s.add_argument("--outcomes", type=int, default=12)
    s.add_argument("--atoms", type=int, default=3)
    s.add_argument("--h", type=float, default=0.1)
    s.add_argument("--res", type=float, default=0.1)
    s.add_argument("--deg", type=int, default=2)
    s.add_argument("--height", type=int, default=1)
    s.add_argument("--out")

    s = sub.add_parser("select", help="min-index selection on the offset Taylor battery")
    s.add_argument("--eps", type=float, required=True)
    s.add_argument("--seed", type=int, default=0)
    s.add_argument("--outcomes", type=int, default=100)
    s.add_argument("--atoms", type=int, default=10)
    s.add_argument("--max-index", dest="max_index", type=int, default=25)
    s.add_argument("--max-offset", dest="max_offset", type=int, default=5)
    s.add_argument("--h", type=float, default=0.05)

    s = sub.add_parser("okaweil", help="per-atom polynomial approximation")
    s.add_argument("--f", default="exp(z)")
    s.add_argument("--ftable", help="random function table JSON")
    s.add_argument("--k", help="random compact set JSON (default: constant disk)")
    s.add_argument("--radius", type=float, default=0.5, help="radius of the default disk")
    s.add_argument("--polydisc", help="declared polydisc radii (default: --radius)")
    s.add_argument("--outcomes", type=int, default=4)
    s.add_argument("--h", type=float, default=0.05)
    s.add_argument("--eps", type=float, required=True)
    s.add_argument("--degree", type=int, default=20)
    s.add_argument("--m", type=int, default=128)
    return p


COMMANDS = {
    "shape": cmd_shape, "hausdorff": cmd_hausdorff, "image": cmd_image, "contour": cmd_contour,
    "runge": cmd_runge, "taylor": cmd_taylor, "laurent": cmd_laurent, "hull": cmd_hull, "rhull": cmd_rhull,
    "siciak": cmd_siciak, "green": cmd_green, "random-demo": cmd_random_demo, "select": cmd_select,
    "okaweil": cmd_okaweil,
}


def _exit_code(exc):
    if isinstance(exc, CapproxIOError):
        return EXIT_IO
    if isinstance(exc, ArgumentError):
        return EXIT_ARG
    if isinstance(exc, NumericError):
        return EXIT_NUMERIC
    return EXIT_NUMERIC


def run(argv=None):
    """Parse ``argv`` and return ``(record, exit_code)`` without printing."""
    parser = build_parser()
    record = {"subcommand": None, "parameters": {}, "outputs": {}, "timing": {"seconds": 0.0}, "warnings": []}
    t0 = time.perf_counter()
    try:
        args = parser.parse_args(argv)
        if args.subcommand is None:
            parser.print_usage(sys.stderr)
            raise ArgumentError("missing subcommand; choose from " + ", ".join(COMMANDS))
        record["subcommand"] = args.subcommand
        record["parameters"] = {k: v for k, v in vars(args).items() if k != "subcommand"}
        if args.threads is not None and args.threads < 1:
            raise ArgumentError("--threads must be >= 1")
        threads = args.threads or _parallel.get_threads()
        with _parallel.threads(threads):
            outputs, warnings = COMMANDS[args.subcommand](args)
        record.update(outputs=outputs, warnings=warnings, status="ok", exit_code=EXIT_OK)
    except (CapproxError, OverflowError) as exc:
        code = _exit_code(exc)
        err = {"type": type(exc).__name__, "message": str(exc)}
        if getattr(exc, "path", None):
            err["path"] = exc.path
        if isinstance(exc, SelectionError):
            err["atoms"] = {str(a): e for a, e in exc.atoms.items()}
        if getattr(exc, "best_error", None) is not None and math.isfinite(exc.best_error):
            err["best_error"] = exc.best_error
        record.update(status="error", exit_code=code, error=err)
    record["timing"]["seconds"] = time.perf_counter() - t0
    return record, record["exit_code"]


def main(argv=None):
    record, code = run(argv)
    sys.stdout.write(io.dumps(record) + "\n")
    sys.stdout.flush()
    return code


if __name__ == "__main__":
    sys.exit(main())
