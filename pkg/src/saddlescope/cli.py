"""Command-line front end.

Exit codes: 0 success, 1 domain failure, 2 parse or usage error, 3 inconclusive numerics.
"""

from __future__ import annotations

import argparse
import cmath
import json
import math
import sys

import numpy as np

from . import differentials as dq
from .config import load_config
from .io import ParseError, dumps, load_differential, load_quiver, load_triangulation, read_json
from .quivers import edge_lattice, mutate, potential, quiver, DegenerateTriangulation
from .stability import (
    BudgetExceeded,
    CentralCharge,
    CollinearCharge,
    PreconditionViolated,
    a_n_spectrum,
    affine_a2_spectrum,
    jacobi_indecomposables_3punct,
    kronecker_spectrum,
)
from .surfaces import InvalidPop, SelfFoldedFlip, SignedTriangulation, TriangulationError, UnsupportedSurface, flip
from .svg import write_svg

EXIT_OK, EXIT_DOMAIN, EXIT_USAGE, EXIT_INCONCLUSIVE = 0, 1, 2, 3

DOMAIN_ERRORS = (
    dq.InvalidDifferential,
    dq.OddOrderPole,
    dq.DecompositionMismatch,
    dq.MismatchedWallKind,
    dq.IntegrationFailure,
    TriangulationError,
    SelfFoldedFlip,
    InvalidPop,
    UnsupportedSurface,
    DegenerateTriangulation,
    PreconditionViolated,
    CollinearCharge,
    BudgetExceeded,
)


class UsageError(Exception):
    pass


def _c(z: complex) -> str:
    return f"{z.real:+.12g}{z.imag:+.12g}i"


def _matrix(m) -> str:
    return "\n".join("  " + " ".join(f"{int(x):3d}" for x in row) for row in np.asarray(m))


# -- subcommands ------------------------------------------------------------------


def cmd_quiver(args, cfg) -> int:
    st = load_triangulation(args.file)
    t = st.triangulation
    q = quiver(t)
    lat = edge_lattice(t)
    print(f"surface: {t.surface}")
    print(f"vertices: {' '.join(map(str, q.vertices))}")
    print("exchange matrix:")
    print(_matrix(q.matrix))
    print("skew form <[e],[f]>:")
    print(_matrix(lat.skew_form))
    print("kappa: " + ", ".join(f"{a}->{b}" for a, b in lat.kappa.items()))
    pairs = t.self_folded_pairs()
    print("self-folded pairs: " + (", ".join(f"({e}, {f}) at {p}" for e, f, p in pairs) if pairs else "none"))
    try:
        pot = potential(st)
        print(f"potential: {len(pot.terms)} cycles")
    except DegenerateTriangulation as e:
        print(f"potential: undefined ({e})")
    if args.json:
        print(dumps(q), end="")
    return EXIT_OK


def cmd_flip(args, cfg) -> int:
    st = load_triangulation(args.file)
    arc = _arc(st.triangulation, args.arc)
    out = SignedTriangulation(flip(st.triangulation, arc), st.sign)
    text = dumps(out)
    if args.out:
        with open(args.out, "w") as f:
            f.write(text)
        print(f"wrote {args.out}")
    else:
        print(text, end="")
    return EXIT_OK


def _arc(t, name):
    for a in t.arcs:
        if str(a) == name:
            return a
    raise UsageError(f"no arc named {name!r}; arcs are {', '.join(map(str, t.arcs))}")


def cmd_mutate(args, cfg) -> int:
    data, _ = read_json(args.file)
    if isinstance(data, dict) and "matrix" in data:
        q = load_quiver(args.file)
    else:
        q = quiver(load_triangulation(args.file).triangulation)
    v = next((x for x in q.vertices if str(x) == args.vertex), None)
    if v is None:
        raise UsageError(f"no vertex named {args.vertex!r}")
    print(dumps(mutate(q, v)), end="")
    return EXIT_OK


def _report_critical(phi) -> None:
    rep = dq.critical_points(phi)
    print(f"polar type: {list(rep.polar_type)}")
    print("zeros: " + ", ".join(_c(z) for z in rep.zeros))
    poles = [f"{_c(z)} (order {m})" for z, m in rep.finite_poles]
    print("finite poles: " + (", ".join(poles) if poles else "none"))
    print(f"order at infinity: {rep.infinity_order}")
    print(f"n = {rep.hat_rank}")
    res = dq.residues(phi) if any(m % 2 == 0 and m >= 2 for m in phi.pole_orders().values()) else {}
    for k, v in res.items():
        print(f"residue {k}: {_c(v)}")


def cmd_analyze(args, cfg) -> int:
    phi = load_differential(args.file)
    theta = phi.theta if args.theta is None else args.theta
    phi = phi.with_theta(theta)
    print(f"theta: {theta}")
    _report_critical(phi)
    free, rays = dq.is_saddle_free(phi, cfg)
    if not free:
        print("saddle-free: no")
        for r in rays:
            if r.end.kind == "near_zero":
                print(f"  saddle at theta={theta}: ray {r.start} reaches zero {r.end.zero}")
        if args.plot:
            write_svg(args.plot, phi, cfg)
            print(f"plot: {args.plot}")
        return EXIT_OK
    print("saddle-free: yes")
    dec = dq.strip_decomposition(phi, cfg, generic=False)
    print(f"strips: {len(dec.strips)}  half-planes: {len(dec.half_planes)}")
    st, strips = dq.wkb_signed(phi, cfg, dec)
    t = st.triangulation
    print(f"WKB triangulation on {t.surface}:")
    for tri, cor in zip(t.triangles, t.corners):
        print(f"  sides {list(tri)}  corners {list(cor)}")
    if st.signs:
        print("signs: " + ", ".join(f"{k}:{v:+d}" for k, v in st.signs))
    print("standard periods:")
    for name, z in dec.periods().items():
        print(f"  {name}: {_c(z)}")
    if args.plot:
        write_svg(args.plot, phi, cfg)
        print(f"plot: {args.plot}")
    return EXIT_OK


def cmd_plot(args, cfg) -> int:
    phi = load_differential(args.file)
    out = args.plot or args.out
    if not out:
        raise UsageError("plot needs an output path (--plot PATH)")
    write_svg(out, phi, cfg, args.theta)
    print(f"wrote {out}")
    return EXIT_OK


def cmd_periods(args, cfg) -> int:
    phi = load_differential(args.file)
    if args.theta is not None:
        phi = phi.with_theta(args.theta)
    _report_critical(phi)
    for name, z in dq.standard_periods(phi, config=cfg).items():
        print(f"{name}: {_c(z)}  |Z|={abs(z):.12g}  phase={(cmath.phase(z) / math.pi) % 2:.10f}")
    return EXIT_OK


def _ring_target(phi):
    """Ring phase for an annulus-type differential with poles at 0 and infinity only."""
    if len(phi.poles) == 1 and phi.poles[0][0] == 0 and phi.infinity_order >= 3 and phi.poles[0][1] >= 3:
        zs = sorted(dq.critical_points(phi).zeros, key=abs)
        try:
            return dq.ring_phase(phi, 0j, math.sqrt(abs(zs[0]) * abs(zs[-1])))
        except ValueError:
            return None
    return None


def cmd_scan(args, cfg) -> int:
    phi = load_differential(args.file)
    window = tuple(args.window) if args.window else None
    res = dq.saddle_phase_scan(phi, grid=cfg.grid, refine_tol=cfg.refine_tol, config=cfg, window=window)
    print(f"{len(res.walls)} walls ({res.evaluations} phase evaluations)")
    print(f"{'theta*':>14}  {'kind':4}  {'length':>12}  detail")
    for w in res.walls:
        what = f"pole {w.pole}" if w.kind == "pop" else f"zeros {list(w.zeros)} rays {[list(r) for r in w.rays]}"
        print(f"{w.theta:14.10f}  {w.kind:4}  {w.length:12.6f}  {what}")
    target = _ring_target(phi)
    if target is not None:
        flag = dq.accumulates_at(res.walls, target)
        print(f"ring phase {target:.10f}: walls accumulate: {'yes' if flag else 'no'}")
    for w in res.inconclusive:
        print(f"inconclusive near theta={w.theta:.10f}")
    if res.inconclusive and not res.walls:
        return EXIT_INCONCLUSIVE
    return EXIT_OK


def cmd_wallcheck(args, cfg) -> int:
    phi = load_differential(args.file)
    if args.theta is None:
        raise UsageError("wallcheck needs --theta")
    r = dq.wall_cross_check(phi, args.theta, cfg)
    print(r.summary())
    print("arcs below: " + ", ".join(map(str, r.before.triangulation.arcs)))
    print("arcs above: " + ", ".join(map(str, r.after.triangulation.arcs)))
    print("transport matrix:")
    print(_matrix(r.transport.matrix))
    return EXIT_OK


def _charge(text: str) -> CentralCharge:
    try:
        return CentralCharge(tuple(complex(x.strip().replace("i", "j")) for x in text.split(",")))
    except ValueError as e:
        raise UsageError(f"bad central charge: {e}") from None


def cmd_stables(args, cfg) -> int:
    kind = args.kind
    if kind == "jacobi":
        found = jacobi_indecomposables_3punct()
        for rep in found:
            print(f"{list(rep.dims)}: " + ", ".join(f"{k}={v.tolist()}" for k, v in rep.maps.items()))
        print(f"{len(found)} indecomposables")
        return EXIT_OK
    if not args.charge:
        raise UsageError("stables needs --charge=Z1,Z2,...")
    Z = _charge(args.charge)
    if kind == "kronecker":
        spec = kronecker_spectrum(Z, args.bound)
    elif kind == "affine-a2":
        spec = affine_a2_spectrum(Z)
    elif kind.startswith("a"):
        orient = kind[1:].lstrip(":") or ">" * (len(Z) - 1)
        spec = a_n_spectrum(orient, Z, args.bound)
    else:
        raise UsageError(f"unknown quiver {kind!r}")
    print(json.dumps(spec.to_list(), indent=2))
    return EXIT_OK


def cmd_examples(args, cfg) -> int:
    from .suites import SUITES, run_suite

    if args.suite not in SUITES:
        raise UsageError(f"unknown suite {args.suite!r}; choose from {', '.join(SUITES)}")
    checks = run_suite(args.suite, cfg.seed, cfg)
    for c in checks:
        print(c.line())
    failed = [c for c in checks if not c.ok]
    if failed:
        print(f"suite {args.suite}: FAIL (first failing check: {failed[0].name})")
        return EXIT_DOMAIN
    print(f"suite {args.suite}: pass ({len(checks)} checks)")
    return EXIT_OK


# -- argument parsing -------------------------------------------------------------


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        self.print_usage(sys.stderr)
        print(f"{self.prog}: error: {message}", file=sys.stderr)
        raise SystemExit(EXIT_USAGE)


def build_parser() -> argparse.ArgumentParser:
    common = _Parser(add_help=False)
    common.add_argument("--config", metavar="PATH", help="JSON config file (default: $SADDLESCOPE_CONFIG)")
    common.add_argument("--tol", type=float, metavar="X", help="integrator tolerance")
    common.add_argument("--grid", type=int, metavar="N", help="phase scan grid size")
    common.add_argument("--seed", type=int, metavar="N", help="random seed")
    common.add_argument("--plot", metavar="PATH", help="write an SVG picture")

    p = _Parser(prog="saddlescope", description="Quadratic differentials, triangulations, quivers and stability.", parents=[common])
    sub = p.add_subparsers(dest="command", parser_class=_Parser)

    s = sub.add_parser("quiver", parents=[common], help="quiver and lattice of a triangulation file")
    s.add_argument("file")
    s.add_argument("--json", action="store_true", help="also print the quiver as JSON")
    s.set_defaults(func=cmd_quiver)

    s = sub.add_parser("flip", parents=[common], help="flip an arc of a triangulation file")
    s.add_argument("file")
    s.add_argument("arc")
    s.add_argument("--out", metavar="PATH")
    s.set_defaults(func=cmd_flip)

    s = sub.add_parser("mutate", parents=[common], help="mutate a quiver (or the quiver of a triangulation)")
    s.add_argument("file")
    s.add_argument("vertex")
    s.set_defaults(func=cmd_mutate)

    for name, func, text in (
        ("analyze", cmd_analyze, "report on a differential file"),
        ("plot", cmd_plot, "SVG picture of a differential file"),
        ("periods", cmd_periods, "standard periods and residues"),
        ("wallcheck", cmd_wallcheck, "check the transport across a wall"),
    ):
        s = sub.add_parser(name, parents=[common], help=text)
        s.add_argument("file")
        s.add_argument("--theta", type=float)
        if name == "plot":
            s.add_argument("out", nargs="?")
        s.set_defaults(func=func)

    s = sub.add_parser("scan", parents=[common], help="locate walls in a phase scan")
    s.add_argument("file")
    s.add_argument("--window", type=float, nargs=2, metavar=("LO", "HI"))
    s.set_defaults(func=cmd_scan)

    s = sub.add_parser("stables", parents=[common], help="stable spectrum of an example quiver")
    s.add_argument("kind", help="kronecker, affine-a2, jacobi, or a (optionally a:<orientation> such as a:><)")
    s.add_argument("--charge", metavar="Z1,Z2,...", help="central charges of the simples, e.g. --charge=-1+1j,1+1j")
    s.add_argument("--bound", type=int, default=7)
    s.set_defaults(func=cmd_stables)

    s = sub.add_parser("examples", parents=[common], help="run a reproducible example suite")
    s.add_argument("suite", help="an, dn, kronecker or sphere3")
    s.set_defaults(func=cmd_examples)
    return p


def main(argv=None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as e:
        return int(e.code or 0)
    if not getattr(args, "command", None):
        parser.print_help()
        return EXIT_USAGE
    try:
        cfg = load_config(args.config).updated(tol=args.tol, grid=args.grid, seed=args.seed)
    except (OSError, ValueError) as e:
        print(f"error: config: {e}", file=sys.stderr)
        return EXIT_USAGE
    print(f"seed: {cfg.seed}")
    try:
        return args.func(args, cfg)
    except (ParseError, UsageError) as e:
        print(f"error: {e}", file=sys.stderr)
        return EXIT_USAGE
    except dq.Inconclusive as e:
        print(f"inconclusive: {e}", file=sys.stderr)
        return EXIT_INCONCLUSIVE
    except DOMAIN_ERRORS as e:
        print(f"error: {type(e).__name__}: {e}", file=sys.stderr)
        return EXIT_DOMAIN


if __name__ == "__main__":
    sys.exit(main())
