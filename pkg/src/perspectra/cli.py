"""Command-line interface.

Exit codes: 0 success, 1 check failure, 2 usage error, 3 data error.
Values print with 17 significant digits and ``+inf`` prints as ``inf``.
"""

from __future__ import annotations

import argparse
import json
import math
import os
import sys
from pathlib import Path

import numpy as np

from . import catalog, verify
from .calculus import IntervalK, marginal
from .core import (BadParam, BadScale, FlagViolation, MissingOracle,
                   PerspectraError)
from .divergences import kl, phi_divergence, power_divergence, read_vector
from .functionals import fisher_information, read_grid, total_variation
from .perspective import (BallImageSet, ConjugateSet, ExposedRaySet,
                          FinitePairSet, Perspective)

EXIT_OK, EXIT_CHECK, EXIT_USAGE, EXIT_DATA = 0, 1, 2, 3
_USAGE_ERRORS = (BadParam, BadScale, FlagViolation, MissingOracle)


class UsageError(Exception):
    pass


def fmt(x) -> str:
    if isinstance(x, (int, np.integer)):
        return str(int(x))
    x = float(x)
    if math.isinf(x):
        return "inf" if x > 0 else "-inf"
    return "{:.17g}".format(x)


def jval(x):
    if isinstance(x, (int, np.integer)):
        return int(x)
    if isinstance(x, np.ndarray):
        return [jval(v) for v in x.tolist()]
    if isinstance(x, (list, tuple)):
        return [jval(v) for v in x]
    x = float(x)
    if math.isinf(x):
        return "inf" if x > 0 else "-inf"
    return x


def parse_decimals(text: str) -> np.ndarray:
    try:
        vals = [float(tok) for tok in text.split(",")]
    except ValueError:
        raise UsageError(f"expected comma-separated decimals, got {text!r}") from None
    if not all(math.isfinite(v) for v in vals):
        raise UsageError(f"values must be finite, got {text!r}")
    return np.array(vals)


def vector_arg(text: str) -> np.ndarray:
    """A path to a CSV/JSON vector if such a file exists, else inline decimals."""
    if Path(text).is_file():
        return read_vector(text)
    try:
        return parse_decimals(text)
    except UsageError as exc:
        raise ValueError(f"{exc} (and no such file)") from None


def _function(args, dim: int):
    return catalog.build(args.fn, dim, catalog.parse_params(args.param or []))


def _print_value(args, v) -> None:
    if args.json:
        print(json.dumps({"value": jval(v)}))
    else:
        print(fmt(v))


# ---------------------------------------------------------------------------
# commands

def cmd_eval(args) -> int:
    y = parse_decimals(args.y)
    _print_value(args, _function(args, y.size).value(y))
    return EXIT_OK


def cmd_persp(args) -> int:
    y = parse_decimals(args.y)
    P = Perspective(_function(args, y.size), recession_mode=args.recession)
    _print_value(args, P.value(args.eta, y))
    return EXIT_OK


def _describe_set(S, rng):
    if isinstance(S, FinitePairSet):
        return {"kind": "hull", "pairs": [{"mu": jval(g.mu), "u": jval(g.u)} for g in S]}
    if isinstance(S, BallImageSet):
        return {"kind": "ball_image", "center": jval(S.ball.center),
                "radius": jval(S.ball.radius), "point": jval(S.point),
                "value": jval(S.value), "relation": "mu = value - <point, u>"}
    if isinstance(S, ConjugateSet):
        return {"kind": "conjugate_sublevel", "relation": "mu + phi*(u) <= 0",
                "examples": [{"mu": jval(g.mu), "u": jval(g.u)} for g in S.sample(rng, 3)]}
    if isinstance(S, ExposedRaySet):
        return {"kind": "exposed_face", "u": [jval(u) for u in S.points],
                "relation": "mu + phi*(u) <= 0"}
    raise TypeError(type(S))


def cmd_subdiff(args) -> int:
    y = parse_decimals(args.y)
    P = Perspective(_function(args, y.size))
    desc = _describe_set(P.subdifferential(args.eta, y), np.random.default_rng(0))
    if args.json:
        print(json.dumps(desc))
        return EXIT_OK
    if desc["kind"] == "hull":
        if not desc["pairs"]:
            print("empty")
        for g in desc["pairs"]:
            print(",".join([fmt(g["mu"])] + [fmt(float(v)) for v in g["u"]]))
    elif desc["kind"] == "ball_image":
        print(f"ball center={','.join(fmt(c) for c in desc['center'])} "
              f"radius={fmt(desc['radius'])} mu={fmt(desc['value'])}-<"
              f"{','.join(fmt(c) for c in desc['point'])},u>")
    elif desc["kind"] == "conjugate_sublevel":
        print("set mu + phi*(u) <= 0")
    else:
        print("face u in {" + "; ".join(",".join(fmt(float(c)) for c in u) for u in desc["u"])
              + "} with mu + phi*(u) <= 0")
    return EXIT_OK


def cmd_div(args) -> int:
    x, y = vector_arg(args.x), vector_arg(args.y)
    if x.size != y.size:
        raise ValueError(f"x has {x.size} entries but y has {y.size}")
    weights = vector_arg(args.weights) if args.weights else None
    params = catalog.parse_params(args.param or [])
    if args.phi == "kl" and weights is None:
        if params:
            raise BadParam("kl takes no parameters")
        v = kl(x, y)
    elif args.phi == "power" and weights is None:
        if set(params) - {"p"}:
            raise BadParam("power takes only p")
        v = power_divergence(params.get("p", 1.0), x, y)
    else:
        name = {"kl": "entropy", "power": "power_div"}.get(args.phi, args.phi)
        v = phi_divergence(catalog.build(name, 1, params), x, y, weights)
    _print_value(args, v)
    return EXIT_OK


def cmd_grid(args, functional) -> int:
    _print_value(args, functional(read_grid(args.grid, args.h)))
    return EXIT_OK


def cmd_marginal(args) -> int:
    y = parse_decimals(args.y)
    k = parse_decimals(args.K)
    if k.size != 2:
        raise UsageError("--K takes lo,hi")
    P = Perspective(_function(args, y.size))
    _print_value(args, marginal(P, IntervalK(k[0], k[1]), y))
    return EXIT_OK


def _seed(args) -> int:
    env = os.environ.get("PERSPECTRA_SEED")
    if env is None:
        return args.seed
    try:
        return int(env)
    except ValueError:
        raise UsageError(f"PERSPECTRA_SEED must be an integer, got {env!r}") from None


def cmd_check(args) -> int:
    seed = _seed(args)
    if args.trials < 1:
        raise UsageError("--trials must be positive")
    if args.all == bool(args.fn):
        raise UsageError("check needs exactly one of --all or --fn")
    if args.all:
        reports = verify.run_all_checks(seed, args.trials, args.inject_defect)
    else:
        phi = catalog.build(args.fn, args.dim, catalog.parse_params(args.param or []))
        P = verify.make_mutant(Perspective(phi), args.inject_defect)
        reports = [
            verify.convexity_chord_check(lambda z: P.value(z[0], z[1:]),
                                         verify.perspective_sampler(P), args.trials, 1e-9,
                                         seed, name=f"convexity[{args.fn}]"),
            verify.homogeneity_check(P, args.trials, 1e-12, seed, name=f"homogeneity[{args.fn}]"),
        ]
    if args.json:
        print(json.dumps([r.to_dict() for r in reports]))
    else:
        for r in reports:
            status = "PASS" if r.passed else f"FAIL ({len(r.failures)} failures)"
            print(f"{r.name}: {status}")
    return EXIT_OK if all(r.passed for r in reports) else EXIT_CHECK


def cmd_demo(args) -> int:
    if args.demo == "minseq":
        rows = verify.minimizing_sequence_demo(args.p, args.n)
        if args.json:
            print(json.dumps([{"n": n, "gap": jval(g), "distance": jval(d)} for n, g, d in rows]))
        else:
            for n, g, d in rows:
                print(f"{n},{fmt(g)},{fmt(d)}")
        return EXIT_OK
    if not args.p > 1:
        raise BadParam("demo lsc needs p > 1")
    P = Perspective(catalog.make_norm_power(1, args.p))
    rows = []
    for n in range(args.steps):
        a = 2.0 ** -n
        rows.append((n, P.value(a ** (args.p / (args.p - 1)), [a])))
    origin = P.value(0.0, [0.0])
    if args.json:
        print(json.dumps({"path": [{"n": n, "value": jval(v)} for n, v in rows],
                          "origin": jval(origin)}))
    else:
        for n, v in rows:
            print(f"{n},{fmt(v)}")
        print(f"origin,{fmt(origin)}")
    return EXIT_OK


# ---------------------------------------------------------------------------

def _fn_args(p, required=True):
    p.add_argument("--fn", required=required, help=f"one of {', '.join(catalog.CATALOG)}")
    p.add_argument("--param", action="append", metavar="K=V",
                   help="function parameter; repeatable, vectors as comma lists")


def build_parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--json", action="store_true", default=argparse.SUPPRESS,
                        help="JSON output")
    parser = argparse.ArgumentParser(prog="perspectra",
                                     description="Perspective functions and their calculus.")
    parser.add_argument("--json", action="store_true", help="JSON output")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("eval", parents=[common], help="evaluate a catalog function")
    _fn_args(p)
    p.add_argument("--y", required=True)

    p = sub.add_parser("persp", parents=[common], help="evaluate a perspective")
    _fn_args(p)
    p.add_argument("--eta", type=float, required=True)
    p.add_argument("--y", required=True)
    p.add_argument("--recession", choices=["auto", "closed", "numeric"], default="auto")

    p = sub.add_parser("subdiff", parents=[common], help="subdifferential of a perspective")
    _fn_args(p)
    p.add_argument("--eta", type=float, required=True)
    p.add_argument("--y", required=True)

    p = sub.add_parser("div", parents=[common], help="phi-divergence of two vectors")
    p.add_argument("--phi", required=True, help="kl, power, or a scalar catalog name")
    p.add_argument("--x", required=True, help="file path or comma-separated decimals")
    p.add_argument("--y", required=True, help="file path or comma-separated decimals")
    p.add_argument("--param", action="append", metavar="K=V")
    p.add_argument("--weights", help="file path or comma-separated decimals")

    for name, helptext in [("fisher", "discrete Fisher information"),
                           ("tv", "discrete total variation")]:
        p = sub.add_parser(name, parents=[common], help=helptext)
        p.add_argument("--grid", required=True, help="CSV grid file")
        p.add_argument("--h", type=float, required=True, help="grid spacing")

    p = sub.add_parser("marginal", parents=[common], help="infimum over eta in an interval")
    _fn_args(p)
    p.add_argument("--K", required=True, metavar="LO,HI")
    p.add_argument("--y", required=True)

    p = sub.add_parser("check", parents=[common], help="run property checks")
    p.add_argument("--all", action="store_true", help="the full suite")
    _fn_args(p, required=False)
    p.add_argument("--dim", type=int, default=1)
    p.add_argument("--trials", type=int, default=1000)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--inject-defect", type=int, default=0, choices=[0, *verify.DEFECTS],
                   help=argparse.SUPPRESS)

    p = sub.add_parser("demo", parents=[common], help="pathology demonstrations")
    dsub = p.add_subparsers(dest="demo", required=True)
    q = dsub.add_parser("minseq", parents=[common], help="minimizing sequence that diverges")
    q.add_argument("--p", type=float, default=1.0)
    q.add_argument("--n", type=int, default=10, help="number of rows")
    q = dsub.add_parser("lsc", parents=[common], help="discontinuity at the origin")
    q.add_argument("--p", type=float, default=2.0)
    q.add_argument("--steps", type=int, default=20)
    return parser


COMMANDS = {
    "eval": cmd_eval, "persp": cmd_persp, "subdiff": cmd_subdiff, "div": cmd_div,
    "fisher": lambda a: cmd_grid(a, fisher_information),
    "tv": lambda a: cmd_grid(a, total_variation),
    "marginal": cmd_marginal, "check": cmd_check, "demo": cmd_demo,
}


def main(argv=None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return exc.code if isinstance(exc.code, int) else EXIT_USAGE
    try:
        return COMMANDS[args.command](args)
    except (UsageError, *_USAGE_ERRORS) as exc:
        print(f"perspectra: error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except (PerspectraError, OSError, ValueError) as exc:
        print(f"perspectra: data error: {exc}", file=sys.stderr)
        return EXIT_DATA


def run(argv=None) -> int:
    return main(argv)


if __name__ == "__main__":
    sys.exit(main())
