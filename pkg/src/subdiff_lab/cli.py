"""Command-line entry point: ``subdiff-lab <command> [flags]``.

Exit codes: 0 verified or certified, 1 refuted or violation found,
2 inconclusive, 3 usage or domain error.
"""

from __future__ import annotations

import argparse
import json
import sys
from typing import Optional

import numpy as np

from . import suite as suite_mod
from .calculus import (DEFAULT_SCHEDULE, _json_num, directional_derivative, eps_enlargement,
                       subdifferential, verify_link)
from .errors import IsActuallyOptimal, WitnessNotFound
from .monotone import (check_absorbing, check_maximal_monotone, default_dual_grid,
                       polar_samples, primal_candidates, sample_subdiff_graph)
from .optimality import Verdict, directional_test, refute_optimality, subdiff_test
from .parser import format_function, parse_box, parse_function
from .plfunc import Box, GridSpec, PLFunction
from .variational import ekeland_point, mean_value_witness

EXIT_OK, EXIT_REFUTED, EXIT_INCONCLUSIVE, EXIT_USAGE = 0, 1, 2, 3


class UsageError(Exception):
    pass


class _ArgParser(argparse.ArgumentParser):
    def error(self, message):
        raise UsageError(f"{self.prog}: {message}")


def _coords(text: str) -> np.ndarray:
    try:
        vals = [float(t) for t in text.replace(",", " ").split()]
    except ValueError:
        raise UsageError(f"bad coordinates {text!r}") from None
    if not vals:
        raise UsageError("empty coordinates")
    return np.array(vals)


def _schedule(text: str) -> tuple:
    return tuple(float(t) for t in text.replace(",", " ").split())


def _func(args) -> PLFunction:
    return parse_function(args.func)


def _point(args, f: PLFunction, name: str = "at") -> np.ndarray:
    x = _coords(getattr(args, name))
    if len(x) != f.dim:
        raise UsageError(f"--{name.replace('_', '-')} has {len(x)} coordinates, f has {f.dim}")
    return x


def _region(args, f: PLFunction, required: bool = True) -> Optional[Box]:
    if args.region:
        box = parse_box(args.region)
        if box.dim != f.dim:
            raise UsageError(f"--region has dimension {box.dim}, f has {f.dim}")
        return box
    if f.domain is not None:
        return f.domain
    if required:
        raise UsageError("--region is required when f has no box clause")
    return None


def _grid(args, region: Box) -> GridSpec:
    if args.grid_h:
        return GridSpec(args.grid_h, region)
    return GridSpec.default(region)


def _emit(payload, args):
    fmt = getattr(args, "format", "json")
    if fmt == "text":
        for k, v in payload.items():
            print(f"{k}: {v if not isinstance(v, (dict, list)) else json.dumps(v)}")
    else:
        print(json.dumps(payload, indent=2, default=suite_mod._default))


def _csv_rows(header, rows):
    print(",".join(header))
    for r in rows:
        print(",".join(repr(float(v)) for v in r))


# -- commands ----------------------------------------------------------------

def cmd_eval(args):
    f = _func(args)
    x = _point(args, f)
    _emit({"function": format_function(f), "x": x.tolist(), "value": _json_num(f(x))}, args)
    return EXIT_OK


def cmd_dd(args):
    f = _func(args)
    x, d = _point(args, f), _point(args, f, "dir")
    _emit({"x": x.tolist(), "d": d.tolist(),
           "fprime": _json_num(directional_derivative(f, x, d))}, args)
    return EXIT_OK


def cmd_subdiff(args):
    f = _func(args)
    x = _point(args, f)
    P = subdifferential(f, x)
    _emit({"x": x.tolist(), "vertices": P.as_list(), "outer": P.outer,
           "convex": f.is_convex}, args)
    return EXIT_OK


def cmd_enlarge(args):
    f = _func(args)
    x = _point(args, f)
    region = _region(args, f, required=False) or Box.around(x, 1.0)
    S = eps_enlargement(f, x, args.eps, _grid(args, region))
    if args.format == "csv":
        n = f.dim
        _csv_rows([f"x{i + 1}" for i in range(n)] + ["fx"] + [f"xstar{i + 1}" for i in range(n)],
                  [list(s.x) + [s.fx] + list(s.xstar) for s in S])
    else:
        _emit({"eps": args.eps, "count": len(S), "samples": [s.to_dict() for s in S]}, args)
    return EXIT_OK


def cmd_link(args):
    f = _func(args)
    x, d = _point(args, f), _point(args, f, "dir")
    region = _region(args, f, required=False) or Box.around(x, 1.0)
    sched = _schedule(args.schedule) if args.schedule else DEFAULT_SCHEDULE
    rep = verify_link(f, x, d, sched, _grid(args, region), tol=args.tol or 1e-7)
    _emit(rep.to_dict(), args)
    return EXIT_OK if rep.passed else EXIT_REFUTED


def cmd_ekeland(args):
    f = _func(args)
    x = _point(args, f)
    w = ekeland_point(f, x, args.eps, args.lam)
    _emit(w.to_dict(), args)
    return EXIT_OK if w.check() else EXIT_REFUTED


def cmd_mvi(args):
    f = _func(args)
    x, xbar = _point(args, f, "from_"), _point(args, f)
    lam = args.lam if args.lam is not None else 0.5 * (f(xbar) - f(x))
    w = mean_value_witness(f, x, xbar, lam)
    _emit(w.to_dict(), args)
    return EXIT_OK if w.check() else EXIT_REFUTED


_VERDICT_EXIT = {Verdict.OPTIMAL: EXIT_OK, Verdict.NOT_OPTIMAL: EXIT_REFUTED,
                 Verdict.INCONCLUSIVE: EXIT_INCONCLUSIVE}


def _checkmin(args, test):
    f = _func(args)
    x = _point(args, f)
    region = _region(args, f)
    rep = test(f, region, x, _grid(args, region), tol=args.tol or 1e-7)
    _emit(rep.to_dict(), args)
    return _VERDICT_EXIT[rep.verdict]


def cmd_checkmin_dd(args):
    return _checkmin(args, directional_test)


def cmd_checkmin_sub(args):
    return _checkmin(args, subdiff_test)


def cmd_refute(args):
    f = _func(args)
    x = _point(args, f)
    region = _region(args, f)
    try:
        w = refute_optimality(f, region, x, _grid(args, region), tol=args.tol or 1e-7)
    except IsActuallyOptimal as e:
        _emit({"refuted": False, "message": str(e)}, args)
        return EXIT_OK
    except WitnessNotFound as e:
        _emit({"refuted": False, "message": str(e)}, args)
        return EXIT_INCONCLUSIVE
    _emit({"refuted": True, "witness": w.to_dict()}, args)
    return EXIT_REFUTED


def _dual(args, f, h):
    if args.dual_region:
        return GridSpec(h, parse_box(args.dual_region))
    return default_dual_grid(f, h)


def cmd_polar(args):
    f = _func(args)
    region = _region(args, f)
    grid = _grid(args, region)
    T = sample_subdiff_graph(f, grid)
    polar = polar_samples(T, (primal_candidates(f, grid), _dual(args, f, grid.h).points()),
                          args.tol or 1e-9)
    if args.format == "csv":
        sys.stdout.write(polar.to_csv())
    else:
        _emit({"graph_samples": len(T), "polar_members": len(polar),
               "polar": [[list(x), list(s)] for x, s in polar]}, args)
    return EXIT_OK


def cmd_absorb(args):
    f = _func(args)
    region = _region(args, f)
    grid = _grid(args, region)
    rep = check_absorbing(f, grid, _dual(args, f, grid.h), args.tol or 1e-9)
    _emit(rep.to_dict(), args)
    return EXIT_OK if rep.passed else EXIT_REFUTED


def cmd_maxmono(args):
    f = _func(args)
    region = _region(args, f)
    grid = _grid(args, region)
    ok = check_maximal_monotone(f, grid, _dual(args, f, grid.h), args.tol or 1e-9)
    _emit({"maximal_monotone": ok, "h": grid.h}, args)
    return EXIT_OK if ok else EXIT_REFUTED


def cmd_suite(args):
    cfg = suite_mod.SuiteConfig(seed=args.seed, scale=args.scale)
    if args.grid_h:
        cfg.h = args.grid_h
    if args.tol:
        cfg.tol = args.tol
    if args.schedule:
        cfg.schedule = _schedule(args.schedule)
    only = [int(t) for t in args.only.split(",")] if args.only else None
    log = (lambda line: print(line, file=sys.stderr)) if args.verbose else None
    results = suite_mod.run_suite(cfg, only, log)
    rep = suite_mod.report(results, cfg)
    if args.format == "json":
        print(suite_mod.to_json(rep))
    elif args.format == "csv":
        print("number,name,passed,instances,failures")
        for r in results:
            print(f"{r.number},\"{r.name}\",{r.passed},{r.instances},{r.failures}")
    else:
        for r in results:
            print(r.line())
    return EXIT_OK if rep["pass"] else EXIT_REFUTED


COMMANDS = {
    "eval": (cmd_eval, "evaluate f at a point", ["at"]),
    "dd": (cmd_dd, "directional derivative f'(x; d)", ["at", "dir"]),
    "subdiff": (cmd_subdiff, "vertices of the subdifferential", ["at"]),
    "enlarge": (cmd_enlarge, "samples of the eps-enlarged subdifferential", ["at", "eps"]),
    "link": (cmd_link, "directional derivative against enlarged subdifferentials", ["at", "dir"]),
    "ekeland": (cmd_ekeland, "constructive Ekeland point", ["at", "eps", "lambda"]),
    "mvi": (cmd_mvi, "mean value witness on [from, at]", ["at", "from"]),
    "checkmin-dd": (cmd_checkmin_dd, "optimality test with directional derivatives", ["at"]),
    "checkmin-sub": (cmd_checkmin_sub, "optimality test with subgradients", ["at"]),
    "refute": (cmd_refute, "witness that a point is not minimal", ["at"]),
    "polar": (cmd_polar, "monotone polar of the sampled subdifferential graph", []),
    "absorb": (cmd_absorb, "polar of the sampled graph stays near the graph", []),
    "maxmono": (cmd_maxmono, "sampled maximal monotonicity (convex f)", []),
}


def build_parser() -> argparse.ArgumentParser:
    p = _ArgParser(prog="subdiff-lab", description="Subdifferential toolkit for PL functions.")
    sub = p.add_subparsers(dest="command", parser_class=_ArgParser)
    for name, (_, help_text, required) in COMMANDS.items():
        s = sub.add_parser(name, help=help_text)
        s.add_argument("--func", required=True, help='DSL text or "@file.plf"')
        s.add_argument("--at", required="at" in required)
        s.add_argument("--dir")
        s.add_argument("--from", dest="from_", required="from" in required)
        s.add_argument("--eps", type=float, required="eps" in required)
        s.add_argument("--lambda", dest="lam", type=float, required="lambda" in required)
        s.add_argument("--region", help='e.g. "box(-1,1)"')
        s.add_argument("--dual-region")
        s.add_argument("--grid-h", type=float)
        s.add_argument("--tol", type=float)
        s.add_argument("--schedule", help="comma-separated decreasing eps values")
        s.add_argument("--format", choices=("json", "csv", "text"), default="json")
    s = sub.add_parser("suite", help="seeded property suite")
    s.add_argument("--seed", type=int, default=42)
    s.add_argument("--scale", type=float, default=1.0, help="multiplier on instance counts")
    s.add_argument("--only", help="comma-separated criterion numbers")
    s.add_argument("--grid-h", type=float)
    s.add_argument("--tol", type=float)
    s.add_argument("--schedule")
    s.add_argument("--format", choices=("json", "csv", "text"), default="json")
    s.add_argument("-v", "--verbose", action="store_true")
    return p


def run_command(argv=None) -> int:
    try:
        args = build_parser().parse_args(argv)
        if args.command is None:
            raise UsageError("missing command; see --help")
        if args.command == "suite":
            return cmd_suite(args)
        if args.command in ("dd", "link") and not args.dir:
            raise UsageError(f"{args.command} needs --dir")
        return COMMANDS[args.command][0](args)
    except (UsageError, ValueError, OSError) as e:
        print(f"error: {e}", file=sys.stderr)
        return EXIT_USAGE


def main(argv=None):
    sys.exit(run_command(argv))


if __name__ == "__main__":
    main()
