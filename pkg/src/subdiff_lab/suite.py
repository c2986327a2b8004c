"""Seeded property suite: one runner per acceptance criterion.

Each runner draws its instances from its own PRNG stream (the criterion
number), so criteria can run alone or together with identical results.
``SUBDIFF_LAB_THREADS`` caps the worker processes; results are merged in
instance order either way.
"""

from __future__ import annotations

import datetime as _dt
import json
import os
from concurrent.futures import ProcessPoolExecutor
from dataclasses import asdict, dataclass, field
from typing import Callable, Optional

import numpy as np

from . import parser as dsl
from .calculus import DEFAULT_SCHEDULE, subdiff_contains, verify_link
from .errors import WitnessNotFound
from .instances import random_instance, rng_for
from .monotone import (check_absorbing, check_maximal_monotone, graph_distance_1d,
                       sample_subdiff_graph)
from .optimality import (Verdict, brute_force_is_min, directional_test, minty_sufficient,
                         refute_optimality, subdiff_sufficient, subdiff_test)
from .plfunc import Box, GridSpec, PLFunction, lattice, minimize_on_box
from .variational import ekeland_point, mean_value_witness

SCHEMA = "subdiff-lab-report/1"


@dataclass
class SuiteConfig:
    seed: int = 42
    scale: float = 1.0  # multiplies every instance count
    h: float = 1.0 / 32
    opt_h: float = 1.0 / 64
    tol: float = 1e-7
    schedule: tuple = DEFAULT_SCHEDULE
    threads: int = 0  # 0: read SUBDIFF_LAB_THREADS, default 1

    def count(self, n: int) -> int:
        return max(1, int(round(n * self.scale)))

    def workers(self) -> int:
        if self.threads > 0:
            return self.threads
        try:
            return max(1, int(os.environ.get("SUBDIFF_LAB_THREADS", "1")))
        except ValueError:
            return 1


@dataclass
class CriterionResult:
    number: int
    name: str
    passed: bool
    instances: int
    failures: int
    details: dict = field(default_factory=dict)

    def line(self) -> str:
        status = "PASS" if self.passed else "FAIL"
        extra = ", ".join(f"{k}={_short(v)}" for k, v in self.details.items())
        return (f"[{status}] {self.number:2d} {self.name}: "
                f"{self.instances - self.failures}/{self.instances} ok; {extra}")


def _short(v):
    if isinstance(v, float):
        return f"{v:.3g}"
    return v


def _pmap(fn: Callable, items: list, workers: int) -> list:
    if workers <= 1 or len(items) < 2:
        return [fn(it) for it in items]
    with ProcessPoolExecutor(max_workers=workers) as ex:
        return list(ex.map(fn, items, chunksize=max(1, len(items) // (4 * workers))))


def _instance(seed, stream, index, dim, convex) -> tuple:
    rng = rng_for(seed, stream, index)
    f = random_instance(rng, dim, convex, int(rng.integers(2, 9)))
    return f, rng


def _link_items(cfg: SuiteConfig, stream: int):
    n = cfg.count(100)
    items = [(cfg.seed, stream, i, 1, i % 2 == 0, cfg) for i in range(n)]
    items += [(cfg.seed, stream, n + i, 2, i % 2 == 0, cfg) for i in range(n)]
    return items


def _link_job(item):
    seed, stream, idx, dim, convex, cfg = item
    f, rng = _instance(seed, stream, idx, dim, convex)
    region = Box.cube(-1, 1, dim)
    xbar = rng.uniform(-1, 1, dim)
    d = rng.normal(size=dim)
    d /= np.linalg.norm(d)
    rep = verify_link(f, xbar, d, cfg.schedule, GridSpec(cfg.h, region), tol=cfg.tol)
    empty = sum(1 for row in rep.schedule if row["count"] == 0)
    worst = max(rep.fprime - row["sup"] for row in rep.schedule)
    return {"convex": convex, "empty": empty, "passed": rep.passed, "worst": worst}


def crit_enlargement(cfg: SuiteConfig) -> tuple:
    """Criteria 1 and 2 share their instances."""
    rows = _pmap(_link_job, _link_items(cfg, 1), cfg.workers())
    n = len(rows)
    nonempty_fail = sum(r["empty"] > 0 for r in rows)
    bound_fail = sum(not r["passed"] for r in rows)
    c1 = CriterionResult(1, "enlargement nonempty for every eps", nonempty_fail == 0, n,
                         nonempty_fail, {"eps_values": len(cfg.schedule)})
    c2 = CriterionResult(2, "f'(x;d) <= sup over enlargement + tol", bound_fail == 0, n,
                         bound_fail, {"max_excess": max(r["worst"] for r in rows)})
    return c1, c2


def _convex_job(item):
    seed, idx, dim, cfg, check_halving = item
    f, rng = _instance(seed, 3, idx, dim, True)
    region = Box.cube(-1, 1, dim)
    xbar = rng.uniform(-1, 1, dim)
    d = rng.normal(size=dim)
    d /= np.linalg.norm(d)
    grid = GridSpec(cfg.h, region)
    gap = verify_link(f, xbar, d, cfg.schedule, grid, tol=cfg.tol).convex_equal
    bound = 1e-6 + 2 * grid.h * f.lipschitz
    out = {"gap": gap, "ok": gap <= bound, "halves": True}
    if check_halving:
        gap2 = verify_link(f, xbar, d, cfg.schedule, grid.refined(), tol=cfg.tol).convex_equal
        out["halves"] = gap2 <= gap / 2 + 1e-12  # floor for rounding noise
    return out


def crit_convex_equality(cfg: SuiteConfig) -> CriterionResult:
    n = cfg.count(100)
    n_half = min(n, cfg.count(20))
    items = [(cfg.seed, i, 1 + i % 2, cfg, i < n_half) for i in range(n)]
    rows = _pmap(_convex_job, items, cfg.workers())
    fails = sum(not (r["ok"] and r["halves"]) for r in rows)
    return CriterionResult(3, "convex equality at eps_min", fails == 0, n, fails, {
        "max_gap": max(r["gap"] for r in rows),
        "halving_checked": n_half,
        "halving_failures": sum(not r["halves"] for r in rows)})


def _mvi_job(item):
    seed, idx = item
    dim = 1 + idx % 2
    f, rng = _instance(seed, 4, idx, dim, idx % 3 == 0)
    while True:
        x, xbar = rng.uniform(-1, 1, (2, dim))
        fx, fb = f(x), f(xbar)
        if fx > fb:
            x, xbar, fx, fb = xbar, x, fb, fx
        if fb > fx:
            break
    lam = float(rng.uniform(0, 1)) * (fb - fx)
    w = mean_value_witness(f, x, xbar, lam)
    return {"ok": w.check(1e-9),
            "slope": w.slope_residual, "value": w.value_residual}


def crit_mean_value(cfg: SuiteConfig) -> CriterionResult:
    n = cfg.count(500)
    rows = _pmap(_mvi_job, [(cfg.seed, i) for i in range(n)], cfg.workers())
    fails = sum(not r["ok"] for r in rows)
    return CriterionResult(4, "mean value witness", fails == 0, n, fails, {
        "max_slope_residual": max(r["slope"] for r in rows),
        "max_value_residual": max(r["value"] for r in rows)})


def _ekeland_job(item):
    seed, idx = item
    dim = 1 + idx % 2
    f, rng = _instance(seed, 5, idx, dim, idx % 2 == 0)
    xbar = rng.uniform(-1, 1, dim)
    lam = float(rng.uniform(0.05, 0.5))
    ball = Box.around(xbar, lam).intersect(f.domain)
    _, inf_ball = minimize_on_box(f, ball)
    eps = max(f(xbar) - inf_ball, 0.0) + float(rng.uniform(0.01, 0.5))
    w = ekeland_point(f, xbar, eps, lam)
    return {"ok": w.check(1e-9), "gap": w.perturbed_min_gap}


def crit_ekeland(cfg: SuiteConfig) -> CriterionResult:
    n = cfg.count(200)
    rows = _pmap(_ekeland_job, [(cfg.seed, i) for i in range(n)], cfg.workers())
    fails = sum(not r["ok"] for r in rows)
    return CriterionResult(5, "Ekeland point re-verification", fails == 0, n, fails,
                           {"max_residual": max(r["gap"] for r in rows)})


def _pick_xbar(f: PLFunction, region: Box, rng, grid: GridSpec, interior: bool):
    """Half the time the brute-force minimizer, otherwise a random lattice point."""
    Y = lattice(region, grid.h)
    if interior:
        Y = Y[region.contains_interior(Y)]
    if rng.uniform() < 0.5:
        x, _ = minimize_on_box(f, region, grid)
        if not interior or region.contains_interior(x[None, :])[0]:
            return x
    return Y[int(rng.integers(len(Y)))]


def _verify_refutation(f, U, xbar, w, tol) -> bool:
    y, ys = np.array(w.y_eps), np.array(w.ystar_eps)
    fbar = f(xbar)
    return bool(f(y) < fbar - tol and ys @ (xbar - y) > tol
                and U.contains_interior(y[None, :])[0] and f.in_interior(y)
                and subdiff_contains(f, y, ys, tol=1e-9))


def _opt_job(item):
    seed, idx, cfg = item
    dim = 1 + idx % 2
    f, rng = _instance(seed, 6, idx, dim, idx % 3 == 0)
    region = Box.cube(-1, 1, dim)
    grid = GridSpec(cfg.opt_h, region)
    out = {}
    # closed set, directional derivatives
    xbar = _pick_xbar(f, region, rng, grid, interior=False)
    brute = brute_force_is_min(f, region, xbar, grid, cfg.tol)
    rep = directional_test(f, region, xbar, grid, cfg.tol)
    out["dd"] = (rep.verdict.value, brute)
    out["minty_bad"] = minty_sufficient(f, region, xbar, grid, cfg.tol) and not brute
    # open set, subgradients
    xbar = _pick_xbar(f, region, rng, grid, interior=True)
    brute = brute_force_is_min(f, region, xbar, grid, cfg.tol)
    rep = subdiff_test(f, region, xbar, grid, cfg.tol)
    out["sub"] = (rep.verdict.value, brute)
    out["sub_bad"] = subdiff_sufficient(f, region, xbar, grid, cfg.tol) and not brute
    out["refute"] = None
    if not brute:
        try:
            w = refute_optimality(f, region, xbar, grid, cfg.tol)
            out["refute"] = _verify_refutation(f, region, xbar, w, cfg.tol)
        except WitnessNotFound:
            out["refute"] = False
    return out


def _agreement(number, name, pairs) -> CriterionResult:
    conclusive = [(v, b) for v, b in pairs if v != Verdict.INCONCLUSIVE.value]
    agree = sum((v == Verdict.OPTIMAL.value) == b for v, b in conclusive)
    inconclusive = len(pairs) - len(conclusive)
    rate = inconclusive / len(pairs)
    passed = agree == len(conclusive) and rate < 0.02
    return CriterionResult(number, name, passed, len(pairs), len(conclusive) - agree, {
        "conclusive": len(conclusive), "inconclusive": inconclusive,
        "optimal": sum(b for _, b in pairs)})


def crit_optimality(cfg: SuiteConfig) -> tuple:
    """Criteria 6 to 9 share their instances."""
    n = cfg.count(300)
    rows = _pmap(_opt_job, [(cfg.seed, i, cfg) for i in range(n)], cfg.workers())
    c6 = _agreement(6, "directional test agrees with brute force", [r["dd"] for r in rows])
    c7 = _agreement(7, "subdifferential test agrees with brute force", [r["sub"] for r in rows])
    bad = sum(r["minty_bad"] + r["sub_bad"] for r in rows)
    c8 = CriterionResult(8, "sufficient conditions are sound", bad == 0, 2 * n, bad, {})
    ref = [r["refute"] for r in rows if r["refute"] is not None]
    ref_fail = sum(not ok for ok in ref)
    c9 = CriterionResult(9, "refutation witnesses verified", ref_fail == 0, len(ref), ref_fail, {})
    return c6, c7, c8, c9


def _absorb_job(item):
    seed, idx, convex, cfg, scaling = item
    f, _ = _instance(seed, 10, idx, 1, convex)
    grid = GridSpec(cfg.h, Box.cube(-1, 1, 1))
    rep = check_absorbing(f, grid)
    out = {"ok": rep.passed, "dist": rep.max_violation_distance, "members": rep.polar_members,
           "scales": True}
    if scaling:
        fine = check_absorbing(f, grid.refined())
        out["scales"] = fine.passed
    return out


def crit_absorbing(cfg: SuiteConfig) -> CriterionResult:
    nc, nn = cfg.count(100), cfg.count(50)
    ns = cfg.count(10)
    items = [(cfg.seed, i, True, cfg, i < ns) for i in range(nc)]
    items += [(cfg.seed, nc + i, False, cfg, False) for i in range(nn)]
    rows = _pmap(_absorb_job, items, cfg.workers())
    fails = sum(not (r["ok"] and r["scales"]) for r in rows)
    return CriterionResult(10, "polar members within 2hL of the graph", fails == 0, len(rows),
                           fails, {"max_distance": max(r["dist"] for r in rows),
                                   "scaling_checked": ns})


def _maxmono_job(item):
    seed, idx, cfg, n_pairs = item
    f, rng = _instance(seed, 11, idx, 1, True)
    region = Box.cube(-1, 1, 1)
    grid = GridSpec(cfg.h, region)
    ok = check_maximal_monotone(f, grid)
    T = sample_subdiff_graph(f, grid)
    G = f.gradients()
    lo, hi = G.min() - 1, G.max() + 1
    thresh = 10 * 1e-9 + 2 * grid.h * f.lipschitz
    xs, ss = np.empty(0), np.empty(0)
    while len(xs) < n_pairs:
        x = rng.uniform(-1, 1, 4 * n_pairs)
        s = rng.uniform(lo, hi, 4 * n_pairs)
        far = graph_distance_1d(f, region, x, s) > thresh
        xs, ss = np.concatenate([xs, x[far]]), np.concatenate([ss, s[far]])
    xs, ss = xs[:n_pairs], ss[:n_pairs]
    prods = (T.xstars[None, :, 0] - ss[:, None]) * (T.xs[None, :, 0] - xs[:, None])
    related = np.all(prods >= -1e-9, axis=1)
    return {"ok": ok and not related.any(), "maximal": ok, "related": int(related.sum())}


def crit_maximal(cfg: SuiteConfig) -> CriterionResult:
    n = cfg.count(50)
    rows = _pmap(_maxmono_job, [(cfg.seed, i, cfg, 1000) for i in range(n)], cfg.workers())
    fails = sum(not r["ok"] for r in rows)
    return CriterionResult(11, "maximal monotone with off-graph pairs rejected", fails == 0, n,
                           fails, {"off_graph_pairs": 1000 * n,
                                   "related_off_graph": sum(r["related"] for r in rows)})


def random_ast(rng, dim: int, depth: int = 3) -> "dsl.Expr":
    """Random expression respecting the DSL rules (negation only on affine parts)."""
    def affine():
        terms = [dsl.Scale(float(rng.integers(-32, 33)) / 8, dsl.Var(i + 1)) for i in range(dim)]
        return dsl.Sum(tuple(terms) + (dsl.Const(float(rng.integers(-32, 33)) / 8),))

    def build(level):
        if level == 0:
            return affine() if rng.uniform() < 0.7 else dsl.Abs(affine())
        kind = rng.choice(["max", "min", "sum", "scale", "leaf"])
        if kind == "leaf":
            return build(0)
        if kind == "scale":
            return dsl.Scale(float(rng.integers(1, 17)) / 4, build(level - 1))
        args = tuple(build(level - 1) for _ in range(int(rng.integers(2, 4))))
        if kind == "sum":
            return dsl.Sum(args[:2])
        return (dsl.Max if kind == "max" else dsl.Min)(args)

    return build(depth)


PARSER_ERRORS = (
    ("x * y", "NonlinearityError"),
    ("-max(x, 1)", "NegativeScaleError"),
    ("max(x,\n  1))", "ParseError"),
)


def _parser_job(item):
    seed, idx = item
    rng = rng_for(seed, 12, idx)
    dim = 1 + idx % 3
    ast = dsl.FunctionAST(random_ast(rng, dim), None, dim)
    text = dsl.unparse(ast)
    reparsed = dsl.parse(text)
    f = dsl.normalize(reparsed)
    P = rng.uniform(-2, 2, (1000, dim))
    direct = np.array([dsl.evaluate_ast(ast, p) for p in P])
    sound = np.max(np.abs(f.values(P) - direct)) <= 1e-12 * (1 + np.max(np.abs(direct)))
    g = dsl.parse_function(dsl.format_function(f))
    roundtrip = bool(np.array_equal(g.values(P), f.values(P)))
    return {"ok": bool(sound and roundtrip), "pieces": f.n_pieces}


def crit_parser(cfg: SuiteConfig) -> CriterionResult:
    n = cfg.count(100)
    rows = _pmap(_parser_job, [(cfg.seed, i) for i in range(n)], cfg.workers())
    diag_ok = 0
    for text, expected in PARSER_ERRORS:
        try:
            dsl.parse(text)
        except dsl.ParseError as e:
            diag_ok += type(e).__name__ == expected and e.line is not None
    fails = sum(not r["ok"] for r in rows) + (len(PARSER_ERRORS) - diag_ok)
    return CriterionResult(12, "parser round trip and diagnostics", fails == 0,
                           n + len(PARSER_ERRORS), fails,
                           {"max_pieces": max(r["pieces"] for r in rows)})


RUNNERS = (crit_enlargement, crit_convex_equality, crit_mean_value, crit_ekeland,
           crit_optimality, crit_absorbing, crit_maximal, crit_parser)


def run_suite(cfg: Optional[SuiteConfig] = None, only=None, log=None) -> list:
    """Run all criteria (or the numbers in ``only``); returns results sorted by number."""
    cfg = cfg or SuiteConfig()
    wanted = set(only) if only else set(range(1, 13))
    owners = {crit_enlargement: {1, 2}, crit_convex_equality: {3}, crit_mean_value: {4},
              crit_ekeland: {5}, crit_optimality: {6, 7, 8, 9}, crit_absorbing: {10},
              crit_maximal: {11}, crit_parser: {12}}
    results = []
    for runner in RUNNERS:
        if not owners[runner] & wanted:
            continue
        out = runner(cfg)
        for r in (out if isinstance(out, tuple) else (out,)):
            if r.number in wanted:
                results.append(r)
                if log:
                    log(r.line())
    return sorted(results, key=lambda r: r.number)


def report(results: list, cfg: SuiteConfig, timestamp: Optional[str] = None) -> dict:
    conf = asdict(cfg)
    conf["schedule"] = list(cfg.schedule)
    conf.pop("threads")
    return {
        "schema": SCHEMA,
        "timestamp": timestamp or _dt.datetime.now(_dt.timezone.utc).isoformat(),
        "config": conf,
        "criteria": [asdict(r) for r in results],
        "pass": all(r.passed for r in results),
    }


def to_json(rep: dict) -> str:
    return json.dumps(rep, indent=2, sort_keys=True, default=_default)


def _default(v):
    if isinstance(v, (np.floating, np.integer)):
        return v.item()
    if isinstance(v, np.bool_):
        return bool(v)
    raise TypeError(f"not serializable: {type(v).__name__}")
