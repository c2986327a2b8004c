"""First-order optimality tests on a box, with brute-force cross-checks.

Two tests decide whether ``xbar`` minimizes ``f`` over a convex box by
looking for a point ``y`` that is lower than ``xbar`` and from which ``xbar``
is reached in an ascent direction:

* :func:`directional_test` uses ``f'(y; xbar - y) > 0``;
* :func:`subdiff_test` uses ``sup <subdifferential(f, y), xbar - y> > 0`` on
  the open box.

Candidates ``y`` are the lattice points of the region. When the lattice has
lower points but none of them qualifies, the mean value construction along
``[y, xbar]`` supplies the qualifying point that must exist between them.
"""

from __future__ import annotations

import enum
import math
from dataclasses import dataclass, field
from typing import Optional

import numpy as np

from .calculus import directional_derivatives, support_many, _json_num
from .errors import BoundaryPoint, DomainError, IsActuallyOptimal, WitnessNotFound
from .plfunc import Box, GridSpec, PLFunction, as_point, lattice, minimize_on_box
from .variational import find_enlarged_subgradient, mean_value_witness

VERDICT_TOL = 1e-7
#: extra lattice points handed to the mean value construction
MVI_CANDIDATES = 16


class Verdict(str, enum.Enum):
    OPTIMAL = "OptimalCertified"
    NOT_OPTIMAL = "NotOptimal"
    INCONCLUSIVE = "Inconclusive"


@dataclass(frozen=True)
class Violation:
    y: tuple
    fy: float
    evidence: float

    def to_dict(self) -> dict:
        return {"y": list(self.y), "fy": self.fy, "evidence": _json_num(self.evidence)}


@dataclass
class TestReport:
    verdict: Verdict
    checked_points: int
    violations: list = field(default_factory=list)
    check: str = ""
    f_xbar: float = math.nan
    brute_min: Optional[float] = None
    best_margin: float = -math.inf

    __test__ = False  # not a pytest class

    def to_dict(self, max_listed: int = 50) -> dict:
        return {
            "check": self.check,
            "verdict": self.verdict.value,
            "checked_points": self.checked_points,
            "n_violations": len(self.violations),
            "violations": [v.to_dict() for v in self.violations[:max_listed]],
            "f_xbar": self.f_xbar,
            "brute_min": self.brute_min,
            "best_margin": _json_num(self.best_margin),
        }


@dataclass(frozen=True)
class RefutationWitness:
    y_eps: tuple
    ystar_eps: tuple
    f_yeps: float
    inner: float
    f_xbar: float
    x: tuple
    x0: tuple
    t0: float
    lam: float
    eps: float

    def to_dict(self) -> dict:
        return {
            "y_eps": list(self.y_eps), "ystar_eps": list(self.ystar_eps),
            "f_yeps": self.f_yeps, "inner": self.inner, "f_xbar": self.f_xbar,
            "x": list(self.x), "x0": list(self.x0), "t0": self.t0,
            "lambda": self.lam, "eps": self.eps,
        }


def _grid(region: Box, grid: Optional[GridSpec]) -> GridSpec:
    return grid if grid is not None else GridSpec.default(region)


def _feasible(f: PLFunction, region: Box) -> Box:
    box = region.intersect(f.domain)
    if box is None:
        raise DomainError("region does not meet dom f")
    return box


def _open_set_mask(f: PLFunction, region: Box, Y) -> np.ndarray:
    return region.contains_interior(Y) & f.in_interior(Y)


def brute_force_is_min(f: PLFunction, region: Box, xbar, grid: Optional[GridSpec] = None,
                       tol: float = VERDICT_TOL) -> bool:
    """``min over region >= f(xbar) - tol`` by the brute-force box minimizer."""
    xbar = as_point(xbar, f.dim)
    if not region.contains(xbar):
        raise DomainError("xbar is outside the region")
    fbar = f(xbar)
    if not math.isfinite(fbar):
        raise DomainError("xbar is not in dom f")
    _, value = minimize_on_box(f, region, _grid(region, grid))
    return value >= fbar - tol


def _pull_inside(f: PLFunction, region: Box, x, xbar, fbar, tol):
    """Move a boundary point toward ``xbar`` until it is interior and still lower."""
    if _open_set_mask(f, region, x[None, :])[0]:
        return x
    for s in 2.0 ** -np.arange(10, 0, -1):
        xs = x + s * (xbar - x)
        if _open_set_mask(f, region, xs[None, :])[0] and f(xs) < fbar - tol:
            return xs
    return None


def _sweep(f, region, xbar, grid, evidence_fn, open_set, tol):
    """Candidate points, their values and evidence, and the brute-force minimum."""
    box = _feasible(f, region)
    Y = lattice(box, grid.h)
    if open_set:
        Y = Y[_open_set_mask(f, region, Y)]
    fbar = f(xbar)
    fy = f.values(Y)
    ev = evidence_fn(Y, xbar - Y)
    lower = fy < fbar - tol
    x_min, brute = minimize_on_box(f, region, grid)
    if not np.any(lower & (ev > tol)) and brute < fbar - tol:
        seeds = [Y[i] for i in np.flatnonzero(lower)[np.argsort(fy[lower], kind="stable")]]
        seeds = seeds[:MVI_CANDIDATES]
        xm = _pull_inside(f, region, x_min, xbar, fbar, tol) if open_set else x_min
        if xm is not None:
            seeds.insert(0, xm)
        extra = []
        for x in seeds:
            w = mean_value_witness(f, x, xbar, 0.5 * (fbar - f(x)))
            extra.append(np.array(w.x0))
        if extra:
            E = np.array(extra)
            Y = np.vstack([Y, E])
            fy = np.concatenate([fy, f.values(E)])
            ev = np.concatenate([ev, evidence_fn(E, xbar - E)])
    return Y, fy, ev, brute


def _report(f, region, xbar, grid, evidence_fn, open_set, tol, check) -> TestReport:
    xbar = as_point(xbar, f.dim)
    grid = _grid(region, grid)
    Y, fy, ev, brute = _sweep(f, region, xbar, grid, evidence_fn, open_set, tol)
    fbar = f(xbar)
    margin = np.minimum(fbar - fy, ev)
    viol = np.flatnonzero(margin > tol)
    violations = [Violation(tuple(map(float, Y[i])), float(fy[i]), float(ev[i])) for i in viol]
    best = float(margin.max()) if len(margin) else -math.inf
    if best > 10 * tol:
        verdict = Verdict.NOT_OPTIMAL
    elif violations:
        verdict = Verdict.INCONCLUSIVE  # close call near the threshold
    elif brute >= fbar - tol:
        verdict = Verdict.OPTIMAL
    else:
        verdict = Verdict.INCONCLUSIVE
    return TestReport(verdict=verdict, checked_points=len(Y), violations=violations,
                      check=check, f_xbar=fbar, brute_min=brute, best_margin=best)


def _check_closed(f, region, xbar):
    if not region.contains(xbar) or not f.in_domain(xbar):
        raise DomainError("xbar must lie in the region and in dom f")


def _check_open(f, region, xbar):
    if not _open_set_mask(f, region, xbar[None, :])[0]:
        raise BoundaryPoint("xbar must lie in the interior of the region and of dom f")


def _dd_evidence(f):
    return lambda Y, D: directional_derivatives(f, Y, D)


def _sub_evidence(f):
    return lambda Y, D: support_many(f, Y, D)


def directional_test(f: PLFunction, C: Box, xbar, grid: Optional[GridSpec] = None,
                     tol: float = VERDICT_TOL) -> TestReport:
    """Minimality of ``xbar`` on ``C`` via ``f'(y; xbar - y) > 0`` at lower points."""
    xbar = as_point(xbar, f.dim)
    _check_closed(f, C, xbar)
    return _report(f, C, xbar, grid, _dd_evidence(f), False, tol,
                   "directional-derivative test")


def subdiff_test(f: PLFunction, U: Box, xbar, grid: Optional[GridSpec] = None,
                 tol: float = VERDICT_TOL) -> TestReport:
    """Minimality of ``xbar`` on the open box ``int U`` via subgradient pairings."""
    xbar = as_point(xbar, f.dim)
    _check_open(f, U, xbar)
    return _report(f, U, xbar, grid, _sub_evidence(f), True, tol,
                   "subdifferential test")


def _sufficient(f, region, xbar, grid, evidence_fn, open_set, tol) -> bool:
    Y, _, ev, _ = _sweep(f, region, xbar, _grid(region, grid), evidence_fn, open_set, tol)
    return bool(np.all(ev <= tol))


def minty_sufficient(f: PLFunction, C: Box, xbar, grid: Optional[GridSpec] = None,
                     tol: float = VERDICT_TOL) -> bool:
    """``f'(y; xbar - y) <= tol`` at every candidate ``y``; then ``xbar`` minimizes."""
    xbar = as_point(xbar, f.dim)
    _check_closed(f, C, xbar)
    return _sufficient(f, C, xbar, grid, _dd_evidence(f), False, tol)


def subdiff_sufficient(f: PLFunction, U: Box, xbar, grid: Optional[GridSpec] = None,
                       tol: float = VERDICT_TOL) -> bool:
    """``sup <subdifferential(f, y), xbar - y> <= tol`` at every interior candidate."""
    xbar = as_point(xbar, f.dim)
    _check_open(f, U, xbar)
    return _sufficient(f, U, xbar, grid, _sub_evidence(f), True, tol)


def refute_optimality(f: PLFunction, U: Box, xbar, grid: Optional[GridSpec] = None,
                      tol: float = VERDICT_TOL, retries: int = 3) -> RefutationWitness:
    """Subgradient pair ``(y, y*)`` with ``f(y) < f(xbar)`` and ``<y*, xbar - y> > 0``.

    Steps: a lower point ``x`` from the brute-force minimizer; the mean value
    point ``x0`` on ``[x, xbar[`` with ``lam = (f(xbar) - f(x))/2``; a radius
    ``eps`` with ``B(x0, eps)`` inside ``U``, ``f(x0) + eps < f(xbar)`` and
    ``f'(x0; xbar - x0) > eps``; finally a member of the enlarged
    subdifferential at ``x0`` with pairing at least ``eps`` along ``xbar - x0``.
    """
    xbar = as_point(xbar, f.dim)
    _check_open(f, U, xbar)
    grid = _grid(U, grid)
    fbar = f(xbar)
    x_min, value = minimize_on_box(f, U, grid)
    if value >= fbar - tol:
        raise IsActuallyOptimal(f"xbar is minimal on the region (min {value}, f(xbar) {fbar})")
    x = _pull_inside(f, U, x_min, xbar, fbar, tol)
    if x is None:
        raise WitnessNotFound("no interior point below f(xbar) near the minimizer")
    lam = 0.5 * (fbar - f(x))
    mvi = mean_value_witness(f, x, xbar, lam)
    x0 = np.array(mvi.x0)
    d = xbar - x0
    dd0 = float(directional_derivatives(f, x0, d)[0])
    box = _feasible(f, U)
    room = float(min(np.min(x0 - box.lo), np.min(box.hi - x0)))
    eps = 0.9 * min(room, fbar - mvi.f_x0, dd0)
    if not eps > tol:
        raise WitnessNotFound(f"degenerate refutation radius eps = {eps}")
    h = min(grid.h, eps)
    for _ in range(retries + 1):
        sub_grid = GridSpec(h, box)
        try:
            s = find_enlarged_subgradient(f, x0, d, eps, eps, sub_grid, prefer_toward=xbar)
        except WitnessNotFound:
            h /= 2
            continue
        y, ystar = np.array(s.x), np.array(s.xstar)
        inner = float(ystar @ (xbar - y))
        if s.fx < fbar - tol and inner > tol and _open_set_mask(f, U, y[None, :])[0]:
            return RefutationWitness(
                y_eps=s.x, ystar_eps=s.xstar, f_yeps=s.fx, inner=inner, f_xbar=fbar,
                x=tuple(map(float, x)), x0=mvi.x0, t0=mvi.t0, lam=lam, eps=eps)
        h /= 2
    raise WitnessNotFound("no refutation witness at the finest grid tried")
