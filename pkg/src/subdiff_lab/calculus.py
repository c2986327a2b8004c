"""Directional derivatives, subdifferentials and the enlarged subdifferential.

Subdifferentials are returned as V-represented polytopes. For a convex
(single component) function this is the usual convex subdifferential, the
hull of the active gradients. For nonconvex functions the Clarke
subdifferential is used: exact in 1D (the interval between the one-sided
slopes) and, in 2D/3D, the hull of every gradient active in an active
component. The latter contains the Clarke set and is labelled ``outer``.
"""

from __future__ import annotations

import itertools
import math
from dataclasses import dataclass, field
from collections.abc import Sequence
from typing import Optional, Union

import numpy as np
from scipy.spatial import ConvexHull, QhullError

from .errors import BoundaryPoint, DomainError, EmptyEnlargement
from .plfunc import (
    PLFunction,
    GridSpec,
    Box,
    active_tol,
    as_point,
    centered_lattice,
    restrict_to_segment,
)

DEFAULT_SCHEDULE = tuple(2.0 ** -k for k in range(7))  # 1, 1/2, ..., 1/64
LINK_TOL = 1e-7


def _extreme_points(V: np.ndarray) -> np.ndarray:
    V = np.unique(V, axis=0)
    if len(V) <= 2:
        return V
    c = V.mean(axis=0)
    _, s, vt = np.linalg.svd(V - c)
    rank = int(np.sum(s > 1e-12 * max(1.0, s[0])))
    if rank == 0:
        return V[:1]
    Y = (V - c) @ vt[:rank].T
    if rank == 1:
        idx = [int(np.argmin(Y[:, 0])), int(np.argmax(Y[:, 0]))]
    else:
        try:
            idx = ConvexHull(Y).vertices
        except QhullError:
            idx = ConvexHull(Y, qhull_options="QJ").vertices
    out = V[np.unique(idx)]
    return out[np.lexsort(out.T[::-1])]


def _project_onto_hull(V: np.ndarray, p: np.ndarray) -> np.ndarray:
    """Euclidean projection of ``p`` onto ``conv(V)`` by active-face enumeration."""
    n = V.shape[1]
    if len(V) == 1:
        return V[0].copy()
    if n == 1:
        return np.clip(p, V.min(axis=0), V.max(axis=0))
    best, best_d = None, math.inf
    for size in range(1, min(len(V), n + 1) + 1):
        for S in itertools.combinations(range(len(V)), size):
            W = V[list(S)]
            if size == 1:
                q = W[0]
            else:
                # minimize |W^T lam - p| subject to sum(lam) = 1
                A = W[1:] - W[0]
                coef, *_ = np.linalg.lstsq(A.T, p - W[0], rcond=None)
                lam = np.concatenate([[1.0 - coef.sum()], coef])
                if np.any(lam < -1e-12):
                    continue
                q = W[0] + A.T @ coef
            d = float(np.linalg.norm(q - p))
            if d < best_d:
                best, best_d = q, d
    return best


@dataclass(frozen=True)
class Polytope:
    """Convex hull of finitely many dual vectors (V-representation).

    ``outer`` marks an outer approximation of the intended set.
    """

    vertices: np.ndarray
    outer: bool = False

    def __post_init__(self):
        V = np.atleast_2d(np.asarray(self.vertices, dtype=float))
        if V.size == 0:
            raise ValueError("a polytope needs at least one vertex")
        V = np.unique(V, axis=0)
        V.setflags(write=False)
        object.__setattr__(self, "vertices", V)

    @property
    def dim(self) -> int:
        return self.vertices.shape[1]

    def canonical(self) -> "Polytope":
        """Same set, with only the extreme points (sorted)."""
        return Polytope(_extreme_points(self.vertices), self.outer)

    def support(self, d) -> float:
        return float(np.max(self.vertices @ as_point(d, self.dim)))

    def project(self, p) -> np.ndarray:
        return _project_onto_hull(self.canonical().vertices, as_point(p, self.dim))

    def distance(self, p) -> float:
        p = as_point(p, self.dim)
        return float(np.linalg.norm(self.project(p) - p))

    def contains(self, p, tol: float = 1e-9) -> bool:
        return self.distance(p) <= tol

    def translate(self, v) -> "Polytope":
        return Polytope(self.vertices + as_point(v, self.dim), self.outer)

    def scale(self, c: float) -> "Polytope":
        return Polytope(self.vertices * c, self.outer)

    def as_list(self) -> list:
        return [list(map(float, v)) for v in self.vertices]


@dataclass(frozen=True)
class SubgradientSample:
    x: tuple
    fx: float
    xstar: tuple

    def to_dict(self) -> dict:
        return {"x": list(self.x), "fx": self.fx, "xstar": list(self.xstar)}


@dataclass(frozen=True)
class SampleSet(Sequence):
    """Samples ``(x, f(x), x*)`` stored column-wise; indexes as :class:`SubgradientSample`."""

    xs: np.ndarray
    fx: np.ndarray
    xstars: np.ndarray

    def __len__(self):
        return len(self.fx)

    def __getitem__(self, i):
        if isinstance(i, slice):
            return SampleSet(self.xs[i], self.fx[i], self.xstars[i])
        return SubgradientSample(tuple(map(float, self.xs[i])), float(self.fx[i]),
                                 tuple(map(float, self.xstars[i])))

    def pairings(self, d) -> np.ndarray:
        return self.xstars @ as_point(d, self.xstars.shape[1])

    def contains_sample(self, sample: SubgradientSample, atol: float = 0.0) -> bool:
        hit = (np.all(np.abs(self.xs - sample.x) <= atol, axis=1)
               & np.all(np.abs(self.xstars - sample.xstar) <= atol, axis=1))
        return bool(hit.any())


# -- vectorized local structure ------------------------------------------------

def active_structure(f: PLFunction, X):
    """Values, component activity ``(N, K)`` and piece activity ``(N, P)`` at rows of ``X``."""
    V = f.piece_values(X)
    M = f.component_values(V)
    fx = M.min(axis=1)
    comp_active = M - fx[:, None] <= active_tol(fx)[:, None]
    Mp = M[:, f._comp_index]
    piece_active = comp_active[:, f._comp_index] & (Mp - V <= active_tol(Mp))
    return fx, comp_active, piece_active


def _masked_minmax(f: PLFunction, S, piece_active, comp_active):
    """``min`` over active components of ``max`` over their active pieces of ``S``."""
    inner = f.component_values(np.where(piece_active, S, -np.inf))
    return np.where(comp_active, inner, np.inf).min(axis=1)


def _one_sided_slopes_1d(f: PLFunction, X):
    _, comp_active, piece_active = active_structure(f, X)
    a = np.broadcast_to(f._gradients[:, 0], piece_active.shape)
    right = _masked_minmax(f, a, piece_active, comp_active)
    left = -_masked_minmax(f, -a, piece_active, comp_active)
    return left, right


def _outward(f: PLFunction, X, D) -> np.ndarray:
    if f.domain is None:
        return np.zeros(len(X), dtype=bool)
    s = f.domain.slack()
    at_hi = X >= f.domain.hi - s
    at_lo = X <= f.domain.lo + s
    return np.any((at_hi & (D > 0)) | (at_lo & (D < 0)), axis=1)


def directional_derivatives(f: PLFunction, X, D) -> np.ndarray:
    """Active-set formula ``min_{active k} max_{active i in k} <a_i, d>`` row-wise.

    Rows where ``x + t d`` leaves the domain for all small ``t > 0`` get ``+inf``.
    """
    X = np.atleast_2d(np.asarray(X, dtype=float))
    D = np.atleast_2d(np.asarray(D, dtype=float))
    D = np.broadcast_to(D, X.shape)
    if not np.all(f.values(X) < math.inf):
        raise DomainError("directional derivative requested outside dom f")
    _, comp_active, piece_active = active_structure(f, X)
    S = np.einsum("nd,pd->np", D, f._gradients)
    dd = _masked_minmax(f, S, piece_active, comp_active)
    dd = np.where(_outward(f, X, D), math.inf, dd)
    return np.where(np.all(D == 0, axis=1), 0.0, dd)


def directional_derivative(f: PLFunction, xbar, d) -> float:
    """Lower Dini derivative ``f'(xbar; d)``, exact for PL functions.

    It is the slope of the first affine piece of the profile of ``f`` along
    ``xbar + t d``; ``+inf`` when that ray leaves ``dom f`` immediately.
    """
    x = as_point(xbar, f.dim)
    d = as_point(d, f.dim)
    if not f.in_domain(x):
        raise DomainError("xbar is not in dom f")
    norm = float(np.linalg.norm(d))
    if norm == 0.0:
        return 0.0
    prof = restrict_to_segment(f, x, x + d / norm)
    slope = prof.right_slope(0.0)
    return slope * norm if math.isfinite(slope) else math.inf


def subgradient_pairs(f: PLFunction, X):
    """Row index and vertex for every subdifferential vertex at the rows of ``X``.

    Rows are expected to be interior points of ``dom f``; pairs come out
    grouped by row in increasing row order.
    """
    X = np.atleast_2d(np.asarray(X, dtype=float))
    if f.dim == 1 and not f.is_convex:
        left, right = _one_sided_slopes_1d(f, X)
        lo, hi = np.minimum(left, right), np.maximum(left, right)
        rows = np.repeat(np.arange(len(X)), 2)
        vals = np.stack([lo, hi], axis=1).ravel()
        keep = np.ones(len(rows), dtype=bool)
        keep[1::2] = hi != lo
        return rows[keep], vals[keep][:, None]
    _, _, piece_active = active_structure(f, X)
    rows, pieces = np.nonzero(piece_active)
    return rows, f._gradients[pieces]


def support_many(f: PLFunction, X, D) -> np.ndarray:
    """``sup <subdifferential(f, x), d>`` row-wise (interior points)."""
    X = np.atleast_2d(np.asarray(X, dtype=float))
    D = np.broadcast_to(np.atleast_2d(np.asarray(D, dtype=float)), X.shape)
    if f.dim == 1 and not f.is_convex:
        left, right = _one_sided_slopes_1d(f, X)
        return np.maximum(left * D[:, 0], right * D[:, 0])
    _, _, piece_active = active_structure(f, X)
    S = np.einsum("nd,pd->np", D, f._gradients)
    return np.where(piece_active, S, -np.inf).max(axis=1)


def _check_interior(f: PLFunction, x: np.ndarray):
    if not f.in_domain(x):
        raise DomainError("point is not in dom f")
    if not f.in_interior(x[None, :])[0]:
        raise BoundaryPoint("subdifferential requested on the boundary of dom f")


def subdifferential(f: PLFunction, x) -> Polytope:
    """Subdifferential of ``f`` at an interior point ``x`` of ``dom f``."""
    x = as_point(x, f.dim)
    _check_interior(f, x)
    _, verts = subgradient_pairs(f, x[None, :])
    outer = False
    if f.dim > 1 and not f.is_convex:
        _, comp_active, _ = active_structure(f, x[None, :])
        outer = int(comp_active.sum()) > 1
    return Polytope(verts, outer=outer).canonical()


def subdiff_contains(f: PLFunction, x, xstar, tol: float = 1e-9,
                     grid: Optional[GridSpec] = None) -> bool:
    """Membership ``xstar in subdifferential(f, x)``.

    Convex ``f``: the defining inequality ``<x*, y - x> + f(x) <= f(y) + tol``
    is tested on lattice points ``y`` around ``x`` (no hull involved).
    Nonconvex ``f``: distance from ``xstar`` to the polytope ``<= tol``.
    """
    x = as_point(x, f.dim)
    xs = as_point(xstar, f.dim)
    _check_interior(f, x)
    if not f.is_convex:
        return subdifferential(f, x).contains(xs, tol)
    h = grid.h if grid is not None else 1.0 / 64
    Y = centered_lattice(x, h, 8 * h, ord=np.inf)
    fy = f.values(Y)
    keep = np.isfinite(fy)
    lhs = (Y[keep] - x) @ xs + f(x)
    return bool(np.all(lhs <= fy[keep] + tol))


def eps_enlargement(f: PLFunction, xbar, eps: float, grid: GridSpec,
                    norm=2) -> SampleSet:
    """Lattice members of the enlarged subdifferential at ``xbar``.

    Candidates ``x = xbar + h k`` with ``||x - xbar|| <= eps`` inside the grid
    region and ``int dom f``; each subdifferential vertex ``x*`` at ``x`` is
    kept when ``|f(x) - f(xbar)| <= eps`` and ``<x*, x - xbar> <= eps``. The
    point ``xbar`` itself is always a candidate.
    """
    if not eps > 0:
        raise ValueError("eps must be positive")
    xbar = as_point(xbar, f.dim)
    _check_interior(f, xbar)
    X = centered_lattice(xbar, grid.h, eps, ord=norm)
    keep = f.in_interior(X) & grid.region.contains(X)
    keep |= np.all(X == xbar, axis=1)
    X = X[keep]
    fbar = f(xbar)
    fx = f.values(X)
    slack = 1e-12 * (1.0 + eps)
    near = np.abs(fx - fbar) <= eps + slack
    X, fx = X[near], fx[near]
    rows, verts = subgradient_pairs(f, X)
    pairing = np.einsum("nd,nd->n", verts, X[rows] - xbar)
    ok = pairing <= eps + slack
    rows, verts = rows[ok], verts[ok]
    return SampleSet(X[rows], fx[rows], verts)


def sup_support(samples: Union[SampleSet, Polytope, Sequence], d) -> float:
    """``max <x*, d>`` over sample subgradients or polytope vertices."""
    if isinstance(samples, Polytope):
        return samples.support(d)
    if isinstance(samples, SampleSet):
        stars = samples.xstars
    else:
        stars = np.array([s.xstar for s in samples], dtype=float)
    if len(stars) == 0:
        raise EmptyEnlargement("no subgradient in the enlarged subdifferential")
    return float(np.max(stars @ as_point(d, stars.shape[1])))


@dataclass
class LinkReport:
    fprime: float
    schedule: list = field(default_factory=list)  # dicts: eps, sup, count
    passed: bool = True
    convex_equal: Optional[float] = None
    diagnostic: str = ""

    def to_dict(self) -> dict:
        return {
            "fprime": _json_num(self.fprime),
            "schedule": [{"eps": e["eps"], "sup": _json_num(e["sup"]), "count": e["count"]}
                         for e in self.schedule],
            "pass": self.passed,
            "convex_equal": self.convex_equal,
        }


def _json_num(v):
    if v is None:
        return None
    v = float(v)
    if math.isinf(v):
        return "+inf" if v > 0 else "-inf"
    return v


def verify_link(f: PLFunction, xbar, d, eps_schedule=DEFAULT_SCHEDULE,
                grid: Optional[GridSpec] = None, tol: float = LINK_TOL,
                norm=2) -> LinkReport:
    """Check ``f'(xbar; d) <= sup <enlarged subdifferential at eps, d> + tol`` per eps.

    For convex ``f`` the report also records ``|f'(xbar; d) - s(eps_min)|``,
    which vanishes in the limit.
    """
    xbar = as_point(xbar, f.dim)
    d = as_point(d, f.dim)
    if not np.any(d):
        raise ValueError("direction must be nonzero")
    sched = [float(e) for e in eps_schedule]
    if any(e <= 0 for e in sched) or any(b >= a for a, b in zip(sched, sched[1:])):
        raise ValueError("eps schedule must be positive and strictly decreasing")
    if grid is None:
        region = f.domain if f.domain is not None else Box.around(xbar, 2.0)
        grid = GridSpec.default(region)
    fprime = directional_derivative(f, xbar, d)
    report = LinkReport(fprime=fprime)
    for eps in sched:
        samples = eps_enlargement(f, xbar, eps, grid, norm=norm)
        if len(samples) == 0:
            report.passed = False
            report.diagnostic = f"empty enlargement at eps={eps}"
            report.schedule.append({"eps": eps, "sup": -math.inf, "count": 0})
            continue
        s = sup_support(samples, d)
        report.schedule.append({"eps": eps, "sup": s, "count": len(samples)})
        if not fprime <= s + tol:
            report.passed = False
    if f.is_convex and report.schedule:
        report.convex_equal = abs(fprime - report.schedule[-1]["sup"])
    return report
