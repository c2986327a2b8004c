"""Monotone polars of sampled operator graphs, and absorbing checks for ∂f.

A finite sample ``T`` of a graph has a polar ``T0`` (the pairs monotonically
related to every sample) that is larger than the polar of the full graph.
The absorbing checks therefore allow a discretization slack of ``2 h L``
(lattice spacing times the Lipschitz constant of ``f``) when measuring how
far a polar member lies from the graph of the subdifferential.
"""

from __future__ import annotations

import csv
import io
from dataclasses import dataclass
from typing import Optional

import numpy as np

from .calculus import subdiff_contains, subdifferential, subgradient_pairs
from .errors import ConvexityRequired, DimensionMismatch
from .plfunc import Box, GridSpec, PLFunction, as_point, lattice, restrict_to_segment

MONO_TOL = 1e-9


@dataclass(frozen=True)
class OperatorGraph:
    """Finite sample of a set-valued operator, sorted and deduplicated."""

    xs: np.ndarray
    xstars: np.ndarray

    def __post_init__(self):
        xs = np.asarray(self.xs, dtype=float)
        xstars = np.asarray(self.xstars, dtype=float)
        if xs.ndim == 1:
            xs = xs[:, None]
        if xstars.ndim == 1:
            xstars = xstars[:, None]
        if xs.shape != xstars.shape:
            raise DimensionMismatch("primal and dual samples differ in shape")
        if len(xs):
            both = np.unique(np.hstack([xs, xstars]), axis=0)
            n = xs.shape[1]
            xs, xstars = both[:, :n], both[:, n:]
        xs.setflags(write=False)
        xstars.setflags(write=False)
        object.__setattr__(self, "xs", xs)
        object.__setattr__(self, "xstars", xstars)

    @classmethod
    def from_pairs(cls, pairs, dim: int = 1) -> "OperatorGraph":
        pairs = list(pairs)
        if not pairs:
            return cls(np.empty((0, dim)), np.empty((0, dim)))
        xs = np.array([np.atleast_1d(p[0]) for p in pairs], dtype=float)
        xstars = np.array([np.atleast_1d(p[1]) for p in pairs], dtype=float)
        return cls(xs, xstars)

    @property
    def dim(self) -> int:
        return self.xs.shape[1]

    def __len__(self):
        return len(self.xs)

    def __iter__(self):
        return iter(zip(map(tuple, self.xs), map(tuple, self.xstars)))

    def translate_dual(self, v) -> "OperatorGraph":
        return OperatorGraph(self.xs, self.xstars + as_point(v, self.dim))

    def to_csv(self, fh=None) -> Optional[str]:
        """Write ``x1..xn, xstar1..xstarn`` rows; returns the text when ``fh`` is None."""
        out = fh if fh is not None else io.StringIO()
        w = csv.writer(out, lineterminator="\n")
        n = self.dim
        w.writerow([f"x{i + 1}" for i in range(n)] + [f"xstar{i + 1}" for i in range(n)])
        for x, s in zip(self.xs, self.xstars):
            w.writerow([repr(float(v)) for v in x] + [repr(float(v)) for v in s])
        return out.getvalue() if fh is None else None


@dataclass(frozen=True)
class AbsorbReport:
    candidates_tested: int
    polar_members: int
    polar_in_graph: int
    max_violation_distance: float
    slack: float
    tol: float
    passed: bool

    def to_dict(self) -> dict:
        return {
            "candidates_tested": self.candidates_tested,
            "polar_members": self.polar_members,
            "polar_in_graph": self.polar_in_graph,
            "max_violation_distance": self.max_violation_distance,
            "slack": self.slack,
            "tol": self.tol,
            "pass": self.passed,
        }


def _row_kinks_2d(f: PLFunction, box: Box, h: float) -> np.ndarray:
    ys = lattice(Box(box.lower[1:], box.upper[1:]), h)[:, 0]
    pts = []
    for y in ys:
        prof = restrict_to_segment(f, [box.lower[0], y], [box.upper[0], y])
        for t in prof.knots[1:-1] if len(prof.knots) > 2 else []:
            pts.append([box.lower[0] + t * (box.upper[0] - box.lower[0]), y])
    return np.array(pts).reshape(-1, 2)


def sample_points(f: PLFunction, grid: GridSpec) -> np.ndarray:
    """Lattice points of the grid inside ``int dom f``, with kinks inserted.

    1D: every breakpoint of ``f`` in the region. 2D: breakpoints along each
    lattice row, which puts samples on the kink curves.
    """
    box = grid.region.intersect(f.domain)
    if box is None:
        return np.empty((0, f.dim))
    X = lattice(box, grid.h)
    if f.dim <= 2 and np.all(box.widths > 0):
        prof_pts = _row_kinks_2d(f, box, grid.h) if f.dim == 2 else None
        if f.dim == 1:
            prof = restrict_to_segment(f, box.lo, box.hi)
            prof_pts = box.lo + np.outer(prof.knots[1:-1], box.hi - box.lo)
        X = np.unique(np.vstack([X, prof_pts]), axis=0)
    return X[f.in_interior(X)]


def sample_subdiff_graph(f: PLFunction, grid: GridSpec) -> OperatorGraph:
    """Pairs ``(x, v)`` for each vertex ``v`` of the subdifferential at each sample point."""
    X = sample_points(f, grid)
    rows, verts = subgradient_pairs(f, X)
    return OperatorGraph(X[rows], verts)


def monotonically_related(x, xstar, T: OperatorGraph, tol: float = MONO_TOL) -> bool:
    """``<y* - x*, y - x> >= -tol`` for every sample ``(y, y*)`` of ``T``."""
    x = as_point(x, T.dim)
    xstar = as_point(xstar, T.dim)
    prods = np.einsum("md,md->m", T.xstars - xstar, T.xs - x)
    return bool(np.all(prods >= -tol))


def _as_points(src) -> np.ndarray:
    if isinstance(src, GridSpec):
        return src.points()
    return np.atleast_2d(np.asarray(src, dtype=float))


def polar_samples(T: OperatorGraph, candidates, tol: float = MONO_TOL) -> OperatorGraph:
    """All candidate pairs (primal x dual) monotonically related to ``T``.

    ``candidates`` is a ``(primal, dual)`` pair of grids or point arrays.
    """
    primal, dual = (_as_points(c) for c in candidates)
    if len(T) == 0:
        xs = np.repeat(primal, len(dual), axis=0)
        return OperatorGraph(xs, np.tile(dual, (len(primal), 1)))
    keep_x, keep_s = [], []
    for x in primal:
        B = T.xs - x
        A = np.einsum("md,md->m", T.xstars, B)
        ok = np.all(A[None, :] - dual @ B.T >= -tol, axis=1)
        if ok.any():
            keep_x.append(np.repeat(x[None, :], ok.sum(), axis=0))
            keep_s.append(dual[ok])
    if not keep_x:
        return OperatorGraph(np.empty((0, T.dim)), np.empty((0, T.dim)))
    return OperatorGraph(np.vstack(keep_x), np.vstack(keep_s))


def check_monotone(T: OperatorGraph, tol: float = MONO_TOL, chunk: int = 512) -> bool:
    """``<x* - y*, x - y> >= -tol`` for every pair of samples."""
    for i in range(0, len(T), chunk):
        dx = T.xs[i:i + chunk, None, :] - T.xs[None, :, :]
        ds = T.xstars[i:i + chunk, None, :] - T.xstars[None, :, :]
        if np.any(np.einsum("ijd,ijd->ij", dx, ds) < -tol):
            return False
    return True


def graph_pieces_1d(f: PLFunction, lo: float, hi: float):
    """Exact graph of the 1D subdifferential over ``[lo, hi]`` as axis-aligned segments.

    Returns horizontal pieces ``(x_start, x_end, slope)`` and vertical fibers
    ``(x, v_min, v_max)`` at the kinks.
    """
    prof = restrict_to_segment(f, [lo], [hi])
    k = lo + prof.knots * (hi - lo)
    s = prof.slopes / (hi - lo)
    horiz = np.stack([k[:-1], k[1:], s], axis=1)
    vert = np.stack([k[1:-1], np.minimum(s[:-1], s[1:]), np.maximum(s[:-1], s[1:])], axis=1)
    return horiz, vert


def graph_distance_1d(f: PLFunction, region: Box, xs, xstars) -> np.ndarray:
    """Euclidean distance in ``X x X*`` from each pair to the exact graph of ∂f."""
    xs = np.ravel(np.asarray(xs, dtype=float))
    xstars = np.ravel(np.asarray(xstars, dtype=float))
    box = region.intersect(f.domain)
    horiz, vert = graph_pieces_1d(f, box.lower[0], box.upper[0])
    dx = np.maximum(np.maximum(horiz[None, :, 0] - xs[:, None], xs[:, None] - horiz[None, :, 1]), 0)
    dh = np.hypot(dx, xstars[:, None] - horiz[None, :, 2]).min(axis=1)
    if len(vert) == 0:
        return dh
    dv_s = np.maximum(np.maximum(vert[None, :, 1] - xstars[:, None],
                                 xstars[:, None] - vert[None, :, 2]), 0)
    dv = np.hypot(xs[:, None] - vert[None, :, 0], dv_s).min(axis=1)
    return np.minimum(dh, dv)


def _graph_distance_nd(f: PLFunction, T: OperatorGraph, x, xstar) -> float:
    d_here = subdifferential(f, x).distance(xstar)
    d_samples = np.sqrt(np.sum((T.xs - x) ** 2, axis=1) + np.sum((T.xstars - xstar) ** 2, axis=1))
    return float(min(d_here, d_samples.min()))


def default_dual_grid(f: PLFunction, h: float) -> GridSpec:
    G = f.gradients()
    return GridSpec(h, Box(G.min(axis=0) - 1.0, G.max(axis=0) + 1.0))


def primal_candidates(f: PLFunction, grid: GridSpec) -> np.ndarray:
    """Half-spacing lattice of the open region inside ``int dom f``.

    Boundary points are left out: a sample truncated to a box is related to
    every outward-pointing pair there, which is an artifact of the cut.
    """
    X = lattice(grid.region, grid.h / 2)
    return X[grid.region.contains_interior(X) & f.in_interior(X)]


def check_absorbing(f: PLFunction, grid: GridSpec, dual_grid: Optional[GridSpec] = None,
                    tol: float = MONO_TOL) -> AbsorbReport:
    """Sampled version of ``(∂f)0 ⊂ ∂f``.

    Every member of the polar of the sampled graph must lie within
    ``tol + 2 h L`` of the graph of ∂f (distance in ``X x X*``).
    """
    dual_grid = dual_grid or default_dual_grid(f, grid.h)
    T = sample_subdiff_graph(f, grid)
    P = primal_candidates(f, grid)
    D = dual_grid.points()
    polar = polar_samples(T, (P, D), tol)
    in_graph = sum(subdiff_contains(f, x, s, tol=max(tol, 1e-9), grid=grid) for x, s in polar)
    if len(polar) == 0:
        dist = 0.0
    elif f.dim == 1:
        dist = float(graph_distance_1d(f, grid.region, polar.xs, polar.xstars).max())
    else:
        dist = max(_graph_distance_nd(f, T, x, s) for x, s in zip(polar.xs, polar.xstars))
    slack = 2 * grid.h * f.lipschitz
    return AbsorbReport(
        candidates_tested=len(P) * len(D), polar_members=len(polar),
        polar_in_graph=int(in_graph), max_violation_distance=dist, slack=slack,
        tol=tol, passed=dist <= tol + slack)


def check_maximal_monotone(f: PLFunction, grid: GridSpec, dual_grid: Optional[GridSpec] = None,
                           tol: float = MONO_TOL) -> bool:
    """Sampled ``T = T0`` for the subdifferential of a convex ``f``."""
    if not f.is_convex:
        raise ConvexityRequired("maximal monotonicity check needs a single max-affine component")
    T = sample_subdiff_graph(f, grid)
    return check_monotone(T, tol) and check_absorbing(f, grid, dual_grid, tol).passed
