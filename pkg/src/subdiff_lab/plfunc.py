"""Exact piecewise-linear functions: min of max-of-affine pieces on a box.

A :class:`PLFunction` is ``f(x) = min_k max_{i in k} (<a_i, x> + b_i)`` on an
optional closed box and ``+inf`` outside of it. Such a function is proper and
lower semicontinuous by construction, and its restriction to any segment is a
piecewise affine function of one variable with finitely many breakpoints,
which makes every one-dimensional computation below exact (up to float
rounding).

``+inf`` is always ``math.inf``; it is never replaced by a large float.
"""

from __future__ import annotations

import itertools
import math
from dataclasses import dataclass
from functools import cached_property
from typing import Optional

import numpy as np

from .errors import DimensionMismatch, DomainError, EmptyDomainOnSegment

MAX_DIM = 3
#: relative activity tolerance for "piece active at x"
ACTIVE_RTOL = 1e-9
#: equality of slopes / crossing loci
SLOPE_TOL = 1e-9
#: knots closer than this (in the segment parameter) are merged
KNOT_TOL = 1e-12
#: slack used when testing box membership of computed points
BOX_SLACK = 1e-12


def as_point(x, dim: Optional[int] = None) -> np.ndarray:
    """Coerce a scalar or sequence into a finite 1-D float array."""
    p = np.atleast_1d(np.asarray(x, dtype=float))
    if p.ndim != 1:
        raise DimensionMismatch(f"expected a point, got shape {p.shape}")
    if dim is not None and p.shape[0] != dim:
        raise DimensionMismatch(f"expected dimension {dim}, got {p.shape[0]}")
    if not np.all(np.isfinite(p)):
        raise ValueError("point coordinates must be finite")
    return p


def active_tol(value) -> np.ndarray:
    return ACTIVE_RTOL * (1.0 + np.abs(value))


@dataclass(frozen=True)
class AffinePiece:
    """``x -> <gradient, x> + offset``."""

    gradient: tuple
    offset: float

    def __post_init__(self):
        grad = tuple(float(g) for g in np.atleast_1d(self.gradient))
        if not 1 <= len(grad) <= MAX_DIM:
            raise DimensionMismatch(f"dimension must be in 1..{MAX_DIM}")
        object.__setattr__(self, "gradient", grad)
        object.__setattr__(self, "offset", float(self.offset))

    @property
    def dim(self) -> int:
        return len(self.gradient)

    def __call__(self, x) -> float:
        return float(np.dot(self.gradient, as_point(x, self.dim)) + self.offset)


@dataclass(frozen=True)
class MaxAffine:
    """Pointwise maximum of affine pieces (a convex PL function)."""

    pieces: tuple

    def __post_init__(self):
        pieces = tuple(p if isinstance(p, AffinePiece) else AffinePiece(*p)
                       for p in self.pieces)
        if not pieces:
            raise ValueError("MaxAffine needs at least one piece")
        if len({p.dim for p in pieces}) != 1:
            raise DimensionMismatch("pieces have different dimensions")
        object.__setattr__(self, "pieces", pieces)

    @property
    def dim(self) -> int:
        return self.pieces[0].dim

    @property
    def lipschitz(self) -> float:
        return max(float(np.linalg.norm(p.gradient)) for p in self.pieces)

    def __call__(self, x) -> float:
        return max(p(x) for p in self.pieces)


@dataclass(frozen=True)
class Box:
    """Closed box ``{x : lower <= x <= upper}``."""

    lower: tuple
    upper: tuple

    def __post_init__(self):
        lo = tuple(float(v) for v in np.atleast_1d(self.lower))
        hi = tuple(float(v) for v in np.atleast_1d(self.upper))
        if len(lo) != len(hi):
            raise DimensionMismatch("box bounds have different dimensions")
        if not 1 <= len(lo) <= MAX_DIM:
            raise DimensionMismatch(f"dimension must be in 1..{MAX_DIM}")
        if not all(math.isfinite(v) for v in lo + hi):
            raise ValueError("box bounds must be finite")
        if any(l > h for l, h in zip(lo, hi)):
            raise ValueError("box is empty: lower > upper")
        object.__setattr__(self, "lower", lo)
        object.__setattr__(self, "upper", hi)

    @classmethod
    def cube(cls, lo: float, hi: float, dim: int) -> "Box":
        return cls((lo,) * dim, (hi,) * dim)

    @classmethod
    def around(cls, center, radius: float) -> "Box":
        c = as_point(center)
        return cls(c - radius, c + radius)

    @property
    def dim(self) -> int:
        return len(self.lower)

    @cached_property
    def lo(self) -> np.ndarray:
        return np.array(self.lower)

    @cached_property
    def hi(self) -> np.ndarray:
        return np.array(self.upper)

    @property
    def widths(self) -> np.ndarray:
        return self.hi - self.lo

    @property
    def center(self) -> np.ndarray:
        return 0.5 * (self.lo + self.hi)

    def slack(self) -> np.ndarray:
        return BOX_SLACK * (1.0 + np.maximum(np.abs(self.lo), np.abs(self.hi)))

    def contains(self, X) -> np.ndarray:
        """Membership of each row of ``X`` (or a single point)."""
        X = np.asarray(X, dtype=float)
        s = self.slack()
        return np.all((X >= self.lo - s) & (X <= self.hi + s), axis=-1)

    def contains_interior(self, X) -> np.ndarray:
        X = np.asarray(X, dtype=float)
        s = self.slack()
        return np.all((X > self.lo + s) & (X < self.hi - s), axis=-1)

    def intersect(self, other: Optional["Box"]) -> Optional["Box"]:
        if other is None:
            return self
        if other.dim != self.dim:
            raise DimensionMismatch("boxes have different dimensions")
        lo = np.maximum(self.lo, other.lo)
        hi = np.minimum(self.hi, other.hi)
        if np.any(lo > hi):
            return None
        return Box(lo, hi)

    def clip(self, X) -> np.ndarray:
        return np.clip(X, self.lo, self.hi)

    def text(self) -> str:
        return "box(" + "; ".join(f"{_num(l)},{_num(h)}"
                                  for l, h in zip(self.lower, self.upper)) + ")"


def _num(v: float) -> str:
    v = float(v)
    if math.isinf(v):
        return "inf" if v > 0 else "-inf"
    if v == int(v) and abs(v) < 1e15:
        return str(int(v))
    return repr(v)


@dataclass(frozen=True)
class PLFunction:
    """``min`` over components of ``max`` over affine pieces, ``+inf`` off ``domain``."""

    components: tuple
    domain: Optional[Box] = None

    def __post_init__(self):
        comps = tuple(c if isinstance(c, MaxAffine) else MaxAffine(tuple(c))
                      for c in self.components)
        if not comps:
            raise ValueError("PLFunction needs at least one component")
        if len({c.dim for c in comps}) != 1:
            raise DimensionMismatch("components have different dimensions")
        if self.domain is not None and self.domain.dim != comps[0].dim:
            raise DimensionMismatch("domain dimension differs from pieces")
        object.__setattr__(self, "components", comps)

    @classmethod
    def max_affine(cls, pieces, domain=None) -> "PLFunction":
        """Convex function from ``(gradient, offset)`` pairs."""
        return cls((MaxAffine(tuple(AffinePiece(g, b) for g, b in pieces)),), domain)

    @classmethod
    def affine(cls, gradient, offset=0.0, domain=None) -> "PLFunction":
        return cls.max_affine([(gradient, offset)], domain)

    @property
    def dim(self) -> int:
        return self.components[0].dim

    @property
    def is_convex(self) -> bool:
        """Single max-affine component: convex on its (convex) domain."""
        return len(self.components) == 1

    @property
    def n_pieces(self) -> int:
        return len(self._offsets)

    @property
    def lipschitz(self) -> float:
        return max(c.lipschitz for c in self.components)

    @cached_property
    def _gradients(self) -> np.ndarray:
        return np.array([p.gradient for c in self.components for p in c.pieces])

    @cached_property
    def _offsets(self) -> np.ndarray:
        return np.array([p.offset for c in self.components for p in c.pieces])

    @cached_property
    def _comp_index(self) -> np.ndarray:
        return np.repeat(np.arange(len(self.components)),
                         [len(c.pieces) for c in self.components])

    @cached_property
    def _comp_starts(self) -> np.ndarray:
        sizes = [len(c.pieces) for c in self.components]
        return np.concatenate([[0], np.cumsum(sizes)[:-1]]).astype(int)

    def gradients(self) -> np.ndarray:
        return self._gradients.copy()

    def piece_values(self, X) -> np.ndarray:
        """``(N, P)`` matrix of all affine pieces evaluated at the rows of ``X``."""
        X = np.atleast_2d(np.asarray(X, dtype=float))
        if X.shape[1] != self.dim:
            raise DimensionMismatch(f"expected dimension {self.dim}, got {X.shape[1]}")
        return X @ self._gradients.T + self._offsets

    def component_values(self, V) -> np.ndarray:
        """Reduce piece values ``(N, P)`` to component maxima ``(N, K)``."""
        return np.maximum.reduceat(V, self._comp_starts, axis=1)

    def values(self, X) -> np.ndarray:
        """Vectorized :func:`evaluate` over the rows of ``X``."""
        X = np.atleast_2d(np.asarray(X, dtype=float))
        out = self.component_values(self.piece_values(X)).min(axis=1)
        if self.domain is not None:
            out = np.where(self.domain.contains(X), out, math.inf)
        return out

    def __call__(self, x) -> float:
        return evaluate(self, x)

    def in_domain(self, x) -> bool:
        return self.domain is None or bool(self.domain.contains(as_point(x, self.dim)))

    def in_interior(self, X) -> np.ndarray:
        X = np.atleast_2d(np.asarray(X, dtype=float))
        if self.domain is None:
            return np.ones(len(X), dtype=bool)
        return self.domain.contains_interior(X)

    def map_pieces(self, fn) -> "PLFunction":
        comps = tuple(MaxAffine(tuple(fn(p) for p in c.pieces)) for c in self.components)
        return PLFunction(comps, self.domain)

    def subtract_linear(self, xstar) -> "PLFunction":
        """``f - <xstar, .>``."""
        xs = as_point(xstar, self.dim)
        return self.map_pieces(lambda p: AffinePiece(np.subtract(p.gradient, xs), p.offset))

    def scaled(self, c: float) -> "PLFunction":
        """``c * f`` for ``c > 0``."""
        if not c > 0:
            raise ValueError("only positive scalings preserve the min-max form")
        return self.map_pieces(lambda p: AffinePiece(np.multiply(p.gradient, c), c * p.offset))

    def with_domain(self, domain: Optional[Box]) -> "PLFunction":
        return PLFunction(self.components, domain)


def evaluate(f: PLFunction, x) -> float:
    """Value of ``f`` at ``x``; ``math.inf`` outside the domain box."""
    p = as_point(x, f.dim)
    return float(f.values(p[None, :])[0])


@dataclass(frozen=True)
class GridSpec:
    """Uniform lattice of resolution ``h`` over ``region``."""

    h: float
    region: Box

    def __post_init__(self):
        if not self.h > 0:
            raise ValueError("grid resolution must be positive")

    @classmethod
    def default(cls, region: Box, divisions: int = 64) -> "GridSpec":
        return cls(float(np.max(region.widths)) / divisions or 1.0 / divisions, region)

    def refined(self, factor: int = 2) -> "GridSpec":
        return GridSpec(self.h / factor, self.region)

    def points(self) -> np.ndarray:
        return lattice(self.region, self.h)


def lattice(region: Box, h: float) -> np.ndarray:
    """Lattice of ``region`` with spacing at most ``h``, in lexicographic order."""
    axes = []
    for lo, hi in zip(region.lower, region.upper):
        n = int(math.ceil((hi - lo) / h - 1e-9)) + 1 if hi > lo else 1
        axes.append(np.linspace(lo, hi, n))
    mesh = np.meshgrid(*axes, indexing="ij")
    return np.stack([m.ravel() for m in mesh], axis=1)


def centered_lattice(center, h: float, radius: float, ord=2) -> np.ndarray:
    """Points ``center + h*k`` (integer ``k``) with ``||h*k|| <= radius``."""
    c = as_point(center)
    m = int(math.floor(radius / h + 1e-9))
    ks = np.arange(-m, m + 1, dtype=float)
    mesh = np.meshgrid(*([ks] * len(c)), indexing="ij")
    K = np.stack([g.ravel() for g in mesh], axis=1) * h
    keep = np.linalg.norm(K, ord=ord, axis=1) <= radius * (1 + 1e-12)
    return c + K[keep]


@dataclass(frozen=True)
class SegmentProfile:
    """Exact profile of ``t -> f(start + t (end - start))`` on ``[0, 1]``.

    ``knots`` cover the finite part ``[knots[0], knots[-1]]`` of the profile;
    it is ``+inf`` elsewhere. The profile is affine with slope ``slopes[i]``
    on ``[knots[i], knots[i+1]]``. An empty ``knots`` array means the segment
    misses the domain.
    """

    start: np.ndarray
    end: np.ndarray
    knots: np.ndarray
    values: np.ndarray
    slopes: np.ndarray

    @property
    def is_empty(self) -> bool:
        return len(self.knots) == 0

    @property
    def finite_interval(self):
        if self.is_empty:
            return None
        return float(self.knots[0]), float(self.knots[-1])

    @property
    def breakpoints(self) -> np.ndarray:
        """Knots strictly inside ``]0, 1[`` (slope changes and domain edges)."""
        k = self.knots
        return k[(k > KNOT_TOL) & (k < 1 - KNOT_TOL)]

    def point(self, t) -> np.ndarray:
        return self.start + np.multiply.outer(np.asarray(t, dtype=float),
                                              self.end - self.start)

    def __call__(self, t):
        t = np.asarray(t, dtype=float)
        if self.is_empty:
            return np.full(t.shape, math.inf)[()] if t.shape else math.inf
        k = self.knots
        if len(k) == 1:
            vals = np.where(np.abs(t - k[0]) <= KNOT_TOL, self.values[0], math.inf)
        else:
            vals = np.interp(t, k, self.values)
            vals = np.where((t < k[0] - KNOT_TOL) | (t > k[-1] + KNOT_TOL), math.inf, vals)
        return vals[()] if vals.ndim == 0 else vals

    def tilt(self, lam: float) -> "SegmentProfile":
        """Profile of ``t -> value(t) - lam * t``."""
        return SegmentProfile(self.start, self.end, self.knots,
                              self.values - lam * self.knots, self.slopes - lam)

    def right_slope(self, t: float) -> float:
        """Slope on the first piece to the right of ``t`` (``+inf`` past the end)."""
        if self.is_empty:
            raise EmptyDomainOnSegment("segment misses the domain")
        k = self.knots
        if t < k[0] - KNOT_TOL:
            raise DomainError("t is left of the finite part of the profile")
        i = int(np.searchsorted(k, t + KNOT_TOL, side="right")) - 1
        if i >= len(self.slopes):
            return math.inf
        return float(self.slopes[max(i, 0)])

    def left_slope(self, t: float) -> float:
        """Slope on the last piece to the left of ``t`` (``-inf`` before the start)."""
        if self.is_empty:
            raise EmptyDomainOnSegment("segment misses the domain")
        k = self.knots
        if t > k[-1] + KNOT_TOL:
            raise DomainError("t is right of the finite part of the profile")
        i = int(np.searchsorted(k, t - KNOT_TOL, side="left"))
        if i <= 0:
            return -math.inf
        return float(self.slopes[min(i, len(self.slopes)) - 1])

    def minimize(self):
        """Exact global minimum ``(t, value)``; smallest minimizing ``t``."""
        if self.is_empty:
            raise EmptyDomainOnSegment("profile is identically +inf on the segment")
        vals = self.values
        vmin = float(vals.min())
        near = np.flatnonzero(vals <= vmin + 1e-12 * (1.0 + abs(vmin)))
        for i in near:
            if i >= len(self.slopes) or self.slopes[i] >= -SLOPE_TOL:
                return float(self.knots[i]), float(vals[i])
        i = int(np.argmin(vals))
        return float(self.knots[i]), float(vals[i])


def _segment_domain_interval(f: PLFunction, a: np.ndarray, b: np.ndarray):
    t_lo, t_hi = 0.0, 1.0
    if f.domain is None:
        return t_lo, t_hi
    s = f.domain.slack()
    for ai, bi, lo, hi, si in zip(a, b, f.domain.lo, f.domain.hi, s):
        delta = bi - ai
        if delta == 0.0:
            if ai < lo - si or ai > hi + si:
                return None
            continue
        t1, t2 = (lo - ai) / delta, (hi - ai) / delta
        t_lo, t_hi = max(t_lo, min(t1, t2)), min(t_hi, max(t1, t2))
    if t_lo > t_hi + KNOT_TOL:
        return None
    return t_lo, max(t_lo, t_hi)


def _line_min_max(f: PLFunction, alpha, beta, t):
    """Profile value and the slope of the line that attains it at each ``t``."""
    V = alpha[None, :] + np.outer(t, beta)
    M = f.component_values(V)
    k = np.argmin(M, axis=1)
    value = M[np.arange(len(t)), k]
    # the line realizing the chosen component's maximum
    comp = f._comp_index
    masked = np.where(comp[None, :] == k[:, None], V, -np.inf)
    line = np.argmax(masked, axis=1)
    return value, beta[line]


def restrict_to_segment(f: PLFunction, a, b) -> SegmentProfile:
    """Exact piecewise-affine profile of ``f`` along ``[a, b]``."""
    a = as_point(a, f.dim)
    b = as_point(b, f.dim)
    interval = _segment_domain_interval(f, a, b)
    if interval is None:
        empty = np.empty(0)
        return SegmentProfile(a, b, empty, empty, empty)
    t_lo, t_hi = interval
    G, off = f._gradients, f._offsets
    alpha = G @ a + off
    beta = G @ (b - a)
    knots = [t_lo, t_hi]
    if t_hi > t_lo:
        dbeta = beta[:, None] - beta[None, :]
        dalpha = alpha[None, :] - alpha[:, None]
        iu = np.triu_indices(len(beta), 1)
        db, da = dbeta[iu], dalpha[iu]
        ok = np.abs(db) > SLOPE_TOL * (1.0 + np.abs(beta[iu[0]]))
        cross = da[ok] / db[ok]
        knots.extend(cross[(cross > t_lo) & (cross < t_hi)])
    merged = []
    for k in np.unique(np.asarray(knots, dtype=float)):
        if not merged or k - merged[-1] > KNOT_TOL:
            merged.append(k)
    merged[-1] = max(merged[-1], t_hi)
    knots = np.array(merged)
    values, _ = _line_min_max(f, alpha, beta, knots)
    if len(knots) > 1:
        mids = 0.5 * (knots[:-1] + knots[1:])
        _, slopes = _line_min_max(f, alpha, beta, mids)
        # drop knots where the slope does not change
        same = np.abs(np.diff(slopes)) <= SLOPE_TOL * (1.0 + np.abs(slopes[:-1]))
        keep = np.concatenate([[True], ~same, [True]])
        knots, values = knots[keep], values[keep]
        slopes = slopes[np.concatenate([[True], ~same])]
    else:
        slopes = np.empty(0)
    return SegmentProfile(a, b, knots, values, slopes)


def minimize_on_segment(f: PLFunction, a, b):
    """Exact ``(t_min, value)`` of ``f`` on ``[a, b]``; smallest minimizing ``t``."""
    return restrict_to_segment(f, a, b).minimize()


def _refine_directions(dim: int) -> list:
    dirs = []
    for signs in itertools.product((-1.0, 0.0, 1.0), repeat=dim):
        v = np.array(signs)
        if not v.any():
            continue
        first = v[np.flatnonzero(v)[0]]
        if first > 0:
            dirs.append(v)
    return dirs


def _line_through_box(p, u, box: Box):
    t_min, t_max = -math.inf, math.inf
    for pi, ui, lo, hi in zip(p, u, box.lo, box.hi):
        if ui == 0:
            continue
        t1, t2 = (lo - pi) / ui, (hi - pi) / ui
        t_min, t_max = max(t_min, min(t1, t2)), min(t_max, max(t1, t2))
    return box.clip(p + t_min * u), box.clip(p + t_max * u)


def minimize_on_box(f: PLFunction, region: Box, grid: Optional[GridSpec] = None,
                    max_rounds: int = 50):
    """Brute-force global minimum ``(x_min, value)`` of ``f`` over ``region``.

    Exact in 1D (breakpoint enumeration). In 2D/3D: the minimum over the
    lattice of resolution ``grid.h``, followed by exact line minimization
    along coordinate and diagonal directions from the best lattice point.
    Ties go to the lexicographically smallest point.
    """
    box = region.intersect(f.domain)
    if box is None:
        raise DomainError("region does not meet the domain of f")
    if f.dim == 1:
        t, value = minimize_on_segment(f, box.lo, box.hi)
        return box.lo + t * (box.hi - box.lo), value
    h = grid.h if grid is not None else float(np.max(region.widths)) / 64 or 1.0
    X = lattice(box, h)
    vals = f.values(X)
    vmin = float(vals.min())
    i = int(np.flatnonzero(vals <= vmin + 1e-12 * (1.0 + abs(vmin)))[0])
    best, best_val = X[i].copy(), float(vals[i])
    dirs = _refine_directions(f.dim)
    for _ in range(max_rounds):
        improved = False
        for u in dirs:
            a, b = _line_through_box(best, u, box)
            if np.allclose(a, b, rtol=0, atol=0):
                continue
            t, val = minimize_on_segment(f, a, b)
            if val < best_val - 1e-14 * (1.0 + abs(best_val)):
                best, best_val = box.clip(a + t * (b - a)), val
                improved = True
        if not improved:
            break
    return best, best_val


def kinks_1d(f: PLFunction, lo: float, hi: float) -> np.ndarray:
    """Breakpoints of a 1D function strictly inside ``]lo, hi[``."""
    if f.dim != 1:
        raise DimensionMismatch("kinks_1d needs a one-dimensional function")
    prof = restrict_to_segment(f, [lo], [hi])
    return lo + prof.knots[1:-1] * (hi - lo)


def _lp_min_component(comp, box: Box):
    from scipy.optimize import linprog

    G = np.array([p.gradient for p in comp.pieces])
    b = np.array([p.offset for p in comp.pieces])
    n = G.shape[1]
    A = np.hstack([G, -np.ones((len(b), 1))])
    bounds = list(zip(box.lower, box.upper)) + [(None, None)]
    c = np.zeros(n + 1)
    c[-1] = 1.0
    res = linprog(c, A_ub=A, b_ub=-b, bounds=bounds, method="highs-ds")
    if res.status != 0:
        raise RuntimeError(f"LP failed: {res.message}")
    value = float(res.x[-1])
    # lexicographically smallest point on the optimal face
    y = res.x[:n]
    A2 = np.vstack([A, c])
    for j in range(n):
        cj = np.zeros(n + 1)
        cj[j] = 1.0
        b2 = np.concatenate([-b, [value]])
        r = linprog(cj, A_ub=A2, b_ub=b2, bounds=bounds, method="highs-ds")
        if r.status != 0:
            break
        y = r.x[:n]
        bounds[j] = (float(y[j]), float(y[j]))
    return box.clip(y) + 0.0  # no negative zeros


def minimize_exact(f: PLFunction, region: Box):
    """Exact global minimum ``(x_min, value)`` of ``f`` over ``region``.

    1D uses breakpoint enumeration; 2D/3D solve one linear program per
    max-affine component (dual simplex, so a vertex is returned) and keep the
    best. Ties go to the lexicographically smallest point.
    """
    box = region.intersect(f.domain)
    if box is None:
        raise DomainError("region does not meet the domain of f")
    if f.dim == 1:
        t, value = minimize_on_segment(f, box.lo, box.hi)
        return box.lo + t * (box.hi - box.lo), value
    best, best_val = None, math.inf
    for comp in f.components:
        y = _lp_min_component(comp, box)
        val = evaluate(f, y)
        tie = 1e-12 * (1.0 + abs(val))
        if (val < best_val - tie
                or (abs(val - best_val) <= tie and tuple(y) < tuple(best))):
            best, best_val = y, val
    return best, best_val
