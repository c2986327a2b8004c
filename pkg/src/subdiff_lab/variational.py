"""Ekeland points and mean value witnesses for PL functions.

Both constructions are exact here. The Ekeland point minimizes
``f(y) + (eps/lam) * ||y - xbar||_inf`` over the ball ``B(xbar, lam)``; with a
sup-norm penalty that objective is again a min of max-affine functions, so an
LP per component finds its global minimum. The mean value witness minimizes
``g(t) = f(x + t(xbar - x)) - t*lam`` over ``[0, 1]`` by breakpoint
enumeration.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, asdict
from typing import Optional

import numpy as np

from .calculus import directional_derivative, eps_enlargement, SubgradientSample, _json_num
from .errors import DomainError, PreconditionLambda, PreconditionSci, WitnessNotFound
from .plfunc import (
    KNOT_TOL,
    AffinePiece,
    Box,
    GridSpec,
    MaxAffine,
    PLFunction,
    as_point,
    lattice,
    minimize_exact,
    minimize_on_box,
    restrict_to_segment,
)

WITNESS_TOL = 1e-9


def _sup_dist(Y, c) -> np.ndarray:
    return np.max(np.abs(np.atleast_2d(Y) - c), axis=1)


@dataclass(frozen=True)
class EkelandWitness:
    x_eps: tuple
    lam: float
    eps: float
    perturbed_min_gap: float
    xbar: tuple
    f_xbar: float
    f_xeps: float
    distance: float
    probes: int

    def check(self, tol: float = WITNESS_TOL) -> bool:
        return (self.distance <= self.lam * (1 + 1e-12)
                and self.f_xeps <= self.f_xbar + tol
                and self.perturbed_min_gap <= tol)

    def to_dict(self) -> dict:
        d = asdict(self)
        d["x_eps"], d["xbar"] = list(self.x_eps), list(self.xbar)
        d["lambda"] = d.pop("lam")
        d["valid"] = self.check()
        return d


@dataclass(frozen=True)
class MVIWitness:
    t0: float
    x0: tuple
    dd: float
    lam: float
    x: tuple
    xbar: tuple
    f_x: float
    f_x0: float

    @property
    def slope_residual(self) -> float:
        """``lam - f'(x0; xbar - x)``; nonpositive when the first inequality holds."""
        return self.lam - self.dd

    @property
    def value_residual(self) -> float:
        """``f(x0) - f(x) - t0*lam``; nonpositive when the second inequality holds."""
        return self.f_x0 - self.f_x - self.t0 * self.lam

    def check(self, tol: float = WITNESS_TOL) -> bool:
        return (0.0 <= self.t0 < 1.0 and self.slope_residual <= tol
                and self.value_residual <= tol)

    def to_dict(self) -> dict:
        d = asdict(self)
        d["x0"], d["x"], d["xbar"] = list(self.x0), list(self.x), list(self.xbar)
        d["dd"] = _json_num(self.dd)
        d["lambda"] = d.pop("lam")
        d["slope_residual"] = _json_num(self.slope_residual)
        d["value_residual"] = self.value_residual
        d["valid"] = self.check()
        return d


def penalized(f: PLFunction, center, weight: float, domain: Optional[Box] = None) -> PLFunction:
    """``f + weight * ||. - center||_inf`` written as a min of max-affine functions."""
    c = as_point(center, f.dim)
    n = f.dim
    norm_pieces = []
    for j in range(n):
        for s in (1.0, -1.0):
            g = np.zeros(n)
            g[j] = s * weight
            norm_pieces.append((g, -s * weight * c[j]))
    comps = []
    for comp in f.components:
        comps.append(MaxAffine(tuple(
            AffinePiece(np.add(p.gradient, g), p.offset + b)
            for p in comp.pieces for g, b in norm_pieces)))
    return PLFunction(tuple(comps), domain if domain is not None else f.domain)


def _probe_points(center, radius: float, dim: int, count: int = 1000) -> np.ndarray:
    per_axis = max(2, int(round(count ** (1.0 / dim))))
    if dim == 1:
        per_axis = count
    box = Box.around(center, radius)
    return lattice(box, 2 * radius / (per_axis - 1))


def verify_ekeland(f: PLFunction, x_eps, xbar, eps: float, lam: float,
                   count: int = 1000) -> float:
    """Largest violation of the perturbed-minimum property on a probe grid.

    Probes fill ``B(x_eps, lam/4)`` (sup norm); only those inside
    ``B(xbar, lam)`` count, which is where the construction minimizes.
    """
    x_eps = as_point(x_eps, f.dim)
    xbar = as_point(xbar, f.dim)
    Y = _probe_points(x_eps, lam / 4, f.dim, count)
    Y = Y[_sup_dist(Y, xbar) <= lam * (1 + 1e-12)]
    fy = f.values(Y)
    Y, fy = Y[np.isfinite(fy)], fy[np.isfinite(fy)]
    if len(Y) == 0:
        return 0.0
    perturbed = fy + (eps / lam) * _sup_dist(Y, x_eps)
    return float(np.max(f(x_eps) - perturbed))


def ekeland_point(f: PLFunction, xbar, eps: float, lam: float,
                  probes: int = 1000, grid: Optional[GridSpec] = None) -> EkelandWitness:
    """Constructive Ekeland point for ``f`` near ``xbar``.

    Requires ``f(xbar) <= inf f(B(xbar, lam)) + eps`` (checked with the
    brute-force box minimizer). The returned point ``x_eps`` satisfies
    ``||x_eps - xbar|| <= lam``, ``f(x_eps) <= f(xbar)`` and minimizes
    ``y -> f(y) + (eps/lam) ||y - x_eps||`` over the ball.
    """
    if not eps > 0 or not lam > 0:
        raise ValueError("eps and lambda must be positive")
    xbar = as_point(xbar, f.dim)
    fbar = f(xbar)
    if not math.isfinite(fbar):
        raise DomainError("xbar is not in dom f")
    ball = Box.around(xbar, lam).intersect(f.domain)
    if ball is None:
        raise DomainError("the ball around xbar misses dom f")
    _, inf_ball = minimize_on_box(f, ball, grid or GridSpec.default(ball))
    if fbar > inf_ball + eps + 1e-12 * (1.0 + abs(fbar)):
        raise PreconditionSci(
            f"f(xbar) = {fbar} exceeds inf over the ball ({inf_ball}) plus eps = {eps}")
    for _ in range(4):
        ball = Box.around(xbar, lam).intersect(f.domain)
        x_eps, _ = minimize_exact(penalized(f, xbar, eps / lam, ball), ball)
        dist = float(_sup_dist(x_eps, xbar)[0])
        if dist < lam * (1 - 1e-12):
            break
        # on the sphere: the strict conclusion needs a slightly larger radius
        lam *= 1 + 1e-6
    gap = verify_ekeland(f, x_eps, xbar, eps, lam, probes)
    return EkelandWitness(
        x_eps=tuple(map(float, x_eps)), lam=float(lam), eps=float(eps),
        perturbed_min_gap=gap, xbar=tuple(map(float, xbar)), f_xbar=fbar,
        f_xeps=f(x_eps), distance=dist, probes=probes)


def mean_value_witness(f: PLFunction, x, xbar, lam: float) -> MVIWitness:
    """Point ``x0 = x + t0 (xbar - x)`` with ``lam <= f'(x0; xbar - x)`` and
    ``f(x0) <= f(x) + t0 lam``, ``t0 in [0, 1[``.

    ``t0`` is the smallest minimizer of ``t -> f(x + t(xbar - x)) - t lam``.
    """
    x = as_point(x, f.dim)
    xbar = as_point(xbar, f.dim)
    lam = float(lam)
    if not math.isfinite(lam):
        raise ValueError("lambda must be finite")
    fx = f(x)
    if not math.isfinite(fx):
        raise DomainError("x is not in dom f")
    fbar = f(xbar)
    if lam > fbar - fx + 1e-12 * (1.0 + abs(fx)):
        raise PreconditionLambda(f"lambda = {lam} > f(xbar) - f(x) = {fbar - fx}")
    prof = restrict_to_segment(f, x, xbar).tilt(lam)
    t0, _ = prof.minimize()
    if t0 >= 1.0 - KNOT_TOL:
        # g(0) <= g(1), so t = 0 also minimizes up to rounding
        t0 = 0.0
    x0 = x + t0 * (xbar - x)
    dd = directional_derivative(f, x0, xbar - x)
    return MVIWitness(t0=float(t0), x0=tuple(map(float, x0)), dd=dd, lam=lam,
                      x=tuple(map(float, x)), xbar=tuple(map(float, xbar)),
                      f_x=fx, f_x0=f(x0))


def find_enlarged_subgradient(f: PLFunction, xbar, d, lam: float, eps: float,
                              grid: GridSpec, tol: float = WITNESS_TOL,
                              prefer_toward=None, norm=2) -> SubgradientSample:
    """A member ``(x, f(x), x*)`` of the enlarged subdifferential with ``<x*, d> >= lam``.

    Such a member exists whenever ``lam < f'(xbar; d)``. Among qualifying
    samples the one with the largest ``<x*, d>`` is returned, or, when
    ``prefer_toward`` is given, the largest ``<x*, prefer_toward - x>``.
    """
    d = as_point(d, f.dim)
    samples = eps_enlargement(f, xbar, eps, grid, norm=norm)
    pairing = samples.pairings(d)
    ok = np.flatnonzero(pairing >= lam - tol)
    if len(ok) == 0:
        raise WitnessNotFound(
            f"no enlarged subgradient with <x*, d> >= {lam} at h = {grid.h}; refine the grid")
    if prefer_toward is None:
        score = pairing[ok]
    else:
        target = as_point(prefer_toward, f.dim)
        score = np.einsum("nd,nd->n", samples.xstars[ok], target - samples.xs[ok])
    return samples[int(ok[int(np.argmax(score))])]
