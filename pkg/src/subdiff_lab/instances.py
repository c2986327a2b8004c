"""Seeded random PL instances.

Every random draw comes from numpy's PCG64 seeded through
``SeedSequence([seed, stream, index])``, so one suite seed fans out into
independent, reproducible streams per criterion and per instance.
"""

from __future__ import annotations

import numpy as np

from .plfunc import AffinePiece, Box, MaxAffine, PLFunction

COEF_RANGE = 4.0
COEF_STEP = 1.0 / 16
DOMAIN = (-2.0, 2.0)


def rng_for(seed: int, stream: int = 0, index: int = 0) -> np.random.Generator:
    return np.random.Generator(np.random.PCG64(np.random.SeedSequence([seed, stream, index])))


def _coefs(rng: np.random.Generator, shape) -> np.ndarray:
    k = int(COEF_RANGE / COEF_STEP)
    return rng.integers(-k, k + 1, size=shape) * COEF_STEP


def _max_affine(rng, dim: int, pieces: int) -> MaxAffine:
    G = _coefs(rng, (pieces, dim))
    b = _coefs(rng, pieces)
    return MaxAffine(tuple(AffinePiece(g, float(c)) for g, c in zip(G, b)))


def random_instance(rng: np.random.Generator, dim: int, convex: bool, pieces: int) -> PLFunction:
    if not 2 <= pieces <= 16:
        raise ValueError("pieces must lie in [2, 16]")
    n_comp = 1 if convex else int(rng.integers(2, 4))
    comps = tuple(_max_affine(rng, dim, pieces) for _ in range(n_comp))
    return PLFunction(comps, Box.cube(*DOMAIN, dim))


def generate_instance(seed: int, dim: int, convex: bool, pieces: int,
                      stream: int = 0, index: int = 0) -> PLFunction:
    """Max-affine (convex) or min of 2-3 max-affines, each with ``pieces`` pieces.

    Coefficients lie in [-4, 4] on a 1/16 grid; the domain is [-2, 2]^dim.
    """
    return random_instance(rng_for(seed, stream, index), dim, convex, pieces)
