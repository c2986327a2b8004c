import math

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from subdiff_lab import (Box, DimensionMismatch, DomainError, GridSpec, PLFunction,
                         evaluate, minimize_exact, minimize_on_box, restrict_to_segment)
from subdiff_lab.errors import EmptyDomainOnSegment
from subdiff_lab.instances import random_instance, rng_for
from subdiff_lab.plfunc import lattice, minimize_on_segment


def test_evaluate_basic(absf, twin_valleys):
    assert evaluate(absf, 0.5) == 0.5
    assert evaluate(absf.with_domain(Box((0,), (1,))), 2) == math.inf
    assert evaluate(twin_valleys, 0) == 1


def test_dimension_mismatch(absf):
    with pytest.raises(DimensionMismatch):
        absf([1.0, 2.0])


def test_values_vectorized_matches_scalar(max2):
    X = lattice(Box.cube(-1, 1, 2), 0.25)
    assert np.array_equal(max2.values(X), [max2(x) for x in X])


def test_profile_breakpoint(absf):
    prof = restrict_to_segment(absf, [-1], [2])
    assert np.allclose(prof.breakpoints, [1 / 3])
    assert np.allclose(prof.slopes, [-3, 3])


def test_profile_affine_has_no_breakpoints():
    prof = restrict_to_segment(PLFunction.affine([3], 2), [0], [1])
    assert len(prof.breakpoints) == 0
    assert np.allclose(prof.slopes, [3])


def test_profile_domain_interval():
    f = PLFunction.affine([1], 0, Box((0,), (1,)))
    prof = restrict_to_segment(f, [-1], [2])
    lo, hi = prof.finite_interval
    assert lo == pytest.approx(1 / 3) and hi == pytest.approx(2 / 3)
    assert prof(0.1) == math.inf and prof(0.5) == pytest.approx(0.5)


def test_profile_empty_segment():
    f = PLFunction.affine([1], 0, Box((0,), (1,)))
    with pytest.raises(EmptyDomainOnSegment):
        minimize_on_segment(f, [2], [3])


def test_minimize_on_segment(absf):
    t, v = minimize_on_segment(absf, [-1], [2])
    assert t == pytest.approx(1 / 3) and v == pytest.approx(0)
    t, v = minimize_on_segment(PLFunction.affine([3], 2), [0], [1])
    assert (t, v) == (0, 2)


def test_tilted_profile(absf):
    # g(t) = |1 - 3t| - t on [0, 1]
    prof = restrict_to_segment(absf, [1], [-2]).tilt(1.0)
    t, v = prof.minimize()
    assert t == pytest.approx(1 / 3) and v == pytest.approx(-1 / 3)


def test_minimize_on_box_examples(absf, twin_valleys, max2):
    x, v = minimize_on_box(absf, Box((-1,), (1,)))
    assert x[0] == pytest.approx(0) and v == pytest.approx(0)
    x, v = minimize_on_box(twin_valleys, Box((-3,), (3,)))
    assert x[0] == pytest.approx(-1) and v == pytest.approx(0)
    x, v = minimize_on_box(max2, Box.cube(-1, 1, 2))
    assert np.allclose(x, [-1, -1]) and v == pytest.approx(-1)


def test_minimize_on_box_empty_region():
    f = PLFunction.affine([1], 0, Box((0,), (1,)))
    with pytest.raises(DomainError):
        minimize_on_box(f, Box((2,), (3,)))


def test_box_text_and_contains():
    b = Box((-1, 0), (1, 2.5))
    assert b.text() == "box(-1,1; 0,2.5)"
    assert b.contains([[0, 1], [2, 1]]).tolist() == [True, False]
    assert b.contains_interior([[-1, 1]]).tolist() == [False]
    assert b.intersect(Box((5, 5), (6, 6))) is None


def test_subtract_linear_and_scale(absf):
    g = absf.subtract_linear([0.5])
    assert g(2.0) == pytest.approx(1.0)
    assert absf.scaled(3)(-1) == 3
    with pytest.raises(ValueError):
        absf.scaled(-1)


def test_grid_default_spacing():
    g = GridSpec.default(Box.cube(-1, 1, 2))
    assert g.h == pytest.approx(1 / 32)
    assert len(g.points()) == 65 ** 2


@settings(max_examples=40, deadline=None)
@given(seed=st.integers(0, 10_000), dim=st.integers(1, 2), convex=st.booleans())
def test_minimize_on_box_beats_lattice(seed, dim, convex):
    rng = rng_for(seed)
    f = random_instance(rng, dim, convex, 4)
    region = Box.cube(-1, 1, dim)
    grid = GridSpec(1 / 16, region)
    _, v = minimize_on_box(f, region, grid)
    assert v <= f.values(grid.points()).min() + 1e-12


@settings(max_examples=40, deadline=None)
@given(seed=st.integers(0, 10_000), dim=st.integers(1, 3))
def test_exact_minimum_is_global(seed, dim):
    rng = rng_for(seed)
    f = random_instance(rng, dim, bool(seed % 2), 3)
    region = Box.cube(-1, 1, dim)
    x, v = minimize_exact(f, region)
    assert region.contains(x[None, :])[0]
    assert f(x) == pytest.approx(v, abs=1e-9)
    probe = lattice(region, 1 / 8 if dim < 3 else 1 / 4)
    assert v <= f.values(probe).min() + 1e-9


@settings(max_examples=40, deadline=None)
@given(seed=st.integers(0, 10_000))
def test_profile_matches_pointwise(seed):
    rng = rng_for(seed)
    f = random_instance(rng, 2, False, 4)
    a, b = rng.uniform(-1, 1, (2, 2))
    prof = restrict_to_segment(f, a, b)
    for t in np.linspace(0, 1, 33):
        assert prof(t) == pytest.approx(f(a + t * (b - a)), abs=1e-9)
