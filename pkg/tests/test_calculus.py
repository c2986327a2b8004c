import math

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from subdiff_lab import (Box, BoundaryPoint, DomainError, EmptyEnlargement, GridSpec,
                         PLFunction, Polytope, SubgradientSample, directional_derivative,
                         eps_enlargement, subdiff_contains, subdifferential, sup_support,
                         verify_link)
from subdiff_lab.calculus import directional_derivatives
from subdiff_lab.instances import random_instance, rng_for

from conftest import pl


def test_directional_derivative_examples(absf, twin_valleys):
    assert directional_derivative(absf, 0, 1) == 1
    assert directional_derivative(PLFunction.affine([3], 2), 0.7, -2) == pytest.approx(-6)
    assert directional_derivative(twin_valleys, 0, 1) == pytest.approx(-1)


def test_directional_derivative_matches_difference_quotient(twin_valleys):
    quotients = [(twin_valleys(2.0 ** -k) - twin_valleys(0.0)) / 2.0 ** -k for k in range(5, 21)]
    assert np.allclose(quotients, -1)


def test_directional_derivative_outside_domain():
    f = PLFunction.affine([1], 0, Box((0,), (1,)))
    with pytest.raises(DomainError):
        directional_derivative(f, 2, 1)
    assert directional_derivative(f, 1, 1) == math.inf
    assert directional_derivative(f, 1, -1) == -1


def test_subdifferential_examples(absf, kinked, max2):
    assert subdifferential(absf, 0).as_list() == [[-1.0], [1.0]]
    assert subdifferential(kinked, -1 / 3).as_list() == [[-1.0], [2.0]]
    assert subdifferential(max2, [0, 0]).as_list() == [[0.0, 1.0], [1.0, 0.0]]


def test_subdifferential_vertices_satisfy_definition(kinked):
    ys = np.linspace(-2, 2, 401)
    for v in subdifferential(kinked, -1 / 3).vertices[:, 0]:
        assert np.all(v * (ys + 1 / 3) + kinked(-1 / 3) <= kinked.values(ys[:, None]) + 1e-12)


def test_subdifferential_boundary_point():
    f = PLFunction.affine([1], 0, Box((0,), (1,)))
    with pytest.raises(BoundaryPoint):
        subdifferential(f, 1)


def test_nonconvex_1d_clarke_interval():
    negabs = pl([((1,), 0)], [((-1,), 0)])
    assert subdifferential(negabs, 0).as_list() == [[-1.0], [1.0]]


def test_subdiff_contains_examples(absf, kinked):
    assert subdiff_contains(absf, 0, 0.5)
    assert not subdiff_contains(absf, 0, 2)
    assert subdiff_contains(kinked, 0.5, 2)
    assert not subdiff_contains(kinked, 0.5, 1.9)


def test_enlargement_smooth_region(absf):
    S = eps_enlargement(absf, 0.5, 0.1, GridSpec(0.01, Box((-1,), (1,))))
    assert len(S) > 1
    assert np.all(S.xstars == 1)


def test_enlargement_contains_center(absf):
    S = eps_enlargement(absf, 0, 1e-3, GridSpec(0.01, Box((-1,), (1,))))
    assert S.contains_sample(SubgradientSample((0.0,), 0.0, (-1.0,)))
    assert S.contains_sample(SubgradientSample((0.0,), 0.0, (1.0,)))


def test_enlargement_reaches_far_kink(absf):
    S = eps_enlargement(absf, 0.5, 0.75, GridSpec(0.01, Box((-1,), (1,))))
    assert S.contains_sample(SubgradientSample((0.0,), 0.0, (-1.0,)), atol=1e-12)
    assert sup_support(S, -1) == pytest.approx(1)


def test_sup_support_polytopes():
    assert sup_support(Polytope([[-1], [1]]), 1) == 1
    assert sup_support(Polytope([[1, 0], [0, 1]]), [1, 1]) == 1
    with pytest.raises(EmptyEnlargement):
        sup_support([], 1)


def test_polytope_projection():
    P = Polytope([[0, 0], [1, 0], [0, 1]])
    assert P.distance([1, 1]) == pytest.approx(math.sqrt(0.5))
    assert P.contains([0.2, 0.2])
    assert np.allclose(P.translate([1, 1]).vertices.min(axis=0), [1, 1])


def test_link_examples(absf, twin_valleys):
    rep = verify_link(absf, 0, 1)
    assert rep.passed and rep.fprime == 1
    assert all(row["sup"] == 1 for row in rep.schedule)
    assert rep.convex_equal == 0
    assert verify_link(PLFunction.affine([1]), 0, 1).passed
    rep = verify_link(twin_valleys, 0, 1, grid=GridSpec(1 / 32, Box((-2,), (2,))))
    assert rep.passed and rep.fprime == pytest.approx(-1)
    assert rep.to_dict()["pass"] is True


def test_link_rejects_bad_schedule(absf):
    with pytest.raises(ValueError):
        verify_link(absf, 0, 1, eps_schedule=(0.1, 0.5))
    with pytest.raises(ValueError):
        verify_link(absf, 0, 0)


@settings(max_examples=50, deadline=None)
@given(seed=st.integers(0, 10_000), dim=st.integers(1, 3))
def test_dd_is_support_of_subdifferential_for_convex(seed, dim):
    rng = rng_for(seed)
    f = random_instance(rng, dim, True, 5)
    x = rng.uniform(-1, 1, dim)
    d = rng.normal(size=dim)
    assert directional_derivative(f, x, d) == pytest.approx(
        subdifferential(f, x).support(d), abs=1e-9)


@settings(max_examples=50, deadline=None)
@given(seed=st.integers(0, 10_000), dim=st.integers(1, 2))
def test_dd_matches_finite_difference(seed, dim):
    rng = rng_for(seed)
    f = random_instance(rng, dim, False, 4)
    x = rng.uniform(-1, 1, dim)
    d = rng.normal(size=dim)
    t = 1e-7
    fd = (f(x + t * d) - f(x)) / t
    assert directional_derivative(f, x, d) == pytest.approx(fd, abs=1e-5)


@settings(max_examples=30, deadline=None)
@given(seed=st.integers(0, 10_000))
def test_vectorized_dd_agrees_with_profile(seed):
    rng = rng_for(seed)
    f = random_instance(rng, 2, False, 4)
    X = rng.uniform(-1, 1, (20, 2))
    D = rng.normal(size=(20, 2))
    vec = directional_derivatives(f, X, D)
    assert np.allclose(vec, [directional_derivative(f, x, d) for x, d in zip(X, D)], atol=1e-9)


def test_stability_under_linear_shift(kinked):
    g = kinked.subtract_linear([0.5])
    assert np.allclose(subdifferential(g, -1 / 3).vertices,
                       subdifferential(kinked, -1 / 3).translate([-0.5]).vertices)
