import numpy as np
import pytest

from subdiff_lab import (Box, GridSpec, PLFunction, PreconditionLambda, PreconditionSci,
                         ekeland_point, find_enlarged_subgradient, mean_value_witness)
from subdiff_lab.errors import WitnessNotFound
from subdiff_lab.variational import verify_ekeland

from conftest import pl


def test_ekeland_abs(absf):
    # |y| + 1.25 |y - 0.2| is smallest at y = 0.2 (value 0.2 against 0.25 at 0)
    w = ekeland_point(absf, 0.2, 0.5, 0.4)
    assert w.x_eps == pytest.approx((0.2,))
    assert w.check()


def test_ekeland_at_minimum(absf):
    w = ekeland_point(absf, 0.0, 0.1, 0.5)
    assert w.x_eps == (0.0,) and w.perturbed_min_gap <= 0


def test_ekeland_2d():
    f = pl([((1, 1), 0), ((1, -1), 0), ((-1, 1), 0), ((-1, -1), 0)])
    w = ekeland_point(f, [0.1, 0.1], 0.5, 0.5)
    assert np.allclose(w.x_eps, [0, 0])
    assert w.check()
    assert verify_ekeland(f, w.x_eps, [0.1, 0.1], 0.5, 0.5) <= 1e-9


def test_ekeland_precondition(absf):
    with pytest.raises(PreconditionSci):
        ekeland_point(absf, 0.9, 0.1, 1.0)
    with pytest.raises(ValueError):
        ekeland_point(absf, 0.0, -1, 1.0)


def test_mvi_examples(absf, max2):
    w = mean_value_witness(absf, 1, -2, 1)
    assert w.t0 == pytest.approx(1 / 3) and w.x0 == pytest.approx((0,))
    assert w.dd == pytest.approx(3) and w.check()
    w = mean_value_witness(PLFunction.affine([2]), 0, 1, 2)
    assert w.t0 == 0 and w.dd == pytest.approx(2) and w.check()
    w = mean_value_witness(max2, [1, 1], [-1, -1], -2)
    assert w.t0 == 0 and w.dd == pytest.approx(-2) and w.check()


def test_mvi_precondition(absf):
    with pytest.raises(PreconditionLambda):
        mean_value_witness(absf, 0, 0.5, 1.0)


def test_mvi_infinite_target():
    f = PLFunction.affine([1], 0, Box((-1,), (1,)))
    w = mean_value_witness(f, 0, 2, 5.0)
    assert w.check()


def test_enlarged_subgradient_examples(absf, kinked, twin_valleys):
    g = GridSpec(1 / 64, Box((-2,), (2,)))
    s = find_enlarged_subgradient(absf, 0, 1, 0.9, 0.25, g)
    assert s.x == (0.0,) and s.xstar == (1.0,)
    s = find_enlarged_subgradient(kinked, -1 / 3, 1, 1.5, 0.25, g)
    assert s.xstar == (2.0,)
    s = find_enlarged_subgradient(twin_valleys, 0, -1, 0.9, 0.25, g)
    assert s.xstar == (-1.0,)


def test_enlarged_subgradient_missing(absf):
    with pytest.raises(WitnessNotFound):
        find_enlarged_subgradient(absf, 0.5, 1, 1.5, 0.1, GridSpec(0.01, Box((-1,), (1,))))
