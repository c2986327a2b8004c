import numpy as np
import pytest

from subdiff_lab import (Box, BoundaryPoint, DomainError, GridSpec, IsActuallyOptimal,
                         PLFunction, Verdict, brute_force_is_min, directional_test,
                         minty_sufficient, refute_optimality, subdiff_contains,
                         subdiff_sufficient, subdiff_test)

from conftest import pl

U1 = Box((-1,), (1,))
U2 = Box.cube(-1, 1, 2)


@pytest.fixture
def valleys():
    # min(|x|, |x - 2| + 0.5)
    return pl([((1,), 0), ((-1,), 0)], [((1,), -1.5), ((-1,), 2.5)])


def test_brute_force(absf, valleys):
    assert brute_force_is_min(absf, U1, 0)
    assert not brute_force_is_min(absf, U1, 0.5)
    assert brute_force_is_min(valleys, Box((-1,), (3,)), 0)
    with pytest.raises(DomainError):
        brute_force_is_min(absf, U1, 2)


def test_directional_test(absf, valleys):
    rep = directional_test(absf, U1, 0)
    assert rep.verdict is Verdict.OPTIMAL and not rep.violations
    rep = directional_test(absf, U1, 0.5)
    assert rep.verdict is Verdict.NOT_OPTIMAL
    hit = [v for v in rep.violations if v.y == pytest.approx((0.25,))]
    assert hit and hit[0].evidence == pytest.approx(0.25)
    assert directional_test(valleys, Box((-1,), (3,)), 0).verdict is Verdict.OPTIMAL


def test_minty(absf):
    assert minty_sufficient(absf, U1, 0)
    assert not minty_sufficient(absf, U1, 0.5)
    assert minty_sufficient(PLFunction.affine([0], 0), U1, 0.3)


def test_subdiff_test(absf, max2):
    assert subdiff_test(absf, U1, 0).verdict is Verdict.OPTIMAL
    rep = subdiff_test(absf, U1, 0.5, GridSpec(0.1, U1))
    assert rep.verdict is Verdict.NOT_OPTIMAL
    hit = [v for v in rep.violations if v.y == pytest.approx((0.2,), abs=1e-9)]
    assert hit and hit[0].evidence == pytest.approx(0.3)
    rep = subdiff_test(max2, U2, [0, 0], GridSpec(1 / 16, U2))
    assert rep.verdict is Verdict.NOT_OPTIMAL
    assert any(v.y == pytest.approx((-0.5, -0.5)) for v in rep.violations)


def test_subdiff_test_needs_interior(absf):
    with pytest.raises(BoundaryPoint):
        subdiff_test(absf, U1, 1.0)


def test_subdiff_sufficient(absf):
    assert subdiff_sufficient(absf, U1, 0)
    assert not subdiff_sufficient(absf, U1, 0.5)
    assert subdiff_sufficient(PLFunction.affine([0], 3), U1, -0.4)


def test_report_json(absf):
    d = subdiff_test(absf, U1, 0.5).to_dict()
    assert d["verdict"] == "NotOptimal" and d["check"] == "subdifferential test"
    assert d["n_violations"] >= len(d["violations"])


def test_refute_1d(absf):
    w = refute_optimality(absf, U1, 0.5)
    assert 0 <= w.y_eps[0] < 0.5
    assert w.ystar_eps == (1.0,)
    assert w.inner == pytest.approx(0.5 - w.y_eps[0]) and w.inner > 0
    assert w.f_yeps < 0.5


def test_refute_2d(max2):
    xbar = np.array([0.5, 0.5])
    w = refute_optimality(max2, U2, xbar, GridSpec(1 / 16, U2))
    y, ys = np.array(w.y_eps), np.array(w.ystar_eps)
    assert max2(y) < max2(xbar) and ys @ (xbar - y) > 0
    assert subdiff_contains(max2, y, ys)


def test_refute_optimal_point(absf):
    with pytest.raises(IsActuallyOptimal):
        refute_optimality(absf, U1, 0)
