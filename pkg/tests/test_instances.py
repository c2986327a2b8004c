import numpy as np
import pytest

from subdiff_lab import Box, generate_instance, format_function


def test_deterministic():
    a = generate_instance(0, 1, True, 2)
    b = generate_instance(0, 1, True, 2)
    assert format_function(a) == format_function(b)
    assert format_function(generate_instance(1, 1, True, 2)) != format_function(a)


def test_streams_differ():
    a = generate_instance(0, 2, False, 3, stream=1)
    b = generate_instance(0, 2, False, 3, stream=2)
    assert format_function(a) != format_function(b)


def test_shape_and_coefficients():
    f = generate_instance(5, 2, False, 4)
    assert 2 <= len(f.components) <= 3
    assert all(len(c.pieces) == 4 for c in f.components)
    G = f.gradients()
    assert np.all(np.abs(G) <= 4) and np.all(G * 16 == np.round(G * 16))
    assert f.domain == Box.cube(-2, 2, 2)
    x = np.array([0.3, -1.2])
    direct = min(max(float(np.dot(p.gradient, x)) + p.offset for p in c.pieces)
                 for c in f.components)
    assert f(x) == direct


def test_convex_single_component():
    f = generate_instance(0, 1, True, 2)
    assert f.is_convex and f.n_pieces == 2


def test_pieces_range():
    with pytest.raises(ValueError):
        generate_instance(0, 1, True, 1)
    with pytest.raises(ValueError):
        generate_instance(0, 1, True, 17)
