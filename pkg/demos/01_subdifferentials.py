"""Subdifferentials of a few small PL functions, printed next to hand values."""

import numpy as np

from subdiff_lab import (directional_derivative, parse_function, restrict_to_segment,
                         subdifferential)

# |x| has a fan of slopes at the origin
absf = parse_function("max(x, -x)")
print("∂|x|(0)   =", subdifferential(absf, 0).as_list())
print("f'(0; 1)  =", directional_derivative(absf, 0, 1))
print("f'(0; -1) =", directional_derivative(absf, 0, -1))

# a kink away from the origin
f = parse_function("max(2*x + 1, -x)")
print("\n∂f(-1/3) for max(2x+1, -x):", subdifferential(f, -1 / 3).as_list())

# restricting to a segment gives the exact breakpoints
prof = restrict_to_segment(absf, [-1], [2])
print("breakpoints of |x| on [-1, 2]:", prof.breakpoints, "slopes:", prof.slopes)

# nonconvex: two valleys; the derivative to the right of 0 is -1
valleys = parse_function("min(abs(x - 1), abs(x + 1))")
ts = 2.0 ** -np.arange(5, 21)
quotients = (valleys.values(ts[:, None]) - valleys(0)) / ts
print("\ndifference quotients at 0:", np.unique(np.round(quotients, 12)))
print("exact f'(0; 1):", directional_derivative(valleys, 0, 1))
print("Clarke interval at 0:", subdifferential(valleys, 0).as_list())

# 2D corner
m = parse_function("max(x1, x2)")
print("\n∂max(x1, x2)(0, 0):", subdifferential(m, [0, 0]).as_list())
