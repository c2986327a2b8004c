"""Optimality tests, sufficient conditions and refutation witnesses."""

import numpy as np

from subdiff_lab import (Box, GridSpec, directional_test, minty_sufficient, parse_function,
                         refute_optimality, subdiff_test)

absf = parse_function("max(x, -x)")
U = Box((-1,), (1,))

for xbar in (0.0, 0.5):
    rep = directional_test(absf, U, xbar)
    print(f"directional test at {xbar}: {rep.verdict.value}, "
          f"{len(rep.violations)} violations of {rep.checked_points} points")
    print("  Minty condition holds:", minty_sufficient(absf, U, xbar))

rep = subdiff_test(absf, U, 0.5, GridSpec(0.1, U))
for v in rep.violations[:3]:
    print(f"  y = {v.y[0]:+.2f}: f(y) = {v.fy:.2f}, sup <∂f(y), xbar - y> = {v.evidence:.2f}")

# the witness pipeline: brute-force lower point, mean value point, enlargement
w = refute_optimality(absf, U, 0.5)
print("\nwitness for |x| at 0.5:")
print("  y =", w.y_eps, " y* =", w.ystar_eps, " <y*, xbar - y> =", w.inner)

m = parse_function("max(x1, x2)")
U2 = Box.cube(-1, 1, 2)
xbar = np.array([0.5, 0.5])
w = refute_optimality(m, U2, xbar, GridSpec(1 / 16, U2))
print("witness for max(x1, x2) at (0.5, 0.5):")
print("  y =", w.y_eps, " y* =", w.ystar_eps, " f(y) =", w.f_yeps, " inner =", w.inner)
