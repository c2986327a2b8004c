"""Constructive Ekeland points and mean value witnesses."""

from subdiff_lab import ekeland_point, mean_value_witness, parse_function

absf = parse_function("max(x, -x)")

# |y| + 1.25 |y - 0.2| is smallest at y = 0.2 itself
w = ekeland_point(absf, 0.2, eps=0.5, lam=0.4)
print("Ekeland point:", w.x_eps, " valid:", w.check(), " probe gap:", w.perturbed_min_gap)

l1 = parse_function("abs(x1) + abs(x2)")
w = ekeland_point(l1, [0.1, 0.1], eps=0.5, lam=0.5)
print("Ekeland point for |x1| + |x2|:", w.x_eps)

# g(t) = |1 - 3t| - t is minimal at t = 1/3
w = mean_value_witness(absf, 1, -2, 1.0)
print("\nmean value witness: t0 =", w.t0, " x0 =", w.x0, " f'(x0; xbar - x) =", w.dd)
print("  residuals:", w.slope_residual, w.value_residual)
