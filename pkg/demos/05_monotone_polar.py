"""Polar of a sampled subdifferential graph, and the CSV export for plotting."""

from pathlib import Path

from subdiff_lab import (Box, GridSpec, check_absorbing, check_maximal_monotone,
                         check_monotone, parse_function, polar_samples, sample_subdiff_graph)
from subdiff_lab.monotone import default_dual_grid, primal_candidates

U = Box((-1,), (1,))
grid = GridSpec(0.25, U)

absf = parse_function("max(x, -x)")
T = sample_subdiff_graph(absf, grid)
print("graph samples of ∂|x|:", [(float(x[0]), float(s[0])) for x, s in T])

P = polar_samples(T, (primal_candidates(absf, grid), default_dual_grid(absf, grid.h).points()))
print("polar members:", len(P), " all on the graph:",
      all((x[0] > 0 and s[0] == 1) or (x[0] < 0 and s[0] == -1) or x[0] == 0 for x, s in P))

negabs = parse_function("min(x, -x)")
print("\n-|x| graph monotone?", check_monotone(sample_subdiff_graph(negabs, grid)))
print("-|x| absorbing:", check_absorbing(negabs, GridSpec(1 / 32, U)).to_dict())

kinked = parse_function("max(2*x + 1, -x)")
print("\nmax(2x+1, -x) maximal monotone:", check_maximal_monotone(kinked, GridSpec(1 / 32, U)))

out = Path("abs_polar.csv")
out.write_text(P.to_csv())
print("wrote", out)
