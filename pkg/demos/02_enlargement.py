"""Enlarged subdifferentials bound the directional derivative from above.

For every eps the sup of <x*, d> over the enlargement dominates f'(x; d);
for convex f the two agree as eps shrinks.
"""

from subdiff_lab import Box, GridSpec, eps_enlargement, parse_function, verify_link

absf = parse_function("max(x, -x)")
grid = GridSpec(0.01, Box((-1,), (1,)))

for eps in (0.1, 0.75):
    S = eps_enlargement(absf, 0.5, eps, grid)
    print(f"eps = {eps}: {len(S)} samples, slopes seen {sorted(set(S.xstars[:, 0].tolist()))}")

rep = verify_link(absf, 0.5, [-1], grid=grid)
print("\nf'(0.5; -1) =", rep.fprime)
for row in rep.schedule:
    print(f"  eps {row['eps']:<9.6g} sup {row['sup']:+.3f} over {row['count']} samples")

# nonconvex: the bound still holds, with slack
valleys = parse_function("min(abs(x - 1), abs(x + 1))")
rep = verify_link(valleys, 0, [1], grid=GridSpec(1 / 32, Box((-2,), (2,))))
print("\nvalleys: f'(0; 1) =", rep.fprime, " pass:", rep.passed)
print("  sup per eps:", [round(r["sup"], 3) for r in rep.schedule])
