"""How the mutation probability shapes the runtime.

For p = c/n the expected runtime behaves like (e^c/c) n ln n, which is
smallest at c = 1. Far beyond ln(n)/n the runtime explodes; we see the
step cap being hit.
"""

import math

from linear_ea import exact_optimal_c, phase_transition_scan

n = 100
grid = [0.25, 0.5, 0.75, 1, 1.25, 1.5, 2, 3]
exact = exact_optimal_c(n, grid)
print(f"exact OneMax runtimes at n={n}")
for row in exact["rows"]:
    c = row["c"]
    predicted = math.exp(c) / c * n * math.log(n)
    print(f"  c={c:<5g} E[T]={row['mean']:9.1f}   (e^c/c) n ln n = {predicted:9.1f}")
print(f"best on the grid: c = {exact['argmin']:g}")
# The leading term is minimized at c = 1, but at n = 100 the lower-order
# terms still move the exact optimum slightly above 1.

# A small cap keeps this quick; the large-m runs all time out.
rows = phase_transition_scan(n, [0.5, 1, 2, 3, 5], reps=10, cap=200_000)
print("\nphase transition (cap 2e5 mutation steps)")
for r in rows:
    med = "capped" if r["median"] is None else f"{r['median']:.0f}"
    print(f"  p = {r['m']:g} ln(n)/n = {r['p']:.4f}: median {med:>8}, capped {r['capped_frac']:.0%}")
