"""OneMax: exact expected runtime versus simulation.

On OneMax only the number of one-bits matters, so the (1+1) EA collapses
to a chain on {0, ..., n}. We solve that chain exactly and compare it with
Monte Carlo runs of the bit-level algorithm.
"""

import math

from linear_ea import Cell, simulate, solve_onemax_chain, summarize

n = 40
p = 1 / n

chain = solve_onemax_chain(n, p)
print(f"exact expected runtime, n={n}, p=1/n: {chain.mean_runtime:.2f}")

# Expected mutation steps from each ones-count; the last few states dominate.
for i in (1, 2, 5, 10, 20, n):
    print(f"  E[steps | {i:>2} ones] = {chain.expected_steps[i]:8.2f}")

cell = Cell({"kind": "onemax"}, n, p=p)
s = summarize(cell, simulate(cell, 5000))
print(f"simulated mean over {s.reps} runs: {s.mean:.2f} +- {s.se:.2f}")
print(f"difference in standard errors: {(s.mean - chain.mean_runtime) / s.se:+.2f}")

# The runtime grows like e n ln n; the ratio creeps towards e from below.
for m in (10, 100, 1000):
    ratio = solve_onemax_chain(m, 1 / m).mean_runtime / (m * math.log(m))
    print(f"  n={m:>4}: E[T] / (n ln n) = {ratio:.3f}   (e = {math.e:.3f})")
