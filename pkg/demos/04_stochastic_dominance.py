"""OneMax is the easiest linear function.

Runtime CDFs of the (1+1) EA on OneMax lie above those on other linear
functions. We check this with a one-sided DKW band and print a few CDF
values.
"""

import numpy as np

from linear_ea import Cell, dominance_test, simulate
from linear_ea.experiments import runtimes

n, reps = 40, 4000
samples = {}
for name, spec in [("onemax", {"kind": "onemax"}), ("binval", {"kind": "binval"}),
                   ("random-exp", {"kind": "random-exponential", "seed": 5})]:
    T, _ = runtimes(simulate(Cell(spec, n, p=1 / n), reps))
    samples[name] = T

for t in (200, 300, 400, 600):
    row = "  ".join(f"{k}: {np.mean(v <= t):.3f}" for k, v in samples.items())
    print(f"P(T <= {t}):  {row}")

for other in ("binval", "random-exp"):
    r = dominance_test(samples["onemax"], samples[other], 0.99)
    print(f"onemax <=st {other}: {'not refuted' if r.passed else 'refuted'} "
          f"(min CDF gap {r.worst_gap:+.4f}, band {r.epsilon:.4f})")
