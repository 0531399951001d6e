"""Why BinVal needs a tailored potential.

Counting one-bits is a poor progress measure on BinVal: from the point with
only the top bit set, most accepted moves clear that bit but set several
lower ones. We compute exact one-step drifts by enumerating every mutation
mask and compare three potentials.
"""

import numpy as np

from linear_ea import (
    build_adaptive_potential,
    build_refined_potential,
    exact_one_step_drift,
    identity_potential,
    make_family,
    potential_value,
)

n, p, alpha = 8, 2 / 8, 2.0
f = make_family("binval", n)
top = np.zeros(n, dtype=np.uint8)
top[-1] = 1

delta = p * (1 - p) ** (n - 1) * (1 - 1 / alpha)
print(f"p = {p}: required drift factor delta = {delta:.5f}")
for name, pot in [("identity", identity_potential(n)), ("adaptive", build_adaptive_potential(f, p, alpha))]:
    s = potential_value(pot, top)
    d = exact_one_step_drift(f, pot, top, p)
    print(f"{name:>9}: g(x)={s:9.4f}  drift={d:+.5f}  drift/g(x)={d / s:+.5f}")

# The refined potential is built for p = 1/n and needs drift factor 1/(e n).
q = 1 / n
pot = build_refined_potential(f)
s = potential_value(pot, top)
d = exact_one_step_drift(f, pot, top, q)
print(f"p = 1/n: required drift factor 1/(e n) = {1 / (np.e * n):.5f}")
print(f"  refined: g(x)={s:9.4f}  drift={d:+.5f}  drift/g(x)={d / s:+.5f}")

# The adaptive weights follow the weight ratios until they hit the cap gamma_i.
pot = build_adaptive_potential(f, p, alpha)
print("\n i   w_i   gamma_i      g_i")
for i in range(n):
    print(f"{i + 1:>2} {f.weights[i]:5.0f} {pot.cap[i]:9.4f} {pot.g[i]:8.4f}")
