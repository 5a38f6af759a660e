# %% [markdown]
# # How many pair assignments give each compatibility level
#
# Fix the number of pairs each model ranks correctly. The number of ways to
# place the shared correct pairs is a hypergeometric numerator, sharply peaked.

# %%
import math

import numpy as np

from rankcompat.combinatorics import PairCountTriple, k_star, log_nu, nu, nu_curve

t = PairCountTriple(4, 2, 2)
print("toy counts:", [nu(t, k) for k in range(3)], "sum", sum(nu(t, k) for k in range(3)),
      "=", math.comb(4, 2))

# %%
for c in nu_curve(0.65, [0.65, 0.75, 0.85, 0.95], 400):
    probs = np.exp(c.log_count - np.logaddexp.reduce(c.log_count))
    near = probs[np.abs(c.rbc - c.peak_rbc) <= 0.05].sum()
    print(f"auroc_u={c.auroc_u:.2f}  k*={c.k_star}  peak RBC={c.peak_rbc:.4f}  "
          f"share within 0.05 of the peak={near:.4f}")

# %% [markdown]
# The peak position matches the closed form for the hypergeometric mode.

# %%
rng = np.random.default_rng(0)
for _ in range(5):
    m = int(rng.integers(50, 1000))
    t = PairCountTriple(m, int(rng.integers(0, m + 1)), int(rng.integers(0, m + 1)))
    lo, hi = t.k_range
    ks = np.arange(lo, hi + 1)
    print(t, "argmax", ks[np.argmax(log_nu(t, ks))], "closed form", k_star(t))
