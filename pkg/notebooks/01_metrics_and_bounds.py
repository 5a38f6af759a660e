# %% [markdown]
# # Pair-counting metrics and the compatibility lower bound
#
# Two risk models scored on the same patients. We count how each model
# orders the (negative, positive) patient-pairs and how the orderings overlap.

# %%
import numpy as np

from rankcompat import metrics

labels = np.array([0, 0, 0, 1, 1, 1, 0, 1])
orig = np.array([0.10, 0.35, 0.20, 0.60, 0.30, 0.80, 0.55, 0.45])
upd = np.array([0.05, 0.40, 0.15, 0.70, 0.50, 0.75, 0.35, 0.30])

print("AUROC original:", metrics.auroc(orig, labels))
print("AUROC updated: ", metrics.auroc(upd, labels))

# %% [markdown]
# The joint table splits every pair by whether each model ranks it correctly.

# %%
pop = metrics.pop_table(orig, upd, labels)
for k, v in pop.as_dict().items():
    print(f"{k:>6} {v}")
print("RBC:", metrics.rbc(orig, upd, labels))

# %% [markdown]
# BTC works on thresholded labels instead of rankings, and it is not symmetric.

# %%
print("BTC(orig -> upd):", metrics.btc(orig, upd, labels, 0.5, 0.5))
print("BTC(upd -> orig):", metrics.btc(upd, orig, labels, 0.5, 0.5))

# %% [markdown]
# When the update is at least as good as the original, RBC cannot fall below
# `(auroc_o + auroc_u - 1) / auroc_o`. Sample random pairs and compare.

# %%
rng = np.random.default_rng(0)
rows = []
while len(rows) < 2000:
    n = 40
    y = rng.integers(0, 2, n)
    if y.min() == y.max():
        continue
    o = np.clip(rng.normal(0.4 + 0.2 * y, 0.2), 0, 1)
    u = np.clip(rng.normal(0.4 + 0.25 * y, 0.2), 0, 1)
    p = metrics.pop_table(o, u, y)
    if metrics.in_regime(p.auroc_o, p.auroc_u):
        rows.append((p.auroc_o, p.auroc_u, metrics.rbc_from_pop(p),
                     metrics.bounds(p.auroc_o, p.auroc_u).rbc_lower))
rows = np.array(rows)
slack = rows[:, 2] - rows[:, 3]
print(f"{len(rows)} pairs, min slack above the bound {slack.min():.1e}, "
      f"median {np.median(slack):.4f}")

# %% [markdown]
# Ordinal labels use the general form: every pair with a lower label on the
# left counts.

# %%
print(metrics.rbc_general([0.1, 0.5, 0.9], [0.2, 0.9, 0.5], [0, 1, 2]))
