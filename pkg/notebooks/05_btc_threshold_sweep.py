# %% [markdown]
# # BTC across decision thresholds
#
# For each pair of thresholds pick the pool model with the best validation
# BTC and score it on held-out data. Cells with low BTC line up with
# thresholds at which one of the two models has poor accuracy.

# %%
import numpy as np

from rankcompat import pipeline
from rankcompat.data_io import SynthConfig, generate

data = generate(SynthConfig(n=8577, d=50, prevalence=0.15, class_separation=0.2, seed=0))
cand = pipeline.CandidateSpec(n_resample=9, n_shuffle=1)
grids = [pipeline.btc_sweep_replication(data, pipeline.SplitSpec(), cand,
                                        pipeline.derive_seed(0, r))
         for r in range(3)]
mean = pipeline.mean_btc_grid(grids)

# %%
low = ~mean.degenerate & (mean.btc < 0.5)
print("cells:", mean.btc.size, " BTC < 0.5:", int(low.sum()))
print("worse model's accuracy in those cells is at most",
      np.round(np.minimum(mean.acc_o, mean.acc_u)[low].max() if low.any() else np.nan, 3))

# %%
taus = mean.tau_o
show = [0, 5, 10, 15, 20, 27]
print("tau_o \\ tau_u " + " ".join(f"{taus[j]:5.2f}" for j in show))
for i in show:
    print(f"{taus[i]:12.2f}  " + " ".join(f"{mean.btc[i, j]:5.2f}" for j in show))
