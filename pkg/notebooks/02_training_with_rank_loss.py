# %% [markdown]
# # Training an update with the incompatibility loss
#
# Fit an original model on a small sample, then fit updates on a larger,
# shifted sample with different weights on the rank term.

# %%
import numpy as np

from rankcompat import metrics, pipeline
from rankcompat.data_io import SynthConfig, apply_shift, generate
from rankcompat.surrogate import rbc_soft
from rankcompat.trainer import TrainConfig, predict, train

data = generate(SynthConfig(n=6000, d=20, prevalence=0.2, class_separation=0.35, seed=1))
parts = pipeline.split(data, pipeline.SplitSpec(800, 3000), seed=2)
upd_dev, upd_val, ev = (apply_shift(getattr(parts, k), 0.5, seed=2)
                        for k in ("upd_dev", "upd_val", "eval"))
orig = pipeline.train_original(parts.orig_dev, parts.orig_val, pipeline.DEFAULT_REGS, seed=2)
o_ev = predict(orig, ev.features)
print("original eval AUROC", round(metrics.auroc(o_ev, ev.labels), 4))

# %% [markdown]
# `alpha = 1` is ordinary cross-entropy. Smaller values lean on the
# smoothed compatibility term.

# %%
print(" alpha  auroc    rbc  soft_rbc  epochs")
for alpha in (1.0, 0.7, 0.4, 0.0):
    cfg = TrainConfig(reg_l2=0.01, seed=3).replace(alpha=alpha)
    m = train(upd_dev, upd_val, orig, cfg)
    u = predict(m, ev.features)
    print(f"{alpha:6.1f} {metrics.auroc(u, ev.labels):6.4f} {metrics.rbc(o_ev, u, ev.labels):6.4f}"
          f"  {rbc_soft(o_ev, u, ev.labels):8.4f}  {m.metadata['epochs_run']:6d}")

# %% [markdown]
# The sharpness `s` sets how closely the smooth version tracks the exact one.

# %%
u = predict(train(upd_dev, upd_val, None, TrainConfig()), ev.features)
exact = metrics.rbc(o_ev, u, ev.labels)
for s in (1, 10, 100, 1000):
    print(f"s={s:<5} soft={rbc_soft(o_ev, u, ev.labels, s):.5f}  exact={exact:.5f}")
