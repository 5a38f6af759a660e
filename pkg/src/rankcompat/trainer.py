"""Mini-batch SGD for L2-regularised logistic regression.

``alpha == 1`` is plain cross-entropy training. For ``alpha < 1`` the
incompatibility loss against a frozen original model is added, computed
over the patient-pairs inside each mini-batch.
"""

from __future__ import annotations

import dataclasses
import logging

import numpy as np
from scipy.special import expit

from rankcompat.errors import DimensionMismatch, InvalidConfig, MissingOriginal
from rankcompat.structures import Dataset, RiskModel
from rankcompat.surrogate import SurrogateConfig, _gradient, objective_total

log = logging.getLogger(__name__)


@dataclasses.dataclass(frozen=True)
class TrainConfig:
    surrogate: SurrogateConfig = SurrogateConfig()
    reg_l2: float = 0.01
    learning_rate: float = 0.05
    batch_size: int = 64
    max_epochs: int = 200
    patience: int = 5
    seed: int = 0

    def __post_init__(self):
        if self.reg_l2 < 0:
            raise InvalidConfig("reg_l2 must be non-negative")
        if not self.learning_rate > 0:
            raise InvalidConfig("learning_rate must be positive")
        if self.batch_size < 1 or self.max_epochs < 1 or self.patience < 1:
            raise InvalidConfig("batch_size, max_epochs and patience must be positive")
        if self.surrogate.alpha < 1.0 and self.batch_size < 2:
            raise InvalidConfig("batch_size must be at least 2 when alpha < 1")
        if self.patience > self.max_epochs:
            raise InvalidConfig("patience cannot exceed max_epochs")

    @property
    def alpha(self) -> float:
        return self.surrogate.alpha

    def replace(self, **changes) -> "TrainConfig":
        """Copy with fields replaced; ``alpha`` and ``s`` reach into the surrogate."""
        sur = {k: changes.pop(k) for k in ("alpha", "s") if k in changes}
        if sur:
            changes["surrogate"] = dataclasses.replace(self.surrogate, **sur)
        return dataclasses.replace(self, **changes)


def predict(model: RiskModel, features) -> np.ndarray:
    """Risk estimates ``logistic(features @ w + b)``."""
    x = model.check_features(features)
    return expit(x @ model.weights + model.intercept)


def train(dev: Dataset, val: Dataset, orig: RiskModel | None,
          cfg: TrainConfig, history: list | None = None) -> RiskModel:
    """Fit a model on ``dev``, early-stopping on the objective over ``val``.

    Parameters start at zero. Each epoch visits ``dev`` in a fresh random
    order; after every mini-batch step the weights (not the intercept) are
    shrunk by the closed-form proximal step of ``reg_l2 * ||w||^2``, which
    stays stable for any penalty. The returned parameters are the epoch-end
    snapshot with the lowest validation objective.

    ``orig`` is only consulted when ``cfg.alpha < 1``. If ``history`` is a
    list, each epoch's validation objective is appended to it.
    """
    if dev.d != val.d:
        raise DimensionMismatch(f"dev has {dev.d} features, val has {val.d}")
    alpha = cfg.alpha
    if alpha < 1.0:
        if orig is None:
            raise MissingOriginal("an original model is required when alpha < 1")
        if orig.d != dev.d:
            raise DimensionMismatch(
                f"original model has {orig.d} features, data has {dev.d}")
        o_dev = predict(orig, dev.features)
        o_val = predict(orig, val.features)
    else:
        o_dev = np.zeros(dev.n)
        o_val = np.zeros(val.n)

    x, y = dev.features, dev.labels.astype(np.float64)
    rng = np.random.default_rng(cfg.seed)
    params = np.zeros(dev.d + 1)
    shrink = 1.0 / (1.0 + 2.0 * cfg.learning_rate * cfg.reg_l2)
    lr = cfg.learning_rate
    bs = cfg.batch_size

    best_loss, best_params = np.inf, params.copy()
    since_best = 0
    epochs = 0
    for epoch in range(1, cfg.max_epochs + 1):
        epochs = epoch
        order = rng.permutation(dev.n)
        for start in range(0, dev.n, bs):
            idx = order[start:start + bs]
            g = _gradient(x[idx], y[idx], o_dev[idx], params, cfg.surrogate,
                          allow_single=True)
            params -= lr * g
            params[:-1] *= shrink
        p_val = expit(val.features @ params[:-1] + params[-1])
        loss = objective_total(o_val, p_val, val.labels, cfg.surrogate)
        if history is not None:
            history.append(loss)
        if loss < best_loss:
            best_loss, best_params = loss, params.copy()
            since_best = 0
        else:
            since_best += 1
            if since_best >= cfg.patience:
                break
    log.debug("trained alpha=%s reg=%s: %d epochs, best val objective %.6f",
              alpha, cfg.reg_l2, epochs, best_loss)
    return RiskModel(
        weights=best_params[:-1],
        intercept=float(best_params[-1]),
        reg_l2=cfg.reg_l2,
        metadata={"seed": int(cfg.seed), "alpha": float(alpha), "epochs_run": epochs},
    )
