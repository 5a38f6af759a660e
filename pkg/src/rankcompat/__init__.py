"""Rank-based compatibility of risk-model updates."""

from rankcompat.errors import *  # noqa: F401,F403
from rankcompat.structures import Dataset, RiskModel
from rankcompat.metrics import (
    BoundSet, PopTable, accuracy, auroc, bounds, btc, pop_table, rbc,
    rbc_from_pop, rbc_general,
)
from rankcompat.surrogate import (
    ObjectiveValue, SurrogateConfig, objective, objective_gradient, rank_sigmoid,
    rbc_soft,
)
from rankcompat.trainer import TrainConfig, predict, train

__version__ = "0.1.0"
