import math

import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from rankcompat import metrics
from rankcompat.errors import InvalidConfig, NonFiniteScore, SingleClass
from rankcompat.structures import Dataset, RiskModel
from rankcompat.surrogate import (
    SurrogateConfig,
    bce,
    objective,
    objective_gradient,
    rank_sigmoid,
    rbc_soft,
)
from rankcompat.trainer import predict

from conftest import tie_free_instance
from oracles import bce_brute, soft_rbc_brute

Y3, O3, U3 = [0, 0, 1], [0.2, 0.3, 0.5], [0.4, 0.6, 0.5]


def fd_gradient(model, orig, batch, cfg, h=1e-6):
    def f(theta):
        m = RiskModel(theta[:-1], float(theta[-1]))
        return objective(orig, predict(m, batch.features), batch.labels, cfg).total

    theta = model.params
    out = np.empty_like(theta)
    for i in range(theta.size):
        e = np.zeros_like(theta)
        e[i] = h
        out[i] = (f(theta + e) - f(theta - e)) / (2 * h)
    return out


def rel_err(a, b):
    return np.linalg.norm(a - b) / max(np.linalg.norm(a), np.linalg.norm(b), 1e-300)


def random_problem(rng, n_max=20, d_max=5):
    n = int(rng.integers(4, n_max + 1))
    d = int(rng.integers(1, d_max + 1))
    x = rng.normal(size=(n, d))
    y = rng.integers(0, 2, n)
    y[0], y[1] = 0, 1
    model = RiskModel(rng.normal(scale=0.5, size=d), float(rng.normal(scale=0.5)))
    return Dataset(x, y), model, rng.random(n)


def test_config_validation():
    with pytest.raises(InvalidConfig):
        SurrogateConfig(s=0)
    with pytest.raises(InvalidConfig):
        SurrogateConfig(alpha=1.5)
    assert SurrogateConfig().s == 10.0


def test_rank_sigmoid_values():
    assert rank_sigmoid(0.0, 3.7) == 0.5
    assert rank_sigmoid(0.2, 10) == pytest.approx(1 / (1 + math.exp(-2)), abs=1e-15)
    assert rank_sigmoid(0.2, 10) == pytest.approx(0.88080, abs=5e-6)
    assert rank_sigmoid(-0.2, 10) == pytest.approx(1 - rank_sigmoid(0.2, 10), abs=1e-15)


@given(st.floats(-1, 1), st.floats(-1, 1), st.floats(0.1, 1e3))
def test_rank_sigmoid_monotone(a, b, s):
    lo, hi = min(a, b), max(a, b)
    assert rank_sigmoid(lo, s) <= rank_sigmoid(hi, s)


def test_rbc_soft_saturates_on_identical_rankings():
    s = [0.0, 0.1, 0.9, 1.0]
    assert rbc_soft(s, s, [0, 0, 1, 1], s=1000) >= 0.999


def test_rbc_soft_hand_instance():
    assert rbc_soft(O3, U3, Y3, s=1e4) == pytest.approx(0.5, abs=1e-3)
    assert rbc_soft(O3, U3, Y3, s=10) == pytest.approx(soft_rbc_brute(O3, U3, Y3, 10), abs=1e-12)


def test_rbc_soft_matches_double_sum(rng):
    for _ in range(50):
        o, u, y = tie_free_instance(rng, n_max=40)
        s = float(rng.choice([1.0, 10.0, 100.0]))
        assert rbc_soft(o, u, y, s) == pytest.approx(soft_rbc_brute(o, u, y, s), abs=1e-12)


def test_rbc_soft_single_class():
    with pytest.raises(SingleClass):
        rbc_soft([0.1, 0.2], [0.1, 0.2], [1, 1])


def test_rbc_soft_convergence(rng):
    for _ in range(30):
        o, u, y = tie_free_instance(rng, n_max=60, min_gap=0.01)
        if metrics.pop_table(o, u, y).m_op == 0:
            continue
        exact = metrics.rbc(o, u, y)
        errs = [abs(rbc_soft(o, u, y, s) - exact) for s in (1e2, 1e3, 1e4)]
        assert errs[-1] <= 1e-3
        assert errs[0] >= errs[1] >= errs[2]


def test_rbc_soft_error_can_grow_between_small_s():
    # the smooth value crosses the exact one near s=10, so the error at
    # s=10 is smaller than at s=100 on this instance
    y, o, u = [0, 1, 1, 1], [0.19, 0.11, 0.58, 0.2], [0.11, 0.33, 0.12, 0.01]
    exact = metrics.rbc(o, u, y)
    assert exact == 0.5
    e10, e100 = (abs(rbc_soft(o, u, y, s) - exact) for s in (10, 100))
    assert e10 < e100


def test_rbc_soft_range(rng):
    for _ in range(20):
        o, u, y = tie_free_instance(rng, n_max=30)
        assert 0.0 < rbc_soft(o, u, y, 10) < 1.0


def test_bce_matches_reference():
    p, y = [0.1, 0.7, 0.4], [0, 1, 1]
    assert bce(p, y) == pytest.approx(bce_brute(p, y), abs=1e-15)


def test_bce_clamps_extremes():
    assert math.isfinite(bce([0.0, 1.0], [1, 0]))


def test_objective_weights():
    a1 = objective(O3, U3, Y3, SurrogateConfig(alpha=1.0))
    assert a1.total == a1.bce
    a0 = objective(O3, U3, Y3, SurrogateConfig(alpha=0.0))
    assert a0.total == 1 - rbc_soft(O3, U3, Y3, 10)
    half = objective(O3, U3, Y3, SurrogateConfig(s=10, alpha=0.5))
    expected = 0.5 * bce_brute(U3, Y3) + 0.5 * (1 - soft_rbc_brute(O3, U3, Y3, 10))
    assert half.total == pytest.approx(expected, abs=1e-12)


@given(st.floats(0, 1))
def test_objective_total_invariant(alpha):
    v = objective(O3, U3, Y3, SurrogateConfig(alpha=alpha))
    assert v.total == pytest.approx(alpha * v.bce + (1 - alpha) * v.rank_loss, abs=1e-12)
    assert 0 < v.rank_loss < 1


def test_objective_single_class():
    with pytest.raises(SingleClass):
        objective([0.1, 0.2], [0.3, 0.4], [1, 1], SurrogateConfig(alpha=0.5))
    v = objective([0.1, 0.2], [0.3, 0.4], [1, 1], SurrogateConfig(alpha=1.0))
    assert v.total == v.bce and math.isnan(v.rank_loss)


def test_objective_rejects_nan():
    with pytest.raises(NonFiniteScore):
        objective(O3, [0.1, float("nan"), 0.2], Y3, SurrogateConfig())


def test_gradient_zero_at_confident_optimum():
    x = np.array([[-1.0], [1.0], [-2.0], [2.0]])
    y = np.array([0, 1, 0, 1])
    model = RiskModel(np.array([60.0]), 0.0)
    g = objective_gradient(model, np.zeros(4), Dataset(x, y), SurrogateConfig(alpha=1.0))
    assert np.linalg.norm(g) <= 1e-6


def test_gradient_small_instance_fd():
    rng = np.random.default_rng(6)
    x = rng.normal(size=(6, 3))
    y = np.array([0, 1, 0, 1, 1, 0])
    model = RiskModel(rng.normal(size=3), 0.1)
    orig = rng.random(6)
    cfg = SurrogateConfig(s=10, alpha=0.5)
    batch = Dataset(x, y)
    g = objective_gradient(model, orig, batch, cfg)
    assert g.shape == (4,)
    assert rel_err(g, fd_gradient(model, orig, batch, cfg)) <= 1e-4


@pytest.mark.parametrize("alpha", [0.0, 0.3, 0.7, 1.0])
def test_gradient_matches_fd(alpha):
    rng = np.random.default_rng(int(alpha * 10) + 100)
    cfg = SurrogateConfig(alpha=alpha)
    for _ in range(25):
        batch, model, orig = random_problem(rng)
        g = objective_gradient(model, orig, batch, cfg)
        assert rel_err(g, fd_gradient(model, orig, batch, cfg)) <= 1e-4


def test_gradient_constant_original_invariance(rng):
    batch, model, _ = random_problem(rng)
    cfg = SurrogateConfig(alpha=0.0)
    g3 = objective_gradient(model, np.full(batch.n, 0.3), batch, cfg)
    g7 = objective_gradient(model, np.full(batch.n, 0.7), batch, cfg)
    np.testing.assert_allclose(g3, g7, rtol=1e-13, atol=1e-15)


def test_gradient_single_class_batch():
    batch = Dataset(np.ones((3, 2)), np.ones(3, dtype=int))
    model = RiskModel(np.zeros(2), 0.0)
    with pytest.raises(SingleClass):
        objective_gradient(model, np.zeros(3), batch, SurrogateConfig(alpha=0.5))
    objective_gradient(model, np.zeros(3), batch, SurrogateConfig(alpha=1.0))


def test_gradient_never_reads_original_parameters(rng):
    # only scores enter: any model producing the same scores is irrelevant
    batch, model, orig = random_problem(rng)
    cfg = SurrogateConfig(alpha=0.4)
    a = objective_gradient(model, orig, batch, cfg)
    b = objective_gradient(model, orig.copy(), batch, cfg)
    np.testing.assert_array_equal(a, b)
