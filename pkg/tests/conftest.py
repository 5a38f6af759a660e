import numpy as np
import pytest


def tie_free_instance(rng, n_max=200, min_gap=None):
    """Random labels with both classes and two tie-free score vectors in [0, 1].

    With ``min_gap`` the scores are drawn without replacement from a grid of
    spacing ``min_gap``, so every pair differs by at least that much.
    """
    if min_gap is not None:
        n_grid = int(round(1.0 / min_gap)) + 1
        n = int(rng.integers(2, min(n_max, n_grid) + 1))
        grid = np.linspace(0.0, 1.0, n_grid)
        o = rng.choice(grid, n, replace=False)
        u = rng.choice(grid, n, replace=False)
    else:
        n = int(rng.integers(2, n_max + 1))
        o = rng.random(n)
        u = rng.random(n)
    y = rng.integers(0, 2, n)
    y[0], y[1] = 0, 1
    rng.shuffle(y)
    return o, u, y


@pytest.fixture
def rng():
    return np.random.default_rng(20231016)


_ACCEPTANCE = pytest.StashKey[dict]()


@pytest.fixture
def record_acceptance(request):
    """Record one acceptance line and fail the test when the criterion fails."""
    store = request.config.stash.setdefault(_ACCEPTANCE, {})

    def record(number, title, ok, detail):
        store[number] = f"criterion {number:>2} {'PASS' if ok else 'FAIL'}  {title}: {detail}"
        assert ok, store[number]

    return record


def pytest_terminal_summary(terminalreporter, config):
    store = config.stash.get(_ACCEPTANCE, {})
    if store:
        terminalreporter.section("acceptance criteria")
        for number in sorted(store):
            terminalreporter.write_line(store[number])
