import numpy as np
import pytest
from hypothesis import HealthCheck, settings

from pensiongame import (
    Barriers,
    Preferences,
    market_from_scalars,
    solve_game_one,
    solve_game_two,
)

settings.register_profile(
    "suite",
    max_examples=50,
    deadline=None,
    suppress_health_check=[HealthCheck.too_slow],
)
settings.load_profile("suite")

# Two single-asset scenario markets used throughout: a high-excess-return
# regime and a low-excess-return one. Values chosen so the barrier game is
# feasible only in the second.
BULL = dict(r=0.01, b=0.144604, sigma=0.10748)
BEAR = dict(r=0.01, b=0.014, sigma=0.2678)


@pytest.fixture(scope="session")
def bull():
    return market_from_scalars(**BULL)


@pytest.fixture(scope="session")
def bear():
    return market_from_scalars(**BEAR)


@pytest.fixture(scope="session")
def anchor_prefs():
    return Preferences(alpha=0.02, beta=0.02, gamma=2.0, delta=2.0, lam=1.0, mu=1.0)


@pytest.fixture(scope="session")
def g2_prefs():
    return Preferences(alpha=0.02, beta=0.02, gamma=2.0, delta=2.0, lam=1.0, mu=0.1)


@pytest.fixture(scope="session")
def barriers():
    return Barriers(l=1.0, v=2.0, x0=1.5)


@pytest.fixture(scope="session")
def g1_anchor(bull, anchor_prefs):
    return solve_game_one(bull, anchor_prefs)


@pytest.fixture(scope="session")
def g2_anchor(bear, g2_prefs, barriers):
    return solve_game_two(bear, g2_prefs, barriers)


def assert_close(got, want, rtol=1e-12, atol=0.0):
    assert np.isclose(got, want, rtol=rtol, atol=atol), f"got {got!r}, want {want!r}"
