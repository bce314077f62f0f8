import random
from fractions import Fraction

import pytest
from hypothesis import HealthCheck, settings
from hypothesis import strategies as st

from mdpstab.fixtures import (
    escape_once_strategy,
    global_example,
    random_commit_strategy,
    single_loop,
    unichain_example,
)
from mdpstab.model import validate_mdp

settings.register_profile("default", deadline=None, suppress_health_check=[HealthCheck.too_slow])
settings.load_profile("default")

ACCEPTANCE_LINES = []


def pytest_terminal_summary(terminalreporter):
    if ACCEPTANCE_LINES:
        terminalreporter.section("acceptance criteria")
        for line in sorted(ACCEPTANCE_LINES):
            terminalreporter.write_line(line)


@pytest.fixture
def m_glob():
    return global_example()


@pytest.fixture
def m_uni():
    return unichain_example()


@pytest.fixture
def escape_once():
    return escape_once_strategy()


@pytest.fixture
def commit():
    return random_commit_strategy()


@pytest.fixture
def loop5():
    return single_loop(5)


PROBS = [Fraction(1, 2), Fraction(1, 3), Fraction(1, 4), Fraction(2, 3), Fraction(3, 4), Fraction(1)]


def random_mdp_dict(rng: random.Random, max_states: int = 4, max_actions: int = 6, rewards=range(-2, 4)):
    """A random valid model: every state has an action, at most ``max_actions`` actions."""
    n = rng.randint(1, max_states)
    states = [f"s{i}" for i in range(n)]
    n_act = rng.randint(n, max(n, max_actions))
    sources = states + [rng.choice(states) for _ in range(n_act - n)]
    actions = []
    for i, src in enumerate(sources):
        k = rng.randint(1, min(2, n))
        targets = rng.sample(states, k)
        if k == 1:
            dist = {targets[0]: "1"}
        else:
            p = rng.choice(PROBS[:-1])
            dist = {targets[0]: str(p), targets[1]: str(1 - p)}
        actions.append({"id": f"a{i}", "source": src, "reward": str(rng.choice(list(rewards))), "transitions": dist})
    return {"states": states, "initial": "s0", "actions": actions}


def random_mdp(rng: random.Random, **kw):
    return validate_mdp(random_mdp_dict(rng, **kw))


@st.composite
def mdps(draw, max_states: int = 4, max_actions: int = 6):
    seed = draw(st.integers(min_value=0, max_value=2**32 - 1))
    return random_mdp(random.Random(seed), max_states=max_states, max_actions=max_actions)
