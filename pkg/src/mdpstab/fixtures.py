"""The two small models used throughout the tests and documentation."""

from __future__ import annotations

from fractions import Fraction

from .model import Mdp, StochasticUpdateStrategy, validate_mdp

# Two absorbing loops of reward 4 and 5 behind a fair coin, and an escape from
# the reward-5 loop to a reward-0 sink.
GLOBAL_EXAMPLE = {
    "states": ["s1", "s2", "s3", "s4"],
    "initial": "s1",
    "actions": [
        {"id": "a", "source": "s1", "reward": "0", "transitions": {"s2": "1/2", "s3": "1/2"}},
        {"id": "b", "source": "s2", "reward": "4", "transitions": {"s2": "1"}},
        {"id": "c", "source": "s3", "reward": "5", "transitions": {"s3": "1"}},
        {"id": "d", "source": "s3", "reward": "0", "transitions": {"s4": "1"}},
        {"id": "e", "source": "s4", "reward": "0", "transitions": {"s4": "1"}},
    ],
}

# A strongly connected two-state model: leave s1 with reward 0 or 2, come back with 2.
UNICHAIN_EXAMPLE = {
    "states": ["s1", "s2"],
    "initial": "s1",
    "actions": [
        {"id": "a", "source": "s1", "reward": "0", "transitions": {"s2": "1"}},
        {"id": "b", "source": "s1", "reward": "2", "transitions": {"s2": "1"}},
        {"id": "c", "source": "s2", "reward": "2", "transitions": {"s1": "1"}},
    ],
}


def global_example() -> Mdp:
    return validate_mdp(GLOBAL_EXAMPLE)


def unichain_example() -> Mdp:
    return validate_mdp(UNICHAIN_EXAMPLE)


def single_loop(reward="0") -> Mdp:
    return validate_mdp(
        {"states": ["s"], "initial": "s", "actions": [{"id": "l", "source": "s", "reward": str(reward), "transitions": {"s": "1"}}]}
    )


def escape_once_strategy() -> StochasticUpdateStrategy:
    """On the global example: at the first visit to s3 escape with probability 1/5,
    otherwise stay on the reward-5 loop for good.  Gives E = 4 and Var = 2."""
    one = Fraction(1)
    nm = {}
    for m in ("m1", "m2"):
        nm[("s1", m)] = {"a": one}
        nm[("s2", m)] = {"b": one}
        nm[("s4", m)] = {"e": one}
        nm[("s3", m)] = {"c": one}
    nm[("s3", "m1")] = {"c": Fraction(4, 5), "d": Fraction(1, 5)}
    return StochasticUpdateStrategy(("m1", "m2"), {"m1": one}, nm, {("c", "s3", "m1"): {"m2": one}})


def random_commit_strategy() -> StochasticUpdateStrategy:
    """On the unichain example: pick a or b once by a fair coin and keep it forever."""
    one = Fraction(1)
    nm = {("s1", "ma"): {"a": one}, ("s1", "mb"): {"b": one}, ("s2", "ma"): {"c": one}, ("s2", "mb"): {"c": one}}
    return StochasticUpdateStrategy(("ma", "mb"), {"ma": Fraction(1, 2), "mb": Fraction(1, 2)}, nm)
