import json
from fractions import Fraction

import pytest
from hypothesis import given
from hypothesis import strategies as st

from conftest import mdps
from mdpstab.fixtures import GLOBAL_EXAMPLE
from mdpstab.io import decimal_or_fraction, load_mdp, load_strategy, save_mdp, save_strategy
from mdpstab.model import (
    BadDistribution,
    DuplicateId,
    EmptyActSet,
    InvalidStrategy,
    ModelError,
    NotAMec,
    StochasticUpdateStrategy,
    UnknownTarget,
    count_md_strategies,
    enumerate_md_strategies,
    induce_chain,
    restrict_to_mec,
    to_fraction,
    validate_mdp,
)
from mdpstab.graph import Mec


def _model(**changes):
    raw = json.loads(json.dumps(GLOBAL_EXAMPLE))
    raw.update(changes)
    return raw


def test_fixture_shape(m_glob):
    assert m_glob.states == ("s1", "s2", "s3", "s4")
    assert [a.id for a in m_glob.act("s3")] == ["c", "d"]
    assert m_glob.action("a").dist == {"s2": Fraction(1, 2), "s3": Fraction(1, 2)}
    assert m_glob.reward_bound == 5


@pytest.mark.parametrize(
    "mutate, error",
    [
        (lambda r: r["actions"].pop(), EmptyActSet),
        (lambda r: r["actions"][0]["transitions"].update({"s2": "1/3"}), BadDistribution),
        (lambda r: r["actions"][0]["transitions"].update({"s9": "0"}), UnknownTarget),
        (lambda r: r["actions"].append(dict(r["actions"][0])), DuplicateId),
        (lambda r: r["states"].append("s1"), DuplicateId),
        (lambda r: r.update(initial="nowhere"), UnknownTarget),
        (lambda r: r["actions"][1].update(source="s7"), UnknownTarget),
        (lambda r: r["actions"][1]["transitions"].update({"s2": "-1", "s3": "2"}), BadDistribution),
    ],
)
def test_validation_errors(mutate, error):
    raw = _model()
    mutate(raw)
    with pytest.raises(error):
        validate_mdp(raw)


def test_errors_are_model_errors():
    for cls in (BadDistribution, DuplicateId, EmptyActSet, UnknownTarget, InvalidStrategy, NotAMec):
        assert issubclass(cls, ModelError)


def test_to_fraction():
    assert to_fraction("0.1") == Fraction(1, 10)
    assert to_fraction(0.1) == Fraction(1, 10)
    assert to_fraction("3/4") == Fraction(3, 4)
    assert to_fraction(7) == 7
    with pytest.raises(ModelError):
        to_fraction("x")
    with pytest.raises(ModelError):
        to_fraction(True)


def test_decimal_or_fraction():
    assert decimal_or_fraction(Fraction(41, 10)) == "4.1"
    assert decimal_or_fraction(Fraction(-1, 4)) == "-0.25"
    assert decimal_or_fraction(Fraction(1, 3)) == "1/3"
    assert decimal_or_fraction(Fraction(5)) == "5"


@given(mdps())
def test_mdp_json_round_trip(mdp):
    assert validate_mdp(json.loads(json.dumps(mdp.to_dict()))) == mdp


def test_file_round_trip(tmp_path, m_glob, escape_once):
    save_mdp(m_glob, tmp_path / "m.json")
    assert load_mdp(tmp_path / "m.json") == m_glob
    save_strategy(escape_once, tmp_path / "s.json")
    assert load_strategy(tmp_path / "s.json", m_glob) == escape_once


def test_bad_files(tmp_path):
    with pytest.raises(ModelError):
        load_mdp(tmp_path / "missing.json")
    (tmp_path / "bad.json").write_text("{not json", encoding="utf-8")
    with pytest.raises(ModelError):
        load_mdp(tmp_path / "bad.json")


@given(mdps())
def test_md_enumeration_count(mdp):
    all_md = list(enumerate_md_strategies(mdp))
    assert len(all_md) == count_md_strategies(mdp) == len(set(all_md))
    for pi in all_md:
        pi.validate(mdp)


def test_strategy_validation(m_uni, commit):
    commit.validate(m_uni)
    broken = StochasticUpdateStrategy(commit.memory, commit.initial_memory, {("s1", "ma"): {"a": 1}})
    with pytest.raises(InvalidStrategy):
        broken.validate(m_uni)
    disabled = StochasticUpdateStrategy(("m",), {"m": 1}, {("s1", "m"): {"c": 1}, ("s2", "m"): {"c": 1}})
    with pytest.raises(InvalidStrategy):
        disabled.validate(m_uni)
    with pytest.raises(BadDistribution):
        StochasticUpdateStrategy(("m",), {"m": Fraction(1, 2)}, {("s1", "m"): {"a": 1}, ("s2", "m"): {"c": 1}}).validate(m_uni)


@given(mdps(), st.data())
def test_induced_chain_is_stochastic(mdp, data):
    choice = {}
    for s in mdp.states:
        acts = [a.id for a in mdp.act(s)]
        weights = [data.draw(st.integers(0, 3)) for _ in acts]
        if not any(weights):
            weights[0] = 1
        choice[s] = {a: Fraction(w, sum(weights)) for a, w in zip(acts, weights) if w}
    strategy = StochasticUpdateStrategy.memoryless(mdp, choice)
    chain = induce_chain(mdp, strategy)
    assert sum(chain.initial.values()) == 1
    for loc in chain.locations:
        assert sum(p for p, _ in chain.edges[loc]) == 1
        assert chain.location_reward[loc] == mdp.action(loc[2]).reward


def test_escape_once_chain(m_glob, escape_once):
    chain = induce_chain(m_glob, escape_once)
    assert chain.initial == {("s1", "m1", "a"): 1}
    assert dict((l, p) for p, l in chain.edges[("s3", "m1", "c")]) == {("s3", "m2", "c"): 1}


def test_restrict_to_mec(m_glob):
    sub = restrict_to_mec(m_glob, Mec(frozenset({"s3"}), frozenset({"c"})))
    assert sub.states == ("s3",) and sub.action_ids == ("c",)
    with pytest.raises(NotAMec):
        restrict_to_mec(m_glob, Mec(frozenset({"s3", "s4"}), frozenset({"c", "d", "e"})))
