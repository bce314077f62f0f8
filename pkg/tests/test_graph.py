import random

from hypothesis import given

from conftest import mdps, random_mdp
from mdpstab.graph import almost_sure_cobuchi, almost_sure_reach, bsccs, mec_decomposition
from mdpstab.model import StochasticUpdateStrategy, induce_chain
from oracles import almost_sure_reach_states, brute_mecs, reachable


def as_pairs(mecs):
    return {(m.states, m.actions) for m in mecs}


def test_fixture_mecs(m_glob, m_uni):
    assert as_pairs(mec_decomposition(m_glob)) == {
        (frozenset({"s2"}), frozenset({"b"})),
        (frozenset({"s3"}), frozenset({"c"})),
        (frozenset({"s4"}), frozenset({"e"})),
    }
    assert as_pairs(mec_decomposition(m_uni)) == {(frozenset({"s1", "s2"}), frozenset({"a", "b", "c"}))}


def test_mecs_match_brute_force_on_200_models():
    rng = random.Random(20240101)
    for _ in range(200):
        mdp = random_mdp(rng, max_states=4, max_actions=6)
        assert as_pairs(mec_decomposition(mdp)) == brute_mecs(mdp), mdp.to_dict()


@given(mdps())
def test_mecs_are_disjoint_and_closed(mdp):
    seen = set()
    for m in mec_decomposition(mdp):
        assert not (m.states & seen)
        seen |= m.states
        for a in m.actions:
            assert mdp.action(a).source in m.states
            assert set(mdp.action(a).successors) <= m.states


def test_restricted_mecs(m_uni):
    # without b the model is still one MEC; without c nothing returns to s1
    assert as_pairs(mec_decomposition(m_uni, {"a", "c"})) == {(frozenset({"s1", "s2"}), frozenset({"a", "c"}))}
    assert mec_decomposition(m_uni, {"a", "b"}) == []


@given(mdps())
def test_almost_sure_reach_matches_brute_force(mdp):
    target = {mdp.states[-1]}
    win, witness = almost_sure_reach(mdp, target)
    assert set(win) == almost_sure_reach_states(mdp, target)
    # the witness reaches the target from every winning state
    graph = {s: set() if s in target else set(mdp.action(witness.choice[s]).successors) for s in win}
    for s in win:
        assert graph[s] <= win
        assert all(target & reachable(graph, t) for t in reachable(graph, s))


def test_cobuchi_on_fixture(m_glob):
    win, pi = almost_sure_cobuchi(m_glob, {"a", "c", "d", "e"})
    assert set(win) == {"s3", "s4"}  # from s1 the coin may send the run to s2
    assert pi.choice["s3"] in ("c", "d")
    win, _ = almost_sure_cobuchi(m_glob, {"b"})
    assert set(win) == {"s2"}


def test_bsccs_of_commit_chain(m_uni, commit):
    comps = bsccs(induce_chain(m_uni, commit))
    assert len(comps) == 2
    assert {frozenset(l[2] for l in b.locations) for b in comps} == {frozenset({"a", "c"}), frozenset({"b", "c"})}
