import random
from fractions import Fraction

from hypothesis import given
from hypothesis import strategies as st

from conftest import mdps, random_mdp
from mdpstab.local_var import (
    BUDGET_EXCEEDED,
    MAIN,
    LocalChecker,
    build_pair_system,
    build_product,
    check_local,
    count_md_pairs,
    md_pairs,
)
from mdpstab.model import StochasticUpdateStrategy, enumerate_md_strategies
from mdpstab.numerics import EQ, LE, Status, solve_lp
from mdpstab.numerics.hull import lower_chain
from mdpstab.numerics.mdp_lp import x_var
from mdpstab.results import exact_stats, verify_witness

F = Fraction


def test_fixture_points(m_uni):
    yes = check_local(m_uni, "s1", F(3, 2), F(1, 2))
    assert yes.yes
    strategy = yes.witness.strategy
    assert strategy.memory_size == 3
    stats = exact_stats(m_uni, strategy)
    assert (stats.mean_payoff, stats.local_variance) == (F(3, 2), F(1, 2))
    assert not check_local(m_uni, "s1", F(3, 2), F(9, 20)).yes
    corner = check_local(m_uni, "s1", 2, 0)
    assert corner.yes and tuple(exact_stats(m_uni, corner.witness.strategy)) == (2, 0)


def test_unichain_grid_matches_hull_of_pure_points(m_uni):
    # pure memoryless points are (1, 1) and (2, 0); the achievable region is everything above their hull
    checker = LocalChecker(m_uni)
    for i in range(0, 25):
        for j in range(0, 17):
            u, v = F(i, 8), F(j, 8)
            expected = u >= 1 and u + v >= 2
            r = checker.check(u, v)
            assert r.yes == expected, (u, v)
            if r.yes:
                assert verify_witness(m_uni, "s1", "local", r.witness.strategy, u, v)


def test_pair_enumeration(m_uni, m_glob):
    pairs = list(md_pairs(m_uni))
    assert len(pairs) == count_md_pairs(m_uni) == 3
    assert [(p.choice["s1"], q.choice["s1"]) for p, q in pairs] == [("a", "a"), ("a", "b"), ("b", "b")]
    assert count_md_pairs(m_glob) == 3


def test_budget_exceeded(m_uni):
    assert LocalChecker(m_uni, md_pair_budget=1).check(F(3, 2), F(1, 2)).answer == BUDGET_EXCEEDED
    assert LocalChecker(m_uni, md_pair_budget=2).check(F(3, 2), F(1, 2)).yes
    assert LocalChecker(m_uni, md_pair_budget=1).check(1, 1).yes


def test_mixtures_of_pure_strategies_are_accepted_exactly():
    rng = random.Random(6)
    for _ in range(12):
        mdp = random_mdp(rng, max_states=3, max_actions=5)
        checker = LocalChecker(mdp)
        pure = [exact_stats(mdp, StochasticUpdateStrategy.from_md(mdp, pi)) for pi in enumerate_md_strategies(mdp)]
        for a in pure:
            for b in pure:
                w = F(rng.randint(0, 4), 4)
                u = (1 - w) * a.mean_payoff + w * b.mean_payoff
                v = (1 - w) * a.local_variance + w * b.local_variance
                r = checker.check(u, v)
                assert r.yes
                assert verify_witness(mdp, mdp.initial, "local", r.witness.strategy, u, v)


@given(mdps(max_states=3, max_actions=5), st.fractions(-3, 4, max_denominator=4), st.fractions(0, 9, max_denominator=4))
def test_every_yes_is_closed_loop_verified(mdp, u, v):
    r = LocalChecker(mdp).check(u, v)
    if r.yes:
        s = r.witness.strategy
        assert s.memory_size <= 3
        assert verify_witness(mdp, mdp.initial, "local", s, u, v)


def _pareto_part(chain):
    """Vertices up to the one with the least q."""
    k = min(range(len(chain)), key=lambda i: (chain[i].q, chain[i].m))
    return chain[: k + 1]


def test_penalty_keeps_recurrent_mass_off_the_main_copy():
    """Without forcing, Pareto-optimal frequencies still put nothing on the main copy,
    and forcing recurrent frequencies onto the frozen copies loses no Pareto point."""
    rng = random.Random(8)
    for _ in range(8):
        mdp = random_mdp(rng, max_states=3, max_actions=4)
        for pi, pi_alt in md_pairs(mdp):
            product = build_product(mdp, pi, pi_alt)
            free = build_pair_system(product, frozen_only=False)
            forced = build_pair_system(product, frozen_only=True)
            free_chain = _pareto_part(lower_chain(free.flow.lp, free.mean_row, free.lv_row))
            forced_chain = _pareto_part(lower_chain(forced.flow.lp, forced.mean_row, forced.lv_row))
            assert [(p.m, p.q) for p in free_chain] == [(p.m, p.q) for p in forced_chain]
            main = {x_var(a) for a, (kind, _, _) in product.origin.items() if kind == MAIN}
            main &= set(free.flow.lp.variables)
            for p in free_chain:
                lp = free.flow.lp.copy()
                lp.add_constraint(free.mean_row, EQ, p.m)
                lp.add_constraint(free.lv_row, LE, p.q)
                lp.set_objective("max", {v: 1 for v in main})
                out = solve_lp(lp)
                assert out.status == Status.OPTIMAL
                assert out.objective_value == 0
