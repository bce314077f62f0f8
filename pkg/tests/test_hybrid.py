import random
from fractions import Fraction

from hypothesis import given
from hypothesis import strategies as st

from conftest import mdps, random_mdp
from mdpstab.hybrid_var import HybridChecker, approx_check_hybrid, check_relation
from mdpstab.model import StochasticUpdateStrategy, enumerate_md_strategies
from mdpstab.results import exact_stats, verify_witness
from mdpstab.sim import SimConfig

F = Fraction


def uniform(mdp):
    return StochasticUpdateStrategy.memoryless(
        mdp, {s: {a.id: F(1, len(mdp.act(s))) for a in mdp.act(s)} for s in mdp.states})


def test_fixture_points(m_uni):
    eps = F(1, 50)
    yes = approx_check_hybrid(m_uni, "s1", F(155, 100), F(8, 10), eps)
    assert yes.yes and verify_witness(m_uni, "s1", "hybrid", yes.witness.strategy, F(155, 100), F(8, 10))
    assert not approx_check_hybrid(m_uni, "s1", F(3, 2), F(7, 10), eps).yes
    stats = exact_stats(m_uni, uniform(m_uni))
    assert (stats.mean_payoff, stats.hybrid_variance) == (F(3, 2), F(3, 4))


def achievable_on_unichain(u, v):
    # every strategy has E = 1 + p and E[hv] = 1 - p**2 for its long-run frequency p of b
    return u >= 1 and v >= 1 - (min(u, 2) - 1) ** 2


def test_unichain_grid_against_closed_form(m_uni):
    eps = F(1, 8)
    for method, step in (("hull", 8), ("sweep", 4)):
        checker = HybridChecker(m_uni, "s1", eps, method)
        for i in range(0, 5 * step // 2 + 1):
            for j in range(0, 3 * step // 2 + 1):
                u, v = F(i, step), F(j, step)
                r = checker.check(u, v)
                if r.yes:
                    assert achievable_on_unichain(u, v)
                    assert verify_witness(m_uni, "s1", "hybrid", r.witness.strategy, u, v)
                elif achievable_on_unichain(u - eps, v - eps):
                    raise AssertionError(f"{method} missed ({u}, {v})")


def test_minimum(m_uni):
    checker = HybridChecker(m_uni)
    assert checker.minimum(F(3, 2)) == F(3, 4)
    assert checker.minimum(2) == 0


def test_achieved_points_are_accepted_within_eps():
    rng = random.Random(10)
    eps = F(1, 4)
    for _ in range(12):
        mdp = random_mdp(rng, max_states=3, max_actions=5)
        checker = HybridChecker(mdp, None, eps)
        strategies = [StochasticUpdateStrategy.from_md(mdp, pi) for pi in enumerate_md_strategies(mdp)]
        strategies.append(uniform(mdp))
        for strategy in strategies:
            stats = exact_stats(mdp, strategy)
            u, v = stats.mean_payoff + eps, stats.hybrid_variance + eps
            r = checker.check(u, v)
            assert r.yes
            assert verify_witness(mdp, mdp.initial, "hybrid", r.witness.strategy, u, v)


@given(mdps(max_states=3, max_actions=5), st.fractions(-3, 4, max_denominator=4), st.fractions(0, 9, max_denominator=4))
def test_every_yes_is_closed_loop_verified(mdp, u, v):
    r = HybridChecker(mdp, None, F(1, 2)).check(u, v)
    if r.yes:
        assert verify_witness(mdp, mdp.initial, "hybrid", r.witness.strategy, u, v)


def test_sweep_and_hull_agree_up_to_eps():
    rng = random.Random(12)
    eps = F(1, 4)
    for _ in range(8):
        mdp = random_mdp(rng, max_states=3, max_actions=4, rewards=range(0, 3))
        routes = {m: HybridChecker(mdp, None, eps, m) for m in ("hull", "sweep")}
        for _ in range(5):
            u, v = F(rng.randint(0, 8), 4), F(rng.randint(0, 8), 4)
            for name, checker in routes.items():
                r = checker.check(u, v)
                if r.yes:
                    stats = exact_stats(mdp, r.witness.strategy)
                    other = routes["sweep" if name == "hull" else "hull"]
                    assert other.check(stats.mean_payoff + eps, stats.hybrid_variance + eps).yes


# ---------------------------------------------------------------- E[hv] = Var[mp] + E[lv]


def random_two_memory(mdp, rng):
    mem = ("p", "q")

    def dist(keys):
        w = [rng.randint(0, 3) for _ in keys]
        if not any(w):
            w[0] = 1
        return {k: F(x, sum(w)) for k, x in zip(keys, w) if x}

    nm = {(s, m): dist([a.id for a in mdp.act(s)]) for s in mdp.states for m in mem}
    upd = {(a.id, t, m): dist(mem) for a in mdp.actions for t in a.successors for m in mem}
    return StochasticUpdateStrategy(mem, dist(mem), nm, upd)


@given(mdps(), st.randoms(use_true_random=False))
def test_relation_is_exact_for_stochastic_update_strategies(mdp, rng):
    report = check_relation(mdp, random_two_memory(mdp, rng))
    assert report.holds


def test_relation_on_fixtures_with_simulation(m_glob, m_uni, escape_once, commit):
    cfg = SimConfig(runs=2000, horizon=400, seed=3)
    for mdp, strategy in ((m_glob, escape_once), (m_uni, commit), (m_uni, uniform(m_uni))):
        report = check_relation(mdp, strategy, mc_params=cfg)
        assert report.holds
        assert report.simulated.relation_agrees()
        assert report.to_dict()["exact_agreement"] is True
