"""Exact quantitative analysis of finite Markov chains."""

from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction

from ..graph import Bscc, bsccs
from ..model import Location, MarkovChain
from .linalg import solve, solve_multi

ZERO = Fraction(0)


def _can_reach(chain: MarkovChain, target: set) -> set:
    preds: dict = {l: [] for l in chain.locations}
    for l in chain.locations:
        for _, l2 in chain.edges[l]:
            preds[l2].append(l)
    seen = set(target)
    stack = list(target)
    while stack:
        l = stack.pop()
        for p in preds[l]:
            if p not in seen:
                seen.add(p)
                stack.append(p)
    return seen


def chain_reach_probabilities(chain: MarkovChain, target) -> dict:
    """Probability of eventually visiting ``target`` from every location."""
    target = set(target)
    live = _can_reach(chain, target)
    unknown = [l for l in chain.locations if l in live and l not in target]
    idx = {l: i for i, l in enumerate(unknown)}
    n = len(unknown)
    rows = []
    rhs = []
    for l in unknown:
        row = [ZERO] * n
        row[idx[l]] += 1
        b = ZERO
        for p, l2 in chain.edges[l]:
            if l2 in target:
                b += p
            elif l2 in idx:
                row[idx[l2]] -= p
        rows.append(row)
        rhs.append(b)
    sol = solve(rows, rhs) if n else []
    out = {l: ZERO for l in chain.locations}
    for l in target:
        out[l] = Fraction(1)
    for l, v in zip(unknown, sol):
        out[l] = v
    return out


def stationary_distribution(chain: MarkovChain, bscc: Bscc) -> dict:
    """Unique stationary distribution of the chain restricted to a BSCC."""
    locs = sorted(bscc.locations)
    idx = {l: i for i, l in enumerate(locs)}
    n = len(locs)
    # column-wise balance: sum_l pi_l P(l, l') - pi_l' = 0, last equation replaced by normalisation
    rows = [[ZERO] * n for _ in range(n)]
    for l in locs:
        for p, l2 in chain.edges[l]:
            rows[idx[l2]][idx[l]] += p
    for i in range(n):
        rows[i][i] -= 1
    rows[-1] = [Fraction(1)] * n
    rhs = [ZERO] * (n - 1) + [Fraction(1)]
    return dict(zip(locs, solve(rows, rhs)))


@dataclass(frozen=True)
class BsccSummary:
    bscc: Bscc
    probability: Fraction
    mean_payoff: Fraction
    local_variance: Fraction
    mean_square: Fraction
    stationary: dict


@dataclass(frozen=True)
class ChainStats:
    """Exact long-run statistics of a finite chain.

    ``global_variance`` is ``Var[mp]``; ``local_variance`` is ``E[lv]``;
    ``hybrid_variance`` is ``E[hv]``; ``mean_square`` is ``E[mp]`` for the
    squared reward.
    """

    mean_payoff: Fraction
    local_variance: Fraction
    global_variance: Fraction
    hybrid_variance: Fraction
    mean_square: Fraction
    components: tuple

    def __iter__(self):
        # (mp, lv) unpacking
        return iter((self.mean_payoff, self.local_variance))


def absorption_probabilities(chain: MarkovChain, comps: list, start=None) -> list:
    """Probability of ending in each BSCC of ``comps`` from ``start`` (or the initial distribution)."""
    init = chain.initial if start is None else {start: Fraction(1)}
    in_comp = {l: i for i, b in enumerate(comps) for l in b.locations}
    transient = [l for l in chain.locations if l not in in_comp]
    idx = {l: i for i, l in enumerate(transient)}
    n = len(transient)
    probs = [ZERO] * len(comps)
    if n:
        rows = []
        cols = [[ZERO] * n for _ in comps]
        for l in transient:
            row = [ZERO] * n
            row[idx[l]] += 1
            for p, l2 in chain.edges[l]:
                if l2 in idx:
                    row[idx[l2]] -= p
                else:
                    cols[in_comp[l2]][idx[l]] += p
            rows.append(row)
        sols = solve_multi(rows, cols)
    for l, w in init.items():
        if l in in_comp:
            probs[in_comp[l]] += w
        else:
            for k in range(len(comps)):
                probs[k] += w * sols[k][idx[l]]
    return probs


def chain_long_run_stats(chain: MarkovChain, start: Location | None = None) -> ChainStats:
    """Expected mean payoff and the three variance notions, exactly.

    Within a BSCC almost every run has the same mean payoff and local
    variance, given by the stationary distribution; the results are mixed by
    the probability of ending in each BSCC.
    """
    comps = bsccs(chain)
    probs = absorption_probabilities(chain, comps, start)
    summaries = []
    for b, pb in zip(comps, probs):
        stat = stationary_distribution(chain, b)
        mp = sum((w * chain.location_reward[l] for l, w in stat.items()), ZERO)
        ms = sum((w * chain.location_reward[l] ** 2 for l, w in stat.items()), ZERO)
        lv = sum((w * (chain.location_reward[l] - mp) ** 2 for l, w in stat.items()), ZERO)
        summaries.append(BsccSummary(b, pb, mp, lv, ms, stat))
    mean = sum((s.probability * s.mean_payoff for s in summaries), ZERO)
    lvar = sum((s.probability * s.local_variance for s in summaries), ZERO)
    gvar = sum((s.probability * (s.mean_payoff - mean) ** 2 for s in summaries), ZERO)
    msq = sum((s.probability * s.mean_square for s in summaries), ZERO)
    hvar = sum(
        (
            s.probability * sum((w * (s_r - mean) ** 2 for s_r, w in ((chain.location_reward[l], w) for l, w in s.stationary.items())), ZERO)
            for s in summaries
        ),
        ZERO,
    )
    return ChainStats(mean, lvar, gvar, hvar, msq, tuple(summaries))
