"""Monte Carlo estimates of the mean payoff and the three variances.

Runs are simulated on the Markov chain induced by the strategy, all runs in
lock step with numpy.  Run ``i`` draws its randomness from a Philox stream
keyed by ``(seed, i)``, so results do not depend on how runs are batched.
Floating point is used here only; every solver module is exact.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from .model import Mdp, StochasticUpdateStrategy, induce_chain

STEP_CHUNK = 256
SEED_MASK = (1 << 64) - 1


@dataclass(frozen=True)
class SimConfig:
    runs: int = 1000
    horizon: int = 1000
    seed: int = 0
    burn_in: int | None = None  # defaults to horizon // 10

    def __post_init__(self):
        if self.runs < 1 or self.horizon < 1:
            raise ValueError("runs and horizon must be positive")
        if self.burn_in is not None and not 0 <= self.burn_in < self.horizon:
            raise ValueError("burn_in must lie in [0, horizon)")

    @property
    def discard(self) -> int:
        return self.horizon // 10 if self.burn_in is None else self.burn_in


@dataclass
class RunStatistics:
    runs: int
    horizon: int
    burn_in: int
    seed: int
    mean_payoff: float
    global_variance: float
    local_variance: float
    hybrid_variance: float
    stderr: dict
    hybrid_variance_exact_center: float | None = None
    per_run_mean: np.ndarray = field(default=None, repr=False, compare=False)
    per_run_local: np.ndarray = field(default=None, repr=False, compare=False)

    @property
    def relation_stderr(self) -> float:
        se = self.stderr
        return math.sqrt(se["hybrid_variance"] ** 2 + se["global_variance"] ** 2 + se["local_variance"] ** 2)

    def relation_agrees(self, k: float = 3.0) -> bool:
        """``E[hv]`` against ``Var[mp] + E[lv]`` within ``k`` combined standard errors."""
        gap = abs(self.hybrid_variance - (self.global_variance + self.local_variance))
        return gap <= k * self.relation_stderr + 1e-12

    def to_dict(self) -> dict:
        out = {
            "runs": self.runs,
            "horizon": self.horizon,
            "burn_in": self.burn_in,
            "seed": self.seed,
            "mean_payoff": self.mean_payoff,
            "global_variance": self.global_variance,
            "local_variance": self.local_variance,
            "hybrid_variance": self.hybrid_variance,
            "stderr": dict(self.stderr),
        }
        if self.hybrid_variance_exact_center is not None:
            out["hybrid_variance_exact_center"] = self.hybrid_variance_exact_center
        return out


def _stream(seed: int, run: int) -> np.random.Generator:
    return np.random.Generator(np.random.Philox(key=(run << 64) | (seed & SEED_MASK)))


def _tables(chain):
    index = chain.index()
    n = len(chain.locations)
    width = max(len(chain.edges[l]) for l in chain.locations)
    cum = np.full((n, width), 2.0)
    succ = np.zeros((n, width), dtype=np.int64)
    for l in chain.locations:
        i = index[l]
        acc = 0.0
        for k, (p, l2) in enumerate(chain.edges[l]):
            acc += float(p)
            cum[i, k] = acc
            succ[i, k] = index[l2]
        cum[i, len(chain.edges[l]) - 1] = 2.0  # absorb rounding in the last bucket
        succ[i, len(chain.edges[l]):] = succ[i, len(chain.edges[l]) - 1]
    reward = np.array([float(chain.location_reward[l]) for l in chain.locations])
    init_locs = sorted(chain.initial, key=index.get)
    init_cum = np.cumsum([float(chain.initial[l]) for l in init_locs])
    init_cum[-1] = 2.0
    init_idx = np.array([index[l] for l in init_locs], dtype=np.int64)
    return cum, succ, reward, init_cum, init_idx


def simulate(mdp: Mdp, strategy: StochasticUpdateStrategy, start: str | None = None, cfg: SimConfig = SimConfig(),
             exact_mean=None) -> RunStatistics:
    """Simulate ``cfg.runs`` runs of ``cfg.horizon`` steps and aggregate per-run estimates.

    Per run, ``mp`` is the average reward after the burn-in and ``lv`` the
    average squared deviation from that run's own ``mp``; ``hv`` is centred
    on the across-run average of ``mp`` (and additionally on ``exact_mean``
    when given).
    """
    strategy.validate(mdp)
    chain = induce_chain(mdp, strategy, start)
    cum, succ, reward, init_cum, init_idx = _tables(chain)
    n_runs, horizon, discard = cfg.runs, cfg.horizon, cfg.discard
    streams = [_stream(cfg.seed, i) for i in range(n_runs)]

    def draws(k):
        return np.stack([g.random(k) for g in streams])

    first = draws(1)[:, 0]
    cur = init_idx[np.searchsorted(init_cum, first, side="right")]
    total = np.zeros(n_runs)
    total_sq = np.zeros(n_runs)
    step = 0
    while step < horizon:
        k = min(STEP_CHUNK, horizon - step)
        u = draws(k)
        for j in range(k):
            if step + j >= discard:
                r = reward[cur]
                total += r
                total_sq += r * r
            pos = (u[:, j, None] >= cum[cur]).sum(axis=1)
            cur = succ[cur, pos]
        step += k

    kept = horizon - discard
    mp = total / kept
    ms = total_sq / kept
    lv = np.maximum(ms - mp * mp, 0.0)
    e = float(np.mean(mp))
    hv = ms - 2.0 * e * mp + e * e
    var = float(np.var(mp, ddof=1)) if n_runs > 1 else 0.0
    root_n = math.sqrt(n_runs)
    centred = mp - e
    m4 = float(np.mean(centred ** 4))
    stderr = {
        "mean_payoff": float(np.std(mp, ddof=1)) / root_n if n_runs > 1 else 0.0,
        "global_variance": math.sqrt(max(m4 - var * var, 0.0) / n_runs),
        "local_variance": float(np.std(lv, ddof=1)) / root_n if n_runs > 1 else 0.0,
        "hybrid_variance": float(np.std(hv, ddof=1)) / root_n if n_runs > 1 else 0.0,
    }
    hv_exact = None
    if exact_mean is not None:
        c = float(exact_mean)
        hv_exact = float(np.mean(ms - 2.0 * c * mp + c * c))
    return RunStatistics(
        n_runs, horizon, discard, cfg.seed, e, var, float(np.mean(lv)), float(np.mean(hv)), stderr, hv_exact, mp, lv
    )


# ---------------------------------------------------------------- comparison with exact values


QUANTITIES = ("mean_payoff", "global_variance", "local_variance", "hybrid_variance")


@dataclass(frozen=True)
class QuantityCheck:
    name: str
    estimate: float
    exact: float
    difference: float
    tolerance: float

    @property
    def passed(self) -> bool:
        return self.difference <= self.tolerance


@dataclass(frozen=True)
class Comparison:
    checks: tuple

    @property
    def passed(self) -> bool:
        return all(c.passed for c in self.checks)

    def failures(self) -> list:
        return [c for c in self.checks if not c.passed]


def compare_exact(report: RunStatistics, exact, tol=None, floor: float = 1e-3, k: float = 3.0) -> Comparison:
    """Absolute-difference comparison per quantity.

    ``exact`` is ``(E, Var, E[lv], E[hv])`` or an object with those
    attributes.  ``tol`` is a number, a per-quantity mapping, or ``None`` for
    the ``max(k * stderr, floor)`` policy.
    """
    if hasattr(exact, "mean_payoff"):
        values = [getattr(exact, q) for q in QUANTITIES]
    else:
        values = list(exact)
    checks = []
    for name, value in zip(QUANTITIES, values):
        if value is None:
            continue
        if tol is None:
            t = max(k * report.stderr[name], floor)
        elif isinstance(tol, dict):
            if name not in tol:
                continue
            t = float(tol[name])
        else:
            t = float(tol)
        est = getattr(report, name)
        checks.append(QuantityCheck(name, est, float(value), abs(est - float(value)), t))
    return Comparison(tuple(checks))
