"""Grid approximation of the Pareto curve of (expectation, variance) points.

Every cell of the ``eps``-grid over ``u in [-R, R]`` and ``v in [0, R**2]``
is decided by the checker of the requested kind.  Yes cells are only kept
after their witness strategy has been analysed exactly and found to meet
the cell's bounds.
"""

from __future__ import annotations

import csv
import io
import json
import os
import threading
import time
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from fractions import Fraction
from pathlib import Path

from .checkers import make_checker, synthesize_for, witness_key
from .io import decimal_or_fraction, save_strategy
from .model import Mdp, to_fraction
from .numerics.hull import multiples
from .results import NO, YES, check_eps, verify_witness

CSV_COLUMNS = ("kind", "u", "v", "answer", "witness_file", "elapsed_ms")
THREADS_ENV = "MDPSTAB_THREADS"


@dataclass
class ParetoCell:
    u: Fraction
    v: Fraction
    answer: str
    witness_file: str = ""
    elapsed_ms: float = 0.0


@dataclass
class ParetoGridResult:
    kind: str
    eps: Fraction
    start: str
    cells: list
    staircase: list = field(default_factory=list)
    unverified: list = field(default_factory=list)

    def yes_points(self) -> list:
        return [(c.u, c.v) for c in self.cells if c.answer == YES]

    def grid(self) -> list:
        """The decision content, for comparisons: ``(kind, u, v, answer)`` per cell."""
        return [(self.kind, c.u, c.v, c.answer) for c in self.cells]

    # ---- encodings

    def to_csv(self) -> str:
        buf = io.StringIO()
        w = csv.writer(buf, lineterminator="\n")
        w.writerow(CSV_COLUMNS)
        for c in self.cells:
            w.writerow([self.kind, decimal_or_fraction(c.u), decimal_or_fraction(c.v), c.answer, c.witness_file,
                        f"{c.elapsed_ms:.3f}"])
        return buf.getvalue()

    def to_dict(self) -> dict:
        return {
            "kind": self.kind,
            "eps": decimal_or_fraction(self.eps),
            "start": self.start,
            "cells": [
                {
                    "u": decimal_or_fraction(c.u),
                    "v": decimal_or_fraction(c.v),
                    "answer": c.answer,
                    "witness_file": c.witness_file,
                    "elapsed_ms": round(c.elapsed_ms, 3),
                }
                for c in self.cells
            ],
            "staircase": [[decimal_or_fraction(u), decimal_or_fraction(v)] for u, v in self.staircase],
        }

    def to_json(self) -> str:
        return json.dumps(self.to_dict(), indent=2) + "\n"

    @classmethod
    def from_dict(cls, raw: dict) -> "ParetoGridResult":
        cells = [
            ParetoCell(to_fraction(c["u"]), to_fraction(c["v"]), c["answer"], c.get("witness_file", ""),
                       float(c.get("elapsed_ms", 0.0)))
            for c in raw["cells"]
        ]
        res = cls(raw["kind"], to_fraction(raw["eps"]), raw.get("start", ""), cells)
        res.staircase = staircase(res.yes_points())
        return res

    @classmethod
    def from_csv(cls, text: str, eps=None, start: str = "") -> "ParetoGridResult":
        rows = list(csv.DictReader(io.StringIO(text)))
        kind = rows[0]["kind"] if rows else ""
        cells = [
            ParetoCell(to_fraction(r["u"]), to_fraction(r["v"]), r["answer"], r["witness_file"], float(r["elapsed_ms"]))
            for r in rows
        ]
        res = cls(kind, Fraction(eps) if eps is not None else Fraction(0), start, cells)
        res.staircase = staircase(res.yes_points())
        return res


def staircase(points) -> list:
    """Minimal points of ``points`` under componentwise order, sorted by ``u``
    (their ``v`` values then strictly decrease)."""
    out = []
    for u, v in sorted(set(points)):
        if not out or v < out[-1][1]:
            out.append((u, v))
    return out


def grid_axes(mdp: Mdp, eps) -> tuple:
    bound = mdp.reward_bound
    return multiples(-bound, bound, eps), multiples(0, bound * bound, eps)


def _threads() -> int:
    raw = os.environ.get(THREADS_ENV)
    if raw:
        try:
            return max(1, int(raw))
        except ValueError:
            pass
    return max(1, min(8, os.cpu_count() or 1))


def pareto(mdp: Mdp, s0: str | None, kind: str, eps, witness_dir=None, method: str = "hull",
           pair_budget: int | None = None, threads: int | None = None) -> ParetoGridResult:
    eps = check_eps(eps)
    s0 = mdp.initial if s0 is None else s0
    rewards = {a.reward for a in mdp.actions}
    if len(rewards) == 1:
        # every strategy yields the same constant reward
        (r,) = rewards
        return ParetoGridResult(kind, eps, s0, [ParetoCell(r, Fraction(0), YES)], [(r, Fraction(0))])

    kwargs = {"method": method}
    if pair_budget is not None:
        kwargs["pair_budget"] = pair_budget
    checker = make_checker(kind, mdp, s0, eps, **kwargs)
    checker.prepare()
    us, vs = grid_axes(mdp, eps)
    coords = [(u, v) for u in us for v in vs]
    if witness_dir is not None:
        Path(witness_dir).mkdir(parents=True, exist_ok=True)

    lock = threading.Lock()
    strategies: dict = {}  # witness key -> (strategy, file name)

    def witness_for(result):
        key = witness_key(result)
        with lock:
            hit = strategies.get(key)
        if hit is None:
            strategy = synthesize_for(checker, result)
            name = ""
            with lock:
                if key not in strategies:
                    if witness_dir is not None:
                        name = f"witness_{kind}_{len(strategies):05d}.json"
                        save_strategy(strategy, Path(witness_dir) / name)
                    strategies[key] = (strategy, name)
                hit = strategies[key]
        return hit

    def decide(point):
        u, v = point
        t0 = time.perf_counter()
        result = checker.check(u, v, synthesize=False)
        answer, fname, bad = NO, "", False
        if result.answer == YES:
            strategy, name = witness_for(result)
            ok = verify_witness(mdp, s0, kind, strategy, u, v)
            if ok:
                answer, fname = YES, name
            else:  # pragma: no cover - synthesis is exact
                bad = True
        elif result.answer != NO:
            answer = result.answer
        return ParetoCell(u, v, answer, fname, (time.perf_counter() - t0) * 1000.0), bad

    workers = threads or _threads()
    if workers == 1:
        outcomes = [decide(p) for p in coords]
    else:
        with ThreadPoolExecutor(max_workers=workers) as pool:
            outcomes = list(pool.map(decide, coords))
    cells = [c for c, _ in outcomes]
    unverified = [(c.u, c.v) for c, bad in outcomes if bad]
    res = ParetoGridResult(kind, eps, s0, cells, unverified=unverified)
    res.staircase = staircase(res.yes_points())
    return res
