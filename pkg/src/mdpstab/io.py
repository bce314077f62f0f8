"""JSON model and strategy files."""

from __future__ import annotations

import json
from fractions import Fraction
from pathlib import Path

from .model import InvalidStrategy, Mdp, ModelError, StochasticUpdateStrategy, format_fraction, validate_mdp


def _read_json(path) -> object:
    try:
        with open(path, encoding="utf-8") as fh:
            return json.load(fh)
    except json.JSONDecodeError as exc:
        raise ModelError(f"{path}: not valid JSON ({exc})") from None
    except OSError as exc:
        raise ModelError(f"{path}: {exc.strerror or exc}") from None


def load_mdp(path) -> Mdp:
    return validate_mdp(_read_json(path))


def save_mdp(mdp: Mdp, path) -> None:
    write_json(mdp.to_dict(), path)


def load_strategy(path, mdp: Mdp | None = None) -> StochasticUpdateStrategy:
    raw = _read_json(path)
    if not isinstance(raw, dict):
        raise InvalidStrategy(f"{path}: strategy must be a JSON object")
    strategy = StochasticUpdateStrategy.from_dict(raw)
    if mdp is not None:
        strategy.validate(mdp)
    return strategy


def save_strategy(strategy: StochasticUpdateStrategy, path) -> None:
    write_json(strategy.to_dict(), path)


def write_json(data, path) -> None:
    Path(path).write_text(json.dumps(data, indent=2, sort_keys=False) + "\n", encoding="utf-8")


def decimal_or_fraction(q: Fraction) -> str:
    """Finite decimal expansion when one exists, ``p/q`` otherwise."""
    q = Fraction(q)
    d = q.denominator
    twos = fives = 0
    while d % 2 == 0:
        d //= 2
        twos += 1
    while d % 5 == 0:
        d //= 5
        fives += 1
    if d != 1:
        return format_fraction(q)
    digits = max(twos, fives)
    if digits == 0:
        return str(q.numerator)
    scaled = q * 10**digits
    sign = "-" if scaled < 0 else ""
    n = abs(int(scaled))
    whole, frac = divmod(n, 10**digits)
    return f"{sign}{whole}.{frac:0{digits}d}"
