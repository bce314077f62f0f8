"""Command-line front end.

Exit codes: 0 success (or Yes), 1 negative answer, 2 usage error, 3 model error.
"""

from __future__ import annotations

import argparse
import json
import sys
from pathlib import Path

from .checkers import KINDS, make_checker
from .graph import mec_decomposition
from .hybrid_var import check_relation
from .io import decimal_or_fraction, load_mdp, load_strategy, save_strategy
from .local_var import DEFAULT_PAIR_BUDGET
from .model import ModelError, UnknownTarget, format_fraction, to_fraction
from .numerics.mdp_lp import mec_payoff_bounds
from .pareto import pareto
from .results import InvalidEps, exact_stats
from .sim import SimConfig, compare_exact, simulate
from .zerovar import ZERO_VARIANCE

EXIT_OK = 0
EXIT_NO = 1
EXIT_USAGE = 2
EXIT_MODEL = 3


class UsageError(Exception):
    pass


def _point(text: str) -> tuple:
    parts = text.split(",")
    if len(parts) != 2:
        raise argparse.ArgumentTypeError(f"expected u,v but got {text!r}")
    try:
        return to_fraction(parts[0].strip()), to_fraction(parts[1].strip())
    except (ValueError, ZeroDivisionError, ModelError):
        raise argparse.ArgumentTypeError(f"not a pair of numbers: {text!r}") from None


def _rational(text: str):
    try:
        return to_fraction(text)
    except (ValueError, ZeroDivisionError, ModelError):
        raise argparse.ArgumentTypeError(f"not a number: {text!r}") from None


def build_parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--mdp", required=True, help="MDP JSON file")
    common.add_argument("--from", dest="start", default=None, help="start state (default: the file's initial state)")
    common.add_argument("--json", action="store_true", help="print JSON instead of text")

    solver = argparse.ArgumentParser(add_help=False)
    solver.add_argument("--eps", type=_rational, default=to_fraction("0.01"), help="approximation precision")
    solver.add_argument("--method", choices=("hull", "sweep"), default="hull")
    solver.add_argument("--pair-budget", type=int, default=DEFAULT_PAIR_BUDGET,
                        help="maximum number of memoryless pure strategy pairs (local)")

    mc = argparse.ArgumentParser(add_help=False)
    mc.add_argument("--runs", type=int, default=1000)
    mc.add_argument("--horizon", type=int, default=1000)
    mc.add_argument("--seed", type=int, default=0)
    mc.add_argument("--burn-in", type=int, default=None)

    p = argparse.ArgumentParser(prog="mdpstab", description="Mean-payoff and variance trade-offs in MDPs.")
    sub = p.add_subparsers(dest="command", required=True)

    sub.add_parser("mec", parents=[common], help="maximal end components and their payoff intervals")

    for name, helptext in (("check", "decide whether (E, variance) <= (u, v) is achievable"),
                           ("synthesize", "write a witness strategy for an achievable point")):
        sp = sub.add_parser(name, parents=[common, solver], help=helptext)
        sp.add_argument("kind", choices=KINDS)
        sp.add_argument("--point", type=_point, required=True, help="u,v")
        sp.add_argument("--out", default=None, help="witness strategy file")
        if name == "synthesize":
            sp.set_defaults(print_strategy=True)

    zv = sub.add_parser("zero-var", parents=[common], help="least expectation with zero variance")
    zv.add_argument("kind", choices=KINDS)
    zv.add_argument("--all-states", action="store_true")
    zv.add_argument("--out", default=None, help="strategy file (single state only)")

    pp = sub.add_parser("pareto", parents=[common, solver], help="grid approximation of the Pareto curve")
    pp.add_argument("kind", choices=KINDS)
    pp.add_argument("--csv", default=None, help="CSV output file")
    pp.add_argument("--out-json", default=None, help="JSON output file")
    pp.add_argument("--witness-dir", default=None, help="directory for witness strategies")
    pp.add_argument("--threads", type=int, default=None)

    sm = sub.add_parser("simulate", parents=[common, mc], help="Monte Carlo statistics of a strategy")
    sm.add_argument("--strategy", required=True)
    sm.add_argument("--compare", action="store_true", help="compare with exact chain analysis")

    rl = sub.add_parser("relation", parents=[common, mc], help="check E[hv] = Var[mp] + E[lv] for a strategy")
    rl.add_argument("--strategy", required=True)
    rl.add_argument("--simulate", action="store_true", help="also compare Monte Carlo estimates")
    return p


def _emit(args, data: dict, text: str) -> None:
    print(json.dumps(data, indent=2) if args.json else text)


def _start(args, mdp) -> str:
    s0 = mdp.initial if args.start is None else args.start
    if not mdp.has_state(s0):
        raise UnknownTarget("start", s0)
    return s0


def _sim_config(args) -> SimConfig:
    try:
        return SimConfig(args.runs, args.horizon, args.seed, args.burn_in)
    except ValueError as exc:
        raise UsageError(str(exc)) from None


def cmd_mec(args, mdp) -> int:
    rows = []
    for mec in mec_decomposition(mdp):
        iv = mec_payoff_bounds(mdp, mec)
        rows.append({
            "states": sorted(mec.states),
            "actions": sorted(mec.actions),
            "alpha": format_fraction(iv.alpha),
            "beta": format_fraction(iv.beta),
        })
    text = "\n".join(f"{{{','.join(r['states'])}}} actions {{{','.join(r['actions'])}}} "
                     f"interval [{r['alpha']}, {r['beta']}]" for r in rows) or "no end components"
    _emit(args, {"mecs": rows}, text)
    return EXIT_OK


def cmd_check(args, mdp) -> int:
    s0 = _start(args, mdp)
    u, v = args.point
    if args.eps <= 0:
        raise InvalidEps(args.eps)
    checker = make_checker(args.kind, mdp, s0, args.eps, args.method, args.pair_budget)
    result = checker.check(u, v)
    strategy = result.witness.strategy if result.yes else None
    if getattr(args, "print_strategy", False) and args.out is None and strategy is not None and not args.json:
        print(json.dumps(strategy.to_dict(), indent=2))
    if args.out and strategy is not None:
        save_strategy(strategy, args.out)
    data = {
        "kind": args.kind,
        "start": s0,
        "u": decimal_or_fraction(u),
        "v": decimal_or_fraction(v),
        "eps": decimal_or_fraction(args.eps),
        "answer": result.answer,
        "witness": result.witness.to_dict() if result.yes else None,
    }
    text = result.answer
    if result.yes:
        e, var = _witness_values(result.witness)
        text += f" (witness: E = {format_fraction(e)}, {args.kind} variance = {format_fraction(var)})"
    _emit(args, data, text)
    return EXIT_OK if result.yes else EXIT_NO


def _witness_values(w) -> tuple:
    for name in ("variance", "local_variance", "hybrid_variance"):
        if hasattr(w, name):
            return w.expectation, getattr(w, name)
    raise AttributeError(name)


def cmd_zero_var(args, mdp) -> int:
    solve = ZERO_VARIANCE[args.kind]
    if args.all_states:
        answers = [solve(mdp, s) for s in mdp.states]
        data = {"kind": args.kind, "states": {a.state: a.to_dict()["answer"] for a in answers}}
        text = "\n".join(f"{a.state}: {a.to_dict()['answer']}" for a in answers)
        _emit(args, data, text)
        return EXIT_OK
    s0 = _start(args, mdp)
    ans = solve(mdp, s0)
    if args.out and ans.strategy is not None:
        save_strategy(ans.strategy, args.out)
    _emit(args, ans.to_dict(), ans.to_dict()["answer"])
    return EXIT_OK if ans.exists else EXIT_NO


def cmd_pareto(args, mdp) -> int:
    s0 = _start(args, mdp)
    res = pareto(mdp, s0, args.kind, args.eps, witness_dir=args.witness_dir, method=args.method,
                 pair_budget=args.pair_budget, threads=args.threads)
    if args.csv:
        Path(args.csv).write_text(res.to_csv(), encoding="utf-8")
    if args.out_json:
        Path(args.out_json).write_text(res.to_json(), encoding="utf-8")
    text = "\n".join(f"{decimal_or_fraction(u)},{decimal_or_fraction(v)}" for u, v in res.staircase)
    if args.json:
        print(res.to_json(), end="")
    else:
        print(text)
    return EXIT_OK


def cmd_simulate(args, mdp) -> int:
    s0 = _start(args, mdp)
    strategy = load_strategy(args.strategy, mdp)
    cfg = _sim_config(args)
    exact = exact_stats(mdp, strategy, s0) if args.compare else None
    report = simulate(mdp, strategy, s0, cfg, exact_mean=exact.mean_payoff if exact else None)
    data = report.to_dict()
    code = EXIT_OK
    if exact is not None:
        cmp = compare_exact(report, exact)
        data["comparison"] = {c.name: {"exact": c.exact, "difference": c.difference, "tolerance": c.tolerance,
                                       "passed": c.passed} for c in cmp.checks}
        code = EXIT_OK if cmp.passed else EXIT_NO
    text = "\n".join(f"{k}: {data[k]}" for k in ("mean_payoff", "global_variance", "local_variance", "hybrid_variance"))
    _emit(args, data, text)
    return code


def cmd_relation(args, mdp) -> int:
    s0 = _start(args, mdp)
    strategy = load_strategy(args.strategy, mdp)
    cfg = _sim_config(args) if args.simulate else None
    report = check_relation(mdp, strategy, s0, cfg)
    data = report.to_dict()
    ok = report.holds and (report.simulated is None or report.simulated.relation_agrees())
    text = (f"E[hv] = {data['hybrid_variance']}, Var[mp] + E[lv] = {data['global_plus_local']}, "
            f"exact agreement: {report.holds}")
    if report.simulated is not None:
        text += f", simulated agreement: {report.simulated.relation_agrees()}"
    _emit(args, data, text)
    return EXIT_OK if ok else EXIT_NO


COMMANDS = {
    "mec": cmd_mec,
    "check": cmd_check,
    "synthesize": cmd_check,
    "zero-var": cmd_zero_var,
    "pareto": cmd_pareto,
    "simulate": cmd_simulate,
    "relation": cmd_relation,
}


def run_cli(argv=None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return EXIT_OK if exc.code == 0 else EXIT_USAGE
    try:
        mdp = load_mdp(args.mdp)
        return COMMANDS[args.command](args, mdp)
    except (UsageError, InvalidEps) as exc:
        print(f"error: {exc}", file=sys.stderr)
        parser.print_usage(sys.stderr)
        return EXIT_USAGE
    except ModelError as exc:
        print(f"model error: {exc}", file=sys.stderr)
        return EXIT_MODEL


def main() -> None:
    sys.exit(run_cli(sys.argv[1:]))
