"""Command-line interface."""

from __future__ import annotations

import argparse
import json
import sys
from typing import Sequence, TextIO

from .automaton import monitor_dfa, to_regular_monitor
from .errors import (
    ConflictingVerdicts,
    MonitorabilityError,
    NotInFragment,
    NotRegular,
    ParseError,
    StateExplosion,
    UnboundVariable,
    UnknownAction,
)
from .formula import Alphabet, encode_ltl, ltl_actions, parse_formula, parse_ltl, print_formula
from .monitor import Run, Simulator, Verdict, parse_monitor, print_monitor, run_trace
from .pz import TruthDomain, epz_monitorable, ffm_monitorable, s_monitorable, upz_monitorable
from .report import build_report
from .semantics import d_sets_upto, evaluate, session_alphabet
from .synthesis import bounded_maximal_monitor, monitor_to_formula, synthesize
from .traces import parse_trace

EXIT_OK, EXIT_USAGE, EXIT_ANALYSIS, EXIT_RESOURCE = 0, 1, 2, 3


class UsageError(Exception):
    pass


def _positive(text: str) -> int:
    n = int(text)
    if n < 0:
        raise argparse.ArgumentTypeError("must be a non-negative integer")
    return n


def _common() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(add_help=False)
    p.add_argument("--alphabet", help="comma-separated actions, e.g. f,s,r")
    p.add_argument("--bound", type=_positive, default=6, help="oracle bound (default 6)")
    p.add_argument("--depth", type=_positive, default=2, help="prefix depth (default 2)")
    p.add_argument("--json", action="store_true", help="emit JSON")
    p.add_argument("--state-cap", type=_positive, default=100_000, help="monitor state cap")
    return p


def build_parser() -> argparse.ArgumentParser:
    common = _common()
    parser = argparse.ArgumentParser(
        prog="monitorability",
        description="Classify recHML properties, synthesize and run monitors.",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("classify", parents=[common], help="classification report")
    p.add_argument("formula")
    p.add_argument("--no-pz", action="store_true", help="skip the PZ and truth-domain checks")

    p = sub.add_parser("synth", parents=[common], help="synthesize a monitor")
    p.add_argument("formula")
    p.add_argument(
        "--bounded-maximal",
        action="store_true",
        help="emit the bounded maximal monitor (any formula, labelled with --bound)",
    )

    p = sub.add_parser("monitor", help="monitor execution")
    msub = p.add_subparsers(dest="action", required=True)
    r = msub.add_parser("run", parents=[common], help="run a monitor over a trace")
    r.add_argument("monitor")
    src = r.add_mutually_exclusive_group(required=True)
    src.add_argument("--trace", help="finite trace or lasso, e.g. f.r or a(b)^w")
    src.add_argument("--stdin", action="store_true", help="read one action per line")

    p = sub.add_parser("det", parents=[common], help="deterministic regular monitor")
    p.add_argument("monitor")

    p = sub.add_parser("eval", parents=[common], help="evaluate a formula on a trace")
    p.add_argument("formula")
    p.add_argument("trace")

    p = sub.add_parser("ltl", parents=[common], help="recHML encoding of an LTL formula")
    p.add_argument("ltl")

    p = sub.add_parser("pz", parents=[common], help="Pnueli-Zaks monitorability")
    p.add_argument("formula")
    mode = p.add_mutually_exclusive_group()
    mode.add_argument("--epz", action="store_true", help="from the empty prefix (default)")
    mode.add_argument("--upz", action="store_true", help="from every prefix up to --depth")
    mode.add_argument("--s", metavar="TRACE", help="from the given prefix")

    p = sub.add_parser("ffm", parents=[common], help="truth-domain monitorability")
    p.add_argument("formula")
    p.add_argument("--domain", required=True, choices=[d.value for d in TruthDomain])

    p = sub.add_parser("oracle", parents=[common], help="minimal determining prefixes")
    p.add_argument("formula")

    p = sub.add_parser("m2f", parents=[common], help="SHML formula of a regular monitor")
    p.add_argument("monitor")
    return parser


def _alphabet(args) -> Alphabet | None:
    if not args.alphabet:
        return None
    try:
        return Alphabet.of(args.alphabet)
    except ValueError as e:
        raise UsageError(str(e)) from e


def _emit(out: TextIO, args, human: str, data: dict):
    if args.json:
        out.write(json.dumps(data, indent=2) + "\n")
    else:
        out.write(human + "\n")


def _formula_alphabet(f, args, *traces):
    alpha = _alphabet(args)
    try:
        return session_alphabet(f, *traces, alphabet=alpha)
    except ValueError:
        return None


def cmd_classify(args, out: TextIO) -> int:
    alpha = _alphabet(args)
    f = parse_formula(args.formula, alpha)
    report = build_report(f, alpha, args.bound, args.depth, pz=not args.no_pz)
    if args.json:
        out.write(report.to_json() + "\n")
        return EXIT_OK
    d = report.as_dict()
    frag = d["fragments"]
    lines = [
        f"level: {d['level']} ({d['basis']})",
        f"alphabet: {','.join(d['alphabet']) if d['alphabet'] else '-'}",
        "fragments: "
        + " ".join(f"{k}={'yes' if v is True else 'no' if v in (False, None) else v}" for k, v in frag.items()),
    ]
    for w in d["witnesses"]:
        lines.append(f"witness: {w['trace']} ({w['polarity']}, verified={w['verified']})")
    if d["oracle"] is not None:
        o = d["oracle"]
        lines.append(f"oracle: bound {o['bound']}, {o['agreements']} agreements, {len(o['disagreements'])} disagreements")
    for key in ("epz", "upz"):
        if key in d["pz"]:
            lines.append(f"{key}: {d['pz'][key]['status']}")
    out.write("\n".join(lines) + "\n")
    return EXIT_OK


def cmd_synth(args, out: TextIO) -> int:
    alpha = _alphabet(args)
    f = parse_formula(args.formula, alpha)
    if args.bounded_maximal:
        res = bounded_maximal_monitor(f, args.bound, alpha)
    else:
        res = synthesize(f, alpha)
    text = print_monitor(res.monitor)
    data = {
        "monitor": text,
        "guarantees": str(res.guarantees),
        "boundedVerdicts": [str(t) for t in res.bounded_verdicts],
    }
    _emit(out, args, f"{text}\nguarantees: {res.guarantees}", data)
    return EXIT_OK


def cmd_monitor_run(args, out: TextIO, inp: TextIO) -> int:
    alpha = _alphabet(args)
    m = parse_monitor(args.monitor, alpha)
    sim = Simulator(args.state_cap)
    if args.trace is not None:
        t = parse_trace(args.trace, alpha)
        outcome = run_trace(m, t, sim)
    else:
        run = Run(m, sim)
        outcome = run.outcome
        while outcome.status is Verdict.NO_VERDICT:
            line = inp.readline()
            if not line:
                break
            a = line.strip()
            if not a:
                continue
            if alpha is not None and a not in alpha:
                raise UnknownAction(a)
            outcome = run.feed(a)
    data = {
        "status": outcome.status.value,
        "prefixLength": outcome.prefix_length,
        "conflicting": outcome.conflicting,
    }
    human = str(outcome) + (" (conflicting)" if outcome.conflicting else "")
    _emit(out, args, human, data)
    out.flush()
    return EXIT_OK


def cmd_det(args, out: TextIO) -> int:
    alpha = _alphabet(args)
    m = parse_monitor(args.monitor, alpha)
    d = to_regular_monitor(monitor_dfa(m, alpha, simulator=Simulator(args.state_cap)))
    text = print_monitor(d)
    _emit(out, args, text, {"monitor": text})
    return EXIT_OK


def cmd_eval(args, out: TextIO) -> int:
    alpha = _alphabet(args)
    f = parse_formula(args.formula, alpha)
    t = parse_trace(args.trace, alpha)
    v = evaluate(f, t)
    _emit(out, args, "true" if v else "false", {"formula": print_formula(f), "trace": str(t), "value": v})
    return EXIT_OK


def cmd_ltl(args, out: TextIO) -> int:
    alpha = _alphabet(args)
    l = parse_ltl(args.ltl, alpha)
    if alpha is None:
        acts = ltl_actions(l)
        if not acts:
            raise UsageError("cannot infer an alphabet; pass --alphabet")
        alpha = Alphabet(tuple(acts))
    f = encode_ltl(l, alpha)
    text = print_formula(f)
    _emit(out, args, text, {"formula": text, "alphabet": list(alpha.actions)})
    return EXIT_OK


def cmd_pz(args, out: TextIO) -> int:
    alpha = _alphabet(args)
    f = parse_formula(args.formula, alpha)
    if args.upz:
        res = upz_monitorable(f, args.depth, args.bound, _need_alphabet(f, args), args.bound)
    elif args.s is not None:
        s = parse_trace(args.s, alpha)
        res = s_monitorable(f, s, args.bound, _need_alphabet(f, args, s), args.bound)
    else:
        res = epz_monitorable(f, args.bound, alpha, args.bound)
    _emit(out, args, str(res), res.as_dict())
    return EXIT_OK


def _need_alphabet(f, args, *traces) -> Alphabet:
    alpha = _formula_alphabet(f, args, *traces)
    if alpha is None:
        raise UsageError("cannot infer an alphabet; pass --alphabet")
    return alpha


def cmd_ffm(args, out: TextIO) -> int:
    alpha = _alphabet(args)
    f = parse_formula(args.formula, alpha)
    domain = TruthDomain(args.domain)
    res = ffm_monitorable(f, domain, args.depth, args.bound, _need_alphabet(f, args))
    if res.monitorable:
        human = "monitorable"
    else:
        human = f"not monitorable: {res.pair[0]} and {res.pair[1]}"
    _emit(out, args, human, res.as_dict())
    return EXIT_OK


def cmd_oracle(args, out: TextIO) -> int:
    alpha = _alphabet(args)
    f = parse_formula(args.formula, alpha)
    ds = d_sets_upto(f, args.depth, _need_alphabet(f, args), args.bound)
    pos = [str(t) for t in ds.positives]
    neg = [str(t) for t in ds.negatives]
    human = (
        f"positive: {{{', '.join(pos)}}}\nnegative: {{{', '.join(neg)}}}\n"
        f"length {ds.length}, oracle bound {ds.bound}, exact={ds.exact}"
    )
    data = {"positives": pos, "negatives": neg, "length": ds.length, "bound": ds.bound, "exact": ds.exact}
    _emit(out, args, human, data)
    return EXIT_OK


def cmd_m2f(args, out: TextIO) -> int:
    alpha = _alphabet(args)
    m = parse_monitor(args.monitor, alpha)
    text = print_formula(monitor_to_formula(m))
    _emit(out, args, text, {"formula": text})
    return EXIT_OK


def run_cli(argv: Sequence[str] | None = None, out: TextIO | None = None, inp: TextIO | None = None) -> int:
    out = out or sys.stdout
    inp = inp or sys.stdin
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as e:
        return EXIT_OK if e.code in (0, None) else EXIT_USAGE
    handlers = {
        "classify": cmd_classify,
        "synth": cmd_synth,
        "det": cmd_det,
        "eval": cmd_eval,
        "ltl": cmd_ltl,
        "pz": cmd_pz,
        "ffm": cmd_ffm,
        "oracle": cmd_oracle,
        "m2f": cmd_m2f,
    }
    try:
        if args.command == "monitor":
            return cmd_monitor_run(args, out, inp)
        return handlers[args.command](args, out)
    except (ParseError, UnknownAction, UnboundVariable, UsageError) as e:
        print(f"error: {e}", file=sys.stderr)
        return EXIT_USAGE
    except StateExplosion as e:
        print(f"error: {e}", file=sys.stderr)
        return EXIT_RESOURCE
    except (ConflictingVerdicts, NotInFragment, NotRegular, MonitorabilityError, ValueError) as e:
        print(f"error: {e}", file=sys.stderr)
        return EXIT_ANALYSIS


def main() -> None:
    sys.exit(run_cli())
