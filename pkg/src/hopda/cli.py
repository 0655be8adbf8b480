"""Command-line front end.

Exit status: 0 when a result was produced, 1 on bad input, 2 when a
budget was exhausted.
"""
from __future__ import annotations

import argparse
import json
import sys

from .base0 import linearize0, nfa_diagonal
from .errors import BudgetExceeded, HopdaError
from .machine import enumerate_parikh, machine_stats
from .reduce import Budgets, decide_diagonal, prepare, reduce_once
from .textio import format_machine, format_nfa, load_machine, parse_nfa_text, parse_tree


def parse_model(path, raw=False):
    return load_machine(path, normalize=not raw)


def _chars(s):
    return [c.strip() for c in s.split(",") if c.strip()]


def _budgets(args):
    return Budgets(saturation=args.budget_saturation, annotation=args.budget_annotation,
                   enumeration=args.budget_enumeration)


def _emit(args, payload, text):
    if getattr(args, "json", False):
        print(json.dumps(payload, sort_keys=True))
    else:
        print(text)


def cmd_decide(args):
    M = parse_model(args.model, args.raw)
    log = (lambda m: print(m, file=sys.stderr)) if args.verbose else None
    v = decide_diagonal(M, _chars(args.chars), _budgets(args), log=log)
    lines = [f"{v.verdict} for {{{', '.join(v.chars)}}}"]
    for lv in v.levels:
        lines.append(f"  order {lv['order']}: {lv['controls']} controls, {lv['rules']} rules")
    _emit(args, v.to_json(timing=args.timing), "\n".join(lines))
    return 0


def cmd_reduce(args):
    M = parse_model(args.model, args.raw)
    chars = _chars(args.chars) if args.chars else list(M.outputs)
    cur = prepare(M, chars)
    b = _budgets(args)
    for _ in range(args.levels):
        if cur.order == 0:
            break
        cur = reduce_once(cur, b)
    text = format_machine(cur)
    if args.output:
        with open(args.output, "w") as f:
            f.write(text)
    else:
        sys.stdout.write(text)
    print(json.dumps(machine_stats(cur), sort_keys=True), file=sys.stderr)
    return 0


def cmd_enumerate(args):
    M = parse_model(args.model, args.raw)
    vs = enumerate_parikh(M, args.depth, args.cap, budget=args.budget_enumeration)
    payload = {"chars": list(M.outputs), "depth": args.depth, "cap": args.cap, "vectors": [list(v) for v in vs]}
    _emit(args, payload, "\n".join(" ".join(map(str, v)) for v in vs) if vs else "(none)")
    return 0


def cmd_prestar(args):
    from .saturate import build_alternating, empty_configset, pop_targets, prestar
    from .stackaut import format_configset
    M = parse_model(args.model)
    if M.order < 1:
        raise HopdaError("prestar needs a machine of order >= 1")
    S = build_alternating(M)
    leaves = [(t, (), (t,)) for t in pop_targets(M)]
    A = empty_configset(M.order, M.stack_alphabet, [c for c in leaves if c in set(S.controls)])
    P = prestar(S, A, budget=args.budget_saturation)
    print(format_configset(P))
    return 0


def cmd_linearize(args):
    M = parse_model(args.model, args.raw)
    cur = M
    if cur.order > 0:
        if not args.reduce:
            raise HopdaError("machine has order > 0; pass --reduce to reduce it first")
        cur = prepare(M, list(M.outputs))
        while cur.order > 0:
            cur = reduce_once(cur, _budgets(args))
    sys.stdout.write(format_nfa(linearize0(cur)))
    return 0


def cmd_nfa_diagonal(args):
    with open(args.nfa) as f:
        N = parse_nfa_text(f.read())
    chars = _chars(args.chars)
    bad = [c for c in chars if c not in N.alphabet]
    if bad:
        raise HopdaError(f"characters not in the NFA alphabet: {', '.join(bad)}")
    res = nfa_diagonal(N, chars)
    _emit(args, res.to_json(), "unbounded" if res.holds else "bounded")
    return 0


def cmd_score(args):
    from .scores import treescore
    with open(args.tree) as f:
        t = parse_tree(f.read())
    s = treescore(t, args.char)
    payload = {"char": args.char, "score": s, "count": t.count(args.char)}
    _emit(args, payload, f"score {s} count {t.count(args.char)}")
    return 0


def build_parser():
    p = argparse.ArgumentParser(prog="hopda", description="Diagonal problem for higher-order pushdown automata.")
    sub = p.add_subparsers(dest="command", required=True)

    def budgets(sp):
        d = Budgets()
        sp.add_argument("--budget-saturation", type=int, default=d.saturation, metavar="N")
        sp.add_argument("--budget-annotation", type=int, default=d.annotation, metavar="N")
        sp.add_argument("--budget-enumeration", type=int, default=d.enumeration, metavar="N")

    sp = sub.add_parser("decide", help="decide simultaneous unboundedness")
    sp.add_argument("model")
    sp.add_argument("--chars", required=True, help="comma-separated tracked characters")
    sp.add_argument("--json", action="store_true")
    sp.add_argument("--timing", action="store_true", help="include wall times in the JSON report")
    sp.add_argument("--raw", action="store_true", help="skip normalization when loading")
    sp.add_argument("-v", "--verbose", action="store_true")
    budgets(sp)
    sp.set_defaults(fn=cmd_decide)

    sp = sub.add_parser("reduce", help="apply the order reduction and print the machine")
    sp.add_argument("model")
    sp.add_argument("--levels", type=int, default=1)
    sp.add_argument("--chars")
    sp.add_argument("-o", "--output")
    sp.add_argument("--raw", action="store_true")
    budgets(sp)
    sp.set_defaults(fn=cmd_reduce)

    sp = sub.add_parser("enumerate", help="bounded enumeration of capped Parikh vectors")
    sp.add_argument("model")
    sp.add_argument("--depth", type=int, default=10)
    sp.add_argument("--cap", type=int, default=5)
    sp.add_argument("--json", action="store_true")
    sp.add_argument("--raw", action="store_true")
    budgets(sp)
    sp.set_defaults(fn=cmd_enumerate)

    sp = sub.add_parser("prestar", help="dump the canpop pre* automaton of a machine")
    sp.add_argument("model")
    budgets(sp)
    sp.set_defaults(fn=cmd_prestar)

    sp = sub.add_parser("linearize", help="print the NFA of an order-0 machine")
    sp.add_argument("model")
    sp.add_argument("--reduce", action="store_true", help="reduce to order 0 first")
    sp.add_argument("--raw", action="store_true")
    budgets(sp)
    sp.set_defaults(fn=cmd_linearize)

    sp = sub.add_parser("nfa-diagonal", help="diagonal problem for an NFA file")
    sp.add_argument("nfa")
    sp.add_argument("--chars", required=True)
    sp.add_argument("--json", action="store_true")
    sp.set_defaults(fn=cmd_nfa_diagonal)

    sp = sub.add_parser("score", help="score of a decomposition tree")
    sp.add_argument("tree")
    sp.add_argument("--char", required=True)
    sp.add_argument("--json", action="store_true")
    sp.set_defaults(fn=cmd_score)
    return p


def run_command(argv=None) -> int:
    try:
        args = build_parser().parse_args(argv)
    except SystemExit as e:
        # usage errors are input errors; 2 is reserved for budget aborts
        return 1 if e.code else 0
    try:
        return args.fn(args)
    except BudgetExceeded as e:
        print(f"budget exhausted: {e}", file=sys.stderr)
        return 2
    except (HopdaError, OSError, ValueError) as e:
        print(f"error: {e}", file=sys.stderr)
        return 1


def main():
    sys.exit(run_command())


if __name__ == "__main__":
    main()
