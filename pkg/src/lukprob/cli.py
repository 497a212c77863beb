"""Command-line front end.

Exit codes: 0 VALID / success, 1 NOT_VALID, 2 UNKNOWN, 3 usage, parse or
validation errors.  Default resource caps can be set with the environment
variables ``LUKPROB_MAX_BRANCHES``, ``LUKPROB_TIME_LIMIT`` and
``LUKPROB_BASIS_CAP``.
"""

from __future__ import annotations

import argparse
import json
import os
import sys
from decimal import Decimal, localcontext
from fractions import Fraction
from pathlib import Path

from .model import ModelError, load_model
from .modelcheck import evaluate, evaluate_all
from .reductions import (delta_embed, eliminate_constants, load_chain, parse_classical,
                         path_value, UnknownState)
from .solver import BasisTooLarge
from .syntax import (ArityError, ParseError, RangeError, UnknownMacro, analyze, formula_str,
                     parse)
from .tableau import Budget, EntailmentQuery, FragmentError, decide

EXIT_OK, EXIT_NOT_VALID, EXIT_UNKNOWN, EXIT_ERROR = 0, 1, 2, 3


class UsageError(Exception):
    pass


def decimal_text(x: Fraction) -> str:
    """Display-only decimal rendering with at most 20 significant digits."""
    with localcontext() as ctx:
        ctx.prec = 20
        d = Decimal(x.numerator) / Decimal(x.denominator)
    return format(d.normalize(), "f")


def value_text(x: Fraction) -> str:
    return f"{x} ({decimal_text(x)})"


def _env_default(name, cast, fallback):
    raw = os.environ.get(name)
    if raw is None:
        return fallback
    try:
        return cast(raw)
    except ValueError:
        raise UsageError(f"{name} must be a number, got {raw!r}") from None


def _read_formulas(path) -> list:
    out = []
    for line in Path(path).read_text().splitlines():
        line = line.strip()
        if line and not line.startswith("#"):
            out.append(parse(line))
    return out


def _write(path, text):
    Path(path).write_text(text)


# ---------------------------------------------------------------- subcommands


def cmd_check(args, out) -> int:
    f = parse(args.formula)
    st = analyze(f)
    if args.json:
        doc = {"formula": formula_str(f), "modalDepth": st.modal_depth, "length": st.length,
               "variables": sorted(st.variables), "agents": sorted(st.agents),
               "fragment": st.fragment.value}
        print(json.dumps(doc, indent=2), file=out)
    else:
        print(formula_str(f), file=out)
        print(f"modal depth: {st.modal_depth}", file=out)
        print(f"length: {st.length}", file=out)
        print(f"variables: {', '.join(sorted(st.variables))}", file=out)
        print(f"agents: {', '.join(sorted(st.agents))}", file=out)
        print(f"fragment: {st.fragment.value}", file=out)
    return EXIT_OK


def cmd_eval(args, out) -> int:
    m = load_model(args.model)
    f = parse(args.formula)
    if args.world is None:
        for w, x in evaluate_all(m, f).items():
            print(f"{w}: {value_text(x)}", file=out)
    else:
        print(value_text(evaluate(m, args.world, f)), file=out)
    return EXIT_OK


def cmd_prove(args, out) -> int:
    premises = [parse(p) for p in args.premise or []]
    if args.premises:
        premises += _read_formulas(args.premises)
    conclusion = parse(args.conclusion)
    query = EntailmentQuery(tuple(premises), conclusion, args.frame)
    budget = Budget(
        branches=args.max_branches if args.max_branches is not None
        else _env_default("LUKPROB_MAX_BRANCHES", int, Budget.branches),
        seconds=args.time_limit if args.time_limit is not None
        else _env_default("LUKPROB_TIME_LIMIT", float, Budget.seconds),
    )
    cap = args.basis_cap if args.basis_cap is not None else _env_default("LUKPROB_BASIS_CAP", int, 12)
    v = decide(query, backend=args.backend, budget=budget, basis_cap=cap)
    if v.status == "VALID":
        print("VALID", file=out)
        code = EXIT_OK
    elif v.status == "NOT_VALID":
        print("NOT_VALID", file=out)
        print(f"conclusion value: {value_text(v.conclusion_value)}", file=out)
        if args.countermodel:
            _write(args.countermodel, json.dumps(v.countermodel_dict(), indent=2) + "\n")
            print(f"countermodel written to {args.countermodel}", file=out)
        else:
            print(json.dumps(v.countermodel_dict(), indent=2), file=out)
        if args.dot:
            _write(args.dot, v.dot())
        code = EXIT_NOT_VALID
    else:
        print(f"UNKNOWN: {v.reason}", file=out)
        code = EXIT_UNKNOWN
    if args.smtlib and v.exports:
        for k, text in enumerate(v.exports):
            target = args.smtlib if k == 0 else f"{args.smtlib}.{k}"
            _write(target, text)
        print(f"SMT-LIB written to {args.smtlib} ({len(v.exports)} system(s))", file=out)
    if args.stats:
        print(json.dumps({k: v.stats[k] for k in sorted(v.stats)
                          if not (args.deterministic and k == "seconds")}), file=out)
    return code


def cmd_translate(args, out) -> int:
    if args.mode == "delta-embed":
        if len(args.formulas) != 1:
            raise UsageError("delta-embed takes exactly one classical formula")
        print(formula_str(delta_embed(parse_classical(args.formulas[0]))), file=out)
        return EXIT_OK
    gamma = [parse(s) for s in args.formulas]
    if args.premises:
        gamma += _read_formulas(args.premises)
    if not gamma:
        raise UsageError("eliminate-constants needs formulas or --premises")
    res = eliminate_constants(gamma)
    for f in res.formulas:
        print(formula_str(f), file=out)
    print(f"# denominator {res.denominator}; size {res.size_before} -> {res.size_after}", file=out)
    return EXIT_OK


def cmd_markov(args, out) -> int:
    chain = load_chain(args.chain)
    try:
        path = [int(s) for s in args.path.split(",") if s.strip()]
    except ValueError:
        raise UsageError(f"bad path {args.path!r}; expected e.g. 1,2,3") from None
    f, value = path_value(chain, path)
    print(formula_str(f), file=out)
    print(value_text(value), file=out)
    return EXIT_OK


def cmd_oracle(args, out) -> int:
    from .oracle import CorpusSpec, SearchSpace, differential_run, random_corpus
    spec = CorpusSpec(count=args.count, depth=args.depth, n_vars=args.vars, n_agents=args.agents,
                      denominators=args.denominators, fragment=args.fragment, seed=args.seed)
    report = differential_run(random_corpus(spec),
                              space=SearchSpace(max_worlds=args.max_worlds, grid=args.grid,
                                                seed=args.seed))
    text = report.text()
    if args.deterministic:
        text = "\n".join(line for line in text.splitlines() if "seconds" not in line) + "\n"
    out.write(text)
    return EXIT_OK if report.ok else EXIT_NOT_VALID


# ---------------------------------------------------------------- parser


def build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(prog="lukprob", description=__doc__.splitlines()[0])
    sub = p.add_subparsers(dest="command", required=True)

    c = sub.add_parser("check", help="parse a formula and print its statistics")
    c.add_argument("formula")
    c.add_argument("--json", action="store_true")
    c.set_defaults(func=cmd_check)

    e = sub.add_parser("eval", help="evaluate a formula on a model file")
    e.add_argument("--model", required=True)
    e.add_argument("--world", help="world to evaluate at (default: all worlds)")
    e.add_argument("formula")
    e.set_defaults(func=cmd_eval)

    pr = sub.add_parser("prove", help="decide premises |= conclusion")
    pr.add_argument("--conclusion", required=True)
    pr.add_argument("--premise", action="append", help="a premise formula (repeatable)")
    pr.add_argument("--premises", help="file with one premise per line")
    pr.add_argument("--frame", choices=("fb", "any"), default="fb")
    pr.add_argument("--backend", choices=("lp", "interval", "export-only"), default="interval")
    pr.add_argument("--countermodel", help="write the countermodel JSON here")
    pr.add_argument("--dot", help="write a Graphviz rendering of the countermodel here")
    pr.add_argument("--smtlib", help="write SMT-LIB for undecided or refuting systems here")
    pr.add_argument("--max-branches", type=int)
    pr.add_argument("--time-limit", type=float)
    pr.add_argument("--basis-cap", type=int)
    pr.add_argument("--stats", action="store_true")
    pr.add_argument("--deterministic", action="store_true",
                    help="fixed exploration order and no timing output")
    pr.set_defaults(func=cmd_prove)

    t = sub.add_parser("translate", help="eliminate constants or embed classical K")
    t.add_argument("mode", choices=("eliminate-constants", "delta-embed"))
    t.add_argument("formulas", nargs="*")
    t.add_argument("--premises", help="file with one formula per line")
    t.set_defaults(func=cmd_translate)

    mk = sub.add_parser("markov", help="path formula and probability for a Markov chain")
    mk.add_argument("--chain", required=True)
    mk.add_argument("--path", required=True, help="comma separated states, e.g. 1,2")
    mk.set_defaults(func=cmd_markov)

    o = sub.add_parser("oracle", help="differential run of the prover against grid search")
    o.add_argument("--count", type=int, default=50)
    o.add_argument("--depth", type=int, default=2)
    o.add_argument("--vars", type=int, default=3)
    o.add_argument("--agents", type=int, default=2)
    o.add_argument("--denominators", type=int, default=4)
    o.add_argument("--fragment", choices=("L_ADD", "FULL"), default="L_ADD")
    o.add_argument("--grid", type=int, default=4)
    o.add_argument("--max-worlds", type=int, default=2)
    o.add_argument("--seed", type=int, default=0)
    o.add_argument("--deterministic", action="store_true")
    o.set_defaults(func=cmd_oracle)
    return p


def main(argv=None, out=None) -> int:
    out = out or sys.stdout
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as e:
        return EXIT_OK if e.code == 0 else EXIT_ERROR
    try:
        return args.func(args, out)
    except (ParseError, RangeError, UnknownMacro, ArityError, ModelError, FragmentError,
            UsageError, UnknownState, BasisTooLarge, OSError, ValueError) as e:
        print(f"error: {e}", file=sys.stderr)
        return EXIT_ERROR


def main_exit() -> None:
    sys.exit(main())


if __name__ == "__main__":
    main_exit()
