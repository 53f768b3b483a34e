"""Command line front end.

Subcommands: parse, check, infer, run, analyze, corpus-check.  Exit codes
are a stable contract: 0 success (or typable), 1 untypable or failed
check, 2 parse error, 3 run stuck on a bad guard, 4 fuel exhausted.

Input bindings are var=VALUE where VALUE made of 0/1 only is taken as a
literal word and any other digit string as a unary number (3 means 111).
Oracle behaviour comes from a JSON spec file; runs are otherwise fully
deterministic.  TIER_SEED in the environment overrides --seed.
"""

from __future__ import annotations

import argparse
import json
import os
import random
import sys

from . import analysis
from .corpus import load_corpus
from .inference import encode, infer, to_dimacs
from .operators import builtin_registry
from .semantics import (
    FuelExhausted,
    StuckGuard,
    TableOracle,
    run_program,
)
from .syntax import ParseError, has_oracle_call, parse, pretty, program_to_json
from .tiers import audit_derivation, check

EXIT_OK = 0
EXIT_UNTYPABLE = 1
EXIT_PARSE = 2
EXIT_STUCK = 3
EXIT_FUEL = 4


def _read_program(path: str):
    with open(path, encoding="utf-8") as fh:
        return parse(fh.read())


def _parse_input_value(text: str) -> str:
    if not text:
        return ""
    if set(text) <= {"0", "1"}:
        return text
    if text.isdigit():
        return "1" * int(text)
    raise ValueError(f"input value {text!r} is neither a word nor a number")


def _parse_bindings(pairs: list[str]) -> dict[str, str]:
    out: dict[str, str] = {}
    for pair in pairs:
        if "=" not in pair:
            raise ValueError(f"expected var=value, got {pair!r}")
        name, _, value = pair.partition("=")
        out[name.strip()] = _parse_input_value(value.strip())
    return out


def _parse_gamma(text: str) -> dict[str, int]:
    gamma: dict[str, int] = {}
    for item in text.split(","):
        if not item:
            continue
        name, _, tier = item.partition("=")
        gamma[name.strip()] = int(tier)
    return gamma


def _parse_triple(text: str) -> tuple[int, int, int]:
    parts = [int(p) for p in text.split(",")]
    if len(parts) != 3:
        raise ValueError(f"triple needs three components, got {text!r}")
    return (parts[0], parts[1], parts[2])


def _parse_range(text: str) -> list[int]:
    parts = text.split(":")
    if len(parts) not in (2, 3):
        raise ValueError(f"range must be lo:hi or lo:hi:step, got {text!r}")
    lo, hi = int(parts[0]), int(parts[1])
    step = int(parts[2]) if len(parts) == 3 else 1
    return list(range(lo, hi + 1, step))


def _seed(args) -> int:
    env = os.environ.get("TIER_SEED")
    if env is not None:
        return int(env)
    return args.seed


def _load_oracle(path: str | None) -> TableOracle | None:
    if path is None:
        return None
    return TableOracle.load(path)


def cmd_parse(args) -> int:
    program = _read_program(args.source)
    if args.format == "json":
        print(json.dumps(program_to_json(program), indent=2))
    else:
        print(pretty(program), end="")
    return EXIT_OK


def cmd_check(args) -> int:
    program = _read_program(args.source)
    gamma = _parse_gamma(args.gamma) if args.gamma else {}
    triple = _parse_triple(args.triple)
    derivation = check(program, gamma, triple, t_max=args.max_tier)
    ok = derivation is not None
    if args.format == "json":
        payload = {"ok": ok, "gamma": gamma, "triple": list(triple)}
        if ok and args.emit_derivation:
            payload["derivation"] = args.emit_derivation
        print(json.dumps(payload, indent=2))
    else:
        print("typable at the given judgement" if ok else "does not type there")
    if ok and args.emit_derivation:
        with open(args.emit_derivation, "w", encoding="utf-8") as fh:
            json.dump(derivation.to_json(), fh, indent=2)
    return EXIT_OK if ok else EXIT_UNTYPABLE


def cmd_infer(args) -> int:
    program = _read_program(args.source)
    if args.emit_cnf:
        encoding = encode(program, t_max=args.max_tier)
        with open(args.emit_cnf, "w", encoding="utf-8") as fh:
            fh.write(to_dimacs(encoding))
    result = infer(program, t_max=args.max_tier)
    if result is None:
        if args.format == "json":
            print(json.dumps({"typable": False}))
        else:
            print("untypable")
        return EXIT_UNTYPABLE
    if args.format == "json":
        print(json.dumps(result.to_json(), indent=2))
    else:
        gamma = " ".join(f"{x}:{t}" for x, t in sorted(result.gamma.items()))
        t, inner, outer = result.triple
        print(f"typable  tier {t}  inner {inner}  outer {outer}")
        print(f"gamma    {gamma}")
    if args.emit_derivation:
        with open(args.emit_derivation, "w", encoding="utf-8") as fh:
            json.dump(result.derivation.to_json(), fh, indent=2)
    return EXIT_OK


def cmd_run(args) -> int:
    program = _read_program(args.source)
    inputs = _parse_bindings(args.input)
    oracle = _load_oracle(args.oracle)
    result = run_program(program, inputs, oracle=oracle, fuel=args.fuel)
    lr = analysis.count_lookahead_revisions(result.trace)
    if args.format == "json":
        print(
            json.dumps(
                {
                    "value": result.value,
                    "steps": result.trace.steps,
                    "m": result.trace.m,
                    "lr": lr,
                    "queries": [list(q) for q in result.trace.queries],
                }
            )
        )
    else:
        print(result.value)
        print(
            f"steps {result.trace.steps}  m {result.trace.m}  lr {lr}",
            file=sys.stderr,
        )
    return EXIT_OK


def cmd_analyze(args) -> int:
    program = _read_program(args.source)
    seed = _seed(args)
    result = infer(program, t_max=args.max_tier, with_derivation=False)
    if result is None:
        print(
            "warning: program is untypable; measurements carry no guarantees",
            file=sys.stderr,
        )
    payload: dict = {"typable": result is not None}
    status = EXIT_OK
    if args.sweep:
        scales = _parse_range(args.sweep)
        names = args.scale_vars.split(",") if args.scale_vars else None
        if names is None:
            from .syntax import variables_of

            names = list(variables_of(program))
        oracle = _load_oracle(args.oracle)
        if oracle is None and has_oracle_call(program):
            oracle = analysis.random_table_oracle(random.Random(seed))
        report = analysis.sweep(
            program,
            analysis.unary_inputs(*names),
            oracle,
            scales,
            fuel=args.fuel,
        )
        payload["sweep"] = report.to_json()
        if args.format != "json":
            print(report.to_text())
        if args.plot_data:
            with open(args.plot_data, "w", encoding="utf-8") as fh:
                fh.write(report.to_tsv())
    if args.ni:
        if result is None:
            print("cannot test non-interference without a typing", file=sys.stderr)
            status = EXIT_UNTYPABLE
        else:
            levels = sorted(set(result.gamma.values()))
            reports = []
            for level in levels:
                rep = analysis.noninterference_test(
                    program,
                    result.gamma,
                    level,
                    trials=args.trials,
                    seed=seed,
                )
                reports.append(rep)
                if args.format != "json":
                    verdict = "PASS" if rep.ok else "FAIL"
                    print(f"non-interference at level {level}: {verdict}"
                          f" ({rep.trials} trials)")
                if not rep.ok:
                    status = EXIT_UNTYPABLE
            payload["ni"] = [r.to_json() for r in reports]
    if args.format == "json":
        print(json.dumps(payload, indent=2))
    return status


def cmd_corpus_check(args) -> int:
    registry = builtin_registry()
    failures = 0
    results = []
    for entry in load_corpus():
        program = entry.program(registry)
        result = infer(program, t_max=entry.t_max, registry=registry)
        problems = []
        if (result is not None) != entry.typable:
            problems.append(
                f"expected {'typable' if entry.typable else 'untypable'}"
            )
        elif result is not None:
            if entry.gamma is not None and result.gamma != entry.gamma:
                problems.append(f"gamma {result.gamma} != {entry.gamma}")
            if entry.triple is not None and tuple(result.triple) != entry.triple:
                problems.append(f"triple {result.triple} != {entry.triple}")
            report = audit_derivation(result.derivation, result.gamma)
            if not report.ok:
                problems.append(f"audit: {report.violations[0].detail}")
        ok = not problems
        failures += not ok
        results.append({"name": entry.name, "ok": ok, "problems": problems})
        if args.format != "json":
            mark = "ok" if ok else "FAIL " + "; ".join(problems)
            print(f"{entry.name:<24} {mark}")
    if args.format == "json":
        print(json.dumps({"results": results}, indent=2))
    return EXIT_OK if failures == 0 else EXIT_UNTYPABLE


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="tier",
        description="Tiered while-language: check, infer, run, analyze.",
    )
    sub = parser.add_subparsers(dest="subcommand", required=True)

    def common(p, source=True):
        if source:
            p.add_argument("source", help="program file")
        p.add_argument(
            "--format", choices=("text", "json"), default="text",
            help="output format",
        )

    p = sub.add_parser("parse", help="parse and pretty-print a program")
    common(p)
    p.set_defaults(func=cmd_parse)

    p = sub.add_parser("check", help="check one typing judgement")
    common(p)
    p.add_argument("--gamma", help="variable tiers, e.g. x=1,y=0")
    p.add_argument("--triple", required=True, help="judgement as t,inner,outer")
    p.add_argument("--max-tier", type=int, default=None)
    p.add_argument("--emit-derivation", metavar="PATH",
                   help="write the derivation tree as JSON")
    p.set_defaults(func=cmd_check)

    p = sub.add_parser("infer", help="infer tiers by 2-SAT")
    common(p)
    p.add_argument("--max-tier", type=int, default=None)
    p.add_argument("--emit-cnf", metavar="PATH",
                   help="write the clause system in DIMACS form")
    p.add_argument("--emit-derivation", metavar="PATH",
                   help="write the derivation tree as JSON")
    p.set_defaults(func=cmd_infer)

    p = sub.add_parser("run", help="execute a program")
    common(p)
    p.add_argument("--input", action="append", default=[], metavar="VAR=VAL",
                   help="initial store binding, repeatable")
    p.add_argument("--oracle", metavar="PATH", help="oracle spec JSON file")
    p.add_argument("--fuel", type=int, default=None,
                   help="abort after this many steps")
    p.set_defaults(func=cmd_run)

    p = sub.add_parser("analyze", help="measure steps, revisions, interference")
    common(p)
    p.add_argument("--sweep", metavar="LO:HI[:STEP]",
                   help="run an input sweep over this scale range")
    p.add_argument("--scale-vars", metavar="X,Y",
                   help="variables bound to 1^scale (default: all)")
    p.add_argument("--ni", action="store_true",
                   help="randomized non-interference trials")
    p.add_argument("--trials", type=int, default=1000)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--oracle", metavar="PATH", help="oracle spec JSON file")
    p.add_argument("--fuel", type=int, default=analysis.DEFAULT_SWEEP_FUEL)
    p.add_argument("--max-tier", type=int, default=None)
    p.add_argument("--plot-data", metavar="PATH",
                   help="write m/steps pairs as TSV")
    p.set_defaults(func=cmd_analyze)

    p = sub.add_parser("corpus-check", help="regression-check bundled programs")
    common(p, source=False)
    p.set_defaults(func=cmd_corpus_check)

    return parser


def main(argv: list[str] | None = None) -> int:
    args = build_parser().parse_args(argv)
    try:
        return args.func(args)
    except ParseError as exc:
        print(f"parse error: {exc}", file=sys.stderr)
        return EXIT_PARSE
    except StuckGuard as exc:
        print(f"stuck: guard evaluated to {exc.value!r}", file=sys.stderr)
        return EXIT_STUCK
    except FuelExhausted as exc:
        print(f"fuel exhausted after {exc.fuel} steps", file=sys.stderr)
        return EXIT_FUEL
    except (ValueError, OSError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_PARSE


if __name__ == "__main__":
    sys.exit(main())
