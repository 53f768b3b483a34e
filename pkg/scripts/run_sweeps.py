#!/usr/bin/env python3
"""Run the step-count and lookahead sweeps over the bundled corpus.

Writes one TSV per program (columns: scale, m, steps, revisions) plus a
summary JSON with the fitted log-log slopes, mirroring what `tier analyze`
prints for a single file.
"""

import argparse
import json
import pathlib
import random
import sys

from tierlang.analysis import random_table_oracle, sweep, unary_inputs
from tierlang.corpus import load_corpus
from tierlang.syntax import has_oracle_call


def main() -> int:
    ap = argparse.ArgumentParser(description=__doc__)
    ap.add_argument("--out", default="results", help="output directory")
    ap.add_argument("--max-k", type=int, default=10,
                    help="largest scale as a power of two")
    ap.add_argument("--quadratic-max-k", type=int, default=7,
                    help="scale cap for degree-2 programs, whose values "
                    "blow past what the interpreter can copy quickly")
    ap.add_argument("--table-seed", type=int, default=0)
    args = ap.parse_args()

    out = pathlib.Path(args.out)
    out.mkdir(parents=True, exist_ok=True)
    summary = []
    for entry in load_corpus():
        if not entry.in_sweep:
            continue
        program = entry.program()
        top = args.max_k if entry.degree <= 1 else args.quadratic_max_k
        scales = [2 ** k for k in range(1, top + 1)]
        oracle = None
        if has_oracle_call(program):
            oracle = random_table_oracle(random.Random(args.table_seed))
        report = sweep(program, unary_inputs(*entry.scale_vars), oracle, scales)
        path = out / f"{entry.name}.tsv"
        rows = ["scale\tm\tsteps\trevisions"]
        rows += [f"{p.scale}\t{p.m}\t{p.steps}\t{p.lr}" for p in report.points]
        path.write_text("\n".join(rows) + "\n")
        summary.append({
            "name": entry.name,
            "degree": entry.degree,
            "slope": report.slope,
            "max_revisions": report.max_lr,
            "points": len(report.points),
        })
        slope = "n/a" if report.slope is None else f"{report.slope:.3f}"
        print(f"{entry.name:<20} degree {entry.degree}  slope {slope}")
    (out / "summary.json").write_text(json.dumps(summary, indent=2) + "\n")
    print(f"wrote {len(summary)} sweeps to {out}/", file=sys.stderr)
    return 0


if __name__ == "__main__":
    raise SystemExit(main())
