#!/usr/bin/env python3
"""Re-infer every corpus entry and put its derivation through the audits.

Prints one line per entry.  Exit status is nonzero if any verdict, typing,
local rule re-check, or safety audit disagrees with the manifest.
"""

import sys

from tierlang.corpus import load_corpus
from tierlang.inference import infer
from tierlang.tiers import audit_derivation, check, verify_derivation


def main() -> int:
    bad = 0
    for entry in load_corpus():
        program = entry.program()
        result = infer(program, t_max=entry.t_max)
        if (result is not None) != entry.typable:
            print(f"{entry.name:<24} verdict mismatch")
            bad += 1
            continue
        if result is None:
            print(f"{entry.name:<24} untypable (as expected)")
            continue
        notes = []
        if result.gamma != entry.gamma or result.triple != entry.triple:
            notes.append(f"typing {result.gamma} {result.triple}")
        derivation = check(program, entry.gamma, entry.triple,
                           t_max=entry.t_max)
        if derivation is None:
            notes.append("no derivation")
        else:
            try:
                verify_derivation(derivation, entry.gamma)
            except Exception as exc:
                notes.append(f"re-check: {exc}")
            report = audit_derivation(derivation, entry.gamma)
            if not report.ok:
                notes.append(f"audits: {[v.kind for v in report.violations]}")
        if notes:
            print(f"{entry.name:<24} " + "; ".join(notes))
            bad += 1
        else:
            tier, inner, outer = entry.triple
            print(f"{entry.name:<24} ok  tier {tier} inner {inner} "
                  f"outer {outer}")
    if bad:
        print(f"{bad} entries failed", file=sys.stderr)
    return 1 if bad else 0


if __name__ == "__main__":
    raise SystemExit(main())
