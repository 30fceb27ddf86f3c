#!/usr/bin/env python3
"""Freeze the expected toy-design report from the reference evaluator.

Evaluates the bundled assertions against the bundled trace suite using the
independent oracle (tests/oracle_semantics.py), computes the expected
rates with plain arithmetic, and writes the fixture the acceptance test
compares the production report against. Run from the repo root.
"""

from __future__ import annotations

import json
import sys
from pathlib import Path

ROOT = Path(__file__).resolve().parent.parent
sys.path.insert(0, str(ROOT / "tests"))

from assertflow.equiv import TraceSuite, load_bug_taxonomy  # noqa: E402
from assertflow.sva import Trace, parse_assertion  # noqa: E402
from oracle_semantics import overall_verdict  # noqa: E402
from assertflow.sva.semantics import Verdict  # noqa: E402

FIXTURES = ROOT / "tests" / "fixtures" / "toy"

# the assertion corpus the scripted scenario emits, in pipeline order
SVA_KEYS = ["F1.0", "F1.1", "F2.0", "F2.1", "F3.0", "F3.1", "F4.0", "F4.1"]


def scenario_svas() -> list[str]:
    scenario = json.loads((FIXTURES / "scenario.json").read_text())
    out = []
    for key in SVA_KEYS:
        response = scenario[f"toy_fifo_controller/svas/{key}"]
        block = response.split("```json\n", 1)[1].split("```", 1)[0]
        out.extend(json.loads(block)["svas"])
    return out


def main() -> None:
    suite = TraceSuite.from_doc(json.loads((FIXTURES / "trace_suite.json").read_text()))
    texts = scenario_svas()
    taxonomy = load_bug_taxonomy()

    syntax_flags = []
    functional_flags = []
    detected_union: set[str] = set()
    distribution = {bug: 0 for bug, _ in suite.bug_traces}
    details = []

    for text in texts:
        ast = None
        try:
            ast = parse_assertion(text)
        except Exception:
            pass
        syntax_flags.append(ast is not None)
        if ast is None:
            details.append({"sva": text, "syntax_ok": False})
            continue
        golden_ok = all(overall_verdict(ast, t) is Verdict.PASS
                        for t in suite.golden_traces)
        functional_flags.append(golden_ok)
        detected = set()
        if golden_ok:
            for bug, trace in suite.bug_traces:
                if overall_verdict(ast, trace) is Verdict.FAIL:
                    detected.add(bug)
                    distribution[bug] += 1
            detected_union |= detected
        details.append({"sva": text, "syntax_ok": True, "functional_ok": golden_ok,
                        "detected": sorted(detected)})

    spr = round(100 * sum(syntax_flags) / len(syntax_flags), 2)
    fpr = round(100 * sum(functional_flags) / len(functional_flags), 2)
    coverage = round(100 * len(detected_union) / len(taxonomy), 2)

    expected = {
        "design_ref": suite.design_ref,
        "n_generated": len(texts),
        "n_syntax_ok": sum(syntax_flags),
        "n_functional": sum(functional_flags),
        "spr": spr,
        "fpr": fpr,
        "function_coverage": coverage,
        "bug_distribution": dict(sorted(distribution.items())),
        "taxonomy_size": len(taxonomy),
        "details": details,
    }
    out = FIXTURES / "expected_report.json"
    out.write_text(json.dumps(expected, indent=1) + "\n")
    print(json.dumps({k: expected[k] for k in
                      ("spr", "fpr", "function_coverage", "bug_distribution")}, indent=1))
    print(f"wrote {out}")


if __name__ == "__main__":
    main()
