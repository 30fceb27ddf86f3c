"""Pass rates, function coverage, bug-distribution reporting.

Rates are exact rationals reported to two decimals. Undefined rates
(empty denominators) are reported as not-applicable, never 0 or 100:
a silent zero would corrupt any aggregate built on top.
"""

from __future__ import annotations

import csv
import io
from dataclasses import dataclass, field
from decimal import ROUND_HALF_UP, Decimal
from fractions import Fraction

from assertflow import artifacts as art
from assertflow.equiv import (
    ConformanceResult,
    TraceSuite,
    check_conformance,
    check_equivalence,
    load_bug_taxonomy,
)
from assertflow.errors import UndefinedRateError, UnknownSignalError
from assertflow.ids import canonical_json
from assertflow.sva import ast as sva_ast


def pass_rate(verdicts: list[bool] | tuple[bool, ...]) -> float:
    """(count of true / N) * 100, exact to two decimals.

    Raises UndefinedRateError on an empty list; a rate over nothing is
    not zero.
    """
    if len(verdicts) == 0:
        raise UndefinedRateError("pass rate over an empty list is undefined")
    fraction = Fraction(sum(1 for v in verdicts if v), len(verdicts)) * 100
    return _round2(fraction)


def _round2(fraction: Fraction) -> float:
    quantized = (Decimal(fraction.numerator) / Decimal(fraction.denominator)).quantize(
        Decimal("0.01"), rounding=ROUND_HALF_UP)
    return float(quantized)


@dataclass(frozen=True)
class DesignMetrics:
    design_ref: str
    n_generated: int
    n_syntax_ok: int
    n_functional: int
    spr: float | None
    fpr: float | None
    function_coverage: float | None
    bug_distribution: dict[str, int]


@dataclass(frozen=True)
class EvalReport:
    run_ref: str
    n_generated: int
    spr: float | None
    fpr: float | None
    function_coverage: float | None
    bug_distribution: dict[str, int]
    per_design: tuple[DesignMetrics, ...]
    taxonomy_size: int
    warnings: tuple[str, ...] = ()

    def to_doc(self) -> dict:
        return {
            "kind": "eval_report",
            "schema_version": 1,
            "run_ref": self.run_ref,
            "n_generated": self.n_generated,
            "spr": self.spr,
            "fpr": self.fpr,
            "function_coverage": self.function_coverage,
            "bug_distribution": dict(sorted(self.bug_distribution.items())),
            "per_design": [
                {
                    "design_ref": d.design_ref,
                    "n_generated": d.n_generated,
                    "n_syntax_ok": d.n_syntax_ok,
                    "n_functional": d.n_functional,
                    "spr": d.spr,
                    "fpr": d.fpr,
                    "function_coverage": d.function_coverage,
                    "bug_distribution": dict(sorted(d.bug_distribution.items())),
                }
                for d in self.per_design
            ],
            "taxonomy_size": self.taxonomy_size,
            "warnings": list(self.warnings),
        }

    @classmethod
    def from_doc(cls, doc: dict) -> "EvalReport":
        per_design = tuple(
            DesignMetrics(d["design_ref"], d["n_generated"], d["n_syntax_ok"],
                          d["n_functional"], d["spr"], d["fpr"],
                          d["function_coverage"], dict(d["bug_distribution"]))
            for d in doc["per_design"])
        return cls(run_ref=doc["run_ref"], n_generated=doc["n_generated"],
                   spr=doc["spr"], fpr=doc["fpr"],
                   function_coverage=doc["function_coverage"],
                   bug_distribution=dict(doc["bug_distribution"]),
                   per_design=per_design, taxonomy_size=doc["taxonomy_size"],
                   warnings=tuple(doc.get("warnings", [])))


@dataclass(frozen=True)
class EquivReportConfig:
    bound: int | None = None
    mode: str = "auto"
    sample_n: int = 10_000
    seed: int = 0


def compute_report(svas: list[art.SvaAssertion], suites: dict[str, TraceSuite],
                   golden_map: dict[str, art.SvaAssertion] | None = None,
                   equiv_config: EquivReportConfig | None = None,
                   design_refs: dict[str, str] | None = None,
                   run_ref: str = "", taxonomy: tuple[str, ...] | None = None,
                   ) -> EvalReport:
    """Score generated assertions against their designs' trace suites.

    Syntax pass rate covers everything generated; function pass rate
    covers the syntactically valid subset. An assertion is functionally
    correct when it is bounded-equivalent to its designated golden
    assertion (golden_map entry keyed by SVA id), or, without a golden,
    when it passes every golden trace of its suite. Coverage is the
    fraction of the bug taxonomy detected by at least one functionally
    correct assertion.
    """
    golden_map = golden_map or {}
    equiv_config = equiv_config or EquivReportConfig()
    taxonomy = taxonomy or load_bug_taxonomy()
    if not suites:
        raise ValueError("at least one trace suite is required")
    for suite in suites.values():
        if set(suite.taxonomy) != set(taxonomy):
            raise ValueError("all suites must share the report taxonomy")
    warnings: list[str] = []

    def design_of(sva: art.SvaAssertion) -> str | None:
        if design_refs and sva.id in design_refs:
            return design_refs[sva.id]
        if len(suites) == 1:
            return next(iter(suites))
        return None

    grouped: dict[str, list[art.SvaAssertion]] = {ref: [] for ref in suites}
    for sva in svas:
        ref = design_of(sva)
        if ref is None or ref not in suites:
            warnings.append(f"sva {sva.id}: no trace suite mapping; skipped")
            continue
        grouped[ref].append(sva)

    per_design: list[DesignMetrics] = []
    for design_ref in sorted(grouped):
        group = grouped[design_ref]
        if not group:
            continue
        suite = suites[design_ref]
        syntax_flags = [s.syntax_ok for s in group]
        functional_flags: list[bool] = []
        detected_union: set[str] = set()
        distribution: dict[str, int] = {bug: 0 for bug, _ in suite.bug_traces}
        for sva in group:
            if not sva.syntax_ok:
                continue
            correct, conformance = _functional_check(sva, suite, golden_map,
                                                     equiv_config, warnings)
            functional_flags.append(correct)
            if correct and conformance is not None:
                detected_union |= conformance.detected
                for bug in conformance.detected:
                    distribution[bug] = distribution.get(bug, 0) + 1
        spr = pass_rate(syntax_flags) if syntax_flags else None
        fpr = pass_rate(functional_flags) if functional_flags else None
        coverage = _round2(Fraction(len(detected_union), len(taxonomy)) * 100)
        per_design.append(DesignMetrics(
            design_ref=design_ref, n_generated=len(group),
            n_syntax_ok=sum(syntax_flags), n_functional=sum(functional_flags),
            spr=spr, fpr=fpr, function_coverage=coverage,
            bug_distribution=distribution))

    total_distribution: dict[str, int] = {}
    for d in per_design:
        for bug, count in d.bug_distribution.items():
            total_distribution[bug] = total_distribution.get(bug, 0) + count
    return EvalReport(
        run_ref=run_ref,
        n_generated=sum(d.n_generated for d in per_design),
        spr=_mean_rate([d.spr for d in per_design]),
        fpr=_mean_rate([d.fpr for d in per_design]),
        function_coverage=_mean_rate([d.function_coverage for d in per_design]),
        bug_distribution=total_distribution,
        per_design=tuple(per_design),
        taxonomy_size=len(taxonomy),
        warnings=tuple(warnings),
    )


def _functional_check(sva: art.SvaAssertion, suite: TraceSuite, golden_map: dict,
                      equiv_config: EquivReportConfig, warnings: list[str],
                      ) -> tuple[bool, ConformanceResult | None]:
    golden = golden_map.get(sva.id)
    try:
        if golden is not None and golden.ast is not None:
            result = check_equivalence(
                sva.ast, golden.ast, bound=equiv_config.bound, mode=equiv_config.mode,
                sample_n=equiv_config.sample_n, seed=equiv_config.seed)
            correct = result.verdict == "equivalent"
        else:
            correct = None  # decided by conformance below
        conformance = check_conformance(sva.ast, suite)
        if correct is None:
            correct = conformance.functional_ok
        return correct, conformance
    except UnknownSignalError as exc:
        # out-of-suite signals: excluded from evaluation, counted incorrect
        warnings.append(f"sva {sva.id}: references {exc.name!r} outside its suite; "
                        "counted as functionally incorrect")
        return False, None


def _mean_rate(values: list[float | None]) -> float | None:
    # per-design aggregation is an unweighted mean over defined rates
    defined = [v for v in values if v is not None]
    if not defined:
        return None
    return _round2(Fraction(sum(Fraction(str(v)) for v in defined), len(defined)))


# --------------------------------------------------------------------------
# Emission

def emit_report(report: EvalReport, format: str = "structured") -> str:
    """Render a report as canonical JSON, a text table, or CSV.

    Identical reports produce identical bytes in every format.
    """
    if format == "structured":
        return canonical_json(report.to_doc()) + "\n"
    if format == "csv":
        return _emit_csv(report)
    if format in ("table", "table-text"):
        return _emit_table(report)
    raise ValueError(f"unknown report format {format!r}")


def _fmt_rate(value: float | None) -> str:
    return "n/a" if value is None else f"{value:.2f}"


def _emit_csv(report: EvalReport) -> str:
    buffer = io.StringIO()
    writer = csv.writer(buffer, lineterminator="\n")
    writer.writerow(["design_ref", "n_generated", "n_syntax_ok", "n_functional",
                     "spr", "fpr", "function_coverage"])
    for d in report.per_design:
        writer.writerow([d.design_ref, d.n_generated, d.n_syntax_ok, d.n_functional,
                         _fmt_rate(d.spr), _fmt_rate(d.fpr), _fmt_rate(d.function_coverage)])
    return buffer.getvalue()


def _emit_table(report: EvalReport) -> str:
    lines = [
        f"run: {report.run_ref or '(none)'}",
        f"generated: {report.n_generated}",
        f"syntax pass rate:    {_fmt_rate(report.spr)}%",
        f"function pass rate:  {_fmt_rate(report.fpr)}%",
        f"function coverage:   {_fmt_rate(report.function_coverage)}% "
        f"(taxonomy of {report.taxonomy_size})",
        "",
        "bug distribution (assertions detecting each type):",
    ]
    dist = sorted(report.bug_distribution.items())
    width = max((len(b) for b, _ in dist), default=0)
    peak = max((c for _, c in dist), default=0) or 1
    for bug, count in dist:
        bar = "#" * max(1, round(count * 24 / peak)) if count else ""
        lines.append(f"  {bug.ljust(width)} {str(count).rjust(3)} {bar}")
    if len(report.per_design) > 1:
        lines.append("")
        lines.append("per design:")
        for d in report.per_design:
            lines.append(f"  {d.design_ref}: n={d.n_generated} spr={_fmt_rate(d.spr)} "
                         f"fpr={_fmt_rate(d.fpr)} coverage={_fmt_rate(d.function_coverage)}")
    for warning in report.warnings:
        lines.append(f"warning: {warning}")
    return "\n".join(lines) + "\n"
