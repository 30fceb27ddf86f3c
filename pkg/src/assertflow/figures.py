"""Figure rendering for report and filter-simulation outputs.

The CLI report paths write these PNGs next to the delimited output files.
Rendering is pure matplotlib on the Agg backend; no display is required.
"""

from __future__ import annotations

from pathlib import Path

import matplotlib

matplotlib.use("Agg")

import matplotlib.pyplot as plt  # noqa: E402  (backend must be set first)

from assertflow.bridge import FilterStats  # noqa: E402
from assertflow.metrics import EvalReport  # noqa: E402


def render_report_figures(report: EvalReport, out_base: Path) -> list[Path]:
    """Bug-distribution histogram and per-design rate bars.

    Returns the written paths, derived from out_base (suffix replaced).
    """
    out_base = Path(out_base)
    written = []

    dist = sorted(report.bug_distribution.items())
    if dist:
        fig, ax = plt.subplots(figsize=(8, max(2.5, 0.4 * len(dist))))
        names = [b for b, _ in dist]
        counts = [c for _, c in dist]
        ax.barh(names, counts, color="#4878a8")
        ax.set_xlabel("assertions detecting the bug type")
        ax.set_title("Bug detection distribution")
        ax.invert_yaxis()
        fig.tight_layout()
        path = out_base.with_name(out_base.stem + "_bug_distribution.png")
        fig.savefig(path, dpi=120)
        plt.close(fig)
        written.append(path)

    fig, ax = plt.subplots(figsize=(7, 4))
    designs = list(report.per_design)
    labels = [d.design_ref for d in designs]
    x = range(len(designs))
    width = 0.27
    for offset, (attr, label, color) in enumerate((
            ("spr", "syntax pass", "#4878a8"),
            ("fpr", "function pass", "#6aa84f"),
            ("function_coverage", "coverage", "#b45f06"))):
        values = [getattr(d, attr) or 0.0 for d in designs]
        ax.bar([i + (offset - 1) * width for i in x], values, width,
               label=label, color=color)
    ax.set_xticks(list(x))
    ax.set_xticklabels(labels, rotation=15, ha="right")
    ax.set_ylabel("percent")
    ax.set_ylim(0, 105)
    ax.set_title("Assertion quality per design")
    ax.legend(loc="lower right")
    fig.tight_layout()
    path = out_base.with_name(out_base.stem + "_rates.png")
    fig.savefig(path, dpi=120)
    plt.close(fig)
    written.append(path)
    return written


def render_filter_figure(stats: list[FilterStats], out_base: Path) -> Path:
    """Stacked confusion composition per k with the precision curve overlaid."""
    out_base = Path(out_base)
    ks = [s.k for s in stats]
    fig, ax = plt.subplots(figsize=(7, 4.5))
    bottoms = [0] * len(stats)
    for attr, label, color in (("tp", "true positive", "#6aa84f"),
                               ("fp", "false positive", "#cc0000"),
                               ("tn", "true negative", "#9fc5e8"),
                               ("fn", "false negative", "#f1c232")):
        values = [getattr(s, attr) for s in stats]
        ax.bar([str(k) for k in ks], values, bottom=bottoms, label=label, color=color)
        bottoms = [b + v for b, v in zip(bottoms, values)]
    ax.set_xlabel("agents per unanimous check (k)")
    ax.set_ylabel("items")
    ax.set_title("Validated data composition vs. filter strength")
    ax.legend(loc="center left", fontsize=8)

    twin = ax.twinx()
    precision = [s.precision if s.precision is not None else float("nan") for s in stats]
    twin.plot([str(k) for k in ks], precision, "ko-", label="precision")
    twin.set_ylabel("precision (%)")
    twin.set_ylim(80, 100.5)
    fig.tight_layout()
    path = out_base.with_name(out_base.stem + "_filter_curves.png")
    fig.savefig(path, dpi=120)
    plt.close(fig)
    return path
