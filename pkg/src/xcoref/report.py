"""Rendering of evaluation reports: aligned text table, delimited output,
and matplotlib figures written alongside."""

from __future__ import annotations

import json
import os

import matplotlib

matplotlib.use("Agg")
import matplotlib.pyplot as plt  # noqa: E402

from .metrics import EvalReport  # noqa: E402

COLUMNS = ("muc", "b_cubed", "ceaf_e")
LABELS = {"muc": "MUC", "b_cubed": "B3", "ceaf_e": "CEAF-e"}


def report_table(report: EvalReport, name: str = "model") -> str:
    """Aligned text table in MUC, B3, CEAF-e, CoNLL column order."""
    header1 = f"{'':18s}" + "".join(f"{LABELS[c]:^21s}" for c in COLUMNS) + f"{'CoNLL':^7s}"
    header2 = f"{'Model':18s}" + "   R      P      F1   " * 3 + "  F1   "
    row = f"{name:18s}"
    for c in COLUMNS:
        s = getattr(report, c)
        row += f"{100 * s.recall:6.1f} {100 * s.precision:6.1f} {100 * s.f1:6.1f}  "
    row += f"{100 * report.conll_f1:6.1f}"
    return "\n".join([header1, header2, row])


def report_tsv(report: EvalReport, name: str = "model") -> str:
    lines = ["model\tmetric\trecall\tprecision\tf1"]
    for c in COLUMNS:
        s = getattr(report, c)
        lines.append(f"{name}\t{LABELS[c]}\t{s.recall:.6f}\t{s.precision:.6f}\t{s.f1:.6f}")
    lines.append(f"{name}\tCoNLL\t\t\t{report.conll_f1:.6f}")
    return "\n".join(lines) + "\n"


def write_report(report: EvalReport, out_dir: str, name: str = "model",
                 extra: dict | None = None) -> None:
    """Write report.json, report.tsv and a metrics bar-chart figure."""
    os.makedirs(out_dir, exist_ok=True)
    payload = {"model": name, **report.to_dict()}
    if extra:
        payload.update(extra)
    with open(os.path.join(out_dir, "report.json"), "w", encoding="utf-8") as fh:
        json.dump(payload, fh, indent=2)
    with open(os.path.join(out_dir, "report.tsv"), "w", encoding="utf-8") as fh:
        fh.write(report_tsv(report, name))

    fig, ax = plt.subplots(figsize=(7, 4))
    width = 0.25
    xs = range(len(COLUMNS))
    for k, attr in enumerate(("recall", "precision", "f1")):
        vals = [getattr(getattr(report, c), attr) for c in COLUMNS]
        ax.bar([x + (k - 1) * width for x in xs], vals, width, label=attr)
    ax.axhline(report.conll_f1, color="gray", linestyle="--",
               label=f"CoNLL F1 = {report.conll_f1:.3f}")
    ax.set_xticks(list(xs))
    ax.set_xticklabels([LABELS[c] for c in COLUMNS])
    ax.set_ylim(0, 1.05)
    ax.set_title(f"Coreference metrics: {name}")
    ax.legend(loc="lower right")
    fig.tight_layout()
    fig.savefig(os.path.join(out_dir, "metrics.png"), dpi=120)
    plt.close(fig)


def write_silhouette_figure(scores: dict[int, float], chosen: int, out_dir: str) -> None:
    os.makedirs(out_dir, exist_ok=True)
    ks = sorted(scores)
    fig, ax = plt.subplots(figsize=(6, 4))
    ax.plot(ks, [scores[k] for k in ks], marker="o")
    ax.axvline(chosen, color="red", linestyle="--", label=f"selected K = {chosen}")
    ax.set_xlabel("K")
    ax.set_ylabel("mean silhouette coefficient")
    ax.legend()
    fig.tight_layout()
    fig.savefig(os.path.join(out_dir, "silhouette.png"), dpi=120)
    plt.close(fig)
