"""Feature-contribution tables and plots from selection-frequency counts."""

from __future__ import annotations

import csv
from pathlib import Path
from typing import Mapping
from xml.sax.saxutils import escape


def contribution_table(selection_by_source: Mapping[str, int]) -> list[tuple[str, int, float]]:
    """(tag, count, percent) rows; percentages sum to 100 when any selection exists."""
    total = sum(selection_by_source.values())
    rows = []
    for tag, count in selection_by_source.items():
        pct = 100.0 * count / total if total else 0.0
        rows.append((tag, int(count), pct))
    return rows


def contribution_svg(rows, width: int = 480, bar_height: int = 22) -> str:
    pad, label_w = 10, 120
    height = pad * 2 + bar_height * max(len(rows), 1)
    span = width - label_w - 2 * pad - 60
    parts = [f'<svg xmlns="http://www.w3.org/2000/svg" width="{width}" height="{height}" '
             f'font-family="sans-serif" font-size="12">']
    for i, (tag, count, pct) in enumerate(rows):
        y = pad + i * bar_height
        w = span * pct / 100.0
        parts.append(f'<text x="{pad}" y="{y + bar_height * 0.7:.1f}">{escape(tag)}</text>')
        parts.append(f'<rect x="{pad + label_w}" y="{y + 3}" width="{w:.2f}" height="{bar_height - 6}" fill="#4c72b0"/>')
        parts.append(f'<text x="{pad + label_w + w + 4:.2f}" y="{y + bar_height * 0.7:.1f}">{pct:.2f}% ({count})</text>')
    parts.append("</svg>")
    return "\n".join(parts) + "\n"


def write_contribution_report(selection_by_source: Mapping[str, int], out_dir) -> tuple[Path, Path]:
    """Write ``contribution.csv`` and ``contribution.svg`` into ``out_dir``."""
    out = Path(out_dir)
    out.mkdir(parents=True, exist_ok=True)
    rows = contribution_table(selection_by_source)
    csv_path = out / "contribution.csv"
    with open(csv_path, "w", newline="", encoding="utf-8") as fh:
        w = csv.writer(fh)
        w.writerow(["source", "count", "percent"])
        for tag, count, pct in rows:
            w.writerow([tag, count, f"{pct:.4f}"])
    svg_path = out / "contribution.svg"
    svg_path.write_text(contribution_svg(rows), encoding="utf-8")
    return csv_path, svg_path
