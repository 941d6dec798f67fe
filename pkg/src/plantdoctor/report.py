"""Per-leaf CSV reports and comparison against manual annotations.

The CSV is the product: one row per surviving leaf identity with its
best frame, areas, and damage percentage. Formatting is fixed (UTF-8,
LF, 2-decimal ratios) so repeated runs are byte-identical and the files
can serve as golden references.
"""

from __future__ import annotations

import csv
import io
from dataclasses import dataclass

from .errors import InputError

CSV_HEADER = "leaf_id,best_frame,leaf_area_px,damage_area_px,damage_ratio_pct"


@dataclass(frozen=True)
class LeafReport:
    leaf_id: int
    best_frame: int
    leaf_area_px: int
    damage_area_px: int
    ratio_pct: float | None  # None = leaf mask came back empty


def render_csv(reports: list[LeafReport]) -> str:
    """The full CSV text, rows sorted by leaf id."""
    lines = [CSV_HEADER]
    for rep in sorted(reports, key=lambda r: r.leaf_id):
        if rep.ratio_pct is None:
            lines.append(f"{rep.leaf_id},{rep.best_frame},,,")
        else:
            lines.append(f"{rep.leaf_id},{rep.best_frame},{rep.leaf_area_px},"
                         f"{rep.damage_area_px},{rep.ratio_pct:.2f}")
    return "\n".join(lines) + "\n"


def write_csv(reports: list[LeafReport], path: str) -> None:
    try:
        with open(path, "w", encoding="utf-8", newline="\n") as fh:
            fh.write(render_csv(reports))
    except OSError as exc:
        raise InputError(f"cannot write report: {exc}") from exc


def read_report_csv(path: str) -> dict[int, float | None]:
    """leaf_id -> ratio (None for empty-ratio rows) from a report CSV."""
    try:
        with open(path, "r", encoding="utf-8", newline="") as fh:
            text = fh.read()
    except OSError as exc:
        raise InputError(f"cannot read report: {exc}") from exc
    reader = csv.reader(io.StringIO(text))
    try:
        header = next(reader)
    except StopIteration:
        raise InputError(f"{path}: empty file") from None
    if [h.strip() for h in header] != CSV_HEADER.split(","):
        raise InputError(f"{path}: unexpected header {','.join(header)!r}")
    ratios: dict[int, float | None] = {}
    for row in reader:
        if not row or all(not cell.strip() for cell in row):
            continue
        if len(row) != 5:
            raise InputError(f"{path}: malformed row {row!r}")
        try:
            leaf_id = int(row[0])
            ratio = float(row[4]) if row[4].strip() else None
        except ValueError as exc:
            raise InputError(f"{path}: malformed row {row!r}") from exc
        if leaf_id in ratios:
            raise InputError(f"{path}: duplicate leaf_id {leaf_id}")
        ratios[leaf_id] = ratio
    return ratios


@dataclass(frozen=True)
class ComparisonRow:
    leaf_id: int
    ours_pct: float
    manual_pct: float
    abs_diff_pp: float          # |ours - manual| in percentage points
    rel_diff_pct: float | None  # abs diff / manual * 100; None when manual is 0


@dataclass(frozen=True)
class ComparisonResult:
    rows: list[ComparisonRow]
    unmatched: list[int]              # ids present in only one file (or not comparable)
    mean_abs_diff_pp: float | None
    mean_rel_diff_pct: float | None   # mean over rows where manual > 0


def compare_annotations(ours_path: str, manual_path: str) -> ComparisonResult:
    """Join two report CSVs on leaf_id and measure their disagreement.

    Ids present in only one file (or with an empty ratio on either side)
    are listed as unmatched and excluded from aggregates. The relative
    difference uses the manual annotation as denominator; zero-manual
    rows contribute to the absolute aggregate only.
    """
    ours = read_report_csv(ours_path)
    manual = read_report_csv(manual_path)

    rows = []
    unmatched = []
    for leaf_id in sorted(set(ours) | set(manual)):
        a = ours.get(leaf_id)
        b = manual.get(leaf_id)
        if a is None or b is None:
            unmatched.append(leaf_id)
            continue
        abs_diff = abs(a - b)
        rel = (100.0 * abs_diff / b) if b != 0 else None
        rows.append(ComparisonRow(leaf_id, a, b, abs_diff, rel))

    abs_vals = [r.abs_diff_pp for r in rows]
    rel_vals = [r.rel_diff_pct for r in rows if r.rel_diff_pct is not None]
    return ComparisonResult(
        rows=rows,
        unmatched=unmatched,
        mean_abs_diff_pp=sum(abs_vals) / len(abs_vals) if abs_vals else None,
        mean_rel_diff_pct=sum(rel_vals) / len(rel_vals) if rel_vals else None,
    )


def render_comparison(result: ComparisonResult) -> str:
    """TSV table of the comparison, aggregate line last."""
    lines = ["leaf_id\tours_pct\tmanual_pct\tabs_diff_pp\trel_diff_pct"]
    for row in result.rows:
        rel = f"{row.rel_diff_pct:.1f}" if row.rel_diff_pct is not None else ""
        lines.append(f"{row.leaf_id}\t{row.ours_pct:.2f}\t{row.manual_pct:.2f}"
                     f"\t{row.abs_diff_pp:.2f}\t{rel}")
    if result.unmatched:
        joined = ",".join(str(i) for i in result.unmatched)
        lines.append(f"# unmatched leaf ids (excluded from aggregates): {joined}")
    if result.mean_abs_diff_pp is not None:
        rel = (f"{result.mean_rel_diff_pct:.1f}"
               if result.mean_rel_diff_pct is not None else "")
        lines.append(f"mean\t\t\t{result.mean_abs_diff_pp:.2f}\t{rel}")
    return "\n".join(lines) + "\n"


def summary_line(reports: list[LeafReport]) -> str:
    """One-line run summary for standard error."""
    ratios = [r.ratio_pct for r in reports if r.ratio_pct is not None]
    if not ratios:
        return f"leaves found: {len(reports)}"
    return (f"leaves found: {len(reports)}, mean ratio: {sum(ratios) / len(ratios):.2f}%, "
            f"max ratio: {max(ratios):.2f}%")
