"""Table emission and the query-section x corpus-view ablation driver.

All emitters are byte-deterministic: fixed column order, numbers at 4
decimals, no timestamps. The structured-text table mirrors the leaderboard
shape (model, view, Mean, IN, OUT, Gap); the gap column is recomputed from
the report's own IN/OUT means and cross-checked before writing.
"""

from __future__ import annotations

from dataclasses import dataclass
from pathlib import Path
from typing import Callable, Optional, Sequence

from .dense import dense_run, load_embeddings
from .errors import ConfigError, EmptyInputError, IntegrityError
from .fusion import SweepReport
from .metrics import METRIC_NAMES, MetricReport, aggregate
from .stats import BootstrapResult


def _fmt(x: Optional[float]) -> str:
    return "" if x is None else f"{x:.4f}"


def emit_report_tsv(reports: Sequence[tuple[str, str, MetricReport]], path: str | Path) -> None:
    """Long-form TSV: model, view, slice, metric, n_queries, value."""
    if not reports:
        raise EmptyInputError("no reports to emit")
    with open(path, "w", encoding="utf-8") as f:
        f.write("model\tview\tslice\tmetric\tn-queries\tvalue\n")
        for model, view, report in reports:
            for slice_name, sl in report.slices.items():
                for metric in METRIC_NAMES:
                    f.write(f"{model}\t{view}\t{slice_name}\t{metric}@{report.k}\t{sl.n_queries}\t{_fmt(sl.means[metric])}\n")


def emit_report_text(reports: Sequence[tuple[str, str, MetricReport]], path: str | Path, metric: str = "ndcg") -> None:
    """Leaderboard-shaped text table for one metric: Mean (ALL), IN, OUT, Gap."""
    if not reports:
        raise EmptyInputError("no reports to emit")
    rows = []
    for model, view, report in reports:
        mean = report.slices["ALL"].means[metric]
        in_mean = report.slices["IN"].means[metric] if report.slices.get("IN") and report.slices["IN"].n_queries else None
        out_mean = report.slices["OUT"].means[metric] if report.slices.get("OUT") and report.slices["OUT"].n_queries else None
        gap = None
        if in_mean is not None and out_mean is not None:
            gap = report.gap(metric)
            if abs(gap - (in_mean - out_mean)) > 1e-12:
                raise IntegrityError("gap column does not equal IN - OUT")
        rows.append((model, view, mean, in_mean, out_mean, gap))
    widths = [max(len("model"), *(len(r[0]) for r in rows)), max(len("view"), *(len(r[1]) for r in rows))]
    header = f"{'model':<{widths[0]}}  {'view':<{widths[1]}}  {'Mean':>8}  {'IN':>8}  {'OUT':>8}  {'Gap':>8}"
    lines = [header, "-" * len(header)]
    for model, view, mean, in_mean, out_mean, gap in rows:
        lines.append(
            f"{model:<{widths[0]}}  {view:<{widths[1]}}  {_fmt(mean):>8}  {_fmt(in_mean):>8}  {_fmt(out_mean):>8}  {_fmt(gap):>8}"
        )
    Path(path).write_text("\n".join(lines) + "\n", encoding="utf-8")


def emit_sweep_tsv(sweep: SweepReport, path: str | Path, k: int) -> None:
    """Fusion sweep rows with the best-fusion delta against dense-only."""
    with open(path, "w", encoding="utf-8") as f:
        f.write(f"row\t{sweep.metric}@{k}\tn-queries\n")
        for label, report in sweep.rows:
            sl = report.slices["ALL"]
            f.write(f"{label}\t{_fmt(sl.means[sweep.metric])}\t{sl.n_queries}\n")
        f.write(f"best\t{sweep.best_label}\tdelta={_fmt(sweep.best_delta)}\n")


def emit_significance_tsv(rows: Sequence[tuple[str, str, BootstrapResult]], path: str | Path, footnote: str = "") -> None:
    with open(path, "w", encoding="utf-8") as f:
        f.write("model-a\tmodel-b\tmean-a\tmean-b\tdiff\tp-value\tsig\n")
        for name_a, name_b, result in rows:
            f.write(
                f"{name_a}\t{name_b}\t{_fmt(result.mean_a)}\t{_fmt(result.mean_b)}\t"
                f"{_fmt(result.diff)}\t{result.p_str}\t{result.marker}\n"
            )
        if footnote:
            f.write(f"# {footnote}\n")


# ---------------------------------------------------------------------------
# ablation grid


@dataclass
class AblationReport:
    system: str
    cells: dict[tuple[str, str], MetricReport]  # (query_section, corpus_view)
    best_cell: tuple[str, str]
    best_value: float
    metric: str


def run_ablation_grid(
    query_sections: Sequence[str],
    corpus_views: Sequence[str],
    system: str,
    resolve: Callable[[str, str], tuple[Path, Path]],
    qrels,
    k: int = 10,
    depth: int = 1000,
    metric: str = "ndcg",
    jurisdiction_fn=None,
) -> AblationReport:
    """Evaluate every (query section, corpus view) cell with one system.

    ``resolve`` maps (section, view) to (query EMB1 path, corpus EMB1 path)
    and raises ConfigError naming the cell when one is missing; matrices are
    cached per path so shared legs load once.
    """
    if not query_sections or not corpus_views:
        raise ConfigError("ablation grid needs at least one query section and one corpus view")
    cache: dict[Path, object] = {}

    def load(path: Path):
        if path not in cache:
            cache[path] = load_embeddings(path).normalize()
        return cache[path]

    cells: dict[tuple[str, str], MetricReport] = {}
    best_cell, best_value = None, -1.0
    for qs in query_sections:
        for cv in corpus_views:
            q_path, d_path = resolve(qs, cv)
            run = dense_run(load(d_path), load(q_path), depth, system=system, view=f"{qs}->{cv}")
            report = aggregate(run, qrels, jurisdiction_fn=jurisdiction_fn, k=k)
            cells[(qs, cv)] = report
            value = report.slices["ALL"].means[metric]
            if value > best_value:
                best_cell, best_value = (qs, cv), value
    return AblationReport(system=system, cells=cells, best_cell=best_cell, best_value=best_value, metric=metric)


def emit_ablation_tsv(report: AblationReport, path: str | Path, k: int) -> None:
    views = sorted({cv for _, cv in report.cells})
    sections = sorted({qs for qs, _ in report.cells})
    with open(path, "w", encoding="utf-8") as f:
        f.write("query-section\t" + "\t".join(views) + "\n")
        for qs in sections:
            row = [qs]
            for cv in views:
                cell = report.cells.get((qs, cv))
                row.append(_fmt(cell.slices["ALL"].means[report.metric]) if cell else "")
            f.write("\t".join(row) + "\n")
        f.write(
            f"# best\t{report.system}\tquery={report.best_cell[0]}\ttarget={report.best_cell[1]}\t"
            f"{report.metric}@{k}={_fmt(report.best_value)}\n"
        )
