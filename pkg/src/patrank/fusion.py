"""Run combination: linear score interpolation, Reciprocal Rank Fusion, and
two-stage reranking from external score tables.

A Run is the universal retrieval currency: per-query ranked (doc_id, score)
lists, descending score with ties broken by ascending doc_id.

Serialization is TREC-style TSV with header
``query-id\tdoc-id\trank\tscore\tsystem``; score tables use
``query-id\tdoc-id\tscore``.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from pathlib import Path
from typing import Callable, Mapping, Optional, Sequence

from .errors import (
    ConfigError,
    EmptyInputError,
    FormatError,
    IntegrityError,
    MissingScoresError,
    ParseError,
)

Entry = tuple[str, float]


def rank_sort(entries: Sequence[Entry]) -> list[Entry]:
    """Global tie rule: descending score, ties by ascending doc_id."""
    return sorted(entries, key=lambda e: (-e[1], e[0]))


@dataclass
class Run:
    """Per-query ranked lists plus provenance."""

    rankings: dict[str, list[Entry]]
    system: str = ""
    view: str = ""
    params: dict = field(default_factory=dict)

    def __post_init__(self):
        for qid, entries in self.rankings.items():
            seen = set()
            prev: Optional[Entry] = None
            for did, score in entries:
                if did in seen:
                    raise IntegrityError(f"run {self.system!r}: duplicate doc {did!r} for query {qid!r}")
                seen.add(did)
                if prev is not None and (score > prev[1] or (score == prev[1] and did < prev[0])):
                    raise IntegrityError(f"run {self.system!r}: query {qid!r} not in tie-rule order")
                prev = (did, score)

    @classmethod
    def from_scores(cls, scores: Mapping[str, Mapping[str, float]], system: str = "", view: str = "", params: Optional[dict] = None) -> "Run":
        rankings = {qid: rank_sort(list(docs.items())) for qid, docs in scores.items()}
        return cls(rankings, system=system, view=view, params=params or {})

    @property
    def query_ids(self) -> list[str]:
        return list(self.rankings)

    def ranking(self, qid: str) -> list[str]:
        return [did for did, _ in self.rankings.get(qid, [])]

    def truncated(self, depth: int) -> "Run":
        return Run({q: e[:depth] for q, e in self.rankings.items()}, self.system, self.view, dict(self.params))


def minmax_norm(entries: Sequence[Entry]) -> list[Entry]:
    """(s - min) / (max - min); a constant list normalizes to all zeros."""
    if not entries:
        raise EmptyInputError("cannot min-max normalize an empty list")
    scores = [s for _, s in entries]
    lo, hi = min(scores), max(scores)
    if hi == lo:
        return [(d, 0.0) for d, _ in entries]
    span = hi - lo
    return [(d, (s - lo) / span) for d, s in entries]


def linear_fuse(dense_run: Run, sparse_run: Run, alpha: float, pool_depth: int = 1000) -> Run:
    """s = alpha * dense_hat + (1 - alpha) * sparse_hat over the union of the
    per-system top-pool_depth candidates; each leg min-max normalized over its
    own pooled entries, missing scores contributing 0."""
    if not 0.0 <= alpha <= 1.0:
        raise ConfigError(f"alpha must be in [0, 1], got {alpha}")
    if pool_depth < 1:
        raise ConfigError(f"pool_depth must be >= 1, got {pool_depth}")
    rankings: dict[str, list[Entry]] = {}
    for qid in _union_queries(dense_run, sparse_run):
        d_pool = dense_run.rankings.get(qid, [])[:pool_depth]
        s_pool = sparse_run.rankings.get(qid, [])[:pool_depth]
        d_norm = dict(minmax_norm(d_pool)) if d_pool else {}
        s_norm = dict(minmax_norm(s_pool)) if s_pool else {}
        fused = [
            (did, alpha * d_norm.get(did, 0.0) + (1.0 - alpha) * s_norm.get(did, 0.0))
            for did in sorted(set(d_norm) | set(s_norm))
        ]
        rankings[qid] = rank_sort(fused)
    return Run(
        rankings,
        system=f"linear({dense_run.system}+{sparse_run.system})",
        view=dense_run.view or sparse_run.view,
        params={"alpha": alpha, "pool_depth": pool_depth},
    )


def rrf_fuse(runs: Sequence[Run], k_rrf: int = 60, pool_depth: int = 1000) -> Run:
    """Reciprocal Rank Fusion: s = sum over systems of 1 / (k + rank), ranks
    1-indexed within each system's pooled list; rank-only, no normalization."""
    if len(runs) < 2:
        raise ConfigError(f"RRF needs at least 2 runs, got {len(runs)}")
    if k_rrf < 1:
        raise ConfigError(f"k_rrf must be >= 1, got {k_rrf}")
    if pool_depth < 1:
        raise ConfigError(f"pool_depth must be >= 1, got {pool_depth}")
    all_queries: dict[str, None] = {}
    for run in runs:
        for qid in run.rankings:
            all_queries.setdefault(qid)
    rankings: dict[str, list[Entry]] = {}
    for qid in sorted(all_queries):
        fused: dict[str, float] = {}
        for run in runs:
            for rank, (did, _) in enumerate(run.rankings.get(qid, [])[:pool_depth], start=1):
                fused[did] = fused.get(did, 0.0) + 1.0 / (k_rrf + rank)
        rankings[qid] = rank_sort(list(fused.items()))
    return Run(
        rankings,
        system="rrf(" + "+".join(r.system for r in runs) + ")",
        view=runs[0].view,
        params={"k_rrf": k_rrf, "pool_depth": pool_depth},
    )


def _union_queries(a: Run, b: Run) -> list[str]:
    seen: dict[str, None] = {}
    for qid in list(a.rankings) + list(b.rankings):
        seen.setdefault(qid)
    return sorted(seen)


@dataclass
class ScoreTable:
    """(query_id, doc_id) -> reranker score."""

    scores: Mapping[tuple[str, str], float]
    reranker: str = ""

    def __post_init__(self):
        for (qid, did), s in self.scores.items():
            if not math.isfinite(s):
                raise IntegrityError(f"non-finite score for ({qid!r}, {did!r})")


def rerank_with_scores(first_stage: Run, K: int, table: ScoreTable) -> Run:
    """Reorder each query's top-K candidates by the score table; the candidate
    set at depth K is unchanged by construction, docs beyond K are dropped."""
    if K < 1:
        raise ConfigError(f"K must be >= 1, got {K}")
    missing: list[tuple[str, str]] = []
    rankings: dict[str, list[Entry]] = {}
    for qid, entries in first_stage.rankings.items():
        cands = entries[:K]
        rescored: list[Entry] = []
        for did, _ in cands:
            s = table.scores.get((qid, did))
            if s is None:
                missing.append((qid, did))
            else:
                rescored.append((did, s))
        rankings[qid] = rank_sort(rescored)
    if missing:
        shown = ", ".join(f"({q},{d})" for q, d in missing[:20])
        more = "" if len(missing) <= 20 else f" and {len(missing) - 20} more"
        raise MissingScoresError(f"score table {table.reranker!r} missing {len(missing)} pairs: {shown}{more}")
    return Run(
        rankings,
        system=f"{table.reranker or 'rerank'}({first_stage.system})",
        view=first_stage.view,
        params={"K": K, "first_stage": first_stage.system},
    )


@dataclass
class SweepReport:
    """One metric report per grid point plus dense-only and sparse-only anchors."""

    rows: list[tuple[str, object]]  # (label, MetricReport)
    metric: str
    best_label: str
    best_delta: float


def sweep(
    dense_run: Run,
    sparse_run: Run,
    alphas: Sequence[float],
    k_rrfs: Sequence[int],
    evaluate: Callable[[Run], object],
    metric: str = "ndcg",
    pool_depth: int = 1000,
) -> SweepReport:
    """Drive the fusion grid; `evaluate` maps a Run to a MetricReport and the
    best-delta column compares each fusion row's ALL-slice mean to dense-only."""
    if not alphas and not k_rrfs:
        raise ConfigError("sweep needs at least one alpha or one k_rrf")

    def mean_of(report) -> float:
        return report.slices["ALL"].means[metric]

    rows: list[tuple[str, object]] = []
    dense_report = evaluate(dense_run.truncated(pool_depth))
    rows.append(("dense", dense_report))
    rows.append(("sparse", evaluate(sparse_run.truncated(pool_depth))))
    best_label, best = "dense", mean_of(dense_report)
    for alpha in alphas:
        label = f"alpha={alpha:g}"
        report = evaluate(linear_fuse(dense_run, sparse_run, alpha, pool_depth))
        rows.append((label, report))
        if mean_of(report) > best:
            best_label, best = label, mean_of(report)
    for k in k_rrfs:
        label = f"rrf_k={k}"
        report = evaluate(rrf_fuse([dense_run, sparse_run], k, pool_depth))
        rows.append((label, report))
        if mean_of(report) > best:
            best_label, best = label, mean_of(report)
    return SweepReport(rows, metric, best_label, best - mean_of(dense_report))


# ---------------------------------------------------------------------------
# serialization

RUN_HEADER = "query-id\tdoc-id\trank\tscore\tsystem"
SCORES_HEADER = "query-id\tdoc-id\tscore"


def write_run_tsv(run: Run, path: str | Path) -> None:
    with open(path, "w", encoding="utf-8") as f:
        f.write(RUN_HEADER + "\n")
        for qid in run.rankings:
            for rank, (did, score) in enumerate(run.rankings[qid], start=1):
                f.write(f"{qid}\t{did}\t{rank}\t{score!r}\t{run.system}\n")


def read_run_tsv(path: str | Path) -> Run:
    rankings: dict[str, list[Entry]] = {}
    system = ""
    with open(path, encoding="utf-8") as f:
        for i, line in enumerate(f, start=1):
            line = line.rstrip("\n")
            if not line or (i == 1 and line.startswith("query-id\t")):
                continue
            parts = line.split("\t")
            if len(parts) != 5:
                raise ParseError(f"{path}: line {i}: expected 5 tab-separated fields")
            qid, did, rank, score, system = parts
            try:
                value = float(score)
            except ValueError:
                raise ParseError(f"{path}: line {i}: bad score {score!r}") from None
            entries = rankings.setdefault(qid, [])
            if int(rank) != len(entries) + 1:
                raise FormatError(f"{path}: line {i}: rank {rank} out of sequence")
            entries.append((did, value))
    return Run(rankings, system=system)


def write_score_table_tsv(table: ScoreTable, path: str | Path) -> None:
    with open(path, "w", encoding="utf-8") as f:
        f.write(SCORES_HEADER + "\n")
        for (qid, did) in sorted(table.scores):
            f.write(f"{qid}\t{did}\t{table.scores[(qid, did)]!r}\n")


def read_score_table_tsv(path: str | Path, reranker: str = "") -> ScoreTable:
    scores: dict[tuple[str, str], float] = {}
    with open(path, encoding="utf-8") as f:
        for i, line in enumerate(f, start=1):
            line = line.rstrip("\n")
            if not line or (i == 1 and line.startswith("query-id\t")):
                continue
            parts = line.split("\t")
            if len(parts) != 3:
                raise ParseError(f"{path}: line {i}: expected 3 tab-separated fields")
            try:
                scores[(parts[0], parts[1])] = float(parts[2])
            except ValueError:
                raise ParseError(f"{path}: line {i}: bad score {parts[2]!r}") from None
    return ScoreTable(scores, reranker=reranker or str(path))
