"""Per-query retrieval metrics and slice-aware aggregation.

Metric definitions (binary gains throughout):

* nDCG@k  -- DCG with 1/log2(rank+1) discounting, normalized by the ideal
  DCG of min(|relevant|, k) ones at the top.
* Recall@k -- retrieved relevant in the top k over |relevant|.
* AP -- average precision over the full retrieved ranking; relevant documents
  never retrieved contribute zero.
* RR -- reciprocal rank of the first relevant document (0 if none retrieved).

Slices: ALL uses every judgment; IN (OUT) restricts each query's relevant set
to its IN-tagged (OUT-tagged) judgments and drops queries whose restricted
set is empty, so one query can contribute to both slices. UNRESOLVED
judgments stay in ALL only. Jurisdiction slices partition queries by the
query doc_id's jurisdiction group.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Callable, Mapping, Optional, Sequence

from .corpus import IN, OUT, Qrels, jurisdiction_group
from .errors import EmptyInputError, IntegrityError
from .fusion import Run

METRIC_NAMES = ("ndcg", "recall", "ap", "rr")


@dataclass(frozen=True)
class QueryMetrics:
    query_id: str
    k: int
    ndcg_at_k: float
    recall_at_k: float
    ap: float
    rr: float

    def value(self, metric: str) -> float:
        return {"ndcg": self.ndcg_at_k, "recall": self.recall_at_k, "ap": self.ap, "rr": self.rr}[metric]


def query_metrics(ranking: Sequence[str], relevant: set[str], k: int, query_id: str = "") -> QueryMetrics:
    if not relevant:
        raise EmptyInputError(f"query {query_id!r}: empty relevant set")
    if len(set(ranking)) != len(ranking):
        raise IntegrityError(f"query {query_id!r}: duplicate docs in ranking")
    dcg = 0.0
    hits_at_k = 0
    ap_sum = 0.0
    hits = 0
    rr = 0.0
    for i, doc_id in enumerate(ranking, start=1):
        if doc_id in relevant:
            hits += 1
            if rr == 0.0:
                rr = 1.0 / i
            ap_sum += hits / i
            if i <= k:
                hits_at_k += 1
                dcg += 1.0 / math.log2(i + 1)
    ideal = sum(1.0 / math.log2(i + 1) for i in range(1, min(len(relevant), k) + 1))
    return QueryMetrics(
        query_id=query_id,
        k=k,
        ndcg_at_k=dcg / ideal if ideal > 0 else 0.0,
        recall_at_k=hits_at_k / len(relevant),
        ap=ap_sum / len(relevant),
        rr=rr,
    )


@dataclass
class SliceReport:
    n_queries: int
    means: dict[str, float]
    per_query: dict[str, QueryMetrics] = field(repr=False, default_factory=dict)

    def scores(self, metric: str) -> list[float]:
        """Per-query metric values in slice query order (bootstrap input)."""
        return [qm.value(metric) for qm in self.per_query.values()]


@dataclass
class MetricReport:
    k: int
    slices: dict[str, SliceReport]
    system: str = ""
    view: str = ""

    def gap(self, metric: str) -> Optional[float]:
        if "IN" not in self.slices or "OUT" not in self.slices:
            return None
        return self.slices["IN"].means[metric] - self.slices["OUT"].means[metric]


def _slice_report(queries: Sequence[str], rels: Mapping[str, set[str]], run: Run, k: int) -> SliceReport:
    per_query: dict[str, QueryMetrics] = {}
    for qid in queries:
        per_query[qid] = query_metrics(run.ranking(qid), rels[qid], k, query_id=qid)
    n = len(per_query)
    means = {
        m: (sum(qm.value(m) for qm in per_query.values()) / n if n else 0.0)
        for m in METRIC_NAMES
    }
    return SliceReport(n_queries=n, means=means, per_query=per_query)


def aggregate(
    run: Run,
    qrels: Qrels,
    jurisdiction_fn: Optional[Callable[[str], str]] = None,
    k: int = 10,
) -> MetricReport:
    """Evaluate a run against qrels with ALL/IN/OUT and jurisdiction slices.

    Queries present in qrels but absent from the run score zero on every
    metric and stay in the counts, keeping model comparisons paired.
    """
    all_rels = {qid: qrels.relevant(qid) for qid in qrels.query_ids}
    slices: dict[str, SliceReport] = {
        "ALL": _slice_report(qrels.query_ids, all_rels, run, k)
    }
    for name, tag in (("IN", IN), ("OUT", OUT)):
        tagged = {qid: qrels.tagged(qid, tag) for qid in qrels.query_ids}
        queries = [qid for qid in qrels.query_ids if tagged[qid]]
        slices[name] = _slice_report(queries, tagged, run, k)
    if jurisdiction_fn is not None:
        by_group: dict[str, list[str]] = {}
        for qid in qrels.query_ids:
            by_group.setdefault(jurisdiction_fn(qid), []).append(qid)
        for group in sorted(by_group):
            slices[f"jurisdiction:{group}"] = _slice_report(by_group[group], all_rels, run, k)
    return MetricReport(k=k, slices=slices, system=run.system, view=run.view)


def dwpi_advantage(metric_combined: float, metric_nodwpi: float) -> float:
    """Expert-summary advantage: metric(Combined) - metric(noDWPI)."""
    if not (math.isfinite(metric_combined) and math.isfinite(metric_nodwpi)):
        raise ValueError("dwpi_advantage requires finite inputs")
    return metric_combined - metric_nodwpi


def default_jurisdiction_fn(doc_id: str) -> str:
    return jurisdiction_group(doc_id)
