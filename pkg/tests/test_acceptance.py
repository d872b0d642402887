"""Acceptance suite: one test per criterion, each printing a PASS line.

Run with `pytest tests/test_acceptance.py -v -s` to see the per-criterion
lines. Tolerances and runtime budgets are pinned in the assertions.
"""

import math
import time
from pathlib import Path

import numpy as np
import pytest

from patrank.bm25 import build_bm25, bm25_topk
from patrank.cli import main as cli_main
from patrank.corpus import (
    IN,
    OUT,
    UNRESOLVED,
    CitationEdge,
    Corpus,
    Document,
    Split,
    build_qrels,
    family_disjoint_split,
)
from patrank.dense import EmbeddingMatrix, TokenEmbeddings, cosine_topk, maxsim_topk, truncate_renorm
from patrank.fusion import Run, ScoreTable, linear_fuse, rerank_with_scores, rrf_fuse
from patrank.metrics import aggregate, dwpi_advantage, query_metrics
from patrank.probes import LabelMatrix, clustering_scores, train_linear_probe
from patrank.recipes import generate_pairs
from patrank.stats import paired_bootstrap


def ok(name: str) -> None:
    print(f"ACCEPTANCE PASS: {name}")


# ---------------------------------------------------------------------------
# 1. metric oracle equivalence


def brute_reference(ranking, relevant, k):
    gains = [1 if d in relevant else 0 for d in ranking]
    dcg = sum(g / math.log2(i + 2) for i, g in enumerate(gains[:k]))
    ideal = sum(1.0 / math.log2(i + 2) for i in range(min(len(relevant), k)))
    precisions, hits = [], 0
    for i, g in enumerate(gains, start=1):
        if g:
            hits += 1
            precisions.append(hits / i)
    return (
        dcg / ideal if ideal else 0.0,
        sum(gains[:k]) / len(relevant),
        sum(precisions) / len(relevant),
        next((1.0 / (i + 1) for i, g in enumerate(gains) if g), 0.0),
    )


def test_metric_oracle_equivalence():
    start = time.perf_counter()
    rng = np.random.default_rng(42)
    docs = [f"d{i:03d}" for i in range(500)]
    for q in range(200):
        depth = int(rng.integers(10, 400))
        ranking = list(rng.permutation(docs)[:depth])
        relevant = set(rng.choice(docs, size=int(rng.integers(1, 6)), replace=False))
        qm = query_metrics(ranking, relevant, 10, query_id=f"q{q}")
        ndcg, recall, ap, rr = brute_reference(ranking, relevant, 10)
        assert abs(qm.ndcg_at_k - ndcg) < 1e-9
        assert abs(qm.recall_at_k - recall) < 1e-9
        assert abs(qm.ap - ap) < 1e-9
        assert abs(qm.rr - rr) < 1e-9
    elapsed = time.perf_counter() - start
    assert elapsed < 10.0, f"metric oracle took {elapsed:.1f}s"
    ok(f"metric oracle equivalence (200 queries, 1e-9, {elapsed:.2f}s)")


# ---------------------------------------------------------------------------
# 2. BM25 formula check


def test_bm25_hand_evaluated_formula():
    texts = {
        "d1": "wheel chair lift",
        "d2": "wheel wheel brake",
        "d3": "hearing aid amplifier",
        "d4": "braille display reader device",
        "d5": "chair lift motor",
    }
    index = build_bm25(texts, k1=1.5, b=0.75)
    # hand evaluation: N=5, avgdl=16/5=3.2; "wheel" and "chair" both df=2,
    # idf = ln(1 + (5-2+0.5)/(2+0.5)) = ln(2.4);
    # length norm for len-3 docs: 1.5*(0.25 + 0.75*3/3.2) = 1.4296875
    idf = math.log(2.4)
    k3 = 1.5 * (0.25 + 0.75 * 3 / 3.2)
    expected = {
        "d1": idf * 1 * 2.5 / (1 + k3) + idf * 1 * 2.5 / (1 + k3),
        "d2": idf * 2 * 2.5 / (2 + k3),
        "d5": idf * 1 * 2.5 / (1 + k3),
    }
    ranking = bm25_topk(index, "wheel chair", 10)
    assert [d for d, _ in ranking] == ["d1", "d2", "d5"]
    for doc_id, score in ranking:
        assert abs(score - expected[doc_id]) < 1e-6, doc_id
    ok("BM25 formula check (5-doc fixture, hand Okapi values, 1e-6)")


# ---------------------------------------------------------------------------
# 3. dense / MaxSim oracle


def test_dense_and_maxsim_oracles():
    rng = np.random.default_rng(7)
    ids = tuple(f"d{i:02d}" for i in range(50))
    rows = rng.normal(size=(50, 12))
    rows /= np.linalg.norm(rows, axis=1, keepdims=True)
    matrix = EmbeddingMatrix(rows.astype(np.float32), ids).normalize()
    for _ in range(10):
        q = rng.normal(size=12)
        q /= np.linalg.norm(q)
        q = q.astype(np.float32)
        naive = {d: sum(float(matrix.rows[i][j]) * float(q[j]) for j in range(12)) for i, d in enumerate(ids)}
        expected = sorted(naive.items(), key=lambda t: (-t[1], t[0]))
        got = cosine_topk(matrix, q, 50)
        assert [d for d, _ in got] == [d for d, _ in expected]
        for (d, s), (_, s_ref) in zip(got, expected):
            assert abs(s - s_ref) < 1e-6

    def unit_block(m):
        block = rng.normal(size=(m, 8))
        return (block / np.linalg.norm(block, axis=1, keepdims=True)).astype(np.float32)

    queries = TokenEmbeddings({f"q{i}": unit_block(int(rng.integers(1, 6))) for i in range(8)}, 8)
    docs = TokenEmbeddings({f"d{i:02d}": unit_block(int(rng.integers(1, 6))) for i in range(50)}, 8)
    run = maxsim_topk(queries, docs, 50, exclude_self=False)
    for qid in queries.ids:
        naive = {}
        for did in docs.ids:
            total = 0.0
            for qt in queries.tokens[qid]:
                best = max(float(np.dot(qt.astype(np.float64), dt.astype(np.float64))) for dt in docs.tokens[did])
                total += best
            naive[did] = total
        expected = sorted(naive.items(), key=lambda t: (-t[1], t[0]))
        assert run.ranking(qid) == [d for d, _ in expected]
        for (d, s), (_, s_ref) in zip(run.rankings[qid], expected):
            assert abs(s - s_ref) < 1e-6
    ok("dense/MaxSim oracle (50-doc fixtures, 1e-6, exact order)")


# ---------------------------------------------------------------------------
# 4. fusion identities


def test_fusion_identities():
    rng = np.random.default_rng(11)
    docs = [f"d{i:02d}" for i in range(40)]
    dense_scores = {f"q{j}": {d: float(rng.normal()) for d in docs} for j in range(6)}
    sparse_scores = {f"q{j}": {d: float(rng.exponential()) for d in docs} for j in range(6)}
    dense = Run.from_scores(dense_scores, system="dense")
    sparse = Run.from_scores(sparse_scores, system="sparse")
    assert linear_fuse(dense, sparse, 1.0).rankings.keys() == dense.rankings.keys()
    for qid in dense.rankings:
        assert linear_fuse(dense, sparse, 1.0).ranking(qid) == dense.ranking(qid)
        assert linear_fuse(dense, sparse, 0.0).ranking(qid) == sparse.ranking(qid)

    both_first = rrf_fuse(
        [
            Run.from_scores({"q": {"hit": 9.0, "x": 1.0}}, system="a"),
            Run.from_scores({"q": {"hit": 5.0, "y": 2.0}}, system="b"),
        ],
        k_rrf=60,
    )
    assert abs(dict(both_first.rankings["q"])["hit"] - 2 / 61) < 1e-12

    base = rrf_fuse([dense, sparse], k_rrf=60)
    for transform in (lambda s: 10 * s - 3, math.exp):
        t_dense = Run.from_scores({q: {d: transform(s) for d, s in ds.items()} for q, ds in dense_scores.items()}, system="dense")
        t_sparse = Run.from_scores({q: {d: transform(s) for d, s in ds.items()} for q, ds in sparse_scores.items()}, system="sparse")
        assert rrf_fuse([t_dense, t_sparse], k_rrf=60).rankings == base.rankings
    ok("fusion identities (alpha endpoints, RRF 2/61 at 1e-12, monotone invariance)")


# ---------------------------------------------------------------------------
# 5. rerank set-invariance


def test_rerank_set_invariance():
    rng = np.random.default_rng(13)
    docs = [f"d{i:03d}" for i in range(300)]
    run = Run.from_scores(
        {f"q{j}": {d: float(rng.normal()) for d in docs} for j in range(10)},
        system="first",
    )
    table = ScoreTable(
        {(q, d): float(rng.normal()) for q, entries in run.rankings.items() for d, _ in entries[:100]},
        reranker="random",
    )
    from patrank.corpus import Qrels

    qrels = Qrels({q: {d: UNRESOLVED for d in rng.choice(docs, size=5, replace=False)} for q in run.rankings})
    reranked = rerank_with_scores(run, 100, table)
    for qid in run.rankings:
        assert set(reranked.ranking(qid)) == set(run.ranking(qid)[:100])
    before = aggregate(run.truncated(100), qrels, k=100).slices["ALL"]
    after = aggregate(reranked, qrels, k=100).slices["ALL"]
    for qid in before.per_query:
        assert before.per_query[qid].recall_at_k == after.per_query[qid].recall_at_k  # bit-equal
    assert before.means["recall"] == after.means["recall"]
    ok("rerank set-invariance (top-100 set unchanged, Recall@100 bit-equal)")


# ---------------------------------------------------------------------------
# 6. truncation identity


def test_truncation_identity():
    rng = np.random.default_rng(17)
    ids = tuple(f"d{i:02d}" for i in range(60))
    raw = EmbeddingMatrix(rng.normal(size=(60, 24)).astype(np.float32), ids)
    full = raw.normalize()
    truncated = truncate_renorm(raw, 24)
    for i in range(0, 60, 7):
        q = full.rows[i]
        assert cosine_topk(truncated, q, 60, exclude={ids[i]}) == cosine_topk(full, q, 60, exclude={ids[i]})
    norms = np.linalg.norm(truncate_renorm(raw, 9).rows.astype(np.float64), axis=1)
    assert np.abs(norms - 1.0).max() < 1e-6
    ok("truncation identity (full-dim rankings identical, rows unit to 1e-6)")


# ---------------------------------------------------------------------------
# 7. split hygiene


def test_split_hygiene_10k_families():
    start = time.perf_counter()
    rng = np.random.default_rng(19)
    docs = []
    fam = 0
    while fam < 10_000:
        size = int(rng.choice([1, 1, 1, 2, 3]))
        for j in range(size):
            docs.append(Document(doc_id=f"US{fam:05d}_{j}", family_id=f"F{fam:05d}", sections={"title": "t"}))
        fam += 1
    corpus = Corpus(docs)
    split = family_disjoint_split(corpus, (0.8, 0.1, 0.1), seed=42)
    for members in corpus.families.values():
        assert len({split.assignment[d] for d in members}) == 1
    counts = split.counts()
    n = len(corpus)
    for part, target in zip(("train", "validation", "test"), (0.8, 0.1, 0.1)):
        assert abs(counts[part] / n - target) <= 0.015, (part, counts[part] / n)
    again = family_disjoint_split(corpus, (0.8, 0.1, 0.1), seed=42)
    assert again.assignment == split.assignment
    elapsed = time.perf_counter() - start
    assert elapsed < 5.0, f"split hygiene took {elapsed:.1f}s"
    ok(f"split hygiene (10k families, 0 spans, ±1.5pp, deterministic, {elapsed:.2f}s)")


# ---------------------------------------------------------------------------
# 8. qrels hygiene


def test_qrels_hygiene_adversarial_fixture():
    def doc(doc_id, fam, coarse=None, ipc=()):
        labels = {"coarse": (coarse,)} if coarse else {}
        return Document(doc_id=doc_id, family_id=fam, sections={"title": "t"}, labels=labels, ipc3=tuple(ipc))

    corpus = Corpus(
        [
            doc("US1", "F1", "Mobility"),
            doc("US2", "F1", "Mobility"),
            doc("EP3", "F2", "Mobility"),
            doc("CN4", "F3", "Vision"),
            doc("JP5", "F4"),  # unresolvable domain
        ]
    )
    edges = {
        CitationEdge("F1", "F1"),      # self-citation: must contribute nothing
        CitationEdge("F1", "F9"),      # extra-corpus target: nothing
        CitationEdge("F9", "F2"),      # extra-corpus source: nothing
        CitationEdge("F1", "F2"),      # IN (Mobility -> Mobility)
        CitationEdge("F1", "F3"),      # OUT (Mobility -> Vision)
        CitationEdge("F1", "F4"),      # UNRESOLVED
    }
    qrels = build_qrels(corpus, edges)
    assert qrels.query_ids == ["US1", "US2"]
    for qid in qrels.query_ids:
        assert qrels.relevant(qid) == {"EP3", "CN4", "JP5"}
        tags = {d: qrels.judgments[qid][d] for d in qrels.relevant(qid)}
        assert tags == {"EP3": IN, "CN4": OUT, "JP5": UNRESOLVED}
        n_tagged = sum(len(qrels.tagged(qid, t)) for t in (IN, OUT, UNRESOLVED))
        assert n_tagged == len(qrels.relevant(qid))  # tags partition judgments
    run = Run.from_scores({q: {"EP3": 3.0, "CN4": 2.0, "JP5": 1.0} for q in qrels.query_ids}, system="x")
    report = aggregate(run, qrels, k=10)
    assert "US1" in report.slices["IN"].per_query and "US1" in report.slices["OUT"].per_query
    ok("qrels hygiene (self/extra-corpus edges dropped, tags partition, dual-slice query)")


# ---------------------------------------------------------------------------
# 9. bootstrap calibration


def test_bootstrap_calibration():
    start = time.perf_counter()
    scores = [0.2, 0.4, 0.6, 0.8]
    same = paired_bootstrap(scores, scores, B=2000, seed=42)
    assert same.p_value == 1.0 and same.marker == "n.s."
    r1 = paired_bootstrap([0.1, 0.5, 0.9], [0.2, 0.3, 0.8], B=2000, seed=3)
    r2 = paired_bootstrap([0.1, 0.5, 0.9], [0.2, 0.3, 0.8], B=2000, seed=3)
    assert r1 == r2

    rng = np.random.default_rng(2024)
    trials, rejections = 500, 0
    for trial in range(trials):
        a = rng.normal(size=100)
        b = rng.normal(size=100)
        if paired_bootstrap(a, b, B=2000, seed=trial).p_value < 0.05:
            rejections += 1
    rate = rejections / trials
    assert 0.03 <= rate <= 0.07, rate
    elapsed = time.perf_counter() - start
    assert elapsed < 120.0, f"calibration took {elapsed:.1f}s"
    ok(f"bootstrap calibration (type-I {rate:.3f} in [0.03, 0.07], p=1 on ties, {elapsed:.1f}s)")


# ---------------------------------------------------------------------------
# 10. clustering metric oracle


def test_clustering_metric_oracle():
    from collections import Counter

    def direct(assignment, truth):
        n = len(truth)
        cells = Counter(zip(truth, assignment))
        ca, ck = Counter(truth), Counter(assignment)
        h_c = -sum((c / n) * math.log(c / n) for c in ca.values())
        h_k = -sum((c / n) * math.log(c / n) for c in ck.values())
        mi = sum((nij / n) * math.log(n * nij / (ca[x] * ck[y])) for (x, y), nij in cells.items())
        hom = 1 - (h_c - mi) / h_c if h_c > 0 else 1.0
        com = 1 - (h_k - mi) / h_k if h_k > 0 else 1.0
        v = 2 * hom * com / (hom + com) if hom + com else 0.0
        idx = sum(math.comb(c, 2) for c in cells.values())
        sa = sum(math.comb(c, 2) for c in ca.values())
        sb = sum(math.comb(c, 2) for c in ck.values())
        total = math.comb(n, 2)
        exp = sa * sb / total
        mx = (sa + sb) / 2
        ari = 1.0 if mx == exp else (idx - exp) / (mx - exp)
        norm = (h_c + h_k) / 2
        return v, ari, (1.0 if norm == 0 else mi / norm)

    rng = np.random.default_rng(23)
    for _ in range(30):
        assignment = rng.integers(0, 4, size=30)
        truth = [f"c{int(t)}" for t in rng.integers(0, 3, size=30)]
        got = clustering_scores(assignment, truth)
        v, ari, nmi = direct(assignment, truth)
        assert abs(got["v_measure"] - v) < 1e-9
        assert abs(got["ari"] - ari) < 1e-9
        assert abs(got["nmi"] - nmi) < 1e-9
    perfect = clustering_scores([0, 1, 2, 0, 1, 2], ["a", "b", "c", "a", "b", "c"])
    assert perfect["v_measure"] == perfect["ari"] == perfect["nmi"] == 1.0
    degenerate = clustering_scores([0, 0, 0, 0], ["a", "a", "b", "b"])
    assert degenerate["v_measure"] == 0.0 and degenerate["ari"] == 0.0
    ok("clustering metric oracle (30-point contingency 1e-9, perfect=1, single-cluster V=ARI=0)")


# ---------------------------------------------------------------------------
# 11. probe sanity


def test_probe_sanity():
    rng = np.random.default_rng(29)
    XA = rng.normal(size=(25, 2)) + np.array([-3.0, 0.0])
    XB = rng.normal(size=(25, 2)) + np.array([3.0, 0.0])
    X = np.vstack([XA, XB])
    Y = LabelMatrix.from_labels(
        {f"d{i:02d}": ("A",) if i < 25 else ("B",) for i in range(50)}, classes=("A", "B")
    )
    model = train_linear_probe(X, Y, X, Y, seed=42)
    from patrank.probes import eval_probe

    assert eval_probe(model, X, Y) == 1.0
    assert max(model.grad_max_norm_) < 1e-6
    again = train_linear_probe(X, Y, X, Y, seed=42)
    assert again.C_ == model.C_
    np.testing.assert_array_equal(again.coef_, model.coef_)
    ok("probe sanity (blobs F1=1.0, grad max-norm < 1e-6, same seed -> same C)")


# ---------------------------------------------------------------------------
# 12. recipe counts


def test_recipe_counts_and_leakage():
    def doc(i, fam, label):
        return Document(
            doc_id=f"US{i}",
            family_id=fam,
            sections={
                "title": f"t{i}",
                "abstract": f"abstract {i}",
                "claims": f"1. claim {i}.\n2. more.",
                "claim1": f"1. claim {i}.",
            },
            labels={"fine": (label,)},
        )

    docs = [doc(i, f"F{i}", "L1" if i < 4 else "L2") for i in range(7)]
    edges = {CitationEdge("F0", "F1"), CitationEdge("F2", "F3"), CitationEdge("F0", "F6")}
    corpus = Corpus(docs, edges=edges)
    assignment = {f"US{i}": "train" for i in range(5)}
    assignment["US5"] = "validation"
    assignment["US6"] = "test"
    split = Split(assignment, (0.7, 0.15, 0.15), 0)

    r1 = generate_pairs(corpus, split, "R1", r1_cap=None)
    assert r1.counts["R1"] == math.comb(4, 2) + math.comb(1, 2)  # L1 has 4 train docs, L2 has 1
    r2 = generate_pairs(corpus, split, "R2")
    r3 = generate_pairs(corpus, split, "R3")
    r4 = generate_pairs(corpus, split, "R4", r1_cap=None)
    assert len(r4) == len(r1) + len(r2) + len(r3)
    r3m = generate_pairs(corpus, split, "R3M", target_count=231)
    assert len(r3m) == 231
    held_out = {"US5", "US6"}
    for ps in (r1, r2, r3, r4, r3m):
        for p in ps.pairs:
            assert p.anchor_id not in held_out and p.positive_id not in held_out
    ok("recipe counts (R1=C(n,2) pre-cap, R4=R1+R2+R3, R3M exact target, zero leakage)")


# ---------------------------------------------------------------------------
# 13. DWPI advantage


def test_dwpi_advantage_reference_value():
    assert dwpi_advantage(0.7673, 0.7432) == pytest.approx(0.0241, abs=1e-12)
    ok("DWPI advantage (0.7673 - 0.7432 = 0.0241)")


# ---------------------------------------------------------------------------
# 14. end-to-end smoke


def run_pipeline(bundle_dir: Path, work: Path) -> None:
    from patrank.synthetic import write_bundle

    paths = write_bundle(bundle_dir, n_docs=200, dim=32, seed=42)
    work.mkdir(parents=True, exist_ok=True)

    def cli(*argv):
        code = cli_main([str(a) for a in argv])
        assert code == 0, argv
    cli("ingest", "--corpus", paths["corpus"], "--citations", paths["citations"], "--out", work / "corpus.jsonl")
    cli("split", "--corpus", work / "corpus.jsonl", "--seed", 42, "--out", work / "split.tsv")
    cli("qrels", "--corpus", work / "corpus.jsonl", "--citations", paths["citations"],
        "--out", work / "qrels.tsv", "--queries-out", work / "queries.jsonl", "--query-view", "TA")
    cli("view", "--corpus", work / "corpus.jsonl", "--view", "TAC", "--out", work / "view_TAC.jsonl")
    cli("index", "--view", work / "view_TAC.jsonl", "--out", work / "index.bmi")
    cli("retrieve", "--docs", work / "index.bmi", "--queries", work / "queries.jsonl",
        "--k", 100, "--system", "bm25", "--out", work / "run_bm25.tsv")
    cli("retrieve", "--docs", paths["embeddings"], "--queries", paths["embeddings"],
        "--k", 100, "--system", "dense", "--out", work / "run_dense.tsv")
    cli("fuse", "--dense", work / "run_dense.tsv", "--sparse", work / "run_bm25.tsv",
        "--alpha", 0.7, "--out", work / "run_fused.tsv")
    cli("significance", "--run-a", work / "run_fused.tsv", "--run-b", work / "run_bm25.tsv",
        "--qrels", work / "qrels.tsv", "--B", 2000, "--seed", 42, "--out", work / "significance.tsv")
    cli("report", "--run", work / "run_fused.tsv", "--qrels", work / "qrels.tsv",
        "--corpus", work / "corpus.jsonl", "--out-prefix", work / "report", "--format", "both")


def test_end_to_end_smoke(tmp_path, capsys):
    start = time.perf_counter()
    run_pipeline(tmp_path / "bundle1", tmp_path / "out1")
    run_pipeline(tmp_path / "bundle2", tmp_path / "out2")
    elapsed = time.perf_counter() - start
    outputs = [
        "corpus.jsonl", "split.tsv", "qrels.tsv", "queries.jsonl", "view_TAC.jsonl",
        "run_bm25.tsv", "run_dense.tsv", "run_fused.tsv", "significance.tsv",
        "report.tsv", "report.txt",
    ]
    for name in outputs:
        a = (tmp_path / "out1" / name).read_bytes()
        b = (tmp_path / "out2" / name).read_bytes()
        assert a == b, f"{name} not byte-reproducible"
    assert elapsed < 60.0, f"end-to-end smoke took {elapsed:.1f}s"
    with capsys.disabled():
        ok(f"end-to-end smoke (200 docs, ingest->report twice, byte-identical, {elapsed:.1f}s)")
