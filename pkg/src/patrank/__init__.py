"""patrank: batch evaluation engine for patent text-embedding systems."""

from .bm25 import Bm25Retriever, build_bm25, bm25_topk, tokenize
from .corpus import (
    CitationEdge,
    Corpus,
    Document,
    Qrels,
    Split,
    ViewSpec,
    build_qrels,
    build_view,
    domain_of,
    family_disjoint_split,
    jurisdiction_group,
    load_corpus,
    qa_check,
)
from .dense import (
    EmbeddingMatrix,
    TokenEmbeddings,
    cosine_topk,
    dense_run,
    load_embeddings,
    load_token_embeddings,
    maxsim_score,
    maxsim_topk,
    mean_pool,
    save_embeddings,
    save_token_embeddings,
    truncate_renorm,
)
from .fusion import Run, ScoreTable, linear_fuse, minmax_norm, rerank_with_scores, rrf_fuse, sweep
from .metrics import MetricReport, QueryMetrics, aggregate, dwpi_advantage, query_metrics
from .probes import (
    KnnClassifier,
    LabelMatrix,
    LinearProbe,
    clustering_scores,
    eval_probe,
    kmeans,
    knn_classify,
    macro_f1,
    train_linear_probe,
)
from .recipes import PairSet, generate_pairs
from .stats import BootstrapResult, bootstrap_ci, paired_bootstrap, tier_group

__version__ = "0.1.0"

__all__ = [
    "Bm25Retriever", "build_bm25", "bm25_topk", "tokenize",
    "CitationEdge", "Corpus", "Document", "Qrels", "Split", "ViewSpec",
    "build_qrels", "build_view", "domain_of", "family_disjoint_split",
    "jurisdiction_group", "load_corpus", "qa_check",
    "EmbeddingMatrix", "TokenEmbeddings", "cosine_topk", "dense_run",
    "load_embeddings", "load_token_embeddings", "maxsim_score", "maxsim_topk",
    "mean_pool", "save_embeddings", "save_token_embeddings", "truncate_renorm",
    "Run", "ScoreTable", "linear_fuse", "minmax_norm", "rerank_with_scores",
    "rrf_fuse", "sweep",
    "MetricReport", "QueryMetrics", "aggregate", "dwpi_advantage", "query_metrics",
    "KnnClassifier", "LabelMatrix", "LinearProbe", "clustering_scores",
    "eval_probe", "kmeans", "knn_classify", "macro_f1", "train_linear_probe",
    "PairSet", "generate_pairs",
    "BootstrapResult", "bootstrap_ci", "paired_bootstrap", "tier_group",
    "__version__",
]
