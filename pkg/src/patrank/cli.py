"""Command-line front end.

Every subcommand maps onto one library operation and is byte-reproducible
for fixed inputs, flags and seeds. Exit codes: 0 success, 1 validation
error (including usage errors), 2 I/O error.
"""

from __future__ import annotations

import argparse
import sys
from pathlib import Path

from . import bm25, config as config_mod, corpus as corpus_mod, dense, fusion, metrics, probes, recipes, report as report_mod, stats
from .errors import ConfigError, PatrankError


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        self.print_usage(sys.stderr)
        print(f"error: {message}", file=sys.stderr)
        raise SystemExit(1)


def _sniff(path: Path) -> str:
    with open(path, "rb") as f:
        head = f.read(4)
    if head == b"EMB1":
        return "emb"
    if head == b"TOK1":
        return "tok"
    if head == b"BMI1":
        return "bmi"
    return "text"


def _load_corpus(args) -> corpus_mod.Corpus:
    return corpus_mod.load_corpus(
        args.corpus,
        labels_path=getattr(args, "labels", None),
        citations_path=getattr(args, "citations", None),
        strict=getattr(args, "strict", False),
    )


# ---------------------------------------------------------------------------
# subcommand handlers


def cmd_ingest(args) -> int:
    c = _load_corpus(args)
    if args.out:
        corpus_mod.write_corpus_jsonl(c, args.out)
    print(f"documents\t{len(c)}")
    print(f"families\t{len(c.families)}")
    print(f"label-datasets\t{','.join(c.label_datasets()) or '-'}")
    print(f"citation-edges\t{len(c.edges)}")
    return 0


def cmd_view(args) -> int:
    c = _load_corpus(args)
    if args.sections:
        spec = corpus_mod.ViewSpec(args.view or "custom", tuple(args.sections.split(",")), args.separator)
    else:
        spec = corpus_mod.get_view(args.view or "TA")
    vc = corpus_mod.build_view(c, spec)
    corpus_mod.write_queries_jsonl(vc.texts, args.out)
    print(f"view\t{spec.name}\tdocs\t{len(vc)}\tempty\t{len(vc.empty_ids)}")
    return 0


def cmd_split(args) -> int:
    c = _load_corpus(args)
    ratios = tuple(float(x) for x in args.ratios.split(","))
    split = corpus_mod.family_disjoint_split(c, ratios=ratios, seed=args.seed)
    corpus_mod.write_split_tsv(split, args.out)
    counts = split.counts()
    print("\t".join(f"{p}={counts[p]}" for p in corpus_mod.PARTS))
    return 0


def cmd_qrels(args) -> int:
    c = _load_corpus(args)
    if not c.edges:
        raise ConfigError("qrels needs citation edges; pass --citations")
    qrels = corpus_mod.build_qrels(c, c.edges)
    corpus_mod.write_qrels_tsv(qrels, args.out)
    tags = {t: 0 for t in (corpus_mod.IN, corpus_mod.OUT, corpus_mod.UNRESOLVED)}
    for qid in qrels.query_ids:
        for tag in qrels.judgments[qid].values():
            tags[tag] += 1
    print(f"queries\t{len(qrels)}\tjudgments\t{qrels.n_judgments}\tin\t{tags['IN']}\tout\t{tags['OUT']}\tunresolved\t{tags['UNRESOLVED']}")
    if args.queries_out:
        spec = corpus_mod.get_view(args.query_view)
        vc = corpus_mod.build_view(c, spec)
        texts = {qid: vc.texts[qid] for qid in qrels.query_ids}
        corpus_mod.write_queries_jsonl(texts, args.queries_out)
    return 0


def cmd_index(args) -> int:
    texts = corpus_mod.load_queries_jsonl(args.view)
    index = bm25.build_bm25(texts, k1=args.k1, b=args.b)
    bm25.save_index(index, args.out)
    print(f"docs\t{index.doc_count_}\tterms\t{len(index.postings_)}\tavgdl\t{index.avg_doc_length_:.4f}")
    return 0


def cmd_retrieve(args) -> int:
    if args.config:
        if not (args.system and args.corpus_view and args.query_section):
            raise ConfigError("--config retrieval needs --system, --corpus-view and --query-section")
        cfg = config_mod.RunConfig.from_file(args.config)
        docs_path = cfg.embedding_path(args.system, "corpus", args.corpus_view)
        queries_path = cfg.embedding_path(args.system, "query", args.query_section)
    else:
        if not args.docs or not args.queries:
            raise ConfigError("retrieve needs --docs and --queries (or --config with --system/--corpus-view/--query-section)")
        docs_path, queries_path = Path(args.docs), Path(args.queries)
    system = args.system or "system"
    exclude_self = not args.include_self
    doc_kind, query_kind = _sniff(docs_path), _sniff(queries_path)
    if doc_kind == "emb" and query_kind == "emb":
        docs = dense.load_embeddings(docs_path).normalize()
        queries = dense.load_embeddings(queries_path).normalize()
        run = dense.dense_run(docs, queries, args.k, exclude_self=exclude_self, system=system, view=args.corpus_view or "")
    elif doc_kind == "tok" and query_kind == "tok":
        docs = dense.load_token_embeddings(docs_path)
        queries = dense.load_token_embeddings(queries_path)
        run = dense.maxsim_topk(queries, docs, args.k, exclude_self=exclude_self, system=system, view=args.corpus_view or "")
    elif doc_kind == "bmi" and query_kind == "text":
        index = bm25.load_index(docs_path)
        queries = corpus_mod.load_queries_jsonl(queries_path)
        run = index.run(queries, args.k, exclude_self=exclude_self, system=system, view=args.corpus_view or "")
    else:
        raise ConfigError(f"unsupported input combination: docs={doc_kind}, queries={query_kind}")
    fusion.write_run_tsv(run, args.out)
    print(f"queries\t{len(run.rankings)}\tdepth\t{args.k}\tsystem\t{system}")
    return 0


def cmd_fuse(args) -> int:
    dense_run = fusion.read_run_tsv(args.dense)
    sparse_run = fusion.read_run_tsv(args.sparse)
    if args.sweep:
        if not args.qrels:
            raise ConfigError("--sweep needs --qrels")
        qrels = corpus_mod.load_qrels_tsv(args.qrels)
        sweep = fusion.sweep(
            dense_run,
            sparse_run,
            alphas=[float(x) for x in args.alphas.split(",") if x],
            k_rrfs=[int(x) for x in args.k_rrfs.split(",") if x],
            evaluate=lambda run: metrics.aggregate(run, qrels, k=args.metric_k),
            pool_depth=args.pool_depth,
        )
        report_mod.emit_sweep_tsv(sweep, args.out, k=args.metric_k)
        print(f"best\t{sweep.best_label}\tdelta\t{sweep.best_delta:.4f}")
        return 0
    if (args.alpha is None) == (args.rrf_k is None):
        raise ConfigError("pass exactly one of --alpha or --rrf-k (or --sweep)")
    if args.alpha is not None:
        fused = fusion.linear_fuse(dense_run, sparse_run, args.alpha, pool_depth=args.pool_depth)
    else:
        fused = fusion.rrf_fuse([dense_run, sparse_run], k_rrf=args.rrf_k, pool_depth=args.pool_depth)
    fusion.write_run_tsv(fused, args.out)
    print(f"queries\t{len(fused.rankings)}\tsystem\t{fused.system}")
    return 0


def cmd_rerank(args) -> int:
    run = fusion.read_run_tsv(args.run)
    table = fusion.read_score_table_tsv(args.scores, reranker=args.reranker)
    reranked = fusion.rerank_with_scores(run, args.K, table)
    fusion.write_run_tsv(reranked, args.out)
    print(f"queries\t{len(reranked.rankings)}\tK\t{args.K}")
    return 0


def _labeled_label_matrix(matrix, labels_path: str, dataset: str):
    raw = corpus_mod.load_labels_tsv(labels_path)
    labeled = {d: tuple(ds[dataset]) for d, ds in raw.items() if dataset in ds and ds[dataset]}
    ids = [d for d in matrix.ids if d in labeled]
    if not ids:
        raise ConfigError(f"no embedded documents carry labels for dataset {dataset!r}")
    classes = sorted({l for d in ids for l in labeled[d]})
    return probes.LabelMatrix.from_labels({d: labeled[d] for d in ids}, classes=classes)


def cmd_classify(args) -> int:
    matrix = dense.load_embeddings(args.embeddings).normalize()
    lm = _labeled_label_matrix(matrix, args.labels, args.dataset)
    split = corpus_mod.load_split_tsv(args.split)
    parts = {p: [d for d in lm.docs if split.assignment.get(d) == p] for p in corpus_mod.PARTS}
    for part, docs in parts.items():
        if not docs:
            raise ConfigError(f"split partition {part!r} has no labeled embedded docs")
    X = {p: matrix.rows[[matrix.id_to_ordinal[d] for d in docs]] for p, docs in parts.items()}
    Y = {p: lm.subset(docs) for p, docs in parts.items()}
    if args.method == "probe":
        grid = [float(x) for x in args.c_grid.split(",")] if args.c_grid else probes.DEFAULT_C_GRID
        model = probes.train_linear_probe(X["train"], Y["train"], X["validation"], Y["validation"], C_grid=grid, seed=args.seed)
        f1 = probes.eval_probe(model, X["test"], Y["test"])
        pred = model.predict(X["test"])
        print(f"method\tprobe\tC\t{model.C_:g}\tmacro-f1\t{f1:.4f}")
    else:
        predicted = probes.knn_classify(X["train"], Y["train"], X["test"], k=args.knn_k, test_ids=Y["test"].docs)
        pred = predicted.assignment
        f1 = probes.macro_f1(Y["test"].assignment, pred)
        print(f"method\tknn\tk\t{args.knn_k}\tmacro-f1\t{f1:.4f}")
    if args.out:
        with open(args.out, "w", encoding="utf-8") as f:
            f.write("doc-id\tdataset\tlabel\n")
            for i, doc in enumerate(Y["test"].docs):
                for j, cls in enumerate(Y["test"].classes):
                    if pred[i, j]:
                        f.write(f"{doc}\t{args.dataset}\t{cls}\n")
    return 0


def cmd_cluster(args) -> int:
    matrix = dense.load_embeddings(args.embeddings).normalize()
    lm = _labeled_label_matrix(matrix, args.labels, args.dataset)
    docs = list(lm.docs)
    if args.split:
        split = corpus_mod.load_split_tsv(args.split)
        docs = [d for d in docs if split.assignment.get(d) == args.partition]
        if not docs:
            raise ConfigError(f"no labeled embedded docs in partition {args.partition!r}")
        lm = lm.subset(docs)
    X = matrix.rows[[matrix.id_to_ordinal[d] for d in docs]]
    assignment = probes.kmeans(X, K=len(lm.classes), seed=args.seed)
    scores = probes.clustering_scores(assignment, lm.primary)
    print(f"k\t{len(lm.classes)}\tv-measure\t{scores['v_measure']:.4f}\tari\t{scores['ari']:.4f}\tnmi\t{scores['nmi']:.4f}")
    return 0


def cmd_truncate(args) -> int:
    matrix = dense.load_embeddings(args.embeddings)
    truncated = dense.truncate_renorm(matrix, args.dim)
    dense.save_embeddings(truncated, args.out)
    print(f"dim\t{matrix.dim}->{truncated.dim}\trows\t{len(truncated)}\tzero-rows\t{len(truncated.zero_rows)}")
    return 0


def cmd_pairs(args) -> int:
    c = _load_corpus(args)
    split = corpus_mod.load_split_tsv(args.split)
    pairset = recipes.generate_pairs(
        c,
        split,
        args.recipe,
        seed=args.seed,
        target_count=args.target_count,
        r1_cap=args.r1_cap,
    )
    recipes.write_pairs_tsv(pairset, args.out)
    counts = "\t".join(f"{tag}={n}" for tag, n in sorted(pairset.counts.items()))
    print(f"recipe\t{args.recipe}\tpairs\t{len(pairset)}\t{counts}")
    return 0


def _metric_vectors(run: fusion.Run, qrels: corpus_mod.Qrels, metric: str, k: int) -> list[float]:
    report = metrics.aggregate(run, qrels, k=k)
    return report.slices["ALL"].scores(metric)


def cmd_significance(args) -> int:
    qrels = corpus_mod.load_qrels_tsv(args.qrels)
    run_a = fusion.read_run_tsv(args.run_a)
    run_b = fusion.read_run_tsv(args.run_b)
    scores_a = _metric_vectors(run_a, qrels, args.metric, args.k)
    scores_b = _metric_vectors(run_b, qrels, args.metric, args.k)
    result = stats.paired_bootstrap(scores_a, scores_b, B=args.B, seed=args.seed)
    name_a = args.name_a or run_a.system or "A"
    name_b = args.name_b or run_b.system or "B"
    print(f"{name_a}\t{name_b}\t{result.mean_a:.4f}\t{result.mean_b:.4f}\t{result.diff:.4f}\t{result.p_str}\t{result.marker}")
    if args.out:
        footnote = stats.bonferroni_note(0.05, args.comparisons) if args.comparisons else ""
        report_mod.emit_significance_tsv([(name_a, name_b, result)], args.out, footnote=footnote)
    return 0


def cmd_ablate(args) -> int:
    cfg = config_mod.RunConfig.from_file(args.config)
    qrels = corpus_mod.load_qrels_tsv(args.qrels)
    if args.corpus:
        c = corpus_mod.load_corpus(args.corpus, labels_path=args.labels)
        qrels = qrels.retagged(c, corpus_mod.domain_of)
    sections = args.sections.split(",") if args.sections else list(corpus_mod.QUERY_SECTIONS)
    views = args.views.split(",") if args.views else list(corpus_mod.CORPUS_VIEWS)

    def resolve(qs: str, cv: str):
        return (
            cfg.embedding_path(args.system, "query", qs),
            cfg.embedding_path(args.system, "corpus", cv),
        )

    grid = report_mod.run_ablation_grid(sections, views, args.system, resolve, qrels, k=args.k, depth=args.depth)
    report_mod.emit_ablation_tsv(grid, args.out, k=args.k)
    qs, cv = grid.best_cell
    print(f"cells\t{len(grid.cells)}\tbest\t{qs}->{cv}\t{grid.metric}@{args.k}\t{grid.best_value:.4f}")
    return 0


def cmd_report(args) -> int:
    qrels = corpus_mod.load_qrels_tsv(args.qrels)
    jurisdiction_fn = None
    if args.corpus:
        c = corpus_mod.load_corpus(args.corpus, labels_path=args.labels)
        qrels = qrels.retagged(c, corpus_mod.domain_of)
        jurisdiction_fn = metrics.default_jurisdiction_fn
    run = fusion.read_run_tsv(args.run)
    report = metrics.aggregate(run, qrels, jurisdiction_fn=jurisdiction_fn, k=args.k)
    rows = [(args.system or run.system or "system", args.view or run.view or "-", report)]
    written = []
    if args.format in ("tsv", "both"):
        path = f"{args.out_prefix}.tsv"
        report_mod.emit_report_tsv(rows, path)
        written.append(path)
    if args.format in ("text", "both"):
        path = f"{args.out_prefix}.txt"
        report_mod.emit_report_text(rows, path)
        written.append(path)
    for path in written:
        print(path)
    return 0


def cmd_config(args) -> int:
    values = config_mod.parse_config_file(args.file) if args.file else None
    if args.file:
        config_mod.RunConfig(values).validate()
    if args.dump or not args.file:
        sys.stdout.write(config_mod.dump_config(values))
    else:
        print("ok")
    return 0


# ---------------------------------------------------------------------------
# parser wiring


def build_parser() -> _Parser:
    parser = _Parser(prog="patrank", description="Patent embedding evaluation engine")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("ingest", help="validate and summarize a corpus")
    p.add_argument("--corpus", required=True)
    p.add_argument("--labels")
    p.add_argument("--citations")
    p.add_argument("--strict", action="store_true")
    p.add_argument("--out")
    p.set_defaults(func=cmd_ingest)

    p = sub.add_parser("view", help="compose a text view")
    p.add_argument("--corpus", required=True)
    p.add_argument("--view")
    p.add_argument("--sections", help="comma-separated section list for a custom view")
    p.add_argument("--separator", default=" ")
    p.add_argument("--out", required=True)
    p.set_defaults(func=cmd_view)

    p = sub.add_parser("split", help="family-disjoint train/validation/test split")
    p.add_argument("--corpus", required=True)
    p.add_argument("--ratios", default="0.8,0.1,0.1")
    p.add_argument("--seed", type=int, default=42)
    p.add_argument("--out", required=True)
    p.set_defaults(func=cmd_split)

    p = sub.add_parser("qrels", help="citation-derived relevance judgments")
    p.add_argument("--corpus", required=True)
    p.add_argument("--citations", required=True)
    p.add_argument("--labels")
    p.add_argument("--out", required=True)
    p.add_argument("--queries-out")
    p.add_argument("--query-view", default="TA")
    p.set_defaults(func=cmd_qrels)

    p = sub.add_parser("index", help="build a BM25 index from a view file")
    p.add_argument("--view", required=True)
    p.add_argument("--k1", type=float, default=1.5)
    p.add_argument("--b", type=float, default=0.75)
    p.add_argument("--out", required=True)
    p.set_defaults(func=cmd_index)

    p = sub.add_parser("retrieve", help="rank documents for every query")
    p.add_argument("--docs")
    p.add_argument("--queries")
    p.add_argument("--config")
    p.add_argument("--system", default="")
    p.add_argument("--corpus-view", "--view", dest="corpus_view", default="")
    p.add_argument("--query-section", default="")
    p.add_argument("--k", type=int, default=1000)
    p.add_argument("--include-self", action="store_true")
    p.add_argument("--out", required=True)
    p.set_defaults(func=cmd_retrieve)

    p = sub.add_parser("fuse", help="combine a dense and a sparse run")
    p.add_argument("--dense", required=True)
    p.add_argument("--sparse", required=True)
    p.add_argument("--alpha", type=float)
    p.add_argument("--rrf-k", type=int)
    p.add_argument("--pool-depth", type=int, default=1000)
    p.add_argument("--sweep", action="store_true")
    p.add_argument("--alphas", default="0.1,0.3,0.5,0.7,0.9")
    p.add_argument("--k-rrfs", default="10,60,100")
    p.add_argument("--qrels")
    p.add_argument("--metric-k", type=int, default=10)
    p.add_argument("--out", required=True)
    p.set_defaults(func=cmd_fuse)

    p = sub.add_parser("rerank", help="reorder top-K candidates with a score table")
    p.add_argument("--run", required=True)
    p.add_argument("--scores", required=True)
    p.add_argument("--K", type=int, default=100)
    p.add_argument("--reranker", default="")
    p.add_argument("--out", required=True)
    p.set_defaults(func=cmd_rerank)

    p = sub.add_parser("classify", help="linear probe or kNN over frozen embeddings")
    p.add_argument("--embeddings", required=True)
    p.add_argument("--labels", required=True)
    p.add_argument("--dataset", required=True)
    p.add_argument("--split", required=True)
    p.add_argument("--method", choices=("probe", "knn"), default="probe")
    p.add_argument("--knn-k", type=int, default=5)
    p.add_argument("--c-grid")
    p.add_argument("--seed", type=int, default=42)
    p.add_argument("--out")
    p.set_defaults(func=cmd_classify)

    p = sub.add_parser("cluster", help="k-means with V-measure/ARI/NMI")
    p.add_argument("--embeddings", required=True)
    p.add_argument("--labels", required=True)
    p.add_argument("--dataset", required=True)
    p.add_argument("--split")
    p.add_argument("--partition", default="test")
    p.add_argument("--seed", type=int, default=42)
    p.set_defaults(func=cmd_cluster)

    p = sub.add_parser("truncate", help="matryoshka truncation with renormalization")
    p.add_argument("--embeddings", required=True)
    p.add_argument("--dim", type=int, required=True)
    p.add_argument("--out", required=True)
    p.set_defaults(func=cmd_truncate)

    p = sub.add_parser("pairs", help="contrastive training pairs for one recipe")
    p.add_argument("--corpus", required=True)
    p.add_argument("--citations")
    p.add_argument("--labels")
    p.add_argument("--split", required=True)
    p.add_argument("--recipe", required=True, choices=recipes.RECIPES)
    p.add_argument("--seed", type=int, default=42)
    p.add_argument("--target-count", type=int)
    p.add_argument("--r1-cap", type=int, default=50)
    p.add_argument("--out", required=True)
    p.set_defaults(func=cmd_pairs)

    p = sub.add_parser("significance", help="paired bootstrap between two runs")
    p.add_argument("--run-a", required=True)
    p.add_argument("--run-b", required=True)
    p.add_argument("--qrels", required=True)
    p.add_argument("--metric", choices=metrics.METRIC_NAMES, default="ndcg")
    p.add_argument("--k", type=int, default=10)
    p.add_argument("--B", type=int, default=10000)
    p.add_argument("--seed", type=int, default=42)
    p.add_argument("--name-a")
    p.add_argument("--name-b")
    p.add_argument("--comparisons", type=int, default=30)
    p.add_argument("--out")
    p.set_defaults(func=cmd_significance)

    p = sub.add_parser("ablate", help="query-section x corpus-view grid")
    p.add_argument("--config", required=True)
    p.add_argument("--system", required=True)
    p.add_argument("--qrels", required=True)
    p.add_argument("--corpus")
    p.add_argument("--labels")
    p.add_argument("--sections")
    p.add_argument("--views")
    p.add_argument("--k", type=int, default=10)
    p.add_argument("--depth", type=int, default=1000)
    p.add_argument("--out", required=True)
    p.set_defaults(func=cmd_ablate)

    p = sub.add_parser("report", help="evaluate a run and emit tables")
    p.add_argument("--run", required=True)
    p.add_argument("--qrels", required=True)
    p.add_argument("--corpus")
    p.add_argument("--labels")
    p.add_argument("--system")
    p.add_argument("--view")
    p.add_argument("--k", type=int, default=10)
    p.add_argument("--format", choices=("tsv", "text", "both"), default="both")
    p.add_argument("--out-prefix", required=True)
    p.set_defaults(func=cmd_report)

    p = sub.add_parser("config", help="validate or dump configuration")
    p.add_argument("--file")
    p.add_argument("--dump", action="store_true")
    p.set_defaults(func=cmd_config)

    return parser


def main(argv=None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return int(exc.code or 0)
    try:
        return args.func(args)
    except PatrankError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1
    except OSError as exc:
        print(f"i/o error: {exc}", file=sys.stderr)
        return 2


if __name__ == "__main__":  # pragma: no cover
    raise SystemExit(main())
