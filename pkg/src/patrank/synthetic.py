"""Deterministic synthetic corpus and embedding generator.

Bundled so the end-to-end smoke pipeline and the examples in the README run
without any proprietary data: documents get section texts assembled from a
fixed vocabulary, family structure, two label datasets (coarse + fine), a
citation graph with deliberate self-citations and dangling edges, and
cluster-structured unit embeddings whose geometry loosely follows the coarse
labels so retrieval quality is non-trivial.
"""

from __future__ import annotations

from pathlib import Path

import numpy as np

from .corpus import (
    CitationEdge,
    Corpus,
    Document,
    build_view,
    get_view,
    write_citations_tsv,
    write_corpus_jsonl,
    write_labels_tsv,
    write_queries_jsonl,
)
from .dense import EmbeddingMatrix, TokenEmbeddings, save_embeddings, save_token_embeddings

_NOUNS = (
    "wheelchair", "hearing", "aid", "prosthesis", "sensor", "actuator", "display",
    "braille", "implant", "exoskeleton", "caption", "lens", "gesture", "switch",
    "ramp", "joystick", "speech", "walker", "monitor", "battery",
)
_VERBS = ("detects", "amplifies", "converts", "guides", "supports", "tracks", "adjusts", "renders")
_COARSE = ("Mobility", "Vision", "Hearing", "Communication")
_JURISDICTIONS = ("US", "CN", "JP", "DE", "FR", "WO", "GB", "RU")


def _sentence(rng: np.random.Generator, n_words: int) -> str:
    words = []
    for i in range(n_words):
        pool = _VERBS if i % 3 == 2 else _NOUNS
        words.append(pool[int(rng.integers(len(pool)))])
    return " ".join(words)


def make_corpus(n_docs: int = 200, seed: int = 42) -> Corpus:
    rng = np.random.default_rng(seed)
    docs: list[Document] = []
    families: list[str] = []
    family_coarse: list[str] = []
    i = 0
    while i < n_docs:
        fam = f"F{len(families):05d}"
        families.append(fam)
        size = int(rng.choice([1, 1, 1, 2, 3], p=[0.55, 0.15, 0.1, 0.12, 0.08]))
        size = min(size, n_docs - i)
        coarse = _COARSE[int(rng.integers(len(_COARSE)))]
        family_coarse.append(coarse)
        fine = f"{coarse}-{int(rng.integers(5))}"
        for j in range(size):
            juris = _JURISDICTIONS[int(rng.integers(len(_JURISDICTIONS)))]
            doc_id = f"{juris}{100000 + i}"
            claims = (
                f"1. A {coarse.lower()} device that {_sentence(rng, 6)}.\n"
                f"2. The device of claim 1 wherein {_sentence(rng, 5)}.\n"
                f"3. The device of claim 2 further {_sentence(rng, 4)}."
            )
            sections = {
                "title": f"{coarse} {_sentence(rng, 3)}",
                "abstract": f"A {coarse.lower()} apparatus. {_sentence(rng, 10)}.",
                "claims": claims,
                "dwpi_title": f"{coarse} summary {_sentence(rng, 2)}",
                "dwpi_novelty": _sentence(rng, 6),
                "dwpi_use": _sentence(rng, 5),
                "topics": fine.lower(),
            }
            docs.append(
                Document(
                    doc_id=doc_id,
                    family_id=fam,
                    sections={
                        **{k: v for k, v in sections.items()},
                        "claim1": sections["claims"].split("\n")[0],
                    },
                    labels={"coarse": (coarse,), "fine": (fine,)},
                    ipc3=(f"A{61 + int(rng.integers(3))}",),
                )
            )
            i += 1
    # citation edges between families (biased toward same coarse label so
    # domain slices are populated), plus hygiene traps: self-citations and
    # edges whose endpoint family is outside the corpus
    by_coarse: dict[str, list[int]] = {}
    for idx, coarse in enumerate(family_coarse):
        by_coarse.setdefault(coarse, []).append(idx)
    edges: set[CitationEdge] = set()
    n_fam = len(families)
    for _ in range(n_docs):
        a = int(rng.integers(n_fam))
        if rng.random() < 0.7:
            pool = by_coarse[family_coarse[a]]
            b = int(pool[int(rng.integers(len(pool)))])
        else:
            b = int(rng.integers(n_fam))
        if a != b:
            edges.add(CitationEdge(families[a], families[b]))
    edges.add(CitationEdge(families[0], families[0]))
    edges.add(CitationEdge(families[1], "F99999"))
    edges.add(CitationEdge("F88888", families[2]))
    return Corpus(docs, edges=edges)


def make_embeddings(corpus: Corpus, dim: int = 32, seed: int = 42) -> EmbeddingMatrix:
    """Unit embeddings clustered by coarse label with per-family pull, so
    cited families tend to be retrievable but not trivially so."""
    rng = np.random.default_rng(seed)
    centers = {c: rng.normal(size=dim) for c in _COARSE}
    fam_offsets = {fam: rng.normal(scale=0.6, size=dim) for fam in sorted(corpus.families)}
    rows = []
    ids = []
    for doc in corpus:
        coarse = doc.labels.get("coarse", ("Mobility",))[0]
        vec = centers.get(coarse, centers["Mobility"]) + fam_offsets[doc.family_id] + rng.normal(scale=0.4, size=dim)
        rows.append(vec)
        ids.append(doc.doc_id)
    matrix = EmbeddingMatrix(np.asarray(rows, dtype=np.float32), tuple(ids))
    return matrix.normalize()


def make_token_embeddings(corpus: Corpus, dim: int = 16, seed: int = 42, max_tokens: int = 6) -> TokenEmbeddings:
    rng = np.random.default_rng(seed)
    centers = {c: rng.normal(size=dim) for c in _COARSE}
    blocks: dict[str, np.ndarray] = {}
    for doc in corpus:
        coarse = doc.labels.get("coarse", ("Mobility",))[0]
        m = int(rng.integers(2, max_tokens + 1))
        block = centers[coarse] + rng.normal(scale=0.8, size=(m, dim))
        norms = np.linalg.norm(block, axis=1, keepdims=True)
        blocks[doc.doc_id] = (block / norms).astype(np.float32)
    return TokenEmbeddings(blocks, dim)


def write_bundle(out_dir: str | Path, n_docs: int = 200, dim: int = 32, seed: int = 42) -> dict[str, Path]:
    """Write corpus.jsonl, citations.tsv, labels.tsv and EMB1/TOK1 files."""
    out = Path(out_dir)
    out.mkdir(parents=True, exist_ok=True)
    corpus = make_corpus(n_docs=n_docs, seed=seed)
    paths = {
        "corpus": out / "corpus.jsonl",
        "citations": out / "citations.tsv",
        "labels": out / "labels.tsv",
        "embeddings": out / "docs.emb1",
        "token_embeddings": out / "docs.tok1",
    }
    write_corpus_jsonl(corpus, paths["corpus"])
    write_citations_tsv(corpus.edges, paths["citations"])
    write_labels_tsv(corpus, paths["labels"])
    save_embeddings(make_embeddings(corpus, dim=dim, seed=seed), paths["embeddings"])
    save_token_embeddings(make_token_embeddings(corpus, dim=max(8, dim // 2), seed=seed), paths["token_embeddings"])
    # view text files for the lexical leg and for encoder bridges
    for name in ("TA", "TAC"):
        view = build_view(corpus, get_view(name))
        path = out / f"view_{name}.jsonl"
        write_queries_jsonl(view.texts, path)
        paths[f"view_{name}"] = path
    return paths


if __name__ == "__main__":  # pragma: no cover
    import sys

    target = sys.argv[1] if len(sys.argv) > 1 else "synthetic_bundle"
    written = write_bundle(target)
    for key, value in written.items():
        print(f"{key}: {value}")
