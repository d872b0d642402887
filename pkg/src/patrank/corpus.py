"""Canonical in-memory model for patent corpora.

Holds documents with named sections, family ids, labels and citation edges;
builds text views, family-disjoint splits and citation-derived relevance
judgments; runs the cross-artifact QA checks.

File formats (all UTF-8, written byte-deterministically):

* ``corpus.jsonl`` -- one record per line with fields ``_id``, ``title``,
  ``text``, ``sections`` (object of named strings), ``family_id``,
  ``ipc3`` (array), ``labels`` (object: dataset -> array).
* ``queries.jsonl`` -- ``_id``, ``text``.
* ``qrels.tsv`` -- header ``query-id\tcorpus-id\tscore``, score always 1.
* ``citations.tsv`` -- header ``citing_family\tcited_family``.
* ``labels.tsv`` -- header ``doc-id\tdataset\tlabel``.
* ``split.tsv`` -- header ``doc-id\tsplit``.
"""

from __future__ import annotations

import json
import re
from dataclasses import dataclass, field
from pathlib import Path
from typing import Callable, Iterable, Mapping, Optional, Sequence

import numpy as np

from .errors import (
    ConfigError,
    EmptyInputError,
    FormatError,
    IntegrityError,
    ParseError,
)

SECTION_NAMES = (
    "title",
    "abstract",
    "claims",
    "claim1",
    "description",
    "dwpi_title",
    "dwpi_detail",
    "dwpi_novelty",
    "dwpi_use",
    "dwpi_advantage",
    "dwpi_focus",
    "topics",
)

PARTS = ("train", "validation", "test")

IN, OUT, UNRESOLVED = "IN", "OUT", "UNRESOLVED"

_TAG_RE = re.compile(r"<[^>]*>")
_WS_RE = re.compile(r"\s+")
# Claim 1 runs up to the first line that starts with the claim-2 marker "2.".
_CLAIM2_RE = re.compile(r"^\s*2\.", re.MULTILINE)


def clean_text(text: str) -> str:
    """Strip markup tags and normalize whitespace to single spaces."""
    return _WS_RE.sub(" ", _TAG_RE.sub(" ", text)).strip()


def strip_tags(text: str) -> str:
    """Remove markup tags but keep line structure (needed for claim splitting)."""
    return _TAG_RE.sub(" ", text)


def extract_claim1(claims_text: str) -> str:
    """First numbered claim: everything before a line starting with "2."."""
    m = _CLAIM2_RE.search(claims_text)
    return claims_text[: m.start()] if m else claims_text


@dataclass(frozen=True)
class Document:
    """One patent record.

    ``sections`` maps section names (see SECTION_NAMES) to cleaned text;
    ``labels`` maps dataset names to the document's labels in file order
    (deduplicated, order preserved -- the first label is the primary one
    used as clustering ground truth).
    """

    doc_id: str
    family_id: str
    sections: Mapping[str, str] = field(default_factory=dict)
    labels: Mapping[str, tuple[str, ...]] = field(default_factory=dict)
    ipc3: tuple[str, ...] = ()

    @property
    def jurisdiction_code(self) -> str:
        return self.doc_id[:2]

    def section(self, name: str) -> str:
        return self.sections.get(name, "")

    def has_text(self) -> bool:
        return any(self.sections.values())


@dataclass(frozen=True)
class CitationEdge:
    citing_family: str
    cited_family: str


@dataclass(frozen=True)
class ViewSpec:
    """A named recomposition of document sections into one text."""

    name: str
    section_list: tuple[str, ...]
    separator: str = " "

    def __post_init__(self):
        if not self.section_list:
            raise ConfigError(f"view {self.name!r}: section list is empty")
        for s in self.section_list:
            if s not in SECTION_NAMES:
                raise ConfigError(f"view {self.name!r}: unknown section {s!r}")


_DWPI_SECTIONS = (
    "dwpi_title",
    "dwpi_detail",
    "dwpi_novelty",
    "dwpi_use",
    "dwpi_advantage",
    "dwpi_focus",
)

#: The six named corpus views plus the DWPI-ablation text variants.
NAMED_VIEWS: dict[str, ViewSpec] = {
    spec.name: spec
    for spec in (
        ViewSpec("TA", ("title", "abstract")),
        ViewSpec("TAC", ("title", "abstract", "claims")),
        ViewSpec("Claim1", ("claim1",)),
        ViewSpec("Abstract", ("abstract",)),
        ViewSpec("DWPI-Full", _DWPI_SECTIONS + ("claims", "abstract", "title", "topics")),
        ViewSpec("DWPI-TA", _DWPI_SECTIONS),
        # Classification/clustering text variants for the expert-summary analysis.
        ViewSpec("Combined", _DWPI_SECTIONS + ("claim1", "abstract", "title", "topics")),
        ViewSpec("DWPIonly", _DWPI_SECTIONS),
        ViewSpec("noDWPI", ("claim1", "abstract", "title", "topics")),
        # Query-side sections for the query/corpus ablation grid.
        ViewSpec("Claims", ("claims",)),
    )
}

#: Query sections of the section-ablation grid (5 x 6 cells with CORPUS_VIEWS).
QUERY_SECTIONS = ("TA", "TAC", "Abstract", "Claim1", "Claims")
#: Corpus views of the section-ablation grid.
CORPUS_VIEWS = ("TA", "TAC", "Claim1", "Abstract", "DWPI-Full", "DWPI-TA")


def get_view(name: str) -> ViewSpec:
    try:
        return NAMED_VIEWS[name]
    except KeyError:
        raise ConfigError(f"unknown view {name!r}; known: {sorted(NAMED_VIEWS)}") from None


@dataclass(frozen=True)
class ViewCorpus:
    """doc_id -> composed text for one view; all-empty docs are kept and flagged."""

    name: str
    texts: Mapping[str, str]
    empty_ids: frozenset[str]

    def __len__(self) -> int:
        return len(self.texts)


@dataclass(frozen=True)
class Split:
    assignment: Mapping[str, str]  # doc_id -> train|validation|test
    ratios: tuple[float, float, float]
    seed: int

    def part(self, name: str) -> list[str]:
        if name not in PARTS:
            raise ConfigError(f"unknown split partition {name!r}")
        return [d for d, p in self.assignment.items() if p == name]

    def counts(self) -> dict[str, int]:
        out = {p: 0 for p in PARTS}
        for p in self.assignment.values():
            out[p] += 1
        return out


class Qrels:
    """Binary relevance judgments with a domain-pair tag per judgment."""

    def __init__(self, judgments: Mapping[str, Mapping[str, str]]):
        self.judgments: dict[str, dict[str, str]] = {}
        for qid in sorted(judgments):
            docs = judgments[qid]
            if not docs:
                continue
            for tag in docs.values():
                if tag not in (IN, OUT, UNRESOLVED):
                    raise IntegrityError(f"query {qid!r}: bad domain tag {tag!r}")
            self.judgments[qid] = dict(sorted(docs.items()))
        self.query_ids: list[str] = list(self.judgments)

    def __len__(self) -> int:
        return len(self.judgments)

    @property
    def n_judgments(self) -> int:
        return sum(len(d) for d in self.judgments.values())

    def relevant(self, qid: str) -> set[str]:
        return set(self.judgments.get(qid, ()))

    def tagged(self, qid: str, tag: str) -> set[str]:
        return {d for d, t in self.judgments.get(qid, {}).items() if t == tag}

    def retagged(self, corpus: "Corpus", domain_fn: Callable[[Document], Optional[str]]) -> "Qrels":
        """Recompute IN/OUT/UNRESOLVED tags from the corpus (tags are not persisted in TSV)."""
        out: dict[str, dict[str, str]] = {}
        for qid, docs in self.judgments.items():
            qdoc = corpus.docs.get(qid)
            qdom = domain_fn(qdoc) if qdoc is not None else None
            tagged = {}
            for did in docs:
                ddoc = corpus.docs.get(did)
                ddom = domain_fn(ddoc) if ddoc is not None else None
                tagged[did] = _pair_tag(qdom, ddom)
            out[qid] = tagged
        return Qrels(out)


def _pair_tag(query_domain: Optional[str], doc_domain: Optional[str]) -> str:
    if query_domain is None or doc_domain is None:
        return UNRESOLVED
    return IN if query_domain == doc_domain else OUT


class Corpus:
    """Validated, immutable collection of documents plus citation edges."""

    def __init__(self, documents: Iterable[Document], edges: Iterable[CitationEdge] = (), strict: bool = False):
        self.docs: dict[str, Document] = {}
        for doc in documents:
            if not doc.doc_id:
                raise IntegrityError("document with empty doc_id")
            if not doc.family_id:
                raise IntegrityError(f"document {doc.doc_id!r} has empty family_id")
            if doc.doc_id in self.docs:
                raise IntegrityError(f"duplicate _id {doc.doc_id!r}")
            self.docs[doc.doc_id] = doc
        self.families: dict[str, tuple[str, ...]] = {}
        fam: dict[str, list[str]] = {}
        for doc in self.docs.values():
            fam.setdefault(doc.family_id, []).append(doc.doc_id)
        self.families = {f: tuple(sorted(ids)) for f, ids in fam.items()}
        self.edges = clean_edges(edges)
        if strict:
            for e in self.edges:
                for f in (e.citing_family, e.cited_family):
                    if f not in self.families:
                        raise IntegrityError(f"citation references unknown family {f!r}")

    def __len__(self) -> int:
        return len(self.docs)

    def __iter__(self):
        return iter(self.docs.values())

    @property
    def doc_ids(self) -> list[str]:
        return list(self.docs)

    def label_datasets(self) -> list[str]:
        names: set[str] = set()
        for doc in self.docs.values():
            names.update(doc.labels)
        return sorted(names)


def clean_edges(edges: Iterable[CitationEdge]) -> frozenset[CitationEdge]:
    """Deduplicate and drop self-citations (citing == cited)."""
    return frozenset(e for e in edges if e.citing_family != e.cited_family)


# ---------------------------------------------------------------------------
# ingestion


def _clean_sections(raw: Mapping[str, str]) -> dict[str, str]:
    cleaned: dict[str, str] = {}
    for name, text in raw.items():
        if name not in SECTION_NAMES:
            raise ConfigError(f"unknown section name {name!r}")
        if not isinstance(text, str):
            raise ParseError(f"section {name!r} is not a string")
        cleaned[name] = clean_text(text)
    # claim1 is derived from claims when missing; the split marker needs the
    # original line structure, so run it on the tag-stripped raw text.
    if "claim1" not in raw and "claims" in raw:
        first = clean_text(extract_claim1(strip_tags(raw["claims"])))
        if first:
            cleaned["claim1"] = first
    return {k: v for k, v in cleaned.items() if v}


def document_from_record(rec: Mapping, line_no: Optional[int] = None) -> Document:
    where = f"line {line_no}: " if line_no is not None else ""
    doc_id = rec.get("_id")
    if not isinstance(doc_id, str) or not doc_id:
        raise ParseError(f"{where}missing or empty _id")
    sections = dict(rec.get("sections") or {})
    if "title" not in sections and isinstance(rec.get("title"), str):
        sections["title"] = rec["title"]
    # Plain BEIR records carry the body in "text"; treat it as the abstract.
    if "abstract" not in sections and isinstance(rec.get("text"), str):
        sections["abstract"] = rec["text"]
    try:
        cleaned = _clean_sections(sections)
    except (ConfigError, ParseError) as exc:
        raise ParseError(f"{where}{exc}") from None
    family = rec.get("family_id") or doc_id  # no family info: one-doc family
    ipc3 = []
    for code in rec.get("ipc3") or []:
        code = str(code).strip().upper()[:3]
        if code and code not in ipc3:
            ipc3.append(code)
    labels: dict[str, tuple[str, ...]] = {}
    for dataset, values in (rec.get("labels") or {}).items():
        seen: list[str] = []
        for v in values:
            v = str(v)
            if v and v not in seen:
                seen.append(v)
        labels[dataset] = tuple(seen)
    return Document(doc_id=doc_id, family_id=str(family), sections=cleaned, labels=labels, ipc3=tuple(ipc3))


def load_corpus(
    corpus_path: str | Path,
    labels_path: Optional[str | Path] = None,
    citations_path: Optional[str | Path] = None,
    strict: bool = False,
) -> Corpus:
    """Load a corpus.jsonl file, optionally merging label and citation files."""
    docs: list[Document] = []
    with open(corpus_path, encoding="utf-8") as f:
        for i, line in enumerate(f, start=1):
            line = line.strip()
            if not line:
                continue
            try:
                rec = json.loads(line)
            except json.JSONDecodeError as exc:
                raise ParseError(f"{corpus_path}: line {i}: {exc.msg}") from None
            docs.append(document_from_record(rec, line_no=i))
    if labels_path is not None:
        merged = load_labels_tsv(labels_path)
        by_id = {d.doc_id: d for d in docs}
        for doc_id, datasets in merged.items():
            doc = by_id.get(doc_id)
            if doc is None:
                continue
            combined = dict(doc.labels)
            for dataset, vals in datasets.items():
                seen = list(combined.get(dataset, ()))
                for v in vals:
                    if v not in seen:
                        seen.append(v)
                combined[dataset] = tuple(seen)
            by_id[doc_id] = Document(doc.doc_id, doc.family_id, doc.sections, combined, doc.ipc3)
        docs = list(by_id.values())
    edges = load_citations_tsv(citations_path) if citations_path is not None else ()
    return Corpus(docs, edges=edges, strict=strict)


def load_labels_tsv(path: str | Path) -> dict[str, dict[str, list[str]]]:
    """Read ``doc-id\tdataset\tlabel`` rows into doc -> dataset -> ordered labels."""
    out: dict[str, dict[str, list[str]]] = {}
    with open(path, encoding="utf-8") as f:
        for i, line in enumerate(f, start=1):
            line = line.rstrip("\n")
            if not line or (i == 1 and line == "doc-id\tdataset\tlabel"):
                continue
            parts = line.split("\t")
            if len(parts) != 3:
                raise ParseError(f"{path}: line {i}: expected 3 tab-separated fields")
            doc_id, dataset, label = parts
            bucket = out.setdefault(doc_id, {}).setdefault(dataset, [])
            if label not in bucket:
                bucket.append(label)
    return out


def load_citations_tsv(path: str | Path) -> frozenset[CitationEdge]:
    edges: set[CitationEdge] = set()
    with open(path, encoding="utf-8") as f:
        for i, line in enumerate(f, start=1):
            line = line.rstrip("\n")
            if not line or (i == 1 and line == "citing_family\tcited_family"):
                continue
            parts = line.split("\t")
            if len(parts) != 2:
                raise ParseError(f"{path}: line {i}: expected 2 tab-separated fields")
            edges.add(CitationEdge(parts[0], parts[1]))
    return frozenset(edges)


# ---------------------------------------------------------------------------
# views


def build_view(corpus: Corpus, spec: ViewSpec) -> ViewCorpus:
    """Compose each document's non-empty sections in spec order."""
    texts: dict[str, str] = {}
    empty: set[str] = set()
    for doc in corpus:
        parts = [doc.section(s) for s in spec.section_list]
        text = spec.separator.join(p for p in parts if p)
        texts[doc.doc_id] = text
        if not text:
            empty.add(doc.doc_id)
    return ViewCorpus(spec.name, texts, frozenset(empty))


# ---------------------------------------------------------------------------
# splits


def family_disjoint_split(
    corpus: Corpus,
    ratios: Sequence[float] = (0.8, 0.1, 0.1),
    seed: int = 42,
) -> Split:
    """Shuffle families with a seeded RNG, then greedily fill partitions.

    Each family is assigned whole to the partition with the largest remaining
    document-count deficit, so realized fractions track the targets as closely
    as family granularity allows.
    """
    if len(corpus) == 0:
        raise EmptyInputError("cannot split an empty corpus")
    ratios = tuple(float(r) for r in ratios)
    if len(ratios) != 3 or any(r <= 0 for r in ratios) or abs(sum(ratios) - 1.0) > 1e-9:
        raise ConfigError(f"ratios must be 3 positive fractions summing to 1, got {ratios}")
    family_ids = sorted(corpus.families)
    order = np.random.default_rng(seed).permutation(len(family_ids))
    n = len(corpus)
    targets = [r * n for r in ratios]
    counts = [0, 0, 0]
    assignment: dict[str, str] = {}
    for idx in order:
        fid = family_ids[idx]
        deficits = [targets[p] - counts[p] for p in range(3)]
        part = max(range(3), key=lambda p: deficits[p])
        members = corpus.families[fid]
        counts[part] += len(members)
        for doc_id in members:
            assignment[doc_id] = PARTS[part]
    ordered = {doc_id: assignment[doc_id] for doc_id in corpus.docs}
    return Split(ordered, ratios, seed)


# ---------------------------------------------------------------------------
# domains and jurisdictions


def domain_of(doc: Document, coarse_datasets: Optional[Sequence[str]] = None) -> Optional[str]:
    """Coarse technology domain: majority label across coarse datasets,
    ties lexicographic; falls back to the first IPC-3 code; else None."""
    datasets = coarse_datasets if coarse_datasets is not None else sorted(doc.labels)
    counts: dict[str, int] = {}
    for dataset in datasets:
        for label in doc.labels.get(dataset, ()):
            counts[label] = counts.get(label, 0) + 1
    if counts:
        best = max(counts.values())
        return min(l for l, c in counts.items() if c == best)
    if doc.ipc3:
        return doc.ipc3[0]
    return None


JURISDICTION_GROUPS = ("EN", "CN", "JP", "DE", "FR", "ES", "RU", "OTHER")

#: Two-letter country code -> group. German-speaking membership (DE/AT/CH) is
#: a documented default; override via the ``overrides`` argument.
DEFAULT_JURISDICTION_MAP: dict[str, str] = {
    "US": "EN", "EP": "EN", "WO": "EN", "GB": "EN", "AU": "EN", "CA": "EN",
    "CN": "CN", "TW": "CN", "HK": "CN",
    "JP": "JP",
    "DE": "DE", "AT": "DE", "CH": "DE",
    "FR": "FR",
    "ES": "ES",
    "RU": "RU",
}


def jurisdiction_group(doc_id: str, overrides: Optional[Mapping[str, str]] = None) -> str:
    if len(doc_id) < 2:
        raise FormatError(f"doc_id {doc_id!r} shorter than 2 characters")
    mapping = DEFAULT_JURISDICTION_MAP if overrides is None else {**DEFAULT_JURISDICTION_MAP, **overrides}
    return mapping.get(doc_id[:2].upper(), "OTHER")


# ---------------------------------------------------------------------------
# qrels


def build_qrels(
    corpus: Corpus,
    edges: Iterable[CitationEdge],
    domain_fn: Optional[Callable[[Document], Optional[str]]] = None,
) -> Qrels:
    """Expand family citation edges into document-level judgments.

    Every corpus document of the citing family becomes a query, every corpus
    document of the cited family is relevant to it; self-citations, edges with
    either family outside the corpus, and same-family pairs contribute nothing.
    """
    if domain_fn is None:
        domain_fn = domain_of
    judgments: dict[str, dict[str, str]] = {}
    for edge in sorted(clean_edges(edges), key=lambda e: (e.citing_family, e.cited_family)):
        citing = corpus.families.get(edge.citing_family)
        cited = corpus.families.get(edge.cited_family)
        if not citing or not cited:
            continue
        for qid in citing:
            qdoc = corpus.docs[qid]
            qdom = domain_fn(qdoc)
            for did in cited:
                ddoc = corpus.docs[did]
                if qdoc.family_id == ddoc.family_id:
                    continue
                judgments.setdefault(qid, {})[did] = _pair_tag(qdom, domain_fn(ddoc))
    return Qrels(judgments)


# ---------------------------------------------------------------------------
# QA


@dataclass(frozen=True)
class Violation:
    kind: str
    subject: str
    detail: str


@dataclass(frozen=True)
class QaReport:
    violations: tuple[Violation, ...]

    @property
    def ok(self) -> bool:
        return not self.violations

    def __len__(self) -> int:
        return len(self.violations)


def qa_check(corpus: Corpus, split: Split, qrels: Qrels) -> QaReport:
    """Cross-artifact checks: split disjointness, qrels alignment, query text,
    label coverage. Violations are data, not errors; an empty report means pass."""
    found: list[Violation] = []
    parts_by_family: dict[str, set[str]] = {}
    for doc_id, part in split.assignment.items():
        doc = corpus.docs.get(doc_id)
        if doc is None:
            found.append(Violation("split-unknown-doc", doc_id, "split references doc not in corpus"))
            continue
        parts_by_family.setdefault(doc.family_id, set()).add(part)
    for fid in sorted(parts_by_family):
        parts = parts_by_family[fid]
        if len(parts) > 1:
            found.append(Violation("split-family", fid, f"family spans partitions {sorted(parts)}"))
    for qid in qrels.query_ids:
        if qid not in corpus.docs:
            found.append(Violation("qrels-query-missing", qid, "query doc not in corpus"))
        elif not corpus.docs[qid].has_text():
            found.append(Violation("query-empty-text", qid, "query doc has no section text"))
        for did in sorted(qrels.relevant(qid)):
            if did not in corpus.docs:
                found.append(Violation("qrels-doc-missing", did, f"judged doc missing (query {qid})"))
    for dataset in corpus.label_datasets():
        for doc in corpus:
            if dataset in doc.labels and not doc.labels[dataset]:
                found.append(Violation("label-empty", doc.doc_id, f"empty label set in dataset {dataset!r}"))
    return QaReport(tuple(found))


# ---------------------------------------------------------------------------
# writers / readers for the interchange formats


def write_corpus_jsonl(corpus: Corpus, path: str | Path) -> None:
    with open(path, "w", encoding="utf-8") as f:
        for doc in corpus:
            rec = {
                "_id": doc.doc_id,
                "title": doc.section("title"),
                "text": doc.section("abstract"),
                "sections": dict(doc.sections),
                "family_id": doc.family_id,
                "ipc3": list(doc.ipc3),
                "labels": {k: list(v) for k, v in doc.labels.items()},
            }
            f.write(json.dumps(rec, ensure_ascii=False) + "\n")


def write_queries_jsonl(texts: Mapping[str, str], path: str | Path) -> None:
    with open(path, "w", encoding="utf-8") as f:
        for qid in texts:
            f.write(json.dumps({"_id": qid, "text": texts[qid]}, ensure_ascii=False) + "\n")


def load_queries_jsonl(path: str | Path) -> dict[str, str]:
    out: dict[str, str] = {}
    with open(path, encoding="utf-8") as f:
        for i, line in enumerate(f, start=1):
            line = line.strip()
            if not line:
                continue
            try:
                rec = json.loads(line)
            except json.JSONDecodeError as exc:
                raise ParseError(f"{path}: line {i}: {exc.msg}") from None
            if "_id" not in rec or "text" not in rec:
                raise ParseError(f"{path}: line {i}: expected _id and text fields")
            if rec["_id"] in out:
                raise IntegrityError(f"{path}: duplicate _id {rec['_id']!r}")
            out[rec["_id"]] = rec["text"]
    return out


def write_qrels_tsv(qrels: Qrels, path: str | Path) -> None:
    with open(path, "w", encoding="utf-8") as f:
        f.write("query-id\tcorpus-id\tscore\n")
        for qid in qrels.query_ids:
            for did in sorted(qrels.judgments[qid]):
                f.write(f"{qid}\t{did}\t1\n")


def load_qrels_tsv(path: str | Path) -> Qrels:
    """Read a qrels file; domain tags are not persisted, so judgments load as
    UNRESOLVED (use Qrels.retagged with a corpus to restore IN/OUT slicing)."""
    judgments: dict[str, dict[str, str]] = {}
    with open(path, encoding="utf-8") as f:
        for i, line in enumerate(f, start=1):
            line = line.rstrip("\n")
            if not line or (i == 1 and line.startswith("query-id\t")):
                continue
            parts = line.split("\t")
            if len(parts) != 3:
                raise ParseError(f"{path}: line {i}: expected 3 tab-separated fields")
            qid, did, score = parts
            if score != "1":
                raise ParseError(f"{path}: line {i}: relevance must be 1, got {score!r}")
            judgments.setdefault(qid, {})[did] = UNRESOLVED
    return Qrels(judgments)


def write_citations_tsv(edges: Iterable[CitationEdge], path: str | Path) -> None:
    with open(path, "w", encoding="utf-8") as f:
        f.write("citing_family\tcited_family\n")
        for e in sorted(edges, key=lambda e: (e.citing_family, e.cited_family)):
            f.write(f"{e.citing_family}\t{e.cited_family}\n")


def write_labels_tsv(corpus: Corpus, path: str | Path) -> None:
    with open(path, "w", encoding="utf-8") as f:
        f.write("doc-id\tdataset\tlabel\n")
        for doc in corpus:
            for dataset in sorted(doc.labels):
                for label in doc.labels[dataset]:
                    f.write(f"{doc.doc_id}\t{dataset}\t{label}\n")


def write_split_tsv(split: Split, path: str | Path) -> None:
    with open(path, "w", encoding="utf-8") as f:
        f.write("doc-id\tsplit\n")
        for doc_id, part in split.assignment.items():
            f.write(f"{doc_id}\t{part}\n")


def load_split_tsv(path: str | Path) -> Split:
    assignment: dict[str, str] = {}
    with open(path, encoding="utf-8") as f:
        for i, line in enumerate(f, start=1):
            line = line.rstrip("\n")
            if not line or (i == 1 and line == "doc-id\tsplit"):
                continue
            parts = line.split("\t")
            if len(parts) != 2 or parts[1] not in PARTS:
                raise ParseError(f"{path}: line {i}: expected 'doc-id\\tsplit'")
            if parts[0] in assignment:
                raise IntegrityError(f"{path}: doc {parts[0]!r} assigned twice")
            assignment[parts[0]] = parts[1]
    n = len(assignment) or 1
    counts = {p: 0 for p in PARTS}
    for p in assignment.values():
        counts[p] += 1
    ratios = tuple(counts[p] / n for p in PARTS)
    return Split(assignment, ratios, seed=-1)
