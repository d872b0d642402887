"""Contrastive training-pair generation for the fine-tuning recipes.

* R1 -- co-label pairs: every unordered pair of train docs sharing a label,
  sampled down to at most ``r1_cap`` pairs per label (full closure is
  quadratic in label size; the cap is recorded in the pair set).
* R2 -- citation pairs: one pair per intra-train family citation edge, using
  the lexicographically smallest doc of each family as its representative.
* R3 -- cross-section pairs: each train doc's abstract paired with its first
  independent claim.
* R4 -- the tagged concatenation of R1 + R2 + R3.
* R3M -- R3 oversampled with replacement to exactly ``target_count`` pairs
  (keeps every R3 pair at least once when the target is not below |R3|).

Pair texts for R1/R2 use the TA view on both sides. Only train-split
documents ever appear. Output is TSV ``anchor\tpositive\tprovenance`` with
backslash, tab and newline escaped as ``\\``, ``\t``, ``\n``.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from pathlib import Path
from typing import Optional, Sequence

import numpy as np

from .corpus import Corpus, Split, ViewSpec, build_view, get_view
from .errors import ConfigError, DataError, ParseError

RECIPES = ("R1", "R2", "R3", "R4", "R3M")

PAIRS_HEADER = "anchor\tpositive\tprovenance"


@dataclass(frozen=True)
class Pair:
    anchor: str
    positive: str
    tag: str  # R1 | R2 | R3
    anchor_id: str = ""
    positive_id: str = ""


@dataclass
class PairSet:
    pairs: list[Pair]
    recipe: str
    seed: int
    r1_cap: Optional[int] = None
    counts: dict[str, int] = field(default_factory=dict)

    def __post_init__(self):
        if not self.counts:
            self.counts = {}
            for p in self.pairs:
                self.counts[p.tag] = self.counts.get(p.tag, 0) + 1

    def __len__(self) -> int:
        return len(self.pairs)


def _train_ids(corpus: Corpus, split: Split) -> list[str]:
    return [d for d in corpus.docs if split.assignment.get(d) == "train"]


def _r1_pairs(corpus: Corpus, train: list[str], texts, rng: np.random.Generator, cap: Optional[int], label_datasets: Optional[Sequence[str]]) -> list[Pair]:
    datasets = sorted(label_datasets) if label_datasets else corpus.label_datasets()
    by_label: dict[tuple[str, str], list[str]] = {}
    any_labels = False
    for doc_id in train:
        doc = corpus.docs[doc_id]
        for dataset in datasets:
            for label in doc.labels.get(dataset, ()):
                any_labels = True
                by_label.setdefault((dataset, label), []).append(doc_id)
    if not any_labels:
        raise DataError("R1 needs labels on train documents; none found")
    pairs: list[Pair] = []
    seen: set[tuple[str, str]] = set()
    for key in sorted(by_label):
        members = sorted(by_label[key])
        candidates = [(a, b) for i, a in enumerate(members) for b in members[i + 1 :]]
        if cap is not None and len(candidates) > cap:
            chosen = rng.choice(len(candidates), size=cap, replace=False)
            candidates = [candidates[i] for i in sorted(chosen)]
        for a, b in candidates:
            if (a, b) in seen:
                continue
            seen.add((a, b))
            if texts[a] or texts[b]:
                pairs.append(Pair(texts[a], texts[b], "R1", a, b))
    return pairs


def _r2_pairs(corpus: Corpus, split: Split, texts) -> list[Pair]:
    if not corpus.edges:
        raise DataError("R2 needs citation edges; corpus has none")
    reps = {fid: min(members) for fid, members in corpus.families.items()}
    pairs: list[Pair] = []
    for edge in sorted(corpus.edges, key=lambda e: (e.citing_family, e.cited_family)):
        citing = reps.get(edge.citing_family)
        cited = reps.get(edge.cited_family)
        if citing is None or cited is None:
            continue
        if split.assignment.get(citing) != "train" or split.assignment.get(cited) != "train":
            continue
        if texts[citing] or texts[cited]:
            pairs.append(Pair(texts[citing], texts[cited], "R2", citing, cited))
    return pairs


def _r3_pairs(corpus: Corpus, train: list[str]) -> list[Pair]:
    pairs: list[Pair] = []
    for doc_id in train:
        doc = corpus.docs[doc_id]
        abstract = doc.section("abstract")
        claim1 = doc.section("claim1")
        if abstract and claim1:
            pairs.append(Pair(abstract, claim1, "R3", doc_id, doc_id))
    if not pairs:
        raise DataError("R3 needs train documents with both abstract and claim1; none found")
    return pairs


def generate_pairs(
    corpus: Corpus,
    split: Split,
    recipe: str,
    seed: int = 42,
    target_count: Optional[int] = None,
    r1_cap: Optional[int] = 50,
    label_datasets: Optional[Sequence[str]] = None,
    pair_view: ViewSpec | str = "TA",
) -> PairSet:
    """Build the pair set for one recipe, restricted to the train split."""
    if recipe not in RECIPES:
        raise ConfigError(f"unknown recipe {recipe!r}; known: {RECIPES}")
    spec = get_view(pair_view) if isinstance(pair_view, str) else pair_view
    texts = build_view(corpus, spec).texts
    train = _train_ids(corpus, split)
    rng = np.random.default_rng(seed)

    if recipe == "R1":
        pairs = _r1_pairs(corpus, train, texts, rng, r1_cap, label_datasets)
    elif recipe == "R2":
        pairs = _r2_pairs(corpus, split, texts)
    elif recipe == "R3":
        pairs = _r3_pairs(corpus, train)
    elif recipe == "R4":
        pairs = (
            _r1_pairs(corpus, train, texts, rng, r1_cap, label_datasets)
            + _r2_pairs(corpus, split, texts)
            + _r3_pairs(corpus, train)
        )
    else:  # R3M
        if target_count is None:
            raise ConfigError("R3M requires target_count")
        base = _r3_pairs(corpus, train)
        if target_count >= len(base):
            extra = rng.integers(0, len(base), size=target_count - len(base))
            pairs = list(base) + [base[int(i)] for i in extra]
        else:
            idx = rng.integers(0, len(base), size=target_count)
            pairs = [base[int(i)] for i in idx]
    return PairSet(pairs, recipe=recipe, seed=seed, r1_cap=r1_cap if recipe in ("R1", "R4") else None)


# ---------------------------------------------------------------------------
# serialization


def _escape(text: str) -> str:
    return text.replace("\\", "\\\\").replace("\t", "\\t").replace("\n", "\\n").replace("\r", "\\r")


def _unescape(text: str) -> str:
    out: list[str] = []
    i = 0
    while i < len(text):
        ch = text[i]
        if ch == "\\" and i + 1 < len(text):
            nxt = text[i + 1]
            out.append({"\\": "\\", "t": "\t", "n": "\n", "r": "\r"}.get(nxt, "\\" + nxt))
            i += 2
        else:
            out.append(ch)
            i += 1
    return "".join(out)


def write_pairs_tsv(pairset: PairSet, path: str | Path) -> None:
    with open(path, "w", encoding="utf-8") as f:
        f.write(PAIRS_HEADER + "\n")
        for p in pairset.pairs:
            f.write(f"{_escape(p.anchor)}\t{_escape(p.positive)}\t{p.tag}\n")


def read_pairs_tsv(path: str | Path) -> list[Pair]:
    pairs: list[Pair] = []
    with open(path, encoding="utf-8") as f:
        for i, line in enumerate(f, start=1):
            line = line.rstrip("\n")
            if not line or (i == 1 and line == PAIRS_HEADER):
                continue
            parts = line.split("\t")
            if len(parts) != 3:
                raise ParseError(f"{path}: line {i}: expected 3 tab-separated fields")
            pairs.append(Pair(_unescape(parts[0]), _unescape(parts[1]), parts[2]))
    return pairs
