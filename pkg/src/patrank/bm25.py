"""Okapi BM25 inverted index over a view corpus.

Tokenization is deliberately minimal (lowercase, split on non-alphanumeric
runes, no stemming or stopwords) so scores are reproducible across languages
and toolchains. IDF uses the smoothed variant ln(1 + (N - df + 0.5) / (df + 0.5)),
which is strictly positive, so only zero-match documents score zero and are
excluded from rankings.

Index files ("BMI1") are little-endian:

    magic 4s "BMI1" | version u8 = 1 | k1 f64 | b f64 | doc_count u32
    per doc:  id_len u32, id utf-8 bytes, doc_length u32
    term_count u32
    per term: term_len u32, term utf-8 bytes, df u32, df x (ordinal u32, tf u32)
"""

from __future__ import annotations

import math
import re
import struct
from pathlib import Path
from typing import Iterable, Mapping

import numpy as np
from sklearn.base import BaseEstimator

from .corpus import ViewCorpus
from .errors import ConfigError, EmptyInputError, FormatError
from .fusion import Run

# Maximal runs of alphanumeric code points; underscore is not alphanumeric.
_TOKEN_RE = re.compile(r"[^\W_]+", re.UNICODE)


def tokenize(text: str) -> list[str]:
    """Lowercase and split on any non-alphanumeric rune, dropping empties."""
    return _TOKEN_RE.findall(text.lower())


class Bm25Retriever(BaseEstimator):
    """Okapi BM25 with k1 saturation and b length normalization.

    fit() builds the inverted index; the fitted index is immutable and safe
    for parallel query scoring.
    """

    def __init__(self, k1: float = 1.5, b: float = 0.75):
        self.k1 = k1
        self.b = b

    def fit(self, view: ViewCorpus | Mapping[str, str]) -> "Bm25Retriever":
        texts = view.texts if isinstance(view, ViewCorpus) else view
        if not texts:
            raise EmptyInputError("cannot index an empty view")
        if self.k1 < 0 or not 0.0 <= self.b <= 1.0:
            raise ConfigError(f"bad BM25 parameters k1={self.k1}, b={self.b}")
        self.ids_ = tuple(texts)
        self.doc_count_ = len(self.ids_)
        lengths = np.zeros(self.doc_count_, dtype=np.float64)
        postings: dict[str, dict[int, int]] = {}
        for ordinal, doc_id in enumerate(self.ids_):
            tokens = tokenize(texts[doc_id])
            lengths[ordinal] = len(tokens)
            for tok in tokens:
                bucket = postings.setdefault(tok, {})
                bucket[ordinal] = bucket.get(ordinal, 0) + 1
        self.doc_lengths_ = lengths
        self.avg_doc_length_ = float(lengths.mean())
        self.postings_ = {
            term: (
                np.fromiter(sorted(by_doc), dtype=np.int64, count=len(by_doc)),
                np.array([by_doc[o] for o in sorted(by_doc)], dtype=np.float64),
            )
            for term, by_doc in postings.items()
        }
        # Rank of each doc_id in ascending id order, for the global tie rule.
        self._id_rank_ = np.argsort(np.argsort(np.array(self.ids_)))
        if self.avg_doc_length_ > 0:
            self._len_norm_ = self.k1 * (1.0 - self.b + self.b * lengths / self.avg_doc_length_)
        else:
            self._len_norm_ = np.full(self.doc_count_, self.k1)
        return self

    def idf(self, term: str) -> float:
        entry = self.postings_.get(term)
        if entry is None:
            return 0.0
        df = len(entry[0])
        return math.log(1.0 + (self.doc_count_ - df + 0.5) / (df + 0.5))

    def scores(self, query_text: str) -> np.ndarray:
        """Raw BM25 score for every document ordinal (unknown terms score 0)."""
        scores = np.zeros(self.doc_count_, dtype=np.float64)
        for tok in tokenize(query_text):
            entry = self.postings_.get(tok)
            if entry is None:
                continue
            ordinals, tfs = entry
            idf = self.idf(tok)
            scores[ordinals] += idf * tfs * (self.k1 + 1.0) / (tfs + self._len_norm_[ordinals])
        return scores

    def topk(self, query_text: str, k: int, exclude: Iterable[str] = ()) -> list[tuple[str, float]]:
        if k < 1:
            raise ConfigError(f"k must be >= 1, got {k}")
        scores = self.scores(query_text)
        excluded = set(exclude)
        keep = np.flatnonzero(scores > 0.0)
        # exclusion happens after selection, so widen the partial pick by the
        # number of excludable docs to keep the result exact
        want = min(k + len(excluded), keep.size)
        if want and want < keep.size:
            top = np.argpartition(-scores[keep], want - 1)[:want]
            threshold = scores[keep][top].min()
            keep = keep[scores[keep] >= threshold]
        order = np.lexsort((self._id_rank_[keep], -scores[keep]))
        out: list[tuple[str, float]] = []
        for idx in keep[order]:
            doc_id = self.ids_[idx]
            if doc_id in excluded:
                continue
            out.append((doc_id, float(scores[idx])))
            if len(out) == k:
                break
        return out

    def run(self, queries: Mapping[str, str], k: int, exclude_self: bool = True, system: str = "bm25", view: str = "") -> Run:
        rankings = {
            qid: self.topk(text, k, exclude={qid} if exclude_self else ())
            for qid, text in queries.items()
        }
        return Run(rankings, system=system, view=view, params={"k1": self.k1, "b": self.b, "k": k})


def build_bm25(view: ViewCorpus | Mapping[str, str], k1: float = 1.5, b: float = 0.75) -> Bm25Retriever:
    return Bm25Retriever(k1=k1, b=b).fit(view)


def bm25_topk(index: Bm25Retriever, query_text: str, k: int, exclude: Iterable[str] = ()) -> list[tuple[str, float]]:
    return index.topk(query_text, k, exclude=exclude)


# ---------------------------------------------------------------------------
# index serialization

_MAGIC = b"BMI1"
_VERSION = 1


def save_index(index: Bm25Retriever, path: str | Path) -> None:
    with open(path, "wb") as f:
        f.write(_MAGIC)
        f.write(struct.pack("<B", _VERSION))
        f.write(struct.pack("<dd", index.k1, index.b))
        f.write(struct.pack("<I", index.doc_count_))
        for ordinal, doc_id in enumerate(index.ids_):
            raw = doc_id.encode("utf-8")
            f.write(struct.pack("<I", len(raw)))
            f.write(raw)
            f.write(struct.pack("<I", int(index.doc_lengths_[ordinal])))
        terms = sorted(index.postings_)
        f.write(struct.pack("<I", len(terms)))
        for term in terms:
            raw = term.encode("utf-8")
            f.write(struct.pack("<I", len(raw)))
            f.write(raw)
            ordinals, tfs = index.postings_[term]
            f.write(struct.pack("<I", len(ordinals)))
            for o, tf in zip(ordinals, tfs):
                f.write(struct.pack("<II", int(o), int(tf)))


def load_index(path: str | Path) -> Bm25Retriever:
    with open(path, "rb") as f:
        data = f.read()
    if data[:4] != _MAGIC:
        raise FormatError(f"{path}: bad magic {data[:4]!r}, expected {_MAGIC!r}")
    off = 4
    (version,) = struct.unpack_from("<B", data, off)
    off += 1
    if version != _VERSION:
        raise FormatError(f"{path}: unsupported BMI version {version}")
    k1, b = struct.unpack_from("<dd", data, off)
    off += 16
    (doc_count,) = struct.unpack_from("<I", data, off)
    off += 4
    ids: list[str] = []
    lengths = np.zeros(doc_count, dtype=np.float64)
    try:
        for i in range(doc_count):
            (id_len,) = struct.unpack_from("<I", data, off)
            off += 4
            ids.append(data[off : off + id_len].decode("utf-8"))
            off += id_len
            (lengths[i],) = struct.unpack_from("<I", data, off)
            off += 4
        (term_count,) = struct.unpack_from("<I", data, off)
        off += 4
        postings: dict[str, tuple[np.ndarray, np.ndarray]] = {}
        for _ in range(term_count):
            (term_len,) = struct.unpack_from("<I", data, off)
            off += 4
            term = data[off : off + term_len].decode("utf-8")
            off += term_len
            (df,) = struct.unpack_from("<I", data, off)
            off += 4
            pairs = struct.unpack_from(f"<{2 * df}I", data, off)
            off += 8 * df
            postings[term] = (
                np.array(pairs[0::2], dtype=np.int64),
                np.array(pairs[1::2], dtype=np.float64),
            )
    except struct.error:
        raise FormatError(f"{path}: truncated index file") from None
    index = Bm25Retriever(k1=k1, b=b)
    index.ids_ = tuple(ids)
    index.doc_count_ = doc_count
    index.doc_lengths_ = lengths
    index.avg_doc_length_ = float(lengths.mean()) if doc_count else 0.0
    index.postings_ = postings
    index._id_rank_ = np.argsort(np.argsort(np.array(index.ids_)))
    if index.avg_doc_length_ > 0:
        index._len_norm_ = k1 * (1.0 - b + b * lengths / index.avg_doc_length_)
    else:
        index._len_norm_ = np.full(doc_count, k1)
    return index
