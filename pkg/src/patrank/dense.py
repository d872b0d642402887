"""Single-vector and per-token embedding stores with exact scoring.

Retrieval is an exact dot-product scan over the in-memory matrix -- no
approximate index. Rankings follow the global tie rule (descending score,
ties by ascending doc_id) and exclude the query's own document by default.

Binary formats, little-endian:

* EMB1: magic "EMB1", u32 version=1, u32 dim, u64 count, then count x dim
  float32 row-major. A row-aligned ids sidecar lives at "<path>.ids", one
  doc_id per line.
* TOK1: magic "TOK1", u32 version=1, u32 dim, then per document:
  u32 id length, id utf-8 bytes, u32 n_tokens, n_tokens x dim float32.
"""

from __future__ import annotations

import os
import struct
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from pathlib import Path
from typing import Iterable, Mapping, Optional

import numpy as np

from .errors import ConfigError, EmptyInputError, FormatError, ShapeError
from .fusion import Run

_EMB_MAGIC = b"EMB1"
_TOK_MAGIC = b"TOK1"
_VERSION = 1


def n_threads() -> int:
    """Parallelism cap from PATRANK_THREADS (default 1; results are
    order-deterministic regardless)."""
    raw = os.environ.get("PATRANK_THREADS", "")
    try:
        return max(1, int(raw)) if raw else 1
    except ValueError:
        return 1


@dataclass
class EmbeddingMatrix:
    """N x d float32 rows with an id index; zero rows are flagged after
    normalization and never retrieved."""

    rows: np.ndarray
    ids: tuple[str, ...]
    normalized: bool = False
    zero_rows: frozenset[int] = frozenset()
    _id_rank: Optional[np.ndarray] = field(default=None, repr=False)

    def __post_init__(self):
        self.rows = np.asarray(self.rows, dtype=np.float32)
        if self.rows.ndim != 2:
            raise ShapeError(f"rows must be 2-D, got shape {self.rows.shape}")
        if len(self.ids) != self.rows.shape[0]:
            raise FormatError(f"{len(self.ids)} ids for {self.rows.shape[0]} rows")
        self.id_to_ordinal = {doc_id: i for i, doc_id in enumerate(self.ids)}
        if len(self.id_to_ordinal) != len(self.ids):
            raise FormatError("duplicate ids in embedding matrix")
        if self.normalized and len(self.ids):
            norms = np.linalg.norm(self.rows.astype(np.float64), axis=1)
            live = np.setdiff1d(np.arange(len(norms)), np.fromiter(self.zero_rows, dtype=np.int64, count=len(self.zero_rows)))
            if live.size and np.abs(norms[live] - 1.0).max() > 1e-5:
                worst = int(live[np.abs(norms[live] - 1.0).argmax()])
                raise FormatError(f"matrix flagged normalized but row {worst} has norm {norms[worst]:.6f}")

    @property
    def dim(self) -> int:
        return int(self.rows.shape[1])

    def __len__(self) -> int:
        return int(self.rows.shape[0])

    def vector(self, doc_id: str) -> np.ndarray:
        return self.rows[self.id_to_ordinal[doc_id]]

    @property
    def id_rank(self) -> np.ndarray:
        if self._id_rank is None:
            self._id_rank = np.argsort(np.argsort(np.array(self.ids)))
        return self._id_rank

    def normalize(self) -> "EmbeddingMatrix":
        """L2-normalize rows; zero rows are left as zeros and flagged."""
        norms = np.linalg.norm(self.rows.astype(np.float64), axis=1)
        zero = np.flatnonzero(norms == 0.0)
        safe = np.where(norms == 0.0, 1.0, norms)
        rows = (self.rows / safe[:, None].astype(np.float32)).astype(np.float32)
        return EmbeddingMatrix(rows, self.ids, normalized=True, zero_rows=frozenset(int(i) for i in zero))


def truncate_renorm(matrix: EmbeddingMatrix, d_new: int) -> EmbeddingMatrix:
    """Keep the first d_new coordinates and L2-renormalize each row."""
    if not 1 <= d_new <= matrix.dim:
        raise ConfigError(f"d_new must be in [1, {matrix.dim}], got {d_new}")
    return EmbeddingMatrix(matrix.rows[:, :d_new].copy(), matrix.ids).normalize()


def cosine_topk(
    matrix: EmbeddingMatrix,
    query_vec: np.ndarray,
    k: int,
    exclude: Iterable[str] = (),
) -> list[tuple[str, float]]:
    """Exact dot-product scan; requires a normalized matrix and unit query."""
    if not matrix.normalized:
        raise ConfigError("cosine_topk requires a normalized matrix")
    if k < 1:
        raise ConfigError(f"k must be >= 1, got {k}")
    q = np.asarray(query_vec, dtype=np.float32).reshape(-1)
    if q.shape[0] != matrix.dim:
        raise ShapeError(f"query dim {q.shape[0]} != matrix dim {matrix.dim}")
    scores = matrix.rows @ q
    mask = np.ones(len(matrix), dtype=bool)
    for doc_id in exclude:
        ordinal = matrix.id_to_ordinal.get(doc_id)
        if ordinal is not None:
            mask[ordinal] = False
    for ordinal in matrix.zero_rows:
        mask[ordinal] = False
    keep = np.flatnonzero(mask)
    cand = _select_candidates(scores[keep], k)
    order = np.lexsort((matrix.id_rank[keep][cand], -scores[keep][cand]))[:k]
    chosen = keep[cand[order]]
    return [(matrix.ids[i], float(scores[i])) for i in chosen]


def _select_candidates(scores: np.ndarray, k: int) -> np.ndarray:
    """Indices of every entry that can reach the top k under the tie rule:
    the k highest scores plus all entries tied with the k-th."""
    if k >= scores.size:
        return np.arange(scores.size)
    top = np.argpartition(-scores, k - 1)[:k]
    threshold = scores[top].min()
    return np.flatnonzero(scores >= threshold)


def dense_run(
    doc_matrix: EmbeddingMatrix,
    query_matrix: EmbeddingMatrix,
    k: int,
    exclude_self: bool = True,
    system: str = "dense",
    view: str = "",
) -> Run:
    """Retrieve top-k for every query row; the query's own doc_id is excluded
    when present in the document matrix (family mates are not)."""
    qids = query_matrix.ids
    results: list[Optional[list[tuple[str, float]]]] = [None] * len(qids)

    def score_one(i: int) -> None:
        qid = qids[i]
        if i in query_matrix.zero_rows:
            results[i] = []
            return
        exclude = {qid} if exclude_self else ()
        results[i] = cosine_topk(doc_matrix, query_matrix.rows[i], k, exclude=exclude)

    threads = n_threads()
    if threads > 1:
        with ThreadPoolExecutor(max_workers=threads) as pool:
            list(pool.map(score_one, range(len(qids))))
    else:
        for i in range(len(qids)):
            score_one(i)
    return Run({qid: results[i] for i, qid in enumerate(qids)}, system=system, view=view, params={"k": k})


# ---------------------------------------------------------------------------
# token embeddings and MaxSim


@dataclass
class TokenEmbeddings:
    """Variable-length per-token embeddings, one (m x d) block per document.

    Producers are expected to emit L2-normalized token rows (MaxSim treats
    entries as cosine terms); loading does not renormalize.
    """

    tokens: Mapping[str, np.ndarray]
    dim: int

    def __post_init__(self):
        for doc_id, block in self.tokens.items():
            block = np.asarray(block, dtype=np.float32)
            if block.ndim != 2 or block.shape[1] != self.dim:
                raise ShapeError(f"doc {doc_id!r}: token block shape {block.shape}, want (m, {self.dim})")
            if block.shape[0] < 1:
                raise FormatError(f"doc {doc_id!r} has zero token rows")

    @property
    def ids(self) -> tuple[str, ...]:
        return tuple(self.tokens)

    def __len__(self) -> int:
        return len(self.tokens)


def maxsim_score(query_tokens: np.ndarray, doc_tokens: np.ndarray) -> float:
    """Late-interaction score: sum over query tokens of the max dot product
    against any document token."""
    q = np.asarray(query_tokens, dtype=np.float32)
    d = np.asarray(doc_tokens, dtype=np.float32)
    if q.ndim != 2 or d.ndim != 2:
        raise ShapeError("token blocks must be 2-D")
    if q.shape[1] != d.shape[1]:
        raise ShapeError(f"token dims differ: {q.shape[1]} vs {d.shape[1]}")
    if q.shape[0] < 1 or d.shape[0] < 1:
        raise EmptyInputError("token blocks must have at least one row")
    return float((q @ d.T).max(axis=1).sum())


def maxsim_topk(
    queries: TokenEmbeddings,
    docs: TokenEmbeddings,
    k: int,
    exclude_self: bool = True,
    system: str = "maxsim",
    view: str = "",
) -> Run:
    """Exact MaxSim scan of every query against every document."""
    if queries.dim != docs.dim:
        raise ShapeError(f"token dims differ: {queries.dim} vs {docs.dim}")
    if k < 1:
        raise ConfigError(f"k must be >= 1, got {k}")
    doc_ids = docs.ids
    id_rank = {d: r for r, d in enumerate(sorted(doc_ids))}
    qids = queries.ids
    results: list[Optional[list[tuple[str, float]]]] = [None] * len(qids)

    def score_one(i: int) -> None:
        qid = qids[i]
        q = queries.tokens[qid]
        scored = [
            (maxsim_score(q, docs.tokens[did]), did)
            for did in doc_ids
            if not (exclude_self and did == qid)
        ]
        scored.sort(key=lambda t: (-t[0], id_rank[t[1]]))
        results[i] = [(did, s) for s, did in scored[:k]]

    threads = n_threads()
    if threads > 1:
        with ThreadPoolExecutor(max_workers=threads) as pool:
            list(pool.map(score_one, range(len(qids))))
    else:
        for i in range(len(qids)):
            score_one(i)
    return Run({qid: results[i] for i, qid in enumerate(qids)}, system=system, view=view, params={"k": k})


def mean_pool(doc_tokens: np.ndarray) -> np.ndarray:
    """Arithmetic mean of token rows, L2-normalized for downstream cosine use."""
    block = np.asarray(doc_tokens, dtype=np.float64)
    if block.ndim != 2 or block.shape[0] < 1:
        raise EmptyInputError("mean_pool needs at least one token row")
    pooled = block.mean(axis=0)
    norm = np.linalg.norm(pooled)
    if norm > 0:
        pooled = pooled / norm
    return pooled.astype(np.float32)


def pooled_matrix(tokens: TokenEmbeddings) -> EmbeddingMatrix:
    """Mean-pool every document's tokens into one normalized matrix."""
    rows = np.stack([mean_pool(tokens.tokens[d]) for d in tokens.ids])
    zero = frozenset(int(i) for i in np.flatnonzero(np.linalg.norm(rows, axis=1) == 0.0))
    return EmbeddingMatrix(rows, tokens.ids, normalized=True, zero_rows=zero)


# ---------------------------------------------------------------------------
# file formats


def ids_sidecar(path: str | Path) -> Path:
    return Path(str(path) + ".ids")


def save_embeddings(matrix: EmbeddingMatrix, path: str | Path) -> None:
    rows = np.ascontiguousarray(matrix.rows, dtype="<f4")
    with open(path, "wb") as f:
        f.write(_EMB_MAGIC)
        f.write(struct.pack("<IIQ", _VERSION, matrix.dim, len(matrix)))
        f.write(rows.tobytes())
    with open(ids_sidecar(path), "w", encoding="utf-8") as f:
        for doc_id in matrix.ids:
            f.write(doc_id + "\n")


def load_embeddings(path: str | Path) -> EmbeddingMatrix:
    """Load an EMB1 file and its ids sidecar; the result is not yet normalized."""
    with open(path, "rb") as f:
        header = f.read(20)
        if len(header) < 20 or header[:4] != _EMB_MAGIC:
            raise FormatError(f"{path}: bad magic, expected EMB1")
        version, dim, count = struct.unpack("<IIQ", header[4:])
        if version != _VERSION:
            raise FormatError(f"{path}: unsupported EMB1 version {version}")
        payload = f.read()
    expected = count * dim * 4
    if len(payload) != expected:
        raise FormatError(f"{path}: payload is {len(payload)} bytes, header implies {expected}")
    rows = np.frombuffer(payload, dtype="<f4").reshape(count, dim).copy()
    bad = np.flatnonzero(~np.isfinite(rows).all(axis=1))
    if bad.size:
        raise FormatError(f"{path}: non-finite values in row {int(bad[0])}")
    sidecar = ids_sidecar(path)
    if not sidecar.exists():
        raise FormatError(f"{path}: missing ids sidecar {sidecar}")
    ids = [line.rstrip("\n") for line in open(sidecar, encoding="utf-8") if line.rstrip("\n")]
    if len(ids) != count:
        raise FormatError(f"{sidecar}: {len(ids)} ids for {count} rows")
    return EmbeddingMatrix(rows, tuple(ids))


def save_token_embeddings(tokens: TokenEmbeddings, path: str | Path) -> None:
    with open(path, "wb") as f:
        f.write(_TOK_MAGIC)
        f.write(struct.pack("<II", _VERSION, tokens.dim))
        for doc_id in tokens.ids:
            block = np.ascontiguousarray(tokens.tokens[doc_id], dtype="<f4")
            raw = doc_id.encode("utf-8")
            f.write(struct.pack("<I", len(raw)))
            f.write(raw)
            f.write(struct.pack("<I", block.shape[0]))
            f.write(block.tobytes())


def load_token_embeddings(path: str | Path) -> TokenEmbeddings:
    with open(path, "rb") as f:
        data = f.read()
    if data[:4] != _TOK_MAGIC:
        raise FormatError(f"{path}: bad magic, expected TOK1")
    version, dim = struct.unpack_from("<II", data, 4)
    if version != _VERSION:
        raise FormatError(f"{path}: unsupported TOK1 version {version}")
    off = 12
    blocks: dict[str, np.ndarray] = {}
    while off < len(data):
        try:
            (id_len,) = struct.unpack_from("<I", data, off)
            off += 4
            doc_id = data[off : off + id_len].decode("utf-8")
            off += id_len
            (n_tokens,) = struct.unpack_from("<I", data, off)
            off += 4
            nbytes = n_tokens * dim * 4
            if off + nbytes > len(data):
                raise FormatError(f"{path}: truncated token block for {doc_id!r}")
            block = np.frombuffer(data, dtype="<f4", count=n_tokens * dim, offset=off).reshape(n_tokens, dim).copy()
            off += nbytes
        except struct.error:
            raise FormatError(f"{path}: truncated record header") from None
        if n_tokens < 1:
            raise FormatError(f"{path}: doc {doc_id!r} has zero tokens")
        if not np.isfinite(block).all():
            raise FormatError(f"{path}: non-finite values in doc {doc_id!r}")
        if doc_id in blocks:
            raise FormatError(f"{path}: duplicate doc id {doc_id!r}")
        blocks[doc_id] = block
    return TokenEmbeddings(blocks, dim)
