"""Document embeddings from token vectors.

Two routes produce token-level vectors: static lexicons loaded from the
usual "token v1 ... vD" text format, and precomputed contextual vectors
arriving through a JSON Lines interchange file. Both meet in
pool_document, which collapses token vectors into one document vector by
a TF-IDF weighted mean.
"""

from __future__ import annotations

import json
from dataclasses import dataclass
from pathlib import Path

import numpy as np

from .errors import CoverageError, ValidationError
from .textprep import TfidfTable, TokenizedDoc


@dataclass(frozen=True)
class StaticLexicon:
    dim: int
    vectors: dict[str, np.ndarray]

    def __contains__(self, token: str) -> bool:
        return token in self.vectors

    def __len__(self) -> int:
        return len(self.vectors)


@dataclass(frozen=True)
class TokenEmbeddings:
    """Token-aligned vectors for one document.

    vectors has shape (len(tokens), D); rows keep document order.
    """

    doc_id: str
    tokens: tuple[str, ...]
    vectors: np.ndarray

    def __post_init__(self):
        if len(self.tokens) == 0:
            raise ValidationError(f"document {self.doc_id!r} has no token vectors")
        if self.vectors.ndim != 2 or self.vectors.shape[0] != len(self.tokens):
            raise ValidationError(
                f"document {self.doc_id!r}: {len(self.tokens)} tokens but "
                f"vector array of shape {self.vectors.shape}"
            )

    @property
    def dim(self) -> int:
        return self.vectors.shape[1]


@dataclass(frozen=True)
class EmbeddingSet:
    """One vector per document, rows aligned with ids."""

    ids: tuple[str, ...]
    matrix: np.ndarray

    def __post_init__(self):
        if len(set(self.ids)) != len(self.ids):
            raise ValidationError("embedding set has duplicate ids")
        if self.matrix.ndim != 2 or self.matrix.shape[0] != len(self.ids):
            raise ValidationError(
                f"{len(self.ids)} ids but matrix of shape {self.matrix.shape}"
            )
        if self.matrix.size and not np.isfinite(self.matrix).all():
            raise ValidationError("embedding matrix contains NaN or infinite values")

    @property
    def dim(self) -> int:
        return self.matrix.shape[1]


def load_static_vectors(path: str | Path, vocabulary: set[str]) -> StaticLexicon:
    """Load a static word-vector file, keeping only the requested vocabulary.

    The dimension is inferred from the first line and enforced on every
    later line; a mismatch reports its 1-based line number.
    """
    dim = 0
    vectors: dict[str, np.ndarray] = {}
    usable = 0
    with open(path, encoding="utf-8") as handle:
        for lineno, line in enumerate(handle, start=1):
            parts = line.rstrip("\n").split()
            if not parts:
                continue
            token, values = parts[0], parts[1:]
            if not values:
                raise ValidationError(f"{path}: line {lineno} has no vector values")
            if dim == 0:
                dim = len(values)
            elif len(values) != dim:
                raise ValidationError(
                    f"{path}: line {lineno} has {len(values)} values, expected {dim}"
                )
            usable += 1
            if token not in vocabulary:
                continue
            try:
                vec = np.array([float(v) for v in values], dtype=np.float64)
            except ValueError as exc:
                raise ValidationError(f"{path}: line {lineno}: {exc}") from exc
            vectors[token] = vec
    if usable == 0:
        raise ValidationError(f"{path}: no vector lines found")
    if not vectors:
        raise ValidationError(
            f"{path}: none of the {usable} vectors match the corpus vocabulary"
        )
    return StaticLexicon(dim=dim, vectors=vectors)


def embed_static(
    doc: TokenizedDoc, lexicon: StaticLexicon, tfidf: TfidfTable
) -> TokenEmbeddings:
    """Look up each token in the lexicon, dropping out-of-lexicon tokens."""
    kept = [t for t in doc.tokens if t in lexicon]
    if not kept:
        raise CoverageError(
            f"document {doc.id!r}: no tokens found in the lexicon "
            f"(out of {len(doc.tokens)})"
        )
    matrix = np.stack([lexicon.vectors[t] for t in kept])
    return TokenEmbeddings(doc_id=doc.id, tokens=tuple(kept), vectors=matrix)


def pool_document(te: TokenEmbeddings, tfidf: TfidfTable) -> np.ndarray:
    """TF-IDF weighted element-wise mean of the token vectors.

    Tokens without a weight of their own (subwords, unseen forms) get the
    document's mean token weight; if every weight is zero the result is
    the plain mean.
    """
    if te.doc_id not in tfidf.weights:
        raise ValidationError(f"document {te.doc_id!r} missing from the weight table")
    w = np.array([tfidf.weight(te.doc_id, t) for t in te.tokens], dtype=np.float64)
    total = w.sum()
    if total == 0.0:
        return te.vectors.mean(axis=0)
    return (w[:, None] * te.vectors).sum(axis=0) / total


def pool_all(embeddings: list[TokenEmbeddings], tfidf: TfidfTable) -> EmbeddingSet:
    """Pool every document, preserving the given (corpus) order."""
    if not embeddings:
        raise ValidationError("no token embeddings to pool")
    dims = {te.dim for te in embeddings}
    if len(dims) != 1:
        raise ValidationError(f"mixed token-vector dimensions: {sorted(dims)}")
    rows = np.stack([pool_document(te, tfidf) for te in embeddings])
    return EmbeddingSet(ids=tuple(te.doc_id for te in embeddings), matrix=rows)


def load_token_embeddings(path: str | Path) -> list[TokenEmbeddings]:
    """Read a token-embedding interchange file (JSON Lines).

    An optional first line {"meta": {"dim": D, "model": ...}} is checked
    against the data. Every record must have matching token and vector
    counts and one consistent dimension across the file.
    """
    out: list[TokenEmbeddings] = []
    seen: set[str] = set()
    meta_dim = None
    dim = None
    with open(path, encoding="utf-8") as handle:
        for index, line in enumerate(handle):
            line = line.strip()
            if not line:
                continue
            try:
                record = json.loads(line)
            except json.JSONDecodeError as exc:
                raise ValidationError(f"{path}: record {index}: invalid JSON: {exc.msg}")
            if index == 0 and isinstance(record, dict) and set(record) == {"meta"}:
                meta = record["meta"]
                if not isinstance(meta, dict):
                    raise ValidationError(f"{path}: meta line must hold an object")
                meta_dim = meta.get("dim")
                continue
            if not isinstance(record, dict):
                raise ValidationError(f"{path}: record {index}: expected an object")
            missing = {"id", "tokens", "vectors"} - set(record)
            if missing:
                raise ValidationError(
                    f"{path}: record {index}: missing keys: {', '.join(sorted(missing))}"
                )
            doc_id = record["id"]
            tokens = record["tokens"]
            vectors = record["vectors"]
            if doc_id in seen:
                raise ValidationError(f"{path}: record {index}: duplicate id {doc_id!r}")
            seen.add(doc_id)
            if len(tokens) != len(vectors):
                raise ValidationError(
                    f"{path}: record {index} ({doc_id!r}): {len(tokens)} tokens "
                    f"but {len(vectors)} vectors"
                )
            if not tokens:
                raise ValidationError(f"{path}: record {index} ({doc_id!r}): empty")
            try:
                matrix = np.asarray(vectors, dtype=np.float64)
            except ValueError:
                matrix = None
            if matrix is None or matrix.ndim != 2:
                raise ValidationError(
                    f"{path}: record {index} ({doc_id!r}): ragged vector lengths"
                )
            if dim is None:
                dim = matrix.shape[1]
            if matrix.shape[1] != dim:
                raise ValidationError(
                    f"{path}: record {index} ({doc_id!r}): dimension "
                    f"{matrix.shape[1]} != {dim}"
                )
            out.append(TokenEmbeddings(doc_id=doc_id, tokens=tuple(tokens), vectors=matrix))
    if not out:
        raise ValidationError(f"{path}: no document records found")
    if meta_dim is not None and meta_dim != dim:
        raise ValidationError(f"{path}: meta dim {meta_dim} != data dim {dim}")
    return out


def embedding_set_payload(es: EmbeddingSet) -> dict:
    """JSON-ready form; floats survive a round trip exactly."""
    return {"ids": list(es.ids), "dim": es.dim, "rows": es.matrix.tolist()}


def save_embedding_set(es: EmbeddingSet, path: str | Path) -> None:
    payload = embedding_set_payload(es)
    Path(path).write_text(
        json.dumps(payload, indent=2, sort_keys=True) + "\n", encoding="utf-8"
    )


def load_embedding_set(path: str | Path) -> EmbeddingSet:
    try:
        data = json.loads(Path(path).read_text(encoding="utf-8"))
    except json.JSONDecodeError as exc:
        raise ValidationError(f"{path}: invalid JSON: {exc.msg}")
    missing = {"ids", "dim", "rows"} - set(data)
    if missing:
        raise ValidationError(f"{path}: missing keys: {', '.join(sorted(missing))}")
    matrix = np.asarray(data["rows"], dtype=np.float64)
    if matrix.ndim != 2 or matrix.shape[1] != data["dim"]:
        raise ValidationError(f"{path}: rows do not match declared dim {data['dim']}")
    return EmbeddingSet(ids=tuple(data["ids"]), matrix=matrix)
