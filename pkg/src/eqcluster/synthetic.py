"""Synthetic corpora with planted group structure.

The real evaluation text cannot be redistributed, so tests and demos run
on generated stand-ins. Two levels are provided: raw Gaussian blob
embeddings (for exercising the search directly) and a full text corpus
with a matching static-vector file (for exercising the whole pipeline).

Group token vectors sit near a per-group center; shared tokens sit near
the origin and appear everywhere, so TF-IDF assigns them ~zero weight.
A slice of each document is out-of-lexicon noise to exercise the drop
rule. Everything is a pure function of the seed.
"""

from __future__ import annotations

import json
from pathlib import Path

import numpy as np

from .embeddings import EmbeddingSet
from .errors import ValidationError
from .validation import check_balanced_counts, check_seed

GROUP_TOKENS = 40
SHARED_TOKENS = 30
GROUP_SHARE = 0.75
SHARED_SHARE = 0.15


def make_centers(k: int, dim: int, sep: float, rng: np.random.Generator) -> np.ndarray:
    """k orthogonal centers of norm sep; pairwise distance sep * sqrt(2)."""
    if dim < k:
        raise ValidationError(f"need dim >= k for orthogonal centers, got {dim} < {k}")
    q, _ = np.linalg.qr(rng.normal(size=(dim, k)))
    return q.T * sep


def make_blob_set(
    k: int,
    s: int,
    dim: int,
    sep: float,
    seed: int,
    spread: float = 1.0,
) -> tuple[EmbeddingSet, dict[str, tuple[str, ...]]]:
    """Gaussian blobs around orthogonal centers, one blob per group.

    Returns the embedding set (ids d000, d001, ... in group-major order)
    and the planted gold groups.
    """
    check_balanced_counts(k * s, k, s)
    rng = np.random.default_rng(check_seed(seed))
    centers = make_centers(k, dim, sep, rng)
    rows = np.empty((k * s, dim))
    ids = []
    groups: dict[str, tuple[str, ...]] = {}
    pos = 0
    for g in range(k):
        members = []
        for _ in range(s):
            rows[pos] = centers[g] + rng.normal(scale=spread, size=dim)
            doc_id = f"d{pos:03d}"
            ids.append(doc_id)
            members.append(doc_id)
            pos += 1
        groups[f"g{g:02d}"] = tuple(members)
    return EmbeddingSet(ids=tuple(ids), matrix=rows), groups


def _token_name(group: int, index: int) -> str:
    return f"g{group:02d}w{index:02d}"


def make_text_corpus(
    k: int,
    s: int,
    seed: int,
    sep: float = 10.0,
    dim: int = 50,
    doc_len: int = 120,
) -> tuple[list[dict], list[str]]:
    """Generate corpus records and static-vector lines with planted groups.

    Each document mixes ~75% group-specific tokens, ~15% shared tokens,
    and ~10% out-of-lexicon tokens. Returns (corpus records, vector file
    lines).
    """
    check_balanced_counts(k * s, k, s)
    if doc_len < 10:
        raise ValidationError(f"doc_len must be >= 10, got {doc_len}")
    rng = np.random.default_rng(check_seed(seed))
    centers = make_centers(k, dim, sep, rng)

    lines: list[str] = []
    vocab: dict[int, list[str]] = {}
    for g in range(k):
        names = [_token_name(g, t) for t in range(GROUP_TOKENS)]
        vocab[g] = names
        for name in names:
            vec = centers[g] + rng.normal(size=dim)
            lines.append(name + " " + " ".join(f"{v:.6f}" for v in vec))
    shared_names = [f"common{t:02d}" for t in range(SHARED_TOKENS)]
    for name in shared_names:
        vec = rng.normal(size=dim)
        lines.append(name + " " + " ".join(f"{v:.6f}" for v in vec))

    n_group = round(GROUP_SHARE * doc_len)
    n_shared = round(SHARED_SHARE * doc_len)
    n_noise = doc_len - n_group - n_shared

    records: list[dict] = []
    pos = 0
    for g in range(k):
        for _ in range(s):
            tokens = [vocab[g][int(i)] for i in rng.integers(GROUP_TOKENS, size=n_group)]
            tokens += [shared_names[int(i)] for i in rng.integers(SHARED_TOKENS, size=n_shared)]
            tokens += [f"junk{int(i):03d}" for i in rng.integers(1000, size=n_noise)]
            order = rng.permutation(len(tokens))
            text = " ".join(tokens[int(i)] for i in order)
            records.append(
                {
                    "id": f"d{pos:03d}",
                    "title": f"Entry {pos:03d}",
                    "group": f"g{g:02d}",
                    "text": text,
                }
            )
            pos += 1
    return records, lines


def write_synthetic_corpus(
    corpus_path: str | Path,
    vectors_path: str | Path,
    k: int,
    s: int,
    seed: int,
    sep: float = 10.0,
    dim: int = 50,
    doc_len: int = 120,
) -> None:
    """Write a synthetic corpus JSON file and its static-vector file."""
    records, lines = make_text_corpus(k, s, seed, sep=sep, dim=dim, doc_len=doc_len)
    Path(corpus_path).write_text(
        json.dumps(records, indent=2, sort_keys=True) + "\n", encoding="utf-8"
    )
    Path(vectors_path).write_text("\n".join(lines) + "\n", encoding="utf-8")
