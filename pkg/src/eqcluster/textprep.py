"""Tokenization and TF-IDF weighting.

Tokenization is deliberately plain: lowercase, split on whitespace, strip
punctuation off token edges. Internal punctuation (hyphens, apostrophes)
survives, so "self-portrait" stays one token. The rule is idempotent:
tokenizing a token changes nothing.
"""

from __future__ import annotations

import math
import string
import unicodedata
from dataclasses import dataclass

from .corpus import Corpus
from .errors import ValidationError

_ASCII_PUNCT = set(string.punctuation)


def _is_punct(ch: str) -> bool:
    return ch in _ASCII_PUNCT or unicodedata.category(ch).startswith("P")


def tokenize(text: str) -> list[str]:
    """Lowercase, split on whitespace, strip edge punctuation, drop empties."""
    tokens = []
    for piece in text.lower().split():
        start, end = 0, len(piece)
        while start < end and _is_punct(piece[start]):
            start += 1
        while end > start and _is_punct(piece[end - 1]):
            end -= 1
        if end > start:
            tokens.append(piece[start:end])
    return tokens


@dataclass(frozen=True)
class TokenizedDoc:
    id: str
    tokens: tuple[str, ...]


@dataclass(frozen=True)
class TfidfTable:
    """Corpus-level token weights.

    `weights` maps doc id → token → tf·idf. `mean_weight` is the fallback
    for tokens produced by other tokenizers (subwords, casing variants)
    that have no weight of their own.
    """

    doc_count: int
    doc_freq: dict[str, int]
    weights: dict[str, dict[str, float]]

    def weight(self, doc_id: str, token: str) -> float:
        """Weight of a token occurrence, tolerant of out-of-table tokens."""
        doc_weights = self.weights[doc_id]
        key = token.lower()
        if key in doc_weights:
            return doc_weights[key]
        return self.mean_weight(doc_id)

    def mean_weight(self, doc_id: str) -> float:
        doc_weights = self.weights[doc_id]
        if not doc_weights:
            return 0.0
        return sum(doc_weights.values()) / len(doc_weights)


def tokenize_document(doc_id: str, text: str) -> TokenizedDoc:
    """Tokenize one document, refusing texts that tokenize to nothing."""
    tokens = tokenize(text)
    if not tokens:
        raise ValidationError(f"document {doc_id!r} has no tokens after tokenization")
    return TokenizedDoc(id=doc_id, tokens=tuple(tokens))


def tokenize_corpus(corpus: Corpus) -> list[TokenizedDoc]:
    return [tokenize_document(doc.id, doc.text) for doc in corpus.documents]


def compute_tfidf(docs: list[TokenizedDoc]) -> TfidfTable:
    """Per-document token weights: raw count times ln(N / document frequency).

    A token appearing in every document gets weight 0 (ln 1), which is
    intentional: ubiquitous tokens carry no group signal.
    """
    if not docs:
        raise ValidationError("cannot compute weights for an empty document list")
    n = len(docs)
    df: dict[str, int] = {}
    for doc in docs:
        for token in sorted(set(doc.tokens)):
            df[token] = df.get(token, 0) + 1
    weights: dict[str, dict[str, float]] = {}
    for doc in docs:
        counts: dict[str, int] = {}
        for token in doc.tokens:
            counts[token] = counts.get(token, 0) + 1
        weights[doc.id] = {
            token: count * math.log(n / df[token]) for token, count in counts.items()
        }
    return TfidfTable(doc_count=n, doc_freq=df, weights=weights)
