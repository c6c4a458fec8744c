from __future__ import annotations

from pathlib import Path

import numpy as np
import pytest

from eqcluster import EmbeddingSet, GoldPartition, load_corpus
from helpers import DATA_DIR


@pytest.fixture(scope="session")
def sample_corpus_path() -> Path:
    return DATA_DIR / "sample_corpus.json"


@pytest.fixture(scope="session")
def toy_vectors_path() -> Path:
    return DATA_DIR / "toy_vectors.txt"


@pytest.fixture(scope="session")
def annotations_path() -> Path:
    return DATA_DIR / "sample_annotations.json"


@pytest.fixture(scope="session")
def sample_corpus(sample_corpus_path):
    return load_corpus(sample_corpus_path)


@pytest.fixture(scope="session")
def sample_gold(sample_corpus) -> GoldPartition:
    return GoldPartition.from_corpus(sample_corpus)


@pytest.fixture()
def small_set() -> EmbeddingSet:
    rng = np.random.default_rng(1234)
    matrix = rng.normal(size=(8, 3))
    return EmbeddingSet(ids=tuple(f"x{i}" for i in range(8)), matrix=matrix)
