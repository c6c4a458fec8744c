"""Equal-size document clustering and its evaluation toolkit.

Pipeline: load a corpus, embed each document as a TF-IDF weighted mean of
token vectors, reduce with PCA, search for the balanced partition with the
highest cluster strength, and score the result against gold groups
(purity, intruder-detection accuracy, random baselines).
"""

from .cluster import (
    BalancedSwapClustering,
    Partition,
    SearchConfig,
    SearchTrace,
    StrengthReport,
    brute_force_partition,
    cluster_strength,
    count_partitions,
    iter_balanced_assignments,
    load_partition,
    nearest_neighbors,
    random_partition,
    save_partition,
    swap_search,
)
from .corpus import Corpus, Document, balanced_shape, load_corpus
from .embeddings import (
    EmbeddingSet,
    StaticLexicon,
    TokenEmbeddings,
    embed_static,
    load_embedding_set,
    load_static_vectors,
    load_token_embeddings,
    pool_all,
    pool_document,
    save_embedding_set,
)
from .errors import CoverageError, EqclusterError, GuardRefusal, ValidationError
from .metrics import (
    AnnotationMatrix,
    GoldPartition,
    Triplet,
    fleiss_kappa,
    load_annotations,
    load_triplets,
    majority_agreement_rate,
    odd_one_out,
    ooo_accuracy,
    purity,
    random_purity_baseline,
    sample_triplets,
    save_triplets,
)
from .pca import DeterministicPCA, PcaModel, fit_pca, transform_pca
from .textprep import TfidfTable, TokenizedDoc, compute_tfidf, tokenize, tokenize_corpus

__version__ = "0.1.0"

__all__ = [
    "AnnotationMatrix",
    "BalancedSwapClustering",
    "Corpus",
    "CoverageError",
    "DeterministicPCA",
    "Document",
    "EmbeddingSet",
    "EqclusterError",
    "GoldPartition",
    "GuardRefusal",
    "Partition",
    "PcaModel",
    "SearchConfig",
    "SearchTrace",
    "StaticLexicon",
    "StrengthReport",
    "TfidfTable",
    "TokenEmbeddings",
    "TokenizedDoc",
    "Triplet",
    "ValidationError",
    "balanced_shape",
    "brute_force_partition",
    "cluster_strength",
    "compute_tfidf",
    "count_partitions",
    "embed_static",
    "fit_pca",
    "fleiss_kappa",
    "iter_balanced_assignments",
    "load_annotations",
    "load_corpus",
    "load_embedding_set",
    "load_partition",
    "load_static_vectors",
    "load_token_embeddings",
    "load_triplets",
    "majority_agreement_rate",
    "nearest_neighbors",
    "odd_one_out",
    "ooo_accuracy",
    "pool_all",
    "pool_document",
    "purity",
    "random_partition",
    "random_purity_baseline",
    "sample_triplets",
    "save_embedding_set",
    "save_partition",
    "save_triplets",
    "swap_search",
    "tokenize",
    "tokenize_corpus",
    "transform_pca",
]
