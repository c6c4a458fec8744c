"""Balanced clustering by random-exchange local search.

N documents go into K clusters of exactly S members. The objective is
cluster strength: (inter - intra) / inter over mean pairwise Euclidean
distances. Exhaustive enumeration is hopeless at full scale (the 55-item
space has ~1.7e50 ordered assignments), so the search proposes random
swaps between two clusters and keeps only strict improvements; small
instances get a true brute-force oracle for cross-checking.

Float discipline: strength sums run over the condensed upper-triangle
pair order, selected by boolean mask. Two partitions that agree up to
cluster relabeling select identical masks and therefore produce
bit-identical strengths, which is what lets the oracle-equality tests
demand exact equality rather than a tolerance.
"""

from __future__ import annotations

import json
import math
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass
from pathlib import Path

import numpy as np
from scipy.spatial.distance import pdist, squareform
from sklearn.base import BaseEstimator, ClusterMixin

from .embeddings import EmbeddingSet
from .errors import GuardRefusal, ValidationError
from .validation import check_balanced_counts, check_matrix, check_seed

# Hard ceiling on ordered assignments the brute-force oracle will enumerate.
ENUMERATION_BOUND = 10**7


@dataclass(frozen=True)
class Partition:
    """Cluster indices per item, exactly s occurrences of each of k labels."""

    assignment: tuple[int, ...]
    k: int
    s: int

    def __post_init__(self):
        check_balanced_counts(len(self.assignment), self.k, self.s)
        counts = [0] * self.k
        for label in self.assignment:
            if not 0 <= label < self.k:
                raise ValidationError(f"cluster index {label} outside 0..{self.k - 1}")
            counts[label] += 1
        if any(c != self.s for c in counts):
            raise ValidationError(f"cluster sizes {counts} != {self.s} each")

    def members(self) -> list[list[int]]:
        out: list[list[int]] = [[] for _ in range(self.k)]
        for item, label in enumerate(self.assignment):
            out[label].append(item)
        return out


@dataclass(frozen=True)
class StrengthReport:
    """Mean within-cluster and across-cluster pairwise distances.

    strength = (inter - intra) / inter, or 0 when inter is 0. Empty pair
    sets (single-member clusters have no within pairs) contribute mean 0.
    """

    intra: float
    inter: float
    strength: float


@dataclass(frozen=True)
class SearchConfig:
    seed: int = 0
    restarts: int = 20
    patience: int = 2000
    max_proposals: int = 200_000

    def __post_init__(self):
        check_seed(self.seed)
        if self.restarts < 1:
            raise ValidationError(f"restarts must be >= 1, got {self.restarts}")
        if self.patience < 1:
            raise ValidationError(f"patience must be >= 1, got {self.patience}")
        if self.max_proposals < self.patience:
            raise ValidationError(
                f"max_proposals ({self.max_proposals}) must be >= patience "
                f"({self.patience})"
            )


@dataclass(frozen=True)
class SearchTrace:
    """Accepted objective values, in order, for one restart."""

    accepted_strengths: tuple[float, ...]
    proposals_evaluated: int
    restart_index: int


def _pair_index(n: int) -> tuple[np.ndarray, np.ndarray]:
    return np.triu_indices(n, 1)


def _strength_from_mask(vals: np.ndarray, intra_mask: np.ndarray) -> StrengthReport:
    intra_vals = vals[intra_mask]
    inter_vals = vals[~intra_mask]
    intra = float(intra_vals.mean()) if intra_vals.size else 0.0
    inter = float(inter_vals.mean()) if inter_vals.size else 0.0
    strength = (inter - intra) / inter if inter != 0.0 else 0.0
    return StrengthReport(intra=intra, inter=inter, strength=strength)


def cluster_strength(es: EmbeddingSet, p: Partition) -> StrengthReport:
    """Score a partition of the embedding set's rows."""
    n = len(es.ids)
    if n < 2 or p.k < 2:
        raise ValidationError(f"strength needs N >= 2 and K >= 2, got N={n}, K={p.k}")
    if len(p.assignment) != n:
        raise ValidationError(
            f"partition covers {len(p.assignment)} items, set has {n} rows"
        )
    vals = pdist(check_matrix(es.matrix, "embedding matrix"))
    i_idx, j_idx = _pair_index(n)
    labels = np.asarray(p.assignment)
    return _strength_from_mask(vals, labels[i_idx] == labels[j_idx])


def random_partition(n: int, k: int, s: int, seed: int) -> Partition:
    """Uniform random balanced assignment: a shuffle of the fixed label multiset."""
    check_balanced_counts(n, k, s)
    rng = np.random.default_rng(check_seed(seed))
    shuffled = rng.permutation(np.repeat(np.arange(k), s))
    return Partition(assignment=tuple(int(x) for x in shuffled), k=k, s=s)


def count_partitions(n: int, k: int, s: int, ordered: bool = True) -> int:
    """Exact number of balanced assignments: n!/(s!)^k, or divided by k!.

    Ordered (the default) distinguishes cluster labels; unordered treats
    clusters as interchangeable sets.
    """
    check_balanced_counts(n, k, s)
    total = 1
    for i in range(k):
        total *= math.comb(n - i * s, s)
    if ordered:
        return total
    return total // math.factorial(k)


def iter_balanced_assignments(n: int, k: int, s: int):
    """Yield every canonical balanced assignment in lexicographic order.

    Canonical means cluster labels appear in order of first appearance
    (item 0 is always in cluster 0), so each unordered partition shows up
    exactly once instead of k! times.
    """
    check_balanced_counts(n, k, s)
    assignment = [0] * n
    fill = [0] * k

    def rec(i: int, used: int):
        if i == n:
            yield tuple(assignment)
            return
        for c in range(min(used + 1, k)):
            if fill[c] < s:
                assignment[i] = c
                fill[c] += 1
                yield from rec(i + 1, used + (1 if c == used else 0))
                fill[c] -= 1

    yield from rec(0, 0)


def brute_force_partition(es: EmbeddingSet, k: int, s: int) -> tuple[Partition, StrengthReport]:
    """Exhaustive maximum-strength partition for small instances.

    Refuses instances whose ordered assignment count exceeds
    ENUMERATION_BOUND. Ties go to the lexicographically smallest canonical
    assignment.
    """
    n = len(es.ids)
    check_balanced_counts(n, k, s)
    if n < 2 or k < 2:
        raise ValidationError(f"strength needs N >= 2 and K >= 2, got N={n}, K={k}")
    space = count_partitions(n, k, s)
    if space > ENUMERATION_BOUND:
        raise GuardRefusal(
            f"{space} ordered assignments for (n={n}, k={k}, s={s}) exceed "
            f"the enumeration bound of {ENUMERATION_BOUND}"
        )
    vals = pdist(check_matrix(es.matrix, "embedding matrix"))
    i_idx, j_idx = _pair_index(n)
    best_assignment = None
    best_report = None
    for assignment in iter_balanced_assignments(n, k, s):
        labels = np.array(assignment)
        report = _strength_from_mask(vals, labels[i_idx] == labels[j_idx])
        if best_report is None or report.strength > best_report.strength:
            best_assignment = assignment
            best_report = report
    return Partition(assignment=best_assignment, k=k, s=s), best_report


def _run_restart(
    dist_rows: list[list[float]],
    vals: np.ndarray,
    i_idx: np.ndarray,
    j_idx: np.ndarray,
    k: int,
    s: int,
    sub_seed: int,
    patience: int,
    max_proposals: int,
    restart_index: int,
) -> tuple[Partition, StrengthReport, SearchTrace]:
    n = k * s
    n_pairs = n * (n - 1) // 2
    n_intra = k * (s * (s - 1) // 2)
    n_inter = n_pairs - n_intra
    total = float(vals.sum())

    def strength_of(intra_sum: float) -> float:
        intra = intra_sum / n_intra if n_intra else 0.0
        inter = (total - intra_sum) / n_inter if n_inter else 0.0
        return (inter - intra) / inter if inter != 0.0 else 0.0

    rng = np.random.default_rng(sub_seed)
    assignment = [int(x) for x in rng.permutation(np.repeat(np.arange(k), s))]
    members: list[list[int]] = [[] for _ in range(k)]
    for item, label in enumerate(assignment):
        members[label].append(item)

    intra_sum = 0.0
    for group in members:
        for a in range(s):
            row = dist_rows[group[a]]
            for b in range(a + 1, s):
                intra_sum += row[group[b]]

    current = strength_of(intra_sum)
    accepted: list[float] = []
    proposals = 0
    rejections = 0
    while proposals < max_proposals and rejections < patience:
        proposals += 1
        c1 = int(rng.integers(k))
        c2 = int(rng.integers(k - 1))
        if c2 >= c1:
            c2 += 1
        m1 = int(rng.integers(s))
        m2 = int(rng.integers(s))
        item_a = members[c1][m1]
        item_b = members[c2][m2]
        row_a = dist_rows[item_a]
        row_b = dist_rows[item_b]
        delta = 0.0
        for x in members[c1]:
            if x != item_a:
                delta += row_b[x] - row_a[x]
        for y in members[c2]:
            if y != item_b:
                delta += row_a[y] - row_b[y]
        candidate = strength_of(intra_sum + delta)
        if candidate > current:
            intra_sum += delta
            current = candidate
            members[c1][m1] = item_b
            members[c2][m2] = item_a
            assignment[item_a] = c2
            assignment[item_b] = c1
            accepted.append(candidate)
            rejections = 0
        else:
            rejections += 1

    partition = Partition(assignment=tuple(assignment), k=k, s=s)
    labels = np.array(assignment)
    report = _strength_from_mask(vals, labels[i_idx] == labels[j_idx])
    trace = SearchTrace(
        accepted_strengths=tuple(accepted),
        proposals_evaluated=proposals,
        restart_index=restart_index,
    )
    return partition, report, trace


def swap_search(
    es: EmbeddingSet,
    k: int,
    s: int,
    cfg: SearchConfig,
    threads: int = 1,
) -> tuple[Partition, StrengthReport, SearchTrace]:
    """Best-of-restarts local search over balanced partitions.

    Each restart shuffles a fresh random partition (sub-seed = seed XOR
    restart index) and repeatedly swaps one member between two random
    clusters, keeping strict strength improvements, until `patience`
    consecutive rejections or `max_proposals` evaluations. The returned
    strength is recomputed from scratch on the winning partition, so it is
    exactly comparable with brute_force_partition. Ties across restarts go
    to the lowest restart index; results do not depend on `threads`.
    """
    matrix = check_matrix(es.matrix, "embedding matrix")
    n = matrix.shape[0]
    check_balanced_counts(n, k, s)
    if n < 4 or k < 2:
        raise ValidationError(f"search needs N >= 4 and K >= 2, got N={n}, K={k}")
    vals = pdist(matrix)
    i_idx, j_idx = _pair_index(n)
    dist_rows = squareform(vals).tolist()

    def run(r: int) -> tuple[Partition, StrengthReport, SearchTrace]:
        # XOR splitting keeps sub-seeds distinct across restarts for any seed.
        return _run_restart(
            dist_rows, vals, i_idx, j_idx, k, s,
            cfg.seed ^ r, cfg.patience, cfg.max_proposals, r,
        )

    if threads > 1:
        with ThreadPoolExecutor(max_workers=threads) as pool:
            results = list(pool.map(run, range(cfg.restarts)))
    else:
        results = [run(r) for r in range(cfg.restarts)]

    best = 0
    for r in range(1, cfg.restarts):
        if results[r][1].strength > results[best][1].strength:
            best = r
    return results[best]


def nearest_neighbors(es: EmbeddingSet, doc_id: str, m: int) -> list[tuple[str, float]]:
    """The m closest other documents by Euclidean distance, ascending.

    Distance ties keep corpus order. Unknown ids raise an error that names
    the closest-matching known ids.
    """
    ids = list(es.ids)
    if doc_id not in ids:
        import difflib

        near = difflib.get_close_matches(doc_id, ids, n=3, cutoff=0.0)
        raise ValidationError(
            f"unknown document id {doc_id!r}; closest known ids: {', '.join(near)}"
        )
    n = len(ids)
    if not 1 <= m < n:
        raise ValidationError(f"neighbor count must be in 1..{n - 1}, got {m}")
    q = ids.index(doc_id)
    dists = np.sqrt(((es.matrix - es.matrix[q]) ** 2).sum(axis=1))
    order = sorted((float(dists[i]), i) for i in range(n) if i != q)
    return [(ids[i], d) for d, i in order[:m]]


def partition_payload(
    ids: list[str] | tuple[str, ...],
    p: Partition,
    report: StrengthReport,
    trace: SearchTrace,
) -> dict:
    return {
        "k": p.k,
        "s": p.s,
        "ids": list(ids),
        "assignment": list(p.assignment),
        "strength": report.strength,
        "trace": {
            "accepted_strengths": list(trace.accepted_strengths),
            "proposals_evaluated": trace.proposals_evaluated,
            "restart_index": trace.restart_index,
        },
    }


def save_partition(
    path: str | Path,
    ids: list[str] | tuple[str, ...],
    p: Partition,
    report: StrengthReport,
    trace: SearchTrace,
) -> None:
    payload = partition_payload(ids, p, report, trace)
    Path(path).write_text(
        json.dumps(payload, indent=2, sort_keys=True) + "\n", encoding="utf-8"
    )


def load_partition(path: str | Path) -> tuple[list[str], Partition, float, dict]:
    """Read a partition file; extra keys (run metadata) are ignored."""
    try:
        data = json.loads(Path(path).read_text(encoding="utf-8"))
    except json.JSONDecodeError as exc:
        raise ValidationError(f"{path}: invalid JSON: {exc.msg}")
    missing = {"k", "s", "ids", "assignment", "strength"} - set(data)
    if missing:
        raise ValidationError(f"{path}: missing keys: {', '.join(sorted(missing))}")
    ids = data["ids"]
    if len(ids) != len(data["assignment"]):
        raise ValidationError(
            f"{path}: {len(ids)} ids but {len(data['assignment'])} assignments"
        )
    if len(set(ids)) != len(ids):
        raise ValidationError(f"{path}: duplicate ids")
    partition = Partition(
        assignment=tuple(int(x) for x in data["assignment"]),
        k=int(data["k"]),
        s=int(data["s"]),
    )
    return list(ids), partition, float(data["strength"]), data.get("trace", {})


class BalancedSwapClustering(BaseEstimator, ClusterMixin):
    """Equal-size clustering estimator around swap_search.

    Parameters mirror SearchConfig; cluster_size=None infers S from the
    data (N must then be divisible by n_clusters). After fit: labels_,
    strength_, report_, trace_.
    """

    def __init__(
        self,
        n_clusters: int = 11,
        cluster_size: int | None = None,
        seed: int = 0,
        restarts: int = 20,
        patience: int = 2000,
        max_proposals: int = 200_000,
        threads: int = 1,
    ):
        self.n_clusters = n_clusters
        self.cluster_size = cluster_size
        self.seed = seed
        self.restarts = restarts
        self.patience = patience
        self.max_proposals = max_proposals
        self.threads = threads

    def fit(self, X, y=None):
        matrix = check_matrix(X, "X")
        n = matrix.shape[0]
        if self.cluster_size is None:
            if self.n_clusters < 1 or n % self.n_clusters:
                raise ValidationError(
                    f"{n} rows do not divide into {self.n_clusters} equal clusters"
                )
            size = n // self.n_clusters
        else:
            size = self.cluster_size
        es = EmbeddingSet(ids=tuple(str(i) for i in range(n)), matrix=matrix)
        cfg = SearchConfig(
            seed=self.seed,
            restarts=self.restarts,
            patience=self.patience,
            max_proposals=self.max_proposals,
        )
        partition, report, trace = swap_search(es, self.n_clusters, size, cfg, self.threads)
        self.labels_ = np.array(partition.assignment)
        self.strength_ = report.strength
        self.report_ = report
        self.trace_ = trace
        self.n_features_in_ = matrix.shape[1]
        return self
