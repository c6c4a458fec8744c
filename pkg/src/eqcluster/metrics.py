"""Evaluation: purity, odd-one-out accuracy, random baselines, agreement.

Gold groups are kept as ordered tuples rather than sets so that every
iteration order here is a function of the corpus file alone, not of the
process hash seed.
"""

from __future__ import annotations

import json
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass
from pathlib import Path

import numpy as np

from .cluster import Partition, random_partition
from .corpus import Corpus
from .embeddings import EmbeddingSet
from .errors import ValidationError
from .validation import check_seed


@dataclass(frozen=True)
class GoldPartition:
    """Reference grouping: label -> member ids, in first-appearance order."""

    groups: dict[str, tuple[str, ...]]

    def __post_init__(self):
        seen: set[str] = set()
        for label, members in self.groups.items():
            if not members:
                raise ValidationError(f"gold group {label!r} is empty")
            for doc_id in members:
                if doc_id in seen:
                    raise ValidationError(f"doc {doc_id!r} appears in two gold groups")
                seen.add(doc_id)

    @classmethod
    def from_corpus(cls, corpus: Corpus) -> GoldPartition:
        if not corpus.is_labeled:
            raise ValidationError("corpus has no group labels")
        return cls(groups=dict(corpus.groups))

    @property
    def doc_ids(self) -> list[str]:
        return [doc_id for members in self.groups.values() for doc_id in members]

    def group_of(self, doc_id: str) -> str:
        for label, members in self.groups.items():
            if doc_id in members:
                return label
        raise ValidationError(f"doc {doc_id!r} is not in the gold partition")

    def shape(self) -> tuple[int, int]:
        sizes = {len(m) for m in self.groups.values()}
        if len(sizes) != 1:
            raise ValidationError("gold groups are not equally sized")
        return len(self.groups), sizes.pop()


@dataclass(frozen=True)
class Triplet:
    """Two ids from one gold group plus an intruder from another."""

    a: str
    b: str
    intruder: str

    def __post_init__(self):
        if len({self.a, self.b, self.intruder}) != 3:
            raise ValidationError(f"triplet ids must be distinct: {self}")

    def key(self) -> frozenset[str]:
        return frozenset((self.a, self.b, self.intruder))


def purity(pred: Partition, gold: GoldPartition, ids: list[str]) -> float:
    """(1/N) * sum over predicted clusters of the largest gold-group overlap.

    `ids[i]` names the document behind `pred.assignment[i]`.
    """
    n = len(pred.assignment)
    if len(ids) != n:
        raise ValidationError(f"{len(ids)} ids for {n} assignments")
    gold_docs = set(gold.doc_ids)
    if set(ids) != gold_docs or len(set(ids)) != n:
        raise ValidationError("prediction and gold must cover the same documents")
    gold_index = {}
    for g, (label, members) in enumerate(gold.groups.items()):
        for doc_id in members:
            gold_index[doc_id] = g
    contingency = np.zeros((pred.k, len(gold.groups)), dtype=np.int64)
    for i, doc_id in enumerate(ids):
        contingency[pred.assignment[i], gold_index[doc_id]] += 1
    majority_total = int(contingency.max(axis=1).sum())
    return majority_total / n


def sample_triplets(
    gold: GoldPartition,
    count: int,
    seed: int,
    by_pair: bool = False,
) -> list[Triplet]:
    """Draw distinct triplets: a same-group pair plus an outside intruder.

    Default draws the pair by picking a group uniformly (among groups with
    at least two members) and then two members; by_pair=True instead picks
    uniformly over all same-group pairs, shifting weight toward larger
    groups. Distinctness is at the unordered-id-set level. Deterministic
    given seed.
    """
    rng = np.random.default_rng(check_seed(seed))
    labels = list(gold.groups)
    pair_groups = [g for g in labels if len(gold.groups[g]) >= 2]
    if not pair_groups or len(labels) < 2:
        raise ValidationError(
            "sampling needs one group with >= 2 members and another non-empty group"
        )
    total_docs = len(gold.doc_ids)
    max_distinct = sum(
        len(m) * (len(m) - 1) // 2 * (total_docs - len(m))
        for m in gold.groups.values()
    )
    if count > max_distinct:
        raise ValidationError(
            f"cannot draw {count} distinct triplets; only {max_distinct} exist"
        )

    all_pairs: list[tuple[str, str, str]] = []
    if by_pair:
        for label in labels:
            members = gold.groups[label]
            for i in range(len(members)):
                for j in range(i + 1, len(members)):
                    all_pairs.append((label, members[i], members[j]))

    out: list[Triplet] = []
    seen: set[frozenset[str]] = set()
    while len(out) < count:
        if by_pair:
            label, a, b = all_pairs[int(rng.integers(len(all_pairs)))]
        else:
            label = pair_groups[int(rng.integers(len(pair_groups)))]
            members = gold.groups[label]
            i = int(rng.integers(len(members)))
            j = int(rng.integers(len(members) - 1))
            if j >= i:
                j += 1
            a, b = members[i], members[j]
        others = [g for g in labels if g != label]
        other = others[int(rng.integers(len(others)))]
        intruder = gold.groups[other][int(rng.integers(len(gold.groups[other])))]
        triplet = Triplet(a=a, b=b, intruder=intruder)
        if triplet.key() in seen:
            continue
        seen.add(triplet.key())
        out.append(triplet)
    return out


def odd_one_out(v_a: np.ndarray, v_b: np.ndarray, v_c: np.ndarray) -> int:
    """Index of the point with the largest summed distance to the other two.

    Ties return the lowest index.
    """
    a = np.asarray(v_a, dtype=np.float64)
    b = np.asarray(v_b, dtype=np.float64)
    c = np.asarray(v_c, dtype=np.float64)
    if not (a.shape == b.shape == c.shape) or a.ndim != 1:
        raise ValidationError(
            f"vectors must share one dimension, got {a.shape}, {b.shape}, {c.shape}"
        )
    d_ab = float(np.sqrt(((a - b) ** 2).sum()))
    d_ac = float(np.sqrt(((a - c) ** 2).sum()))
    d_bc = float(np.sqrt(((b - c) ** 2).sum()))
    sums = (d_ab + d_ac, d_ab + d_bc, d_ac + d_bc)
    if sums[0] >= sums[1] and sums[0] >= sums[2]:
        return 0
    if sums[1] >= sums[2]:
        return 1
    return 2


def ooo_accuracy(
    es: EmbeddingSet,
    triplets: list[Triplet],
    gold: GoldPartition | None = None,
) -> tuple[float, dict[str, float]]:
    """Fraction of triplets whose intruder has the largest summed distance.

    With a gold partition, also reports accuracy per group of the matched
    pair.
    """
    if not triplets:
        raise ValidationError("no triplets to evaluate")
    row = {doc_id: i for i, doc_id in enumerate(es.ids)}
    hits = 0
    group_hits: dict[str, list[int]] = {}
    for t in triplets:
        try:
            va = es.matrix[row[t.a]]
            vb = es.matrix[row[t.b]]
            vi = es.matrix[row[t.intruder]]
        except KeyError as exc:
            raise ValidationError(f"triplet id {exc.args[0]!r} missing from embeddings")
        hit = 1 if odd_one_out(va, vb, vi) == 2 else 0
        hits += hit
        if gold is not None:
            label = gold.group_of(t.a)
            bucket = group_hits.setdefault(label, [0, 0])
            bucket[0] += hit
            bucket[1] += 1
    per_group = {g: h / n for g, (h, n) in group_hits.items()}
    return hits / len(triplets), per_group


def random_purity_baseline(
    gold: GoldPartition,
    trials: int,
    seed: int,
    threads: int = 1,
) -> tuple[float, float]:
    """Mean and standard error of purity over random balanced partitions.

    Trial t uses sub-seed seed XOR t; scores are reduced in trial order,
    so the result is independent of the worker count.
    """
    if trials < 1:
        raise ValidationError(f"trials must be >= 1, got {trials}")
    check_seed(seed)
    k, s = gold.shape()
    ids = gold.doc_ids
    n = len(ids)
    gold_index = np.empty(n, dtype=np.int64)
    pos = 0
    for g, members in enumerate(gold.groups.values()):
        for _ in members:
            gold_index[pos] = g
            pos += 1

    labels_base = np.repeat(np.arange(k), s)

    def one_trial(t: int) -> float:
        rng = np.random.default_rng(seed ^ t)
        assignment = rng.permutation(labels_base)
        contingency = np.zeros((k, k), dtype=np.int64)
        np.add.at(contingency, (assignment, gold_index), 1)
        return int(contingency.max(axis=1).sum()) / n

    scores = np.empty(trials, dtype=np.float64)
    if threads > 1:
        with ThreadPoolExecutor(max_workers=threads) as pool:
            for t, score in enumerate(pool.map(one_trial, range(trials))):
                scores[t] = score
    else:
        for t in range(trials):
            scores[t] = one_trial(t)
    mean = float(scores.mean())
    stderr = float(scores.std(ddof=1) / np.sqrt(trials)) if trials > 1 else 0.0
    return mean, stderr


@dataclass(frozen=True)
class AnnotationMatrix:
    """Vote counts per item over a fixed category list, constant raters."""

    items: tuple[str, ...]
    categories: tuple[str, ...]
    counts: np.ndarray
    raters_per_item: int

    def __post_init__(self):
        if self.counts.shape != (len(self.items), len(self.categories)):
            raise ValidationError(
                f"count matrix shape {self.counts.shape} does not match "
                f"{len(self.items)} items x {len(self.categories)} categories"
            )
        sums = self.counts.sum(axis=1)
        bad = np.nonzero(sums != self.raters_per_item)[0]
        if bad.size:
            raise ValidationError(
                f"item {self.items[bad[0]]!r} has {int(sums[bad[0]])} votes, "
                f"expected {self.raters_per_item}"
            )


def load_annotations(path: str | Path) -> AnnotationMatrix:
    """Read an annotation file: [{"item": ..., "votes": {category: count}}]."""
    try:
        data = json.loads(Path(path).read_text(encoding="utf-8"))
    except json.JSONDecodeError as exc:
        raise ValidationError(f"{path}: invalid JSON: {exc.msg}")
    if not isinstance(data, list) or not data:
        raise ValidationError(f"{path}: expected a non-empty JSON array")
    items: list[str] = []
    votes: list[dict[str, int]] = []
    categories: set[str] = set()
    for index, record in enumerate(data):
        if not isinstance(record, dict) or set(record) != {"item", "votes"}:
            raise ValidationError(
                f"{path}: record {index}: expected keys 'item' and 'votes'"
            )
        items.append(record["item"])
        votes.append(record["votes"])
        categories.update(record["votes"])
    cat_list = tuple(sorted(categories))
    counts = np.zeros((len(items), len(cat_list)), dtype=np.int64)
    col = {c: j for j, c in enumerate(cat_list)}
    for i, vote in enumerate(votes):
        for category, count in vote.items():
            counts[i, col[category]] = int(count)
    totals = set(counts.sum(axis=1).tolist())
    if len(totals) != 1:
        raise ValidationError(f"{path}: vote totals differ across items: {sorted(totals)}")
    return AnnotationMatrix(
        items=tuple(items),
        categories=cat_list,
        counts=counts,
        raters_per_item=totals.pop(),
    )


def fleiss_kappa(m: AnnotationMatrix) -> float:
    """Chance-corrected agreement for a fixed rater count per item."""
    n = m.raters_per_item
    if n < 2:
        raise ValidationError(f"need >= 2 raters per item, got {n}")
    if len(m.categories) < 2:
        raise ValidationError("need >= 2 categories")
    counts = m.counts.astype(np.float64)
    p_j = counts.sum(axis=0) / counts.sum()
    p_i = ((counts**2).sum(axis=1) - n) / (n * (n - 1))
    p_bar = float(p_i.mean())
    p_e = float((p_j**2).sum())
    if p_e == 1.0:
        # Every vote in one category: agreement is perfect by construction.
        return 1.0
    return (p_bar - p_e) / (1.0 - p_e)


def majority_agreement_rate(m: AnnotationMatrix) -> float:
    """Fraction of items where some category drew at least two votes."""
    if m.raters_per_item < 2:
        raise ValidationError(f"need >= 2 raters per item, got {m.raters_per_item}")
    return float((m.counts.max(axis=1) >= 2).mean())


def save_triplets(triplets: list[Triplet], path: str | Path) -> None:
    payload = [{"a": t.a, "b": t.b, "intruder": t.intruder} for t in triplets]
    Path(path).write_text(
        json.dumps(payload, indent=2, sort_keys=True) + "\n", encoding="utf-8"
    )


def load_triplets(path: str | Path) -> list[Triplet]:
    """Read triplets from a bare JSON array or an object with a "triplets" key."""
    try:
        data = json.loads(Path(path).read_text(encoding="utf-8"))
    except json.JSONDecodeError as exc:
        raise ValidationError(f"{path}: invalid JSON: {exc.msg}")
    if isinstance(data, dict) and "triplets" in data:
        data = data["triplets"]
    if not isinstance(data, list):
        raise ValidationError(f"{path}: expected a JSON array")
    out = []
    for index, record in enumerate(data):
        if not isinstance(record, dict) or {"a", "b", "intruder"} - set(record):
            raise ValidationError(
                f"{path}: record {index}: expected keys 'a', 'b', 'intruder'"
            )
        out.append(Triplet(a=record["a"], b=record["b"], intruder=record["intruder"]))
    return out


def validate_triplets(triplets: list[Triplet], gold: GoldPartition) -> None:
    """Check every triplet against the gold grouping."""
    for t in triplets:
        ga, gb, gi = gold.group_of(t.a), gold.group_of(t.b), gold.group_of(t.intruder)
        if ga != gb:
            raise ValidationError(f"{t.a!r} and {t.b!r} are not in the same group")
        if gi == ga:
            raise ValidationError(f"intruder {t.intruder!r} shares the pair's group")
