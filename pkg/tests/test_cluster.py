from __future__ import annotations

import json

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from eqcluster import (
    BalancedSwapClustering,
    EmbeddingSet,
    GuardRefusal,
    Partition,
    SearchConfig,
    ValidationError,
    brute_force_partition,
    cluster_strength,
    count_partitions,
    iter_balanced_assignments,
    nearest_neighbors,
    random_partition,
    swap_search,
)
from eqcluster.cluster import load_partition, save_partition

from oracles import (
    enumerate_count_ordered,
    naive_best_partition,
    naive_count_ordered,
    naive_count_unordered,
    naive_neighbors,
    naive_strength,
)


def points_1d(values, k, s):
    matrix = np.array([[v] for v in values], dtype=np.float64)
    return EmbeddingSet(ids=tuple(f"p{i}" for i in range(len(values))), matrix=matrix)


def random_set(n, d, seed):
    rng = np.random.default_rng(seed)
    return EmbeddingSet(
        ids=tuple(f"r{i}" for i in range(n)), matrix=rng.normal(size=(n, d))
    )


BLOBS_1D = points_1d([0.0, 0.1, 10.0, 10.1], 2, 2)
BLOB_PARTITION = Partition(assignment=(0, 0, 1, 1), k=2, s=2)


class TestPartition:
    def test_balanced_ok(self):
        p = Partition(assignment=(0, 1, 0, 1), k=2, s=2)
        assert p.members() == [[0, 2], [1, 3]]

    def test_unbalanced_rejected(self):
        with pytest.raises(ValidationError, match="sizes"):
            Partition(assignment=(0, 0, 0, 1), k=2, s=2)

    def test_out_of_range_label(self):
        with pytest.raises(ValidationError, match="outside"):
            Partition(assignment=(0, 2, 0, 2), k=2, s=2)

    def test_size_product_mismatch(self):
        with pytest.raises(ValidationError):
            Partition(assignment=(0, 1, 0), k=2, s=2)


class TestClusterStrength:
    def test_identical_points_zero(self):
        es = points_1d([3.0, 3.0, 3.0, 3.0], 2, 2)
        report = cluster_strength(es, BLOB_PARTITION)
        assert report.strength == 0.0
        assert report.intra == 0.0
        assert report.inter == 0.0

    def test_hand_arithmetic_blobs(self):
        report = cluster_strength(BLOBS_1D, BLOB_PARTITION)
        assert report.intra == pytest.approx(0.1, abs=1e-12)
        assert report.inter == pytest.approx(10.0, abs=1e-12)
        assert report.strength == pytest.approx(0.99, abs=1e-12)

    def test_matches_pair_loop_oracle(self):
        for seed in range(50):
            es = random_set(8, 3, seed)
            p = random_partition(8, 2, 4, seed)
            report = cluster_strength(es, p)
            intra, inter, strength = naive_strength(es.matrix, p.assignment)
            assert report.intra == pytest.approx(intra, abs=1e-12)
            assert report.inter == pytest.approx(inter, abs=1e-12)
            assert report.strength == pytest.approx(strength, abs=1e-12)

    def test_strength_at_most_one(self):
        for seed in range(20):
            es = random_set(12, 4, seed)
            p = random_partition(12, 3, 4, seed + 100)
            assert cluster_strength(es, p).strength <= 1.0

    def test_single_member_clusters_intra_zero(self):
        es = points_1d([0.0, 1.0, 2.0, 3.0], 4, 1)
        p = Partition(assignment=(0, 1, 2, 3), k=4, s=1)
        report = cluster_strength(es, p)
        assert report.intra == 0.0
        assert report.strength == 1.0

    def test_too_small_rejected(self):
        es = points_1d([0.0], 1, 1)
        with pytest.raises(ValidationError, match="N >= 2"):
            cluster_strength(es, Partition(assignment=(0,), k=1, s=1))

    def test_coverage_mismatch(self):
        with pytest.raises(ValidationError, match="covers"):
            cluster_strength(BLOBS_1D, Partition(assignment=(0, 0, 1, 1, 0, 1), k=2, s=3))


class TestRandomPartition:
    @settings(max_examples=60)
    @given(
        st.integers(min_value=1, max_value=4),
        st.integers(min_value=1, max_value=4),
        st.integers(min_value=0, max_value=10_000),
    )
    def test_always_balanced(self, k, s, seed):
        p = random_partition(k * s, k, s, seed)
        counts = [0] * k
        for label in p.assignment:
            counts[label] += 1
        assert counts == [s] * k

    def test_deterministic(self):
        assert random_partition(12, 3, 4, 99) == random_partition(12, 3, 4, 99)

    def test_shape_mismatch_rejected(self):
        with pytest.raises(ValidationError):
            random_partition(5, 2, 2, 0)

    def test_uniform_over_ordered_assignments(self):
        # All 6 ordered (2,2)-assignments of 4 items should be equally likely.
        counts: dict[tuple[int, ...], int] = {}
        trials = 60_000
        for t in range(trials):
            p = random_partition(4, 2, 2, t)
            counts[p.assignment] = counts.get(p.assignment, 0) + 1
        assert len(counts) == 6
        for n in counts.values():
            assert abs(n / trials - 1 / 6) < 0.01


class TestCountPartitions:
    def test_small_values(self):
        assert count_partitions(4, 2, 2) == 6
        assert count_partitions(4, 2, 2, ordered=False) == 3
        assert count_partitions(6, 2, 3) == 20
        assert count_partitions(6, 2, 3, ordered=False) == 10

    def test_matches_factorial_oracle(self):
        for n, k, s in [(6, 3, 2), (8, 4, 2), (10, 2, 5), (12, 3, 4), (55, 11, 5)]:
            assert count_partitions(n, k, s) == naive_count_ordered(n, k, s)
            assert count_partitions(n, k, s, ordered=False) == naive_count_unordered(n, k, s)

    def test_matches_enumeration_small(self):
        for n in range(2, 9):
            for k in range(1, n + 1):
                if n % k:
                    continue
                s = n // k
                assert count_partitions(n, k, s) == enumerate_count_ordered(n, k, s)

    def test_shape_mismatch(self):
        with pytest.raises(ValidationError):
            count_partitions(5, 2, 2)


class TestIterBalancedAssignments:
    def test_canonical_count(self):
        assert len(list(iter_balanced_assignments(4, 2, 2))) == 3
        assert len(list(iter_balanced_assignments(6, 2, 3))) == 10

    def test_matches_unordered_count(self):
        for n, k, s in [(6, 3, 2), (8, 2, 4), (8, 4, 2), (9, 3, 3)]:
            got = list(iter_balanced_assignments(n, k, s))
            assert len(got) == count_partitions(n, k, s, ordered=False)
            assert len(set(got)) == len(got)

    def test_lexicographic_order_and_validity(self):
        got = list(iter_balanced_assignments(6, 3, 2))
        assert got == sorted(got)
        for assignment in got:
            Partition(assignment=assignment, k=3, s=2)  # validates balance
            # canonical: labels appear in first-appearance order
            seen = []
            for label in assignment:
                if label not in seen:
                    seen.append(label)
            assert seen == sorted(seen)


class TestBruteForce:
    def test_separated_blobs(self):
        partition, report = brute_force_partition(BLOBS_1D, 2, 2)
        assert partition.assignment == (0, 0, 1, 1)
        assert report.strength == pytest.approx(0.99, abs=1e-12)

    def test_matches_full_ordered_enumeration(self):
        for seed in range(10):
            es = random_set(6, 2, seed)
            partition, report = brute_force_partition(es, 3, 2)
            best_strength, _ = naive_best_partition(es.matrix, 3, 2)
            assert report.strength == pytest.approx(best_strength, abs=1e-12)

    def test_tie_breaks_lexicographically(self):
        es = points_1d([1.0, 1.0, 1.0, 1.0], 2, 2)
        partition, report = brute_force_partition(es, 2, 2)
        assert report.strength == 0.0
        assert partition.assignment == (0, 0, 1, 1)

    def test_guard_refusal_states_count(self):
        es = random_set(14, 2, 0)
        with pytest.raises(GuardRefusal, match="681080400"):
            brute_force_partition(es, 7, 2)

    def test_result_strength_is_recomputable(self):
        es = random_set(8, 3, 5)
        partition, report = brute_force_partition(es, 2, 4)
        assert cluster_strength(es, partition).strength == report.strength


class TestSwapSearch:
    def test_blob_instance_any_seed(self):
        for seed in (0, 1, 17, 999):
            cfg = SearchConfig(seed=seed, restarts=5, patience=200, max_proposals=5000)
            partition, report, _ = swap_search(BLOBS_1D, 2, 2, cfg)
            assert report.strength == pytest.approx(0.99, abs=1e-12)
            # blob partition up to relabeling
            assert partition.assignment[0] == partition.assignment[1]
            assert partition.assignment[2] == partition.assignment[3]

    def test_degenerate_identical_points(self):
        es = points_1d([2.0, 2.0, 2.0, 2.0], 2, 2)
        cfg = SearchConfig(seed=3, restarts=2, patience=50, max_proposals=1000)
        partition, report, trace = swap_search(es, 2, 2, cfg)
        assert report.strength == 0.0
        assert trace.accepted_strengths == ()
        assert trace.proposals_evaluated == 50  # stopped by patience

    def test_deterministic_and_thread_invariant(self):
        es = random_set(20, 4, 11)
        cfg = SearchConfig(seed=5, restarts=6, patience=300, max_proposals=20_000)
        r1 = swap_search(es, 4, 5, cfg, threads=1)
        r2 = swap_search(es, 4, 5, cfg, threads=1)
        r4 = swap_search(es, 4, 5, cfg, threads=4)
        assert r1 == r2 == r4

    def test_trace_strictly_increasing(self):
        es = random_set(24, 3, 2)
        cfg = SearchConfig(seed=8, restarts=3, patience=500, max_proposals=50_000)
        _, _, trace = swap_search(es, 4, 6, cfg)
        diffs = np.diff(trace.accepted_strengths)
        assert len(trace.accepted_strengths) > 0
        assert (diffs > 0).all()

    def test_incremental_agrees_with_recompute(self):
        # The trace's last accepted value comes from the running update;
        # the report is recomputed from scratch. They must agree closely.
        for seed in range(5):
            es = random_set(30, 5, 40 + seed)
            cfg = SearchConfig(seed=seed, restarts=2, patience=500, max_proposals=50_000)
            _, report, trace = swap_search(es, 5, 6, cfg)
            if trace.accepted_strengths:
                assert report.strength == pytest.approx(
                    trace.accepted_strengths[-1], abs=1e-9
                )

    def test_small_oracle_equality(self):
        for seed in range(10):
            es = random_set(8, 3, 60 + seed)
            cfg = SearchConfig(seed=seed, restarts=20, patience=2000, max_proposals=200_000)
            _, search_report, _ = swap_search(es, 2, 4, cfg)
            _, brute_report = brute_force_partition(es, 2, 4)
            assert search_report.strength == brute_report.strength

    def test_preconditions(self):
        with pytest.raises(ValidationError, match="N >= 4"):
            swap_search(points_1d([0.0, 1.0], 2, 1), 2, 1, SearchConfig())
        with pytest.raises(ValidationError):
            swap_search(random_set(8, 2, 0), 3, 2, SearchConfig())

    def test_config_validation(self):
        with pytest.raises(ValidationError, match="patience"):
            SearchConfig(patience=0)
        with pytest.raises(ValidationError, match="max_proposals"):
            SearchConfig(patience=100, max_proposals=50)
        with pytest.raises(ValidationError, match="restarts"):
            SearchConfig(restarts=0)
        with pytest.raises(ValidationError, match="seed"):
            SearchConfig(seed=-1)


class TestNearestNeighbors:
    def test_hand_example(self):
        es = points_1d([0.0, 1.0, 5.0], 1, 3)
        result = nearest_neighbors(es, "p0", 2)
        assert result == [("p1", 1.0), ("p2", 5.0)]

    def test_all_others_sorted(self):
        es = random_set(10, 3, 1)
        result = nearest_neighbors(es, "r3", 9)
        dists = [d for _, d in result]
        assert dists == sorted(dists)
        assert len(result) == 9

    def test_tie_keeps_corpus_order(self):
        es = points_1d([0.0, 1.0, -1.0, 3.0], 1, 4)
        result = nearest_neighbors(es, "p0", 2)
        assert [doc_id for doc_id, _ in result] == ["p1", "p2"]

    def test_unknown_id_suggests(self):
        es = random_set(5, 2, 2)
        with pytest.raises(ValidationError, match="closest known ids.*r1"):
            nearest_neighbors(es, "r1x", 2)

    def test_m_bounds(self):
        es = random_set(5, 2, 2)
        with pytest.raises(ValidationError, match="1..4"):
            nearest_neighbors(es, "r0", 0)
        with pytest.raises(ValidationError, match="1..4"):
            nearest_neighbors(es, "r0", 5)

    def test_matches_naive_scan(self):
        es = random_set(20, 5, 31)
        for query in ("r0", "r7", "r19"):
            got = nearest_neighbors(es, query, 6)
            want = naive_neighbors(es.matrix, es.ids, query, 6)
            assert [g[0] for g in got] == [w[0] for w in want]
            for (_, d1), (_, d2) in zip(got, want):
                assert d1 == pytest.approx(d2, abs=1e-12)


class TestPartitionIO:
    def test_round_trip(self, tmp_path):
        es = random_set(8, 3, 5)
        cfg = SearchConfig(seed=1, restarts=2, patience=100, max_proposals=1000)
        partition, report, trace = swap_search(es, 2, 4, cfg)
        path = tmp_path / "partition.json"
        save_partition(path, es.ids, partition, report, trace)
        ids, loaded, strength, trace_dict = load_partition(path)
        assert ids == list(es.ids)
        assert loaded == partition
        assert strength == report.strength
        assert trace_dict["restart_index"] == trace.restart_index

    def test_extra_keys_ignored(self, tmp_path):
        payload = {
            "k": 2, "s": 1, "ids": ["a", "b"], "assignment": [0, 1],
            "strength": 1.0, "config": {"anything": True},
        }
        path = tmp_path / "p.json"
        path.write_text(json.dumps(payload), encoding="utf-8")
        ids, partition, strength, _ = load_partition(path)
        assert partition.k == 2

    def test_missing_keys(self, tmp_path):
        path = tmp_path / "p.json"
        path.write_text(json.dumps({"k": 2}), encoding="utf-8")
        with pytest.raises(ValidationError, match="missing keys"):
            load_partition(path)

    def test_length_mismatch(self, tmp_path):
        payload = {"k": 2, "s": 1, "ids": ["a"], "assignment": [0, 1], "strength": 0.0}
        path = tmp_path / "p.json"
        path.write_text(json.dumps(payload), encoding="utf-8")
        with pytest.raises(ValidationError, match="ids"):
            load_partition(path)

    def test_duplicate_ids(self, tmp_path):
        payload = {"k": 2, "s": 1, "ids": ["a", "a"], "assignment": [0, 1], "strength": 0.0}
        path = tmp_path / "p.json"
        path.write_text(json.dumps(payload), encoding="utf-8")
        with pytest.raises(ValidationError, match="duplicate"):
            load_partition(path)


class TestBalancedSwapClustering:
    def test_fit_recovers_blobs(self):
        X = BLOBS_1D.matrix
        est = BalancedSwapClustering(n_clusters=2, seed=0, restarts=5, patience=100)
        est.fit(X)
        assert est.labels_[0] == est.labels_[1]
        assert est.labels_[2] == est.labels_[3]
        assert est.strength_ == pytest.approx(0.99, abs=1e-12)
        assert est.report_.strength == est.strength_

    def test_infers_cluster_size(self):
        X = np.random.default_rng(0).normal(size=(12, 3))
        est = BalancedSwapClustering(n_clusters=3, seed=1, patience=100, restarts=2)
        est.fit(X)
        assert sorted(np.bincount(est.labels_).tolist()) == [4, 4, 4]

    def test_indivisible_rejected(self):
        X = np.zeros((10, 2))
        with pytest.raises(ValidationError, match="divide"):
            BalancedSwapClustering(n_clusters=3).fit(X)

    def test_fit_predict(self):
        X = np.random.default_rng(3).normal(size=(8, 2))
        labels = BalancedSwapClustering(
            n_clusters=2, seed=2, restarts=2, patience=50
        ).fit_predict(X)
        assert len(labels) == 8

    def test_get_params(self):
        est = BalancedSwapClustering(n_clusters=4, seed=9)
        params = est.get_params()
        assert params["n_clusters"] == 4
        assert params["seed"] == 9
