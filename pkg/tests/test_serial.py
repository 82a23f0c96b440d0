"""Serial solvers: hand examples, oracle equivalence, stats semantics."""

import numpy as np
import pytest

import simplexproj as sp

from conftest import DISTS, make_vector


def inst(d, b=1.0):
    return sp.ProjectionInstance(d=np.asarray(d, dtype=float), b=b)


ALL_SERIAL = [
    ("sortscan", lambda i: sp.sort_scan(i)),
    ("pp-median", lambda i: sp.pivot_partition(i, sp.PivotRule.median())),
    ("pp-random", lambda i: sp.pivot_partition(i, sp.PivotRule.random(123))),
    ("pp-michelot", lambda i: sp.pivot_partition(i, sp.PivotRule.michelot_start())),
    ("michelot", lambda i: sp.michelot(i)),
    ("condat", lambda i: sp.condat(i)),
    ("bucket", lambda i: sp.bucket(i)),
]


class TestPivotRule:
    def test_random_requires_seed(self):
        with pytest.raises(ValueError):
            sp.PivotRule("random")

    def test_unknown_kind(self):
        with pytest.raises(ValueError):
            sp.PivotRule("best")

    def test_constructors(self):
        assert sp.PivotRule.random(3).seed == 3
        assert sp.PivotRule.median().kind == "median"
        assert sp.PivotRule.michelot_start().kind == "michelot-start"


class TestBucketParams:
    def test_validation(self):
        with pytest.raises(ValueError):
            sp.BucketParams(branching=1)
        with pytest.raises(ValueError):
            sp.BucketParams(pivot_tol=0.0)


class TestSortScan:
    def test_hand_example(self):
        proj, _ = sp.sort_scan(inst([2.0, 1.0, 0.0]))
        assert proj.tau == pytest.approx(1.0)

    def test_symmetric_pair(self):
        proj, _ = sp.sort_scan(inst([1.0, 1.0]))
        assert proj.tau == pytest.approx(0.5)
        assert np.allclose(proj.values, [0.5, 0.5])

    def test_full_support_branch(self):
        proj, _ = sp.sort_scan(inst([0.4, 0.3, 0.3], b=1.1))
        assert proj.tau == pytest.approx(-1.0 / 30.0)
        assert proj.support_size == 3

    @pytest.mark.parametrize("kind", ["quicksort", "mergesort", "heapsort", "stable"])
    def test_sort_strategies_agree(self, kind):
        rng = np.random.default_rng(0)
        d = rng.normal(size=500)
        base, _ = sp.sort_scan(inst(d))
        got, _ = sp.sort_scan(inst(d), kind=kind)
        assert got.tau == base.tau

    def test_stats_cover_input(self):
        _, stats = sp.sort_scan(inst([3.0, 1.0, 2.0]))
        assert stats.elements_scanned >= 3


class TestPivotPartition:
    def test_median_hand_example(self):
        proj, _ = sp.pivot_partition(inst([2.0, 1.0, 0.0]), sp.PivotRule.median())
        assert proj.tau == pytest.approx(1.0)

    def test_random_rule_result_is_seed_independent(self):
        for seed in range(12):
            proj, _ = sp.pivot_partition(inst([2.0, 1.0, 0.0]), sp.PivotRule.random(seed))
            assert proj.tau == pytest.approx(1.0)

    def test_single_element(self):
        proj, _ = sp.pivot_partition(inst([5.0], b=2.0), sp.PivotRule.median())
        assert proj.tau == pytest.approx(3.0)
        assert np.allclose(proj.values, [2.0])

    def test_random_rule_reproducible_work(self):
        d = np.random.default_rng(1).normal(size=200)
        _, s1 = sp.pivot_partition(inst(d), sp.PivotRule.random(9))
        _, s2 = sp.pivot_partition(inst(d), sp.PivotRule.random(9))
        assert s1.elements_scanned == s2.elements_scanned
        assert s1.outer_iterations == s2.outer_iterations

    def test_heavy_duplicates_terminate(self):
        d = np.array([1.0] * 500 + [0.0] * 500)
        proj, stats = sp.pivot_partition(inst(d), sp.PivotRule.random(2))
        ref = sp.reference_project(inst(d))
        assert proj.tau == pytest.approx(ref.tau, rel=1e-12)
        assert stats.outer_iterations <= 30


class TestMichelot:
    def test_hand_trace(self):
        proj, stats = sp.michelot(inst([2.0, 1.0, 0.0]))
        assert proj.tau == pytest.approx(1.0)
        assert stats.outer_iterations == 3
        assert stats.pivots == pytest.approx([2.0 / 3.0, 1.0, 1.0])

    def test_already_on_simplex_single_pass(self):
        proj, stats = sp.michelot(inst([0.4, 0.3, 0.3]))
        assert proj.tau == pytest.approx(0.0, abs=1e-15)
        assert stats.outer_iterations == 1

    def test_symmetric_pair(self):
        proj, stats = sp.michelot(inst([1.0, 1.0]))
        assert proj.tau == pytest.approx(0.5)
        assert stats.outer_iterations == 1

    def test_pivot_sequence_monotone_and_ends_at_tau(self):
        rng = np.random.default_rng(21)
        for _ in range(30):
            n = int(rng.integers(2, 500))
            d = make_vector(rng, n, DISTS[int(rng.integers(0, len(DISTS)))])
            proj, stats = sp.michelot(sp.ProjectionInstance(d=d, b=1.0))
            pivots = np.asarray(stats.pivots)
            assert np.all(np.diff(pivots) >= -1e-12 * np.maximum(1.0, np.abs(pivots[:-1])))
            assert pivots[-1] == proj.tau

    def test_pass_sizes_decreasing(self):
        d = np.random.default_rng(4).uniform(size=1000)
        _, stats = sp.michelot(inst(d))
        sizes = stats.pass_sizes
        assert sizes[0] == 1000
        assert all(a >= b for a, b in zip(sizes, sizes[1:]))


class TestFilter:
    def test_hand_example(self):
        idx, p, _ = sp.filter_candidates([2.0, 1.0, 0.0], 1.0)
        assert idx.tolist() == [0]
        assert p == pytest.approx(1.0)

    def test_waiting_list_rejection(self):
        idx, p, _ = sp.filter_candidates([0.0, 1.0, 2.0], 1.0)
        assert idx.tolist() == [2]
        assert p == pytest.approx(1.0)

    def test_single_element_initialization(self):
        idx, p, _ = sp.filter_candidates([5.0], 2.0)
        assert idx.tolist() == [0]
        assert p == pytest.approx(3.0)

    def test_sandwich_and_superset(self):
        rng = np.random.default_rng(31)
        for _ in range(40):
            n = int(rng.integers(1, 800))
            dist = DISTS[int(rng.integers(0, len(DISTS)))]
            d = make_vector(rng, n, dist)
            b = float(rng.uniform(0.1, 3.0))
            idx, p, stats = sp.filter_candidates(d, b)
            ref = sp.reference_project(sp.ProjectionInstance(d=d, b=b))
            slack = 1e-9 * max(1.0, abs(ref.tau), abs(p))
            assert float(np.mean(d)) - b / n <= p + slack
            assert p <= ref.tau + slack
            assert set(ref.indices.tolist()) <= set(idx.tolist())
            assert stats.reduced_size == idx.size

    def test_rejects_bad_inputs(self):
        with pytest.raises(ValueError):
            sp.filter_candidates([], 1.0)
        with pytest.raises(ValueError):
            sp.filter_candidates([1.0], 0.0)


class TestCondat:
    def test_hand_examples(self):
        proj, _ = sp.condat(inst([2.0, 1.0, 0.0]))
        assert proj.tau == pytest.approx(1.0)
        proj, _ = sp.condat(inst([0.0, 1.0, 2.0]))
        assert np.allclose(proj.to_dense(3), [0.0, 0.0, 1.0])
        proj, _ = sp.condat(inst([1.0, 1.0]))
        assert proj.tau == pytest.approx(0.5)

    def test_post_filter_work_never_exceeds_michelot(self):
        rng = np.random.default_rng(41)
        for _ in range(60):
            n = int(rng.integers(1, 1500))
            dist = DISTS[int(rng.integers(0, len(DISTS)))]
            d = make_vector(rng, n, dist)
            b = float(rng.uniform(0.1, 3.0))
            instance = sp.ProjectionInstance(d=d, b=b)
            _, cs = sp.condat(instance)
            _, ms = sp.michelot(instance)
            assert cs.main_loop_scanned <= ms.elements_scanned

    def test_stats_shape(self):
        _, stats = sp.condat(inst([0.0, 1.0, 2.0]))
        assert stats.preprocess_scanned >= 3
        assert stats.elements_scanned >= stats.preprocess_scanned
        assert stats.reduced_size is not None


class TestBucket:
    def test_tolerance_against_oracle(self):
        instance = inst([2.0, 1.0, 0.0])
        proj, _ = sp.bucket(instance, sp.BucketParams(branching=4, pivot_tol=1e-9))
        assert abs(proj.tau - 1.0) <= 1e-9

    def test_all_equal_closed_form(self):
        proj, _ = sp.bucket(inst([3.0, 3.0, 3.0]))
        assert proj.tau == pytest.approx(3.0 - 1.0 / 3.0)
        assert np.allclose(proj.values, [1.0 / 3.0] * 3)

    def test_binary_branching(self):
        proj, _ = sp.bucket(inst([2.0, 1.0, 0.0, 1.5]), sp.BucketParams(branching=2, pivot_tol=1e-9))
        assert proj.tau == pytest.approx(1.25, abs=1e-9)

    def test_tolerance_sweep(self):
        rng = np.random.default_rng(51)
        for tol in (1e-6, 1e-9):
            for _ in range(25):
                n = int(rng.integers(1, 700))
                dist = DISTS[int(rng.integers(0, len(DISTS)))]
                d = make_vector(rng, n, dist)
                b = float(rng.uniform(0.1, 3.0))
                instance = sp.ProjectionInstance(d=d, b=b)
                ref = sp.reference_project(instance)
                proj, _ = sp.bucket(instance, sp.BucketParams(pivot_tol=tol))
                assert abs(proj.tau - ref.tau) <= tol

    def test_adversarial_shapes(self):
        rng = np.random.default_rng(52)
        cases = [
            np.geomspace(1e-12, 1.0, 300),            # exponentially clustered
            np.concatenate([np.full(200, 0.5), np.full(200, 0.5 + 1e-12)]),
            np.concatenate([rng.uniform(size=100), np.full(50, 2.0)]),  # cluster at top
            np.array([1.0, 1.0 + 1e-15, 1.0 - 1e-15]),
        ]
        for d in cases:
            instance = sp.ProjectionInstance(d=d, b=1.0)
            ref = sp.reference_project(instance)
            for tol in (1e-6, 1e-9):
                proj, _ = sp.bucket(instance, sp.BucketParams(pivot_tol=tol))
                assert abs(proj.tau - ref.tau) <= tol


@pytest.mark.parametrize("name,solver", ALL_SERIAL)
@pytest.mark.parametrize("dist", DISTS)
def test_oracle_equivalence_small(name, solver, dist):
    rng = np.random.default_rng(abs(hash((name, dist))) % 2**32)
    for n in (1, 2, 3, 10, 1000):
        for trial in range(8):
            d = make_vector(rng, n, dist)
            b = (0.5, 1.0, 10.0)[trial % 3]
            instance = sp.ProjectionInstance(d=d, b=b)
            ref = sp.reference_project(instance)
            proj, stats = solver(instance)
            tol = 1e-9 if name != "bucket" else 1e-9 * max(1.0, d.max() - d.min())
            assert abs(proj.tau - ref.tau) <= tol * max(1.0, abs(ref.tau)) + (
                tol if name == "bucket" else 0.0
            )
            assert sp.verify_kkt(instance, proj, 1e-9)
            assert stats.elements_scanned >= n


@pytest.mark.parametrize("dist", DISTS)
def test_oracle_equivalence_full_scale(dist):
    """1002 instances per distribution cycling n over {1,2,3,10,1e3,1e5}."""
    grid = (1, 2, 3, 10, 10**3, 10**5)
    rng = np.random.default_rng(abs(hash(("sweep", dist))) % 2**32)
    for i in range(1002):
        n = grid[i % len(grid)]
        d = make_vector(rng, n, dist)
        b = (0.5, 1.0, 10.0)[i % 3]
        instance = sp.ProjectionInstance(d=d, b=b)
        ref = sp.reference_project(instance)
        scale = max(1.0, abs(ref.tau))
        for name, solver in ALL_SERIAL:
            proj, _ = solver(instance)
            tol = 1e-9 * scale
            if name == "bucket":
                tol += 1e-9 * max(1.0, float(d.max() - d.min()))
            assert abs(proj.tau - ref.tau) <= tol, (name, dist, i)
            assert sp.verify_kkt(instance, proj, 1e-9), (name, dist, i)
