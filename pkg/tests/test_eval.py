import numpy as np
import pytest

from matprint import (
    DegenerateDataWarning,
    Fingerprint,
    InvalidInputError,
    aic,
    build_validation_trials,
    classical_mds,
    corr_ratings,
    corr_similarity_matrices,
    evaluate,
    mae,
    rci,
    topk_overlap,
)
from conftest import random_records
from oracles import (
    classical_mds_distances,
    pearson_two_pass,
    retrieve_exhaustive,
    spearman_scipy,
)


def symmetric(rng, n):
    m = rng.uniform(-1, 1, size=(n, n))
    m = (m + m.T) / 2
    np.fill_diagonal(m, 1.0)
    return m


class TestCorrSimilarityMatrices:
    def test_identical(self, rng):
        m = symmetric(rng, 10)
        assert corr_similarity_matrices(m, m) == 1.0

    def test_positive_affine_invariance(self, rng):
        m = symmetric(rng, 8)
        assert corr_similarity_matrices(0.3 * m + 0.1, m) == pytest.approx(1.0, abs=1e-12)

    def test_matches_triangle_oracle(self, rng):
        for _ in range(20):
            a, b = symmetric(rng, 10), symmetric(rng, 10)
            iu = np.triu_indices(10, k=1)
            assert corr_similarity_matrices(a, b) == pytest.approx(
                pearson_two_pass(a[iu], b[iu]), abs=1e-12
            )

    def test_shape_mismatch_rejected(self, rng):
        with pytest.raises(InvalidInputError):
            corr_similarity_matrices(symmetric(rng, 4), symmetric(rng, 5))

    def test_asymmetric_rejected(self, rng):
        m = rng.uniform(size=(5, 5))
        with pytest.raises(InvalidInputError):
            corr_similarity_matrices(m, m.copy())


class TestCorrRatings:
    def test_identical(self, rng):
        m = rng.uniform(-1, 1, size=(20, 16))
        assert corr_ratings(m, m) == 1.0

    def test_negated(self, rng):
        m = rng.uniform(-1, 1, size=(20, 16))
        assert corr_ratings(-m, m) == pytest.approx(-1.0, abs=1e-12)

    def test_matches_flatten_oracle(self, rng):
        for _ in range(20):
            a = rng.uniform(-1, 1, size=(12, 16))
            b = rng.uniform(-1, 1, size=(12, 16))
            assert corr_ratings(a, b) == pytest.approx(
                pearson_two_pass(a.reshape(-1), b.reshape(-1)), abs=1e-12
            )

    def test_positive_affine_invariance(self, rng):
        a = rng.uniform(-1, 1, size=(15, 16))
        b = rng.uniform(-1, 1, size=(15, 16))
        base = corr_ratings(a, b)
        assert corr_ratings(0.4 * a + 0.2, b) == pytest.approx(base, abs=1e-12)
        assert corr_ratings(a, 2.5 * b - 0.3) == pytest.approx(base, abs=1e-12)


class TestMae:
    def test_identical_is_zero(self, rng):
        m = rng.uniform(size=(5, 16))
        assert mae(m, m) == 0.0

    def test_constant_offset(self, rng):
        m = rng.uniform(-0.5, 0.5, size=(7, 16))
        assert mae(m + 0.1, m) == pytest.approx(0.1, abs=1e-12)

    def test_matches_direct_summation(self, rng):
        a = rng.uniform(-1, 1, size=(9, 16))
        b = rng.uniform(-1, 1, size=(9, 16))
        expected = sum(abs(x - y) for x, y in zip(a.reshape(-1), b.reshape(-1))) / a.size
        assert mae(a, b) == pytest.approx(expected, abs=1e-12)


class TestTopkOverlap:
    def test_identical_rankings(self, rng):
        v = rng.uniform(size=30)
        assert topk_overlap(v, v, k=5) == 5

    def test_disjoint_by_construction(self):
        gt = np.arange(20, dtype=float)
        pred = -gt
        assert topk_overlap(pred, gt, k=5) == 0

    def test_matches_set_oracle(self, rng):
        ids = [f"m{i:03d}" for i in range(68)]
        for _ in range(50):
            pred = rng.uniform(size=68)
            gt = rng.uniform(size=68)
            top = lambda v: {
                ids[i] for i in sorted(range(68), key=lambda i: (-v[i], ids[i]))[:5]
            }
            assert topk_overlap(pred, gt, k=5, ids=ids) == len(top(pred) & top(gt))

    def test_tie_rule_uses_ids(self):
        ids = ["a", "b", "c", "d"]
        gt = np.array([1.0, 1.0, 1.0, 0.0])
        pred = np.array([0.0, 1.0, 1.0, 1.0])
        # gt top-2 = {a, b} (ties by id), pred top-2 = {b, c}
        assert topk_overlap(pred, gt, k=2, ids=ids) == 1


class TestRci:
    def test_identical(self, rng):
        v = rng.uniform(size=120)
        assert rci(v, v, first=100) == 1.0

    def test_reversed_subset(self, rng):
        gt = np.arange(120, dtype=float)
        pred = -gt
        assert rci(pred, gt, first=100) == pytest.approx(-1.0, abs=1e-12)

    def test_matches_scipy_oracle_with_ties(self, rng):
        for _ in range(100):
            n = 40
            gt = rng.uniform(size=n)
            pred = np.round(rng.uniform(size=n), 1)  # planted ties
            ids = [f"m{i:03d}" for i in range(n)]
            subset = sorted(range(n), key=lambda i: (-gt[i], ids[i]))[:25]
            expected = spearman_scipy(gt[subset], pred[subset])
            assert rci(pred, gt, first=25, ids=ids) == pytest.approx(expected, abs=1e-12)

    def test_clamps_with_warning(self, rng):
        v = rng.uniform(size=10)
        with pytest.warns(DegenerateDataWarning):
            assert rci(v, v, first=100) == 1.0

    def test_invariant_under_monotone_transform(self, rng):
        for _ in range(20):
            gt = rng.uniform(size=50)
            pred = rng.uniform(size=50)
            base = rci(pred, gt, first=30)
            warped = rci(np.exp(3 * pred) + 1.0, gt, first=30)
            assert warped == pytest.approx(base, abs=1e-12)


class TestAic:
    def test_unit_residuals(self):
        assert aic([1.0] * 10, 0) == pytest.approx(0.0, abs=1e-12)

    def test_k_linearity(self, rng):
        res = rng.normal(size=30)
        assert aic(res, 6) - aic(res, 3) == pytest.approx(6.0, abs=1e-12)

    def test_matches_hand_formula(self, rng):
        res = rng.normal(size=25)
        rss = float(np.sum(np.square(res)))
        assert aic(res, 4) == pytest.approx(2 * 4 + 25 * np.log(rss / 25), abs=1e-12)

    def test_zero_rss_sentinel(self):
        with pytest.warns(DegenerateDataWarning):
            assert aic([0.0, 0.0], 2) == float("-inf")


class TestValidationTrials:
    def test_identical_preds_make_equal_groups(self, rng):
        recs = random_records(rng, 20)
        preds = {r.material_id: r.fingerprint for r in recs[:5]}
        trials = build_validation_trials(recs, preds, seed=7)
        assert len(trials) == 5
        for t in trials:
            assert t.group_ratings == t.group_model
            assert t.target not in t.group_random
            assert len(set(t.display_order)) == 3

    def test_seeded_determinism(self, rng):
        recs = random_records(rng, 15)
        preds = {recs[0].material_id: recs[1].fingerprint}
        t1 = build_validation_trials(recs, preds, seed=3)
        t2 = build_validation_trials(recs, preds, seed=3)
        assert t1 == t2

    def test_groups_match_retrieval_oracle(self, rng):
        recs = random_records(rng, 30)
        table = {r.material_id: r.fingerprint.values for r in recs}
        target = recs[4]
        pred_values = np.clip(target.fingerprint.values + rng.normal(0, 0.2, 16), -1, 1)
        preds = {target.material_id: Fingerprint(target.material_id, pred_values)}
        (trial,) = build_validation_trials(recs, preds, seed=11)
        expected_ratings = [
            mid
            for mid, _ in retrieve_exhaustive(
                table, target.material_id, target.fingerprint.values, 4, 0.5
            )
        ]
        expected_model = [
            mid for mid, _ in retrieve_exhaustive(table, target.material_id, pred_values, 4, 0.5)
        ]
        assert list(trial.group_ratings) == expected_ratings
        assert list(trial.group_model) == expected_model

    def test_small_db_rejected(self, rng):
        recs = random_records(rng, 12)
        with pytest.raises(InvalidInputError):
            build_validation_trials(recs, {recs[0].material_id: recs[0].fingerprint}, seed=0)


class TestClassicalMds:
    def test_three_equidistant_points(self):
        s = np.full((3, 3), 0.5)
        np.fill_diagonal(s, 1.0)
        coords = classical_mds(s, dims=2)
        d = classical_mds_distances(coords)
        off = d[np.triu_indices(3, k=1)]
        assert np.allclose(off, off[0], atol=1e-6)

    def test_identical_rows_coincide(self):
        s = np.ones((4, 4))
        coords = classical_mds(s, dims=2)
        assert np.allclose(coords, coords[0], atol=1e-9)

    def test_recovers_planar_configuration(self, rng):
        pts = rng.uniform(-0.4, 0.4, size=(12, 2))
        dist = classical_mds_distances(pts)
        coords = classical_mds(1.0 - dist, dims=2)
        np.testing.assert_allclose(classical_mds_distances(coords), dist, atol=1e-6)

    def test_centered_output(self, rng):
        s = symmetric(rng, 9)
        coords = classical_mds(np.clip(s, -1, 1), dims=2)
        assert np.all(np.abs(coords.mean(axis=0)) < 1e-9)

    def test_asymmetric_rejected(self, rng):
        with pytest.raises(InvalidInputError):
            classical_mds(rng.uniform(size=(5, 5)))

    def test_deterministic_signs(self, rng):
        s = symmetric(rng, 7)
        a = classical_mds(s)
        b = classical_mds(s)
        np.testing.assert_array_equal(a, b)


class TestEvaluate:
    def test_perfect_prediction_report(self, rng):
        recs = random_records(rng, 12)
        with pytest.warns(DegenerateDataWarning):  # rci clamp + aic -inf
            report = evaluate(recs, recs, rci_first=100)
        assert report.r_sm == 1.0
        assert report.r_a == 1.0
        assert report.mae == 0.0
        assert report.per_attribute_top5_overlap == (5,) * 16
        assert report.aic == float("-inf")
        assert report.sample_count == 12

    def test_report_round_trips_to_json(self, rng, tmp_path):
        recs = random_records(rng, 10)
        noisy = []
        from dataclasses import replace

        for r in recs:
            fp = Fingerprint(
                r.material_id, np.clip(r.fingerprint.values + rng.normal(0, 0.1, 16), -1, 1)
            )
            noisy.append(replace(r, fingerprint=fp))
        report = evaluate(noisy, recs, rci_first=10)
        path = tmp_path / "report.json"
        report.to_json(path)
        import json

        loaded = json.loads(path.read_text())
        assert loaded["sample_count"] == 10
        assert loaded["r_a"] == pytest.approx(report.r_a)
        assert len(loaded["per_attribute_rci"]) == 16
