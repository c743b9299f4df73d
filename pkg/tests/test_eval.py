import math

import numpy as np
import pytest

from mimix import ParameterError, get_estimator
from mimix.eval import (
    auroc,
    auroc_null_sd,
    count_inversions,
    edge_labels,
    mse_sweep,
    rank_features,
    roc_curve,
    score_gene_pairs,
)
from mimix.synthgen import GeneratorSpec, gen_exp2, gen_sem_network, ground_truth


def test_roc_hand_case():
    curve = roc_curve([4, 3, 2, 1], [True, False, True, False])
    assert curve.points == [(0, 0), (0, 0.5), (0.5, 0.5), (0.5, 1), (1, 1)]
    assert auroc(curve) == 0.75


def test_roc_perfect_and_reversed():
    labels = np.array([1, 1, 1, 0, 0, 0, 0], dtype=bool)
    scores = np.arange(7, 0, -1.0)
    perfect = roc_curve(scores, labels)
    assert (0.0, 1.0) in perfect.points
    assert auroc(perfect) == 1.0
    reverse = roc_curve(-scores, labels)
    assert (1.0, 0.0) in reverse.points
    assert auroc(reverse) == 0.0


def test_roc_ties_form_one_step():
    curve = roc_curve([1.0, 1.0, 0.0, 0.0], [True, False, True, False])
    assert curve.points == [(0, 0), (0.5, 0.5), (1, 1)]
    assert auroc(curve) == 0.5


def test_random_scores_null(rng):
    labels = np.arange(10_000) % 2 == 0
    assert abs(auroc(roc_curve(rng.uniform(size=10_000), labels)) - 0.5) <= 0.02
    assert auroc_null_sd(5000, 5000) == pytest.approx(math.sqrt(10_001 / (12 * 25e6)))


def test_roc_needs_both_classes():
    with pytest.raises(ParameterError):
        roc_curve([1, 2], [True, True])


def test_count_inversions():
    assert count_inversions([4, 3, 3, 1]) == 0
    assert count_inversions([4, 5, 3, 4]) == 2


class TestSweep:
    def test_single_trial_is_squared_error(self):
        spec = GeneratorSpec("exp2", seed=0)
        est = get_estimator("mixed")
        res = mse_sweep(est, spec, [200], trials=1, master_seed=3)
        truth = ground_truth(spec).value
        assert res.mse_per_size[0] == (res.estimates[0, 0] - truth) ** 2
        assert res.mean_bias_per_size[0] == res.estimates[0, 0] - truth

    def test_deterministic_and_thread_independent(self):
        spec = GeneratorSpec("exp4", {"p": 0.15})
        est = get_estimator("noisy_ksg", sigma=0.1)
        a = mse_sweep(est, spec, [100, 200], trials=4, master_seed=5)
        b = mse_sweep(est, spec, [100, 200], trials=4, master_seed=5, workers=3)
        assert a.to_dict() == b.to_dict()
        assert np.array_equal(a.estimates, b.estimates)
        assert len(a.rows()) == 2

    def test_estimators_share_data(self):
        spec = GeneratorSpec("exp2")
        a = mse_sweep(get_estimator("mixed"), spec, [300], trials=3, master_seed=1)
        b = mse_sweep(get_estimator("ksg"), spec, [300], trials=3, master_seed=1)
        # exp2 has no joint atoms of size > k, so the two coincide on shared data
        assert np.array_equal(a.estimates, b.estimates)

    def test_bad_args(self):
        est = get_estimator("mixed")
        with pytest.raises(ParameterError):
            mse_sweep(est, GeneratorSpec("exp2"), [5], trials=1)
        with pytest.raises(ParameterError):
            mse_sweep(est, GeneratorSpec("exp2"), [100], trials=0)
        with pytest.raises(ParameterError):
            mse_sweep(est, GeneratorSpec("featsel"), [100], trials=1)


class TestRanking:
    def test_copy_feature_first(self, rng):
        target = rng.normal(size=(5000, 2))
        features = np.column_stack([rng.normal(size=5000), target[:, 1], rng.normal(size=5000)])
        ranking = rank_features(features, target, get_estimator("mixed"))
        assert ranking.order[0] == 1

    def test_ties_by_index(self, rng):
        target = rng.normal(size=200)
        features = np.ones((200, 4))
        ranking = rank_features(features, target, get_estimator("fixed_partition"))
        assert list(ranking.order) == [0, 1, 2, 3]
        assert np.all(ranking.scores == 0)

    def test_deterministic(self, rng):
        target = rng.normal(size=300)
        features = rng.normal(size=(300, 3))
        est = get_estimator("noisy_ksg", sigma=0.2)
        a = rank_features(features, target, est, seed=4)
        b = rank_features(features, target, est, seed=4)
        assert np.array_equal(a.scores, b.scores)


class TestGenePairs:
    def test_pair_count_and_labels(self):
        expr, edges = gen_sem_network(300, 6, edge_prob=0.5, seed=1)
        scores = score_gene_pairs(expr, get_estimator("mixed"))
        assert scores.pairs.shape == (15, 2)
        labels = edge_labels(scores.pairs, edges, 6)
        assert labels.sum() == len(edges)

    def test_unknown_gene(self):
        with pytest.raises(ParameterError):
            edge_labels(np.array([[0, 1]]), [(0, 7)], 3)

    def test_too_few_genes(self):
        with pytest.raises(ParameterError):
            score_gene_pairs(np.zeros((10, 2)), get_estimator("mixed"))

    def test_exp2_columns(self):
        ds = gen_exp2(400, 5, 2)
        expr = np.column_stack([ds.x[:, 0], ds.y[:, 0], np.arange(400.0)])
        s = score_gene_pairs(expr, get_estimator("mixed"))
        assert s.scores[0] == max(s.scores)
