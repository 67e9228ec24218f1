import numpy as np
import pytest

from dtsurv import ForestParams, TreeParams, expand, train_forest, train_tree
from dtsurv.learners import SingleClassData

from conftest import geometric_dataset, random_dataset


class TestTrainForest:
    def test_degenerate_forest_equals_single_tree(self):
        d = random_dataset(np.random.default_rng(2), n_patients=50)
        e = expand(d)
        forest = train_forest(
            e,
            ForestParams(n_trees=1, max_features_fraction=1.0, bootstrap=False, min_samples_split=2, max_depth=6),
        )
        tree = train_tree(e, TreeParams(max_depth=6, min_samples_split=2))
        probes = np.random.default_rng(3).normal(size=(400, e.matrix.shape[1]))
        assert np.array_equal(forest.predict_matrix(probes), tree.predict_matrix(probes))

    def test_same_seed_identical_predictions(self):
        d = random_dataset(np.random.default_rng(4), n_patients=80)
        e = expand(d)
        params = ForestParams(n_trees=6, max_depth=5, max_features_fraction=0.5, seed=11)
        a = train_forest(e, params)
        b = train_forest(e, params)
        probes = np.random.default_rng(5).normal(size=(1000, e.matrix.shape[1]))
        assert np.array_equal(a.predict_matrix(probes), b.predict_matrix(probes))

    def test_parallel_training_matches_serial(self):
        d = random_dataset(np.random.default_rng(14), n_patients=60)
        e = expand(d)
        serial = train_forest(e, ForestParams(n_trees=8, max_depth=4, seed=2, n_jobs=1))
        parallel = train_forest(e, ForestParams(n_trees=8, max_depth=4, seed=2, n_jobs=4))
        probes = np.random.default_rng(6).normal(size=(300, e.matrix.shape[1]))
        assert np.array_equal(serial.predict_matrix(probes), parallel.predict_matrix(probes))

    def test_recovers_constant_hazard(self):
        d = geometric_dataset(np.random.default_rng(8), 4000, p=0.3)
        e = expand(d)
        model = train_forest(e, ForestParams(n_trees=10, max_depth=4, min_samples_split=50, seed=1))
        # empirical death rate at well-populated months is the oracle
        months = e.months()
        probe_months = [m for m in range(4) if (months == m).sum() >= 300]
        for m in probe_months:
            x = e.matrix[months == m][:1]
            assert model.predict_matrix(x)[0] == pytest.approx(0.3, abs=0.02)

    def test_prediction_is_mean_of_trees(self):
        d = random_dataset(np.random.default_rng(9), n_patients=60)
        e = expand(d)
        forest = train_forest(e, ForestParams(n_trees=7, max_depth=4, seed=3))
        probes = np.random.default_rng(10).normal(size=(200, e.matrix.shape[1]))
        stacked = np.stack([t.predict_matrix(probes) for t in forest.tree_models()])
        assert np.allclose(forest.predict_matrix(probes), stacked.mean(axis=0), atol=1e-15)

    def test_single_class_raises(self):
        d = random_dataset(np.random.default_rng(12), n_patients=20, event_prob=0.0)
        with pytest.raises(SingleClassData):
            train_forest(expand(d), ForestParams(n_trees=2))

    def test_feature_subsampling_count(self):
        assert ForestParams(max_features_fraction=0.8).n_split_features(67) == 54
        assert ForestParams(max_features_fraction=0.5).n_split_features(103) == 52
        assert ForestParams(max_features_fraction=1.0).n_split_features(10) == 10
        assert ForestParams(max_features_fraction=0.01).n_split_features(10) == 1

    def test_params_validation(self):
        with pytest.raises(ValueError):
            ForestParams(n_trees=0)
        with pytest.raises(ValueError):
            ForestParams(max_features_fraction=0.0)
        with pytest.raises(ValueError):
            ForestParams(max_depth=0)
