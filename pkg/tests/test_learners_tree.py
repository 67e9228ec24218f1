import numpy as np
import pytest

from dtsurv import FeatureSchema, FeatureVector, TreeParams, expand, train_tree
from dtsurv.learners import SingleClassData
from dtsurv.transform import ExpandedDataset

from conftest import random_dataset


def expanded_from_arrays(X, y):
    """Wrap raw arrays as an expanded dataset (last column is the month)."""
    X = np.asarray(X, dtype=float)
    schema = FeatureSchema(tuple(f"f{i}" for i in range(X.shape[1] - 1)) + ("month",))
    from dtsurv.core import DatasetStats

    stats = DatasetStats(X.shape[0], int(np.sum(y)), X.shape[0] - int(np.sum(y)), 0, {0: X.shape[0]})
    return ExpandedDataset(schema, [f"p{i}" for i in range(X.shape[0])], X, np.asarray(y, bool), stats)


def gini(y):
    p = np.mean(y)
    return 1.0 - p * p - (1.0 - p) ** 2


def enumerate_best_split(X, y):
    """Exhaustive (feature, midpoint) scan; ties to lowest feature, then threshold."""
    n = len(y)
    parent = gini(y)
    best = None
    for f in range(X.shape[1]):
        values = np.unique(X[:, f])
        for lo, hi in zip(values[:-1], values[1:]):
            threshold = (lo + hi) / 2.0
            left = X[:, f] <= threshold
            gain = parent - (left.sum() * gini(y[left]) + (~left).sum() * gini(y[~left])) / n
            if best is None or gain > best[0] + 1e-15:
                best = (gain, f, threshold)
    return best


class TestTrainTree:
    def test_separable_by_month(self):
        # deaths exactly when month < 3
        X = np.array([[0.0, m] for m in range(6)])
        y = np.array([1, 1, 1, 0, 0, 0], dtype=bool)
        model = train_tree(expanded_from_arrays(X, y), TreeParams(max_depth=1))
        root = model.root
        assert not root.is_leaf
        assert root.feature == 1
        assert root.threshold == 2.5
        assert {root.left.probability, root.right.probability} == {0.0, 1.0}
        assert root.left.is_leaf and root.right.is_leaf

    def test_single_class_raises(self):
        X = np.array([[0.0, 0.0], [1.0, 1.0]])
        with pytest.raises(SingleClassData):
            train_tree(expanded_from_arrays(X, np.zeros(2, bool)))

    def test_four_row_toy_matches_exhaustive_enumeration(self):
        X = np.array([[1.0, 0.0], [2.0, 1.0], [3.0, 2.0], [10.0, 3.0]])
        y = np.array([0, 1, 1, 0], dtype=bool)
        model = train_tree(expanded_from_arrays(X, y), TreeParams(max_depth=1))
        gain, feature, threshold = enumerate_best_split(X, y)
        assert model.root.feature == feature
        assert model.root.threshold == threshold

    def test_root_split_matches_enumeration_on_random_data(self):
        rng = np.random.default_rng(17)
        for _ in range(40):
            n = int(rng.integers(4, 30))
            X = rng.integers(0, 5, size=(n, 3)).astype(float)
            y = rng.random(n) < 0.5
            if y.all() or not y.any():
                continue
            model = train_tree(expanded_from_arrays(X, y), TreeParams(max_depth=1))
            best = enumerate_best_split(X, y)
            if best is None or best[0] <= 0:
                assert model.root.is_leaf
            else:
                assert model.root.feature == best[1]
                assert model.root.threshold == pytest.approx(best[2])

    def test_structural_bounds_hold(self):
        rng = np.random.default_rng(23)
        for _ in range(20):
            d = random_dataset(rng, n_patients=40)
            e = expand(d)
            if e.targets.all() or not e.targets.any():
                continue
            params = TreeParams(max_depth=int(rng.integers(1, 6)), min_samples_split=int(rng.integers(2, 8)))
            model = train_tree(e, params)

            def walk(node):
                assert 0.0 <= node.probability <= 1.0
                assert node.depth <= params.max_depth
                if not node.is_leaf:
                    assert node.n_samples >= params.min_samples_split
                    assert node.depth < params.max_depth
                    assert node.left.n_samples + node.right.n_samples == node.n_samples
                    walk(node.left)
                    walk(node.right)

            walk(model.root)

    def test_leaf_probability_is_class_fraction(self):
        X = np.array([[0.0, 0.0]] * 4 + [[0.0, 1.0]] * 4)
        y = np.array([0, 0, 0, 1, 1, 1, 1, 0], dtype=bool)
        model = train_tree(expanded_from_arrays(X, y), TreeParams(max_depth=1))
        left = model.predict_matrix(np.array([[0.0, 0.0]]))[0]
        right = model.predict_matrix(np.array([[0.0, 1.0]]))[0]
        assert left == 0.25
        assert right == 0.75

    def test_predictions_within_unit_interval_everywhere(self):
        rng = np.random.default_rng(31)
        d = random_dataset(rng, n_patients=60)
        e = expand(d)
        model = train_tree(e, TreeParams(max_depth=6))
        probes = rng.normal(scale=50.0, size=(500, e.matrix.shape[1]))
        predictions = model.predict_matrix(probes)
        assert np.all(predictions >= 0.0) and np.all(predictions <= 1.0)

    def test_predict_probability_checks_schema(self):
        d = random_dataset(np.random.default_rng(1), n_patients=20)
        e = expand(d)
        model = train_tree(e, TreeParams(max_depth=3))
        from dtsurv.learners import SchemaFingerprintMismatch

        bad = FeatureVector(FeatureSchema(("a", "b", "c")), np.zeros(3))
        with pytest.raises(SchemaFingerprintMismatch):
            model.predict_probability(bad)
