from fractions import Fraction

import json

import numpy as np
import pytest

from dtsurv import (
    FeatureSchema,
    FeatureVector,
    ForestParams,
    MlpParams,
    TreeParams,
    expand,
    load_model,
    save_model,
    train_forest,
    train_life_table,
    train_mlp,
    train_tree,
)
from dtsurv.learners import CorruptFile, SchemaFingerprintMismatch, VersionMismatch

from conftest import geometric_dataset, make_dataset, random_dataset


class TestLifeTable:
    def test_toy_rows_hazards(self):
        d = make_dataset([(3, 1, [60, 1951]), (3, 0, [40, 1950])], ("a", "b"))
        model = train_life_table(expand(d))
        assert model.hazards.tolist() == [0.0, 0.0, 0.0, 0.5]

    def test_all_censored_zero_hazard(self):
        d = make_dataset([(4, 0), (2, 0), (7, 0)])
        model = train_life_table(expand(d))
        assert np.array_equal(model.hazards, np.zeros(8))

    def test_geometric_concentration(self):
        d = geometric_dataset(np.random.default_rng(55), 20_000, p=0.2)
        e = expand(d)
        model = train_life_table(e)
        months = e.months()
        for t in range(int(months.max()) + 1):
            if int((months == t).sum()) >= 1000:
                assert model.hazards[t] == pytest.approx(0.2, abs=0.02)

    def test_reproduces_death_fraction_exactly(self):
        # rational-arithmetic comparison against raw counts
        rng = np.random.default_rng(19)
        for _ in range(30):
            d = random_dataset(rng)
            e = expand(d)
            model = train_life_table(e)
            months = e.months()
            for t in range(int(months.max()) + 1):
                at_risk = int((months == t).sum())
                deaths = int(e.targets[months == t].sum())
                assert model.hazards[t] == float(Fraction(deaths, at_risk))

    def test_beyond_horizon_repeats_last_hazard(self):
        d = make_dataset([(2, 1), (2, 1)])
        model = train_life_table(expand(d))
        far = model.predict_matrix(np.array([[0.0, 0.0, 99.0]]))[0]
        assert far == model.hazards[-1] == 1.0


def trained_models():
    d = random_dataset(np.random.default_rng(41), n_patients=50, max_duration=8)
    e = expand(d)
    return {
        "tree": train_tree(e, TreeParams(max_depth=4, min_samples_split=3)),
        "forest": train_forest(e, ForestParams(n_trees=5, max_depth=4, seed=6)),
        "mlp": train_mlp(
            e, MlpParams(hidden_widths=(6, 4), dropout_rates=(0.1, 0.1), epochs=4, batch_size=32, seed=2)
        ),
        "lifetable": train_life_table(e),
    }, e


class TestSaveLoad:
    def test_round_trip_predicts_identically(self, tmp_path):
        models, e = trained_models()
        probes = np.random.default_rng(42).normal(size=(10_000, e.matrix.shape[1]))
        for name, model in models.items():
            path = tmp_path / f"{name}.json"
            save_model(model, path)
            loaded = load_model(path)
            assert type(loaded) is type(model)
            assert loaded.schema == model.schema
            assert np.array_equal(loaded.predict_matrix(probes), model.predict_matrix(probes))
            assert loaded.train_stats == model.train_stats

    def test_version_byte_altered(self, tmp_path):
        models, _ = trained_models()
        path = tmp_path / "m.json"
        save_model(models["lifetable"], path)
        doc = json.loads(path.read_text())
        doc["version"] = 2
        path.write_text(json.dumps(doc))
        with pytest.raises(VersionMismatch):
            load_model(path)

    def test_schema_mismatch_at_predict(self, tmp_path):
        models, _ = trained_models()
        path = tmp_path / "m.json"
        save_model(models["forest"], path)
        loaded = load_model(path)
        other = FeatureSchema(("alien", "schema", "month"))
        with pytest.raises(SchemaFingerprintMismatch):
            loaded.predict_probability(FeatureVector(other, np.zeros(3)))

    def test_corrupt_file_variants(self, tmp_path):
        path = tmp_path / "m.json"
        path.write_text("{not json")
        with pytest.raises(CorruptFile):
            load_model(path)

        path.write_text(json.dumps({"format": "something-else", "version": 1}))
        with pytest.raises(CorruptFile):
            load_model(path)

        models, _ = trained_models()
        save_model(models["mlp"], path)
        doc = json.loads(path.read_text())
        del doc["payload"]["weights"]
        path.write_text(json.dumps(doc))
        with pytest.raises(CorruptFile):
            load_model(path)

    def test_tampered_schema_fingerprint(self, tmp_path):
        models, _ = trained_models()
        path = tmp_path / "m.json"
        save_model(models["tree"], path)
        doc = json.loads(path.read_text())
        doc["schema"][0] = "renamed"
        path.write_text(json.dumps(doc))
        with pytest.raises(CorruptFile):
            load_model(path)

    def test_format_is_self_describing(self, tmp_path):
        models, _ = trained_models()
        path = tmp_path / "m.json"
        save_model(models["forest"], path)
        doc = json.loads(path.read_text())
        assert doc["format"] == "dtsurv-model"
        assert doc["kind"] == "forest"
        assert doc["schema"][-1] == "month"
        assert "params" in doc and "payload" in doc
