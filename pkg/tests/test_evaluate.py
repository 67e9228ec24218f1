from fractions import Fraction

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from dtsurv import (
    MonthGrid,
    agreement,
    eligible_for_horizon,
    evaluate_models,
    expand,
    horizon_scores,
    kaplan_meier,
    predict_hazard_curve,
    roc_auc,
    score_correlation,
    survival_from_hazard,
    survived_label,
    train_life_table,
)
from dtsurv.evaluate import (
    HorizonPrediction,
    PatientSetMismatch,
    SingleClassLabels,
    ZeroVariance,
)

from conftest import make_dataset, random_dataset


def brute_force_auc(scores, labels) -> Fraction:
    """All-pairs concordance count in exact rational arithmetic."""
    positives = [Fraction(s).limit_denominator(10**12) if isinstance(s, float) else s
                 for s, l in zip(scores, labels) if l]
    negatives = [Fraction(s).limit_denominator(10**12) if isinstance(s, float) else s
                 for s, l in zip(scores, labels) if not l]
    total = Fraction(0)
    for p in positives:
        for q in negatives:
            if p > q:
                total += 1
            elif p == q:
                total += Fraction(1, 2)
    return total / (len(positives) * len(negatives))


class TestEligibility:
    def test_alive_beyond_horizon_is_eligible_and_survived(self):
        r = make_dataset([(8, 0)]).records[0]
        assert eligible_for_horizon(r, 6)
        assert survived_label(r, 6)

    def test_dead_before_horizon_is_eligible_and_died(self):
        r = make_dataset([(3, 1)]).records[0]
        assert eligible_for_horizon(r, 6)
        assert not survived_label(r, 6)

    def test_censored_before_horizon_is_ineligible(self):
        r = make_dataset([(3, 0)]).records[0]
        assert not eligible_for_horizon(r, 6)

    def test_partition_every_patient_exactly_one_side(self):
        rng = np.random.default_rng(6)
        for _ in range(100):
            d = random_dataset(rng)
            for h in (0, 3, 6):
                for r in d:
                    eligible = eligible_for_horizon(r, h)
                    censored_before = (not r.event) and r.duration_months < h
                    assert eligible != censored_before


class TestHorizonScores:
    def test_scores_are_curve_values(self):
        d = make_dataset([(9, 1), (2, 0), (9, 0), (5, 1)])
        model = train_life_table(expand(d))
        grid = MonthGrid(9)
        scores = horizon_scores(model, d, grid, horizons=(6,))
        eligible = [r for r in d if eligible_for_horizon(r, 6)]
        assert [p.patient_id for p in scores[6]] == [r.patient_id for r in eligible]
        for p, r in zip(scores[6], eligible):
            curve = survival_from_hazard(predict_hazard_curve(model, r.covariates, grid))
            assert p.score == curve.at(6)

    def test_threshold_is_inclusive(self):
        p = HorizonPrediction("a", 6, 0.5)
        assert p.predicted_survives
        assert not HorizonPrediction("a", 6, 0.4999).predicted_survives

    def test_example_curve_verdicts(self):
        # S(6)=.89, S(12)=.83, S(60)=.50 all predict survival
        for h, s in ((6, 0.89), (12, 0.83), (60, 0.50)):
            assert HorizonPrediction("a", h, s).predicted_survives

    def test_certain_death_model_predicts_death_everywhere(self):
        d = make_dataset([(0, 1), (0, 1)])
        model = train_life_table(expand(d))  # hazard 1 at month 0, so S == 0
        scores = horizon_scores(model, d, MonthGrid(6), horizons=(0, 6))
        assert all(not p.predicted_survives for h in (0, 6) for p in scores[h])

    def test_horizon_beyond_grid_rejected(self):
        d = make_dataset([(3, 1)])
        model = train_life_table(expand(d))
        with pytest.raises(ValueError):
            horizon_scores(model, d, MonthGrid(3), horizons=(6,))


class TestRocAuc:
    def test_four_point_example(self):
        assert roc_auc([0.1, 0.4, 0.35, 0.8], [0, 0, 1, 1]) == 0.75

    def test_perfect_separation(self):
        assert roc_auc([0.1, 0.2, 0.8, 0.9], [0, 0, 1, 1]) == 1.0

    def test_single_class_raises(self):
        with pytest.raises(SingleClassLabels):
            roc_auc([0.1, 0.2], [1, 1])

    def test_non_finite_scores_rejected(self):
        with pytest.raises(ValueError, match="finite"):
            roc_auc([0.1, float("nan")], [0, 1])

    def test_matches_brute_force_exactly(self):
        rng = np.random.default_rng(13)
        for _ in range(60):
            n = int(rng.integers(2, 120))
            scores = rng.choice([0.1, 0.25, 0.5, 0.75, 0.9], size=n)
            labels = rng.random(n) < 0.5
            if labels.all() or not labels.any():
                continue
            expected = brute_force_auc(scores.tolist(), labels.tolist())
            assert roc_auc(scores, labels) == float(expected)

    @given(
        st.lists(st.tuples(st.integers(0, 20), st.booleans()), min_size=2, max_size=60).filter(
            lambda rows: any(l for _, l in rows) and any(not l for _, l in rows)
        )
    )
    @settings(max_examples=150, deadline=None)
    def test_monotone_transform_invariance(self, rows):
        scores = np.array([float(s) for s, _ in rows])
        labels = [l for _, l in rows]
        base = roc_auc(scores, labels)
        assert roc_auc(np.exp(scores / 7.0), labels) == pytest.approx(base, abs=1e-12)
        assert roc_auc(3.0 * scores + 11.0, labels) == pytest.approx(base, abs=1e-12)


def preds(horizon, pairs):
    return [HorizonPrediction(pid, horizon, s) for pid, s in pairs]


class TestAgreement:
    def test_model_vs_itself(self):
        a = preds(6, [("a", 0.9), ("b", 0.2)])
        assert agreement(a, a) == 1.0

    def test_complementary_predictors(self):
        a = preds(6, [("a", 0.9), ("b", 0.2)])
        b = preds(6, [("a", 0.1), ("b", 0.8)])
        assert agreement(a, b) == 0.0

    def test_symmetry_on_random_scores(self):
        rng = np.random.default_rng(3)
        ids = [f"p{i}" for i in range(40)]
        a = preds(6, [(i, float(rng.random())) for i in ids])
        b = preds(6, [(i, float(rng.random())) for i in ids])
        assert agreement(a, b) == agreement(b, a)
        assert agreement(a, a) == 1.0

    def test_patient_mismatch_raises(self):
        a = preds(6, [("a", 0.9)])
        b = preds(6, [("b", 0.9)])
        with pytest.raises(PatientSetMismatch):
            agreement(a, b)
        with pytest.raises(PatientSetMismatch):
            agreement(a, preds(12, [("a", 0.9)]))


class TestScoreCorrelation:
    def test_identical_vectors(self):
        a = preds(6, [("a", 0.9), ("b", 0.2), ("c", 0.4)])
        assert score_correlation(a, a) == pytest.approx(1.0)

    def test_reflected_vector_anticorrelates(self):
        a = preds(6, [("a", 0.9), ("b", 0.2), ("c", 0.4)])
        b = [HorizonPrediction(p.patient_id, 6, 1.0 - p.score) for p in a]
        assert score_correlation(a, b) == pytest.approx(-1.0)

    def test_zero_variance_raises(self):
        a = preds(6, [("a", 0.5), ("b", 0.5)])
        b = preds(6, [("a", 0.9), ("b", 0.2)])
        with pytest.raises(ZeroVariance):
            score_correlation(a, b)


class TestKaplanMeier:
    def test_everyone_dies_at_zero(self):
        assert kaplan_meier([0, 0, 0], [1, 1, 1]).tolist() == [0.0]

    def test_hand_oracle_case(self):
        assert kaplan_meier([1, 2, 2, 3], [1, 1, 0, 1]).tolist() == [1.0, 0.75, 0.5, 0.0]

    def test_no_events_flat_one(self):
        assert kaplan_meier([4, 2, 7], [0, 0, 0]).tolist() == [1.0] * 8

    def test_matches_brute_force_risk_set_counting(self):
        rng = np.random.default_rng(10)
        for _ in range(100):
            n = int(rng.integers(1, 40))
            durations = rng.integers(0, 15, size=n)
            events = rng.random(n) < 0.6
            got = kaplan_meier(durations, events)
            survival = 1.0
            for month in range(int(durations.max()) + 1):
                at_risk = int((durations >= month).sum())
                deaths = int(((durations == month) & events).sum())
                if at_risk:
                    survival *= 1.0 - deaths / at_risk
                assert got[month] == pytest.approx(survival, abs=1e-15)


def test_life_table_curve_equals_kaplan_meier():
    # the central equivalence: covariate-free hazard model reproduces the
    # product-limit estimate at every month
    rng = np.random.default_rng(99)
    for _ in range(100):
        d = random_dataset(rng)
        model = train_life_table(expand(d))
        grid = MonthGrid.for_dataset(d)
        x = d.records[0].covariates
        curve = survival_from_hazard(predict_hazard_curve(model, x, grid))
        km = kaplan_meier(d.durations(), d.events())
        months = min(len(km), grid.horizon + 1)
        assert np.max(np.abs(curve.values[:months] - km[:months])) < 1e-12


class TestEvaluateModels:
    def test_report_cells_and_agreement(self, tmp_path):
        d = make_dataset([(9, 1), (2, 0), (9, 0), (5, 1), (7, 1), (8, 0)])
        model = train_life_table(expand(d))
        report = evaluate_models({"a": model, "b": model}, d, MonthGrid(9), horizons=(6,))
        by_key = {(c.model, c.metric): c for c in report.cells}
        assert by_key[("a|b", "agreement")].value == 1.0
        assert by_key[("a", "auc")].n == sum(eligible_for_horizon(r, 6) for r in d)
        path = tmp_path / "report.csv"
        report.write_csv(str(path))
        header = path.read_text().splitlines()[0]
        assert header == "model,horizon,metric,value,n"

    def test_single_class_cell_is_na(self):
        d = make_dataset([(9, 0), (8, 0), (7, 0)])  # every eligible patient survived
        model = train_life_table(expand(d))
        report = evaluate_models({"m": model}, d, MonthGrid(9), horizons=(6,))
        auc_cell = [c for c in report.cells if c.metric == "auc"][0]
        assert auc_cell.value is None
        assert auc_cell.n == 3
