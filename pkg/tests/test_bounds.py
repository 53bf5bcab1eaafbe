import math
from fractions import Fraction

import numpy as np
import pytest

from sada.bounds import (
    BoundsError,
    ErrorModel,
    UndefinedModelError,
    bounds_report,
    conflict_removed_bound,
    cut_error_bound,
    cut_error_posterior,
    expected_cut_error,
    merge_counts,
    merge_delta_threshold,
    merge_gamma_threshold,
    merge_precision_condition,
    min_delta_for_recall,
    redundancy_removed_bound,
)

from oracles import cut_expectation_exact, cut_posterior_exact, mc_cut_error, mc_merge_counts

# reference scale used throughout: 100 variables at average in-degree 1.25
AT_SCALE = dict(n=100, d=1.25, alpha=0.05, beta=0.05)

# small model whose 64 crossing pairs keep exact rational sums tractable
SMALL = dict(n=20, n1=8, n2=8, e=25, alpha=0.05, beta=0.05)

# calibrated false-edge rate for the 0.0404 recall-threshold check
CALIBRATED_R = 0.1

PRECISION_CASE = dict(n=100, P=0.5, r=0.149, e1=56.25, e2=56.25, ec=12.5,
              f1=2823.75, f2=2823.75, fc=77.5)


class TestErrorModel:
    def test_e_derived_from_degree(self):
        m = ErrorModel(**AT_SCALE)
        assert m.e == 125
        assert m.f == 9775

    def test_degree_derived_from_e(self):
        m = ErrorModel(n=20, e=25)
        assert m.d == pytest.approx(1.25)
        assert m.f == 355

    def test_pair_identity_enforced(self):
        with pytest.raises(BoundsError):
            ErrorModel(n=4, e=10, f=5)

    def test_e_exceeding_pairs_rejected(self):
        with pytest.raises(BoundsError):
            ErrorModel(n=3, e=7)

    def test_side_sizes_must_fit(self):
        with pytest.raises(BoundsError):
            ErrorModel(n=10, n1=6, n2=5)

    def test_probability_ranges(self):
        with pytest.raises(BoundsError):
            ErrorModel(n=10, alpha=1.5)
        with pytest.raises(BoundsError):
            ErrorModel(n=10, r=-0.1)

    def test_negative_margin_rejected(self):
        with pytest.raises(BoundsError):
            ErrorModel(n=10, delta=-0.01)

    def test_f_without_e_rejected(self):
        with pytest.raises(BoundsError):
            ErrorModel(n=10, f=50)


class TestCutErrorPosterior:
    def test_point_mass_without_misses(self):
        m = ErrorModel(**{**SMALL, "beta": 0.0})
        assert cut_error_posterior(m, 0) == 1.0
        assert cut_error_posterior(m, 3) == 0.0

    def test_normalization(self):
        m = ErrorModel(**SMALL)
        total = sum(cut_error_posterior(m, i) for i in range(65))
        assert total == pytest.approx(1.0, abs=1e-12)

    def test_matches_exact_rational_summation(self):
        m = ErrorModel(**SMALL)
        for i in (0, 1, 2, 5):
            want = float(cut_posterior_exact(64, i, 25, 355, Fraction(1, 20), Fraction(1, 20)))
            assert cut_error_posterior(m, i) == pytest.approx(want, rel=1e-12)

    def test_frozen_values(self):
        m = ErrorModel(**SMALL)
        assert cut_error_posterior(m, 0) == pytest.approx(0.78916944269495182, rel=1e-12)
        assert cut_error_posterior(m, 1) == pytest.approx(0.18720105386388775, rel=1e-12)

    def test_count_out_of_range(self):
        m = ErrorModel(**SMALL)
        with pytest.raises(BoundsError):
            cut_error_posterior(m, 65)
        with pytest.raises(BoundsError):
            cut_error_posterior(m, -1)

    def test_degenerate_models_rejected(self):
        full = ErrorModel(n=20, e=380, n1=8, n2=8)  # f = 0
        with pytest.raises(UndefinedModelError):
            cut_error_posterior(full, 0)
        certain = ErrorModel(**{**SMALL, "alpha": 1.0})
        with pytest.raises(UndefinedModelError):
            cut_error_posterior(certain, 0)

    def test_missing_sides_reported(self):
        with pytest.raises(UndefinedModelError):
            cut_error_posterior(ErrorModel(n=20, e=25), 0)


class TestExpectedCutError:
    def test_matches_exact_rational_summation(self):
        m = ErrorModel(**SMALL)
        want = float(cut_expectation_exact(64, 25, 355, Fraction(1, 20), Fraction(1, 20)))
        assert expected_cut_error(m) == pytest.approx(want, rel=1e-12)
        assert expected_cut_error(m) == pytest.approx(0.2363367799113737, rel=1e-12)

    def test_zero_without_misses(self):
        assert expected_cut_error(ErrorModel(**{**SMALL, "beta": 0.0})) == 0.0

    def test_never_exceeds_bound(self):
        rng = np.random.default_rng(5)
        for _ in range(200):
            n = int(rng.integers(4, 40))
            pairs = n * n - n
            e = int(rng.integers(1, pairs))
            n1 = int(rng.integers(1, n))
            n2 = int(rng.integers(1, n - n1 + 1))
            m = ErrorModel(n=n, e=e, n1=n1, n2=n2,
                           alpha=float(rng.uniform(0, 0.5)),
                           beta=float(rng.uniform(0, 0.5)))
            assert expected_cut_error(m) <= cut_error_bound(m)

    def test_matches_monte_carlo(self):
        # rejection-sampled desk check; the acceptance suite runs 1e5 trials
        m = ErrorModel(n=20, e=25, n1=3, n2=3)
        mean, se = mc_cut_error(9, 25, 355, 0.05, 0.05, 20_000,
                                np.random.default_rng(81), batch=100_000)
        assert abs(expected_cut_error(m) - mean) <= 3 * se


class TestCutErrorBound:
    def test_reference_value(self):
        assert cut_error_bound(ErrorModel(**AT_SCALE)) == 3

    def test_floor_without_misses(self):
        assert cut_error_bound(ErrorModel(**{**AT_SCALE, "beta": 0.0})) == 1

    def test_degenerate_models_rejected(self):
        with pytest.raises(UndefinedModelError):
            cut_error_bound(ErrorModel(n=20, e=380))


class TestMergeCounts:
    def test_perfect_recall_no_noise(self):
        m = ErrorModel(n=100)
        e_m, f_m = merge_counts(m, e1=50, e2=40, ec=10, f1=100, f2=90, fc=20,
                                R1=1.0, R2=1.0, r1=0.0, r2=0.0)
        assert e_m == 100
        assert f_m == 0

    def test_zero_recall(self):
        m = ErrorModel(n=100)
        e_m, _ = merge_counts(m, e1=50, e2=40, ec=10, f1=1, f2=1, fc=1,
                              R1=0.0, R2=0.0, r1=0.0, r2=0.0)
        assert e_m == 0

    def test_model_fields_fill_in(self):
        m = ErrorModel(**PRECISION_CASE, R=0.9)
        e_m, f_m = merge_counts(m)
        direct = merge_counts(m, e1=56.25, e2=56.25, ec=12.5,
                              f1=2823.75, f2=2823.75, fc=77.5,
                              R1=0.9, R2=0.9, r1=0.149, r2=0.149)
        assert (e_m, f_m) == direct

    def test_missing_inputs_reported(self):
        with pytest.raises(UndefinedModelError):
            merge_counts(ErrorModel(n=100))

    def test_matches_monte_carlo(self):
        rng = np.random.default_rng(4)
        m = ErrorModel(n=100)
        e_m, f_m = merge_counts(m, e1=30, e2=25, ec=8, f1=60, f2=50, fc=12,
                                R1=0.8, R2=0.6, r1=0.1, r2=0.2)
        (me, se_e), (mf, se_f) = mc_merge_counts(
            30, 25, 8, 60, 50, 12, 0.8, 0.6, 0.1, 0.2, 20_000, rng)
        assert abs(e_m - me) <= 3 * se_e
        assert abs(f_m - mf) <= 3 * se_f


class TestMergePrecisionCondition:
    def test_probe_thresholds(self):
        m = ErrorModel(**PRECISION_CASE)
        assert merge_delta_threshold(m) == pytest.approx(0.078615379999999999, rel=1e-12)
        assert merge_gamma_threshold(m) == pytest.approx(0.0019900904782421372, rel=1e-12)

    def test_reference_margins_accepted(self):
        by_delta = ErrorModel(**PRECISION_CASE, delta=0.08, gamma=0.0)
        assert merge_precision_condition(by_delta)
        by_gamma = ErrorModel(**PRECISION_CASE, delta=0.0, gamma=0.002)
        assert merge_precision_condition(by_gamma)

    def test_both_margins_below_reject(self):
        m = ErrorModel(**PRECISION_CASE, delta=0.07, gamma=0.0019)
        assert not merge_precision_condition(m)

    def test_perfect_precision_divides_by_zero(self):
        m = ErrorModel(**{**PRECISION_CASE, "P": 1.0}, delta=0.5, gamma=0.5)
        with pytest.raises(UndefinedModelError):
            merge_precision_condition(m)


class TestRemovalBounds:
    def test_vanish_with_their_rates(self):
        base = dict(n=100, d=1.25, nc=10, r=0.01)
        assert conflict_removed_bound(ErrorModel(**base, epsilon=0.0)) == 0.0
        assert redundancy_removed_bound(ErrorModel(**base, beta=0.0)) == 0.0

    def test_conflict_bound_cross_check(self):
        m = ErrorModel(n=100, d=1.25, nc=10, r=0.01, epsilon=0.05)
        assert conflict_removed_bound(m) == pytest.approx(0.12639387498053528, rel=1e-12)

    def test_redundancy_bound_cross_check(self):
        m = ErrorModel(n=100, d=1.25, nc=10, r=0.01, beta=0.05)
        assert redundancy_removed_bound(m) == pytest.approx(0.12639387498053528, rel=1e-12)


class TestMinDeltaForRecall:
    def test_reference_value_with_calibrated_rate(self):
        m = ErrorModel(**AT_SCALE, epsilon=0.05, nc=10, r=CALIBRATED_R)
        got = min_delta_for_recall(m)
        assert got == pytest.approx(0.040422301999688562, rel=1e-12)
        assert abs(got - 0.0404) <= 5e-4

    def test_only_ceiling_survives_without_error_rates(self):
        m = ErrorModel(**{**AT_SCALE, "beta": 0.0}, epsilon=0.0, nc=10, r=CALIBRATED_R)
        assert min_delta_for_recall(m) == pytest.approx(1 / 125, rel=1e-12)

    def test_edgeless_model_rejected(self):
        m = ErrorModel(n=100, e=0, nc=10, r=0.1, epsilon=0.05)
        with pytest.raises(UndefinedModelError):
            min_delta_for_recall(m)

    def test_monotone_in_degree_and_cut_size(self):
        # the degree field moves only the path-count growth term here
        degrees = [0.75, 1.0, 1.25, 1.5, 1.75]
        values = [min_delta_for_recall(
            ErrorModel(n=100, e=125, d=d, epsilon=0.05, nc=10, r=CALIBRATED_R))
            for d in degrees]
        assert all(a < b for a, b in zip(values, values[1:]))
        sizes = [5, 8, 11, 14, 17, 20]
        values = [min_delta_for_recall(
            ErrorModel(**AT_SCALE, epsilon=0.05, nc=nc, r=CALIBRATED_R))
            for nc in sizes]
        assert all(a < b for a, b in zip(values, values[1:]))


class TestReport:
    def test_full_model_reports_everything(self):
        m = ErrorModel(**AT_SCALE, n1=45, n2=45, nc=10, r=CALIBRATED_R,
                       epsilon=0.05, P=0.5, delta=0.08, gamma=0.002,
                       e1=56.25, e2=56.25, ec=12.5,
                       f1=2823.75, f2=2823.75, fc=77.5, R=0.9)
        report = bounds_report(m)
        assert report["cut_error_bound"] == 3
        assert report["merge_precision_condition"] is True
        assert "expected_true_edges_after_merge" in report

    def test_sparse_model_reports_subset(self):
        report = bounds_report(ErrorModel(**AT_SCALE))
        assert report["cut_error_bound"] == 3
        assert "min_delta_for_recall" not in report
