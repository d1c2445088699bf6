import math
from fractions import Fraction

import numpy as np
import pytest

from bilap.asymptotics import (
    BOTTOM_STATES,
    EXPONENTIAL,
    LOG_CORRECTED,
    POWER,
    TAU_SIGMA,
    TOP_STATES,
    auxiliary_variables,
    classify_case,
    fit_exponent,
    leading_constant,
    predict_e_leading,
    resonance_report,
)
from bilap.helpers import const
from bilap.helpers.exceptions import (
    DivergenceMismatch,
    DomainError,
    IllConditioned,
    InsufficientData,
    MissingIngredient,
)
from bilap.spectral_solver import (
    DivergenceVerdict,
    EdgeState,
    EigenResult,
    ThresholdIntegral,
    ThresholdReport,
    bottom_state,
    top_state,
)


def make_report(d=1, n_bottom=0, n_top=0, **values) -> ThresholdReport:
    k_bottom, k_top = 2 * n_bottom + d, 2 * n_top + d
    defaults = {
        "mu_lower": 0.0,
        "mu_upper": 0.0,
        "c_v": 2.0 / math.pi,
        "C_v": 1.0 / (math.pi * math.sqrt(8.0)),
        "hat_c_v": math.inf,
        "hat_C_v": math.inf,
    }
    defaults.update(values)
    return ThresholdReport(
        d=d,
        n_bottom=n_bottom,
        n_top=n_top,
        bottom_class=bottom_state(k_bottom),
        top_class=top_state(k_top),
        **defaults,
    )


def predicted(report, edge):
    return leading_constant(report, classify_case(report, edge))


class TestClassifyCase:
    @pytest.mark.parametrize("k", range(1, 13))
    def test_table_is_total(self, k):
        report = make_report(d=k % 2 or 2, n_bottom=(k - (k % 2 or 2)) // 2, n_top=(k - (k % 2 or 2)) // 2)

        assert k == classify_case(report, const.BOTTOM).k
        assert k == classify_case(report, const.TOP).k

    @pytest.mark.parametrize(
        "d, n, kind, exponent",
        [
            (1, 0, POWER, Fraction(1, 3)),
            (2, 0, LOG_CORRECTED, Fraction(1)),
            (4, 0, EXPONENTIAL, None),
            (2, 3, TAU_SIGMA, Fraction(1, 2)),
            (1, 4, POWER, Fraction(1, 4)),
            (2, 4, POWER, Fraction(1, 2)),
        ],
    )
    def test_bottom_families(self, d, n, kind, exponent):
        case = classify_case(make_report(d=d, n_bottom=n), const.BOTTOM)

        assert kind == case.kind
        assert exponent == case.exponent

    @pytest.mark.parametrize(
        "d, kind, power",
        [(1, POWER, Fraction(1, 2)), (2, EXPONENTIAL, Fraction(1)), (4, TAU_SIGMA, Fraction(1)), (5, POWER, Fraction(1, 2))],
    )
    def test_top_families(self, d, kind, power):
        case = classify_case(make_report(d=d), const.TOP)

        assert kind == case.kind
        assert power == case.observable_power

    def test_family_string(self):
        case = classify_case(make_report(), const.BOTTOM)

        assert "(-e)^(1/4) = c_1*(mu-mu_o)^(1/3)" == case.family
        assert "odd" == case.parity

    def test_unknown_edge(self):
        with pytest.raises(DomainError):
            classify_case(make_report(), "middle")


class TestLeadingConstant:
    def test_delta_bottom_in_one_dimension(self):
        pred = predicted(make_report(), const.BOTTOM)

        assert pytest.approx(2.0 ** (-1.0 / 3.0), rel=1e-14) == pred.leading_constant
        assert Fraction(4, 3) == pred.gap_exponent
        assert pytest.approx(2.0 ** (-4.0 / 3.0), rel=1e-14) == pred.gap_prefactor
        assert 0.0 == pred.threshold

    def test_delta_top_in_one_dimension(self):
        pred = predicted(make_report(), const.TOP)

        assert pytest.approx(1.0 / math.sqrt(8.0), rel=1e-14) == pred.leading_constant
        assert Fraction(2) == pred.gap_exponent
        assert pytest.approx(0.125, rel=1e-14) == pred.gap_prefactor

    def test_delta_bottom_in_two_dimensions(self):
        pred = predicted(make_report(d=2), const.BOTTOM)

        assert pytest.approx(0.25, rel=1e-14) == pred.leading_constant
        assert pred.has_log_correction

    def test_resonance_constants_and_morse_variant(self):
        pred = predicted(make_report(n_bottom=2, mu_lower=0.25, c_v=32.0 / math.pi), const.BOTTOM)

        assert pytest.approx(4.0, rel=1e-14) == pred.leading_constant
        assert pytest.approx(8.0, rel=1e-14) == pred.morse_constant
        assert 0.25 == pred.threshold
        assert pytest.approx(4096.0, rel=1e-12) == pred.to_json_dict()["morse_gap_prefactor"]

    def test_exponential_constant_is_unknown(self):
        pred = predicted(make_report(d=4), const.BOTTOM)

        assert not pred.multiplicative_constant_known
        assert pred.gap_prefactor is None

    def test_missing_hat_c_v(self):
        report = make_report(n_bottom=4, mu_lower=0.5)

        with pytest.raises(MissingIngredient):
            predicted(report, const.BOTTOM)

    def test_missing_mu_upper(self):
        with pytest.raises(MissingIngredient):
            predicted(make_report(d=3), const.TOP)

    def test_prediction_json(self):
        data = predicted(make_report(), const.TOP).to_json_dict()

        assert "C_1" == data["case"]["constant"]
        assert 2.0 == data["gap_exponent"]


class TestPredictE:
    def test_below_the_band(self):
        report = make_report()

        e = predict_e_leading(predicted(report, const.BOTTOM), 1e-3, report)

        assert pytest.approx(-(2.0 ** (-4.0 / 3.0)) * 1e-4, rel=1e-12) == e

    def test_above_the_band(self):
        report = make_report()

        e = predict_e_leading(predicted(report, const.TOP), -1e-3, report)

        assert pytest.approx(1.25e-7, rel=1e-7) == e - 4.0

    def test_log_corrected_family(self):
        report = make_report(d=2)

        e = predict_e_leading(predicted(report, const.BOTTOM), 0.01, report)

        assert pytest.approx(-(0.01 ** 2) / 16.0, rel=1e-12) == e

    def test_exponential_family_uses_unit_constant(self):
        report = make_report(d=4)
        pred = predicted(report, const.BOTTOM)
        mu = 0.5

        e = predict_e_leading(pred, mu, report)

        assert pytest.approx(-math.exp(-2.0 / (pred.leading_constant * mu)), rel=1e-12) == e

    def test_at_threshold(self):
        report = make_report(d=2)

        assert 16.0 == predict_e_leading(predicted(report, const.TOP), 0.0, report)

    def test_wrong_side(self):
        report = make_report(n_bottom=2, mu_lower=0.25, c_v=32.0 / math.pi)

        with pytest.raises(DomainError):
            predict_e_leading(predicted(report, const.BOTTOM), 0.1, report)


class TestAuxiliaryVariables:
    def test_bottom_uses_square_root(self):
        case = classify_case(make_report(d=2, n_bottom=3), const.BOTTOM)

        variables = auxiliary_variables(case, 1e-4)

        assert pytest.approx(1e-2) == variables["tau"]
        assert pytest.approx(1e-4 * math.log(100.0)) == variables["theta"]
        assert pytest.approx(math.sqrt(1.0 / math.log(100.0))) == variables["sigma"]
        assert pytest.approx(math.log(math.log(100.0)) / math.log(100.0)) == variables["eta"]

    def test_top_uses_coupling(self):
        case = classify_case(make_report(d=4), const.TOP)

        assert pytest.approx(0.1) == auxiliary_variables(case, 0.1)["tau"]

    def test_outside_unit_interval(self):
        case = classify_case(make_report(d=4), const.TOP)

        with pytest.raises(DomainError):
            auxiliary_variables(case, 1.0)


class TestFitExponent:
    ladder = [0.1 * 2.0 ** -j for j in range(8)]

    def test_power_law(self):
        data = [(mu, 0.3 * mu ** (4.0 / 3.0)) for mu in self.ladder]

        fit = fit_exponent(data, const.BOTTOM, 0.0)

        assert POWER == fit.model
        assert pytest.approx(4.0 / 3.0, rel=1e-10) == fit.exponent_hat
        assert pytest.approx(0.3, rel=1e-10) == fit.prefactor_hat
        assert pytest.approx(1.0) == fit.r_squared
        assert 8 == fit.n_points

    def test_power_law_above_threshold(self):
        threshold = -0.5
        data = [(threshold - g, 2.0 * g ** 2) for g in self.ladder]

        fit = fit_exponent(data, const.TOP, threshold)

        assert pytest.approx(2.0, rel=1e-10) == fit.exponent_hat
        assert pytest.approx((self.ladder[-1], self.ladder[0])) == fit.window

    def test_exponential_family(self):
        case = classify_case(make_report(d=4), const.BOTTOM)
        mus = np.linspace(0.2, 1.0, 8)
        data = [(mu, (2.0 * math.exp(-1.0 / (0.5 * mu))) ** 2) for mu in mus]

        fit = fit_exponent(data, const.BOTTOM, 0.0, case)

        assert EXPONENTIAL == fit.model
        assert pytest.approx(0.5, rel=1e-9) == fit.exponent_hat
        assert pytest.approx(2.0, rel=1e-9) == fit.prefactor_hat

    def test_log_corrected_family(self):
        case = classify_case(make_report(d=2), const.BOTTOM)
        g = np.array([0.5 * 2.0 ** -j for j in range(8)])
        observable = 0.25 * g - 0.1 * g ** 2 * np.log(g) + 0.05 * g ** 2
        data = list(zip(g, observable ** 2))

        fit = fit_exponent(data, const.BOTTOM, 0.0, case)

        assert pytest.approx(0.25, rel=1e-8) == fit.log_corrected["leading"]
        assert pytest.approx(0.1, rel=1e-6) == fit.log_corrected["log_term"]
        assert pytest.approx(0.05, rel=1e-6) == fit.log_corrected["quadratic"]

    def test_needs_enough_points(self):
        with pytest.raises(InsufficientData):
            fit_exponent([(mu, mu) for mu in self.ladder[:5]], const.BOTTOM, 0.0)

    def test_unconverged_results_are_skipped(self):
        data = [
            EigenResult(
                mu=mu, side=const.BELOW_ZERO, e=-mu, gap=mu, residual=1e-6, bracket=(-mu, -mu), iterations=1,
                grid_N=8, method=const.GRID_METHOD,
            )
            for mu in self.ladder
        ]

        with pytest.raises(InsufficientData):
            fit_exponent(data, const.BOTTOM, 0.0)

    def test_identical_couplings(self):
        with pytest.raises(IllConditioned):
            fit_exponent([(0.1, 0.01)] * 6, const.BOTTOM, 0.0)

    def test_window_on_wrong_side(self):
        with pytest.raises(DomainError):
            fit_exponent([(mu, mu) for mu in self.ladder], const.BOTTOM, 0.05)


def verdict(which, divergent):
    return DivergenceVerdict(
        which=which, divergent=divergent, expected_divergent=divergent, levels=[8, 16, 32, 64], values=[], growth=[]
    )


class TestResonanceReport:
    def test_strings_without_verdicts(self):
        report = resonance_report(make_report(n_bottom=2, mu_lower=0.25))

        assert "0-energy resonance (f ∉ L²)" == report.bottom
        assert "no threshold state at 4d²" == report.top
        assert report.bottom_square_integrable is None

    def test_every_state_has_a_string(self):
        for state in EdgeState:
            assert state in BOTTOM_STATES
            assert state in TOP_STATES

    def test_consistent_verdicts(self):
        verdicts = {
            ThresholdIntegral.bottom_squared: verdict(ThresholdIntegral.bottom_squared, True),
            ThresholdIntegral.top_squared: verdict(ThresholdIntegral.top_squared, True),
        }

        report = resonance_report(make_report(), verdicts)

        assert report.bottom_square_integrable is False
        assert 2 == len(report.details)

    def test_mismatch(self):
        verdicts = {
            ThresholdIntegral.bottom_squared: verdict(ThresholdIntegral.bottom_squared, False),
            ThresholdIntegral.top_squared: verdict(ThresholdIntegral.top_squared, True),
        }

        with pytest.raises(DivergenceMismatch):
            resonance_report(make_report(), verdicts)
