"""
Leading-order absorption laws of the eigenvalue at the two thresholds.

With g = |μ - threshold| (threshold μ_o below the band, -μ^o above it) the eigenvalue
approaches the edge along one of the families below, selected by k = 2n + d at that edge.

    bottom, odd k     (-e)^{1/4}:  k=1 c_1 g^{1/3}, k=3 c_3 g, k=5 c_5 g, k=7 c_7 g^{1/3}, k>=9 c_9 g^{1/4}
    bottom, even k    (-e)^{1/2}:  k=2 c_2 μ (with -μ ln μ corrections), k=4 c e^{-1/(c_4 μ)},
                                   k=6 c_6 g, k=8 c_8 τσ, k>=10 c_10 g^{1/2}
    top, odd k        (e - 4d²)^{1/2}:  k=1 C_1 g, k=3 C_3 g, k>=5 C_5 g^{1/2}
    top, even k       e - 4d²:    k=2 c e^{1/(C_2 μ)}, k=4 C_4 τσ, k>=6 C_6 g

Only the leading term is predicted; the constant c of the exponential families is not known
and predictions use c = 1.
"""
import logging
import math
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Dict, List, Optional, Sequence, Tuple, Union

import numpy as np

from bilap.config import config
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
)

logger = logging.getLogger(__name__)

POWER = "power"
LOG_CORRECTED = "log_corrected"
EXPONENTIAL = "exponential"
TAU_SIGMA = "tau_sigma"


@dataclass(frozen=True)
class EdgeCase:
    edge: str
    k: int
    parity: str
    constant_name: str
    # observable = |e - edge|^observable_power
    observable_power: Fraction
    # exponent of g in the leading term, None for exponential families
    exponent: Optional[Fraction]
    kind: str

    @property
    def observable(self) -> str:
        if self.edge == const.BOTTOM:
            return "(-e)^(1/4)" if self.observable_power == Fraction(1, 4) else "(-e)^(1/2)"
        return "(e-4d^2)^(1/2)" if self.observable_power == Fraction(1, 2) else "e-4d^2"

    @property
    def family(self) -> str:
        variable = "(mu-mu_o)" if self.edge == const.BOTTOM else "|mu+mu^o|"
        if self.kind == EXPONENTIAL:
            sign = "-" if self.edge == const.BOTTOM else ""
            return f"{self.observable} = c*exp({sign}1/({self.constant_name}*mu))"
        if self.kind == TAU_SIGMA:
            return f"{self.observable} = {self.constant_name}*tau*sigma"
        term = f"{self.constant_name}*{variable}"
        if self.exponent != 1:
            term += f"^({self.exponent})"
        if self.kind == LOG_CORRECTED:
            term += " + O(mu^2 ln mu)"
        return f"{self.observable} = {term}"

    def to_json_dict(self) -> Dict:
        return {
            "edge": self.edge,
            "k": self.k,
            "parity": self.parity,
            "family": self.family,
            "constant": self.constant_name,
            "observable": self.observable,
            "observable_power": str(self.observable_power),
            "exponent": None if self.exponent is None else str(self.exponent),
            "kind": self.kind,
        }


def _bottom_case(k: int) -> Tuple[str, Fraction, Optional[Fraction], str]:
    if k % 2:
        power = Fraction(1, 4)
        if k >= 9:
            return "c_9", power, Fraction(1, 4), POWER
        return {
            1: ("c_1", power, Fraction(1, 3), POWER),
            3: ("c_3", power, Fraction(1), POWER),
            5: ("c_5", power, Fraction(1), POWER),
            7: ("c_7", power, Fraction(1, 3), POWER),
        }[k]
    power = Fraction(1, 2)
    if k >= 10:
        return "c_10", power, Fraction(1, 2), POWER
    return {
        2: ("c_2", power, Fraction(1), LOG_CORRECTED),
        4: ("c_4", power, None, EXPONENTIAL),
        6: ("c_6", power, Fraction(1), POWER),
        8: ("c_8", power, Fraction(1, 2), TAU_SIGMA),
    }[k]


def _top_case(k: int) -> Tuple[str, Fraction, Optional[Fraction], str]:
    if k % 2:
        power = Fraction(1, 2)
        if k >= 5:
            return "C_5", power, Fraction(1, 2), POWER
        return {1: ("C_1", power, Fraction(1), POWER), 3: ("C_3", power, Fraction(1), POWER)}[k]
    power = Fraction(1)
    if k >= 6:
        return "C_6", power, Fraction(1), POWER
    return {2: ("C_2", power, None, EXPONENTIAL), 4: ("C_4", power, Fraction(1), TAU_SIGMA)}[k]


def classify_case(report: ThresholdReport, edge: str) -> EdgeCase:
    """
    The expansion family at an edge; total over k >= 1
    :param report:
    :param edge: const.BOTTOM or const.TOP
    :return:
    """
    if edge not in const.SIDES:
        raise DomainError(f"unknown edge {edge!r}")
    k = report.k_bottom if edge == const.BOTTOM else report.k_top
    name, power, exponent, kind = (_bottom_case if edge == const.BOTTOM else _top_case)(k)
    return EdgeCase(
        edge=edge,
        k=k,
        parity="odd" if k % 2 else "even",
        constant_name=name,
        observable_power=power,
        exponent=exponent,
        kind=kind,
    )


@dataclass(frozen=True)
class AsymptoticPrediction:
    case: EdgeCase
    leading_constant: float
    # the constant re-derived with the exact (z/4)^n singular part of the Morse integrals
    morse_constant: float
    threshold: float
    multiplicative_constant_known: bool = True

    @property
    def observable(self) -> str:
        return self.case.observable

    @property
    def observable_power(self) -> Fraction:
        return self.case.observable_power

    @property
    def predicted_exponent(self) -> Optional[Fraction]:
        return self.case.exponent

    @property
    def has_log_correction(self) -> bool:
        return self.case.kind in (LOG_CORRECTED, TAU_SIGMA)

    @property
    def gap_exponent(self) -> Optional[Fraction]:
        """Exponent of |e - edge| in g"""
        if self.case.exponent is None:
            return None
        return self.case.exponent / self.case.observable_power

    @property
    def gap_prefactor(self) -> Optional[float]:
        if self.case.exponent is None:
            return None
        return self.leading_constant ** (1.0 / float(self.case.observable_power))

    @property
    def morse_gap_prefactor(self) -> Optional[float]:
        if self.case.exponent is None:
            return None
        return self.morse_constant ** (1.0 / float(self.case.observable_power))

    def to_json_dict(self) -> Dict:
        exponent = self.gap_exponent
        return {
            "case": self.case.to_json_dict(),
            "leading_constant": self.leading_constant,
            "morse_constant": self.morse_constant,
            "threshold": self.threshold,
            "predicted_exponent": None if self.predicted_exponent is None else str(self.predicted_exponent),
            "has_log_correction": self.has_log_correction,
            "gap_exponent": None if exponent is None else float(exponent),
            "gap_prefactor": self.gap_prefactor,
            "morse_gap_prefactor": self.morse_gap_prefactor,
            "multiplicative_constant_known": self.multiplicative_constant_known,
        }


def _require_positive(value: float, name: str, case: EdgeCase) -> float:
    if not (value > 0 and math.isfinite(value)):
        raise MissingIngredient(f"{case.constant_name} at k={case.k} needs a finite positive {name}, got {value}")
    return value


def _bottom_constants(report: ThresholdReport, case: EdgeCase) -> Tuple[float, float]:
    k = case.k
    c_v = _require_positive(report.c_v, "c_v", case)
    if k in (1, 2, 3, 4):
        value = {
            1: (math.pi * c_v / 4.0) ** (1.0 / 3.0),
            2: math.pi * c_v / 8.0,
            3: math.pi * c_v / 8.0,
            4: c_v / 8.0,
        }[k]
        return value, value
    mu_o = _require_positive(report.mu_lower, "mu_o", case)
    if k in (5, 6, 7, 8):
        base = 8.0 / (math.pi * c_v * mu_o ** 2)
        stated = {
            5: base,
            6: base,
            7: base ** (1.0 / 3.0),
            8: (8.0 / (c_v * mu_o ** 2)) ** 0.5,
        }[k]
        morse = {
            5: 2.0 * base,
            6: 4.0 * base,
            7: (4.0 * base) ** (1.0 / 3.0),
            8: (32.0 / (c_v * mu_o ** 2)) ** 0.5,
        }[k]
        return stated, morse
    hat_c_v = _require_positive(report.hat_c_v, "hat_c_v", case)
    value = (mu_o ** 2 * hat_c_v) ** (-0.25 if k % 2 else -0.5)
    return value, value


def _top_constants(report: ThresholdReport, case: EdgeCase) -> Tuple[float, float]:
    k = case.k
    big_c_v = _require_positive(report.C_v, "C_v", case)
    if k == 1:
        value = math.pi * big_c_v
    elif k == 2:
        value = big_c_v
    else:
        mu_up = _require_positive(report.mu_upper, "mu^o", case)
        if k == 3:
            value = 1.0 / (math.pi * big_c_v * mu_up ** 2)
        elif k == 4:
            value = 1.0 / (big_c_v * mu_up ** 2)
        else:
            hat_big_c_v = _require_positive(report.hat_C_v, "hat_C_v", case)
            value = (hat_big_c_v * mu_up ** 2) ** (-0.5 if k % 2 else -1.0)
    return value, value


def leading_constant(report: ThresholdReport, case: EdgeCase) -> AsymptoticPrediction:
    if case.edge == const.BOTTOM:
        stated, morse = _bottom_constants(report, case)
        threshold = report.mu_lower
    else:
        stated, morse = _top_constants(report, case)
        threshold = -report.mu_upper
    return AsymptoticPrediction(
        case=case,
        leading_constant=stated,
        morse_constant=morse,
        threshold=threshold,
        multiplicative_constant_known=case.kind != EXPONENTIAL,
    )


def auxiliary_variables(case: EdgeCase, g: float) -> Dict[str, float]:
    """
    τ, θ = -τ² ln τ, σ = (-1/ln τ)^{1/2}, η = -ln ln(1/τ) / ln τ, with τ = g^{1/2} below
    the band and τ = g above it; defined for 0 < τ < 1
    """
    tau = math.sqrt(g) if case.edge == const.BOTTOM else g
    if not 0.0 < tau < 1.0:
        raise DomainError(f"tau = {tau} is outside (0, 1)")
    log_tau = math.log(tau)
    return {
        "tau": tau,
        "theta": -tau * tau * log_tau,
        "sigma": math.sqrt(-1.0 / log_tau),
        "eta": -math.log(-log_tau) / log_tau,
    }


def _observable_prediction(pred: AsymptoticPrediction, mu: float, g: float) -> float:
    case = pred.case
    constant = pred.leading_constant
    if case.kind == EXPONENTIAL:
        return math.exp(-1.0 / (constant * abs(mu)))
    if case.kind == TAU_SIGMA:
        variables = auxiliary_variables(case, g)
        sigma = variables["sigma"] if case.edge == const.BOTTOM else variables["sigma"] ** 2
        return constant * variables["tau"] * sigma
    if case.kind == LOG_CORRECTED:
        return constant * mu
    return constant * g ** float(case.exponent)


def predict_e_leading(pred: AsymptoticPrediction, mu: float, report: ThresholdReport) -> float:
    """
    Leading-order e(μ); exponential families use c = 1
    :param pred:
    :param mu: on the discrete-spectrum side of the threshold, or at it
    :param report:
    :return:
    """
    edge = pred.case.edge
    band_top = 4.0 * report.d ** 2
    if edge == const.BOTTOM and mu < pred.threshold or edge == const.TOP and mu > pred.threshold:
        raise DomainError(f"mu = {mu} is on the wrong side of the {edge} threshold {pred.threshold}")
    g = abs(mu - pred.threshold)
    if g == 0.0:
        return 0.0 if edge == const.BOTTOM else band_top
    gap = _observable_prediction(pred, mu, g) ** (1.0 / float(pred.observable_power))
    return -gap if edge == const.BOTTOM else band_top + gap


@dataclass(frozen=True)
class FitResult:
    model: str
    exponent_hat: float
    prefactor_hat: float
    r_squared: float
    window: Tuple[float, float]
    n_points: int
    # least squares with the -μ ln μ correction for log-corrected families
    log_corrected: Optional[Dict[str, float]] = None

    def to_json_dict(self) -> Dict:
        return {
            "model": self.model,
            "exponent_hat": self.exponent_hat,
            "prefactor_hat": self.prefactor_hat,
            "r_squared": self.r_squared,
            "window": list(self.window),
            "n_points": self.n_points,
            "log_corrected": self.log_corrected,
        }


def _least_squares(design: np.ndarray, target: np.ndarray) -> Tuple[np.ndarray, float]:
    normal = design.T @ design
    condition = np.linalg.cond(normal)
    if not condition <= config.FIT_MAX_CONDITION:
        raise IllConditioned(f"normal equations have condition number {condition:.3e}")
    coefficients, *_ = np.linalg.lstsq(design, target, rcond=None)
    fitted = design @ coefficients
    total = float(np.sum((target - np.mean(target)) ** 2))
    residual = float(np.sum((target - fitted) ** 2))
    r_squared = 1.0 if total == 0.0 else max(0.0, 1.0 - residual / total)
    return coefficients, r_squared


def _points(sweep_data: Sequence[Union[EigenResult, Tuple[float, float]]]) -> Tuple[np.ndarray, np.ndarray]:
    mus, gaps = [], []
    for item in sweep_data:
        if isinstance(item, EigenResult):
            if item.residual > config.ROOT_RESIDUAL_TOL:
                logger.warning("fit skips mu=%.6e with residual %.3e", item.mu, item.residual)
                continue
            mus.append(item.mu)
            gaps.append(item.gap)
        else:
            mu, gap = item
            mus.append(float(mu))
            gaps.append(float(gap))
    return np.array(mus), np.array(gaps)


def fit_exponent(
    sweep_data: Sequence[Union[EigenResult, Tuple[float, float]]],
    edge: str,
    threshold: float,
    case: Optional[EdgeCase] = None,
) -> FitResult:
    """
    Fits |e - edge| against g = |μ - threshold|.

    Power families: least squares of ln|e - edge| on ln g, the slope is the gap exponent.
    Exponential families: least squares of ln(observable) on 1/μ, reported as the rate
    constant (exponent_hat) and the multiplicative constant c (prefactor_hat).
    Log-corrected families add a fit of the observable on {μ, -μ² ln μ, μ²}
    :param sweep_data: EigenResults or (μ, |e - edge|) pairs
    :param edge:
    :param threshold: μ_o below the band, -μ^o above it
    :param case: selects the model, power law when omitted
    :return:
    """
    mus, gaps = _points(sweep_data)
    if len(mus) < config.FIT_MIN_POINTS:
        raise InsufficientData(f"fit needs {config.FIT_MIN_POINTS} points, got {len(mus)}")
    g = mus - threshold if edge == const.BOTTOM else threshold - mus
    if np.any(g <= 0) or np.any(gaps <= 0):
        raise DomainError(f"fit window must lie strictly on the discrete-spectrum side of {threshold}")
    window = (float(np.min(g)), float(np.max(g)))

    if case is not None and case.kind == EXPONENTIAL:
        observable = gaps ** float(case.observable_power)
        design = np.column_stack([np.ones(len(mus)), 1.0 / mus])
        (intercept, slope), r_squared = _least_squares(design, np.log(observable))
        rate = -1.0 / slope if edge == const.BOTTOM else 1.0 / slope
        return FitResult(
            model=EXPONENTIAL,
            exponent_hat=float(rate),
            prefactor_hat=float(math.exp(intercept)),
            r_squared=r_squared,
            window=window,
            n_points=len(mus),
        )

    design = np.column_stack([np.ones(len(g)), np.log(g)])
    (intercept, slope), r_squared = _least_squares(design, np.log(gaps))
    log_corrected = None
    if case is not None and case.kind == LOG_CORRECTED:
        observable = gaps ** float(case.observable_power)
        basis = np.column_stack([g, -g ** 2 * np.log(g), g ** 2])
        coefficients, corrected_r_squared = _least_squares(basis, observable)
        log_corrected = {
            "leading": float(coefficients[0]),
            "log_term": float(coefficients[1]),
            "quadratic": float(coefficients[2]),
            "r_squared": corrected_r_squared,
        }
    logger.info("fit on %d points: exponent %.6f, prefactor %.6e, r^2 %.8f", len(g), slope, math.exp(intercept), r_squared)
    return FitResult(
        model=POWER,
        exponent_hat=float(slope),
        prefactor_hat=float(math.exp(intercept)),
        r_squared=r_squared,
        window=window,
        n_points=len(g),
        log_corrected=log_corrected,
    )


BOTTOM_STATES = {
    EdgeState.no_threshold_state: "no threshold state at 0",
    EdgeState.resonance: "0-energy resonance (f ∉ L²)",
    EdgeState.threshold_eigenfunction: "0-energy threshold eigenfunction f ∈ L²",
}
TOP_STATES = {
    EdgeState.no_threshold_state: "no threshold state at 4d²",
    EdgeState.resonance: "4d²-energy resonance (f ∉ L²)",
    EdgeState.threshold_eigenfunction: "4d²-energy threshold eigenfunction f ∈ L²",
}


@dataclass(frozen=True)
class ResonanceReport:
    bottom: str
    top: str
    # numeric verdicts: does f = v/(𝔢 - edge) have a finite L² norm
    bottom_square_integrable: Optional[bool] = None
    top_square_integrable: Optional[bool] = None
    details: List[Dict] = field(default_factory=list)

    def to_json_dict(self) -> Dict:
        return {
            "bottom": self.bottom,
            "top": self.top,
            "bottom_square_integrable": self.bottom_square_integrable,
            "top_square_integrable": self.top_square_integrable,
            "details": self.details,
        }


def resonance_report(
    report: ThresholdReport, verdicts: Optional[Dict[ThresholdIntegral, DivergenceVerdict]] = None
) -> ResonanceReport:
    """
    Threshold-state classification per edge. With verdicts, the numeric convergence of
    ∫|v/𝔢|² and ∫|v/(4d² - 𝔢)|² must agree with the classes
    :raises DivergenceMismatch:
    """
    if verdicts is None:
        return ResonanceReport(bottom=BOTTOM_STATES[report.bottom_class], top=TOP_STATES[report.top_class])
    bottom = verdicts[ThresholdIntegral.bottom_squared]
    top = verdicts[ThresholdIntegral.top_squared]
    checks = (
        (bottom, report.bottom_class, const.BOTTOM),
        (top, report.top_class, const.TOP),
    )
    for verdict, state, edge in checks:
        expected_finite = state == EdgeState.threshold_eigenfunction
        if verdict.divergent == expected_finite:
            raise DivergenceMismatch(
                f"{edge} class {state.value} but the L2 norm of the threshold state is "
                f"numerically {'divergent' if verdict.divergent else 'finite'}"
            )
    return ResonanceReport(
        bottom=BOTTOM_STATES[report.bottom_class],
        top=TOP_STATES[report.top_class],
        bottom_square_integrable=not bottom.divergent,
        top_square_integrable=not top.divergent,
        details=[bottom.to_json_dict(), top.to_json_dict()],
    )
