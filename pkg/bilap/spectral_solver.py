"""
Secular function, coupling thresholds and the discrete eigenvalue of 𝔢 - μ v⊗v.

An eigenvalue outside [0, 4d²] is a root of Δ(μ; z) = 1 - μ I(z), I(z) = ∫ |v|²/(𝔢 - z) dq.
Roots are searched in the distance δ to the band edge on the side the sign of μ selects
(z = -δ below the band, z = 4d² + δ above it); on both sides Δ increases with δ.
"""
import logging
import math
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field, replace
from enum import Enum
from functools import cached_property
from typing import Dict, List, Optional, Sequence, Tuple, Union

import numpy as np

from bilap.config import config
from bilap.core_model import (
    GeneratorPotential,
    RayJet,
    TorusPoint,
    dispersion,
    edge_distance,
    fourier_v,
    top_distance,
    v_sq,
)
from bilap.heat_kernel import HeatKernel
from bilap.helpers import const
from bilap.helpers.exceptions import (
    BilapBaseException,
    DivergenceMismatch,
    DomainError,
    NotConverged,
    OrderDetectionAmbiguous,
)
from bilap.helpers.roots import bisect_newton, expand_bracket
from bilap.helpers.utils import Utils, strictly_monotone
from bilap.quadrature import (
    QuadratureEstimate,
    TorusGrid,
    TorusIntegrand,
    divergence_verdict,
    doubling_growth,
    integrate_torus,
    integrate_torus_adaptive,
    integrate_torus_levels,
    radial_limit,
    richardson_extrapolate,
    sample_torus,
    sphere_integrate,
)

logger = logging.getLogger(__name__)


class EdgeState(Enum):
    no_threshold_state = "NoThresholdState"
    resonance = "Resonance"
    threshold_eigenfunction = "ThresholdEigenfunction"


class ThresholdIntegral(Enum):
    bottom = "bottom"  # ∫ |v|²/𝔢
    bottom_squared = "bottom_squared"  # ∫ |v|²/𝔢²
    top = "top"  # ∫ |v|²/(4d² - 𝔢)
    top_squared = "top_squared"  # ∫ |v|²/(4d² - 𝔢)²

    @property
    def edge(self) -> str:
        return const.BOTTOM if self in (ThresholdIntegral.bottom, ThresholdIntegral.bottom_squared) else const.TOP

    @property
    def power(self) -> int:
        return 2 if self in (ThresholdIntegral.bottom_squared, ThresholdIntegral.top_squared) else 1

    def singular_exponent(self, k: int) -> int:
        """
        Leading exponent p of the grid error N^{-p}; the integral converges iff p > 0
        :param k: 2n + d at the edge of the integral
        :return:
        """
        return {
            ThresholdIntegral.bottom: k - 4,
            ThresholdIntegral.bottom_squared: k - 8,
            ThresholdIntegral.top: k - 2,
            ThresholdIntegral.top_squared: k - 4,
        }[self]

    def converges(self, k: int) -> bool:
        return self.singular_exponent(k) > 0


def bottom_state(k: int) -> EdgeState:
    if k <= 4:
        return EdgeState.no_threshold_state
    if k <= 8:
        return EdgeState.resonance
    return EdgeState.threshold_eigenfunction


def top_state(k: int) -> EdgeState:
    if k <= 2:
        return EdgeState.no_threshold_state
    if k <= 4:
        return EdgeState.resonance
    return EdgeState.threshold_eigenfunction


def threshold_integrand(gen: GeneratorPotential, which: ThresholdIntegral) -> TorusIntegrand:
    def integrand(points: np.ndarray) -> np.ndarray:
        return v_sq(gen, points) / edge_distance(points, which.edge) ** which.power

    return integrand


def _all_threshold_integrands(gen: GeneratorPotential) -> TorusIntegrand:
    def integrand(points: np.ndarray) -> np.ndarray:
        weight = v_sq(gen, points)
        energy = dispersion(points)
        distance = top_distance(points)
        below = weight / energy
        above = weight / distance
        return np.stack([below, below / energy, above, above / distance], axis=-1)

    return integrand


@dataclass(frozen=True)
class SpectralProblem:
    d: int
    generator: GeneratorPotential
    tol_q: float = field(default_factory=lambda: config.QUADRATURE_TOL)
    n_max: int = field(default_factory=lambda: config.GRID_N_MAX)
    method: str = const.GRID_METHOD

    def __post_init__(self):
        if self.generator.d != self.d:
            raise DomainError(f"generator has dimension {self.generator.d}, problem has {self.d}")
        if self.d > config.MAX_DIMENSION:
            raise DomainError(f"dimensions above {config.MAX_DIMENSION} are not supported, got {self.d}")
        if not self.tol_q > 0:
            raise DomainError(f"quadrature tolerance must be positive, got {self.tol_q}")
        if self.n_max < 8:
            raise DomainError(f"N_max must be at least 8, got {self.n_max}")
        if self.method not in const.METHODS:
            raise DomainError(f"unknown method {self.method!r}, expected one of {const.METHODS}")

    @property
    def band_top(self) -> float:
        return 4.0 * self.d ** 2

    @cached_property
    def bottom_jet(self) -> RayJet:
        return RayJet(self.generator)

    @cached_property
    def top_jet(self) -> RayJet:
        return RayJet(self.generator, at_top=True)

    @cached_property
    def kernel(self) -> HeatKernel:
        return HeatKernel(self.generator)

    @property
    def k_bottom(self) -> int:
        return 2 * self.bottom_jet.vanishing_order + self.d

    @property
    def k_top(self) -> int:
        return 2 * self.top_jet.vanishing_order + self.d

    def k(self, edge: str) -> int:
        return self.k_bottom if edge == const.BOTTOM else self.k_top

    @cached_property
    def thresholds(self) -> "ThresholdReport":
        return compute_thresholds(self)

    def uses_kernel(self, edge: str) -> bool:
        return self.method == const.KERNEL_METHOD and self.kernel.supports(edge)


@dataclass(frozen=True)
class ThresholdReport:
    d: int
    n_bottom: int
    n_top: int
    mu_lower: float
    mu_upper: float
    c_v: float
    C_v: float
    hat_c_v: float
    hat_C_v: float
    bottom_class: EdgeState
    top_class: EdgeState
    divergent: Dict[str, bool] = field(default_factory=dict)
    integral_errors: Dict[str, float] = field(default_factory=dict)

    @property
    def k_bottom(self) -> int:
        return 2 * self.n_bottom + self.d

    @property
    def k_top(self) -> int:
        return 2 * self.n_top + self.d

    def to_json_dict(self) -> Dict:
        return {
            "d": self.d,
            "n_o": self.n_bottom,
            "n^o": self.n_top,
            "k_bottom": self.k_bottom,
            "k_top": self.k_top,
            "mu_lower": self.mu_lower,
            "mu_upper": self.mu_upper,
            "c_v": self.c_v,
            "C_v": self.C_v,
            "hat_c_v": self.hat_c_v,
            "hat_C_v": self.hat_C_v,
            "bottom_class": self.bottom_class.value,
            "top_class": self.top_class.value,
            "divergent": dict(self.divergent),
            "integral_errors": dict(self.integral_errors),
        }


@dataclass(frozen=True)
class EigenResult:
    mu: float
    side: str
    e: float
    gap: float
    residual: float
    bracket: Tuple[float, float]
    iterations: int
    grid_N: int
    method: str

    @property
    def edge(self) -> str:
        return const.BOTTOM if self.side == const.BELOW_ZERO else const.TOP

    def to_json_dict(self) -> Dict:
        return {
            "mu": self.mu,
            "side": self.side,
            "e": self.e,
            "gap": self.gap,
            "residual": self.residual,
            "bracket": list(self.bracket),
            "iterations": self.iterations,
            "grid_N": self.grid_N,
            "method": self.method,
        }


@dataclass(frozen=True)
class NoDiscreteSpectrum:
    mu: float
    mu_lower: float
    mu_upper: float

    status = const.STATUS_NO_DISCRETE_SPECTRUM

    def to_json_dict(self) -> Dict:
        return {"mu": self.mu, "status": self.status, "interval": [-self.mu_upper, self.mu_lower]}


def _edge_and_gap(band_top: float, z: float) -> Tuple[str, float]:
    if 0.0 <= z <= band_top:
        raise DomainError(f"z = {z} lies in the essential spectrum [0, {band_top}]")
    return (const.BOTTOM, -z) if z < 0 else (const.TOP, z - band_top)


def edge_of(prob: SpectralProblem, z: float) -> str:
    return _edge_and_gap(prob.band_top, z)[0]


def z_from_gap(prob: SpectralProblem, edge: str, gap: float) -> float:
    return -gap if edge == const.BOTTOM else prob.band_top + gap


def _gap_orientation(edge: str) -> float:
    """dz/dδ"""
    return -1.0 if edge == const.BOTTOM else 1.0


def _resolvent(distance: np.ndarray, edge: str, gap: float) -> np.ndarray:
    """1/(𝔢 - z) from the distance of 𝔢 to the edge: 1/(𝔢 + δ) below the band, -1/((4d² - 𝔢) + δ) above"""
    return -_gap_orientation(edge) / (distance + gap)


def peak_width(d: int, edge: str, gap: float) -> float:
    """Width of the resolvent peak: (4δ)^{1/4} below the band, (δ/2d)^{1/2} above it"""
    if edge == const.BOTTOM:
        return (4.0 * gap) ** 0.25
    return math.sqrt(gap / (2.0 * d))


def resolution_cap(d: int) -> int:
    """Largest power of two N with N^d within the grid memory cap"""
    n = 8
    while (2 * n) ** d <= config.MAX_GRID_POINTS:
        n *= 2
    return n


def peak_resolution(d: int, edge: str, gap: float) -> int:
    needed = config.PEAK_POINTS_PER_WIDTH * 2.0 * math.pi / peak_width(d, edge, gap)
    return Utils.next_power_of_two(needed, minimum=config.GRID_START_N)


def secular_integrals(
    prob: SpectralProblem, z: float, derivative: bool = False, strict: bool = True
) -> QuadratureEstimate:
    """
    I(z), or [I(z), I'(z)] with derivative=True, I'(z) = ∫ |v|²/(𝔢 - z)²
    :param prob:
    :param z:
    :param derivative:
    :param strict: False returns the finest unconverged estimate instead of raising NotConverged
    :return:
    """
    edge, gap = _edge_and_gap(prob.band_top, z)
    return secular_integrals_at_gap(prob, edge, gap, derivative=derivative, strict=strict)


def secular_integrals_at_gap(
    prob: SpectralProblem, edge: str, gap: float, derivative: bool = False, strict: bool = True
) -> QuadratureEstimate:
    """
    The secular integrals at distance δ = gap outside the band edge.
    Grid quadrature starts where the resolvent peak holds PEAK_POINTS_PER_WIDTH nodes and may
    double PEAK_HEADROOM_DOUBLINGS times past it, lifting N_max up to the memory cap if needed
    :param prob:
    :param edge:
    :param gap: δ > 0
    :param derivative:
    :param strict:
    :return:
    """
    if not gap > 0:
        raise DomainError(f"distance to the band edge must be positive, got {gap}")
    if prob.uses_kernel(edge):
        z = z_from_gap(prob, edge, gap)
        value = prob.kernel.secular_integral(z)
        if derivative:
            value = np.array([value, prob.kernel.secular_integral_dz(z)])
        return QuadratureEstimate(value=value, error_estimate=0.0, levels_used=1, converged=True, resolution=0)

    gen = prob.generator

    def integrand(points: np.ndarray) -> np.ndarray:
        resolvent = _resolvent(edge_distance(points, edge), edge, gap)
        weighted = v_sq(gen, points) * resolvent
        if derivative:
            return np.stack([weighted, weighted * resolvent], axis=-1)
        return weighted

    cap = resolution_cap(prob.d)
    n_peak = min(peak_resolution(prob.d, edge, gap), cap)
    n_max = min(max(prob.n_max, n_peak * 2 ** config.PEAK_HEADROOM_DOUBLINGS), cap)
    n_start = max(config.GRID_START_N, min(n_peak, n_max // 2))
    try:
        return integrate_torus_adaptive(integrand, prob.d, prob.tol_q, n_max, n_start=n_start)
    except NotConverged as ex:
        if strict:
            raise
        estimate = ex.estimate
        logger.warning(
            "secular integral at distance %.6e from the %s edge kept at N=%d, last difference %.3e",
            gap, edge, estimate.resolution, estimate.error_estimate,
        )
        return estimate


def delta_eval(prob: SpectralProblem, mu: float, z: float) -> float:
    """Δ(μ; z) = 1 - μ I(z)"""
    edge_of(prob, z)
    if mu == 0:
        return 1.0
    return 1.0 - mu * float(secular_integrals(prob, z).value)


def delta_dz(prob: SpectralProblem, mu: float, z: float) -> float:
    """∂Δ/∂z = -μ ∫ |v|²/(𝔢 - z)²"""
    edge_of(prob, z)
    if mu == 0:
        return 0.0
    return -mu * float(secular_integrals(prob, z, derivative=True).value[1])


class GridSecularFunction:
    """
    Δ_N(μ; z) = 1 - μ Σ_k w_k/(𝔢_k - z) on a fixed midpoint grid, w_k = |v(p_k)|² (2π/N)^d.
    Grids up to GRID_CACHE_POINTS keep w and the distances to each edge asked for in memory,
    larger ones are swept chunk by chunk
    """

    def __init__(self, gen: GeneratorPotential, grid: TorusGrid):
        self.gen = gen
        self.grid = grid
        self.band_top = 4.0 * grid.d ** 2
        self.cached = grid.size <= config.GRID_CACHE_POINTS
        self._distances = {}
        if self.cached:
            self.weights = (sample_torus(lambda p: v_sq(gen, p), grid) * grid.weight).reshape(self._shape)

    @property
    def _shape(self) -> Tuple[int, int]:
        return self.grid.lines, self.grid.n

    def _distance(self, edge: str) -> np.ndarray:
        if edge not in self._distances:
            values = sample_torus(lambda p: edge_distance(p, edge), self.grid)
            self._distances[edge] = values.reshape(self._shape)
        return self._distances[edge]

    def edge_integrals(self, edge: str, gap: float) -> np.ndarray:
        """[Σ w/(𝔢 - z), Σ w/(𝔢 - z)²] at distance gap outside the edge"""
        if self.cached:
            resolvent = _resolvent(self._distance(edge), edge, gap)
            weighted = self.weights * resolvent
            lines = np.stack([np.sum(weighted, axis=1), np.sum(weighted * resolvent, axis=1)], axis=-1)
            return Utils.pairwise_sum(lines)

        def integrand(points: np.ndarray) -> np.ndarray:
            resolvent = _resolvent(edge_distance(points, edge), edge, gap)
            weighted = v_sq(self.gen, points) * resolvent
            return np.stack([weighted, weighted * resolvent], axis=-1)

        return integrate_torus(integrand, self.grid)

    def integrals(self, z: float) -> np.ndarray:
        return self.edge_integrals(*_edge_and_gap(self.band_top, z))

    def value(self, mu: float, z: float) -> float:
        return 1.0 - mu * float(self.integrals(z)[0])

    def dz(self, mu: float, z: float) -> float:
        return -mu * float(self.integrals(z)[1])


def eigenvalue_solve(prob: SpectralProblem, mu: float) -> Union[EigenResult, NoDiscreteSpectrum]:
    """
    The eigenvalue e(μ) outside [0, 4d²]; none exists for μ in [-μ^o, μ_o].

    The bracket is found and narrowed to a ratio of COARSE_BRACKET_RATIO with adaptive
    quadrature, accepting unconverged estimates there. The grid route then fixes N at the
    end nearest to the edge (the coarser of the two last levels when converged, the finest
    reached otherwise), and finishes by bisection to BISECTION_REL_WIDTH plus Newton polish
    on that fixed grid. Every evaluation works on the distance to the edge, never on z itself
    :param prob:
    :param mu:
    :return:
    """
    report = prob.thresholds
    if -report.mu_upper <= mu <= report.mu_lower:
        return NoDiscreteSpectrum(mu=mu, mu_lower=report.mu_lower, mu_upper=report.mu_upper)

    edge = const.BOTTOM if mu > 0 else const.TOP
    orientation = _gap_orientation(edge)

    def coarse(gap: float) -> float:
        return 1.0 - mu * float(secular_integrals_at_gap(prob, edge, gap, strict=False).value)

    bracket = expand_bracket(coarse, 1.0, max_steps=config.BRACKET_MAX_STEPS)
    iterations = bracket.evaluations
    logger.info("mu=%.6e: bracket on distance [%.6e, %.6e]", mu, bracket.lo, bracket.hi)

    if prob.uses_kernel(edge):
        kernel = prob.kernel

        def slope(gap: float) -> float:
            return -mu * kernel.secular_integral_dz(z_from_gap(prob, edge, gap)) * orientation

        root = bisect_newton(
            coarse, slope, bracket.lo, bracket.hi, config.BISECTION_REL_WIDTH, config.NEWTON_MAX_STEPS
        )
        grid_n = 0
        method = const.KERNEL_METHOD
    else:
        narrowed = bisect_newton(
            coarse,
            None,
            bracket.lo,
            bracket.hi,
            config.BISECTION_REL_WIDTH,
            until_ratio=config.COARSE_BRACKET_RATIO,
        )
        iterations += narrowed.iterations
        lo, hi = narrowed.lo, narrowed.hi
        estimate = secular_integrals_at_gap(prob, edge, lo, strict=False)
        grid_n = estimate.resolution // 2 if estimate.converged else estimate.resolution
        grid_n = max(config.GRID_START_N, grid_n)
        secular = GridSecularFunction(prob.generator, TorusGrid(prob.d, grid_n))
        logger.info("mu=%.6e: fixed grid N=%d on [%.6e, %.6e]", mu, grid_n, lo, hi)

        def fine(gap: float) -> float:
            return 1.0 - mu * float(secular.edge_integrals(edge, gap)[0])

        def slope(gap: float) -> float:
            return -mu * float(secular.edge_integrals(edge, gap)[1]) * orientation

        if not fine(lo) < 0.0 < fine(hi):
            logger.warning("mu=%.6e: fixed grid N=%d moved the root outside the bracket, re-bracketing", mu, grid_n)
            rebracket = expand_bracket(fine, math.sqrt(lo * hi), max_steps=config.BRACKET_MAX_STEPS)
            lo, hi = rebracket.lo, rebracket.hi
        root = bisect_newton(fine, slope, lo, hi, config.BISECTION_REL_WIDTH, config.NEWTON_MAX_STEPS)
        method = const.GRID_METHOD

    iterations += root.iterations
    residual = abs(root.value)
    if residual > config.ROOT_RESIDUAL_TOL:
        raise NotConverged(f"mu={mu}: root residual {residual:.3e} above {config.ROOT_RESIDUAL_TOL:.1e}")
    z_lo, z_hi = sorted((z_from_gap(prob, edge, root.lo), z_from_gap(prob, edge, root.hi)))
    return EigenResult(
        mu=mu,
        side=const.BELOW_ZERO if edge == const.BOTTOM else const.ABOVE_TOP,
        e=z_from_gap(prob, edge, root.root),
        gap=root.root,
        residual=residual,
        bracket=(z_lo, z_hi),
        iterations=iterations,
        grid_N=grid_n,
        method=method,
    )


def eigenfunction(gen: GeneratorPotential, e: float, points: np.ndarray) -> np.ndarray:
    """f(p) = v(p)/(𝔢(p) - e) for points stacked along the last axis"""
    return fourier_v(gen, points) / (dispersion(points) - e)


def eigenfunction_eval(prob: SpectralProblem, mu: float, e: float, p: TorusPoint) -> float:
    edge_of(prob, e)
    if p.d != prob.d:
        raise DomainError(f"point of dimension {p.d} used in a problem of dimension {prob.d}")
    return float(eigenfunction(prob.generator, e, p.as_array()))


def eigenfunction_residual(
    prob: SpectralProblem, mu: float, result: EigenResult, n_samples: int = 64, seed: int = 0
) -> float:
    """
    max_p |(𝔢(p) - e) f(p) - μ v(p) <v, f>| over random momenta, <v, f> by quadrature
    :param prob:
    :param mu:
    :param result:
    :param n_samples:
    :param seed:
    :return:
    """
    rng = np.random.default_rng(seed)
    points = rng.uniform(-math.pi, math.pi, size=(n_samples, prob.d))
    overlap = float(secular_integrals_at_gap(prob, result.edge, result.gap).value)
    f = eigenfunction(prob.generator, result.e, points)
    v = fourier_v(prob.generator, points)
    residual = (dispersion(points) - result.e) * f - mu * v * overlap
    return float(np.max(np.abs(residual)))


def e_prime_analytic(prob: SpectralProblem, mu: float, e: float) -> float:
    """
    e'(μ) = -(1/μ) ∫ |v|²/(𝔢 - e) / ∫ |v|²/(𝔢 - e)²; past the memory cap the finest grid reached is used
    """
    if mu == 0:
        raise DomainError("e'(mu) is not defined at mu = 0")
    report = prob.thresholds
    if -report.mu_upper <= mu <= report.mu_lower:
        raise DomainError(f"mu = {mu} has no discrete spectrum")
    first, second = secular_integrals(prob, e, derivative=True, strict=False).value
    return -first / (mu * second)


def e_prime_finite_difference(prob: SpectralProblem, mu: float, step: Optional[float] = None) -> Optional[float]:
    """
    Central difference of e(μ) taken on the distance to the edge, which keeps full
    precision above the band where e itself is close to 4d²
    :param prob:
    :param mu:
    :param step: absolute step, FD_REL_STEP * |μ| by default
    :return: None when either neighbour has no eigenvalue
    """
    h = config.FD_REL_STEP * abs(mu) if step is None else step
    plus = eigenvalue_solve(prob, mu + h)
    minus = eigenvalue_solve(prob, mu - h)
    if not isinstance(plus, EigenResult) or not isinstance(minus, EigenResult) or plus.side != minus.side:
        return None
    return _gap_orientation(plus.edge) * (plus.gap - minus.gap) / (2.0 * h)


@dataclass(frozen=True)
class SweepRow:
    mu: float
    status: str
    result: Optional[EigenResult] = None
    e_prime_analytic: Optional[float] = None
    e_prime_fd: Optional[float] = None
    message: str = ""

    def to_row(self) -> Dict:
        result = self.result
        return {
            "mu": self.mu,
            "side": result.side if result else None,
            "e": result.e if result else None,
            "residual": result.residual if result else None,
            "grid_N": result.grid_N if result else None,
            "iterations": result.iterations if result else None,
            "e_prime_analytic": self.e_prime_analytic,
            "e_prime_fd": self.e_prime_fd,
            "status": self.status if not self.message else f"{self.status}: {self.message}",
        }


@dataclass(frozen=True)
class SweepReport:
    rows: List[SweepRow]
    flags: Dict[str, Dict]

    @property
    def results(self) -> List[EigenResult]:
        return [row.result for row in self.rows if row.result is not None]

    def to_json_dict(self) -> Dict:
        return {"rows": [row.to_row() for row in self.rows], "flags": self.flags}


def _solve_row(prob: SpectralProblem, mu: float, finite_difference: bool) -> SweepRow:
    try:
        outcome = eigenvalue_solve(prob, mu)
        if isinstance(outcome, NoDiscreteSpectrum):
            return SweepRow(mu=mu, status=const.STATUS_NO_DISCRETE_SPECTRUM)
        derivative = e_prime_analytic(prob, mu, outcome.e)
        fd = e_prime_finite_difference(prob, mu) if finite_difference else None
    except BilapBaseException as ex:
        logger.warning("sweep point mu=%.6e failed: %s", mu, ex)
        return SweepRow(mu=mu, status=const.STATUS_ERROR, message=str(ex))
    return SweepRow(mu=mu, status=const.STATUS_OK, result=outcome, e_prime_analytic=derivative, e_prime_fd=fd)


def _second_divided_differences(x: Sequence[float], y: Sequence[float]) -> List[float]:
    result = []
    for i in range(len(x) - 2):
        left = (y[i + 1] - y[i]) / (x[i + 1] - x[i])
        right = (y[i + 2] - y[i + 1]) / (x[i + 2] - x[i + 1])
        result.append((right - left) / (x[i + 2] - x[i]))
    return result


def sweep_flags(results: Sequence[EigenResult]) -> Dict[str, Dict]:
    """
    Per side: e strictly decreasing in μ, concave below the band, convex above it,
    and the gap to the edge smallest at the μ nearest to the threshold
    """
    flags = {}
    for side in (const.BELOW_ZERO, const.ABOVE_TOP):
        points = sorted((r for r in results if r.side == side), key=lambda r: r.mu)
        if not points:
            continue
        mus = [r.mu for r in points]
        es = [r.e for r in points]
        gaps = [r.gap for r in points]
        second = _second_divided_differences(mus, es)
        edge_index = 0 if side == const.BELOW_ZERO else len(points) - 1
        entry = {
            "points": len(points),
            "decreasing": strictly_monotone(es),
            "nearest_gap": gaps[edge_index],
            "approaches_edge": all(gaps[edge_index] <= g for g in gaps),
        }
        if side == const.BELOW_ZERO:
            entry["concave"] = all(s < 0 for s in second)
        else:
            entry["convex"] = all(s > 0 for s in second)
        flags[side] = entry
    return flags


def sweep(
    prob: SpectralProblem,
    mu_list: Sequence[float],
    finite_difference: bool = False,
    workers: Optional[int] = None,
) -> SweepReport:
    """
    Solves every μ of the list; failures are recorded per row
    :param prob:
    :param mu_list:
    :param finite_difference: also compute e'(μ) by central differences
    :param workers: threads solving distinct μ, config.WORKERS by default
    :return:
    """
    mu_list = sorted(float(mu) for mu in mu_list)
    workers = config.WORKERS if workers is None else workers
    # thresholds are shared by every point, compute them once before fanning out
    prob.thresholds
    if workers > 1 and len(mu_list) > 1:
        with ThreadPoolExecutor(max_workers=workers) as executor:
            rows = list(executor.map(lambda mu: _solve_row(prob, mu, finite_difference), mu_list))
    else:
        rows = [_solve_row(prob, mu, finite_difference) for mu in mu_list]
    flags = sweep_flags([row.result for row in rows if row.result is not None])
    return SweepReport(rows=rows, flags=flags)


def uniqueness_probe(
    prob: SpectralProblem, mu: float, result: EigenResult, count: Optional[int] = None, decades: Optional[float] = None
) -> int:
    """
    Sign changes of Δ(μ; ·) on log-spaced distances around the root on the searched side
    :return: number of sign changes, 1 when the root is unique there
    """
    count = config.UNIQUENESS_PROBE_POINTS if count is None else count
    decades = config.UNIQUENESS_PROBE_DECADES if decades is None else decades
    centre = math.log10(result.gap)
    gaps = np.logspace(centre - decades, centre + decades, count)
    values = [
        1.0 - mu * float(secular_integrals_at_gap(prob, result.edge, gap, strict=False).value) for gap in gaps
    ]
    return Utils.sign_changes(values)


def scaling_covariance_check(prob: SpectralProblem, mu: float, z: float, t: float) -> Tuple[float, float]:
    """
    Δ(μ; z) for v̂ against Δ(μ/t²; z) for t v̂
    :return: both values
    """
    if not t > 0:
        raise DomainError(f"scale factor must be positive, got {t}")
    scaled = replace(prob, generator=prob.generator.scaled(t))
    return delta_eval(prob, mu, z), delta_eval(scaled, mu / t ** 2, z)


@dataclass(frozen=True)
class DivergenceVerdict:
    which: ThresholdIntegral
    divergent: bool
    expected_divergent: bool
    levels: List[int]
    values: List[float]
    growth: List[float]

    @property
    def agrees(self) -> bool:
        return self.divergent == self.expected_divergent

    def to_json_dict(self) -> Dict:
        return {
            "integral": self.which.value,
            "divergent": self.divergent,
            "expected_divergent": self.expected_divergent,
            "levels": self.levels,
            "values": self.values,
            "growth": self.growth,
        }


def convergence_verdicts(prob: SpectralProblem) -> Dict[ThresholdIntegral, DivergenceVerdict]:
    """
    Grid values of the four threshold integrals on N0, 2 N0, ... and the divergence test,
    next to the verdict the vanishing orders predict
    """
    base = config.DIVERGENCE_BASE_N[prob.d]
    levels = [base * 2 ** j for j in range(config.DIVERGENCE_LEVELS)]
    sums = integrate_torus_levels(_all_threshold_integrands(prob.generator), prob.d, levels)
    verdicts = {}
    for column, which in enumerate(ThresholdIntegral):
        values = [float(s[column]) for s in sums]
        verdicts[which] = DivergenceVerdict(
            which=which,
            divergent=divergence_verdict(values),
            expected_divergent=not which.converges(prob.k(which.edge)),
            levels=levels,
            values=values,
            growth=doubling_growth(values),
        )
    return verdicts


def threshold_integral_extrapolated(prob: SpectralProblem, which: ThresholdIntegral) -> QuadratureEstimate:
    """
    Grid values on the per-dimension ladder, extrapolated with the singular exponent p and p + 2.
    Divergent integrals give +inf
    """
    p = which.singular_exponent(prob.k(which.edge))
    if p <= 0:
        return QuadratureEstimate(value=math.inf, error_estimate=0.0, levels_used=0, converged=True, resolution=0)
    ns = [int(n) for n in config.THRESHOLD_LADDERS[prob.d].split(",")]
    values = integrate_torus_levels(threshold_integrand(prob.generator, which), prob.d, ns)
    value, error = richardson_extrapolate(ns, values, p)
    converged = error <= config.EXTRAPOLATION_REL_TOL * abs(value)
    if not converged:
        logger.warning("%s integral: extrapolants spread %.3e around %.12e", which.value, error, value)
    logger.debug("%s integral on N=%s: %s -> %.16e", which.value, ns, values, value)
    return QuadratureEstimate(
        value=value, error_estimate=error, levels_used=len(ns), converged=converged, resolution=ns[-1]
    )


def _threshold_integral(prob: SpectralProblem, which: ThresholdIntegral) -> Tuple[float, float]:
    if not which.converges(prob.k(which.edge)):
        return math.inf, 0.0
    if prob.uses_kernel(which.edge):
        kernel = prob.kernel
        value = {
            ThresholdIntegral.bottom: kernel.threshold_integral,
            ThresholdIntegral.bottom_squared: kernel.threshold_integral_squared,
            ThresholdIntegral.top: kernel.top_threshold_integral,
            ThresholdIntegral.top_squared: kernel.top_threshold_integral_squared,
        }[which]()
        return value, 0.0
    estimate = threshold_integral_extrapolated(prob, which)
    return estimate.value, estimate.error_estimate


def sphere_limit(prob: SpectralProblem, jet: RayJet) -> float:
    """∫_{S^{d-1}} lim_{t -> 0} |v(c + t w)|²/t^{2n} dH(w)"""
    order = 2 * jet.vanishing_order
    return radial_limit(lambda t: sphere_integrate(lambda w: jet.value_sq(t, w), prob.d), order)


def confirm_vanishing_order(prob: SpectralProblem, jet: RayJet) -> int:
    """
    Cross-checks the jet's vanishing order against the log-log slope of the sphere average
    of |v(c + t w)|² and a nonzero radial limit
    :raises OrderDetectionAmbiguous:
    """
    t = config.ORDER_SLOPE_T

    def average(s: float) -> float:
        return sphere_integrate(lambda w: jet.value_sq(s, w), prob.d)

    slope = math.log(average(t) / average(t / 2.0)) / math.log(2.0)
    nearest = 2 * round(slope / 2.0)
    n = jet.vanishing_order
    where = "pi" if jet.at_top else "0"
    if abs(slope - nearest) > config.ORDER_SLOPE_TOL or nearest != 2 * n:
        raise OrderDetectionAmbiguous(f"slope {slope:.4f} of |v|^2 at {where} does not confirm order t^{2 * n}")
    if not sphere_limit(prob, jet) > 0:
        raise OrderDetectionAmbiguous(f"radial limit of order {2 * n} at {where} vanishes")
    return n


def compute_thresholds(prob: SpectralProblem) -> ThresholdReport:
    """
    Vanishing orders, the constants c_v and C_v, the numerical divergence verdicts (checked
    against the orders), the couplings μ_o, μ^o and ĉ_v, Ĉ_v
    :raises DivergenceMismatch: a verdict disagrees with the order-based criterion
    """
    d = prob.d
    n_bottom = confirm_vanishing_order(prob, prob.bottom_jet)
    n_top = confirm_vanishing_order(prob, prob.top_jet)
    k_bottom, k_top = 2 * n_bottom + d, 2 * n_top + d
    logger.info("thresholds: n_o=%d, n^o=%d, d=%d", n_bottom, n_top, d)

    c_v = 2.0 ** k_bottom * sphere_limit(prob, prob.bottom_jet)
    big_c_v = 2.0 ** (k_top - 1) / (8.0 * d) ** (k_top / 2.0) * sphere_limit(prob, prob.top_jet)

    verdicts = convergence_verdicts(prob)
    mismatches = [v for v in verdicts.values() if not v.agrees]
    if mismatches:
        details = ", ".join(
            f"{v.which.value}: numeric {'divergent' if v.divergent else 'convergent'} (growth per doubling {v.growth})"
            for v in mismatches
        )
        raise DivergenceMismatch(f"divergence verdicts disagree with k_bottom={k_bottom}, k_top={k_top}: {details}")

    values, errors = {}, {}
    for which in ThresholdIntegral:
        values[which], errors[which.value] = _threshold_integral(prob, which)
        logger.info("threshold integral %s = %.16e", which.value, values[which])

    bottom, top = values[ThresholdIntegral.bottom], values[ThresholdIntegral.top]
    return ThresholdReport(
        d=d,
        n_bottom=n_bottom,
        n_top=n_top,
        mu_lower=0.0 if math.isinf(bottom) else 1.0 / bottom,
        mu_upper=0.0 if math.isinf(top) else 1.0 / top,
        c_v=c_v,
        C_v=big_c_v,
        hat_c_v=values[ThresholdIntegral.bottom_squared],
        hat_C_v=values[ThresholdIntegral.top_squared],
        bottom_class=bottom_state(k_bottom),
        top_class=top_state(k_top),
        divergent={which.value: verdict.divergent for which, verdict in verdicts.items()},
        integral_errors=errors,
    )
