"""
Torus, sphere and radial integration.

Torus integrals use the midpoint product grid: spectrally accurate for smooth periodic
integrands and free of nodes on the extrema of the dispersion, so integrands singular
there stay finite at every sample and can be refined and extrapolated.
"""
import logging
import math
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass
from functools import lru_cache
from typing import Callable, List, Optional, Sequence, Tuple

import numpy as np
from scipy import integrate, special

from bilap.config import config
from bilap.helpers.exceptions import (
    DomainError,
    NoConvergence,
    NonFiniteSample,
    NotConverged,
    SizeExceeded,
)
from bilap.helpers.utils import Utils

logger = logging.getLogger(__name__)

# integrand over stacked torus points of shape (lines, N, d); returns (lines, N) or (lines, N, m)
TorusIntegrand = Callable[[np.ndarray], np.ndarray]


@dataclass(frozen=True)
class TorusGrid:
    d: int
    n: int
    offset: float = 0.5

    def __post_init__(self):
        if self.d < 1:
            raise DomainError(f"grid dimension must be positive, got {self.d}")
        if self.n < 4:
            raise DomainError(f"grid needs at least 4 points per dimension, got {self.n}")
        if not 0.0 < self.offset < 1.0:
            raise DomainError(f"grid offset must lie in (0, 1), got {self.offset}")
        if self.n ** self.d > config.MAX_GRID_POINTS:
            raise SizeExceeded(f"grid {self.n}^{self.d} exceeds {config.MAX_GRID_POINTS} points")
        axis = self.axis
        tol = 1e-12 * math.pi
        if np.any(np.abs(axis) < tol) or np.any(np.abs(np.abs(axis) - math.pi) < tol):
            raise DomainError(f"grid N={self.n}, offset={self.offset} puts a node on 0 or pi")

    @property
    def axis(self) -> np.ndarray:
        return -math.pi + (np.arange(self.n) + self.offset) * self.spacing

    @property
    def spacing(self) -> float:
        return 2.0 * math.pi / self.n

    @property
    def weight(self) -> float:
        """(2π/N)^d"""
        return self.spacing ** self.d

    @property
    def size(self) -> int:
        return self.n ** self.d

    @property
    def lines(self) -> int:
        """Number of grid lines along the last axis"""
        return self.n ** (self.d - 1)

    def line_points(self, first: int, last: int) -> np.ndarray:
        """
        Points of grid lines first..last-1 along the last axis, row-major order
        :param first:
        :param last:
        :return: array of shape (last - first, N, d)
        """
        axis = self.axis
        points = np.empty((last - first, self.n, self.d))
        if self.d > 1:
            index = np.unravel_index(np.arange(first, last), (self.n,) * (self.d - 1))
            for j, idx in enumerate(index):
                points[:, :, j] = axis[idx][:, None]
        points[:, :, self.d - 1] = axis[None, :]
        return points

    def points(self) -> np.ndarray:
        """All grid points, shape (N^d, d), row-major"""
        return self.line_points(0, self.lines).reshape(self.size, self.d)

    def chunks(self) -> List[Tuple[int, int]]:
        per_chunk = max(1, config.CHUNK_POINTS // self.n)
        return [(first, min(first + per_chunk, self.lines)) for first in range(0, self.lines, per_chunk)]


@dataclass(frozen=True)
class QuadratureEstimate:
    value: float
    error_estimate: float
    levels_used: int
    converged: bool
    resolution: int

    def to_json_dict(self):
        return {
            "value": self.value,
            "error_estimate": self.error_estimate,
            "levels_used": self.levels_used,
            "converged": self.converged,
        }


def _line_sums(f: TorusIntegrand, grid: TorusGrid, chunk: Tuple[int, int]) -> np.ndarray:
    first, last = chunk
    values = np.asarray(f(grid.line_points(first, last)), dtype=float)
    if values.shape[:2] != (last - first, grid.n):
        raise ValueError(f"integrand returned shape {values.shape} for {last - first} lines of {grid.n} points")
    finite = np.isfinite(values)
    if not finite.all():
        bad = np.argwhere(~finite)[0]
        raise NonFiniteSample(first * grid.n + int(bad[0]) * grid.n + int(bad[1]))
    return np.sum(values, axis=1)


def integrate_torus(f: TorusIntegrand, grid: TorusGrid, workers: Optional[int] = None):
    """
    (2π/N)^d Σ_k f(p_k). Each grid line is summed on its own, lines are then combined
    by a pairwise tree, so the result does not depend on the number of workers
    :param f: integrand, may return several integrands at once along a trailing axis
    :param grid:
    :param workers: threads evaluating chunks, config.WORKERS by default
    :return: float, or array for vector-valued integrands
    """
    workers = config.WORKERS if workers is None else workers
    chunks = grid.chunks()
    if workers > 1 and len(chunks) > 1:
        with ThreadPoolExecutor(max_workers=workers) as executor:
            parts = list(executor.map(lambda chunk: _line_sums(f, grid, chunk), chunks))
    else:
        parts = [_line_sums(f, grid, chunk) for chunk in chunks]
    total = Utils.pairwise_sum(np.concatenate(parts, axis=0)) * grid.weight
    if np.ndim(total) == 0:
        return float(total)
    return total


def sample_torus(f: TorusIntegrand, grid: TorusGrid) -> np.ndarray:
    """Values of f at every grid point, flattened row-major"""
    parts = [np.asarray(f(grid.line_points(first, last)), dtype=float) for first, last in grid.chunks()]
    return np.concatenate(parts, axis=0).reshape(grid.size)


def integrate_torus_levels(
    f: TorusIntegrand, d: int, ns: Sequence[int], workers: Optional[int] = None
) -> List:
    return [integrate_torus(f, TorusGrid(d, n), workers=workers) for n in ns]


def integrate_torus_adaptive(
    f: TorusIntegrand,
    d: int,
    tol: float,
    n_max: int,
    n_start: Optional[int] = None,
    workers: Optional[int] = None,
) -> QuadratureEstimate:
    """
    Doubles N until |I_2N - I_N| <= tol * (1 + |I_2N|), componentwise for vector integrands
    :param f:
    :param d:
    :param tol:
    :param n_max: largest N tried
    :param n_start: first N, config.GRID_START_N by default
    :param workers:
    :return:
    :raises NotConverged: carries the estimate at the finest level reached
    """
    if tol <= 0:
        raise DomainError(f"quadrature tolerance must be positive, got {tol}")
    if n_max < 8:
        raise DomainError(f"N_max must be at least 8, got {n_max}")
    n = n_start or config.GRID_START_N
    current = integrate_torus(f, TorusGrid(d, n), workers=workers)
    levels = 1
    difference = math.inf
    while 2 * n <= n_max:
        try:
            refined = integrate_torus(f, TorusGrid(d, 2 * n), workers=workers)
        except SizeExceeded:
            break
        n *= 2
        levels += 1
        differences = np.abs(np.asarray(refined) - np.asarray(current))
        difference = float(np.max(differences))
        current = refined
        logger.debug("torus quadrature N=%d value=%s diff=%.3e", n, current, difference)
        if np.all(differences <= tol * (1.0 + np.abs(current))):
            return QuadratureEstimate(
                value=current, error_estimate=difference, levels_used=levels, converged=True, resolution=n
            )

    estimate = QuadratureEstimate(
        value=current, error_estimate=difference, levels_used=levels, converged=False, resolution=n
    )
    raise NotConverged(
        f"torus quadrature not converged at N={n}: difference {difference:.3e} above tolerance {tol:.1e}",
        estimate,
    )


def doubling_growth(values: Sequence[float]) -> List[float]:
    """Relative growth I_2N / I_N - 1 of successive values of a refinement sequence"""
    return [math.inf if a == 0 else b / a - 1.0 for a, b in zip(values, values[1:])]


def divergence_verdict(
    values: Sequence[float], growth: Optional[float] = None, doublings: Optional[int] = None
) -> bool:
    """
    Decides from grid values of a positive integrand on N0, 2 N0, 4 N0, ... whether the
    integral diverges: every one of the last ``doublings`` doublings must grow the value
    by more than ``growth``. A power singularity of exponent p < 0 multiplies the grid sum
    by about 2^{-p} per doubling and a logarithmic one adds a constant, while the sums of an
    integrable singularity settle with increments falling like 2^{-p}
    :param values: grid values on successively doubled N
    :param growth: relative growth per doubling, config.DIVERGENCE_GROWTH by default
    :param doublings: consecutive doublings inspected, config.DIVERGENCE_DOUBLINGS by default
    :return: True when divergent
    """
    growth = config.DIVERGENCE_GROWTH if growth is None else growth
    doublings = config.DIVERGENCE_DOUBLINGS if doublings is None else doublings
    if len(values) < doublings + 1:
        raise DomainError(f"divergence test needs {doublings + 1} refinement levels, got {len(values)}")
    tail = values[-(doublings + 1):]
    rates = doubling_growth(tail)
    logger.debug("divergence test: values %s growth %s", tail, rates)
    return all(a > 0 for a in tail) and all(r > growth for r in rates)


def richardson_extrapolate(ns: Sequence[int], values: Sequence[float], p: float) -> Tuple[float, float]:
    """
    Generalized Richardson extrapolation of grid values with an error expansion
    a N^{-p} + b N^{-p-2} + ...
    Uses all levels given (two or three); the error estimate is the spread between the
    extrapolant from all levels and the one from the two finest levels
    :param ns: grid sizes, increasing
    :param values:
    :param p: leading error exponent; p >= 6 takes the finest value as is
    :return: (value, error_estimate)
    """
    ns = [float(n) for n in ns]
    values = [float(v) for v in values]
    if p >= 6:
        return values[-1], abs(values[-1] - values[-2]) if len(values) > 1 else 0.0

    def solve(levels_n, levels_v, exponents):
        matrix = np.array(
            [[1.0] + [(levels_n[0] / n) ** q for q in exponents] for n in levels_n]
        )
        return float(np.linalg.solve(matrix, np.array(levels_v))[0])

    two_level = solve(ns[-2:], values[-2:], [p])
    if len(ns) < 3:
        return two_level, abs(two_level - values[-1])
    three_level = solve(ns[-3:], values[-3:], [p, p + 2.0])
    return three_level, abs(three_level - two_level)


def sphere_area(d: int) -> float:
    """|S^{d-1}| = 2 π^{d/2} / Γ(d/2)"""
    return 2.0 * math.pi ** (d / 2.0) / special.gamma(d / 2.0)


@lru_cache(maxsize=None)
def sphere_rule(d: int) -> Tuple[np.ndarray, np.ndarray]:
    """
    Nodes and weights for ∫_{S^{d-1}} g dH^{d-1}.
    d >= 3 peels off one coordinate: ∫_{S^m} g = ∫_{-1}^{1} (1 - x²)^{(m-2)/2} ∫_{S^{m-1}} g(x, √(1-x²) u) du dx,
    the outer integral by Gauss-Jacobi
    :param d:
    :return: nodes (M, d), weights (M,)
    """
    if d < 1:
        raise DomainError(f"sphere dimension must be positive, got {d}")
    if d == 1:
        return np.array([[-1.0], [1.0]]), np.array([1.0, 1.0])
    if d == 2:
        m = config.SPHERE_CIRCLE_POINTS
        theta = 2.0 * math.pi * np.arange(m) / m
        return np.stack([np.cos(theta), np.sin(theta)], axis=1), np.full(m, 2.0 * math.pi / m)
    inner_nodes, inner_weights = sphere_rule(d - 1)
    alpha = (d - 3) / 2.0
    x, wx = special.roots_jacobi(config.SPHERE_JACOBI_POINTS, alpha, alpha)
    radius = np.sqrt(1.0 - x ** 2)
    nodes = np.concatenate(
        [np.column_stack([np.full(len(inner_nodes), xi), ri * inner_nodes]) for xi, ri in zip(x, radius)]
    )
    weights = np.concatenate([wi * inner_weights for wi in wx])
    return nodes, weights


def sphere_integrate(g: Callable[[np.ndarray], np.ndarray], d: int) -> float:
    """
    :param g: vectorized over unit vectors of shape (M, d)
    :param d:
    :return:
    """
    nodes, weights = sphere_rule(d)
    return float(np.dot(weights, np.asarray(g(nodes), dtype=float)))


def radial_limit(
    g: Callable[[float], float],
    m: int,
    ladder_start: Optional[float] = None,
    levels: Optional[int] = None,
    rel_tol: Optional[float] = None,
    with_residual: bool = False,
):
    """
    lim_{t -> 0} g(t) / t^m for g even in t, by Romberg extrapolation in t² on the
    ladder t_j = t_0 2^{-j}
    :param g:
    :param m: even integer >= 0
    :param ladder_start: t_0
    :param levels: number of ladder points
    :param rel_tol: bound on the last Richardson correction relative to the limit
    :param with_residual: also return the last correction
    :return: limit, or (limit, residual)
    """
    if m < 0 or m % 2:
        raise DomainError(f"radial order must be an even non-negative integer, got {m}")
    ladder_start = config.RICHARDSON_LADDER_START if ladder_start is None else ladder_start
    levels = config.RICHARDSON_LEVELS if levels is None else levels
    rel_tol = config.RICHARDSON_REL_TOL if rel_tol is None else rel_tol

    table: List[List[float]] = []
    for j in range(levels):
        t = ladder_start * 2.0 ** (-j)
        row = [float(g(t)) / t ** m]
        for k in range(1, j + 1):
            factor = 4.0 ** k
            row.append(row[k - 1] + (row[k - 1] - table[j - 1][k - 1]) / (factor - 1.0))
        table.append(row)
    value = table[-1][-1]
    residual = abs(value - table[-2][-2]) if levels > 1 else 0.0
    if residual > rel_tol * abs(value):
        raise NoConvergence(
            f"radial limit of order {m}: last extrapolants {table[-2][-2]:.12e} and {value:.12e} disagree"
        )
    if with_residual:
        return value, residual
    return value


def _check_negative(z: float) -> None:
    if not z < 0:
        raise DomainError(f"model integral needs z < 0, got {z}")


def jm_integral(m: int, z: float, gamma: float = 1.0 / math.sqrt(2.0)) -> float:
    """
    ∫_0^γ r^m / (4 r⁴ - z) dr for z < 0; the integrand peaks near r = (-z/4)^{1/4}
    :param m:
    :param z:
    :param gamma:
    :return:
    """
    _check_negative(z)
    if m < 0:
        raise DomainError(f"power must be non-negative, got {m}")
    peak = (-z / 4.0) ** 0.25
    points = [p for p in (peak, 10.0 * peak) if 0.0 < p < gamma]
    value, abserr = integrate.quad(
        lambda r: r ** m / (4.0 * r ** 4 - z),
        0.0,
        gamma,
        epsabs=0.0,
        epsrel=config.JM_QUAD_TOL,
        limit=config.JM_QUAD_LIMIT,
        points=points or None,
    )
    logger.debug("j_%d(%.3e) = %.16e (+- %.1e)", m, z, value, abserr)
    return value


def jm_singular_part(m: int, z: float) -> float:
    """
    z^n j°_l(z) with n = m // 4, l = m % 4 and
    j°_0 = π/4 a^{-3/4}, j°_1 = π/8 a^{-1/2}, j°_2 = π/8 a^{-1/4}, j°_3 = -ln(a)/16, a = -z.
    :param m:
    :param z:
    :return:
    """
    _check_negative(z)
    if m < 0:
        raise DomainError(f"power must be non-negative, got {m}")
    n, l = divmod(m, 4)
    a = -z
    if l == 0:
        base = math.pi / 4.0 * a ** -0.75
    elif l == 1:
        base = math.pi / 8.0 * a ** -0.5
    elif l == 2:
        base = math.pi / 8.0 * a ** -0.25
    else:
        base = -math.log(a) / 16.0
    return z ** n * base
