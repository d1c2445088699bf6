"""
Finite momentum-grid ground truth.

On the midpoint grid the operator becomes A = diag(𝔢(p_k)) - μ u u^T with
u_k = v(p_k) (2π/N)^{d/2}. Its extremal eigenvalue is found twice: as the root of the
finite secular equation 1 - μ Σ u_k²/(𝔢_k - z) and by dense diagonalization.
"""
import logging
import math
from dataclasses import dataclass
from typing import Dict, List, Optional, Sequence, Tuple, Union

import numpy as np
from scipy import linalg

from bilap.config import config
from bilap.core_model import GeneratorPotential, dispersion, fourier_v
from bilap.helpers.exceptions import DomainError, NoRoot, NotConverged, SizeExceeded
from bilap.helpers.roots import bisect_newton, expand_bracket
from bilap.quadrature import TorusGrid, sample_torus
from bilap.spectral_solver import EigenResult, SpectralProblem, eigenvalue_solve

logger = logging.getLogger(__name__)


@dataclass(frozen=True)
class MomentumGridModel:
    grid: TorusGrid
    diag: np.ndarray
    u: np.ndarray

    @classmethod
    def build(cls, gen: GeneratorPotential, grid: TorusGrid) -> "MomentumGridModel":
        if gen.d != grid.d:
            raise DomainError(f"generator has dimension {gen.d}, grid has {grid.d}")
        diag = sample_torus(dispersion, grid)
        u = sample_torus(lambda p: fourier_v(gen, p), grid) * math.sqrt(grid.weight)
        return cls(grid=grid, diag=diag, u=u)

    @property
    def n_total(self) -> int:
        return self.grid.size

    @property
    def norm_sq(self) -> float:
        return float(np.dot(self.u, self.u))

    def secular(self, mu: float, z: float) -> float:
        return 1.0 - mu * float(np.sum(self.u ** 2 / (self.diag - z)))

    def matrix(self, mu: float) -> np.ndarray:
        return np.diag(self.diag) - mu * np.outer(self.u, self.u)


def _edge_terms(model: MomentumGridModel, edge_value: float) -> Tuple[np.ndarray, float]:
    """Mask of the diagonal entries at the extremal value and their total weight"""
    at_edge = np.abs(model.diag - edge_value) <= 1e-14 * max(1.0, abs(edge_value))
    return at_edge, float(np.sum(model.u[at_edge] ** 2))


def secular_root(model: MomentumGridModel, mu: float) -> float:
    """
    Root of 1 - μ Σ u_k²/(diag_k - z) below min(diag) for μ > 0, above max(diag) for μ < 0.
    The root exists iff the secular function is negative at the extremal diagonal value,
    which always holds when u does not vanish there
    :param model:
    :param mu:
    :return:
    :raises NoRoot:
    """
    if mu == 0:
        raise DomainError("the finite secular equation has no root at mu = 0")
    below = mu > 0
    edge_value = float(np.min(model.diag) if below else np.max(model.diag))
    at_edge, edge_weight = _edge_terms(model, edge_value)
    if edge_weight == 0.0:
        rest = model.diag[~at_edge]
        boundary = 1.0 - mu * float(np.sum(model.u[~at_edge] ** 2 / (rest - edge_value)))
        if boundary >= 0.0:
            raise NoRoot(f"mu = {mu}: secular function is {boundary:.6e} >= 0 at the grid edge {edge_value:.6e}")
    # the distance to the extremal diagonal value is the search variable on both sides
    gaps = model.diag - edge_value if below else edge_value - model.diag
    weights = model.u ** 2

    def func(delta: float) -> float:
        return 1.0 - abs(mu) * float(np.sum(weights / (gaps + delta)))

    def deriv(delta: float) -> float:
        return abs(mu) * float(np.sum(weights / (gaps + delta) ** 2))

    bracket = expand_bracket(func, 1.0, max_steps=config.BRACKET_MAX_STEPS)
    root = bisect_newton(func, deriv, bracket.lo, bracket.hi, config.BISECTION_REL_WIDTH, config.NEWTON_MAX_STEPS)
    if abs(root.value) > config.ORACLE_RESIDUAL_TOL:
        raise NotConverged(f"finite secular root at mu={mu} has residual {abs(root.value):.3e}")
    return edge_value - root.root if below else edge_value + root.root


def dense_eig_extremal(model: MomentumGridModel, mu: float) -> Tuple[float, float]:
    """Smallest and largest eigenvalue of diag - μ u u^T"""
    if model.n_total > config.DENSE_EIG_CAP:
        raise SizeExceeded(f"dense eigensolver is capped at {config.DENSE_EIG_CAP} points, grid has {model.n_total}")
    eigenvalues = linalg.eigvalsh(model.matrix(mu))
    return float(eigenvalues[0]), float(eigenvalues[-1])


@dataclass(frozen=True)
class PlaneWaveCheck:
    k: Tuple[int, ...]
    multiplier: float
    deviation: float
    applied: np.ndarray
    expected: np.ndarray

    def to_json_dict(self) -> Dict:
        return {"k": list(self.k), "multiplier": self.multiplier, "deviation": self.deviation}


def periodic_laplacian(f: np.ndarray) -> np.ndarray:
    """(Δ̂ f)(x) = ½ Σ_{|s|=1} [f(x) - f(x+s)] on the periodic box"""
    result = np.zeros_like(f)
    for axis in range(f.ndim):
        result += 2.0 * f - np.roll(f, -1, axis=axis) - np.roll(f, 1, axis=axis)
    return 0.5 * result


def realspace_planewave_check(d: int, n: int, k: Union[int, Sequence[int]]) -> PlaneWaveCheck:
    """
    Applies Δ̂² to e^{i p·x}, p = 2π k/N, on ℤ_N^d and compares with 𝔢(p) e^{i p·x}
    :param d:
    :param n: box side
    :param k: integer frequency, broadcast to every coordinate when scalar
    :return:
    """
    ks = (int(k),) * d if isinstance(k, (int, np.integer)) else tuple(int(x) for x in k)
    if len(ks) != d:
        raise DomainError(f"frequency {ks} does not have {d} components")
    momentum = 2.0 * math.pi * np.array(ks, dtype=float) / n
    x = np.indices((n,) * d, dtype=float)
    phase = np.tensordot(momentum, x, axes=1)
    wave = np.exp(1j * phase)
    applied = periodic_laplacian(periodic_laplacian(wave))
    multiplier = float(dispersion(momentum))
    expected = multiplier * wave
    deviation = float(np.max(np.abs(applied - expected)))
    return PlaneWaveCheck(k=ks, multiplier=multiplier, deviation=deviation, applied=applied, expected=expected)


@dataclass(frozen=True)
class OracleComparison:
    n: int
    n_total: int
    e_secular: Optional[float]
    e_matrix: Optional[float]
    continuum_gap: Optional[float] = None

    @property
    def abs_diff(self) -> Optional[float]:
        if self.e_secular is None or self.e_matrix is None:
            return None
        return abs(self.e_secular - self.e_matrix)

    def to_row(self) -> Dict:
        return {
            "N": self.n,
            "e_secular": self.e_secular,
            "e_matrix": self.e_matrix,
            "diff": self.abs_diff,
            "continuum_gap": self.continuum_gap,
        }

    def to_json_dict(self) -> Dict:
        return dict(self.to_row(), n_total=self.n_total)


@dataclass(frozen=True)
class OracleReport:
    mu: float
    rows: List[OracleComparison]
    continuum: Optional[EigenResult]

    @property
    def gaps_decreasing(self) -> Optional[bool]:
        gaps = [row.continuum_gap for row in self.rows]
        if any(gap is None for gap in gaps):
            return None
        return all(b < a for a, b in zip(gaps, gaps[1:]))

    @property
    def max_abs_diff(self) -> Optional[float]:
        diffs = [row.abs_diff for row in self.rows if row.abs_diff is not None]
        return max(diffs) if diffs else None

    def to_json_dict(self) -> Dict:
        return {
            "mu": self.mu,
            "rows": [row.to_json_dict() for row in self.rows],
            "continuum": None if self.continuum is None else self.continuum.to_json_dict(),
            "gaps_decreasing": self.gaps_decreasing,
            "max_abs_diff": self.max_abs_diff,
        }


def compare_on_grid(gen: GeneratorPotential, grid: TorusGrid, mu: float) -> OracleComparison:
    """Both finite-grid eigenvalues at one N; the dense one is skipped above the cap"""
    model = MomentumGridModel.build(gen, grid)
    if mu == 0:
        return OracleComparison(n=grid.n, n_total=model.n_total, e_secular=None, e_matrix=None)
    try:
        e_secular = secular_root(model, mu)
    except NoRoot as ex:
        logger.info("N=%d: %s", grid.n, ex)
        e_secular = None
    e_matrix = None
    if model.n_total <= config.DENSE_EIG_CAP:
        lowest, highest = dense_eig_extremal(model, mu)
        e_matrix = lowest if mu > 0 else highest
    return OracleComparison(n=grid.n, n_total=model.n_total, e_secular=e_secular, e_matrix=e_matrix)


def oracle_compare(prob: SpectralProblem, mu: float, n: int, levels: int = 3) -> OracleReport:
    """
    Finite-grid eigenvalues on N, 2N, ... next to the continuum e(μ) of the solver
    :param prob:
    :param mu:
    :param n: first grid size
    :param levels: number of grid sizes
    :return:
    """
    continuum = None
    if mu != 0:
        outcome = eigenvalue_solve(prob, mu)
        continuum = outcome if isinstance(outcome, EigenResult) else None
    rows = []
    for j in range(levels):
        row = compare_on_grid(prob.generator, TorusGrid(prob.d, n * 2 ** j), mu)
        if continuum is not None and row.e_secular is not None:
            row = OracleComparison(
                n=row.n,
                n_total=row.n_total,
                e_secular=row.e_secular,
                e_matrix=row.e_matrix,
                continuum_gap=abs(row.e_secular - continuum.e),
            )
        logger.info("oracle N=%d: %s", row.n, row.to_row())
        rows.append(row)
    return OracleReport(mu=mu, rows=rows, continuum=continuum)
