"""
The lattice model: the bilaplacian dispersion, the generator of the rank-one potential,
its Fourier image and the algebraic identities the solver relies on.

Fourier convention: v(p) = (2π)^{-d/2} Σ_x v̂(x) cos(x·p), so that ∫_{T^d} |v|² dq = Σ_x v̂(x)².
"""
import itertools
import logging
import math
from dataclasses import dataclass
from functools import cached_property
from pathlib import Path
from typing import Dict, Iterable, List, Sequence, Tuple, Union

import numpy as np
import ujson as json

from bilap.config import config
from bilap.helpers import const
from bilap.helpers.exceptions import DomainError, GeneratorError, OrderDetectionAmbiguous

logger = logging.getLogger(__name__)

MORSE_RADIUS = 1.0 / math.sqrt(2.0)

Site = Tuple[int, ...]


@dataclass(frozen=True)
class GeneratorPotential:
    """
    Real, even, finitely supported generator v̂ on Z^d.
    Construct through ``from_sites`` or ``from_json_dict``, both validate.
    """

    d: int
    sites: Tuple[Tuple[Site, float], ...]

    def __post_init__(self):
        if not isinstance(self.d, int) or self.d < 1:
            raise GeneratorError(f"dimension must be a positive integer, got {self.d!r}")
        if not self.sites:
            raise GeneratorError("generator support is empty")
        table: Dict[Site, float] = {}
        for x, value in self.sites:
            if len(x) != self.d:
                raise GeneratorError(f"site {x} does not have dimension {self.d}")
            if not math.isfinite(value):
                raise GeneratorError(f"value at site {x} is not finite: {value}")
            if x in table:
                raise GeneratorError(f"site {x} is listed twice")
            table[x] = value
        if all(value == 0.0 for value in table.values()):
            raise GeneratorError("generator vanishes identically")
        for x, value in table.items():
            mirror = tuple(-c for c in x)
            if table.get(mirror) != value:
                raise GeneratorError(
                    f"generator is not even: v({x}) = {value} but v({mirror}) = {table.get(mirror)}"
                )

    @classmethod
    def from_sites(cls, d: int, sites: Iterable[Tuple[Sequence[int], float]]) -> "GeneratorPotential":
        """
        :param d: dimension
        :param sites: pairs (x, v̂(x)); both x and -x must be listed
        :return:
        """
        items = tuple(sorted((tuple(int(c) for c in x), float(value)) for x, value in sites))
        return cls(d=d, sites=items)

    @classmethod
    def from_json_dict(cls, data: Dict) -> "GeneratorPotential":
        """
        Reads {"d": int, "sites": [{"x": [...], "v": float}, ...], "even": bool}.
        With "even": true each listed site stands for the pair {x, -x}
        :param data:
        :return:
        """
        try:
            d = int(data["d"])
            raw = [(tuple(int(c) for c in site["x"]), float(site["v"])) for site in data["sites"]]
        except (KeyError, TypeError, ValueError) as ex:
            raise GeneratorError(f"malformed generator document: {ex}") from ex
        if data.get("even", False):
            expanded: Dict[Site, float] = {}
            for x, value in raw:
                for y in (x, tuple(-c for c in x)):
                    if y in expanded and expanded[y] != value:
                        raise GeneratorError(f"conflicting values for site {y}")
                    expanded[y] = value
            raw = list(expanded.items())
        return cls.from_sites(d, raw)

    def to_json_dict(self) -> Dict:
        """
        Canonical form: one entry per pair {x, -x}, keyed by the lexicographically smaller
        :return:
        """
        canonical = sorted({min(x, tuple(-c for c in x)): value for x, value in self.sites}.items())
        return {
            "d": self.d,
            "even": True,
            "sites": [{"x": list(x), "v": value} for x, value in canonical],
        }

    @classmethod
    def load(cls, path: Union[str, Path]) -> "GeneratorPotential":
        path = Path(path)
        with path.open("r") as f:
            try:
                data = json.loads(f.read())
            except ValueError as ex:
                raise GeneratorError(f"{path}: {ex}") from ex
        return cls.from_json_dict(data)

    def dump(self, path: Union[str, Path]) -> None:
        with Path(path).open("w") as f:
            f.write(json.dumps(self.to_json_dict(), sort_keys=True))

    @cached_property
    def positions(self) -> np.ndarray:
        return np.array([x for x, _ in self.sites], dtype=float).reshape(len(self.sites), self.d)

    @cached_property
    def values(self) -> np.ndarray:
        return np.array([value for _, value in self.sites], dtype=float)

    @property
    def radius(self) -> float:
        return float(np.max(np.abs(self.positions))) if len(self.sites) else 0.0

    @property
    def norm_sq(self) -> float:
        """Σ_x v̂(x)², the torus integral of |v|²"""
        return float(np.sum(self.values ** 2))

    def scaled(self, factor: float) -> "GeneratorPotential":
        return GeneratorPotential.from_sites(self.d, [(x, factor * value) for x, value in self.sites])


@dataclass(frozen=True)
class TorusPoint:
    coords: Tuple[float, ...]

    def __post_init__(self):
        for c in self.coords:
            if not -math.pi <= c < math.pi:
                raise DomainError(f"torus coordinate {c} is outside [-pi, pi)")

    @property
    def d(self) -> int:
        return len(self.coords)

    def as_array(self) -> np.ndarray:
        return np.array(self.coords, dtype=float)


def _check_dimension(gen: GeneratorPotential, p: TorusPoint) -> None:
    if p.d != gen.d:
        raise DomainError(f"point of dimension {p.d} used with a generator of dimension {gen.d}")


def dispersion(p: np.ndarray) -> np.ndarray:
    """
    𝔢(p) = (Σ_i (1 - cos p_i))² for points stacked along the last axis
    :param p: array of shape (..., d)
    :return: array of shape (...)
    """
    s = np.sum(2.0 * np.sin(0.5 * p) ** 2, axis=-1)
    return s * s


def top_distance(p: np.ndarray) -> np.ndarray:
    """
    4d² - 𝔢(p) = (Σ_i (3 - cos p_i))(Σ_i 2 cos²(p_i/2)), with full relative accuracy near π⃗
    :param p: array of shape (..., d)
    :return: array of shape (...)
    """
    return np.sum(3.0 - np.cos(p), axis=-1) * np.sum(2.0 * np.cos(0.5 * p) ** 2, axis=-1)


def edge_distance(p: np.ndarray, edge: str) -> np.ndarray:
    """|𝔢(p) - 𝔢(c)| for the band edge c = 0 (bottom) or π⃗ (top)"""
    return dispersion(p) if edge == const.BOTTOM else top_distance(p)


def dispersion_eval(p: TorusPoint) -> float:
    return float(dispersion(p.as_array()))


def dispersion_top_factorization_check(p: TorusPoint) -> Tuple[float, float]:
    """
    Both sides of 𝔢(q) - 4d² = -(Σ(3 - cos q_i))(Σ(1 + cos q_i))
    :param p:
    :return: (lhs, rhs)
    """
    q = p.as_array()
    lhs = dispersion_eval(p) - 4.0 * p.d ** 2
    rhs = -float(np.sum(3.0 - np.cos(q)) * np.sum(1.0 + np.cos(q)))
    return lhs, rhs


def morse_map(y: np.ndarray) -> np.ndarray:
    """
    φ_i(y) = 2 arcsin y_i, vectorized over the leading axes; no radius check
    """
    return 2.0 * np.arcsin(y)


def morse_map_eval(y: Sequence[float], gamma: float = MORSE_RADIUS) -> TorusPoint:
    """
    The Morse substitution on the ball |y| < gamma <= 1/sqrt(2); satisfies 𝔢(φ(y)) = 4|y|⁴
    :param y:
    :param gamma: ball radius
    :return:
    """
    if gamma > MORSE_RADIUS:
        raise DomainError(f"ball radius {gamma} exceeds 1/sqrt(2)")
    y = np.asarray(y, dtype=float)
    if float(np.linalg.norm(y)) >= gamma:
        raise DomainError(f"|y| = {np.linalg.norm(y)} is not below {gamma}")
    return TorusPoint(tuple(float(c) for c in morse_map(y)))


def fourier_v(gen: GeneratorPotential, p: np.ndarray) -> np.ndarray:
    """
    v(p) for points stacked along the last axis
    :param gen:
    :param p: array of shape (..., d)
    :return: array of shape (...)
    """
    p = np.asarray(p, dtype=float)
    phases = p @ gen.positions.T
    return (2.0 * math.pi) ** (-gen.d / 2.0) * (np.cos(phases) @ gen.values)


def fourier_v_eval(gen: GeneratorPotential, p: TorusPoint) -> float:
    _check_dimension(gen, p)
    return float(fourier_v(gen, p.as_array()))


def v_sq_eval(gen: GeneratorPotential, p: TorusPoint) -> float:
    return fourier_v_eval(gen, p) ** 2


def v_sq(gen: GeneratorPotential, p: np.ndarray) -> np.ndarray:
    v = fourier_v(gen, p)
    return v * v


class RayJet:
    """
    Taylor jet of v along rays leaving an extremal point c of the dispersion (0 or π⃗):

        v(c + t w) = (2π)^{-d/2} Σ_k (-1)^k t^{2k} / (2k)! Σ_x a_x (x·w)^{2k},  a_x = v̂(x) cos(x·c)

    Orders whose moment tensor Σ_x a_x x^α (|α| = 2k) vanishes are dropped exactly, so
    |v(c + t w)|² keeps full relative accuracy for small t however high the vanishing order.
    """

    def __init__(self, gen: GeneratorPotential, at_top: bool = False):
        self.gen = gen
        self.at_top = at_top
        positions = gen.positions
        if at_top:
            parity = np.where(np.sum(positions, axis=1) % 2 == 0, 1.0, -1.0)
        else:
            parity = np.ones(len(positions))
        self.weights = gen.values * parity
        self.leading_order = self._find_leading_order()
        self.orders = list(range(self.leading_order, self.leading_order + config.JET_EXTRA_ORDERS + 1))
        logger.debug(
            "ray jet at %s: leading order t^%d in v",
            "pi" if at_top else "0",
            2 * self.leading_order,
        )

    @property
    def center(self) -> np.ndarray:
        return np.full(self.gen.d, math.pi if self.at_top else 0.0)

    @property
    def vanishing_order(self) -> int:
        """n with |v(c + t w)|² ~ t^{2n}"""
        return 2 * self.leading_order

    def _moments_vanish(self, order: int) -> bool:
        positions = self.gen.positions
        if order == 0:
            return abs(np.sum(self.weights)) <= config.MOMENT_REL_TOL * np.sum(np.abs(self.weights))
        for alpha in itertools.combinations_with_replacement(range(self.gen.d), order):
            monomial = np.prod(positions[:, list(alpha)], axis=1)
            moment = np.dot(self.weights, monomial)
            scale = np.dot(np.abs(self.weights), np.abs(monomial))
            if abs(moment) > config.MOMENT_REL_TOL * scale:
                return False
        return True

    def _find_leading_order(self) -> int:
        for k in range(config.MAX_JET_ORDER + 1):
            if not self._moments_vanish(2 * k):
                return k
        raise OrderDetectionAmbiguous(
            f"v vanishes beyond order t^{2 * config.MAX_JET_ORDER} at the "
            f"{'maximum' if self.at_top else 'minimum'} of the dispersion"
        )

    def value(self, t: float, w: np.ndarray) -> np.ndarray:
        """
        v(c + t w)
        :param t: ray parameter
        :param w: directions of shape (..., d)
        :return:
        """
        w = np.asarray(w, dtype=float)
        if t * max(self.gen.radius, 1.0) > 1.0:
            return fourier_v(self.gen, self.center + t * w)
        projections = w @ self.gen.positions.T
        total = np.zeros(projections.shape[:-1])
        for k in self.orders:
            coefficient = (-1.0) ** k * t ** (2 * k) / math.factorial(2 * k)
            total = total + coefficient * ((projections ** (2 * k)) @ self.weights)
        return (2.0 * math.pi) ** (-self.gen.d / 2.0) * total

    def value_sq(self, t: float, w: np.ndarray) -> np.ndarray:
        v = self.value(t, w)
        return v * v


def site_list(d: int, entries: Iterable[Tuple[Sequence[int], float]]) -> List[Tuple[Site, float]]:
    """Expands (x, value) entries into the even pair list {(x, value), (-x, value)}"""
    table: Dict[Site, float] = {}
    for x, value in entries:
        x = tuple(int(c) for c in x)
        if len(x) != d:
            raise GeneratorError(f"site {x} does not have dimension {d}")
        table[x] = table.get(x, 0.0) + value
        mirror = tuple(-c for c in x)
        if mirror != x:
            table[mirror] = table.get(mirror, 0.0) + value
    return sorted(table.items())
