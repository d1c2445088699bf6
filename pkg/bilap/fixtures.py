"""
Named generators with hand-derived vanishing orders.

    delta(d)       v̂ = δ_0                            v = (2π)^{-d/2}               n_o = 0, n^o = 0
    dip(d)         v̂ = Σ_i (δ_{e_i} + δ_{-e_i}) - 2d δ_0   v = -2 (2π)^{-d/2} Σ(1 - cos p_i)   n_o = 2, n^o = 0
    hump(d)        v̂ = Σ_i (δ_{e_i} + δ_{-e_i}) + 2d δ_0   v = 2 (2π)^{-d/2} Σ(1 + cos p_i)    n_o = 0, n^o = 2
    dip_squared    v̂ = δ_{±2} - 4 δ_{±1} + 6 δ_0 (d = 1)   v = 4 (2π)^{-1/2} (1 - cos p)²     n_o = 4, n^o = 0
    pair           v̂ = δ_{±1} (d = 1)                     v = 2 (2π)^{-1/2} cos p           n_o = 0, n^o = 0

For dip, |v|²/𝔢 is the constant 4 (2π)^{-d}, so μ_o = 1/4 in every dimension.
"""
from dataclasses import dataclass
from typing import Callable, Dict, List, Optional, Tuple

from bilap.core_model import GeneratorPotential, site_list
from bilap.helpers.exceptions import ConfigError

MAX_FIXTURE_DIMENSION = 5


def _unit(d: int, i: int) -> Tuple[int, ...]:
    return tuple(1 if j == i else 0 for j in range(d))


def delta(d: int) -> GeneratorPotential:
    return GeneratorPotential.from_sites(d, [((0,) * d, 1.0)])


def dip(d: int) -> GeneratorPotential:
    entries = [(_unit(d, i), 1.0) for i in range(d)] + [((0,) * d, -2.0 * d)]
    return GeneratorPotential.from_sites(d, site_list(d, entries))


def hump(d: int) -> GeneratorPotential:
    entries = [(_unit(d, i), 1.0) for i in range(d)] + [((0,) * d, 2.0 * d)]
    return GeneratorPotential.from_sites(d, site_list(d, entries))


def dip_squared(d: int = 1) -> GeneratorPotential:
    if d != 1:
        raise ConfigError("problem.generator.fixture", "dip_squared exists in d = 1 only")
    return GeneratorPotential.from_sites(1, site_list(1, [((2,), 1.0), ((1,), -4.0), ((0,), 6.0)]))


def pair(d: int = 1) -> GeneratorPotential:
    if d != 1:
        raise ConfigError("problem.generator.fixture", "pair exists in d = 1 only")
    return GeneratorPotential.from_sites(1, site_list(1, [((1,), 1.0)]))


@dataclass(frozen=True)
class FixtureInfo:
    name: str
    build: Callable[[int], GeneratorPotential]
    dimensions: Tuple[int, ...]
    n_bottom: int
    n_top: int
    note: str = ""

    def to_json_dict(self) -> Dict:
        return {
            "name": self.name,
            "dimensions": list(self.dimensions),
            "n_o": self.n_bottom,
            "n^o": self.n_top,
            "note": self.note,
        }


ALL_DIMENSIONS = tuple(range(1, MAX_FIXTURE_DIMENSION + 1))

FIXTURES: Dict[str, FixtureInfo] = {
    info.name: info
    for info in (
        FixtureInfo("delta", delta, ALL_DIMENSIONS, 0, 0),
        FixtureInfo("dip", dip, ALL_DIMENSIONS, 2, 0, "mu_o = 1/4 in every dimension"),
        FixtureInfo("hump", hump, ALL_DIMENSIONS, 0, 2),
        FixtureInfo("dip_squared", dip_squared, (1,), 4, 0),
        FixtureInfo("pair", pair, (1,), 0, 0),
    )
}


def get_fixture(name: str, d: int) -> GeneratorPotential:
    try:
        info = FIXTURES[name]
    except KeyError:
        raise ConfigError("problem.generator.fixture", f"unknown fixture {name!r}, known: {sorted(FIXTURES)}")
    if d not in info.dimensions:
        raise ConfigError("problem.generator.fixture", f"{name} is not defined in d = {d}")
    return info.build(d)


def fixture_table(names: Optional[List[str]] = None) -> List[Dict]:
    names = sorted(FIXTURES) if names is None else names
    return [FIXTURES[name].to_json_dict() for name in names]
