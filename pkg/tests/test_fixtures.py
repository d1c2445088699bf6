import pytest

from bilap.core_model import RayJet
from bilap.fixtures import FIXTURES, fixture_table, get_fixture
from bilap.helpers.exceptions import ConfigError


@pytest.mark.parametrize(
    "name, d",
    [(name, d) for name, info in sorted(FIXTURES.items()) for d in info.dimensions],
)
def test_declared_orders_match_jets(name, d):
    info = FIXTURES[name]
    gen = get_fixture(name, d)

    assert d == gen.d
    assert info.n_bottom == RayJet(gen).vanishing_order
    assert info.n_top == RayJet(gen, at_top=True).vanishing_order


def test_unknown_fixture():
    with pytest.raises(ConfigError) as ex:
        get_fixture("spike", 1)

    assert "problem.generator.fixture" == ex.value.field


def test_fixture_outside_its_dimensions():
    with pytest.raises(ConfigError):
        get_fixture("dip_squared", 2)


def test_table():
    table = fixture_table()

    assert sorted(FIXTURES) == [row["name"] for row in table]
    assert {"name": "pair", "dimensions": [1], "n_o": 0, "n^o": 0, "note": ""} == fixture_table(["pair"])[0]
