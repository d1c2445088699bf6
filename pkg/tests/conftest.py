import pytest

from bilap.fixtures import delta, dip
from bilap.spectral_solver import SpectralProblem


@pytest.fixture(scope="session")
def delta_1d() -> SpectralProblem:
    return SpectralProblem(d=1, generator=delta(1))


@pytest.fixture(scope="session")
def delta_2d() -> SpectralProblem:
    return SpectralProblem(d=2, generator=delta(2))


@pytest.fixture(scope="session")
def dip_1d() -> SpectralProblem:
    return SpectralProblem(d=1, generator=dip(1))
