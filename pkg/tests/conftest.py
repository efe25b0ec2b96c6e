import pytest

from scatterlink import (
    Accuracy,
    DEFAULT_ACCURACY,
    ScenarioParams,
    derive_effective,
)


@pytest.fixture(scope="session")
def params():
    """Near-field reference scenario: unit distances, raw variances (1, 1, 3)."""
    return ScenarioParams()


@pytest.fixture(scope="session")
def eff(params):
    return derive_effective(params)


@pytest.fixture(scope="session")
def far_params():
    """Far-field scenario: source 20 m from both tag and reader."""
    return ScenarioParams(d_sr=20.0, d_st=20.0)


@pytest.fixture(scope="session")
def acc():
    return DEFAULT_ACCURACY


@pytest.fixture(scope="session")
def wide_acc():
    """Budget for evaluations far in the density tail or at large thresholds."""
    return Accuracy(abs_tol=1e-12, max_terms=2000, max_quad_nodes=4096)
