import numpy as np
import pytest

from plateau_lab import groups as gr


@pytest.fixture(scope="session")
def f2():
    return gr.free_group(2)


@pytest.fixture(scope="session")
def z2():
    return gr.free_abelian_group(2)


@pytest.fixture(scope="session")
def sigma2():
    return gr.surface_group(2)


@pytest.fixture()
def rng():
    return np.random.default_rng(20240814)
