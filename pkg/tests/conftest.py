import numpy as np
import pytest

from hotspeckle import SpeckleSpec, gen_speckle


@pytest.fixture(scope="session")
def speckle_190():
    """Default-texture speckle used by several module tests."""
    return gen_speckle(SpeckleSpec(width=190, height=190, seed=42))


@pytest.fixture(scope="session")
def speckle_corpus_10():
    """Ten small default speckles with distinct seeds."""
    return [gen_speckle(SpeckleSpec(width=160, height=160, seed=s)) for s in range(10)]


@pytest.fixture()
def rng():
    return np.random.default_rng(1234)
