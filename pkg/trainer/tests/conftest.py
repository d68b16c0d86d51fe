import numpy as np
import pytest

from moveseq_trainer.synthetic import make_sample, mini_topology


@pytest.fixture
def rng():
    return np.random.default_rng(77)


@pytest.fixture
def topo():
    return mini_topology()


@pytest.fixture
def sample(rng):
    return make_sample("side", rng, n_frames=40)
