import numpy as np
import pytest

from hrlgym.actions import ActionRegistry
from hrlgym.encoder import EncoderConfig, ObservationBuilder
from hrlgym.policy import PolicyConfig
from hrlgym.tasks import generate_synthetic_suite


@pytest.fixture(scope="session")
def registry():
    return ActionRegistry.default()


@pytest.fixture(scope="session")
def default_suite(registry):
    """The default 135-task synthetic suite (90 simple / 45 hard, seed 0)."""
    return generate_synthetic_suite(0, 90, 45, registry)


@pytest.fixture(scope="session")
def small_suite(registry):
    return generate_synthetic_suite(7, 4, 2, registry)


@pytest.fixture(scope="session")
def small_builder(small_suite):
    return ObservationBuilder(small_suite, EncoderConfig(embed_dim=0, state_size=5, seed=0))


@pytest.fixture
def rng():
    return np.random.default_rng(1234)


def tiny_policy_config(n_tasks=4, embed_dim=6, state_size=5):
    """Miniature dimensions so gradient checks stay fast."""
    return PolicyConfig(n_tasks=n_tasks, embed_dim=embed_dim, state_size=state_size,
                        vision_dim=12, vision_out=8, id_dim=4, desc_out=4,
                        numeric_hidden=8, numeric_out=8, trunk_width=16)
