import pytest

from onionclock import DobcConfig, HashConfig, default_registry
from onionclock.hashing import state_digest


@pytest.fixture
def paper_config():
    """The worked-example layer shape: 3 layers, slots (4,2,1), widths (1,2,3)."""
    return DobcConfig(HashConfig(n=256, m=4, seed=0), (4, 2, 1), (1, 2, 3))


@pytest.fixture
def registry():
    return default_registry()


def walk_digest(t: int) -> bytes:
    return state_digest(b"walk:%d" % t)
