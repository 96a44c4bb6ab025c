import numpy as np
import pytest

from matchbench.frames import Frame
from matchbench.synthgen import gen_texture


@pytest.fixture(scope="session")
def texture_800() -> Frame:
    """Seeded broadband texture shared by feature/matching tests."""
    return gen_texture(42, 800, 600)


@pytest.fixture(scope="session")
def textured_frame(texture_800) -> Frame:
    return Frame(texture_800.data[:480, :640])


def random_frame(rng, w, h, channels=1) -> Frame:
    shape = (h, w) if channels == 1 else (h, w, 3)
    return Frame(rng.integers(0, 256, shape, dtype=np.uint8))
