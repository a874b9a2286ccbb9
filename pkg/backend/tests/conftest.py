import numpy as np
import pytest

from core.linalg import DensityMatrix
from models.waveguide import Rates, default_rates


@pytest.fixture
def waveguide_rates() -> Rates:
    return default_rates()


@pytest.fixture
def werner():
    return DensityMatrix.werner


@pytest.fixture
def random_x_states():
    """Seeded factory: random_x_states(n, real=False) -> list of X states."""
    def factory(n: int, real: bool = False, seed: int = 7) -> list[DensityMatrix]:
        rng = np.random.default_rng(seed)
        return [DensityMatrix.random_x_state(rng, real=real) for _ in range(n)]

    return factory


@pytest.fixture
def output_dir(tmp_path) -> str:
    return str(tmp_path / "results")
