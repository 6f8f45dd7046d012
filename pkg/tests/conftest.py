"""Shared test fixtures for mcp-cfrit tests."""

from collections.abc import Callable, Generator

import numpy as np
import pytest

from mcp_cfrit_crunchtools.codec import QuantizationConfig
from mcp_cfrit_crunchtools.models import ScenarioConfig
from mcp_cfrit_crunchtools.modmath import largest_safe_q
from mcp_cfrit_crunchtools.plantlab import TuningDataset, dataset_from_scenario
from mcp_cfrit_crunchtools.scenarios import load_scenario

HADAMARD = {
    1: np.array([[1.0]]),
    2: np.array([[1.0, 1.0], [1.0, -1.0]]),
    4: np.array(
        [
            [1.0, 1.0, 1.0, 1.0],
            [1.0, -1.0, 1.0, -1.0],
            [1.0, 1.0, -1.0, -1.0],
            [1.0, -1.0, -1.0, 1.0],
        ]
    ),
}


@pytest.fixture(autouse=True)
def _reset_singletons(
    tmp_path_factory: pytest.TempPathFactory, monkeypatch: pytest.MonkeyPatch
) -> Generator[None, None, None]:
    """Reset the config and prime-cache singletons; point the cache at a temp dir."""
    import mcp_cfrit_crunchtools.config as config_mod
    import mcp_cfrit_crunchtools.primecache as cache_mod

    monkeypatch.setenv("CFRIT_PRIME_CACHE_DIR", str(tmp_path_factory.getbasetemp() / "primes"))
    monkeypatch.delenv("CFRIT_THREADS", raising=False)
    monkeypatch.delenv("CFRIT_LOG_LEVEL", raising=False)
    config_mod._config = None
    cache_mod._cache = None
    yield
    config_mod._config = None
    cache_mod._cache = None


class ScriptedRandom:
    """RandomSource that replays fixed values (mod stop)."""

    def __init__(self, values: list[int]) -> None:
        self._values = list(values)
        self._index = 0

    def randrange(self, stop: int, /) -> int:
        value = self._values[self._index % len(self._values)] % stop
        self._index += 1
        return value


def make_random_dataset(n: int, N: int, seed: int = 0) -> TuningDataset:
    """Gaussian E and W; Psi is invertible with probability one."""
    gen = np.random.default_rng(seed)
    return TuningDataset.of(gen.normal(size=n * N), gen.normal(size=(n * N, n)))


def make_orthogonal_dataset(n: int, N: int, seed: int = 0) -> TuningDataset:
    """E uniform in [-0.3, 0.3]; W = 0.3 * tiled Hadamard rows, row signs and order shuffled.

    Psi = 0.09 n N I, so every term is bounded by E_max W_max / lambda_min and
    every factor has magnitude at most 1.
    """
    gen = np.random.default_rng(seed)
    rows = np.tile(HADAMARD[n], (N, 1)) * gen.choice([-1.0, 1.0], size=(n * N, 1))
    W = 0.3 * rows[gen.permutation(n * N)]
    E = gen.uniform(-0.3, 0.3, size=n * N)
    return TuningDataset.of(E, W)


@pytest.fixture
def toy_scenario() -> ScenarioConfig:
    return load_scenario("toy")


@pytest.fixture
def reference_scenario() -> ScenarioConfig:
    return load_scenario("reference")


@pytest.fixture
def toy_dataset(toy_scenario: ScenarioConfig) -> TuningDataset:
    ds, _ = dataset_from_scenario(toy_scenario)
    return ds


@pytest.fixture
def reference_dataset(reference_scenario: ScenarioConfig) -> TuningDataset:
    ds, _ = dataset_from_scenario(reference_scenario)
    return ds


@pytest.fixture
def orthogonal_dataset() -> Callable[..., TuningDataset]:
    return make_orthogonal_dataset


@pytest.fixture
def quantizer() -> Callable[[float, int], QuantizationConfig]:
    def build(gamma: float, kappa: int) -> QuantizationConfig:
        return QuantizationConfig(gamma=gamma, primes=largest_safe_q(kappa))

    return build
