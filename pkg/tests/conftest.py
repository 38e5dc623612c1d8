import pytest
from hypothesis import HealthCheck, settings

from metric_sparsity.config import get_settings
from metric_sparsity.graph import WeightedGraph

settings.register_profile(
    "metric_sparsity", deadline=None, max_examples=25, suppress_health_check=[HealthCheck.too_slow]
)
settings.load_profile("metric_sparsity")


def path_graph(n: int, weight=1) -> WeightedGraph:
    return WeightedGraph(vertex_count=n, edges=[(v, v + 1, weight) for v in range(1, n)])


def star_graph(leaves: int) -> WeightedGraph:
    """Center 1 with unit edges to leaves 2..leaves+1."""
    return WeightedGraph(vertex_count=leaves + 1, edges=[(1, v, 1) for v in range(2, leaves + 2)])


@pytest.fixture
def unit_path():
    return path_graph(5)


@pytest.fixture
def fresh_settings(monkeypatch):
    """Clear the cached settings so a test can override MST_* variables."""
    get_settings.cache_clear()
    yield monkeypatch
    get_settings.cache_clear()
