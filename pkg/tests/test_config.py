import pytest

from metric_sparsity.config import get_settings, worker_map
from metric_sparsity.generators import gen_grid
from metric_sparsity.wcol import OrderedPartition, weak_reach_table


def test_defaults(fresh_settings):
    for name in ("MST_THREADS", "MST_LOG_LEVEL", "MST_BRUTE_FORCE_LIMIT"):
        fresh_settings.delenv(name, raising=False)
    settings = get_settings()
    assert settings.threads == 1
    assert settings.log_level == "INFO"
    assert settings.brute_force_limit == 10


def test_environment_overrides(fresh_settings):
    fresh_settings.setenv("MST_THREADS", "4")
    fresh_settings.setenv("MST_LOG_LEVEL", "debug")
    settings = get_settings()
    assert settings.threads == 4
    assert settings.log_level == "DEBUG"


def test_rejects_nonpositive_threads(fresh_settings):
    fresh_settings.setenv("MST_THREADS", "0")
    with pytest.raises(ValueError):
        get_settings()


def test_worker_map_keeps_order(fresh_settings):
    fresh_settings.setenv("MST_THREADS", "3")
    assert worker_map(lambda x: x * x, range(10)) == [x * x for x in range(10)]


def test_threaded_weak_reach_matches_serial(fresh_settings):
    G = gen_grid(3, 4, (1, 3), 5)
    P = OrderedPartition(parts=[[v] for v in G.vertices()])
    serial = weak_reach_table(G, P, 3)
    fresh_settings.setenv("MST_THREADS", "4")
    get_settings.cache_clear()
    assert weak_reach_table(G, P, 3).reach == serial.reach
