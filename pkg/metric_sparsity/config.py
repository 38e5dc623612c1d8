import logging
import os
from concurrent.futures import ThreadPoolExecutor
from functools import lru_cache
from typing import Callable, Iterable, List, TypeVar

from dotenv import load_dotenv
from pydantic import BaseModel, Field

# Load environment variables from .env file
load_dotenv()

logger = logging.getLogger(__name__)

LOG_FORMAT = "%(asctime)s - %(name)s - %(levelname)s - %(message)s"

T = TypeVar("T")
R = TypeVar("R")


class Settings(BaseModel):
    threads: int = Field(1, ge=1)
    log_level: str = "INFO"
    max_lb_vertices: int = Field(200_000, ge=1)
    brute_force_limit: int = Field(10, ge=1)
    verify_max_subsets: int = Field(200_000, ge=1)
    max_bound_bits: int = Field(1_000_000, ge=1)


@lru_cache(maxsize=1)
def get_settings() -> Settings:
    """Read MST_* environment variables once per process."""
    return Settings(
        threads=int(os.getenv("MST_THREADS", "1")),
        log_level=os.getenv("MST_LOG_LEVEL", "INFO").upper(),
        max_lb_vertices=int(os.getenv("MST_MAX_LB_VERTICES", "200000")),
        brute_force_limit=int(os.getenv("MST_BRUTE_FORCE_LIMIT", "10")),
        verify_max_subsets=int(os.getenv("MST_VERIFY_MAX_SUBSETS", "200000")),
        max_bound_bits=int(os.getenv("MST_MAX_BOUND_BITS", "1000000")),
    )


def configure_logging(level: str = None) -> None:
    logging.basicConfig(
        level=level or get_settings().log_level,
        format=LOG_FORMAT,
    )


def worker_map(fn: Callable[[T], R], items: Iterable[T]) -> List[R]:
    """Map `fn` over `items` in order, on up to MST_THREADS worker threads."""
    items = list(items)
    threads = get_settings().threads
    if threads <= 1 or len(items) <= 1:
        return [fn(item) for item in items]
    with ThreadPoolExecutor(max_workers=threads) as pool:
        return list(pool.map(fn, items))
