"""
Pump sweeps over a process pool
"""

import logging
import os
from concurrent.futures import ProcessPoolExecutor
from typing import Callable, Iterable, List, Optional, TypeVar

from errors import ConfigError
from fluct_solver import FluctSolver, SteadyState
from laser_params import LaserParams

logger = logging.getLogger(__name__)

T = TypeVar("T")
R = TypeVar("R")


def worker_count(workers: Optional[int] = None) -> int:
    """Explicit count, else NANOLASER_THREADS, else the CPU count"""
    if workers is None:
        raw = os.environ.get("NANOLASER_THREADS")
        if raw:
            try:
                workers = int(raw)
            except ValueError as exc:
                raise ConfigError(f"NANOLASER_THREADS must be an integer (got {raw!r})") from exc
        else:
            workers = os.cpu_count() or 1
    if workers < 1:
        raise ConfigError(f"worker count must be >= 1 (got {workers})")
    return workers


def run_sweep(func: Callable[[T], R], items: Iterable[T], workers: Optional[int] = None) -> List[R]:
    """
    Map a picklable top-level function over items; results keep input order.
    A single worker or a single item runs in-process.
    """
    items = list(items)
    workers = min(worker_count(workers), max(len(items), 1))
    if workers == 1:
        return [func(item) for item in items]
    logger.info("🚀 Sweeping %d points on %d workers", len(items), workers)
    with ProcessPoolExecutor(max_workers=workers) as executor:
        futures = [executor.submit(func, item) for item in items]
        return [future.result() for future in futures]


def solve_steady_at(params: LaserParams) -> SteadyState:
    """Worker: steady state at params.P"""
    return FluctSolver(params).solve_steady()


def steady_sweep(params: LaserParams, pumps: Iterable[float], workers: Optional[int] = None) -> List[SteadyState]:
    return run_sweep(solve_steady_at, [params.with_pump(P) for P in pumps], workers)
