"""Bounded work queue for independent solver runs."""
from __future__ import annotations

import os
from concurrent.futures import ProcessPoolExecutor
from typing import Callable, Sequence

__all__ = ["default_workers", "run_jobs", "WORKERS_ENV"]

WORKERS_ENV = "CHIRPLOCK_WORKERS"


def default_workers() -> int:
    raw = os.environ.get(WORKERS_ENV)
    if raw:
        try:
            n = int(raw)
        except ValueError:
            raise ValueError(f"{WORKERS_ENV} must be an integer, got {raw!r}") from None
        if n < 1:
            raise ValueError(f"{WORKERS_ENV} must be >= 1")
        return n
    return 1


def run_jobs(fn: Callable, jobs: Sequence, workers: int | None = None) -> list:
    """Apply ``fn`` to every job; results come back in job order.

    Jobs share nothing, so the worker count only changes wall time.  ``fn``
    must be a module-level function when ``workers > 1``.
    """
    jobs = list(jobs)
    workers = default_workers() if workers is None else workers
    if workers < 1:
        raise ValueError("workers must be >= 1")
    if workers == 1 or len(jobs) <= 1:
        return [fn(j) for j in jobs]
    with ProcessPoolExecutor(max_workers=min(workers, len(jobs))) as pool:
        return list(pool.map(fn, jobs))

