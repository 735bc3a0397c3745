"""Small shared helpers: deterministic parallel mapping and binomial intervals."""

from __future__ import annotations

import math
from concurrent.futures import ThreadPoolExecutor
from typing import Callable, Iterable, Sequence, TypeVar

T = TypeVar("T")
R = TypeVar("R")


def parallel_map(fn: Callable[[T], R], items: Sequence[T], threads: int = 1) -> list[R]:
    """Map preserving input order; results do not depend on the thread count."""
    if threads <= 1 or len(items) <= 1:
        return [fn(x) for x in items]
    with ThreadPoolExecutor(max_workers=threads) as ex:
        return list(ex.map(fn, items))


def binomial_ci(successes: int, trials: int, z: float = 1.96) -> tuple[float, float, float]:
    """(estimate, ci_low, ci_high) under the normal approximation, clipped to [0, 1]."""
    if trials <= 0:
        raise ValueError("trials must be positive")
    p = successes / trials
    half = z * math.sqrt(p * (1.0 - p) / trials)
    return p, max(0.0, p - half), min(1.0, p + half)
