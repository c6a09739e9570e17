"""Deterministic chunked map/reduce.

Work is split into chunks whose boundaries depend only on the problem size,
never on the worker count; partial results are gathered in chunk order and
reduced with an exactly rounded sum, so output bits do not depend on how many
threads ran.
"""
from __future__ import annotations

import math
import os
from concurrent.futures import ThreadPoolExecutor
from typing import Callable, Iterable, Sequence, TypeVar

T = TypeVar("T")

ENV_THREADS = "GOWERS_LAB_THREADS"


def default_workers() -> int:
    raw = os.environ.get(ENV_THREADS, "")
    try:
        n = int(raw)
    except ValueError:
        return 1
    return max(1, n)


def fixed_chunks(n: int, chunk: int) -> list[tuple[int, int]]:
    chunk = max(1, int(chunk))
    return [(lo, min(lo + chunk, n)) for lo in range(0, n, chunk)]


def ordered_map(fn: Callable[[T], object], items: Sequence[T], workers: int | None = None) -> list:
    workers = default_workers() if workers is None else max(1, int(workers))
    if workers == 1 or len(items) <= 1:
        return [fn(it) for it in items]
    with ThreadPoolExecutor(max_workers=workers) as pool:
        return list(pool.map(fn, items))


def exact_sum(values: Iterable[float]) -> float:
    return math.fsum(values)


def exact_complex_sum(values: Iterable[complex]) -> complex:
    vals = list(values)
    return complex(math.fsum(v.real for v in vals), math.fsum(v.imag for v in vals))
