"""Order-preserving process pool; results come back in submission order."""

from __future__ import annotations

import os
from concurrent.futures import ProcessPoolExecutor
from typing import Any, Callable, Iterable, Sequence

WORKERS_ENV = "SUBCONV_LAB_WORKERS"


def resolve_workers(requested: int | None = None) -> int:
    env = os.environ.get(WORKERS_ENV)
    if env:
        n = int(env)
    elif requested is not None:
        n = int(requested)
    else:
        n = 1
    if n < 1:
        raise ValueError("worker count must be >= 1")
    return n


def ordered_map(fn: Callable[..., Any], arg_tuples: Sequence[tuple], workers: int = 1) -> list[Any]:
    if workers <= 1 or len(arg_tuples) <= 1:
        return [fn(*args) for args in arg_tuples]
    with ProcessPoolExecutor(max_workers=workers) as pool:
        return list(pool.map(_star, [(fn, args) for args in arg_tuples], chunksize=max(1, len(arg_tuples) // (4 * workers))))


def _star(packed: tuple[Callable[..., Any], Iterable]) -> Any:
    fn, args = packed
    return fn(*args)
