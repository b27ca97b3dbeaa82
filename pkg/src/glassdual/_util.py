"""Small shared helpers: thread cap, reproducible RNG streams."""

import os

import numpy as np

__all__ = ["thread_cap", "rng_stream", "THREADS_ENV"]

THREADS_ENV = "GLASSDUAL_THREADS"


def thread_cap() -> int:
    """Worker parallelism cap: GLASSDUAL_THREADS if set, else cpu count."""
    raw = os.environ.get(THREADS_ENV)
    if raw is not None:
        try:
            n = int(raw)
        except ValueError as exc:
            raise ValueError(f"{THREADS_ENV} must be an integer, got {raw!r}") from exc
        if n < 1:
            raise ValueError(f"{THREADS_ENV} must be >= 1, got {n}")
        return n
    return os.cpu_count() or 1


def rng_stream(seed: int, index: int) -> np.random.Generator:
    """Deterministic, independent stream keyed by (seed, index).

    Counter-style derivation: the same (seed, index) pair always yields the
    same stream, and distinct indices never collide, so replicas can be
    generated in any order (or concurrently) without changing results.
    """
    return np.random.default_rng(np.random.SeedSequence(entropy=seed, spawn_key=(index,)))
