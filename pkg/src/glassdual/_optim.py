"""Derivative-free optimization helpers.

Golden-section line search (the only 1-D routine used anywhere), a softplus
parametrization of monotone step functions, and a seeded multistart
Nelder-Mead driver with coordinate-descent refinement.  Multistarts run on a
thread pool capped by GLASSDUAL_THREADS; results merge deterministically
(best value, ties broken lexicographically on the raw parameter vector).
"""

from __future__ import annotations

from concurrent.futures import ThreadPoolExecutor

import numpy as np
from scipy.optimize import minimize

from ._util import rng_stream, thread_cap
from .errors import NumericsError

__all__ = [
    "golden_min",
    "golden_max",
    "softplus",
    "fractions_from_raw",
    "multistart_minimize",
]

_INVPHI = (np.sqrt(5.0) - 1.0) / 2.0


def golden_min(f, lo: float, hi: float, xtol: float = 1e-9, max_iter: int = 200):
    """Golden-section minimum of f on [lo, hi].

    Returns (x, f(x)).  Assumes unimodality; on a flat objective it settles
    anywhere in the flat region, which callers detect separately.
    """
    if not hi > lo:
        raise ValueError(f"bad bracket [{lo}, {hi}]")
    a, b = float(lo), float(hi)
    c = b - _INVPHI * (b - a)
    d = a + _INVPHI * (b - a)
    fc, fd = f(c), f(d)
    it = 0
    while (b - a) > xtol and it < max_iter:
        if fc < fd:
            b, d, fd = d, c, fc
            c = b - _INVPHI * (b - a)
            fc = f(c)
        else:
            a, c, fc = c, d, fd
            d = a + _INVPHI * (b - a)
            fd = f(d)
        it += 1
    return (c, fc) if fc < fd else (d, fd)


def golden_max(f, lo: float, hi: float, xtol: float = 1e-9, max_iter: int = 200):
    x, fx = golden_min(lambda u: -f(u), lo, hi, xtol=xtol, max_iter=max_iter)
    return x, -fx


def softplus(u):
    return np.logaddexp(0.0, u)


def fractions_from_raw(raw) -> np.ndarray:
    """Map n raw reals to n-1 strictly increasing fractions in (0,1).

    Cumulative sums of softplus-transformed raws, normalized by the total;
    monotonicity and range hold by construction.  Raws are clipped to +-16
    so the increments can never all underflow to zero.
    """
    raw = np.clip(np.asarray(raw, dtype=float), -16.0, 16.0)
    inc = softplus(raw)
    cum = np.cumsum(inc)
    return cum[:-1] / cum[-1]


def _coordinate_refine(obj, x, fx, cycles: int, span: float, xtol: float):
    """Cyclic golden-section sweeps over each coordinate of x."""
    nev = 0
    for _ in range(cycles):
        improved = fx
        for i in range(len(x)):
            def line(u, i=i):
                y = x.copy()
                y[i] = u
                return obj(y)

            u, fu = golden_min(line, x[i] - span, x[i] + span, xtol=xtol)
            nev += 50
            if fu < fx:
                fx = fu
                x = x.copy()
                x[i] = u
        if improved - fx < 1e-13:
            break
    return x, fx, nev


def multistart_minimize(
    obj,
    dim: int,
    multistart: int = 8,
    seed: int = 1234,
    canonical_starts=(),
    maxfev_per_dim: int = 150,
    xatol: float = 1e-4,
    fatol: float = 1e-11,
    refine_cycles: int = 2,
    refine_span: float = 0.6,
):
    """Best of `multistart` Nelder-Mead runs, refined by coordinate descent.

    Starts are the provided canonical points followed by seeded Gaussian
    draws (stream index = start index, so the start list is reproducible and
    independent of execution order).  Non-finite objective values are mapped
    to +inf.  Returns (fbest, xbest).

    Raises NumericsError when the refinement fails to stabilize, carrying
    the best value seen.
    """

    def safe_obj(x):
        v = obj(x)
        return v if np.isfinite(v) else np.inf

    starts = [np.asarray(s, dtype=float) for s in canonical_starts][:multistart]
    for i in range(multistart - len(starts)):
        starts.append(rng_stream(seed, i).normal(0.0, 2.0, size=dim))

    def run_one(x0):
        res = minimize(
            safe_obj,
            x0,
            method="Nelder-Mead",
            options=dict(maxfev=maxfev_per_dim * dim, xatol=xatol, fatol=fatol),
        )
        return float(res.fun), np.asarray(res.x, dtype=float)

    workers = min(thread_cap(), len(starts))
    if workers > 1:
        with ThreadPoolExecutor(max_workers=workers) as pool:
            results = list(pool.map(run_one, starts))
    else:
        results = [run_one(s) for s in starts]

    # deterministic merge: min value, lexicographic tie-break on parameters
    fbest, xbest = min(results, key=lambda r: (r[0], tuple(r[1])))
    if not np.isfinite(fbest):
        raise NumericsError(
            "all simplex starts diverged", best=None, advice="loosen parametrization or add starts"
        )

    xbest, fbest, _ = _coordinate_refine(safe_obj, xbest, fbest, refine_cycles, refine_span, 1e-7)
    # one extra stabilization check: another cycle must not move the value much
    x2, f2, _ = _coordinate_refine(safe_obj, xbest, fbest, 1, refine_span, 1e-7)
    if fbest - f2 > 1e-5 * (1.0 + abs(fbest)):
        x3, f3, _ = _coordinate_refine(safe_obj, x2, f2, 2, refine_span, 1e-7)
        if f2 - f3 > 1e-5 * (1.0 + abs(f2)):
            raise NumericsError(
                "coordinate refinement kept improving; optimizer not converged",
                best=float(f3),
                advice="increase multistart or maxfev",
            )
        return f3, x3
    return f2, x2
