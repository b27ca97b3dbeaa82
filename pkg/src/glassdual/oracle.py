"""Exact finite-N ground truth by complete enumeration of {-1,+1}^N.

A DisorderSample realizes one of two Gaussian Hamiltonians:

  ising_mixed:  H_N = sum_p H_{N,p},  H_{N,p}(sigma) = c_p N^{-(p-1)/2}
                sum g_{i_1..i_p} sigma_{i_1}..sigma_{i_p}  with g i.i.d.
                standard normal, so E H_N(s1) H_N(s2) = N xi(R_{12});
  rem:          2^N i.i.d. energies of variance N, E H(s1)H(s2) = N delta.

On top of one sample the module computes the two finite-N free energies

  F_N(beta) = (1/N) log E_{nu_N} exp(beta . H),
  V_N(m)    = (1/N) log E_{nu_N} exp( sum_p H_{N,p}^2 / (2 m_p N) ),

with nu_N the uniform probability measure (convention: no extra 2^{-N}),
and the exact pointwise inequality gap

  gap = V_N(m) - F_N(beta) + (1/2) sum_p beta_p^2 m_p  >= 0,

which holds for every realization because each cross term beta_p H_{N,p}
is bounded by beta_p^2 N m_p / 2 + H_{N,p}^2 / (2 N m_p).  Everything here
is exact up to rounding; Monte Carlo enters only through disorder_average
over replicas.

Scalars broadcast: a scalar beta or m applies to every degree present in
the sample.  Vectors pair by degree (entry p-1 <-> degree p) and must be
given together; mixing a vector on one side with a scalar on the other is
rejected so the penalty sum is never ambiguous.
"""

from __future__ import annotations

from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field

import math

import numpy as np
from numpy.random import SeedSequence
from scipy.special import logsumexp

from ._kernels import gray_energies
from ._util import rng_stream, thread_cap
from .core import EnergyVector, MixtureSpec, TemperatureVector
from .errors import DomainError, ResourceError, UsageError

__all__ = [
    "DisorderSample",
    "SupNormStats",
    "sample_disorder",
    "exact_free_energy",
    "exact_squared_free_energy",
    "finite_n_inequality_check",
    "disorder_average",
    "sup_norm_stats",
]

N_CAP = 24
DEGREE_CAP = 4
MEMORY_BUDGET = 1 << 30  # bytes of coupling + energy storage per sample


@dataclass
class DisorderSample:
    """One realization of the disorder; couplings keyed by degree.

    For ising_mixed, couplings[p] is the raw i.i.d. tensor of shape (N,)*p
    for each degree with c_p > 0.  For rem, couplings[0] holds the 2^N
    energies directly.  Per-degree energy tables over the Gray walk are
    cached after the first enumeration.
    """

    model: str
    N: int
    couplings: dict[int, np.ndarray]
    seed: int
    spec: MixtureSpec | None = None
    _energy_cache: dict[int, np.ndarray] = field(
        default_factory=dict, repr=False, compare=False
    )

    def degrees(self) -> tuple[int, ...]:
        if self.model == "rem":
            return ()
        return tuple(sorted(self.couplings))

    def energies(self, p: int) -> np.ndarray:
        """2^N values of H_{N,p} along the Gray walk (rem: p ignored)."""
        if self.model == "rem":
            return self.couplings[0]
        if p not in self._energy_cache:
            coeff = dict(self.spec.terms)[p]
            pref = coeff * self.N ** (-(p - 1) / 2.0)
            self._energy_cache[p] = pref * gray_energies(self.couplings[p], self.N)
        return self._energy_cache[p]

    def total_energies(self) -> np.ndarray:
        if self.model == "rem":
            return self.couplings[0]
        out = np.zeros(1 << self.N)
        for p in self.degrees():
            out += self.energies(p)
        return out


@dataclass(frozen=True)
class SupNormStats:
    """Enumerated extremes: per-degree sup|H_{N,p}|/N plus total sup/inf of H/N."""

    per_degree: dict[int, float]
    sup_h: float
    inf_h: float


def _normalize_model(model: str) -> str:
    m = model.lower()
    if m in ("ising", "ising_mixed"):
        return "ising_mixed"
    if m == "rem":
        return "rem"
    raise DomainError(f"unknown model {model!r}; expected ising_mixed or rem")


def sample_disorder(
    model: str,
    spec: MixtureSpec | None,
    N: int,
    seed: int,
    zero_couplings: bool = False,
) -> DisorderSample:
    """Draw one disorder realization, deterministic in (model, spec, N, seed).

    Each degree gets its own counter-derived substream, so samples with
    different seeds are independent and replicas can run in parallel
    without shared state.  `zero_couplings` is a testing hook that zeroes
    the disorder (H ≡ 0) while keeping all shapes and caps in force.
    """
    model = _normalize_model(model)
    if N < 1:
        raise DomainError(f"N must be >= 1, got {N}")
    if N > N_CAP:
        raise ResourceError(
            f"N={N} exceeds the enumeration cap {N_CAP} (2^N configurations)"
        )

    if model == "rem":
        size = 1 << N
        if 8 * size > MEMORY_BUDGET:
            raise ResourceError(f"rem sample needs {8 * size} bytes of energies")
        rng = rng_stream(seed, 0)
        draw = rng.normal(0.0, math.sqrt(N), size)
        if zero_couplings:
            draw = np.zeros(size)
        return DisorderSample(model="rem", N=N, couplings={0: draw}, seed=seed)

    if spec is None or spec.kind != "ising":
        raise UsageError("ising_mixed sampling requires a MixtureSpec of kind 'ising'")
    couplings: dict[int, np.ndarray] = {}
    total_bytes = 0
    for p, c in spec.terms:
        if c == 0.0:
            continue
        if p > DEGREE_CAP:
            raise ResourceError(
                f"degree {p} exceeds the dense-tensor cap {DEGREE_CAP}"
            )
        total_bytes += 8 * N**p
        if total_bytes > MEMORY_BUDGET:
            raise ResourceError(
                f"degree {p} tensor pushes coupling storage past "
                f"{MEMORY_BUDGET} bytes at N={N}"
            )
        rng = rng_stream(seed, p)
        g = rng.standard_normal((N,) * p)
        if zero_couplings:
            g = np.zeros((N,) * p)
        couplings[p] = g
    return DisorderSample(model="ising_mixed", N=N, couplings=couplings, seed=seed, spec=spec)


def _beta_by_degree(sample: DisorderSample, beta) -> dict[int, float]:
    if sample.model == "rem":
        if isinstance(beta, TemperatureVector):
            raise UsageError("rem takes a scalar beta (no degree structure)")
        return {0: float(beta)}
    degs = sample.degrees()
    if isinstance(beta, TemperatureVector):
        arr = beta.as_array()
        out = {}
        for p in degs:
            out[p] = float(arr[p - 1]) if p <= len(arr) else 0.0
        return out
    b = float(beta)
    if not np.isfinite(b) or b < 0.0:
        raise DomainError(f"beta must be finite and >= 0, got {b}")
    return {p: b for p in degs}


def _m_by_degree(sample: DisorderSample, m) -> dict[int, float]:
    if sample.model == "rem":
        if isinstance(m, EnergyVector):
            raise UsageError("rem takes a scalar m (no degree structure)")
        mm = float(m)
        if not mm > 0.0:
            raise DomainError(f"m must be > 0, got {mm}")
        return {0: mm}
    degs = sample.degrees()
    if isinstance(m, EnergyVector):
        arr = m.as_array()
        out = {}
        for p in degs:
            if p > len(arr):
                raise DomainError(f"m provides no entry for degree {p}")
            out[p] = float(arr[p - 1])
        return out
    mm = float(m)
    if not mm > 0.0:
        raise DomainError(f"m must be > 0, got {mm}")
    return {p: mm for p in degs}


def _check_enumerable(sample: DisorderSample):
    if sample.N > N_CAP:
        raise ResourceError(
            f"N={sample.N} exceeds the enumeration cap {N_CAP}"
        )


def exact_free_energy(sample: DisorderSample, beta) -> float:
    """F_N(beta) = (1/N) log 2^{-N} sum_sigma exp(sum_p beta_p H_{N,p})."""
    _check_enumerable(sample)
    bmap = _beta_by_degree(sample, beta)
    N = sample.N
    expo = np.zeros(1 << N)
    for p, b in bmap.items():
        if b != 0.0:
            expo += b * sample.energies(p)
    return float(logsumexp(expo) - N * math.log(2.0)) / N


def exact_squared_free_energy(sample: DisorderSample, m) -> float:
    """V_N(m) = (1/N) log 2^{-N} sum_sigma exp(sum_p H_{N,p}^2 / (2 m_p N))."""
    _check_enumerable(sample)
    mmap = _m_by_degree(sample, m)
    N = sample.N
    expo = np.zeros(1 << N)
    for p, mp in mmap.items():
        e = sample.energies(p)
        expo += e * e / (2.0 * mp * N)
    return float(logsumexp(expo) - N * math.log(2.0)) / N


def finite_n_inequality_check(sample: DisorderSample, beta, m) -> float:
    """gap = V_N(m) - F_N(beta) + (1/2) sum_p beta_p^2 m_p, >= 0 pointwise.

    Scalar beta must pair with scalar m and vector with vector; the penalty
    sums over the degrees present in the sample.
    """
    if isinstance(beta, TemperatureVector) != isinstance(m, EnergyVector):
        raise UsageError("pair scalar beta with scalar m, or vector with vector")
    bmap = _beta_by_degree(sample, beta)
    mmap = _m_by_degree(sample, m)
    pen = 0.5 * sum(bmap[p] ** 2 * mmap[p] for p in bmap)
    return exact_squared_free_energy(sample, m) - exact_free_energy(sample, beta) + pen


def disorder_average(job, replicas: int, base_seed: int) -> tuple[float, float]:
    """Mean and standard error of job(seed) over independent replicas.

    job is a callable taking a 64-bit seed and returning a float; seeds are
    derived from base_seed by counter so the ensemble is reproducible.
    Replicas run on a thread pool capped by GLASSDUAL_THREADS and are
    reduced in replica order.
    """
    if replicas < 2:
        raise DomainError(f"replicas must be >= 2, got {replicas}")
    seeds = [int(s) for s in SeedSequence(base_seed).generate_state(replicas, np.uint64)]
    workers = min(thread_cap(), replicas)
    with ThreadPoolExecutor(max_workers=workers) as pool:
        vals = np.array(list(pool.map(job, seeds)), dtype=float)
    mean = float(vals.mean())
    stderr = float(vals.std(ddof=1) / math.sqrt(replicas))
    return mean, stderr


def sup_norm_stats(sample: DisorderSample) -> SupNormStats:
    """Exact sup_sigma |H_{N,p}|/N per degree plus sup/inf of total H/N.

    The sup/inf pair feeds the symmetry diagnostic: over replicas,
    sup H and -inf H must agree in distribution for centered Gaussian
    disorder.
    """
    _check_enumerable(sample)
    N = sample.N
    per = {
        p: float(np.abs(sample.energies(p)).max()) / N for p in sample.degrees()
    }
    tot = sample.total_energies()
    return SupNormStats(
        per_degree=per,
        sup_h=float(tot.max()) / N,
        inf_h=float(tot.min()) / N,
    )
