"""Crisanti-Sommers variational formula for spherical mixed p-spin models.

For a temperature vector beta the mixture is xi_beta(q) = sum_p 2^{-p}
beta_p^2 q^p and the free energy is F(beta) = inf over admissible step
distributions of

    Q_beta(alpha) = (1/2) [ int_0^1 alpha xi_beta' dq
                            + int_0^qhat dq / A(q) + log(1 - qhat) ],

where A(q) = int_q^1 alpha(s) ds and qhat < 1 is any point with
alpha(qhat) = 1 (Q is invariant under the choice).  All three terms have
closed forms for step functions, so evaluation is exact up to rounding:
no quadrature anywhere in this module.

Lambda(alpha) = sup_beta' ( Q_beta'(alpha) - (1/2) sum_p beta_p'^2 m_p )
with m_p = 2^{-p} int_0^1 alpha d(q^p).  Only the first CS term depends on
beta', and it equals the penalty identically, so the sup is flat and

    Lambda(alpha) = (1/2) ( int_0^qhat dq/A(q) + log(1 - qhat) ).

Lambda plays the role of the squared-interaction free energy V at the
energy vector m (the dual-side identity checked by verify_thm10).
"""

from __future__ import annotations

import math
import warnings
from dataclasses import dataclass

import numpy as np

from ._optim import fractions_from_raw, multistart_minimize
from .core import (
    DualityReport,
    StepDistribution,
    TemperatureVector,
    energy_vector_from_alpha_spherical,
    xi_beta_eval,
)
from .errors import DomainError, UsageError
from .ising import ParisiNumerics

__all__ = [
    "CSResult",
    "QHAT_CAP",
    "cs_functional",
    "cs_minimize",
    "lambda_functional",
    "spherical_partial",
    "verify_thm10",
]

# keeps log(1 - qhat) finite; invariance in the level-1 region makes it harmless
QHAT_CAP = 1.0 - 1e-6


@dataclass(frozen=True)
class CSResult:
    """Minimization outcome: alpha_star (with qhat), F(beta), and all ∂_pF."""

    alpha_star: StepDistribution
    value: float
    partials: tuple[float, ...]


def _require_qhat(alpha: StepDistribution) -> float:
    if alpha.qhat is None:
        raise UsageError("alpha must carry qhat (a point < 1 with alpha(qhat) = 1)")
    return alpha.qhat


def _lambda_terms(alpha: StepDistribution) -> float:
    """int_0^qhat dq/A(q) + log(1 - qhat), segment-exact.

    A is piecewise linear with slope -a_l on [q_l, q_{l+1}); on a segment
    [s0, s1] the integral of 1/A is (log A(s0) - log A(s1))/a_l for a_l > 0
    and (s1 - s0)/A(s0) for a_l = 0.
    """
    qhat = _require_qhat(alpha)
    knots = alpha.knots_array()
    levels = alpha.levels_array()
    # A at the knots, accumulated from the right end where A(1) = 0
    a_right = np.zeros(len(knots))
    for i in range(len(levels) - 1, -1, -1):
        a_right[i] = a_right[i + 1] + levels[i] * (knots[i + 1] - knots[i])

    total = 0.0
    for i, a in enumerate(levels):
        s0 = knots[i]
        if s0 >= qhat:
            break
        s1 = min(knots[i + 1], qhat)
        a0 = a_right[i]
        if a0 <= 0.0 and s1 > s0:
            raise DomainError(
                f"A(q) vanishes on [{s0}, {s1}] before qhat={qhat}; alpha is ill-posed"
            )
        if a > 0.0:
            # A(s1) = a0 - a (s1 - s0) exactly, so log A(s0) - log A(s1)
            # = -log1p(-a (s1 - s0)/a0); the subtract-two-logs form loses
            # ~1e-16/a to cancellation when a is tiny
            total += -math.log1p(-a * (s1 - s0) / a0) / a
        else:
            total += (s1 - s0) / a0
    return total + math.log1p(-qhat)


def cs_functional(beta: TemperatureVector, alpha: StepDistribution) -> float:
    """Q_beta(alpha), exact for step distributions."""
    _require_qhat(alpha)
    term1 = _alpha_integral_xi_beta_prime(beta, alpha)
    return 0.5 * (term1 + _lambda_terms(alpha))


def lambda_functional(alpha: StepDistribution) -> float:
    """Lambda(alpha) = (1/2)(int_0^qhat dq/A + log(1-qhat)).

    Equals sup_beta' of Q_beta'(alpha) minus the quadratic penalty; the
    half mirrors the half in Q.  Zero iff qhat can be taken to 0, i.e.
    alpha ≡ 1.
    """
    return 0.5 * _lambda_terms(alpha)


def _alpha_integral_xi_beta_prime(beta: TemperatureVector, alpha: StepDistribution) -> float:
    """int_0^1 alpha(q) xi_beta'(q) dq = sum_l a_l (xi_beta(q_{l+1}) - xi_beta(q_l))."""
    knots = alpha.knots_array()
    levels = alpha.levels_array()
    vals = np.array([xi_beta_eval(beta, q, 0) for q in knots])
    return float(np.dot(levels, np.diff(vals)))


def spherical_partial(beta: TemperatureVector, alpha_star: StepDistribution, p: int) -> float:
    """∂F/∂beta_p = (p beta_p / 2^p) int_0^1 alpha(q) q^{p-1} dq = beta_p m_p."""
    if p < 1:
        raise DomainError(f"degree p must be >= 1, got {p}")
    entries = beta.as_array()
    if p > len(entries) or entries[p - 1] == 0.0:
        return 0.0
    knots = alpha_star.knots_array()
    levels = alpha_star.levels_array()
    m_p = 2.0 ** (-p) * float(np.dot(levels, np.diff(knots**p)))
    return entries[p - 1] * m_p


def _alpha_from_raw_cs(raw: np.ndarray, k: int) -> StepDistribution:
    # k interior knots scaled under the qhat cap; q_k doubles as qhat
    qs = QHAT_CAP * fractions_from_raw(raw[: k + 1])
    levels = fractions_from_raw(raw[k + 1 :])  # k levels in (0,1), strictly increasing
    return StepDistribution(
        knots=(0.0, *qs.tolist(), 1.0),
        levels=(*levels.tolist(), 1.0),
        qhat=float(qs[-1]),
    )


def cs_minimize(
    beta: TemperatureVector,
    k: int = 2,
    num: ParisiNumerics = ParisiNumerics(),
    extra_candidates: tuple[StepDistribution, ...] = (),
) -> CSResult:
    """inf of Q_beta over k-step alpha with top level 1 and qhat = q_k.

    k = 0 admits only alpha ≡ 1 (qhat = 0), returned in closed form.  For
    k >= 1 the same softplus/multistart machinery as parisi_minimize runs
    on the exact functional; the annealed candidate and any
    `extra_candidates` are merged into the final min.  Emits a warning when
    the optimal qhat presses against the 1 - 1e-6 cap.
    """
    if k < 0:
        raise DomainError(f"k must be >= 0, got {k}")
    annealed_alpha = StepDistribution.constant(1.0, qhat=0.0)
    annealed = 0.5 * xi_beta_eval(beta, 1.0, 0)

    best_val, best_alpha = annealed, annealed_alpha
    if k >= 1:
        dim = 2 * k + 2

        def obj(raw):
            return cs_functional(beta, _alpha_from_raw_cs(np.asarray(raw), k))

        canon = [np.zeros(dim), np.full(dim, -2.0), np.full(dim, 2.0)]
        fopt, xopt = multistart_minimize(
            obj,
            dim,
            multistart=num.multistart,
            seed=num.seed,
            canonical_starts=canon,
            fatol=num.tol * 1e-2,
        )
        if fopt < best_val:
            best_val, best_alpha = fopt, _alpha_from_raw_cs(xopt, k)

    for cand in extra_candidates:
        v = cs_functional(beta, cand)
        if v < best_val:
            best_val, best_alpha = v, cand

    if best_alpha.qhat is not None and best_alpha.qhat > QHAT_CAP - 1e-4:
        warnings.warn(
            f"optimal qhat={best_alpha.qhat:.6f} presses against the cap {QHAT_CAP}; "
            "the low-temperature representation is near-degenerate",
            RuntimeWarning,
            stacklevel=2,
        )

    value = cs_functional(beta, best_alpha)
    partials = tuple(
        spherical_partial(beta, best_alpha, p) for p in range(1, len(beta) + 1)
    )
    return CSResult(alpha_star=best_alpha, value=value, partials=partials)


def _scaled(beta: TemperatureVector, t: float) -> TemperatureVector:
    return TemperatureVector(tuple(t * b for b in beta.entries))


def verify_thm10(
    beta: TemperatureVector,
    k: int = 2,
    num: ParisiNumerics = ParisiNumerics(),
    scales=None,
) -> DualityReport:
    """Check the spherical duality identities around the CS minimizer.

    With alpha* minimizing Q_beta and m_p its energy vector:
      (a) sup over scaled temperatures t*beta of F(t beta) - (t^2/2) sum
          beta_p^2 m_p equals Lambda(alpha*), attained at t near 1;
      (b) min over the family {alpha*(t beta)} of Lambda(alpha') +
          (1/2) sum beta_p^2 m'_p recovers F(beta).
    Each family member's minimization includes alpha* as a candidate, so
    (a) is a true one-sided bound.  Also reports the qhat-invariance of Q
    at alpha* as a flag.
    """
    sol = cs_minimize(beta, k, num)
    alpha_star = sol.alpha_star
    f_val = sol.value
    lam_star = lambda_functional(alpha_star)
    m = energy_vector_from_alpha_spherical(alpha_star, len(beta)).as_array()
    b2m = float(np.dot(beta.as_array() ** 2, m))

    if scales is None:
        scales = np.linspace(0.25, 2.0, 8)
    ts = sorted(set(float(t) for t in scales) | {1.0})

    sup_val, t_star = -math.inf, None
    fam_val, t_min = math.inf, None
    for t in ts:
        solt = cs_minimize(_scaled(beta, t), k, num, extra_candidates=(alpha_star,))
        cand_a = solt.value - 0.5 * t * t * b2m
        if cand_a > sup_val:
            sup_val, t_star = cand_a, t
        mt = energy_vector_from_alpha_spherical(solt.alpha_star, len(beta)).as_array()
        cand_b = lambda_functional(solt.alpha_star) + 0.5 * float(
            np.dot(beta.as_array() ** 2, mt)
        )
        if cand_b < fam_val:
            fam_val, t_min = cand_b, t

    gap_a = abs(sup_val - lam_star)
    gap_b = abs(fam_val - f_val)

    # qhat-invariance at alpha*: move qhat halfway toward the cap (still in
    # the level-1 region, so the perturbed alpha stays admissible)
    qhat = alpha_star.qhat
    q_alt = qhat + 0.5 * (QHAT_CAP - qhat)
    inv = abs(cs_functional(beta, alpha_star.with_qhat(q_alt)) - f_val)

    return DualityReport(
        direction="thm10: V=Lambda and F=min(Lambda+pen)",
        gaps={"transform_at_minimizer": gap_a, "min_over_family": gap_b},
        optimizers={"t_star": t_star, "family_argmin": t_min, "free_energy": f_val},
        flags={
            "qhat_invariance": inv,
            "t_star_offset": abs(t_star - 1.0),
            "family_size": len(ts),
        },
    )
