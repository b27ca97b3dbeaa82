"""Shared domain types: mixtures, temperature/energy vectors, step distributions.

A mixture xi(s) = sum_p c_p^2 s^p encodes the covariance of a mixed p-spin
interaction, E H(s1) H(s2) = N xi(R_12).  Order parameters are distribution
functions on [0,1] restricted to step functions: k interior knots and k+1
nondecreasing levels, with alpha(1) = 1.  Everything here is closed form;
the variational modules build on these primitives.
"""

from __future__ import annotations

import json
from dataclasses import dataclass

import numpy as np

from .errors import DomainError, UsageError

__all__ = [
    "MixtureSpec",
    "TemperatureVector",
    "EnergyVector",
    "StepDistribution",
    "DualityReport",
    "mixture_eval",
    "xi_beta_eval",
    "alpha_eval",
    "alpha_integral_xi_prime",
    "alpha_integral_s_xi_second",
    "energy_vector_from_alpha_spherical",
]


@dataclass(frozen=True)
class MixtureSpec:
    """Interaction mixture: terms (p, c_p), xi(s) = sum c_p^2 s^p.

    kind selects the normalization convention: "ising" uses the raw
    coefficients; "spherical" folds in the 2^-p weight so that
    xi(s) = sum 2^-p c_p^2 s^p.
    """

    terms: tuple[tuple[int, float], ...]
    kind: str = "ising"

    def __post_init__(self):
        if self.kind not in ("ising", "spherical"):
            raise DomainError(f"mixture kind must be 'ising' or 'spherical', got {self.kind!r}")
        terms = tuple((int(p), float(c)) for p, c in self.terms)
        if not terms:
            raise DomainError("mixture needs at least one term")
        degrees = [p for p, _ in terms]
        if any(p < 1 for p in degrees):
            raise DomainError(f"degrees must be integers >= 1, got {degrees}")
        if any(b <= a for a, b in zip(degrees, degrees[1:])):
            raise DomainError(f"degrees must be strictly increasing, got {degrees}")
        coeffs = [c for _, c in terms]
        if any(not np.isfinite(c) or c < 0 for c in coeffs):
            raise DomainError(f"coefficients must be finite and >= 0, got {coeffs}")
        if all(c == 0 for c in coeffs):
            raise DomainError("at least one coefficient must be positive")
        object.__setattr__(self, "terms", terms)

    @property
    def max_degree(self) -> int:
        return self.terms[-1][0]

    def weight(self, p: int, c: float) -> float:
        """Effective squared coefficient of s^p, normalization included."""
        w = c * c
        if self.kind == "spherical":
            w *= 2.0 ** (-p)
        return w

    def to_json(self) -> str:
        return json.dumps({"kind": self.kind, "terms": [[p, c] for p, c in self.terms]})

    @classmethod
    def from_json(cls, text: str) -> "MixtureSpec":
        try:
            data = json.loads(text)
            return cls(terms=tuple((p, c) for p, c in data["terms"]), kind=data["kind"])
        except (KeyError, TypeError, json.JSONDecodeError) as exc:
            raise DomainError(f"malformed mixture JSON: {exc}") from exc


@dataclass(frozen=True)
class TemperatureVector:
    """Inverse temperatures (beta_1, ..., beta_P), entry p scaling H_{N,p}.

    Entries are >= 0 (the open cone requires > 0; zeros are admitted and
    handled by continuity) and at least one entry is positive.
    """

    entries: tuple[float, ...]

    def __post_init__(self):
        entries = tuple(float(b) for b in self.entries)
        if not entries:
            raise DomainError("temperature vector needs at least one entry")
        if any(not np.isfinite(b) or b < 0 for b in entries):
            raise DomainError(f"temperatures must be finite and >= 0, got {entries}")
        if all(b == 0 for b in entries):
            raise DomainError("at least one temperature must be positive")
        object.__setattr__(self, "entries", entries)

    def __len__(self) -> int:
        return len(self.entries)

    def as_array(self) -> np.ndarray:
        return np.asarray(self.entries, dtype=float)


@dataclass(frozen=True)
class EnergyVector:
    """Scaled energies (m_1, ..., m_P); strictly positive entries."""

    entries: tuple[float, ...]

    def __post_init__(self):
        entries = tuple(float(m) for m in self.entries)
        if not entries:
            raise DomainError("energy vector needs at least one entry")
        if any(not np.isfinite(m) or m <= 0 for m in entries):
            raise DomainError(f"scaled energies must be finite and > 0, got {entries}")
        object.__setattr__(self, "entries", entries)

    def __len__(self) -> int:
        return len(self.entries)

    def as_array(self) -> np.ndarray:
        return np.asarray(self.entries, dtype=float)


@dataclass(frozen=True)
class StepDistribution:
    """Step distribution function on [0,1].

    knots: 0 = q_0 < q_1 < ... < q_k < q_{k+1} = 1 (endpoints included).
    levels: a_0 <= ... <= a_k, values of alpha on [q_l, q_{l+1}); alpha(1)=1.
    qhat: optional witness point with alpha(qhat) = 1 and qhat < 1, used by
    the spherical functional as its integration split.
    """

    knots: tuple[float, ...]
    levels: tuple[float, ...]
    qhat: float | None = None

    def __post_init__(self):
        knots = tuple(float(q) for q in self.knots)
        levels = tuple(float(a) for a in self.levels)
        if len(knots) < 2 or knots[0] != 0.0 or knots[-1] != 1.0:
            raise DomainError(f"knots must run from 0 to 1, got {knots}")
        if any(b <= a for a, b in zip(knots, knots[1:])):
            raise DomainError(f"knots must be strictly increasing, got {knots}")
        if len(levels) != len(knots) - 1:
            raise DomainError(
                f"need one level per interval: {len(knots) - 1} intervals, {len(levels)} levels"
            )
        if any(not np.isfinite(a) or a < 0 or a > 1 for a in levels):
            raise DomainError(f"levels must lie in [0,1], got {levels}")
        if any(b < a for a, b in zip(levels, levels[1:])):
            raise DomainError(f"levels must be nondecreasing, got {levels}")
        qhat = self.qhat
        if qhat is not None:
            qhat = float(qhat)
            if not 0.0 <= qhat < 1.0:
                raise DomainError(f"qhat must lie in [0,1), got {qhat}")
            # alpha(qhat) = 1: every interval meeting [qhat, 1) sits at level 1
            idx = int(np.searchsorted(knots, qhat, side="right")) - 1
            idx = min(idx, len(levels) - 1)
            if any(a != 1.0 for a in levels[idx:]):
                raise DomainError(f"alpha(qhat) must equal 1 at qhat={qhat}, levels {levels}")
        object.__setattr__(self, "knots", knots)
        object.__setattr__(self, "levels", levels)
        object.__setattr__(self, "qhat", qhat)

    @property
    def k(self) -> int:
        """Number of interior knots (RSB steps)."""
        return len(self.knots) - 2

    @classmethod
    def constant(cls, level: float = 1.0, qhat: float | None = None) -> "StepDistribution":
        """Single level on [0,1).  level=1 is alpha ≡ 1 (point mass at 0)."""
        return cls(knots=(0.0, 1.0), levels=(float(level),), qhat=qhat)

    @classmethod
    def point_mass_at_one(cls) -> "StepDistribution":
        """alpha = indicator of {1}: level 0 on [0,1), jump at 1."""
        return cls(knots=(0.0, 1.0), levels=(0.0,))

    def knots_array(self) -> np.ndarray:
        return np.asarray(self.knots, dtype=float)

    def levels_array(self) -> np.ndarray:
        return np.asarray(self.levels, dtype=float)

    def with_qhat(self, qhat: float) -> "StepDistribution":
        return StepDistribution(self.knots, self.levels, qhat)

    def to_json(self) -> str:
        return json.dumps(
            {"knots": list(self.knots), "levels": list(self.levels), "qhat": self.qhat}
        )

    @classmethod
    def from_json(cls, text: str) -> "StepDistribution":
        try:
            data = json.loads(text)
            return cls(
                knots=tuple(data["knots"]),
                levels=tuple(data["levels"]),
                qhat=data.get("qhat"),
            )
        except (KeyError, TypeError, json.JSONDecodeError) as exc:
            raise DomainError(f"malformed step-distribution JSON: {exc}") from exc


@dataclass
class DualityReport:
    """Outcome of a numerical duality check.

    direction labels the identity being tested (e.g. "V=sup(F-pen)").
    gaps maps named sub-checks to absolute discrepancies; max_gap is their
    maximum.  optimizers records arg-optima; flags records boundary
    attainment, flat objectives and similar diagnostics.
    """

    direction: str
    gaps: dict
    optimizers: dict
    flags: dict

    @property
    def max_gap(self) -> float:
        return max(self.gaps.values()) if self.gaps else 0.0

    def to_json(self) -> str:
        def clean(obj):
            if isinstance(obj, dict):
                return {str(k): clean(v) for k, v in obj.items()}
            if isinstance(obj, (list, tuple)):
                return [clean(v) for v in obj]
            if isinstance(obj, (bool, np.bool_)):
                return bool(obj)
            if isinstance(obj, (int, np.integer)):
                return int(obj)
            if isinstance(obj, (float, np.floating)):
                return float(obj)
            return obj if isinstance(obj, (str, type(None))) else repr(obj)

        return json.dumps(
            {
                "direction": self.direction,
                "gaps": clean(self.gaps),
                "max_gap": clean(self.max_gap),
                "optimizers": clean(self.optimizers),
                "flags": clean(self.flags),
            }
        )


def mixture_eval(spec: MixtureSpec, s: float, order: int = 0) -> float:
    """xi(s) and derivatives: order 0 -> xi, 1 -> xi', 2 -> xi''.

    s must lie in [0,1] (overlaps are normalized).
    """
    if order not in (0, 1, 2):
        raise UsageError(f"order must be 0, 1 or 2, got {order}")
    s = float(s)
    if not 0.0 <= s <= 1.0:
        raise DomainError(f"s must lie in [0,1], got {s}")
    total = 0.0
    for p, c in spec.terms:
        w = spec.weight(p, c)
        if order == 0:
            total += w * s**p
        elif order == 1:
            total += w * p * s ** (p - 1) if p >= 1 else 0.0
        else:
            total += w * p * (p - 1) * s ** (p - 2) if p >= 2 else 0.0
    return total


def xi_beta_eval(beta: TemperatureVector, q: float, order: int = 0) -> float:
    """xi_beta(q) = sum_p 2^-p beta_p^2 q^p and derivatives (order 0|1|2)."""
    if order not in (0, 1, 2):
        raise UsageError(f"order must be 0, 1 or 2, got {order}")
    q = float(q)
    if not 0.0 <= q <= 1.0:
        raise DomainError(f"q must lie in [0,1], got {q}")
    total = 0.0
    for i, b in enumerate(beta.entries):
        p = i + 1
        w = 2.0 ** (-p) * b * b
        if order == 0:
            total += w * q**p
        elif order == 1:
            total += w * p * q ** (p - 1)
        else:
            total += w * p * (p - 1) * q ** (p - 2) if p >= 2 else 0.0
    return total


def alpha_eval(alpha: StepDistribution, s: float) -> float:
    """Pointwise alpha(s); right-continuous steps, alpha(1) = 1."""
    s = float(s)
    if not 0.0 <= s <= 1.0:
        raise DomainError(f"s must lie in [0,1], got {s}")
    if s == 1.0:
        return 1.0
    idx = int(np.searchsorted(np.asarray(alpha.knots), s, side="right")) - 1
    return alpha.levels[min(idx, len(alpha.levels) - 1)]


def _segment_sum(alpha: StepDistribution, antider) -> float:
    """sum_l a_l (G(q_{l+1}) - G(q_l)) for an antiderivative G."""
    q = alpha.knots_array()
    vals = antider(q)
    return float(np.dot(alpha.levels_array(), np.diff(vals)))


def alpha_integral_xi_prime(spec: MixtureSpec, alpha: StepDistribution) -> float:
    """int_0^1 alpha(s) xi'(s) ds, exactly, segment by segment.

    The antiderivative of xi' is xi itself, so each segment contributes
    a_l (xi(q_{l+1}) - xi(q_l)).
    """

    def xi(q):
        return sum(spec.weight(p, c) * q**p for p, c in spec.terms)

    return _segment_sum(alpha, xi)


def alpha_integral_s_xi_second(spec: MixtureSpec, alpha: StepDistribution) -> float:
    """int_0^1 alpha(s) s xi''(s) ds via the antiderivative s xi'(s) - xi(s)."""

    def G(q):
        return sum(spec.weight(p, c) * (p - 1) * q**p for p, c in spec.terms)

    return _segment_sum(alpha, G)


def energy_vector_from_alpha_spherical(alpha: StepDistribution, max_degree: int) -> EnergyVector:
    """Spherical scaled energies m_p = (p/2^p) int_0^1 alpha(q) q^{p-1} dq.

    Closed form: m_p = 2^-p sum_l a_l (q_{l+1}^p - q_l^p), for p = 1..max_degree.

    Raises DomainError when any m_p fails strict positivity (this happens
    only for alpha = point mass at 1, whose scaled energies all vanish).
    """
    if max_degree < 1:
        raise UsageError(f"max_degree must be >= 1, got {max_degree}")
    q = alpha.knots_array()
    a = alpha.levels_array()
    ms = []
    for p in range(1, max_degree + 1):
        ms.append(2.0 ** (-p) * float(np.dot(a, np.diff(q**p))))
    bad = [i + 1 for i, m in enumerate(ms) if m <= 0]
    if bad:
        raise DomainError(
            f"scaled energies must be positive; degrees {bad} vanish "
            f"(alpha has no mass below 1)"
        )
    return EnergyVector(entries=tuple(ms))
