"""Tail-bound calculators.

Every evaluator clamps to [0, 1] and flags the result as informative only when
the clamped value is below 1/2. At desk scale these bounds are often vacuous.
"""

import math
from dataclasses import dataclass

from .errors import DomainError

INFORMATIVE_BELOW = 0.5


@dataclass(frozen=True)
class TailBound:
    value: float
    raw: float
    informative: bool
    applicable: bool = True

    def to_dict(self):
        return {
            "bound": self.value,
            "raw": self.raw,
            "informative": self.informative,
            "applicable": self.applicable,
        }


def _finite(**kw):
    for k, v in kw.items():
        if not math.isfinite(v):
            raise DomainError(f"{k} must be finite, got {v}")


def _make(log_raw, applicable=True):
    # log_raw = log of the unclamped bound, so huge exponents never overflow
    raw = math.exp(log_raw) if log_raw < 700 else math.inf
    value = min(1.0, raw)
    return TailBound(value, raw, value < INFORMATIVE_BELOW, applicable)


def chernoff_tail(mu, t):
    """P(|X - mu| > t) < 2 exp(-t^2 / (2 (mu + t/3))) for negatively correlated indicators."""
    _finite(mu=mu, t=t)
    if mu < 0 or t < 0:
        raise DomainError("mu and t must be nonnegative")
    if t == 0:
        return _make(math.log(2))
    return _make(math.log(2) - t * t / (2 * (mu + t / 3)))


def talagrand_tail(m, t, r, c):
    """P(|Z - m| > t) <= 4 exp(-t^2 / (16 r c^2 (m + t))) for certifiable c-Lipschitz Z."""
    _finite(m=m, t=t, r=r, c=c)
    if m <= 0 or r <= 0 or c <= 0:
        raise DomainError("m, r and c must be positive")
    if t < 0:
        raise DomainError("t must be nonnegative")
    return _make(math.log(4) - t * t / (16 * r * c * c * (m + t)))


def lemma1_tail(mu, eps, d, n=None):
    """P(|X - mu| >= eps mu) <= 4 exp(-eps^2 mu / (64 d (1 + eps))) for matching statistics.

    ``applicable`` is False when mu <= ln^2 n (if n is given) or eps <= mu**-0.5,
    i.e. outside the regime where the estimate is established.
    """
    _finite(mu=mu, eps=eps)
    if mu <= 0 or eps <= 0:
        raise DomainError("mu and eps must be positive")
    if d < 3:
        raise DomainError("d >= 3 required")
    applicable = eps > mu**-0.5
    if n is not None:
        applicable = applicable and mu > math.log(n) ** 2
    return _make(math.log(4) - eps * eps * mu / (64 * d * (1 + eps)), applicable)
