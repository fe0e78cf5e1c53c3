"""Closed-form tail bounds implied by a bounded size-biased coupling.

Given couplings with ||W^i - W||_2 <= K in every direction,

    P((W - mu)/sigma <= -t) <= exp(-|t|^2 / (2 K1))
    P((W - mu)/sigma >= t)  <= exp(-|t|^2 / (2 (K1 + K2 |t|)))

with K1 = (2K / sigma_min) |mu / sigma|_2 and K2 = K / (2 sigma_min).
"""

from __future__ import annotations

import math
from collections.abc import Sequence
from dataclasses import dataclass
from enum import Enum

import numpy as np

from .errors import InvalidPatternDims, NegativeT, NonPositiveInput

MAX_PATTERN_LENGTH = 12


class Side(str, Enum):
    LOWER = "lower"
    UPPER = "upper"


@dataclass(frozen=True)
class BoundParams:
    K: float
    mu: tuple[float, ...]
    sigma: tuple[float, ...]
    K1: float
    K2: float

    @property
    def k(self) -> int:
        return len(self.mu)

    @property
    def sigma_min(self) -> float:
        return min(self.sigma)


@dataclass(frozen=True)
class TailQuery:
    t: tuple[float, ...]
    side: Side = Side.UPPER

    def __post_init__(self):
        object.__setattr__(self, "t", _check_t(self.t))
        object.__setattr__(self, "side", Side(self.side))


def _vec(x, name: str) -> tuple[float, ...]:
    arr = np.atleast_1d(np.asarray(x, dtype=float))
    if arr.ndim != 1 or arr.size == 0:
        raise ValueError(f"{name} must be a non-empty vector")
    return tuple(float(v) for v in arr)


def _check_t(t) -> tuple[float, ...]:
    tv = _vec(t, "t")
    if any(not math.isfinite(v) or v < 0 for v in tv):
        raise NegativeT(tv)
    return tv


def _positive(value: float, field: str) -> None:
    if not (value > 0) or not math.isfinite(value):
        raise NonPositiveInput(field)


def bound_params(mu, sigma, K: float) -> BoundParams:
    mu_v, sigma_v = _vec(mu, "mu"), _vec(sigma, "sigma")
    if len(mu_v) != len(sigma_v):
        raise ValueError("mu and sigma must have the same length")
    if any(not (m > 0) for m in mu_v):
        raise NonPositiveInput("mu")
    if any(not (s > 0) for s in sigma_v):
        raise NonPositiveInput("sigma")
    _positive(K, "K")
    s_min = min(sigma_v)
    ratio_norm = math.hypot(*(m / s for m, s in zip(mu_v, sigma_v)))
    K1 = 2.0 * K / s_min * ratio_norm
    K2 = K / (2.0 * s_min)
    return BoundParams(float(K), mu_v, sigma_v, K1, K2)


def lower_tail_bound(params: BoundParams, t) -> float:
    tn = math.hypot(*_check_t(t))
    return math.exp(-tn * tn / (2.0 * params.K1))


def upper_tail_bound(params: BoundParams, t) -> float:
    tn = math.hypot(*_check_t(t))
    return math.exp(-tn * tn / (2.0 * (params.K1 + params.K2 * tn)))


def tail_bound(params: BoundParams, query: TailQuery) -> float:
    if query.side is Side.LOWER:
        return lower_tail_bound(params, query.t)
    return upper_tail_bound(params, query.t)


def univariate_bounds(mu: float, K: float, t: float) -> tuple[float, float]:
    """Lower and upper deviation bounds on the unstandardized scale W - mu."""
    _positive(mu, "mu")
    _positive(K, "K")
    (t,) = _check_t(t)
    return (
        math.exp(-t * t / (4.0 * K * mu)),
        math.exp(-t * t / (4.0 * K * mu + K * t)),
    )


def iid_bounds(k: int, mu: float, sigma2: float, K: float, t) -> tuple[float, float]:
    """Bounds for k i.i.d. coordinates bounded by K (coupling radius K)."""
    if not isinstance(k, int) or k < 1:
        raise NonPositiveInput("k")
    _positive(mu, "mu")
    _positive(sigma2, "sigma2")
    _positive(K, "K")
    tv = _check_t(t)
    tn = math.hypot(*tv)
    root_k = math.sqrt(k)
    lower = math.exp(-sigma2 * tn * tn / (4.0 * K * root_k * mu))
    upper = math.exp(
        -tn * tn / (4.0 * K * root_k * mu / sigma2 + K * tn / math.sqrt(sigma2))
    )
    return lower, upper


def _check_pattern_dims(n: int, m: int, k: int) -> None:
    if m < 3:
        raise InvalidPatternDims(f"pattern length m={m} must be >= 3")
    if m > MAX_PATTERN_LENGTH:
        raise InvalidPatternDims(f"pattern length m={m} exceeds {MAX_PATTERN_LENGTH}")
    if n < m:
        raise InvalidPatternDims(f"n={n} must be >= m={m}")
    if k < 1:
        raise InvalidPatternDims(f"k={k} must be >= 1")


def pattern_bound_params(n: int, m: int, k: int) -> tuple[float, float]:
    """Closed-form (K1, K2) for k distinct length-m patterns in a uniform S_n.

    K1 here uses the denominator m! - 2m + 2; see
    :func:`pattern_bound_params_derived` for the version that follows from
    the variance lower bound.
    """
    _check_pattern_dims(n, m, k)
    f = math.factorial(m)
    K1 = 2 * k * (2 * m - 1) * f / (f - 2 * m + 2)
    K2 = math.sqrt(k) * (2 * m - 1) * f / (2.0 * math.sqrt(n * (f - 2 * m + 1)))
    return float(K1), float(K2)


def pattern_bound_params_derived(n: int, m: int, k: int) -> tuple[float, float]:
    """(K1, K2) from the generic constants with K = sqrt(k)(2m - 1) and
    sigma_min^2 replaced by its lower bound n (m! - 2m + 1) / m!^2."""
    _check_pattern_dims(n, m, k)
    f = math.factorial(m)
    K1 = 2 * k * (2 * m - 1) * f / (f - 2 * m + 1)
    K2 = math.sqrt(k) * (2 * m - 1) * f / (2.0 * math.sqrt(n * (f - 2 * m + 1)))
    return float(K1), float(K2)


def pattern_params(n: int, m: int, k: int, *, derived: bool = True) -> BoundParams:
    """BoundParams for the pattern statistic built from the constants above."""
    K1, K2 = (pattern_bound_params_derived if derived else pattern_bound_params)(n, m, k)
    f = math.factorial(m)
    mu = n / f
    sigma_lb = math.sqrt(n * (f - 2 * m + 1)) / f
    K = math.sqrt(k) * (2 * m - 1)
    return BoundParams(K, (mu,) * k, (sigma_lb,) * k, K1, K2)


def tail_bounds_at(params: BoundParams, ts: Sequence) -> list[tuple[float, float]]:
    return [(lower_tail_bound(params, t), upper_tail_bound(params, t)) for t in ts]
