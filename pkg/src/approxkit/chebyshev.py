"""Chebyshev polynomials and the polynomial approximations built from them.

The central object is :class:`ChebSeries`, a finite Chebyshev expansion
living on an interval ``[a, b]``.  Two families of series are constructed
here:

* ``monomial_cheb_coeffs(s, d)`` -- the degree-``d`` truncation of the exact
  expansion ``x**s = E[T_{D_s}(x)]`` where ``D_s`` is a simple +-1 random walk.
* ``exp_poly_coeffs(b, delta)`` -- a polynomial uniformly ``delta``-close to
  ``exp(-x)`` on ``[0, b]`` whose degree grows like ``sqrt(b)``.
"""

from __future__ import annotations

import math
import warnings
from dataclasses import dataclass
from functools import lru_cache
from typing import NamedTuple

import numpy as np

__all__ = [
    "ChebSeries",
    "cheb_eval",
    "cheb_derivative_at_one",
    "cheb_series_eval",
    "walk_abs_distribution",
    "monomial_cheb_coeffs",
    "monomial_tail",
    "ExpPolyPlan",
    "exp_poly_plan",
    "exp_poly_coeffs",
    "clamp_delta",
]

# Ratios below this (relative to the central binomial) are dropped; they
# cannot change a double-precision sum.
_RATIO_FLOOR_LOG = -92.0  # ln(1e-40)
MAX_WALK_LENGTH = 2**40


def clamp_delta(delta: float) -> float:
    """Validate an accuracy target; values above 1 are clamped to 1 with a warning."""
    delta = float(delta)
    if not delta > 0 or math.isnan(delta):
        raise ValueError("delta must be positive")
    if delta > 1.0:
        warnings.warn(f"delta={delta:g} clamped to 1", RuntimeWarning, stacklevel=3)
        return 1.0
    return delta


@dataclass(frozen=True)
class ChebSeries:
    """Chebyshev series ``sum_j c_j T_j(u)`` with ``u = 2(x-a)/(b-a) - 1``."""

    coeffs: np.ndarray
    interval: tuple[float, float] = (-1.0, 1.0)

    def __post_init__(self):
        c = np.array(self.coeffs, dtype=float).ravel()
        if c.size == 0:
            raise ValueError("ChebSeries needs at least one coefficient")
        if not np.all(np.isfinite(c)):
            raise ValueError("ChebSeries coefficients must be finite")
        a, b = (float(self.interval[0]), float(self.interval[1]))
        if not a < b:
            raise ValueError(f"interval must satisfy a < b, got ({a}, {b})")
        c.flags.writeable = False
        object.__setattr__(self, "coeffs", c)
        object.__setattr__(self, "interval", (a, b))

    def degree(self) -> int:
        return self.coeffs.size - 1

    def to_unit(self, x):
        a, b = self.interval
        return 2.0 * (np.asarray(x, dtype=float) - a) / (b - a) - 1.0

    def __call__(self, x):
        return cheb_series_eval(self, x)


def cheb_eval(d: int, x):
    """Evaluate ``T_d(x)`` by the three-term recurrence.

    Negative degrees use ``T_d = T_{|d|}``.  ``x`` may be a scalar or array.
    """
    d = abs(int(d))
    x = np.asarray(x, dtype=float)
    t_prev = np.ones_like(x)
    if d == 0:
        return t_prev[()] if t_prev.ndim == 0 else t_prev
    t_cur = x.copy()
    for _ in range(d - 1):
        t_prev, t_cur = t_cur, 2.0 * x * t_cur - t_prev
    return t_cur[()] if t_cur.ndim == 0 else t_cur


def cheb_derivative_at_one(d: int) -> int:
    """``T_d'(1)`` obtained by differentiating the recurrence in exact integers.

    ``T_d' = 2 T_{d-1} + 2x T_{d-1}' - T_{d-2}'``; at ``x = 1`` every
    ``T_j(1) = 1``.
    """
    d = abs(int(d))
    if d == 0:
        return 0
    dprev, dcur = 0, 1  # T_0'(1), T_1'(1)
    for _ in range(d - 1):
        dprev, dcur = dcur, 2 + 2 * dcur - dprev
    return dcur


def cheb_series_eval(s: ChebSeries, x):
    """Clenshaw evaluation of ``s`` at ``x`` (scalar or array).

    Points outside ``s.interval`` are evaluated anyway; deciding whether
    extrapolation is acceptable is left to the caller.
    """
    u = s.to_unit(x)
    c = s.coeffs
    b1 = np.zeros_like(u)
    b2 = np.zeros_like(u)
    for cj in c[:0:-1]:
        b1, b2 = 2.0 * u * b1 - b2 + cj, b1
    out = u * b1 - b2 + c[0]
    return out[()] if out.ndim == 0 else out


@lru_cache(maxsize=256)
def _walk_abs_distribution_cached(s: int) -> np.ndarray:
    j0 = s % 2
    k0 = (s + j0) // 2
    m_max = (s - j0) // 2
    m_cut = int(math.ceil(math.sqrt(-_RATIO_FLOOR_LOG * s / 2.0))) + 8
    m = min(m_max, m_cut)
    # binom(s, k+1) / binom(s, k) = (s - k) / (k + 1); each step moves j by 2
    k = np.arange(k0, k0 + m, dtype=float)
    ratios = np.cumprod((s - k) / (k + 1.0))
    raw = np.concatenate(([1.0], ratios))
    keep = raw > math.exp(_RATIO_FLOOR_LOG)
    raw = raw[: max(1, int(np.count_nonzero(keep)))]
    # c_0 carries weight 1, c_j (j >= 1) carries weight 2 -- P(|D_s| = j)
    weights = np.full(raw.size, 2.0)
    if j0 == 0:
        weights[0] = 1.0
    raw = raw * weights
    total = math.fsum(raw.tolist())
    probs = np.zeros(j0 + 2 * (raw.size - 1) + 1)
    probs[j0::2] = raw / total
    probs.flags.writeable = False
    return probs


def walk_abs_distribution(s: int) -> np.ndarray:
    """Return ``P(|D_s| = j)`` for ``j = 0, 1, ...`` up to the numerical cutoff.

    Consecutive nonzero entries are obtained from one another by the rational
    multipliers ``(s - k) / (k + 1)``; no factorial is ever formed.  The array
    is normalized to sum to one, which is exact for the full expansion.
    """
    s = int(s)
    if s < 0:
        raise ValueError("walk length s must be non-negative")
    if s > MAX_WALK_LENGTH:
        raise ValueError(f"walk length s={s} exceeds the supported cap 2**40")
    if s == 0:
        return np.ones(1)
    return _walk_abs_distribution_cached(s)


def monomial_cheb_coeffs(s: int, d: int) -> ChebSeries:
    """Chebyshev coefficients of ``p_{s,d}``, the degree-``d`` compression of ``x**s``.

    ``c_j = P(|D_s| = j)`` for ``j <= d``, i.e. ``2**(1-s) * C(s, (s+j)/2)``
    when ``j >= 1`` has the parity of ``s`` and ``2**(-s) * C(s, s/2)`` for
    ``j = 0``.  For ``d >= s`` the series is the exact expansion of ``x**s``.

    >>> monomial_cheb_coeffs(3, 3).coeffs.tolist()
    [0.0, 0.75, 0.0, 0.25]
    """
    s, d = int(s), int(d)
    if s < 0 or d < 0:
        raise ValueError("s and d must be non-negative")
    probs = walk_abs_distribution(s)
    out = np.zeros(d + 1)
    n = min(d + 1, probs.size)
    out[:n] = probs[:n]
    return ChebSeries(out)


def monomial_tail(s: int, d: int) -> float:
    """``P(|D_s| > d)``: the sup error of ``p_{s,d}`` against ``x**s`` on [-1, 1]."""
    probs = walk_abs_distribution(s)
    if d + 1 >= probs.size:
        return 0.0
    return math.fsum(probs[d + 1 :].tolist())


class ExpPolyPlan(NamedTuple):
    """Parameters of the ``exp(-x)`` polynomial on ``[0, b]``."""

    lam: float
    t: int
    d: int
    d_chernoff: int
    i_lo: int
    i_hi: int
    truncation_bound: float


def _log_poisson(lam: float, i: np.ndarray) -> np.ndarray:
    from scipy.special import gammaln

    return -lam + i * math.log(lam) - gammaln(i + 1.0)


@lru_cache(maxsize=512)
def exp_poly_plan(b: float, delta: float, degree_rule: str = "exact") -> ExpPolyPlan:
    """Choose Taylor cutoff ``t`` and degree ``d`` for ``exp_poly_coeffs``.

    ``t = ceil(max(lam e^2, log(2/delta)))`` with ``lam = b/2`` bounds the
    Taylor remainder by ``delta/2``.  With ``degree_rule="chernoff"`` the
    degree is ``ceil(sqrt(2 t log(4/delta)))``.  The default ``"exact"``
    rule returns the smallest ``d`` for which the exact walk tails satisfy
    ``sum_i w_i P(|D_i| > d) <= delta/2``, the quantity the Chernoff bound
    over-estimates; it never exceeds the Chernoff degree.
    """
    b, delta = float(b), float(delta)
    if not b > 0:
        raise ValueError("b must be positive")
    delta = clamp_delta(delta)
    if degree_rule not in ("exact", "chernoff"):
        raise ValueError(f"unknown degree_rule {degree_rule!r}")
    lam = b / 2.0
    t = int(math.ceil(max(lam * math.e**2, math.log(2.0 / delta))))
    d_ch = int(math.ceil(math.sqrt(2.0 * t * math.log(4.0 / delta))))

    # Poisson weights far from lam are dropped; their total mass is bounded
    # by drop_budget, which is charged against delta.
    i_all = np.arange(t + 1, dtype=float)
    logw = _log_poisson(lam, i_all)
    drop_budget = 1e-6 * delta
    keep = logw > math.log(drop_budget / (t + 1))
    idx = np.nonzero(keep)[0]
    i_lo, i_hi = int(idx[0]), int(idx[-1])
    dropped = float(np.sum(np.exp(logw[~keep])))

    if degree_rule == "chernoff":
        d = d_ch
    else:
        budget = delta / 2.0 - dropped
        total = np.zeros(d_ch + 1)
        for i in range(i_lo, i_hi + 1):
            probs = walk_abs_distribution(i)
            tails = np.concatenate((np.cumsum(probs[::-1])[::-1][1:], [0.0]))
            m = min(tails.size, d_ch + 1)
            total[:m] += math.exp(logw[i]) * tails[:m]
        ok = np.nonzero(total <= budget)[0]
        d = int(ok[0]) if ok.size else d_ch
    return ExpPolyPlan(lam, t, d, d_ch, i_lo, i_hi, dropped)


@lru_cache(maxsize=512)
def _exp_poly_coeffs_cached(b: float, delta: float, degree_rule: str) -> ChebSeries:
    plan = exp_poly_plan(b, delta, degree_rule)
    d = plan.d
    acc = np.zeros(d + 1)
    for i in range(plan.i_lo, plan.i_hi + 1):
        w = math.exp(float(_log_poisson(plan.lam, np.array(float(i)))))
        if i % 2:
            w = -w
        acc += w * monomial_cheb_coeffs(i, d).coeffs
    return ChebSeries(acc, (0.0, b))


def exp_poly_coeffs(b: float, delta: float, degree_rule: str = "exact") -> ChebSeries:
    """Chebyshev series on ``[0, b]`` approximating ``exp(-x)`` within ``delta``.

    Builds ``q(z) = sum_{i<=t} e^{-lam} (-lam)^i / i! * p_{i,d}(z)`` with
    ``lam = b/2`` and returns it on ``[0, b]``, so that the series evaluated
    at ``x`` equals ``q((x - b/2)/lam)``.
    """
    delta = clamp_delta(delta)
    return _exp_poly_coeffs_cached(float(b), float(delta), degree_rule)
