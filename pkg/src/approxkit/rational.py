"""Rational approximations of ``exp(-x)`` on ``[0, inf)``.

Two constructions:

* ``1 / S_d(x)`` with ``S_d`` the degree-``d`` Taylor polynomial of ``e^x``.
* The negative-pole form ``p_d(x) / (1 + x/d)^d`` whose numerator is obtained
  from an L2 projection of ``f_d'(t)``, ``f_d(y) = exp(-d (1+y)/(1-y))``, onto
  Legendre polynomials.  The projection coefficients are assembled from
  Laguerre expansions and exponential integrals ``E_j(d)`` in multiprecision
  arithmetic (mpmath) and rounded to doubles at the very end.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from functools import lru_cache

import mpmath
import numpy as np

from .chebyshev import ChebSeries

__all__ = [
    "MonomialPoly",
    "PrecisionError",
    "taylor_recip_eval",
    "exp_integral",
    "ssv_precision",
    "ssv_gammas",
    "ssv_resolvent_coeffs",
    "ssv_resolvent_cheb",
    "ssv_coeffs",
    "ssv_eval",
    "ssv_error_bound",
    "ssv_sup_error",
    "ssv_degree_for",
    "SSV_GRID_POINTS",
    "SSV_MAX_DEGREE",
    "EXPINT_GUARD_BITS",
]

SSV_MAX_DEGREE = 40
EXPINT_GUARD_BITS = 8
# bits of agreement required between the two precision runs
_MIN_CORRECT_BITS = 10
SSV_GRID_POINTS = 100_000


class PrecisionError(ArithmeticError):
    """Working precision was too low to certify the computed coefficients."""


@dataclass(frozen=True)
class MonomialPoly:
    """Polynomial ``sum_i a_i x**i`` with real coefficients."""

    coeffs: np.ndarray

    def __post_init__(self):
        c = np.array(self.coeffs, dtype=float).ravel()
        if c.size == 0:
            raise ValueError("MonomialPoly needs at least one coefficient")
        if not np.all(np.isfinite(c)):
            raise ValueError("MonomialPoly coefficients must be finite")
        c.flags.writeable = False
        object.__setattr__(self, "coeffs", c)

    def degree(self) -> int:
        return self.coeffs.size - 1

    def __call__(self, x):
        x = np.asarray(x, dtype=float)
        acc = np.zeros_like(x)
        for a in self.coeffs[::-1]:
            acc = acc * x + a
        return acc[()] if acc.ndim == 0 else acc


def taylor_recip_eval(d: int, x):
    """Evaluate ``1 / S_d(x)``, ``S_d(x) = sum_{k<=d} x^k / k!``, for ``x >= 0``."""
    d = int(d)
    if d < 0:
        raise ValueError("d must be non-negative")
    x = np.asarray(x, dtype=float)
    if np.any(x < 0):
        raise ValueError("1/S_d is only certified on x >= 0")
    s = np.ones_like(x)
    # S_d(x) = 1 + x(1 + x/2(1 + x/3(...)))
    for k in range(d, 0, -1):
        s = 1.0 + s * x / k
    out = 1.0 / s
    return out[()] if out.ndim == 0 else out


def _expint_table(d, jmax: int, bits: int) -> dict[int, mpmath.mpf]:
    """``E_j(d)`` for ``-jmax <= j <= jmax`` at roughly ``bits`` of precision.

    Must be called inside an mpmath precision context of at least ``bits``.
    Works for any ``d > 0``; the forward recurrence loses at most
    ``log2(e^d)`` bits, which the caller budgets as guard bits.
    """
    d = mpmath.mpf(d)
    ed = mpmath.exp(-d)
    table: dict[int, mpmath.mpf] = {}
    # j <= 0: integrate w^m e^{-dw} on [1, inf) by parts
    for m in range(jmax + 1):
        term = ed / d
        acc = term
        for i in range(1, m + 1):
            term = term * (m - i + 1) / d
            acc += term
        table[-m] = acc
    if jmax >= 1:
        table[1] = _e1(d, bits)
        for j in range(1, jmax):
            table[j + 1] = (ed - d * table[j]) / j
    return table


def _e1(d: mpmath.mpf, bits: int) -> mpmath.mpf:
    """``E_1(d) = -gamma - ln d + sum_{k>=1} (-1)^{k+1} d^k / (k k!)``."""
    eps = mpmath.mpf(2) ** (-bits - 4)
    acc = mpmath.mpf(0)
    term = mpmath.mpf(1)
    k = 0
    while True:
        k += 1
        term = term * d / k
        piece = term / k
        acc += piece if k % 2 else -piece
        if k > d and piece < eps * abs(acc):
            break
    return -mpmath.euler - mpmath.log(d) + acc


def _expint_series(j: int, d: mpmath.mpf, bits: int):
    """Alternating expansion ``e^{-d}/d * sum_k (-1)^k (j)_k / d^k``.

    Returns ``None`` when the terms stop shrinking before reaching the
    requested precision or the term budget ``4 ceil(d) + 200`` runs out.
    """
    budget = 4 * int(math.ceil(d)) + 200
    eps = mpmath.mpf(2) ** (-bits)
    term = mpmath.mpf(1)
    acc = term
    for k in range(1, budget + 1):
        nxt = -term * (j + k - 1) / d
        if abs(nxt) >= abs(term):
            return None
        term = nxt
        acc += term
        if abs(term) < eps * abs(acc):
            return mpmath.exp(-d) / d * acc
    return None


def exp_integral(j: int, d, prec: int = 64) -> mpmath.mpf:
    """``E_j(d) = int_1^inf w^{-j} e^{-d w} dw`` to about ``prec`` bits.

    The relative error is at most ``2**(-prec + EXPINT_GUARD_BITS)``.  For
    ``j <= 0`` the closed form from repeated integration by parts is used.
    For ``j >= 1`` the alternating expansion in ``1/d`` is tried first; when
    its terms stop decreasing too early, ``E_1`` from its convergent series
    is lifted to ``E_j`` with ``E_{i+1} = (e^{-d} - d E_i) / i``.
    """
    j = int(j)
    prec = int(prec)
    if prec < 64:
        raise ValueError("prec must be at least 64 bits")
    dd = mpmath.mpf(d)
    if not dd > 1:
        raise ValueError("exp_integral is certified only for d > 1")
    guard = int(math.ceil(2 * math.log2(math.e) * float(d))) + 64
    with mpmath.workprec(prec + guard):
        if j >= 1:
            val = _expint_series(j, mpmath.mpf(d), prec + EXPINT_GUARD_BITS)
            if val is not None:
                return +val
        return +_expint_table(mpmath.mpf(d), abs(j), prec + guard)[j]


def ssv_precision(d: int) -> int:
    """Working precision schedule in bits for degree ``d``."""
    return max(256, 12 * d * int(math.ceil(math.log2(d + 1))))


def _legendre_monomial(k: int) -> list:
    """Exact rational monomial coefficients of the Legendre polynomial ``L_k``."""
    from fractions import Fraction

    c = [Fraction(0)] * (k + 1)
    for i in range(k // 2 + 1):
        c[k - 2 * i] = Fraction((-1) ** i * math.comb(k, i) * math.comb(2 * k - 2 * i, k), 2**k)
    return c


def _ssv_pipeline(d: int, bits: int):
    """Run the full coefficient chain at ``bits`` precision.

    Returns ``(gammas, resolvent)`` where ``resolvent[i]`` is the coefficient
    of ``u**i`` in ``q_d(1 - 2u)``.
    """
    guard = int(math.ceil(2 * math.log2(math.e) * d)) + 64
    with mpmath.workprec(bits + guard):
        dm = mpmath.mpf(d)
        E = _expint_table(dm, d, bits + guard)
        ed = mpmath.exp(dm)
        gammas = []
        for k in range(d):
            # I(k, i) = int_0^inf z^k (1+z)^{i-k} e^{-dz} dz
            gk = mpmath.mpf(0)
            for i in range(k + 1):
                integral = mpmath.mpf(0)
                for l in range(k + 1):
                    term = math.comb(k, l) * E[k - i - l]
                    integral += term if (k - l) % 2 == 0 else -term
                integral *= ed
                lag = mpmath.mpf(math.comb(k + 1, k - i)) * dm**i / math.factorial(i)
                gk += lag * integral if i % 2 == 0 else -lag * integral
            gammas.append(-dm * gk)

        # r(t) = sum_k (2k+1)/2 gamma_k L_k(t): L2 projection of f_d'
        r = [mpmath.mpf(0)] * d
        for k, g in enumerate(gammas):
            scale = g * (2 * k + 1) / 2
            for m, c in enumerate(_legendre_monomial(k)):
                if c:
                    r[m] += scale * mpmath.mpf(c.numerator) / c.denominator
        # q(y) = -int_y^1 r(t) dt = R(y) - R(1)
        q = [mpmath.mpf(0)] * (d + 1)
        for m, c in enumerate(r):
            q[m + 1] = c / (m + 1)
        q[0] = -mpmath.fsum(q[1:])
        # P(u) = q(1 - 2u)
        res = [mpmath.mpf(0)] * (d + 1)
        for m, c in enumerate(q):
            for l in range(m + 1):
                res[l] += c * math.comb(m, l) * (-2) ** l
        # P(0) = q(1) = 0 by construction; keep it exact
        res[0] = mpmath.mpf(0)
        return gammas, res


def _check_bits(lo, hi, what: str):
    worst = math.inf
    for a, b in zip(lo, hi):
        if a == b:
            bits = math.inf
        elif b == 0:
            bits = 0.0
        else:
            bits = -float(mpmath.log(abs(a - b) / abs(b), 2))
        worst = min(worst, bits)
    if worst < _MIN_CORRECT_BITS:
        raise PrecisionError(f"{what}: only {worst:.1f} correct bits at this precision")
    return worst


@lru_cache(maxsize=64)
def _ssv_cached(d: int, prec: int):
    gam, res = _ssv_pipeline(d, prec)
    gam2, res2 = _ssv_pipeline(d, prec + 64)
    _check_bits(gam, gam2, "gamma coefficients")
    _check_bits(res, res2, "resolvent coefficients")
    with mpmath.workprec(prec + 64):
        num = [mpmath.mpf(0)] * (d + 1)
        for i, a in enumerate(res2):
            for m in range(d - i + 1):
                num[m] += a * math.comb(d - i, m) / mpmath.mpf(d) ** m
        # Chebyshev form on u in [0, 1]: u = (1 + m)/2, then m^n = sum_j P(|D_n|=j) T_j(m)
        mono = [mpmath.mpf(0)] * (d + 1)
        for i, a in enumerate(res2):
            for n in range(i + 1):
                mono[n] += a * math.comb(i, n) / mpmath.mpf(2) ** i
        cheb = [mpmath.mpf(0)] * (d + 1)
        for n, a in enumerate(mono):
            for j in range(n % 2, n + 1, 2):
                w = mpmath.mpf(math.comb(n, (n - j) // 2)) / mpmath.mpf(2) ** n
                cheb[j] += a * (w if j == 0 else 2 * w)
    return (
        tuple(float(g) for g in gam2),
        tuple(float(a) for a in res2),
        tuple(float(a) for a in num),
        tuple(float(a) for a in cheb),
    )


def _validate_ssv(d: int, prec: int | None) -> tuple[int, int]:
    d = int(d)
    if d < 1:
        raise ValueError("degree d must be at least 1")
    if d > SSV_MAX_DEGREE:
        raise ValueError(f"degree d={d} exceeds the supported cap {SSV_MAX_DEGREE}")
    need = ssv_precision(d)
    prec = need if prec is None else int(prec)
    if prec < need:
        raise PrecisionError(f"prec={prec} is below the schedule {need} for d={d}")
    return d, prec


def ssv_gammas(d: int, prec: int | None = None) -> np.ndarray:
    """Legendre inner products ``gamma_k = int_{-1}^1 f_d'(t) L_k(t) dt``, k < d."""
    d, prec = _validate_ssv(d, prec)
    return np.array(_ssv_cached(d, prec)[0])


def ssv_resolvent_coeffs(d: int, prec: int | None = None) -> MonomialPoly:
    """Coefficients ``a_i`` with ``sum_i a_i (1 + x/d)^{-i} ~ exp(-x)``.

    This is the form applied to a matrix as ``sum_i a_i B^i v`` with
    ``B = (I + A/d)^{-1}``.
    """
    d, prec = _validate_ssv(d, prec)
    return MonomialPoly(np.array(_ssv_cached(d, prec)[1]))


def ssv_resolvent_cheb(d: int, prec: int | None = None) -> ChebSeries:
    """The resolvent polynomial as a Chebyshev series in ``u`` on ``[0, 1]``.

    Unlike the monomial form, whose coefficients grow like ``d^{O(d)}``, these
    coefficients stay of order one, so the series can be summed in double
    precision (and applied to ``B`` by a vector recurrence) without
    cancellation.
    """
    d, prec = _validate_ssv(d, prec)
    return ChebSeries(np.array(_ssv_cached(d, prec)[3]), (0.0, 1.0))


def ssv_coeffs(d: int, prec: int | None = None) -> MonomialPoly:
    """Numerator ``p_d`` with ``p_d(x) / (1 + x/d)^d ~ exp(-x)`` on ``[0, inf)``.

    Raises :class:`PrecisionError` if ``prec`` is below the schedule or if
    two runs ``64`` bits apart agree to fewer than 10 bits in any coefficient.
    """
    d, prec = _validate_ssv(d, prec)
    return MonomialPoly(np.array(_ssv_cached(d, prec)[2]))


def ssv_eval(d: int, x, prec: int | None = None):
    """Evaluate the degree-``d`` negative-pole approximant at ``x >= 0``."""
    x = np.asarray(x, dtype=float)
    if np.any(x < 0):
        raise ValueError("the approximant is only certified on x >= 0")
    return ssv_resolvent_cheb(d, prec)(1.0 / (1.0 + x / d))


def ssv_error_bound(d: int, c: float = 8.0) -> float:
    """Empirical certificate ``c * d * 2**-d`` for the negative-pole approximant."""
    return c * d * 2.0 ** (-d)


def _ssv_grid() -> np.ndarray:
    # u = 1/(1 + x/d) sweeps x over [0, inf) as u runs over (0, 1]
    half = SSV_GRID_POINTS // 2
    return np.unique(np.concatenate((np.linspace(0.0, 1.0, half), np.logspace(-12.0, 0.0, half))))


@lru_cache(maxsize=64)
def ssv_sup_error(d: int) -> float:
    """Grid sup of ``|exp(-x) - approximant(x)|`` over all ``x >= 0``.

    The grid lives in ``u = 1/(1 + x/d)``, which covers ``[0, inf)`` with
    ``u = 0`` standing for ``x = inf``; both endpoints are included.
    """
    d, _ = _validate_ssv(d, None)
    u = _ssv_grid()
    with np.errstate(divide="ignore", over="ignore"):
        x = d * (1.0 / u - 1.0)
        target = np.where(u > 0, np.exp(-x), 0.0)
    return float(np.max(np.abs(ssv_resolvent_cheb(d)(u) - target)))


def ssv_degree_for(delta: float) -> int:
    """Smallest degree whose grid sup error is at most ``delta``."""
    delta = float(delta)
    if not delta > 0:
        raise ValueError("delta must be positive")
    for d in range(1, SSV_MAX_DEGREE + 1):
        if ssv_sup_error(d) <= delta:
            return d
    raise ValueError(f"delta={delta:.3e} needs a degree above the cap {SSV_MAX_DEGREE}")
