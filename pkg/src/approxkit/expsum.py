"""Sums of exponentials approximating ``1/x`` on ``[eps, 1]``.

Starting from ``1/x = int_R exp(-x e^y + y) dy`` the integral is discretized
by the trapezoidal rule with step ``h`` and truncated to ``A <= j <= B``:

    1/x  ~  sum_j  h e^{jh} exp(-e^{jh} x).
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .chebyshev import clamp_delta

__all__ = [
    "ExpSumApprox",
    "CertificateError",
    "inverse_expsum",
    "expsum_eval",
    "relative_error_on_grid",
    "C_N",
    "C_H",
    "TERM_COUNT_CONSTANT",
    "term_count_bound",
    "CERT_GRID_POINTS",
]

# N = ceil(C_N log(1/delta)),  h = 1 / (C_H N^2)
C_N = 1.0
C_H = 2.0
# number of terms <= TERM_COUNT_CONSTANT * max(1, log(1/(eps delta)))^3
TERM_COUNT_CONSTANT = 8.0
CERT_GRID_POINTS = 10_000


class CertificateError(RuntimeError):
    """A constructed approximation failed its built-in grid check."""


@dataclass(frozen=True)
class ExpSumApprox:
    """``sum_j w_j exp(-t_j x)`` with ``w_j = h t_j``, ``t_j = e^{jh}``, ``j_lo <= j <= j_hi``."""

    weights: np.ndarray
    rates: np.ndarray
    eps: float
    delta: float
    h: float
    n_order: int
    j_lo: int
    j_hi: int

    def __post_init__(self):
        for name in ("weights", "rates"):
            arr = np.array(getattr(self, name), dtype=float)
            arr.flags.writeable = False
            object.__setattr__(self, name, arr)
        if self.weights.size != self.j_hi - self.j_lo + 1 or self.rates.size != self.weights.size:
            raise ValueError("number of terms must equal j_hi - j_lo + 1")
        if np.any(self.weights <= 0) or np.any(self.rates <= 0):
            raise ValueError("weights and rates must be positive")
        if np.any(np.diff(self.rates) <= 0):
            raise ValueError("rates must be strictly increasing")

    @property
    def terms(self) -> list[tuple[float, float]]:
        return list(zip(self.weights.tolist(), self.rates.tolist()))

    def __len__(self) -> int:
        return self.weights.size

    def __call__(self, x):
        return expsum_eval(self, x)


def expsum_eval(approx: ExpSumApprox, x, chunk: int = 2048):
    """Evaluate ``sum_j w_j exp(-t_j x)``; the sum over ``j`` runs in a fixed order."""
    x = np.asarray(x, dtype=float)
    flat = x.ravel()
    out = np.empty_like(flat)
    for start in range(0, flat.size, chunk):
        xs = flat[start : start + chunk]
        out[start : start + chunk] = np.exp(-np.outer(xs, approx.rates)) @ approx.weights
    out = out.reshape(x.shape)
    return out[()] if out.ndim == 0 else out


def term_count_bound(eps: float, delta: float) -> float:
    """Documented ceiling on ``len(inverse_expsum(eps, delta))``."""
    return TERM_COUNT_CONSTANT * max(1.0, math.log(1.0 / (eps * delta))) ** 3


def certificate_grid(eps: float, points: int = CERT_GRID_POINTS) -> np.ndarray:
    """Log-spaced points on ``[eps, 1]``, endpoints included."""
    return np.logspace(math.log10(eps), 0.0, points)


def relative_error_on_grid(approx: ExpSumApprox, points: int = CERT_GRID_POINTS) -> float:
    """``max |x * sum(x) - 1|`` over the certificate grid."""
    x = certificate_grid(approx.eps, points)
    return float(np.max(np.abs(x * expsum_eval(approx, x) - 1.0)))


def inverse_expsum(eps: float, delta: float) -> ExpSumApprox:
    """Build the sum of exponentials with ``(1-delta)/x <= sum <= (1+delta)/x`` on ``[eps, 1]``.

    ``N = ceil(C_N log(1/delta))``, ``h = 1/(C_H N^2)``.  The lower index
    ``A = floor(-log(2/delta)/h)`` and upper index
    ``B = ceil(log(log(2/delta)/eps)/h)`` each leave at most ``delta/2``
    relative mass in the discarded tails.  The relative error is checked on a
    dense grid before returning; :class:`CertificateError` is raised on failure.
    """
    eps, delta = float(eps), float(delta)
    if not 0 < eps <= 1:
        raise ValueError("eps must lie in (0, 1]")
    delta = clamp_delta(delta)
    n_order = max(1, int(math.ceil(C_N * math.log(1.0 / delta))))
    h = 1.0 / (C_H * n_order**2)
    tail = math.log(2.0 / delta)
    j_lo = int(math.floor(-tail / h))
    j_hi = int(math.ceil(math.log(tail / eps) / h))
    j = np.arange(j_lo, j_hi + 1, dtype=float)
    rates = np.exp(j * h)
    approx = ExpSumApprox(h * rates, rates, eps, delta, h, n_order, j_lo, j_hi)
    err = relative_error_on_grid(approx)
    if not err <= delta:
        raise CertificateError(
            f"relative error {err:.3e} exceeds delta={delta:.3e} for eps={eps:.3e}; retune C_N/C_H"
        )
    return approx
