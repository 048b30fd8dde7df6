"""Gradient descent, conjugate gradient and Lanczos for symmetric sparse matrices.

Stopping rule for the linear solvers
------------------------------------
Both solvers start from ``x_0 = 0`` and aim for
``||x - A^{-1} v||_A <= delta ||A^{-1} v||_A``.  Two computable facts make
this checkable without knowing the solution:

* ``||e_t||_A <= ||r_t|| / sqrt(lambda_min)`` with ``r_t = v - A x_t``;
* ``q_t = v.x_t + r_t.x_t = ||x*||_A^2 - ||e_t||_A^2 <= ||x*||_A^2``.

The solver stops once ``||r_t|| <= delta * sqrt(lambda_min * q_t)``.  When
``lambda_min`` is supplied the test is rigorous.  Otherwise CG uses half of
its smallest Ritz value and GD half of the smallest Ritz value of a short
Lanczos run, which is a heuristic.

``residual_history`` holds one entry per iteration: for CG, the estimate
``sqrt(sum_{j>=t} alpha_j ||r_j||^2 + ||r_T||^2 / lambda)`` of
``||e_t||_A`` (non-increasing by construction); for GD, the bound
``||r_t|| / sqrt(lambda)``.
"""

from __future__ import annotations

import math
import warnings
from dataclasses import dataclass, field

import numpy as np
from scipy.linalg import eigh_tridiagonal

from .sparse import _as_vector

__all__ = [
    "SolveReport",
    "NotPositiveDefiniteError",
    "gd_solve",
    "cg_solve",
    "LanczosDecomp",
    "lanczos_decomp",
    "lanczos_k",
    "lanczos_lambda_max",
    "lanczos_top_r",
    "lanczos_fApply",
    "random_unit_vector",
    "BREAKDOWN_TOL",
    "CAP_FACTOR",
    "RITZ_SAFETY",
    "DEFAULT_SEED",
]

DEFAULT_SEED = 20240101
BREAKDOWN_TOL = 1e-12
CAP_FACTOR = 10
RITZ_SAFETY = 0.5
GD_LANCZOS_STEPS = 50


class NotPositiveDefiniteError(ValueError):
    """A curvature ``p^T A p`` was not positive."""


@dataclass(frozen=True)
class SolveReport:
    solution: np.ndarray
    iterations: int
    residual_history: tuple
    converged: bool
    target_delta: float
    method: str = "cg"
    lambda_min_used: float = float("nan")
    max_iter: int = 0
    final_residual: float = 0.0

    def to_text(self) -> str:
        lines = [
            f"method={self.method}",
            f"iterations={self.iterations}",
            f"converged={str(self.converged).lower()}",
            f"target_delta={self.target_delta:.6e}",
            f"lambda_min_used={self.lambda_min_used:.6e}",
            f"max_iter={self.max_iter}",
            f"final_residual={self.final_residual:.6e}",
            "iteration,error_estimate",
        ]
        lines += [f"{i + 1},{h:.6e}" for i, h in enumerate(self.residual_history)]
        return "\n".join(lines) + "\n"


def _check_delta(delta: float) -> float:
    delta = float(delta)
    if not 0 < delta < 1:
        raise ValueError("delta must lie in (0, 1)")
    return delta


def _theory_cap(kappa: float, delta: float, sqrt_kappa: bool) -> int:
    base = math.sqrt(kappa) if sqrt_kappa else kappa
    return CAP_FACTOR * int(math.ceil(base * math.log(2.0 / delta))) + CAP_FACTOR


def cg_solve(A, v, delta: float, lambda_min: float | None = None, kappa: float | None = None,
             max_iter: int | None = None) -> SolveReport:
    """Conjugate gradient for SPD ``A``, started at zero.

    ``A`` is anything with ``n`` and ``matvec``.  The iteration cap is
    ``10 * ceil(sqrt(kappa) log(2/delta)) + 10`` when ``kappa`` is known
    (supplied, or implied by ``lambda_min`` and a row-sum bound) and
    ``10 n + 10`` otherwise; ``max_iter`` overrides it.
    """
    delta = _check_delta(delta)
    n = A.n
    v = _as_vector(v, n)
    if max_iter is None:
        if kappa is None and lambda_min is not None and hasattr(A, "norm_bound"):
            kappa = A.norm_bound() / lambda_min
        max_iter = _theory_cap(kappa, delta, True) if kappa is not None else CAP_FACTOR * n + CAP_FACTOR
    x = np.zeros(n)
    r = v.copy()
    rr = float(r @ r)
    if rr == 0.0:
        return SolveReport(x, 0, (), True, delta, "cg", float(lambda_min or float("nan")), max_iter, 0.0)
    p = r.copy()
    alphas, betas, rrs = [], [], []
    lam = lambda_min
    lam_est = None
    converged = False

    def ritz_min() -> float:
        k = len(alphas)
        diag = np.empty(k)
        off = np.empty(max(k - 1, 0))
        for i in range(k):
            diag[i] = 1.0 / alphas[i] + (betas[i - 1] / alphas[i - 1] if i else 0.0)
            if i < k - 1:
                off[i] = math.sqrt(betas[i]) / alphas[i]
        if k == 1:
            return float(diag[0])
        return float(eigh_tridiagonal(diag, off, eigvals_only=True, select="i", select_range=(0, 0))[0])

    while len(alphas) < max_iter:
        ap = A.matvec(p)
        pap = float(p @ ap)
        if not pap > 0:
            if float(p @ p) == 0.0:
                break
            raise NotPositiveDefiniteError(f"p^T A p = {pap:.3e} at iteration {len(alphas) + 1}")
        alpha = rr / pap
        x += alpha * p
        r -= alpha * ap
        rr_new = float(r @ r)
        alphas.append(alpha)
        rrs.append(rr)
        q = float(v @ x + r @ x)
        if lambda_min is None:
            if lam_est is None or rr_new <= (delta**2) * lam_est * q:
                lam_est = RITZ_SAFETY * ritz_min()
            lam = lam_est
        if q > 0 and rr_new <= (delta**2) * lam * q:
            rr = rr_new
            converged = True
            break
        beta = rr_new / rr
        betas.append(beta)
        rr = rr_new
        if rr == 0.0:
            converged = True
            break
        p = r + beta * p

    # error estimate per iteration: tail sum of alpha_j ||r_j||^2 plus final bound
    tail = rr / lam if lam and lam > 0 else 0.0
    contrib = np.array(alphas) * np.array(rrs)
    est = np.sqrt(np.cumsum(contrib[::-1])[::-1] - contrib + tail) if contrib.size else np.zeros(0)
    return SolveReport(x, len(alphas), tuple(float(e) for e in est), converged, delta, "cg",
                       float(lam if lam is not None else float("nan")), max_iter, math.sqrt(rr))


def gd_solve(A, v, delta: float, lambda_min: float | None = None, kappa: float | None = None,
             max_iter: int | None = None, seed: int = DEFAULT_SEED) -> SolveReport:
    """Steepest descent ``x_{t+1} = x_t + alpha_t r_t`` with ``alpha_t = r^T r / r^T A r``.

    When ``lambda_min`` or ``kappa`` are missing, a short seeded Lanczos run
    estimates them; those matvecs are not counted as iterations.
    """
    delta = _check_delta(delta)
    n = A.n
    v = _as_vector(v, n)
    if lambda_min is None or (kappa is None and max_iter is None):
        dec = lanczos_decomp(A, min(n - 1, GD_LANCZOS_STEPS), seed) if n > 1 else None
        ritz = dec.eigenvalues() if dec is not None else np.array([A.matvec(np.ones(1))[0]])
        if lambda_min is None:
            lambda_min = RITZ_SAFETY * float(ritz[0])
        if kappa is None:
            kappa = float(ritz[-1]) / lambda_min
    if max_iter is None:
        max_iter = _theory_cap(kappa, delta, False)
    x = np.zeros(n)
    r = v.copy()
    rr = float(r @ r)
    hist = []
    converged = rr == 0.0
    while not converged and len(hist) < max_iter:
        ar = A.matvec(r)
        rar = float(r @ ar)
        if not rar > 0:
            raise NotPositiveDefiniteError(f"r^T A r = {rar:.3e} at iteration {len(hist) + 1}")
        alpha = rr / rar
        x += alpha * r
        r -= alpha * ar
        rr = float(r @ r)
        hist.append(math.sqrt(rr / lambda_min))
        q = float(v @ x + r @ x)
        converged = q > 0 and rr <= (delta**2) * lambda_min * q
    return SolveReport(x, len(hist), tuple(hist), converged, delta, "gd", float(lambda_min), max_iter,
                       math.sqrt(rr))


def random_unit_vector(n: int, seed: int, orthogonal_to=None) -> np.ndarray:
    """Seeded Gaussian direction, optionally projected off one vector, normalized."""
    g = np.random.default_rng(seed).standard_normal(n)
    if orthogonal_to is not None:
        k = np.asarray(orthogonal_to, dtype=float)
        k = k / np.linalg.norm(k)
        g -= (g @ k) * k
        g -= (g @ k) * k
    return g / np.linalg.norm(g)


@dataclass(frozen=True)
class LanczosDecomp:
    """``A V ~ V T`` with ``V`` of shape ``(n, k+1)`` and ``T`` tridiagonal."""

    alpha: np.ndarray
    beta: np.ndarray
    V: np.ndarray
    k: int
    seed: int | None
    breakdown: bool = False
    matvecs: int = field(default=0)

    @property
    def T(self) -> np.ndarray:
        t = np.diag(self.alpha)
        if self.beta.size:
            t += np.diag(self.beta, 1) + np.diag(self.beta, -1)
        return t

    def eigenvalues(self) -> np.ndarray:
        if self.alpha.size == 1:
            return self.alpha.copy()
        return eigh_tridiagonal(self.alpha, self.beta, eigvals_only=True)

    def eigh(self):
        if self.alpha.size == 1:
            return self.alpha.copy(), np.ones((1, 1))
        return eigh_tridiagonal(self.alpha, self.beta)


def lanczos_decomp(A, k: int, seed: int = DEFAULT_SEED, start=None, orthogonal_to=None,
                   reorth: str = "full") -> LanczosDecomp:
    """Lanczos basis of the order-``k`` Krylov space (``k + 1`` vectors, ``k + 1`` matvecs).

    The start vector is ``start`` normalized, or a seeded random unit vector.
    ``reorth="full"`` re-orthogonalizes every new vector against the whole
    basis (twice); ``"none"`` keeps the plain three-term recurrence.  The
    process stops early when the new direction falls below ``1e-12`` times
    the running norm estimate; ``k`` then reports the truncated order.
    """
    n = A.n
    k = int(k)
    if k < 0 or k >= n:
        raise ValueError(f"Krylov order k must satisfy 0 <= k < n={n}, got {k}")
    if reorth not in ("full", "none"):
        raise ValueError("reorth must be 'full' or 'none'")
    if start is None:
        q = random_unit_vector(n, seed, orthogonal_to)
    else:
        q = _as_vector(start, n, "start").copy()
        nq = np.linalg.norm(q)
        if nq == 0:
            raise ValueError("start vector must be nonzero")
        q /= nq
        seed = None
    V = np.zeros((n, k + 1))
    V[:, 0] = q
    alpha = np.zeros(k + 1)
    beta = np.zeros(k)
    norm_est = 0.0
    breakdown = False
    j = 0
    while True:
        w = A.matvec(V[:, j])
        alpha[j] = V[:, j] @ w
        w -= alpha[j] * V[:, j]
        if j > 0:
            w -= beta[j - 1] * V[:, j - 1]
        if reorth == "full":
            basis = V[:, : j + 1]
            for _ in range(2):
                w -= basis @ (basis.T @ w)
        norm_est = max(norm_est, abs(alpha[j]), beta[j - 1] if j > 0 else 0.0)
        if j == k:
            break
        b = float(np.linalg.norm(w))
        if b <= BREAKDOWN_TOL * max(norm_est, np.finfo(float).tiny):
            breakdown = True
            break
        beta[j] = b
        V[:, j + 1] = w / b
        j += 1
    return LanczosDecomp(alpha[: j + 1].copy(), beta[:j].copy(), V[:, : j + 1].copy(), j, seed, breakdown, j + 1)


def lanczos_k(n: int, delta: float, c: float = 1.0) -> int:
    """Krylov order ``ceil(c / sqrt(delta) * log(n / delta))``, capped at ``n - 1``."""
    return max(0, min(n - 1, int(math.ceil(c / math.sqrt(delta) * math.log(n / delta)))))


def lanczos_lambda_max(A, delta: float, seed: int = DEFAULT_SEED, c: float = 1.0, k: int | None = None):
    """Largest Ritz value ``mu <= lambda_1(A)`` and its lifted Ritz vector."""
    if not 0 < delta < 1:
        raise ValueError("delta must lie in (0, 1)")
    if A.n == 1:
        return float(A.matvec(np.ones(1))[0]), np.ones(1)
    dec = lanczos_decomp(A, lanczos_k(A.n, delta, c) if k is None else k, seed)
    vals, vecs = dec.eigh()
    return float(vals[-1]), dec.V @ vecs[:, -1]


def lanczos_top_r(A, r: int, delta: float, seed: int = DEFAULT_SEED, c: float = 1.0, k: int | None = None):
    """Top ``r`` Ritz pairs ``[(mu_1, w_1), ..., (mu_r, w_r)]`` in decreasing order."""
    if not 0 < delta < 1:
        raise ValueError("delta must lie in (0, 1)")
    if k is None:
        k = min(A.n - 1, lanczos_k(A.n, delta, c) + r)
    dec = lanczos_decomp(A, k, seed)
    vals, vecs = dec.eigh()
    if r > vals.size:
        raise ValueError(f"requested r={r} pairs but the Krylov space has dimension {vals.size}")
    return [(float(vals[-1 - i]), dec.V @ vecs[:, -1 - i]) for i in range(r)]


def lanczos_fApply(A, v, f, k: int) -> np.ndarray:
    """``||v|| V f(T) e_1``, the Lanczos approximation of ``f(A) v``.

    ``f`` acts elementwise on eigenvalues.  For ``k >= n`` the exact dense
    result is returned and a ``RuntimeWarning`` is issued.
    """
    n = A.n
    v = _as_vector(v, n)
    nv = float(np.linalg.norm(v))
    if nv == 0.0:
        return np.zeros(n)
    if k >= n:
        warnings.warn(f"k={k} >= n={n}: using the dense eigendecomposition", RuntimeWarning, stacklevel=2)
        lam, u = np.linalg.eigh(A.to_dense())
        return u @ (np.asarray(f(lam), dtype=float) * (u.T @ v))
    dec = lanczos_decomp(A, k, start=v)
    vals, vecs = dec.eigh()
    return nv * (dec.V @ (vecs @ (np.asarray(f(vals), dtype=float) * vecs[0, :])))
