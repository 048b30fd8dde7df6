"""Matrix-function-times-vector products built on the scalar approximations.

* ``power_apply``: ``M^s v`` through the compressed monomial ``p_{s,d}``.
* ``exp_apply_poly``: ``exp(-A) v`` through the polynomial on ``[0, b]``.
* ``exp_apply_rational``: ``exp(-A) v`` as a polynomial in ``(I + A/d)^{-1}``,
  each power costing one inner CG solve.
* ``inverse_apply_via_exp``: ``A^{-1} v`` as ``sum_j w_j exp(-t_j A) v``.

Every routine returns an :class:`ApplyReport` carrying the result together
with matvec and solve counts and the error level the construction certifies.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from .chebyshev import exp_poly_coeffs, exp_poly_plan, monomial_cheb_coeffs, monomial_tail
from .expsum import inverse_expsum
from .krylov import DEFAULT_SEED, cg_solve, lanczos_decomp
from .rational import ssv_degree_for, ssv_resolvent_cheb, ssv_sup_error
from .sparse import ShiftedOperator, SparseSymMatrix, WeightedGraph, _as_vector, normalized_laplacian, walk_matrix_sym

__all__ = [
    "ApplyReport",
    "power_degree",
    "power_apply",
    "walk_distribution",
    "exp_apply_poly",
    "exp_apply_rational",
    "heat_kernel_apply",
    "inverse_apply_via_exp",
    "NORM_LANCZOS_STEPS",
    "NORM_INFLATION",
]

NORM_LANCZOS_STEPS = 30
NORM_INFLATION = 1.1
NORM_CHECK_STEPS = 8


@dataclass(frozen=True)
class ApplyReport:
    result: np.ndarray
    matvec_count: int
    method: str
    certified_delta: float
    degree: int = 0
    inner_solves: int = 0
    inner_iterations: tuple = ()
    converged: bool = True
    warnings: tuple = ()
    params: dict = field(default_factory=dict)

    def to_text(self) -> str:
        lines = [
            f"method={self.method}",
            f"degree={self.degree}",
            f"matvec_count={self.matvec_count}",
            f"inner_solves={self.inner_solves}",
            f"inner_iterations_total={sum(self.inner_iterations)}",
            f"certified_delta={self.certified_delta:.6e}",
            f"converged={str(self.converged).lower()}",
        ]
        lines += [f"{k}={_fmt(v)}" for k, v in sorted(self.params.items())]
        lines += [f"warning={w}" for w in self.warnings]
        if self.inner_iterations:
            lines.append("solve,iterations")
            lines += [f"{i + 1},{it}" for i, it in enumerate(self.inner_iterations)]
        return "\n".join(lines) + "\n"


def _fmt(v) -> str:
    return f"{v:.6e}" if isinstance(v, float) else str(v)


def _cheb_vector_sum(step, v: np.ndarray, coeffs: np.ndarray) -> np.ndarray:
    """``sum_j c_j T_j(M) v`` given ``step(x) = M x``; uses ``len(coeffs) - 1`` steps."""
    acc = coeffs[0] * v
    if coeffs.size == 1:
        return acc
    t_prev, t_cur = v, step(v)
    acc = acc + coeffs[1] * t_cur
    for c in coeffs[2:]:
        t_prev, t_cur = t_cur, 2.0 * step(t_cur) - t_prev
        acc += c * t_cur
    return acc


def power_degree(s: int, delta: float) -> int:
    """``min(s, ceil(sqrt(2 s log(2/delta))))``."""
    if s == 0:
        return 0
    return min(s, int(math.ceil(math.sqrt(2.0 * s * math.log(2.0 / delta)))))


def _norm_warnings(M, seed: int) -> list:
    if M.n < 2:
        return []
    dec = lanczos_decomp(M, min(M.n - 1, NORM_CHECK_STEPS), seed)
    ev = dec.eigenvalues()
    top = max(abs(float(ev[0])), abs(float(ev[-1])))
    return [f"spectral norm estimate {top:.6g} exceeds 1"] if top > 1.0 + 1e-8 else []


def power_apply(M: SparseSymMatrix, v, s: int, delta: float, normalize: bool = True,
                check_norm: bool = False, seed: int = DEFAULT_SEED) -> ApplyReport:
    """``w ~ M^s v`` for symmetric ``M`` with ``||M|| <= 1``.

    Uses ``d = min(s, ceil(sqrt(2 s log(2/delta))))`` matvecs.  With
    ``normalize`` the kept coefficients are rescaled to sum to one, which
    keeps ``T_j(1) = 1`` eigen-directions exact (mass preservation on
    regular graphs) and costs at most a factor 2 on the certified error,
    ``2 P(|D_s| > d)``; otherwise the certificate is ``P(|D_s| > d)``.
    """
    s = int(s)
    if s < 0:
        raise ValueError("s must be non-negative")
    delta = float(delta)
    if not 0 < delta <= 0.5:
        raise ValueError("delta must lie in (0, 1/2]")
    v = _as_vector(v, M.n)
    warns = _norm_warnings(M, seed) if check_norm else []
    d = power_degree(s, delta)
    params = {"s": s, "delta": delta, "normalize": normalize}
    if s == 0:
        return ApplyReport(v.copy(), 0, "power-cheb", 0.0, 0, warnings=tuple(warns), params=params)
    coeffs = np.array(monomial_cheb_coeffs(s, d).coeffs)
    tail = monomial_tail(s, d)
    if normalize:
        coeffs /= math.fsum(coeffs.tolist())
        cert = 2.0 * tail
    else:
        cert = tail
    w = _cheb_vector_sum(M.matvec, v, coeffs)
    return ApplyReport(w, d, "power-cheb", cert, d, warnings=tuple(warns), params=params)


def walk_distribution(G: WeightedGraph, v0, s: int, delta: float) -> ApplyReport:
    """``W~^s v0`` for the column-stochastic walk ``W~ = A D^{-1}``.

    Computed as ``D^{1/2} W^s D^{-1/2} v0`` with the symmetric ``W``.  The
    2-norm error is at most ``cert * ||D^{-1/2} v0|| * max_i sqrt(d_i)`` with
    ``cert`` the certificate of :func:`power_apply`.
    """
    v0 = _as_vector(v0, G.n, "v0")
    if np.any(v0 < 0) or abs(math.fsum(v0.tolist()) - 1.0) > 1e-12:
        raise ValueError("v0 must be a probability vector (non-negative, summing to 1)")
    sq = G.sqrt_degrees()
    x = v0 / sq
    rep = power_apply(walk_matrix_sym(G), x, s, delta)
    cert = rep.certified_delta * float(np.linalg.norm(x)) * float(np.max(sq))
    return ApplyReport(sq * rep.result, rep.matvec_count, "power-cheb", cert, rep.degree,
                       warnings=rep.warnings, params=dict(rep.params, graph_n=G.n))


def _spectral_bounds(A, seed: int):
    k = min(A.n - 1, NORM_LANCZOS_STEPS)
    if k < 1:
        val = float(A.matvec(np.ones(1))[0])
        return val, val, 1
    dec = lanczos_decomp(A, k, seed)
    ev = dec.eigenvalues()
    return float(ev[0]), float(ev[-1]), dec.matvecs


def exp_apply_poly(A: SparseSymMatrix, v, delta: float, b: float | None = None,
                   seed: int = DEFAULT_SEED, degree_rule: str = "exact") -> ApplyReport:
    """``exp(-A) v`` for PSD ``A`` with the Chebyshev polynomial on ``[0, b]``.

    Without ``b`` a 30-step Lanczos run supplies ``1.1 * lambda_max`` (never
    more than the row-sum bound), and a negative smallest Ritz value, which
    proves indefiniteness, is rejected.  The matvec count equals the degree.
    """
    delta = float(delta)
    if not 0 < delta <= 1:
        raise ValueError("delta must lie in (0, 1]")
    v = _as_vector(v, A.n)
    est = 0
    if b is None:
        lo, hi, est = _spectral_bounds(A, seed)
        if lo < -1e-10 * max(abs(hi), 1.0):
            raise ValueError(f"matrix has a negative Rayleigh quotient {lo:.3e}; exp_apply_poly needs PSD input")
        b = min(NORM_INFLATION * hi, A.norm_bound())
    b = float(b)
    params = {"b": b, "delta": delta, "estimate_matvecs": est}
    if b <= 0.0:
        return ApplyReport(v.copy(), 0, "exp-poly", 0.0, 0, params=params)
    series = exp_poly_coeffs(b, delta, degree_rule)
    scale = 2.0 / b

    def step(x):
        y = A.matvec(x)
        y *= scale
        y -= x
        return y

    w = _cheb_vector_sum(step, v, np.asarray(series.coeffs))
    d = series.degree()
    return ApplyReport(w, d, "exp-poly", delta, d, params=params)


def exp_apply_rational(A: SparseSymMatrix, v, delta: float, d: int | None = None,
                       inner_delta: float | None = None) -> ApplyReport:
    """``exp(-A) v ~ sum_j c_j T_j(2B - I) v`` with ``B = (I + A/d)^{-1}``.

    ``d`` defaults to the smallest degree whose grid sup error is at most
    ``delta/2``.  Each of the ``d`` powers of ``B`` costs one CG solve with
    ``I + A/d`` (``lambda_min = 1`` is exact there, so the inner stopping rule
    is rigorous).  The propagated solve error is at most
    ``4 d^2 sum|c_j| delta_1``, so ``delta_1 = delta / (8 d^2 sum|c_j|)`` keeps it
    below ``delta/2``.
    """
    delta = float(delta)
    if not 0 < delta <= 1:
        raise ValueError("delta must lie in (0, 1]")
    v = _as_vector(v, A.n)
    if d is None:
        d = ssv_degree_for(delta / 2.0)
    series = ssv_resolvent_cheb(d)
    coeffs = np.asarray(series.coeffs)
    l1 = float(np.sum(np.abs(coeffs)))
    if inner_delta is None:
        inner_delta = min(0.5, delta / (8.0 * d * d * l1))
    op = ShiftedOperator(A, 1.0, 1.0 / d)
    kappa = 1.0 + A.norm_bound() / d
    iters = []
    ok = [True]

    def step(x):
        rep = cg_solve(op, x, inner_delta, lambda_min=1.0, kappa=kappa)
        iters.append(rep.iterations)
        ok[0] = ok[0] and rep.converged
        return 2.0 * rep.solution - x

    w = _cheb_vector_sum(step, v, coeffs)
    cert = ssv_sup_error(d) + 4.0 * d * d * l1 * inner_delta
    params = {"delta": delta, "inner_delta": inner_delta, "cheb_l1": l1}
    return ApplyReport(w, sum(iters), "exp-rational", cert, d, len(iters), tuple(iters), ok[0], params=params)


def heat_kernel_apply(G: WeightedGraph, v, s: float, delta: float) -> ApplyReport:
    """``exp(-s L) v`` with ``L`` the normalized Laplacian, via the rational path."""
    s = float(s)
    if s < 0:
        raise ValueError("s must be non-negative")
    v = _as_vector(v, G.n)
    if s == 0.0:
        return ApplyReport(v.copy(), 0, "exp-rational", 0.0, 0, params={"s": s, "delta": float(delta)})
    rep = exp_apply_rational(normalized_laplacian(G).scaled(s), v, delta)
    return ApplyReport(rep.result, rep.matvec_count, rep.method, rep.certified_delta, rep.degree,
                       rep.inner_solves, rep.inner_iterations, rep.converged, rep.warnings,
                       dict(rep.params, s=s))


def inverse_apply_via_exp(A: SparseSymMatrix, v, eps: float, delta: float, check_bounds: bool = True,
                          seed: int = DEFAULT_SEED) -> ApplyReport:
    """``A^{-1} v ~ sum_j w_j exp(-t_j A) v`` for ``eps I <= A <= I``.

    Each exponential uses :func:`exp_apply_poly` on ``t_j A`` with
    ``b = t_j`` and ``delta_inner = delta / (2 sum_j w_j)``.  The relative
    2-norm error is certified at ``1.5 delta`` when the spectral bounds hold;
    a Lanczos check flags (but does not reject) violations.
    """
    v = _as_vector(v, A.n)
    approx = inverse_expsum(eps, delta)
    warns = []
    if check_bounds:
        lo, hi, _ = _spectral_bounds(A, seed)
        if hi > 1.0 + 1e-8:
            warns.append(f"lambda_max estimate {hi:.6g} exceeds 1")
        if lo < eps * (1.0 - 1e-8):
            warns.append(f"lambda_min estimate {lo:.6g} is below eps={eps:.6g}")
    wsum = math.fsum(approx.weights.tolist())
    inner = delta / (2.0 * wsum)
    acc = np.zeros(A.n)
    matvecs = 0
    for w_j, t_j in zip(approx.weights, approx.rates):
        rep = exp_apply_poly(A.scaled(t_j), v, inner, b=float(t_j))
        acc += w_j * rep.result
        matvecs += rep.matvec_count
    params = {"eps": float(eps), "delta": float(delta), "terms": len(approx), "inner_delta": inner}
    return ApplyReport(acc, matvecs, "inv-expsum", 1.5 * float(delta), len(approx),
                       warnings=tuple(warns), params=params)
