"""Acceptance suite: one PASS/FAIL line per criterion.

Run with ``pytest tests/test_acceptance.py -s`` to see the lines inline; they
are also repeated in the terminal summary of any pytest run.
"""

import math

import numpy as np
import pytest
import scipy.fft
import scipy.sparse as sp
from scipy.integrate import quad
from scipy.linalg import eigh_tridiagonal
from scipy.special import eval_legendre

from approxkit.chebyshev import exp_poly_coeffs, monomial_cheb_coeffs
from approxkit.cuts import conductance, sparse_cut, sweep_cut
from approxkit.expsum import certificate_grid, expsum_eval, inverse_expsum
from approxkit.krylov import cg_solve, gd_solve, lanczos_decomp, lanczos_lambda_max
from approxkit.matfun import exp_apply_rational, inverse_apply_via_exp, power_apply, power_degree
from approxkit.rational import ssv_coeffs, ssv_error_bound, ssv_eval, ssv_gammas, taylor_recip_eval
from approxkit.sparse import (
    SparseSymMatrix,
    dense_eigs_ref,
    dense_expm_ref,
    dense_solve_ref,
    normalized_laplacian,
    walk_matrix_sym,
)

from conftest import cycle, dirichlet_grid, dirichlet_grid_kappa, dumbbell, random_graph

GRID = 10_001


def rel_dev(ratio, target, tol):
    return abs(ratio / target - 1.0) <= tol


def test_ac01_chebyshev_extremal_error(verdict):
    x = np.linspace(-1.0, 1.0, GRID)
    worst = 0.0
    for d in range(1, 13):
        err = np.max(np.abs(monomial_cheb_coeffs(d, d - 1)(x) - x**d))
        worst = max(worst, abs(err - 2.0 ** (1 - d)))
    assert verdict("AC1", worst <= 1e-12, f"max |sup error - 2^(1-d)| over d=1..12 is {worst:.2e} (tol 1e-12)")


def test_ac02_monomial_compression(verdict):
    delta = 1e-4
    x = np.linspace(-1.0, 1.0, GRID)
    parts, ok = [], True
    for s in (50, 500, 5000):
        d = power_degree(s, delta)
        err = np.abs(monomial_cheb_coeffs(s, d)(x) - x**s)
        bound = 2.0 * math.exp(-d * d / (2.0 * s))
        ok &= bool(err.max() <= delta and np.all(err <= bound))
        parts.append(f"s={s} d={d} sup={err.max():.2e} bound={bound:.2e}")
    assert verdict("AC2", ok, "; ".join(parts))


def test_ac03_exp_polynomial(verdict):
    parts, ok = [], True
    for b in (10.0, 100.0):
        x = np.linspace(0.0, b, GRID)
        for delta in (1e-3, 1e-6):
            series = exp_poly_coeffs(b, delta)
            err = float(np.max(np.abs(series(x) - np.exp(-x))))
            ref = math.sqrt(max(b, math.log(1 / delta)) * math.log(1 / delta))
            ratio = series.degree() / ref
            ok &= err <= delta and 1 / 3 <= ratio <= 3
            parts.append(f"b={b:g} delta={delta:g} sup={err:.2e} degree={series.degree()} ratio={ratio:.2f}")
    assert verdict("AC3", ok, "; ".join(parts))


def test_ac04_reciprocal_taylor(verdict):
    worst = 0.0
    for d in range(5, 31):
        x = np.linspace(0.0, 10.0 * d, GRID)
        err = float(np.max(np.abs(np.exp(-x) - taylor_recip_eval(d, x))))
        worst = max(worst, err / (4.0 * 2.0 ** (-d)))
    assert verdict("AC4", worst <= 1.0, f"max over d=5..30 of sup error / (4*2^-d) is {worst:.3f}")


def _f_prime(d, t):
    if t >= 1:
        return 0.0
    return -2 * d / (1 - t) ** 2 * math.exp(-d * (1 + t) / (1 - t))


def test_ac05_ssv_rational(verdict):
    parts, ok = [], True
    for d in (5, 10, 15, 20):
        top = 40.0 * d
        x = np.unique(np.concatenate((np.linspace(0.0, top, GRID), np.logspace(-8, math.log10(top), GRID))))
        err = float(np.max(np.abs(ssv_eval(d, x) - np.exp(-x))))
        ok &= err <= ssv_error_bound(d) and ssv_coeffs(d).degree() == d
        parts.append(f"d={d} sup={err:.2e} bound={ssv_error_bound(d):.2e}")
    g = ssv_gammas(4)
    gamma_err = max(
        abs(g[k] - quad(lambda t: _f_prime(4, t) * eval_legendre(k, t), -1, 1, epsabs=1e-14, epsrel=1e-12, limit=200)[0])
        for k in range(4)
    )
    ok &= gamma_err <= 1e-10
    parts.append(f"gamma(d=4) vs quadrature {gamma_err:.1e}")
    assert verdict("AC5", ok, "; ".join(parts))


def test_ac06_sum_of_exponentials(verdict):
    parts, ok, counts, logs = [], True, [], []
    for eps, delta in ((1e-2, 1e-2), (1e-3, 1e-3)):
        approx = inverse_expsum(eps, delta)
        x = certificate_grid(eps, 10_000)
        rel = float(np.max(np.abs(x * expsum_eval(approx, x) - 1.0)))
        ok &= rel <= delta
        counts.append(len(approx))
        logs.append(math.log(1 / (eps * delta)))
        parts.append(f"(eps,delta)=({eps:g},{delta:g}) terms={len(approx)} rel={rel:.2e}")
    growth, cubic = counts[1] / counts[0], (logs[1] / logs[0]) ** 3
    ok &= growth <= cubic
    parts.append(f"term growth {growth:.2f} <= cubic {cubic:.2f}")
    assert verdict("AC6", ok, "; ".join(parts))


def test_ac07_walk_simulation(verdict):
    delta = 1e-5
    parts, ok = [], True
    for n, seed in ((150, 1), (300, 2)):
        g = random_graph(n, 8.0 / n, seed, weighted=True)
        W = walk_matrix_sym(g)
        v = np.random.default_rng(seed).standard_normal(n)
        v /= np.linalg.norm(v)
        for s in (100, 1000):
            rep = power_apply(W, v, s, delta)
            direct = v
            for _ in range(s):
                direct = W.matvec(direct)
            err = float(np.linalg.norm(rep.result - direct))
            want = math.ceil(math.sqrt(2 * s * math.log(2 / delta)))
            ok &= err <= delta and rep.matvec_count == want
            parts.append(f"n={n} s={s} err={err:.1e} matvecs={rep.matvec_count}/{want}")
    assert verdict("AC7", ok, "; ".join(parts))


def _a_err(A, x, xs):
    e = x - xs
    return math.sqrt(max(e @ A.matvec(e), 0.0) / (xs @ A.matvec(xs)))


def _diag_family(kappa, n=2000):
    lam = (1 + kappa) / 2 + (kappa - 1) / 2 * np.cos(np.pi * (np.arange(n) + 0.5) / n)
    return SparseSymMatrix(sp.diags(lam).tocsr()), lam


def _grid_solve(m, v):
    l1 = 2.0 - 2.0 * np.cos(np.pi * np.arange(1, m + 1) / (m + 1))
    lam = l1[:, None] + l1[None, :]
    hat = scipy.fft.dstn(v.reshape(m, m), type=1, norm="ortho")
    return scipy.fft.dstn(hat / lam, type=1, norm="ortho").ravel()


@pytest.mark.slow
def test_ac08_cg_sqrt_kappa(verdict):
    # both solvers get the exact smallest eigenvalue, as the iteration bounds assume
    delta = 1e-6
    parts, ok = [], True
    rng = np.random.default_rng(8)
    v = rng.standard_normal(2000)
    its = {}
    for kappa in (1e2, 1e4):
        A, lam = _diag_family(kappa)
        rep = cg_solve(A, v, delta, lambda_min=lam.min())
        err = _a_err(A, rep.solution, v / lam)
        ok &= err <= delta
        its[("diag", kappa)] = rep.iterations
        parts.append(f"diag kappa={kappa:g} cg={rep.iterations} err={err:.1e}")
    A, lam = _diag_family(1e4)
    gd = gd_solve(A, v, delta, lambda_min=lam.min(), kappa=lam.max() / lam.min())
    gd_err = _a_err(A, gd.solution, v / lam)
    ok &= gd_err <= delta
    gd_diag = gd.iterations
    for m in (15, 156):
        A = dirichlet_grid(m)
        lmin = 4.0 - 4.0 * math.cos(math.pi / (m + 1))
        w = rng.standard_normal(m * m)
        rep = cg_solve(A, w, delta, lambda_min=lmin)
        err = _a_err(A, rep.solution, _grid_solve(m, w))
        ok &= err <= delta
        its[("grid", m)] = rep.iterations
        parts.append(f"grid kappa={dirichlet_grid_kappa(m):.0f} cg={rep.iterations} err={err:.1e}")
        if m == 156:
            gd = gd_solve(A, w, delta, lambda_min=lmin, kappa=dirichlet_grid_kappa(m))
            gd_err = max(gd_err, _a_err(A, gd.solution, _grid_solve(m, w)))
            ok &= gd_err <= delta
            gd_grid = gd.iterations
    r_diag = its[("diag", 1e4)] / its[("diag", 1e2)]
    r_grid = its[("grid", 156)] / its[("grid", 15)]
    ok &= rel_dev(r_diag, 10, 0.4) and rel_dev(r_grid, 10, 0.4)
    ok &= gd_diag >= 3 * its[("diag", 1e4)] and gd_grid >= 3 * its[("grid", 156)]
    parts.append(f"ratios diag={r_diag:.2f} grid={r_grid:.2f}; gd at 1e4: diag={gd_diag} grid={gd_grid} err<={gd_err:.1e}")
    assert verdict("AC8", ok, "; ".join(parts))


def _required_k(A, lam1, delta, seed, kmax=200):
    dec = lanczos_decomp(A, kmax, seed)
    for k in range(1, dec.k + 1):
        top = eigh_tridiagonal(dec.alpha[: k + 1], dec.beta[:k], eigvals_only=True)[-1]
        if top >= (1 - delta) * lam1:
            return k
    return kmax


@pytest.mark.slow
def test_ac09_lanczos(verdict):
    n, seeds = 300, range(40)
    parts, ok, medians = [], True, []
    mats = []
    for seed in seeds:
        rng = np.random.default_rng(1000 + seed)
        q = np.linalg.qr(rng.standard_normal((n, n)))[0]
        lam = rng.uniform(0.0, 1.0, n)
        a = (q * lam) @ q.T
        mats.append((SparseSymMatrix.from_dense((a + a.T) / 2), float(lam.max())))
    for delta in (0.04, 0.01):
        above, hits, ks = 0, 0, []
        for seed, (A, lam1) in zip(seeds, mats):
            mu, _ = lanczos_lambda_max(A, delta, seed=seed)
            above += mu > lam1 + 1e-10
            hits += mu >= (1 - delta) * lam1
            ks.append(_required_k(A, lam1, delta, seed))
        medians.append(float(np.median(ks)))
        ok &= above == 0 and hits >= len(seeds) / 2
        parts.append(f"delta={delta:g} above={above} success={hits}/{len(seeds)} median_k={medians[-1]:g}")
    ratio = medians[1] / medians[0]
    ok &= rel_dev(ratio, 2.0, 0.4)
    parts.append(f"k ratio={ratio:.2f}")
    assert verdict("AC9", ok, "; ".join(parts))


def _laplacian_plus_identity(g):
    L = g.laplacian()
    r, c, v = L.triplets()
    idx = np.arange(g.n)
    return SparseSymMatrix.from_coo(g.n, np.concatenate((r, idx)), np.concatenate((c, idx)),
                                    np.concatenate((v, np.ones(g.n))))


@pytest.mark.slow
def test_ac10_exp_rational(verdict):
    parts, ok, solves = [], True, {}
    for n, seed in ((120, 3), (200, 4)):
        A = _laplacian_plus_identity(random_graph(n, 6.0 / n, seed, weighted=True))
        v = np.random.default_rng(seed).standard_normal(n)
        ref = dense_expm_ref(A) @ v
        for delta in (1e-4, 1e-6):
            rep = exp_apply_rational(A, v, delta)
            err = float(np.linalg.norm(rep.result - ref) / np.linalg.norm(v))
            ok &= err <= delta and rep.converged
            solves[(n, delta)] = rep.inner_solves
            parts.append(f"n={n} delta={delta:g} err={err:.1e} solves={rep.inner_solves}")
    target = math.log(1e6) / math.log(1e4)
    for n in (120, 200):
        ok &= rel_dev(solves[(n, 1e-6)] / solves[(n, 1e-4)], target, 0.4)
    parts.append(f"solve ratio {solves[(200, 1e-6)] / solves[(200, 1e-4)]:.2f} vs log ratio {target:.2f}")
    assert verdict("AC10", ok, "; ".join(parts))


@pytest.mark.slow
def test_ac11_inverse_via_exponentials(verdict):
    eps, delta, n = 1e-2, 1e-2, 150
    rng = np.random.default_rng(11)
    q = np.linalg.qr(rng.standard_normal((n, n)))[0]
    lam = np.concatenate(([eps, 1.0], rng.uniform(eps, 1.0, n - 2)))
    a = (q * lam) @ q.T
    A = SparseSymMatrix.from_dense((a + a.T) / 2)
    v = rng.standard_normal(n)
    rep = inverse_apply_via_exp(A, v, eps, delta)
    ref = dense_solve_ref(A, v)
    rel = float(np.linalg.norm(rep.result - ref) / np.linalg.norm(ref))
    ok = rel <= 3 * delta
    assert verdict("AC11", ok, f"n={n} rel={rel:.2e} (tol {3 * delta:g}) terms={rep.degree} matvecs={rep.matvec_count}")


def _brute_prefix(G, x):
    order = np.lexsort((np.arange(G.n), x / np.sqrt(G.degrees)))
    return min(conductance(G, order[:k]) for k in range(1, G.n))


@pytest.mark.slow
def test_ac12_sparse_cut(verdict):
    parts, ok = [], True
    graphs = {"dumbbell20": dumbbell(10), "dumbbell40": dumbbell(20), "C32": cycle(32), "C64": cycle(64)}
    for name, g in graphs.items():
        lam = float(dense_eigs_ref(normalized_laplacian(g))[1])
        bound = 4 * math.sqrt(lam)
        phis = [sparse_cut(g, seed=seed).conductance for seed in range(60)]
        wins = sum(p <= bound for p in phis)
        ok &= wins >= 20
        parts.append(f"{name} success={wins}/60 best={min(phis):.4f} bound={bound:.4f}")
    rng = np.random.default_rng(12)
    mismatches = 0
    for trial in range(100):
        g = list(graphs.values())[trial % 3] if trial % 2 else random_graph(int(rng.integers(5, 51)), 0.15, trial)
        x = rng.standard_normal(g.n)
        mismatches += abs(sweep_cut(g, x).conductance - _brute_prefix(g, x)) > 1e-12
    ok &= mismatches == 0
    parts.append(f"sweep vs brute force mismatches={mismatches}/100")
    assert verdict("AC12", ok, "; ".join(parts))
