import math

import numpy as np
import pytest
import scipy.sparse as sp

from approxkit.krylov import (
    NotPositiveDefiniteError,
    cg_solve,
    gd_solve,
    lanczos_decomp,
    lanczos_fApply,
    lanczos_k,
    lanczos_lambda_max,
    lanczos_top_r,
    random_unit_vector,
)
from approxkit.sparse import SparseSymMatrix, dense_solve_ref

from conftest import dirichlet_grid, random_spd


def diag(vals):
    return SparseSymMatrix(sp.diags(np.asarray(vals, dtype=float)).tocsr())


def a_norm_rel(A, x, xs):
    e = x - xs
    return math.sqrt(e @ A.matvec(e) / (xs @ A.matvec(xs)))


def test_identity_one_iteration():
    v = np.array([1.0, -2.0, 3.0])
    for solver in (cg_solve, gd_solve):
        rep = solver(SparseSymMatrix.identity(3), v, 1e-8)
        assert rep.iterations == 1 and rep.converged
        np.testing.assert_allclose(rep.solution, v)


def test_gd_two_by_two():
    rep = gd_solve(diag([1.0, 10.0]), [1.0, 1.0], 1e-8)
    assert rep.converged and rep.iterations <= 200
    assert a_norm_rel(diag([1.0, 10.0]), rep.solution, np.array([1.0, 0.1])) <= 1e-8


def test_cg_distinct_eigenvalues():
    rep = cg_solve(diag([1, 1, 2, 2, 3]), np.ones(5), 1e-10)
    assert rep.iterations <= 3
    np.testing.assert_allclose(rep.solution, [1, 1, 0.5, 0.5, 1 / 3], atol=1e-10)


def test_zero_rhs():
    rep = cg_solve(diag([1.0, 2.0]), np.zeros(2), 1e-6)
    assert rep.iterations == 0 and rep.converged and not rep.solution.any()


def test_reports_history_length_and_monotone():
    A = random_spd(80, 5, 0.01, 1.0)
    rep = cg_solve(A, np.ones(80), 1e-8)
    assert len(rep.residual_history) == rep.iterations
    h = np.array(rep.residual_history)
    assert np.all(np.diff(h) <= 1e-12)
    assert "iterations=" in rep.to_text() and "target_delta=" in rep.to_text()


def test_not_positive_definite():
    with pytest.raises(NotPositiveDefiniteError):
        cg_solve(diag([1.0, -1.0]), [0.0, 1.0], 1e-6, lambda_min=1.0)
    with pytest.raises(NotPositiveDefiniteError):
        gd_solve(diag([1.0, -1.0]), [0.0, 1.0], 1e-6, lambda_min=1.0, kappa=1.0)


def test_cap_gives_nonconverged_report():
    rep = cg_solve(diag(np.linspace(1, 100, 50)), np.ones(50), 1e-10, max_iter=3)
    assert not rep.converged and rep.iterations == 3


def test_gd_iterations_grow_linearly_in_kappa():
    counts = []
    for kappa in (10, 100, 1000):
        A = diag(np.linspace(1, kappa, 40))
        rep = gd_solve(A, np.ones(40), 1e-6)
        assert a_norm_rel(A, rep.solution, 1 / np.linspace(1, kappa, 40)) <= 1e-6
        counts.append(rep.iterations)
    r1, r2 = counts[1] / counts[0], counts[2] / counts[1]
    assert 5 <= r1 <= 20 and 5 <= r2 <= 20


def test_cg_grid_sqrt_kappa_scaling():
    # Dirichlet grids with m=15 and m=31 have condition numbers roughly 4x apart
    its = []
    for m in (15, 31):
        A = dirichlet_grid(m)
        v = np.random.default_rng(0).standard_normal(m * m)
        rep = cg_solve(A, v, 1e-8)
        assert a_norm_rel(A, rep.solution, dense_solve_ref(A, v, cap=1000)) <= 1e-8
        its.append(rep.iterations)
    assert 1.4 <= its[1] / its[0] <= 2.6


def test_cg_optimal_over_krylov_space(rng):
    A = random_spd(40, 9, 0.05, 1.0)
    ad = A.to_dense()
    v = rng.standard_normal(40)
    xs = np.linalg.solve(ad, v)
    for k in (1, 3, 6, 10):
        rep = cg_solve(A, v, 1e-14, max_iter=k)
        basis = np.empty((40, k))
        b = v.copy()
        for i in range(k):
            basis[:, i] = b / np.linalg.norm(b)
            b = ad @ basis[:, i]
        q = np.linalg.qr(basis)[0]
        y = np.linalg.solve(q.T @ ad @ q, q.T @ v)
        best = q @ y
        e_cg = rep.solution - xs
        e_best = best - xs
        assert math.sqrt(e_cg @ ad @ e_cg) <= math.sqrt(e_best @ ad @ e_best) + 1e-8


def test_cg_error_monotone(rng):
    A = random_spd(50, 3, 0.02, 1.0)
    v = rng.standard_normal(50)
    xs = dense_solve_ref(A, v)
    errs = []
    for k in range(1, 30):
        x = cg_solve(A, v, 1e-14, max_iter=k).solution
        errs.append(math.sqrt((x - xs) @ A.matvec(x - xs)))
    assert np.all(np.diff(errs) <= 1e-10)


def test_lanczos_identity_breaks_down_immediately():
    dec = lanczos_decomp(SparseSymMatrix.identity(6), 4)
    assert dec.k == 0 and dec.breakdown
    np.testing.assert_allclose(dec.T, [[1.0]])


def test_lanczos_full_order_recovers_spectrum():
    dec = lanczos_decomp(diag(np.arange(1.0, 11.0)), 9)
    np.testing.assert_allclose(np.sort(dec.eigenvalues()), np.arange(1.0, 11.0), atol=1e-8)


def test_lanczos_invariants():
    A = random_spd(200, 1, 0.0, 2.0)
    dec = lanczos_decomp(A, 30, seed=11)
    V = dec.V
    assert V.shape == (200, 31)
    assert np.max(np.abs(V.T @ V - np.eye(31))) <= 1e-8
    T = V.T @ A.to_dense() @ V
    assert np.linalg.norm(T - dec.T) <= 1e-8 * np.linalg.norm(dec.T)
    off = np.abs(np.triu(dec.T, 2))
    assert off.max() <= 1e-10 * np.linalg.norm(dec.T)


def test_lanczos_seeded_determinism():
    A = random_spd(60, 2)
    a = lanczos_decomp(A, 10, seed=3)
    b = lanczos_decomp(A, 10, seed=3)
    assert a.V.tobytes() == b.V.tobytes() and a.alpha.tobytes() == b.alpha.tobytes()
    rep1 = cg_solve(A, np.ones(60), 1e-8)
    rep2 = cg_solve(A, np.ones(60), 1e-8)
    assert rep1.to_text() == rep2.to_text()


def test_lanczos_rejects_bad_order():
    with pytest.raises(ValueError):
        lanczos_decomp(SparseSymMatrix.identity(4), 4)


def test_lambda_max_examples():
    mu, w = lanczos_lambda_max(diag([5.0, 1.0, 1.0]), 0.1)
    assert 4.5 <= mu <= 5.0 + 1e-10
    assert abs(abs(w[0]) - 1.0) <= 1e-8
    mu0, _ = lanczos_lambda_max(SparseSymMatrix.from_dense(np.zeros((4, 4))), 0.1)
    assert mu0 == 0.0


def test_lanczos_k_formula():
    assert lanczos_k(300, 0.04) == math.ceil(5 * math.log(300 / 0.04))
    assert lanczos_k(10, 0.01) == 9


def test_top_r():
    pairs = lanczos_top_r(diag([10.0, 5.0, 1.0]), 2, 0.1)
    assert abs(pairs[0][0] - 10) <= 0.33 and abs(pairs[1][0] - 5) <= 0.165
    one = lanczos_top_r(diag([10.0, 5.0, 1.0, 0.5]), 1, 0.1, seed=4)
    assert one[0][0] == lanczos_lambda_max(diag([10.0, 5.0, 1.0, 0.5]), 0.1, seed=4)[0]


def test_top_r_planted_gaps():
    n, delta = 300, 0.1
    rng = np.random.default_rng(8)
    lam = np.concatenate(([1.0, 0.9, 0.8], rng.uniform(0, 0.7, n - 3)))
    q = np.linalg.qr(rng.standard_normal((n, n)))[0]
    A = SparseSymMatrix.from_dense(((q * lam) @ q.T + ((q * lam) @ q.T).T) / 2)
    got = [mu for mu, _ in lanczos_top_r(A, 3, delta)]
    for mu, true in zip(got, lam[:3]):
        assert (1 - delta / 3) * true <= mu <= true + 1e-10


def test_fapply_examples(rng):
    A = diag([0.0, 1.0, 2.0])
    v = np.ones(3) / math.sqrt(3)
    got = lanczos_fApply(A, v, lambda x: np.exp(-x), 2)
    np.testing.assert_allclose(got, np.exp(-np.arange(3.0)) / math.sqrt(3), atol=1e-8)
    B = random_spd(30, 4)
    w = rng.standard_normal(30)
    np.testing.assert_allclose(lanczos_fApply(B, w, lambda x: x, 29), B.matvec(w), atol=1e-8)
    C = random_spd(100, 6, 0.2, 1.0)
    np.testing.assert_allclose(lanczos_fApply(C, w.repeat(4)[:100], lambda x: 1 / x, 40),
                               dense_solve_ref(C, w.repeat(4)[:100]), rtol=1e-6, atol=1e-6)
    with pytest.warns(RuntimeWarning):
        out = lanczos_fApply(A, v, lambda x: np.exp(-x), 3)
    np.testing.assert_allclose(out, np.exp(-np.arange(3.0)) / math.sqrt(3), atol=1e-12)


def test_random_unit_vector_projection():
    k = np.arange(1.0, 11.0)
    g = random_unit_vector(10, 5, orthogonal_to=k)
    assert abs(np.linalg.norm(g) - 1) <= 1e-15 and abs(g @ k) <= 1e-12
