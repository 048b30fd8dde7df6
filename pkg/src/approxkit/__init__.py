"""Approximation-theoretic building blocks for fast matrix-function-vector products.

Scalar constructions (Chebyshev compression of monomials, polynomial and
rational approximations of ``exp(-x)``, sums of exponentials for ``1/x``)
and the matrix algorithms that use them: walk simulation, ``exp(-A) v``,
``A^{-1} v``, conjugate gradient, Lanczos and spectral sparse cuts.
"""

__version__ = "0.1.0"

from .chebyshev import (
    ChebSeries,
    cheb_derivative_at_one,
    cheb_eval,
    cheb_series_eval,
    exp_poly_coeffs,
    monomial_cheb_coeffs,
    monomial_tail,
)
from .cuts import CutResult, conductance, sparse_cut, sweep_cut
from .expsum import CertificateError, ExpSumApprox, inverse_expsum
from .krylov import (
    LanczosDecomp,
    SolveReport,
    cg_solve,
    gd_solve,
    lanczos_decomp,
    lanczos_fApply,
    lanczos_lambda_max,
    lanczos_top_r,
)
from .matfun import (
    ApplyReport,
    exp_apply_poly,
    exp_apply_rational,
    heat_kernel_apply,
    inverse_apply_via_exp,
    power_apply,
    walk_distribution,
)
from .rational import MonomialPoly, PrecisionError, exp_integral, ssv_coeffs, ssv_eval, taylor_recip_eval
from .sparse import (
    SparseSymMatrix,
    WeightedGraph,
    dense_eigs_ref,
    dense_expm_ref,
    dense_solve_ref,
    normalized_laplacian,
    walk_matrix_sym,
)

__all__ = [name for name in dir() if not name.startswith("_")]
