"""Command-line interface.

Every subcommand prints a line-oriented report whose header lists all
parameters, defaults included.  Exit status: 0 when the certificate or
convergence test passed, 1 when it failed, 2 on usage, parse or
dimension errors.
"""

from __future__ import annotations

import argparse
import math
import sys

import numpy as np

from . import __version__
from .chebyshev import monomial_cheb_coeffs, monomial_tail, exp_poly_coeffs, exp_poly_plan
from .cuts import sparse_cut
from .expsum import CertificateError, certificate_grid, expsum_eval, inverse_expsum
from .io import (
    ParseError,
    fmt_float,
    read_edge_list,
    read_matrix_market,
    read_vector,
    write_coefficients,
    write_expsum,
    write_vector,
)
from .krylov import DEFAULT_SEED, cg_solve, gd_solve, lanczos_lambda_max, lanczos_top_r
from .matfun import exp_apply_poly, exp_apply_rational, heat_kernel_apply, inverse_apply_via_exp, power_degree, walk_distribution
from .rational import MonomialPoly, ssv_coeffs, ssv_error_bound, ssv_eval, taylor_recip_eval
from .sparse import dense_eigs_ref, normalized_laplacian

DEFAULT_DELTA = 1e-6
GRID_POINTS = 10_000


class CliError(Exception):
    """Usage or input problem; exit status 2."""


class Report:
    def __init__(self, command: str, params: dict, fmt: str = "text"):
        self.fmt = fmt
        self.lines = [f"# approxkit {__version__} {command}"]
        self.lines += [f"# {k}={_show(v)}" for k, v in sorted(params.items())]

    def add(self, key: str, value) -> None:
        sep = "," if self.fmt == "csv" else "="
        self.lines.append(f"{key}{sep}{_show(value)}")

    def raw(self, text: str) -> None:
        self.lines.extend(text.rstrip("\n").split("\n"))

    def emit(self, path=None) -> None:
        text = "\n".join(self.lines) + "\n"
        if path:
            with open(path, "w", encoding="utf-8") as fh:
                fh.write(text)
        else:
            sys.stdout.write(text)


def _show(v) -> str:
    if isinstance(v, bool):
        return str(v).lower()
    if isinstance(v, float):
        return fmt_float(v)
    if v is None:
        return "none"
    return str(v)


def _params(args) -> dict:
    skip = {"func", "command", "kind"}
    return {k: v for k, v in vars(args).items() if k not in skip}


def _check_dims(n: int, what: str, vec: np.ndarray, vec_name: str) -> None:
    if vec.shape[0] != n:
        raise CliError(f"dimension mismatch: {what} has n={n} but {vec_name} has length {vec.shape[0]}")


def _write_curve(path, x, f, approx) -> float:
    err = np.abs(f - approx)
    with open(path, "w", encoding="utf-8") as fh:
        fh.write("x,f(x),approx(x),abs_err\n")
        for row in zip(x, f, approx, err):
            fh.write(",".join(fmt_float(c) for c in row) + "\n")
    return float(np.max(err))


def cmd_approx(args) -> int:
    kind = args.kind
    rep = Report(f"approx {kind}", _params(args), args.format)
    if args.delta > 1.0:
        rep.add("warning", f"delta={_show(args.delta)} clamped to 1")
        args.delta = 1.0
    prefix = args.out or f"approx-{kind}"
    curve_path = prefix + ".curve.csv"
    g = args.grid
    if kind == "power":
        if args.s is None:
            raise CliError("approx power needs --s")
        d = args.d if args.d is not None else power_degree(args.s, args.delta)
        series = monomial_cheb_coeffs(args.s, d)
        write_coefficients(prefix + ".coef", series)
        x = np.linspace(-1.0, 1.0, g)
        err = _write_curve(curve_path, x, x**args.s, series(x))
        bound = args.delta
        rep.add("degree", d)
        rep.add("exact_tail", monomial_tail(args.s, d))
    elif kind == "exp-poly":
        if args.b is None:
            raise CliError("approx exp-poly needs --b")
        series = exp_poly_coeffs(args.b, args.delta)
        write_coefficients(prefix + ".coef", series)
        x = np.linspace(0.0, args.b, g)
        err = _write_curve(curve_path, x, np.exp(-x), series(x))
        bound = args.delta
        plan = exp_poly_plan(args.b, args.delta)
        rep.add("degree", series.degree())
        rep.add("taylor_terms", plan.t)
        rep.add("chernoff_degree", plan.d_chernoff)
    elif kind == "exp-recip":
        if args.d is None:
            raise CliError("approx exp-recip needs --d")
        write_coefficients(prefix + ".coef", MonomialPoly([1.0 / math.factorial(k) for k in range(args.d + 1)]))
        x = np.linspace(0.0, 10.0 * max(args.d, 1), g)
        err = _write_curve(curve_path, x, np.exp(-x), taylor_recip_eval(args.d, x))
        bound = 4.0 * 2.0 ** (-args.d)
        rep.add("degree", args.d)
        rep.add("coefficients_of", "S_d (approximant is 1/S_d)")
    elif kind == "exp-ssv":
        if args.d is None:
            raise CliError("approx exp-ssv needs --d")
        write_coefficients(prefix + ".coef", ssv_coeffs(args.d))
        top = 40.0 * args.d
        x = np.unique(np.concatenate((np.linspace(0.0, top, g // 2), np.logspace(-6.0, math.log10(top), g - g // 2))))
        err = _write_curve(curve_path, x, np.exp(-x), ssv_eval(args.d, x))
        bound = ssv_error_bound(args.d)
        rep.add("degree", args.d)
        rep.add("coefficients_of", "numerator p_d (approximant is p_d(x)/(1+x/d)^d)")
    else:
        if args.eps is None:
            raise CliError("approx inv-expsum needs --eps")
        try:
            approx = inverse_expsum(args.eps, args.delta)
        except CertificateError as exc:
            print(f"certificate failed: {exc}", file=sys.stderr)
            return 1
        write_expsum(prefix + ".expsum.csv", approx)
        x = certificate_grid(args.eps, g)
        err = _write_curve(curve_path, x, 1.0 / x, expsum_eval(approx, x))
        rel = float(np.max(np.abs(x * expsum_eval(approx, x) - 1.0)))
        rep.add("terms", len(approx))
        rep.add("h", approx.h)
        rep.add("relative_error", rel)
        err, bound = rel, args.delta
    ok = err <= bound
    rep.add("max_error", err)
    rep.add("certificate_bound", bound)
    rep.add("certified", ok)
    rep.emit(args.report)
    if not ok:
        print(f"certificate failed: grid error {err:.6e} exceeds {bound:.6e}", file=sys.stderr)
    return 0 if ok else 1


def _graph(args):
    return read_edge_list(args.graph, one_based=args.one_based)


def cmd_walk(args) -> int:
    G = _graph(args)
    v0 = read_vector(args.v0)
    _check_dims(G.n, f"graph {args.graph}", v0, f"vector {args.v0}")
    res = walk_distribution(G, v0, args.s, args.delta)
    rep = Report("walk", _params(args), args.format)
    rep.raw(res.to_text())
    _finish(args, rep, res.result)
    return 0


def cmd_heat(args) -> int:
    G = _graph(args)
    v0 = read_vector(args.v0)
    _check_dims(G.n, f"graph {args.graph}", v0, f"vector {args.v0}")
    res = heat_kernel_apply(G, v0, args.s, args.delta)
    rep = Report("heat", _params(args), args.format)
    rep.raw(res.to_text())
    _finish(args, rep, res.result)
    return 0 if res.converged else 1


def cmd_solve(args) -> int:
    A = read_matrix_market(args.matrix)
    b = read_vector(args.rhs)
    _check_dims(A.n, f"matrix {args.matrix}", b, f"vector {args.rhs}")
    solver = cg_solve if args.method == "cg" else gd_solve
    res = solver(A, b, args.delta)
    rep = Report("solve", _params(args), args.format)
    rep.raw(res.to_text())
    _finish(args, rep, res.solution)
    return 0 if res.converged else 1


def cmd_eig(args) -> int:
    if (args.matrix is None) == (args.graph is None):
        raise CliError("eig needs exactly one of --matrix or --graph")
    A = read_matrix_market(args.matrix) if args.matrix else normalized_laplacian(_graph(args))
    rep = Report("eig", _params(args), args.format)
    if args.dense:
        vals = dense_eigs_ref(A)
        rep.add("count", vals.size)
        for i, val in enumerate(vals):
            rep.add(f"lambda_{i}", float(val))
    elif args.r == 1:
        mu, _ = lanczos_lambda_max(A, args.delta, args.seed)
        rep.add("mu_1", mu)
    else:
        for i, (mu, _) in enumerate(lanczos_top_r(A, args.r, args.delta, args.seed), start=1):
            rep.add(f"mu_{i}", mu)
    rep.emit(args.report)
    return 0


def cmd_expv(args) -> int:
    A = read_matrix_market(args.matrix)
    v = read_vector(args.v)
    _check_dims(A.n, f"matrix {args.matrix}", v, f"vector {args.v}")
    if args.method == "poly":
        res = exp_apply_poly(A, v, args.delta, seed=args.seed)
    else:
        res = exp_apply_rational(A, v, args.delta)
    rep = Report("expv", _params(args), args.format)
    rep.raw(res.to_text())
    _finish(args, rep, res.result)
    return 0 if res.converged else 1


def cmd_inv(args) -> int:
    A = read_matrix_market(args.matrix)
    v = read_vector(args.v)
    _check_dims(A.n, f"matrix {args.matrix}", v, f"vector {args.v}")
    try:
        res = inverse_apply_via_exp(A, v, args.eps, args.delta, seed=args.seed)
    except CertificateError as exc:
        print(f"certificate failed: {exc}", file=sys.stderr)
        return 1
    rep = Report("inv", _params(args), args.format)
    rep.raw(res.to_text())
    _finish(args, rep, res.result)
    return 0 if res.converged else 1


def cmd_cut(args) -> int:
    G = _graph(args)
    res = sparse_cut(G, args.lambda_hint, args.seed)
    rep = Report("cut", _params(args), args.format)
    rep.add("lambda_guess", res.lambda_guess)
    rep.add("rayleigh_quotient", res.rayleigh_quotient)
    rep.add("sweep_index", res.sweep_index)
    rep.raw(res.to_text())
    rep.emit(args.report)
    if args.out:
        with open(args.out, "w", encoding="utf-8") as fh:
            fh.write(res.to_text())
    return 0


def _finish(args, rep: Report, vec) -> None:
    if args.out:
        write_vector(args.out, vec)
    rep.emit(args.report)


def build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(prog="approxkit", description=__doc__.split("\n")[0])
    p.add_argument("--version", action="version", version=f"approxkit {__version__}")
    sub = p.add_subparsers(dest="command", required=True)

    def common(sp, out_help="output vector file"):
        sp.add_argument("--delta", type=float, default=DEFAULT_DELTA, help="target accuracy (default 1e-6)")
        sp.add_argument("--seed", type=int, default=DEFAULT_SEED, help=f"random seed (default {DEFAULT_SEED})")
        sp.add_argument("--out", default=None, help=out_help)
        sp.add_argument("--report", default=None, help="report file (default stdout)")
        sp.add_argument("--format", choices=("text", "csv"), default="text")

    def graph_args(sp):
        sp.add_argument("--graph", required=True, help="edge list 'u v [weight]'")
        sp.add_argument("--one-based", action="store_true", help="vertex ids in the edge list start at 1")

    ap = sub.add_parser("approx", help="build a scalar approximation, write coefficients and an error curve")
    ap.add_argument("kind", choices=("power", "exp-poly", "exp-recip", "exp-ssv", "inv-expsum"))
    ap.add_argument("--s", type=int)
    ap.add_argument("--d", type=int)
    ap.add_argument("--b", type=float)
    ap.add_argument("--eps", type=float)
    ap.add_argument("--grid", type=int, default=GRID_POINTS, help="error-curve points")
    common(ap, "output prefix for <prefix>.coef / <prefix>.curve.csv")
    ap.set_defaults(func=cmd_approx)

    sp = sub.add_parser("walk", help="s-step random walk distribution")
    graph_args(sp)
    sp.add_argument("--v0", required=True)
    sp.add_argument("--s", type=int, required=True)
    common(sp)
    sp.set_defaults(func=cmd_walk)

    sp = sub.add_parser("heat", help="heat-kernel walk exp(-s L) v0")
    graph_args(sp)
    sp.add_argument("--v0", required=True)
    sp.add_argument("--s", type=float, required=True)
    common(sp)
    sp.set_defaults(func=cmd_heat)

    sp = sub.add_parser("solve", help="solve A x = b by CG or gradient descent")
    sp.add_argument("--matrix", required=True)
    sp.add_argument("--rhs", required=True)
    sp.add_argument("--method", choices=("cg", "gd"), default="cg")
    common(sp)
    sp.set_defaults(func=cmd_solve)

    sp = sub.add_parser("eig", help="top eigenvalues by Lanczos, or all of them with --dense")
    sp.add_argument("--matrix")
    sp.add_argument("--graph", help="use the normalized Laplacian of this graph")
    sp.add_argument("--one-based", action="store_true")
    sp.add_argument("--r", type=int, default=1)
    sp.add_argument("--dense", action="store_true")
    common(sp)
    sp.set_defaults(func=cmd_eig)

    sp = sub.add_parser("expv", help="exp(-A) v")
    sp.add_argument("--matrix", required=True)
    sp.add_argument("--v", required=True)
    sp.add_argument("--method", choices=("poly", "rational"), default="rational")
    common(sp)
    sp.set_defaults(func=cmd_expv)

    sp = sub.add_parser("inv", help="A^{-1} v through a sum of exponentials")
    sp.add_argument("--matrix", required=True)
    sp.add_argument("--v", required=True)
    sp.add_argument("--eps", type=float, required=True)
    common(sp)
    sp.set_defaults(func=cmd_inv)

    sp = sub.add_parser("cut", help="sparse cut by accelerated power iteration and sweep")
    graph_args(sp)
    sp.add_argument("--lambda-hint", type=float, default=None)
    common(sp, "cut file (conductance line and smaller side)")
    sp.set_defaults(func=cmd_cut)
    return p


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return args.func(args)
    except (ParseError, CliError, OSError, ValueError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2


if __name__ == "__main__":
    sys.exit(main())
