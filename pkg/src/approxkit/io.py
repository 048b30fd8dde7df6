"""Plain-text readers and writers.

Formats
-------
* Matrix Market ``coordinate real symmetric`` (``general`` is accepted when
  the entries are symmetric).
* Edge lists ``u v [weight]``, 0- or 1-based, ``#`` / ``%`` comments.
* Vectors: one decimal per line.
* Coefficients: ``# basis=chebyshev|monomial interval=a,b degree=d`` then one
  coefficient per line.
* Sums of exponentials: ``# eps=..,delta=..,h=..`` then ``j,w_j,t_j`` lines.

Floats are written in shortest round-trip form so every file re-reads to the
identical object.  Parse errors name the file and line.
"""

from __future__ import annotations

import math

import numpy as np

from .chebyshev import ChebSeries
from .expsum import C_H, ExpSumApprox
from .rational import MonomialPoly
from .sparse import SparseSymMatrix, WeightedGraph

__all__ = [
    "ParseError",
    "read_matrix_market",
    "write_matrix_market",
    "read_edge_list",
    "write_edge_list",
    "read_vector",
    "write_vector",
    "read_coefficients",
    "write_coefficients",
    "read_expsum",
    "write_expsum",
    "fmt_float",
]


class ParseError(ValueError):
    def __init__(self, path, line: int, msg: str):
        super().__init__(f"{path}:{line}: {msg}")
        self.path, self.line = str(path), line


def fmt_float(x: float) -> str:
    return repr(float(x))


def _lines(path):
    with open(path, "r", encoding="utf-8") as fh:
        for no, raw in enumerate(fh, start=1):
            yield no, raw.strip()


def _float(tok: str, path, no: int) -> float:
    try:
        val = float(tok)
    except ValueError:
        raise ParseError(path, no, f"not a number: {tok!r}") from None
    if not math.isfinite(val):
        raise ParseError(path, no, f"non-finite value {tok!r}")
    return val


def _int(tok: str, path, no: int) -> int:
    try:
        return int(tok)
    except ValueError:
        raise ParseError(path, no, f"not an integer: {tok!r}") from None


def read_matrix_market(path) -> SparseSymMatrix:
    it = _lines(path)
    try:
        no, header = next(it)
    except StopIteration:
        raise ParseError(path, 1, "empty file") from None
    parts = header.lower().split()
    if len(parts) != 5 or parts[0] != "%%matrixmarket" or parts[1] != "matrix" or parts[2] != "coordinate":
        raise ParseError(path, no, "expected '%%MatrixMarket matrix coordinate <field> <symmetry>'")
    field, symmetry = parts[3], parts[4]
    if field not in ("real", "integer"):
        raise ParseError(path, no, f"unsupported field {field!r}")
    if symmetry not in ("symmetric", "general"):
        raise ParseError(path, no, f"unsupported symmetry {symmetry!r}")
    size = None
    rows, cols, vals = [], [], []
    for no, line in it:
        if not line or line.startswith("%"):
            continue
        toks = line.split()
        if size is None:
            if len(toks) != 3:
                raise ParseError(path, no, "size line must be 'rows cols nnz'")
            size = tuple(_int(t, path, no) for t in toks)
            if size[0] != size[1]:
                raise ParseError(path, no, f"matrix must be square, got {size[0]}x{size[1]}")
            continue
        if len(toks) != 3:
            raise ParseError(path, no, "entry line must be 'row col value'")
        i, j = _int(toks[0], path, no) - 1, _int(toks[1], path, no) - 1
        if not (0 <= i < size[0] and 0 <= j < size[0]):
            raise ParseError(path, no, f"index ({i + 1}, {j + 1}) outside 1..{size[0]}")
        if symmetry == "symmetric" and j > i:
            raise ParseError(path, no, "symmetric storage expects row >= col")
        rows.append(i)
        cols.append(j)
        vals.append(_float(toks[2], path, no))
    if size is None:
        raise ParseError(path, no, "missing size line")
    if len(vals) != size[2]:
        raise ParseError(path, no, f"expected {size[2]} entries, found {len(vals)}")
    n = size[0]
    if symmetry == "general":
        full = {}
        for i, j, v in zip(rows, cols, vals):
            full[(i, j)] = full.get((i, j), 0.0) + v
        for (i, j), v in full.items():
            if full.get((j, i), 0.0) != v:
                raise ParseError(path, no, f"general matrix is not symmetric at ({i + 1}, {j + 1})")
        keep = [(i, j, v) for (i, j), v in full.items() if i >= j]
        rows, cols, vals = ([k[0] for k in keep], [k[1] for k in keep], [k[2] for k in keep])
    return SparseSymMatrix.from_coo(n, rows, cols, vals)


def write_matrix_market(path, A: SparseSymMatrix) -> None:
    r, c, v = A.triplets()
    # stored upper triangle (r <= c) is written as the lower triangle
    order = np.lexsort((c, r))
    with open(path, "w", encoding="utf-8") as fh:
        fh.write("%%MatrixMarket matrix coordinate real symmetric\n")
        fh.write(f"{A.n} {A.n} {v.size}\n")
        for k in order:
            fh.write(f"{c[k] + 1} {r[k] + 1} {fmt_float(v[k])}\n")


def read_edge_list(path, one_based: bool = False, n: int | None = None) -> WeightedGraph:
    """Read ``u v [weight]`` lines; ``# n=N`` fixes the vertex count."""
    us, vs, ws = [], [], []
    base = 1 if one_based else 0
    last = 0
    for no, line in _lines(path):
        last = no
        if not line:
            continue
        if line[0] in "#%":
            body = line[1:].strip()
            if body.startswith("n=") and n is None:
                n = _int(body[2:], path, no)
            continue
        toks = line.split()
        if len(toks) not in (2, 3):
            raise ParseError(path, no, "edge line must be 'u v' or 'u v weight'")
        u, v = _int(toks[0], path, no) - base, _int(toks[1], path, no) - base
        if u < 0 or v < 0:
            raise ParseError(path, no, f"vertex id below {base}")
        if u == v:
            raise ParseError(path, no, f"self-loop at vertex {u + base}")
        w = _float(toks[2], path, no) if len(toks) == 3 else 1.0
        if w <= 0:
            raise ParseError(path, no, f"weight must be positive, got {w}")
        us.append(u)
        vs.append(v)
        ws.append(w)
    if not us:
        raise ParseError(path, last, "no edges")
    if n is None:
        n = max(max(us), max(vs)) + 1
    try:
        return WeightedGraph(n, us, vs, ws)
    except ValueError as exc:
        raise ParseError(path, last, str(exc)) from None


def write_edge_list(path, G: WeightedGraph, one_based: bool = False) -> None:
    base = 1 if one_based else 0
    with open(path, "w", encoding="utf-8") as fh:
        fh.write(f"# n={G.n}\n")
        for u, v, w in zip(G.u, G.v, G.w):
            fh.write(f"{u + base} {v + base} {fmt_float(w)}\n")


def read_vector(path) -> np.ndarray:
    vals = []
    for no, line in _lines(path):
        if not line or line[0] in "#%":
            continue
        vals.append(_float(line, path, no))
    return np.array(vals)


def write_vector(path, v) -> None:
    with open(path, "w", encoding="utf-8") as fh:
        for x in np.asarray(v, dtype=float):
            fh.write(fmt_float(x) + "\n")


def write_coefficients(path, poly, interval=None) -> None:
    """Write a :class:`ChebSeries` or :class:`MonomialPoly`.

    For monomials ``interval`` records the domain of validity (default
    ``0,inf``).
    """
    if isinstance(poly, ChebSeries):
        basis, (a, b) = "chebyshev", poly.interval
    elif isinstance(poly, MonomialPoly):
        basis, (a, b) = "monomial", (interval or (0.0, math.inf))
    else:
        raise TypeError("expected ChebSeries or MonomialPoly")
    coeffs = np.asarray(poly.coeffs, dtype=float)
    with open(path, "w", encoding="utf-8") as fh:
        fh.write(f"# basis={basis} interval={fmt_float(a)},{fmt_float(b)} degree={coeffs.size - 1}\n")
        for c in coeffs:
            fh.write(fmt_float(c) + "\n")


def read_coefficients(path):
    """Return ``(poly, interval)``; ``poly`` is a ChebSeries or MonomialPoly."""
    it = _lines(path)
    try:
        no, header = next(it)
    except StopIteration:
        raise ParseError(path, 1, "empty file") from None
    if not header.startswith("#"):
        raise ParseError(path, no, "missing '# basis=... interval=a,b degree=d' header")
    fields = dict(tok.split("=", 1) for tok in header[1:].split() if "=" in tok)
    if set(fields) != {"basis", "interval", "degree"}:
        raise ParseError(path, no, "header needs basis, interval and degree")
    basis = fields["basis"]
    if basis not in ("chebyshev", "monomial"):
        raise ParseError(path, no, f"unknown basis {basis!r}")
    ends = fields["interval"].split(",")
    if len(ends) != 2:
        raise ParseError(path, no, "interval must be 'a,b'")
    try:
        a, b = float(ends[0]), float(ends[1])
    except ValueError:
        raise ParseError(path, no, "interval endpoints must be numbers") from None
    degree = _int(fields["degree"], path, no)
    coeffs = []
    for no, line in it:
        if not line or line[0] == "#":
            continue
        coeffs.append(_float(line, path, no))
    if len(coeffs) != degree + 1:
        raise ParseError(path, no, f"degree={degree} needs {degree + 1} coefficients, found {len(coeffs)}")
    if basis == "chebyshev":
        return ChebSeries(coeffs, (a, b)), (a, b)
    return MonomialPoly(coeffs), (a, b)


def write_expsum(path, approx: ExpSumApprox) -> None:
    with open(path, "w", encoding="utf-8") as fh:
        fh.write(f"# eps={fmt_float(approx.eps)},delta={fmt_float(approx.delta)},h={fmt_float(approx.h)}\n")
        for j, w, t in zip(range(approx.j_lo, approx.j_hi + 1), approx.weights, approx.rates):
            fh.write(f"{j},{fmt_float(w)},{fmt_float(t)}\n")


def read_expsum(path) -> ExpSumApprox:
    it = _lines(path)
    try:
        no, header = next(it)
    except StopIteration:
        raise ParseError(path, 1, "empty file") from None
    try:
        fields = dict(tok.split("=", 1) for tok in header.lstrip("#").strip().split(","))
        eps, delta, h = float(fields["eps"]), float(fields["delta"]), float(fields["h"])
    except (ValueError, KeyError):
        raise ParseError(path, no, "header must be '# eps=..,delta=..,h=..'") from None
    js, ws, ts = [], [], []
    for no, line in it:
        if not line or line[0] == "#":
            continue
        toks = line.split(",")
        if len(toks) != 3:
            raise ParseError(path, no, "term line must be 'j,w_j,t_j'")
        j = _int(toks[0], path, no)
        if js and j != js[-1] + 1:
            raise ParseError(path, no, f"indices must be consecutive, {js[-1]} then {j}")
        js.append(j)
        ws.append(_float(toks[1], path, no))
        ts.append(_float(toks[2], path, no))
    if not js:
        raise ParseError(path, no, "no terms")
    n_order = max(1, int(round(math.sqrt(1.0 / (C_H * h)))))
    try:
        return ExpSumApprox(np.array(ws), np.array(ts), eps, delta, h, n_order, js[0], js[-1])
    except ValueError as exc:
        raise ParseError(path, no, str(exc)) from None
