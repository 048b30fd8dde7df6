"""Conductance, sweep cuts and the accelerated spectral sparse-cut search."""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np
from scipy.sparse.csgraph import connected_components

from .krylov import DEFAULT_SEED, random_unit_vector
from .matfun import power_apply
from .sparse import ShiftedOperator, WeightedGraph, _as_vector, normalized_laplacian, walk_matrix_sym

__all__ = ["CutResult", "conductance", "sweep_cut", "sparse_cut", "lambda_schedule", "walk_parameters"]


@dataclass(frozen=True)
class CutResult:
    """A vertex subset, its conductance and how it was found.

    ``side`` is the smaller-volume side (the prefix on ties), sorted.
    ``sweep_index`` is the prefix length in the sweep order at which the
    best cut occurred.
    """

    side: tuple
    conductance: float
    sweep_index: int
    vector_used: np.ndarray
    rayleigh_quotient: float = float("nan")
    lambda_guess: float = float("nan")
    matvec_count: int = 0

    def to_text(self) -> str:
        lines = [f"conductance={self.conductance:.12e} size={len(self.side)}"]
        lines += [str(i) for i in self.side]
        return "\n".join(lines) + "\n"


def _mask(G: WeightedGraph, S) -> np.ndarray:
    S = np.asarray(S)
    if S.dtype == bool:
        if S.shape != (G.n,):
            raise ValueError(f"boolean mask must have length n={G.n}")
        mask = S.copy()
    else:
        idx = S.astype(np.int64).ravel()
        if idx.size and (idx.min() < 0 or idx.max() >= G.n):
            raise ValueError(f"vertex ids must lie in [0, {G.n})")
        mask = np.zeros(G.n, dtype=bool)
        mask[idx] = True
    k = int(mask.sum())
    if k == 0 or k == G.n:
        raise ValueError("S must be a nonempty proper subset of the vertices")
    return mask


def conductance(G: WeightedGraph, S) -> float:
    """``w(S, V \\ S) / min(vol S, vol V \\ S)``; ``S`` is a vertex list or boolean mask."""
    mask = _mask(G, S)
    cut = math.fsum(G.w[mask[G.u] != mask[G.v]].tolist())
    vol_s = math.fsum(G.degrees[mask].tolist())
    vol_c = math.fsum(G.degrees[~mask].tolist())
    return cut / min(vol_s, vol_c)


def _result(G, prefix, k, x, **extra) -> CutResult:
    mask = np.zeros(G.n, dtype=bool)
    mask[prefix] = True
    vol_in = math.fsum(G.degrees[mask].tolist())
    vol_out = math.fsum(G.degrees[~mask].tolist())
    side = mask if vol_in <= vol_out else ~mask
    phi = conductance(G, side)
    return CutResult(tuple(int(i) for i in np.nonzero(side)[0]), phi, int(k), np.array(x, dtype=float), **extra)


def sweep_cut(G: WeightedGraph, x, **extra) -> CutResult:
    """Best prefix cut of the vertices sorted by ``(D^{-1/2} x)_i``.

    Ties in value are broken by vertex id.  All ``n - 1`` prefixes are scored
    in one pass: the cut weight of every prefix comes from a difference
    array over edge ranks, volumes from a running sum.
    """
    x = _as_vector(x, G.n, "x")
    if G.n < 2:
        raise ValueError("a sweep needs at least two vertices")
    y = x / G.sqrt_degrees()
    if np.ptp(y) == 0.0:
        raise ValueError("sweep vector D^{-1/2} x is constant")
    order = np.lexsort((np.arange(G.n), y))
    rank = np.empty(G.n, dtype=np.int64)
    rank[order] = np.arange(G.n)
    ru, rv = rank[G.u], rank[G.v]
    lo, hi = np.minimum(ru, rv), np.maximum(ru, rv)
    # edge crosses prefix sizes k with lo < k <= hi
    diff = np.zeros(G.n + 1)
    np.add.at(diff, lo + 1, G.w)
    np.add.at(diff, hi + 1, -G.w)
    cut = np.cumsum(diff)[1:G.n]
    vol = np.cumsum(G.degrees[order])[: G.n - 1]
    total = float(np.sum(G.degrees))
    phi = cut / np.minimum(vol, total - vol)
    k = int(np.argmin(phi)) + 1
    return _result(G, order[:k], k, x, **extra)


def lambda_schedule(n: int) -> list:
    """Guesses ``1/2, 1/4, ...`` down to the last one not below ``1/n^2``."""
    out, lam = [], 0.5
    floor = 1.0 / max(n, 2) ** 2
    while lam >= floor:
        out.append(lam)
        lam /= 2.0
    return out


def walk_parameters(n: int, lam: float):
    """``(s, delta)`` with ``s = ceil(log(9n/lam) / (2 log(1/(1-lam))))`` and
    ``delta = sqrt(lam (1-lam)^{2s} 2/(9n))``, capped at 1/2."""
    s = int(math.ceil(math.log(9.0 * n / lam) / (2.0 * -math.log1p(-lam))))
    delta = math.sqrt(lam * math.exp(2.0 * s * math.log1p(-lam)) * 2.0 / (9.0 * n))
    return s, min(delta, 0.5)


def sparse_cut(G: WeightedGraph, lambda_hint: float | None = None, seed: int = DEFAULT_SEED) -> CutResult:
    """Sweep cut of ``p_{s,d}(W_lazy) v`` for a random ``v`` orthogonal to the kernel.

    ``W_lazy = (I + W)/2`` has spectrum in ``[0, 1]``; a gap guess ``lam``
    for the normalized Laplacian is a gap ``lam/2`` for ``W_lazy``, which
    sets ``s`` and ``delta`` through :func:`walk_parameters`.  Without a hint
    every guess of :func:`lambda_schedule` is tried and the lowest-conductance
    cut is kept (earliest guess on ties).  A disconnected graph returns the
    component of vertex 0, with conductance 0.
    """
    n = G.n
    adj = G.adjacency().to_scipy()
    ncomp, labels = connected_components(adj, directed=False)
    if ncomp > 1:
        side = labels == labels[0]
        return _result(G, np.nonzero(side)[0], int(side.sum()), side.astype(float))
    kernel = G.sqrt_degrees()
    kernel = kernel / np.linalg.norm(kernel)
    lazy = ShiftedOperator(walk_matrix_sym(G), 0.5, 0.5)
    lap = normalized_laplacian(G)
    guesses = [float(lambda_hint)] if lambda_hint is not None else lambda_schedule(n)
    ss = np.random.SeedSequence(seed)
    best = None
    for lam, child in zip(guesses, ss.spawn(len(guesses))):
        if not 0 < lam < 1:
            raise ValueError("lambda_hint must lie in (0, 1)")
        v = random_unit_vector(n, int(child.generate_state(1)[0]), orthogonal_to=kernel)
        s, delta = walk_parameters(n, lam / 2.0)
        rep = power_apply(lazy, v, s, delta)
        u = rep.result
        u = u - (u @ kernel) * kernel
        nu = float(np.linalg.norm(u))
        if nu == 0.0 or np.ptp(u / G.sqrt_degrees()) == 0.0:
            continue
        u /= nu
        rq = float(u @ lap.matvec(u))
        cand = sweep_cut(G, u, rayleigh_quotient=rq, lambda_guess=lam, matvec_count=rep.matvec_count)
        if best is None or cand.conductance < best.conductance:
            best = cand
    if best is None:
        raise RuntimeError("every sweep vector degenerated to the kernel direction")
    return best
