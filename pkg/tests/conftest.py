import math

import numpy as np
import pytest
import scipy.sparse as sp

from approxkit.sparse import SparseSymMatrix, WeightedGraph


def dumbbell(k=10):
    """Two K_k joined by a single bridge edge (k-1, k)."""
    edges = [(i, j) for i in range(k) for j in range(i + 1, k)]
    edges += [(k + i, k + j) for i in range(k) for j in range(i + 1, k)]
    edges.append((k - 1, k))
    return WeightedGraph.from_edges(2 * k, edges)


def cycle(n):
    return WeightedGraph.from_edges(n, [(i, (i + 1) % n) for i in range(n)])


def complete(n):
    return WeightedGraph.from_edges(n, [(i, j) for i in range(n) for j in range(i + 1, n)])


def path(n):
    return WeightedGraph.from_edges(n, [(i, i + 1) for i in range(n - 1)])


def random_graph(n, p, seed, weighted=False):
    """Erdos-Renyi edges on top of a Hamiltonian cycle (keeps it connected)."""
    rng = np.random.default_rng(seed)
    iu, ju = np.triu_indices(n, 1)
    keep = rng.random(iu.size) < p
    u = np.concatenate((iu[keep], np.arange(n)))
    v = np.concatenate((ju[keep], (np.arange(n) + 1) % n))
    w = rng.uniform(0.5, 2.0, u.size) if weighted else np.ones(u.size)
    return WeightedGraph(n, u, v, w)


def random_spd(n, seed, lo=0.1, hi=1.0):
    rng = np.random.default_rng(seed)
    q = np.linalg.qr(rng.standard_normal((n, n)))[0]
    a = (q * rng.uniform(lo, hi, n)) @ q.T
    return SparseSymMatrix.from_dense((a + a.T) / 2)


def dirichlet_grid(m):
    t = sp.diags([-np.ones(m - 1), 2 * np.ones(m), -np.ones(m - 1)], [-1, 0, 1])
    lap = sp.kron(t, sp.identity(m)) + sp.kron(sp.identity(m), t)
    return SparseSymMatrix(sp.triu(lap).tocsr())


def dirichlet_grid_kappa(m):
    return 1.0 / math.tan(math.pi / (2 * (m + 1))) ** 2


@pytest.fixture
def rng():
    return np.random.default_rng(12345)


ACCEPTANCE_LINES = []


@pytest.fixture
def verdict():
    """Record one ``PASS``/``FAIL`` line per acceptance criterion."""

    def record(label: str, ok: bool, detail: str) -> bool:
        line = f"{'PASS' if ok else 'FAIL'} {label}: {detail}"
        ACCEPTANCE_LINES.append(line)
        print(line)
        return ok

    return record


def pytest_terminal_summary(terminalreporter):
    if ACCEPTANCE_LINES:
        terminalreporter.section("acceptance criteria")
        for line in ACCEPTANCE_LINES:
            terminalreporter.write_line(line)
