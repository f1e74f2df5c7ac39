"""Shared fixtures and dense linear-algebra oracles.

The oracles here use numpy dense solvers only and never call into the
iterative code they check.
"""

import time
from contextlib import contextmanager

import numpy as np
import pytest
from hypothesis import settings

settings.register_profile("repro", derandomize=True, print_blob=True)
settings.load_profile("repro")

from recaudit.domain import RecEvent, SessionLog
from recaudit.recgraph import assign_weights, build_graph

ACCEPTANCE = []


def graph_from_lists(lists, r=0.9):
    """Weighted RecGraph from {src: [dst, ...]}, one watch event per key in order."""
    events = [
        RecEvent("t", step, src, tuple(dsts))
        for step, (src, dsts) in enumerate(lists.items())
    ]
    return assign_weights(build_graph(SessionLog("t", events)), r)


def random_lists(rng, n, p_edge=0.35, strongly_connected=False):
    names = [f"n{i}" for i in range(n)]
    lists = {}
    for i in range(n):
        dsts = [j for j in range(n) if j != i and rng.random() < p_edge]
        rng.shuffle(dsts)
        lists[i] = dsts
    if strongly_connected:
        perm = rng.permutation(n)
        for a, b in zip(perm, np.roll(perm, -1)):
            if b not in lists[a]:
                lists[a].insert(int(rng.integers(0, len(lists[a]) + 1)), b)
    return {names[i]: [names[j] for j in d] for i, d in lists.items() if d}


def dense(g, weighted):
    n = g.n_nodes
    a = np.zeros((n, n))
    for s, d, w in zip(g.src, g.dst, g.weight):
        a[s, d] = w if weighted else 1.0
    return a


def oracle_pagerank(a, d):
    n = a.shape[0]
    out = a.sum(axis=1)
    p = np.where(out[:, None] > 0, a / np.where(out == 0, 1, out)[:, None], 1.0 / n)
    x = np.linalg.solve(np.eye(n) - d * p.T, np.full(n, (1 - d) / n))
    return x / x.sum()


def oracle_katz(a, alpha, beta):
    n = a.shape[0]
    return np.linalg.solve(np.eye(n) - alpha * a.T, np.full(n, beta))


def oracle_dominant(m):
    """(eigenvalue, nonnegative unit eigenvector) for the largest real eigenvalue."""
    vals, vecs = np.linalg.eig(m)
    k = int(np.argmax(vals.real))
    v = np.abs(vecs[:, k].real)
    return vals[k].real, v / np.linalg.norm(v)


def oracle_spectral_radius(a):
    return float(np.max(np.abs(np.linalg.eigvals(a)))) if a.size else 0.0


@pytest.fixture
def rng():
    return np.random.default_rng(20240611)


@pytest.fixture
def criterion():
    """Record an acceptance criterion's outcome and wall time for the summary."""

    @contextmanager
    def run(cid, title, limit_s):
        t0 = time.perf_counter()
        ok = False
        try:
            yield
            elapsed = time.perf_counter() - t0
            assert elapsed < limit_s, f"took {elapsed:.2f}s, limit {limit_s}s"
            ok = True
        finally:
            ACCEPTANCE.append((cid, title, ok, time.perf_counter() - t0))
            print(f"[{'PASS' if ok else 'FAIL'}] criterion {cid}: {title}")

    return run


def pytest_terminal_summary(terminalreporter):
    if not ACCEPTANCE:
        return
    terminalreporter.section("acceptance criteria")
    for cid, title, ok, elapsed in sorted(ACCEPTANCE):
        terminalreporter.write_line(
            f"{'PASS' if ok else 'FAIL'}  {cid}. {title}  ({elapsed:.2f}s)"
        )
