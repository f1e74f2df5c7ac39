"""Influence measures over a recommendation graph.

Six measures are computed, min-max normalized and summed into a composite
score: in-degree, weighted in-degree, eigenvector centrality, PageRank, Katz
and HITS authority. The iterative solvers are written against
``scipy.sparse`` matrices and report non-convergence instead of raising.
"""

from __future__ import annotations

import csv
import logging
import math
from dataclasses import asdict, dataclass, field
from enum import Enum
from typing import Iterable, Mapping, Optional, Sequence

import numpy as np
import scipy.sparse as sp
from scipy.sparse import csgraph
from scipy.stats import rankdata

from .errors import IntegrityError, NonConvergenceError, ParameterError
from .recgraph import RecGraph

log = logging.getLogger(__name__)


class Measure(str, Enum):
    IN_DEGREE = "in_degree"
    WEIGHTED_IN_DEGREE = "weighted_in_degree"
    EIGEN = "eigen"
    PAGERANK = "pagerank"
    KATZ = "katz"
    AUTHORITY = "authority"
    COMPOSITE = "composite"


SIX = (
    Measure.IN_DEGREE,
    Measure.WEIGHTED_IN_DEGREE,
    Measure.EIGEN,
    Measure.PAGERANK,
    Measure.KATZ,
    Measure.AUTHORITY,
)


@dataclass(frozen=True)
class SolverParams:
    damping: float = 0.85
    tolerance: float = 1e-10
    max_iterations: int = 1000
    alpha_fraction: float = 0.9
    katz_alpha: Optional[float] = None  # None: alpha_fraction / spectral radius
    katz_beta: float = 1.0
    eigen_weighted: bool = True
    pagerank_weighted: bool = True
    katz_weighted: bool = True
    hits_weighted: bool = False

    def __post_init__(self):
        if not 0.0 < self.damping < 1.0:
            raise ParameterError(f"damping must lie in (0, 1), got {self.damping}")
        if not self.tolerance > 0:
            raise ParameterError(f"tolerance must be > 0, got {self.tolerance}")
        if self.max_iterations < 1:
            raise ParameterError(f"max_iterations must be >= 1, got {self.max_iterations}")
        if not 0.0 < self.alpha_fraction < 1.0:
            raise ParameterError(f"alpha_fraction must lie in (0, 1), got {self.alpha_fraction}")
        if self.katz_alpha is not None and not self.katz_alpha > 0:
            raise ParameterError(f"katz_alpha must be > 0, got {self.katz_alpha}")

    def to_dict(self) -> dict:
        return asdict(self)


@dataclass(frozen=True, eq=False)
class ScoreVector:
    measure: Measure
    nodes: tuple[str, ...]
    values: np.ndarray
    params: Mapping = field(default_factory=dict)
    converged: bool = True
    iterations: int = 0
    normalized: bool = False
    note: str = ""

    def __post_init__(self):
        v = np.array(self.values, dtype=np.float64)
        v.setflags(write=False)
        object.__setattr__(self, "values", v)
        object.__setattr__(self, "nodes", tuple(self.nodes))
        if len(v) != len(self.nodes):
            raise IntegrityError("score vector length differs from node count")
        if not np.isfinite(v).all():
            raise IntegrityError(f"{self.measure.value}: non-finite scores")

    def as_dict(self) -> dict[str, float]:
        return dict(zip(self.nodes, self.values.tolist()))

    def __getitem__(self, video_id: str) -> float:
        return float(self.values[self.nodes.index(video_id)])

    def __eq__(self, other):
        if not isinstance(other, ScoreVector):
            return NotImplemented
        return (self.measure == other.measure and self.nodes == other.nodes
                and np.array_equal(self.values, other.values)
                and self.normalized == other.normalized)

    __hash__ = None


def _fsum_by(index: np.ndarray, data: Iterable[float], n: int) -> np.ndarray:
    # exactly rounded per-node sums, independent of edge order
    buckets: list[list[float]] = [[] for _ in range(n)]
    for i, w in zip(index.tolist(), data):
        buckets[i].append(w)
    return np.array([math.fsum(b) for b in buckets], dtype=np.float64)


def in_degree(g: RecGraph) -> ScoreVector:
    vals = np.bincount(g.dst, minlength=g.n_nodes).astype(np.float64)
    return ScoreVector(Measure.IN_DEGREE, g.nodes, vals)


def weighted_in_degree(g: RecGraph) -> ScoreVector:
    if not g.has_weights:
        raise ParameterError("weighted in-degree needs edge weights")
    vals = _fsum_by(g.dst, g.weight.tolist(), g.n_nodes)
    return ScoreVector(Measure.WEIGHTED_IN_DEGREE, g.nodes, vals)


def _require_edges(g: RecGraph, what: str):
    if g.n_edges == 0:
        raise ParameterError(f"{what} needs at least one edge")


def _acyclic(a: sp.csr_matrix) -> bool:
    if a.diagonal().any():
        return False
    ncomp, _ = csgraph.connected_components(a, directed=True, connection="strong")
    return ncomp == a.shape[0]


def eigen_centrality(g: RecGraph, params: SolverParams = SolverParams()) -> ScoreVector:
    """Dominant left eigenvector of the adjacency matrix, L2-normalized.

    Iterates ``x <- (A^T + I) x``; the shift keeps the eigenvectors but
    stops periodic graphs from oscillating. Graphs with no positive
    dominant eigenvalue (DAGs) never settle and come back flagged.
    """
    _require_edges(g, "eigenvector centrality")
    at = g.adjacency(weighted=params.eigen_weighted).T.tocsr()
    n = g.n_nodes
    x = np.full(n, 1.0 / math.sqrt(n))
    converged = False
    it = 0
    for it in range(1, params.max_iterations + 1):
        y = at @ x + x
        y /= np.linalg.norm(y)
        delta = np.abs(y - x).max()
        x = y
        if delta < params.tolerance:
            converged = True
            break
    eigval = float(x @ (at @ x))
    note = ""
    if _acyclic(at):
        converged = False
        note = "acyclic graph: every eigenvalue is 0, no dominant eigenvector"
    elif eigval <= math.sqrt(params.tolerance):
        converged = False
        note = f"degenerate spectrum: dominant eigenvalue estimate {eigval:.3g}"
    elif not converged:
        note = f"no convergence after {it} iterations (last change {delta:.3g})"
    if note:
        log.warning("eigenvector centrality: %s", note)
    return ScoreVector(Measure.EIGEN, g.nodes, x,
                       {"eigenvalue": eigval, "weighted": params.eigen_weighted},
                       converged, it, note=note)


def pagerank(g: RecGraph, params: SolverParams = SolverParams()) -> ScoreVector:
    """Damped PageRank; dangling nodes spread their mass uniformly."""
    n = g.n_nodes
    if n == 0:
        return ScoreVector(Measure.PAGERANK, (), [])
    d = params.damping
    a = g.adjacency(weighted=params.pagerank_weighted)
    out = np.asarray(a.sum(axis=1)).ravel()
    dangling = out == 0
    inv = np.zeros(n)
    inv[~dangling] = 1.0 / out[~dangling]
    pt = (sp.diags(inv) @ a).T.tocsr()
    x = np.full(n, 1.0 / n)
    converged = False
    it = 0
    for it in range(1, params.max_iterations + 1):
        y = d * (pt @ x) + (d * x[dangling].sum() + (1.0 - d)) / n
        y /= y.sum()
        delta = np.abs(y - x).sum()
        x = y
        if delta < params.tolerance:
            converged = True
            break
    note = "" if converged else f"no convergence after {it} iterations"
    return ScoreVector(Measure.PAGERANK, g.nodes, x,
                       {"damping": d, "weighted": params.pagerank_weighted},
                       converged, it, note=note)


def spectral_radius(a: sp.spmatrix, tolerance: float = 1e-13, max_iterations: int = 100_000) -> float:
    """Spectral radius of a nonnegative sparse matrix.

    The radius is the largest Perron root over the strongly connected
    components; each irreducible block is bracketed with Collatz-Wielandt
    bounds while power-iterating ``B + I``.
    """
    a = sp.csr_matrix(a)
    n = a.shape[0]
    if n == 0 or a.nnz == 0:
        return 0.0
    ncomp, labels = csgraph.connected_components(a, directed=True, connection="strong")
    sizes = np.bincount(labels, minlength=ncomp)
    diag = a.diagonal()
    rho = 0.0
    for c in range(ncomp):
        members = np.flatnonzero(labels == c)
        if sizes[c] == 1:
            rho = max(rho, float(diag[members[0]]))
            continue
        b = a[members][:, members] + sp.identity(len(members), format="csr")
        x = np.ones(len(members))
        lo, hi = 0.0, math.inf
        for _ in range(max_iterations):
            y = b @ x
            ratio = y / x
            lo, hi = ratio.min(), ratio.max()
            if hi - lo <= tolerance * hi:
                break
            x = y / y.max()
        rho = max(rho, 0.5 * (lo + hi) - 1.0)
    return rho


def katz(g: RecGraph, params: SolverParams = SolverParams()) -> ScoreVector:
    """Katz centrality ``beta * sum_k alpha^k (A^T)^k 1``.

    Without an explicit ``katz_alpha``, alpha = alpha_fraction / rho(A).
    A nilpotent adjacency (rho = 0) has a finite series for any alpha; it
    then uses alpha_fraction itself.
    """
    n = g.n_nodes
    beta = params.katz_beta
    a = g.adjacency(weighted=params.katz_weighted)
    rho = spectral_radius(a)
    if params.katz_alpha is not None:
        alpha = params.katz_alpha
    else:
        alpha = params.alpha_fraction / rho if rho > 0 else params.alpha_fraction
    if alpha * rho >= 1.0:
        raise ParameterError(
            f"katz alpha {alpha:.6g} is not below 1/rho = {1.0 / rho:.6g} (rho = {rho:.6g})"
        )
    at = a.T.tocsr()
    x = np.full(n, beta, dtype=np.float64)
    converged = n == 0
    it = 0
    for it in range(1, params.max_iterations + 1):
        if n == 0:
            break
        y = alpha * (at @ x) + beta
        delta = np.abs(y - x).max()
        x = y
        if delta < params.tolerance:
            converged = True
            break
    note = "" if converged else f"no convergence after {it} iterations"
    return ScoreVector(Measure.KATZ, g.nodes, x,
                       {"alpha": alpha, "beta": beta, "spectral_radius": rho,
                        "weighted": params.katz_weighted},
                       converged, it, note=note)


def hits(g: RecGraph, params: SolverParams = SolverParams()) -> tuple[ScoreVector, np.ndarray]:
    """Alternating hub/authority iteration. Returns (authority, hub), both L2-normalized."""
    _require_edges(g, "HITS")
    a = g.adjacency(weighted=params.hits_weighted)
    at = a.T.tocsr()
    h = np.ones(g.n_nodes)
    auth = at @ h
    auth /= np.linalg.norm(auth)
    converged = False
    it = 0
    for it in range(1, params.max_iterations + 1):
        h = a @ auth
        h /= np.linalg.norm(h)
        nxt = at @ h
        nxt /= np.linalg.norm(nxt)
        delta = np.abs(nxt - auth).max()
        auth = nxt
        if delta < params.tolerance:
            converged = True
            break
    h = a @ auth
    h /= np.linalg.norm(h)
    note = "" if converged else f"no convergence after {it} iterations"
    sv = ScoreVector(Measure.AUTHORITY, g.nodes, auth,
                     {"weighted": params.hits_weighted}, converged, it, note=note)
    return sv, h


def hits_authority(g: RecGraph, params: SolverParams = SolverParams()) -> ScoreVector:
    return hits(g, params)[0]


def normalize(sv: ScoreVector) -> ScoreVector:
    """Min-max rescale to [0, 1]; a constant vector maps to all zeros."""
    v = sv.values
    if len(v) == 0:
        out = v
    else:
        lo, hi = v.min(), v.max()
        out = np.zeros_like(v) if hi == lo else (v - lo) / (hi - lo)
    return ScoreVector(sv.measure, sv.nodes, out, sv.params, sv.converged,
                       sv.iterations, normalized=True, note=sv.note)


def composite(svs: Sequence[ScoreVector]) -> ScoreVector:
    """Sum of the six normalized measures (input order does not matter)."""
    by_measure = {}
    for sv in svs:
        if sv.measure not in SIX:
            raise ParameterError(f"{sv.measure.value} is not one of the six measures")
        if sv.measure in by_measure:
            raise ParameterError(f"duplicate measure {sv.measure.value}")
        if not sv.normalized:
            raise ParameterError(f"{sv.measure.value} is not normalized")
        by_measure[sv.measure] = sv
    missing = [m.value for m in SIX if m not in by_measure]
    if missing:
        raise ParameterError(f"missing measures: {', '.join(missing)}")
    nodes = by_measure[SIX[0]].nodes
    if any(by_measure[m].nodes != nodes for m in SIX):
        raise IntegrityError("score vectors cover different node sets")
    total = np.zeros(len(nodes))
    for m in SIX:
        total = total + by_measure[m].values
    flagged = [m.value for m in SIX if not by_measure[m].converged]
    note = f"includes non-converged: {', '.join(flagged)}" if flagged else ""
    return ScoreVector(Measure.COMPOSITE, nodes, total, converged=not flagged,
                       normalized=False, note=note)


def measure_correlation(svs: Sequence[ScoreVector]) -> np.ndarray:
    """Spearman rank correlation between every pair of score vectors.

    A constant vector has no ranking; its off-diagonal entries are 0.
    """
    if not svs:
        raise ParameterError("no score vectors")
    n = len(svs[0].values)
    if n < 2:
        raise ParameterError("rank correlation needs at least 2 nodes")
    if any(sv.nodes != svs[0].nodes for sv in svs):
        raise IntegrityError("score vectors cover different node sets")
    ranks = np.array([rankdata(sv.values) for sv in svs])
    centered = ranks - ranks.mean(axis=1, keepdims=True)
    norms = np.linalg.norm(centered, axis=1)
    k = len(svs)
    corr = np.eye(k)
    for i in range(k):
        for j in range(i + 1, k):
            if norms[i] == 0 or norms[j] == 0:
                c = 0.0
            else:
                c = float(np.clip(centered[i] @ centered[j] / (norms[i] * norms[j]), -1.0, 1.0))
            corr[i, j] = corr[j, i] = c
    return corr


@dataclass
class InfluenceScores:
    raw: dict
    normalized: dict
    composite: ScoreVector

    @property
    def converged(self) -> bool:
        return all(sv.converged for sv in self.raw.values())

    def flags(self) -> dict[str, str]:
        return {m.value: sv.note for m, sv in self.raw.items() if not sv.converged}


def influence_scores(g: RecGraph, params: SolverParams = SolverParams(),
                     strict: bool = False) -> InfluenceScores:
    """All six measures, their normalized forms and the composite.

    With ``strict`` a non-converged measure raises instead of being flagged.
    """
    raw = {
        Measure.IN_DEGREE: in_degree(g),
        Measure.WEIGHTED_IN_DEGREE: weighted_in_degree(g),
        Measure.EIGEN: eigen_centrality(g, params),
        Measure.PAGERANK: pagerank(g, params),
        Measure.KATZ: katz(g, params),
        Measure.AUTHORITY: hits_authority(g, params),
    }
    bad = {m.value: sv.note for m, sv in raw.items() if not sv.converged}
    if strict and bad:
        raise NonConvergenceError("; ".join(f"{m}: {why}" for m, why in bad.items()))
    norm = {m: normalize(sv) for m, sv in raw.items()}
    return InfluenceScores(raw, norm, composite(list(norm.values())))


def write_scores_long(scores: InfluenceScores, fh) -> None:
    w = csv.writer(fh, lineterminator="\n")
    w.writerow(["video_id", "measure", "raw", "normalized"])
    for m in SIX:
        raw, norm = scores.raw[m], scores.normalized[m]
        for vid, r, nv in zip(raw.nodes, raw.values.tolist(), norm.values.tolist()):
            w.writerow([vid, m.value, repr(r), repr(nv)])


def write_scores_wide(scores: InfluenceScores, fh) -> None:
    w = csv.writer(fh, lineterminator="\n")
    w.writerow(["video_id"] + [m.value for m in SIX] + ["composite"])
    cols = [scores.normalized[m].values.tolist() for m in SIX] + [scores.composite.values.tolist()]
    for i, vid in enumerate(scores.composite.nodes):
        w.writerow([vid] + [repr(c[i]) for c in cols])


def read_composite(fh) -> ScoreVector:
    """Composite column of a wide score CSV."""
    nodes, vals = [], []
    for row in csv.DictReader(fh):
        nodes.append(row["video_id"])
        vals.append(float(row["composite"]))
    return ScoreVector(Measure.COMPOSITE, tuple(nodes), vals)
