"""Audit metrics: rank-weighted total bias, overlap coefficient, rank-biased overlap."""

from __future__ import annotations

import csv
from dataclasses import dataclass
from typing import Hashable, Iterable, Sequence

import numpy as np

from .errors import IntegrityError, ParameterError
from .ranking import LabeledRanking


@dataclass(frozen=True)
class BiasReport:
    profile_id: str
    total_bias: float
    n: int
    scheme: str


def bias_weights(n: int) -> np.ndarray:
    """Weight of the item at 0-based position j: 2(n - j) / (n(n + 1))."""
    if n < 1:
        raise ParameterError("bias weights need n >= 1")
    return 2.0 * np.arange(n, 0, -1) / (n * (n + 1))


def total_bias_from_scores(scores: Sequence[int]) -> float:
    """Rank-weighted mean of per-item scores in {-1, 0, +1}; top rank weighs most.

    The numerator is accumulated in integers so the extremes are exactly +-1.
    """
    n = len(scores)
    if n == 0:
        raise ParameterError("total bias of an empty selection")
    if any(s not in (-1, 0, 1) for s in scores):
        raise ParameterError("item scores must be -1, 0 or +1")
    num = sum((n - j) * s for j, s in enumerate(scores))
    return 2 * num / (n * (n + 1))


def total_bias(lr: LabeledRanking, profile_id: str = "") -> BiasReport:
    ranks = [e.rank for e in lr]
    if any(b <= a for a, b in zip(ranks, ranks[1:])):
        raise IntegrityError("labeled ranking is not in rank order")
    return BiasReport(profile_id, total_bias_from_scores(lr.scores), len(lr), lr.scheme)


def overlap_coefficient(a: Iterable[Hashable], b: Iterable[Hashable]) -> float:
    a, b = set(a), set(b)
    if not a or not b:
        raise ParameterError("overlap coefficient needs two non-empty sets")
    return len(a & b) / min(len(a), len(b))


def jaccard(a: Iterable[Hashable], b: Iterable[Hashable]) -> float:
    a, b = set(a), set(b)
    if not a or not b:
        raise ParameterError("jaccard needs two non-empty sets")
    return len(a & b) / len(a | b)


def _check_lists(a, b, p):
    if not 0.0 < p < 1.0:
        raise ParameterError(f"p must lie in (0, 1), got {p}")
    for name, lst in (("first", a), ("second", b)):
        if len(set(lst)) != len(lst):
            raise IntegrityError(f"{name} ranked list has duplicates")


def _prefix_overlaps(a: Sequence, b: Sequence, depth: int) -> list[int]:
    """X_d = |a[:d] & b[:d]| for d = 1..depth (lists shorter than d contribute whole)."""
    seen_a, seen_b = set(), set()
    overlap = 0
    out = []
    for i in range(depth):
        if i < len(a):
            overlap += a[i] in seen_b
            seen_a.add(a[i])
        if i < len(b):
            overlap += b[i] in seen_a
            seen_b.add(b[i])
        out.append(overlap)
    return out


def rbo(a: Sequence, b: Sequence, p: float = 0.97, depth: int = 1000) -> float:
    """Truncated rank-biased overlap, (1 - p) * sum_{k<=d} p^(k-1) * X_k / k.

    d = min(depth, longer list length). Identical lists of length >= depth
    score 1 - p^depth.
    """
    _check_lists(a, b, p)
    if depth < 1:
        raise ParameterError("depth must be >= 1")
    d = min(depth, max(len(a), len(b)))
    if d == 0:
        return 0.0
    xs = _prefix_overlaps(a, b, d)
    total = 0.0
    weight = 1.0
    for k, x in enumerate(xs, 1):
        total += weight * x / k
        weight *= p
    return (1.0 - p) * total


def rbo_ext(a: Sequence, b: Sequence, p: float = 0.97) -> float:
    """Extrapolated RBO for possibly uneven lists (Webber et al. 2010)."""
    _check_lists(a, b, p)
    short, long_ = (a, b) if len(a) <= len(b) else (b, a)
    s, l = len(short), len(long_)
    if s == 0:
        return 0.0
    xs = _prefix_overlaps(short, long_, l)
    xd = lambda d: xs[d - 1]  # noqa: E731
    sum1 = sum(xd(d) / d * p**d for d in range(1, l + 1))
    sum2 = sum(xd(s) * (d - s) / (s * d) * p**d for d in range(s + 1, l + 1))
    tail = ((xd(l) - xd(s)) / l + xd(s) / s) * p**l
    return (1.0 - p) / p * (sum1 + sum2) + tail


def rbo_top_weight(p: float, d: int) -> float:
    """Share of the (infinite-depth) RBO weight carried by ranks 1..d."""
    if not 0.0 < p < 1.0 or d < 1:
        raise ParameterError("need 0 < p < 1 and d >= 1")
    # sum_{i>=d} p^i / i directly; log(1/(1-p)) minus the head cancels badly for large d
    tail, i, term = 0.0, d, p**d / d
    while term > 1e-18 * tail or tail == 0.0:
        tail += term
        i += 1
        term = p**i / i
        if term == 0.0:
            break
    return 1.0 - p ** (d - 1) + (1.0 - p) / p * d * tail


@dataclass(frozen=True)
class OverlapReport:
    pair: tuple[str, str]
    oc: float
    rbo: float
    p: float
    depth: int


def compare_rankings(name_a: str, ranking_a: Sequence, name_b: str, ranking_b: Sequence,
                     p: float = 0.97, depth: int = 1000, jaccard_overlap: bool = False,
                     extrapolated: bool = False) -> OverlapReport:
    overlap = jaccard if jaccard_overlap else overlap_coefficient
    sim = rbo_ext(ranking_a, ranking_b, p) if extrapolated else rbo(ranking_a, ranking_b, p, depth)
    return OverlapReport((name_a, name_b), overlap(ranking_a, ranking_b), sim, p, depth)


def write_bias_csv(reports: Iterable[BiasReport], fh) -> None:
    w = csv.writer(fh, lineterminator="\n")
    w.writerow(["profile", "total_bias", "n", "scheme"])
    for r in reports:
        w.writerow([r.profile_id, repr(r.total_bias), r.n, r.scheme])


def write_overlap_csv(reports: Iterable[OverlapReport], fh) -> None:
    w = csv.writer(fh, lineterminator="\n")
    w.writerow(["pair", "oc", "rbo", "p", "depth"])
    for r in reports:
        w.writerow([f"{r.pair[0]} & {r.pair[1]}", repr(r.oc), repr(r.rbo), repr(r.p), r.depth])
