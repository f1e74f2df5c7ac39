import io
import math

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from conftest import dense, graph_from_lists, oracle_pagerank
from recaudit import centrality as C
from recaudit.errors import IntegrityError, NonConvergenceError, ParameterError


def two_cycle():
    return graph_from_lists({"a": ["b"], "b": ["a"]})


def in_star():
    return graph_from_lists({"l1": ["c"], "l2": ["c"], "l3": ["c"]})


def test_two_cycle_closed_forms():
    g = two_cycle()
    p = C.SolverParams()
    assert C.pagerank(g, p).values == pytest.approx([0.5, 0.5], abs=1e-12)
    ev = C.eigen_centrality(g, p)
    assert ev.converged
    assert ev.values == pytest.approx([2 ** -0.5] * 2, abs=1e-12)
    kz = C.katz(g, p)
    assert kz.params["spectral_radius"] == pytest.approx(1.0, abs=1e-12)
    assert kz.values == pytest.approx([10.0, 10.0], abs=1e-8)
    assert C.hits_authority(g, p).values == pytest.approx([2 ** -0.5] * 2, abs=1e-12)


def test_in_star_closed_forms():
    g = in_star()
    idx = g.index()
    p = C.SolverParams()
    assert C.in_degree(g)["c"] == 3.0
    pr = C.pagerank(g, p)
    assert pr["c"] == pytest.approx(0.8875 / 1.6375, abs=1e-10)
    assert pr.values.sum() == pytest.approx(1.0, abs=1e-12)
    kz = C.katz(g, p)
    assert kz.params["spectral_radius"] == 0.0
    assert kz.params["alpha"] == 0.9
    assert kz["c"] == pytest.approx(3.7, abs=1e-12)
    assert kz["l1"] == 1.0
    auth = C.hits_authority(g, p)
    assert auth.values[idx["c"]] == pytest.approx(1.0)
    assert np.delete(auth.values, idx["c"]) == pytest.approx(0.0, abs=1e-12)


def test_acyclic_eigen_is_flagged():
    g = graph_from_lists({"a": ["b"], "b": ["c"]})
    ev = C.eigen_centrality(g)
    assert not ev.converged
    assert "acyclic" in ev.note
    scores = C.influence_scores(g)
    assert not scores.converged
    assert set(scores.flags()) == {"eigen"}
    assert "eigen" in scores.composite.note
    with pytest.raises(NonConvergenceError):
        C.influence_scores(g, strict=True)


def test_explicit_katz_alpha_too_large():
    with pytest.raises(ParameterError):
        C.katz(two_cycle(), C.SolverParams(katz_alpha=1.0))


def test_spectral_radius_matches_numpy(rng):
    from conftest import oracle_spectral_radius, random_lists

    for _ in range(30):
        lists = random_lists(rng, int(rng.integers(2, 12)), p_edge=0.3)
        if not lists:
            continue
        g = graph_from_lists(lists)
        a = g.adjacency(weighted=True)
        assert C.spectral_radius(a) == pytest.approx(oracle_spectral_radius(a.toarray()), abs=1e-10)


@pytest.mark.parametrize("kw", [
    {"damping": 1.0}, {"tolerance": 0}, {"max_iterations": 0},
    {"alpha_fraction": 1.0}, {"katz_alpha": -1.0},
])
def test_solver_params_validation(kw):
    with pytest.raises(ParameterError):
        C.SolverParams(**kw)


def test_normalize_constant_and_range():
    sv = C.ScoreVector(C.Measure.KATZ, ("a", "b"), [2.0, 2.0])
    assert C.normalize(sv).values.tolist() == [0.0, 0.0]
    sv = C.ScoreVector(C.Measure.KATZ, ("a", "b", "c"), [3.0, 1.0, 2.0])
    assert C.normalize(sv).values.tolist() == [1.0, 0.0, 0.5]


def test_score_vector_rejects_nan():
    with pytest.raises(IntegrityError):
        C.ScoreVector(C.Measure.KATZ, ("a",), [math.nan])


def test_composite_validation():
    g = two_cycle()
    norm = list(C.influence_scores(g).normalized.values())
    with pytest.raises(ParameterError, match="missing"):
        C.composite(norm[:5])
    with pytest.raises(ParameterError, match="duplicate"):
        C.composite(norm + norm[:1])
    raw = [C.in_degree(g)] + norm[1:]
    with pytest.raises(ParameterError, match="not normalized"):
        C.composite(raw)
    assert C.composite(list(reversed(norm))) == C.composite(norm)


def test_correlation_matrix():
    nodes = ("a", "b", "c", "d")
    x = C.ScoreVector(C.Measure.PAGERANK, nodes, [1, 2, 3, 4])
    y = C.ScoreVector(C.Measure.KATZ, nodes, [40, 30, 20, 10])
    z = C.ScoreVector(C.Measure.EIGEN, nodes, [5, 5, 5, 5])
    corr = C.measure_correlation([x, y, z])
    assert corr == pytest.approx(np.array([[1, -1, 0], [-1, 1, 0], [0, 0, 1]]), abs=1e-12)


def test_scores_csv_round_trip():
    scores = C.influence_scores(graph_from_lists({"a": ["b", "c"], "b": ["a"], "c": ["a", "b"]}))
    buf = io.StringIO()
    C.write_scores_wide(scores, buf)
    buf.seek(0)
    assert C.read_composite(buf) == C.ScoreVector(
        C.Measure.COMPOSITE, scores.composite.nodes, scores.composite.values)
    long_buf = io.StringIO()
    C.write_scores_long(scores, long_buf)
    assert len(long_buf.getvalue().splitlines()) == 1 + 6 * 3


@st.composite
def rec_lists(draw):
    n = draw(st.integers(2, 8))
    names = [f"n{i}" for i in range(n)]
    lists = {}
    for i, v in enumerate(names):
        others = [u for u in names if u != v]
        picks = draw(st.lists(st.sampled_from(others), unique=True, max_size=n - 1))
        if picks:
            lists[v] = picks
    if not lists:
        lists[names[0]] = [names[1]]
    return lists


@settings(max_examples=60, deadline=None)
@given(rec_lists())
def test_properties(lists):
    g = graph_from_lists(lists)
    scores = C.influence_scores(g)
    pr = scores.raw[C.Measure.PAGERANK].values
    assert pr.min() > 0 and pr.sum() == pytest.approx(1.0, abs=1e-12)
    assert np.allclose(pr, oracle_pagerank(dense(g, True), 0.85), atol=1e-8)
    assert (scores.raw[C.Measure.KATZ].values >= 1.0).all()
    for sv in scores.normalized.values():
        assert sv.values.min() >= 0.0 and sv.values.max() <= 1.0
    comp = scores.composite.values
    assert comp.min() >= 0.0 and comp.max() <= 6.0


@settings(max_examples=40, deadline=None)
@given(rec_lists(), st.randoms(use_true_random=False))
def test_scores_ignore_event_order(lists, rnd):
    items = list(lists.items())
    rnd.shuffle(items)
    a = C.influence_scores(graph_from_lists(lists))
    b = C.influence_scores(graph_from_lists(dict(items)))
    da, db = a.composite.as_dict(), b.composite.as_dict()
    assert da.keys() == db.keys()
    for k in da:
        assert da[k] == pytest.approx(db[k], abs=1e-8)
