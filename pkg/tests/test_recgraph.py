import io
import math
import xml.etree.ElementTree as ET

import networkx as nx
import numpy as np
import pytest

from conftest import graph_from_lists, random_lists
from recaudit.domain import RecEvent, SessionLog, VideoMeta
from recaudit.errors import IntegrityError, ParameterError
from recaudit.recgraph import (
    RecGraph,
    assign_weights,
    build_graph,
    export_graph,
    geometric_weights,
    graph_stats,
    parse_json_edgelist,
    write_stats_csv,
)


def test_weights_two_items():
    w = geometric_weights(2)
    assert w[0] == pytest.approx(0.5263157894736842, abs=1e-15)
    assert w[1] == pytest.approx(0.47368421052631576, abs=1e-15)


def test_weights_eight_items():
    w = geometric_weights(8)
    assert w[0] == pytest.approx(0.17558251562653662, abs=1e-15)
    assert w[7] == pytest.approx(0.08398057291837402, abs=1e-15)


@pytest.mark.parametrize("r", [0.0, 1.0, 1.2, -0.1])
def test_weights_reject_bad_r(r):
    with pytest.raises(ParameterError):
        geometric_weights(3, r)


def test_build_graph_node_order_and_dedup():
    slog = SessionLog("p", [
        RecEvent("p", 0, "a", ("b", "c")),
        RecEvent("p", 1, "c", ("d", "a")),
    ])
    g = assign_weights(build_graph(slog))
    assert g.nodes == ("a", "b", "c", "d")
    assert [(s, d, r) for s, d, r, _ in g.edges()] == [
        ("a", "b", 0), ("a", "c", 1), ("c", "d", 0), ("c", "a", 1)]
    out = np.bincount(g.src, weights=g.weight, minlength=g.n_nodes)
    assert out[[0, 2]] == pytest.approx([1.0, 1.0], abs=1e-15)
    assert out[[1, 3]].tolist() == [0.0, 0.0]


def test_parallel_edges_rejected():
    with pytest.raises(IntegrityError):
        RecGraph(("a", "b"), [0, 0], [1, 1], [0, 1], [0.5, 0.5])


def test_assign_weights_checks_ranks():
    g = RecGraph(("a", "b", "c"), [0, 0], [1, 2], [0, 2], [math.nan, math.nan])
    with pytest.raises(IntegrityError):
        assign_weights(g)


def test_three_cycle_stats():
    g = graph_from_lists({"a": ["b"], "b": ["c"], "c": ["a"]})
    st = graph_stats(g)
    assert (st.node_count, st.edge_count, st.diameter) == (3, 3, 2)
    assert st.avg_degree == 1.0
    assert st.avg_path_length == pytest.approx(1.5)
    buf = io.StringIO()
    write_stats_csv({"p": st}, buf)
    assert buf.getvalue().splitlines()[1] == "p,3,3,1.0,1.5,2"


def _nx_oracle(g, directed):
    G = nx.DiGraph() if directed else nx.Graph()
    G.add_nodes_from(g.nodes)
    G.add_edges_from((s, d) for s, d, _, _ in g.edges())
    comp = max(nx.weakly_connected_components(G) if directed
                else nx.connected_components(G), key=len)
    H = G.subgraph(comp)
    dists = [d for u, row in nx.all_pairs_shortest_path_length(H) for v, d in row.items() if u != v]
    return sum(dists) / len(dists), max(dists)


@pytest.mark.parametrize("directed", [True, False])
def test_path_stats_match_networkx(rng, directed):
    for _ in range(30):
        lists = random_lists(rng, int(rng.integers(3, 15)), p_edge=0.2)
        if not lists:
            continue
        g = graph_from_lists(lists)
        st = graph_stats(g, directed=directed, chunk=4)
        apl, diam = _nx_oracle(g, directed)
        assert st.avg_path_length == pytest.approx(apl, abs=1e-12)
        assert st.diameter == diam


def test_profile1_sized_graph():
    # 6837 videos each listing the next 7 (5328 of them the next 8) cyclically
    n = 6837
    lists = {f"v{i:05d}": [f"v{(i + j) % n:05d}" for j in range(1, (8 if i < 5328 else 7) + 1)]
             for i in range(n)}
    g = graph_from_lists(lists)
    assert (g.n_nodes, g.n_edges) == (6837, 53187)
    assert round(g.n_edges / g.n_nodes, 2) == 7.78


def _small_graph():
    meta = {"a": VideoMeta("a", "Abortion & \"quotes\"", 60, 10, "ch"),
            "b": VideoMeta("b", "Abortion b")}
    slog = SessionLog("p", [RecEvent("p", 0, "a", ("b", "c")),
                            RecEvent("p", 1, "b", ("c",))], meta)
    return assign_weights(build_graph(slog))


def test_graphml_export():
    g = _small_graph()
    root = ET.fromstring(export_graph(g, "graphml"))
    ns = {"g": "http://graphml.graphdrawing.org/xmlns"}
    assert len(root.findall(".//g:node", ns)) == 3
    edges = root.findall(".//g:edge", ns)
    assert len(edges) == 3
    weights = [float(e.find("g:data[@key='weight']", ns).text) for e in edges]
    assert weights == g.weight.tolist()
    G = nx.read_graphml(io.BytesIO(export_graph(g, "graphml")))
    assert G.nodes["a"]["title"] == "Abortion & \"quotes\""


def test_json_round_trip_and_dot():
    g = _small_graph()
    assert parse_json_edgelist(export_graph(g, "json")) == g
    dot = export_graph(g, "dot").decode()
    assert dot.startswith("digraph") and '"a" -> "b"' in dot


def test_export_rejects_unweighted_and_unknown_format():
    g = _small_graph()
    with pytest.raises(ParameterError):
        export_graph(g, "gexf")
    with pytest.raises(ParameterError):
        export_graph(build_graph(SessionLog("p", [RecEvent("p", 0, "a", ("b",))])))
