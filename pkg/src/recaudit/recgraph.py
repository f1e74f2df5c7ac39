"""Directed recommendation graph with geometric rank weights.

An edge ``A -> B`` means B appeared in the list shown while A was playing.
Edge weight models the chance of clicking B next: for a list of length n,
rank j gets ``(1 - r) / (1 - r**n) * r**j``.
"""

from __future__ import annotations

import csv
import json
import math
import xml.etree.ElementTree as ET
from dataclasses import dataclass, field
from typing import Mapping

import numpy as np
import scipy.sparse as sp
from scipy.sparse import csgraph

from .domain import SessionLog, VideoMeta
from .errors import IntegrityError, ParameterError, ParseError

FORMATS = ("graphml", "json", "dot")


def _frozen(a, dtype):
    a = np.asarray(a, dtype=dtype)
    a.setflags(write=False)
    return a


@dataclass(frozen=True, eq=False)
class RecGraph:
    """Nodes are indexed in first-appearance order; edges keep log order."""

    nodes: tuple[str, ...]
    src: np.ndarray
    dst: np.ndarray
    rank: np.ndarray
    weight: np.ndarray
    metadata: Mapping[str, VideoMeta] = field(default_factory=dict)

    def __post_init__(self):
        object.__setattr__(self, "nodes", tuple(self.nodes))
        object.__setattr__(self, "src", _frozen(self.src, np.int64))
        object.__setattr__(self, "dst", _frozen(self.dst, np.int64))
        object.__setattr__(self, "rank", _frozen(self.rank, np.int64))
        object.__setattr__(self, "weight", _frozen(self.weight, np.float64))
        if len(set(self.nodes)) != len(self.nodes):
            raise IntegrityError("duplicate node ids")
        m = len(self.src)
        if not (len(self.dst) == len(self.rank) == len(self.weight) == m):
            raise IntegrityError("edge arrays differ in length")
        if m and (self.src.min() < 0 or max(self.src.max(), self.dst.max()) >= len(self.nodes)):
            raise IntegrityError("edge endpoint out of range")
        if m and len(set(zip(self.src.tolist(), self.dst.tolist()))) != m:
            raise IntegrityError("parallel edges")

    @property
    def n_nodes(self) -> int:
        return len(self.nodes)

    @property
    def n_edges(self) -> int:
        return len(self.src)

    @property
    def has_weights(self) -> bool:
        return self.n_edges == 0 or not np.isnan(self.weight).any()

    def index(self) -> dict[str, int]:
        return {v: i for i, v in enumerate(self.nodes)}

    def out_degree(self) -> np.ndarray:
        return np.bincount(self.src, minlength=self.n_nodes)

    def adjacency(self, weighted: bool = False) -> sp.csr_matrix:
        """Sparse matrix with ``A[u, v]`` set for edge u -> v."""
        if weighted and not self.has_weights:
            raise ParameterError("graph has no weights; call assign_weights first")
        data = self.weight if weighted else np.ones(self.n_edges)
        n = self.n_nodes
        return sp.csr_matrix((data, (self.src, self.dst)), shape=(n, n))

    def edges(self):
        for s, d, r, w in zip(self.src, self.dst, self.rank, self.weight):
            yield self.nodes[s], self.nodes[d], int(r), float(w)

    def __eq__(self, other):
        if not isinstance(other, RecGraph):
            return NotImplemented
        return (
            self.nodes == other.nodes
            and np.array_equal(self.src, other.src)
            and np.array_equal(self.dst, other.dst)
            and np.array_equal(self.rank, other.rank)
            and np.array_equal(self.weight, other.weight, equal_nan=True)
            and dict(self.metadata) == dict(other.metadata)
        )

    __hash__ = None


def build_graph(slog: SessionLog) -> RecGraph:
    """One node per watched or recommended video, one edge per (watched, recommended) pair.

    Self-recommendations are dropped. A repeated (src, dst) pair keeps its best
    rank and the source's ranks are re-compacted, so they stay 0..n-1.
    Weights start as NaN.
    """
    index: dict[str, int] = {}

    def node(v):
        if v not in index:
            index[v] = len(index)
        return index[v]

    per_source: dict[int, dict[int, int]] = {}
    for ev in slog.events:
        s = node(ev.watched)
        best = per_source.setdefault(s, {})
        for j, v in enumerate(ev.recommendations):
            d = node(v)
            if d == s:
                continue
            if d not in best or j < best[d]:
                best[d] = j
    src, dst, rank = [], [], []
    for s, best in per_source.items():
        for new_rank, (d, _) in enumerate(sorted(best.items(), key=lambda kv: kv[1])):
            src.append(s)
            dst.append(d)
            rank.append(new_rank)
    nodes = tuple(index)
    meta = {v: slog.metadata[v] for v in nodes if v in slog.metadata}
    return RecGraph(nodes, src, dst, rank, np.full(len(src), np.nan), meta)


def geometric_weights(n: int, r: float = 0.9) -> np.ndarray:
    """Click probabilities for ranks 0..n-1 of an n-item list."""
    if not 0.0 < r < 1.0:
        raise ParameterError(f"r must lie in (0, 1), got {r}")
    if n < 1:
        raise ParameterError(f"list length must be >= 1, got {n}")
    return (1.0 - r) / (1.0 - r**n) * r ** np.arange(n, dtype=np.float64)


def assign_weights(g: RecGraph, r: float = 0.9) -> RecGraph:
    if not 0.0 < r < 1.0:
        raise ParameterError(f"r must lie in (0, 1), got {r}")
    out = g.out_degree()
    weight = np.empty(g.n_edges)
    if g.n_edges:
        # ranks per source must be exactly 0..n-1
        rank_sum = np.bincount(g.src, weights=g.rank, minlength=g.n_nodes)
        n_src = out[g.src]
        if (g.rank < 0).any() or (g.rank >= n_src).any():
            raise IntegrityError("rank outside 0..n-1 for its source")
        if not np.array_equal(rank_sum, out * (out - 1) / 2):
            raise IntegrityError("ranks are not contiguous within a source")
        if len(set(zip(g.src.tolist(), g.rank.tolist()))) != g.n_edges:
            raise IntegrityError("repeated rank within a source")
        norm = (1.0 - r) / (1.0 - r ** n_src.astype(np.float64))
        weight = norm * r ** g.rank.astype(np.float64)
    return RecGraph(g.nodes, g.src, g.dst, g.rank, weight, g.metadata)


@dataclass(frozen=True)
class GraphStats:
    node_count: int
    edge_count: int
    avg_degree: float
    avg_path_length: float
    diameter: int

    def row(self, name: str) -> list:
        return [name, self.node_count, self.edge_count, self.avg_degree,
                self.avg_path_length, self.diameter]


STATS_HEADER = ["graph", "nodes", "edges", "avg_degree", "avg_path_length", "diameter"]


def _largest_wcc(g: RecGraph) -> np.ndarray:
    a = g.adjacency()
    _, labels = csgraph.connected_components(a, directed=True, connection="weak")
    counts = np.bincount(labels)
    # ties go to the component containing the lowest node index
    best = labels[np.flatnonzero(counts[labels] == counts.max())[0]]
    return np.flatnonzero(labels == best)


def graph_stats(g: RecGraph, directed: bool = True, chunk: int = 256) -> GraphStats:
    """Counts, |E|/|V|, and hop-count path statistics over the largest weakly connected component.

    Unreachable pairs are ignored. ``directed=False`` measures paths on the
    undirected version of the graph instead.
    """
    if g.n_nodes == 0:
        raise ParameterError("graph_stats needs a non-empty graph")
    keep = _largest_wcc(g)
    a = g.adjacency()[keep][:, keep]
    total = 0.0
    pairs = 0
    diameter = 0
    n = len(keep)
    for start in range(0, n, chunk):
        idx = np.arange(start, min(start + chunk, n))
        d = csgraph.shortest_path(a, method="D", directed=directed, unweighted=True, indices=idx)
        finite = np.isfinite(d) & (d > 0)
        if finite.any():
            vals = d[finite]
            total += float(vals.sum())
            pairs += int(vals.size)
            diameter = max(diameter, int(vals.max()))
    apl = total / pairs if pairs else 0.0
    return GraphStats(g.n_nodes, g.n_edges, g.n_edges / g.n_nodes, apl, diameter)


def write_stats_csv(rows: Mapping[str, GraphStats], fh) -> None:
    w = csv.writer(fh, lineterminator="\n")
    w.writerow(STATS_HEADER)
    for name, st in rows.items():
        w.writerow([name, st.node_count, st.edge_count, repr(st.avg_degree),
                    repr(st.avg_path_length), st.diameter])


# export ------------------------------------------------------------------

def _to_json(g: RecGraph) -> str:
    doc = {
        "directed": True,
        "nodes": [
            g.metadata[v].to_record() if v in g.metadata else {"video_id": v}
            for v in g.nodes
        ],
        "edges": [
            {"source": s, "target": d, "rank": r, "weight": w} for s, d, r, w in g.edges()
        ],
    }
    return json.dumps(doc, ensure_ascii=False, indent=1) + "\n"


def parse_json_edgelist(data) -> RecGraph:
    if isinstance(data, bytes):
        data = data.decode("utf-8")
    try:
        doc = json.loads(data)
        nodes, meta = [], {}
        for rec in doc["nodes"]:
            vid = str(rec["video_id"])
            nodes.append(vid)
            if len(rec) > 1:
                meta[vid] = VideoMeta.from_record(rec)
        index = {v: i for i, v in enumerate(nodes)}
        src = [index[e["source"]] for e in doc["edges"]]
        dst = [index[e["target"]] for e in doc["edges"]]
        rank = [int(e["rank"]) for e in doc["edges"]]
        weight = [math.nan if e["weight"] is None else float(e["weight"]) for e in doc["edges"]]
    except (ValueError, KeyError, TypeError) as exc:
        raise ParseError(f"bad JSON edge list: {exc}") from None
    return RecGraph(tuple(nodes), src, dst, rank, weight, meta)


def _to_graphml(g: RecGraph) -> bytes:
    ns = "http://graphml.graphdrawing.org/xmlns"
    root = ET.Element("graphml", {"xmlns": ns})
    keys = [
        ("title", "node", "string"),
        ("duration_s", "node", "int"),
        ("view_count", "node", "int"),
        ("channel", "node", "string"),
        ("rank", "edge", "int"),
        ("weight", "edge", "double"),
    ]
    for name, domain, typ in keys:
        ET.SubElement(root, "key", {"id": name, "for": domain,
                                    "attr.name": name, "attr.type": typ})
    graph = ET.SubElement(root, "graph", {"id": "G", "edgedefault": "directed"})
    for v in g.nodes:
        el = ET.SubElement(graph, "node", {"id": v})
        m = g.metadata.get(v)
        if m is not None:
            for name, value in (("title", m.title), ("duration_s", m.duration_s),
                                ("view_count", m.view_count), ("channel", m.channel)):
                if value is not None:
                    ET.SubElement(el, "data", {"key": name}).text = str(value)
    for i, (s, d, r, w) in enumerate(g.edges()):
        el = ET.SubElement(graph, "edge", {"id": f"e{i}", "source": s, "target": d})
        ET.SubElement(el, "data", {"key": "rank"}).text = str(r)
        ET.SubElement(el, "data", {"key": "weight"}).text = repr(w)
    ET.indent(root)
    return ET.tostring(root, encoding="utf-8", xml_declaration=True) + b"\n"


def _dot_quote(s: str) -> str:
    return '"' + s.replace("\\", "\\\\").replace('"', '\\"') + '"'


def _to_dot(g: RecGraph) -> str:
    lines = ["digraph recommendations {"]
    for v in g.nodes:
        m = g.metadata.get(v)
        attrs = ""
        if m is not None:
            attrs = (f" [label={_dot_quote(m.title or v)}, views={m.view_count},"
                     f" duration={m.duration_s}]")
        lines.append(f"  {_dot_quote(v)}{attrs};")
    for s, d, r, w in g.edges():
        lines.append(f"  {_dot_quote(s)} -> {_dot_quote(d)} [rank={r}, weight={w!r}];")
    lines.append("}")
    return "\n".join(lines) + "\n"


def export_graph(g: RecGraph, fmt: str = "json") -> bytes:
    fmt = fmt.lower()
    if fmt not in FORMATS:
        raise ParameterError(f"unknown export format {fmt!r}; expected one of {FORMATS}")
    if not g.has_weights:
        raise ParameterError("export needs weights; call assign_weights first")
    if fmt == "graphml":
        return _to_graphml(g)
    if fmt == "dot":
        return _to_dot(g).encode("utf-8")
    return _to_json(g).encode("utf-8")
