"""Command-line entry point: ``recaudit <subcommand> ...``.

Every subcommand writes only inside ``--out-dir``. Exit codes:
0 ok, 3 parse, 4 parameter, 5 integrity, 6 incomplete labels,
7 non-convergence (with --strict), 8 I/O.
"""

from __future__ import annotations

import argparse
import csv
import datetime as _dt
import hashlib
import itertools
import json
import logging
import platform
import sys
from dataclasses import fields
from pathlib import Path
from typing import Any, Optional

import numpy as np
import scipy
import yaml

from . import __version__
from .centrality import SIX, SolverParams, influence_scores, measure_correlation, read_composite
from .centrality import write_scores_long, write_scores_wide
from .domain import SessionLog
from .errors import AuditError, IncompleteLabelsError, ParameterError, ParseError
from .ingestion import IngestReport, filter_topic, parse_metadata, parse_session_log
from .ingestion import prune_unrecommended, write_metadata, write_session_log
from .metrics import BiasReport, compare_rankings, total_bias, write_bias_csv, write_overlap_csv
from .ranking import (
    RankedEntry,
    RankedList,
    class_distribution,
    merge_labels,
    rank_videos,
    read_labeled,
    read_labels,
    read_ranking,
    select_top_percent,
    selection_size,
    write_class_distribution,
    write_labeled,
    write_labels,
    write_ranking,
)
from .recgraph import (
    FORMATS,
    GraphStats,
    assign_weights,
    build_graph,
    export_graph,
    graph_stats,
    parse_json_edgelist,
    write_stats_csv,
)
from .simulator import ProfileSpec, SimConfig, generate_corpus, run_sock_puppet

log = logging.getLogger("recaudit")

EXIT_IO = 8
EXT = {"graphml": "graphml", "json": "json", "dot": "dot"}


# helpers -----------------------------------------------------------------

def _sha256(path: Path) -> str:
    h = hashlib.sha256()
    with open(path, "rb") as fh:
        for chunk in iter(lambda: fh.read(1 << 20), b""):
            h.update(chunk)
    return h.hexdigest()


def _now() -> str:
    return _dt.datetime.now(_dt.timezone.utc).isoformat(timespec="seconds")


class Outputs:
    """Tracks files written under one artifact directory."""

    def __init__(self, root: Path):
        self.root = Path(root)
        self.files: list[Path] = []

    def path(self, *parts: str) -> Path:
        p = self.root.joinpath(*parts)
        p.parent.mkdir(parents=True, exist_ok=True)
        self.files.append(p)
        return p

    def text(self, *parts: str):
        return open(self.path(*parts), "w", encoding="utf-8", newline="")

    def manifest(self, command: str, params: dict, inputs: list, flags: Optional[dict] = None,
                 started: Optional[str] = None) -> Path:
        doc = {
            "tool": "recaudit",
            "version": __version__,
            "command": command,
            "parameters": params,
            "inputs": {str(p): _sha256(Path(p)) for p in inputs},
            "outputs": {
                str(p.relative_to(self.root)): _sha256(p)
                for p in self.files if p.exists()
            },
            "flags": flags or {},
            "environment": {
                "python": platform.python_version(),
                "numpy": np.__version__,
                "scipy": scipy.__version__,
            },
            "started": started,
            "finished": _now(),
        }
        path = self.root / "manifest.json"
        path.write_text(json.dumps(doc, indent=2, sort_keys=True) + "\n", encoding="utf-8")
        return path


def _load_config(path: Optional[str]) -> dict:
    if not path:
        return {}
    try:
        with open(path, encoding="utf-8") as fh:
            cfg = yaml.safe_load(fh) or {}
    except yaml.YAMLError as exc:
        raise ParseError(f"{path}: {exc}") from None
    if not isinstance(cfg, dict):
        raise ParseError(f"{path}: top level must be a mapping")
    cfg["_base"] = str(Path(path).resolve().parent)
    return cfg


def _resolve(cfg: dict, p: str) -> Path:
    path = Path(p)
    return path if path.is_absolute() else Path(cfg.get("_base", ".")) / path


def _solver_params(section: dict) -> SolverParams:
    known = {f.name for f in fields(SolverParams)}
    unknown = set(section) - known
    if unknown:
        raise ParameterError(f"unknown centrality settings: {sorted(unknown)}")
    return SolverParams(**section)


def _read_log(log_path: Path, meta_path: Optional[Path], report: IngestReport,
              profile_id: Optional[str] = None) -> SessionLog:
    meta = {}
    if meta_path is not None:
        with open(meta_path, "rb") as fh:
            meta = parse_metadata(fh, report)
    with open(log_path, "rb") as fh:
        return parse_session_log(fh, meta, profile_id=profile_id, report=report)


def _read_graph(path: Path):
    return parse_json_edgelist(Path(path).read_bytes())


def _write_correlation(scores, fh):
    corr = measure_correlation([scores.raw[m] for m in SIX])
    fh.write(",".join(["measure"] + [m.value for m in SIX]) + "\n")
    for m, row in zip(SIX, corr):
        fh.write(",".join([m.value] + [repr(float(x)) for x in row]) + "\n")


# pipeline ------------------------------------------------------------------

class PipelineConfig:
    """Validated pipeline settings. Everything is checked before any file is written."""

    def __init__(self, cfg: dict, seed: Optional[int] = None, strict: Optional[bool] = None):
        self.raw = cfg
        self.rng_seed = seed if seed is not None else cfg.get("rng_seed")
        self.strict = bool(cfg.get("strict", False)) if strict is None else strict
        ing = cfg.get("ingest", {}) or {}
        self.keyword = ing.get("keyword", "abortion")
        self.strict_titles = bool(ing.get("strict_titles", False))
        gr = cfg.get("graph", {}) or {}
        self.r = float(gr.get("r", 0.9))
        if not 0.0 < self.r < 1.0:
            raise ParameterError(f"graph.r must lie in (0, 1), got {self.r}")
        self.directed_paths = bool(gr.get("directed_paths", True))
        self.path_stats = bool(gr.get("path_stats", True))
        self.export_formats = list(gr.get("export_formats", ["graphml", "json"]))
        for f in self.export_formats:
            if f not in FORMATS:
                raise ParameterError(f"unknown export format {f!r}")
        self.solver = _solver_params(cfg.get("centrality", {}) or {})
        sel = cfg.get("selection", {}) or {}
        self.pct = float(sel.get("pct", 1.0))
        selection_size(1, self.pct)
        cmp_ = cfg.get("compare", {}) or {}
        self.p = float(cmp_.get("p", 0.97))
        self.depth = int(cmp_.get("depth", 1000))
        if not 0.0 < self.p < 1.0 or self.depth < 1:
            raise ParameterError("compare.p must lie in (0, 1) and depth >= 1")
        self.pairs = cmp_.get("pairs")
        self.jaccard = bool(cmp_.get("jaccard", False))
        self.extrapolated = bool(cmp_.get("extrapolated", False))
        self.labels = cfg.get("labels")
        self.label_scheme = cfg.get("label_scheme")

        self.sim = None
        self.inputs = []
        if "simulation" in cfg:
            if self.rng_seed is None:
                raise ParameterError("simulation needs an explicit rng_seed (config or --seed)")
            sim = dict(cfg["simulation"])
            profiles = sim.pop("profiles", None) or [{"profile_id": "profile1"}]
            try:
                self.sim = SimConfig(rng_seed=int(self.rng_seed), **sim)
                self.profiles = [ProfileSpec(**p) for p in profiles]
            except TypeError as exc:
                raise ParameterError(f"simulation config: {exc}") from None
            ids = [p.profile_id for p in self.profiles]
            if len(set(ids)) != len(ids):
                raise ParameterError("duplicate profile ids")
        elif "inputs" in cfg:
            for item in cfg["inputs"]:
                if "profile_id" not in item or "log" not in item:
                    raise ParameterError("each input needs profile_id and log")
                self.inputs.append(item)
            if self.labels is None and not all(i.get("labels") for i in self.inputs):
                raise ParameterError("real inputs need a labels file (global or per input)")
        else:
            raise ParameterError("config needs a 'simulation' or an 'inputs' section")

    def params(self) -> dict:
        d = {
            "rng_seed": self.rng_seed,
            "strict": self.strict,
            "keyword": self.keyword,
            "strict_titles": self.strict_titles,
            "r": self.r,
            "directed_paths": self.directed_paths,
            "centrality": self.solver.to_dict(),
            "pct": self.pct,
            "tie_break": "score desc, video_id asc",
            "p": self.p,
            "depth": self.depth,
            "jaccard": self.jaccard,
            "extrapolated_rbo": self.extrapolated,
        }
        if self.sim is not None:
            d["simulation"] = {
                **{f.name: getattr(self.sim, f.name) for f in fields(SimConfig)},
                "profiles": [
                    {"profile_id": p.profile_id, "training_topics": dict(p.training_topics),
                     "training_watch_count": p.training_watch_count,
                     "query_seed_policy": p.query_seed_policy.value}
                    for p in self.profiles
                ],
            }
            d["simulation"]["class_mix"] = dict(self.sim.class_mix)
            d["simulation"]["class_skew"] = dict(self.sim.class_skew)
        return d


def run_pipeline(pc: PipelineConfig, out_dir: Path, config_path: Optional[str] = None) -> int:
    started = _now()
    out = Outputs(out_dir)
    out.root.mkdir(parents=True, exist_ok=True)
    inputs = [config_path] if config_path else []
    flags: dict[str, Any] = {}

    # 1. session logs and labels
    sessions: dict[str, tuple[Path, Optional[Path]]] = {}
    label_sets: dict[str, dict] = {}
    loaded: dict[Path, dict] = {}

    def labels_from(path_text: str) -> dict:
        path = _resolve(pc.raw, path_text)
        if path not in loaded:
            inputs.append(path)
            with open(path, encoding="utf-8", newline="") as fh:
                loaded[path] = read_labels(fh, pc.label_scheme)[0]
        return loaded[path]

    if pc.sim is not None:
        corpus = generate_corpus(pc.sim)
        with out.text("simulation", "metadata.jsonl") as fh:
            write_metadata(corpus.metadata(), fh)
        with out.text("simulation", "labels.csv") as fh:
            write_labels(corpus.label_map(), fh)
        truth = corpus.label_map() if pc.labels is None else labels_from(pc.labels)
        for spec in pc.profiles:
            slog = run_sock_puppet(spec, corpus, pc.sim)
            path = out.path("simulation", f"{spec.profile_id}.log.jsonl")
            with open(path, "w", encoding="utf-8") as fh:
                write_session_log(slog, fh)
            sessions[spec.profile_id] = (path, out.root / "simulation" / "metadata.jsonl")
            label_sets[spec.profile_id] = truth
    else:
        for item in pc.inputs:
            pid = str(item["profile_id"])
            lp = _resolve(pc.raw, item["log"])
            mp = _resolve(pc.raw, item["metadata"]) if item.get("metadata") else None
            sessions[pid] = (lp, mp)
            inputs += [lp] + ([mp] if mp else [])
            label_sets[pid] = labels_from(item.get("labels") or pc.labels)

    # 2. per-profile graph, scores, ranking, selection
    stats: dict[str, GraphStats] = {}
    rankings = {}
    selections = {}
    for pid, (lp, mp) in sessions.items():
        report = IngestReport()
        slog = _read_log(lp, mp, report, profile_id=pid)
        slog = filter_topic(slog, pc.keyword, strict=pc.strict_titles, report=report)
        slog = prune_unrecommended(slog, report=report)
        with out.text("profiles", pid, "session.jsonl") as fh:
            write_session_log(slog, fh)
        with out.text("profiles", pid, "ingest_report.json") as fh:
            json.dump(report.to_dict(), fh, indent=2)
        g = assign_weights(build_graph(slog), pc.r)
        if g.n_edges == 0:
            raise ParameterError(f"profile {pid}: graph has no edges after ingestion")
        for fmt in pc.export_formats:
            out.path("profiles", pid, f"graph.{EXT[fmt]}").write_bytes(export_graph(g, fmt))
        if pc.path_stats:
            stats[pid] = graph_stats(g, directed=pc.directed_paths)
        scores = influence_scores(g, pc.solver, strict=pc.strict)
        if scores.flags():
            flags[pid] = scores.flags()
        with out.text("profiles", pid, "scores.csv") as fh:
            write_scores_wide(scores, fh)
        with out.text("profiles", pid, "scores_long.csv") as fh:
            write_scores_long(scores, fh)
        if g.n_nodes >= 2:
            with out.text("profiles", pid, "correlation.csv") as fh:
                _write_correlation(scores, fh)
        ranked = rank_videos(scores.composite)
        rankings[pid] = ranked
        with out.text("profiles", pid, "ranking.csv") as fh:
            write_ranking(ranked, fh)
        sel = select_top_percent(ranked, pc.pct)
        selections[pid] = sel
        titles = {v: (m.title or "") for v, m in g.metadata.items()}
        with out.text("profiles", pid, "selection.csv") as fh:
            write_ranking(sel, fh, titles)

    if stats:
        with out.text("stats.csv") as fh:
            write_stats_csv(stats, fh)

    # 3. labels -> bias, class distribution
    gaps = sorted({v for pid, sel in selections.items() for v in sel.video_ids
                   if v not in label_sets[pid]})
    if gaps:
        with out.text("annotation_gaps.csv") as fh:
            fh.write("video_id\n" + "".join(f"{v}\n" for v in gaps))
        out.manifest("pipeline", pc.params(), inputs, flags, started)
        raise IncompleteLabelsError(gaps)
    bias_rows: list[BiasReport] = []
    dists = {}
    for pid, sel in selections.items():
        own = {v: label_sets[pid][v] for v in sel.video_ids}
        lr = merge_labels(sel, own)
        with out.text("profiles", pid, "labeled.csv") as fh:
            write_labeled(lr, fh)
        bias_rows.append(total_bias(lr, pid))
        dists[pid] = class_distribution(lr)
    with out.text("bias.csv") as fh:
        write_bias_csv(bias_rows, fh)
    with out.text("class_distribution.csv") as fh:
        write_class_distribution(dists, fh)

    # 4. profile comparisons
    pairs = pc.pairs or list(itertools.combinations(list(rankings), 2))
    reports = []
    for a, b in pairs:
        if a not in rankings or b not in rankings:
            raise ParameterError(f"compare pair ({a}, {b}) names an unknown profile")
        reports.append(compare_rankings(a, rankings[a].video_ids, b, rankings[b].video_ids,
                                        pc.p, pc.depth, pc.jaccard, pc.extrapolated))
    with out.text("overlap.csv") as fh:
        write_overlap_csv(reports, fh)

    out.manifest("pipeline", pc.params(), inputs, flags, started)
    return 0


# subcommands -------------------------------------------------------------

def cmd_pipeline(args) -> int:
    cfg = _load_config(args.config)
    if not cfg:
        raise ParameterError("pipeline needs --config")
    pc = PipelineConfig(cfg, seed=args.seed, strict=args.strict or None)
    out_dir = args.out_dir or cfg.get("out_dir")
    if not out_dir:
        raise ParameterError("no output directory (--out-dir or out_dir in config)")
    return run_pipeline(pc, Path(out_dir), args.config)


def cmd_simulate(args) -> int:
    cfg = _load_config(args.config)
    seed = args.seed if args.seed is not None else cfg.get("rng_seed")
    if seed is None:
        raise ParameterError("simulate needs an explicit rng_seed (config or --seed)")
    pc = PipelineConfig({**cfg, "rng_seed": seed,
                         "simulation": cfg.get("simulation", {})}, seed=seed)
    out = Outputs(args.out_dir)
    started = _now()
    corpus = generate_corpus(pc.sim)
    with out.text("metadata.jsonl") as fh:
        write_metadata(corpus.metadata(), fh)
    with out.text("labels.csv") as fh:
        write_labels(corpus.label_map(), fh)
    for spec in pc.profiles:
        with out.text(f"{spec.profile_id}.log.jsonl") as fh:
            write_session_log(run_sock_puppet(spec, corpus, pc.sim), fh)
    out.manifest("simulate", pc.params()["simulation"], [args.config] if args.config else [],
                 started=started)
    return 0


def cmd_ingest(args) -> int:
    report = IngestReport()
    slog = _read_log(Path(args.log), Path(args.metadata) if args.metadata else None, report,
                     args.profile)
    if args.keyword is not None:
        slog = filter_topic(slog, args.keyword, strict=args.strict_titles, report=report)
    slog = prune_unrecommended(slog, report=report)
    out = Outputs(args.out_dir)
    with out.text("session.jsonl") as fh:
        write_session_log(slog, fh)
    with out.text("metadata.jsonl") as fh:
        write_metadata(slog.metadata, fh)
    with out.text("ingest_report.json") as fh:
        json.dump(report.to_dict(), fh, indent=2)
    print(json.dumps({k: v for k, v in report.to_dict().items() if k != "rejections"}))
    return 0


def cmd_build(args) -> int:
    report = IngestReport()
    slog = _read_log(Path(args.log), Path(args.metadata) if args.metadata else None, report)
    g = assign_weights(build_graph(slog), args.r)
    out = Outputs(args.out_dir)
    out.path("graph.json").write_bytes(export_graph(g, "json"))
    print(f"{g.n_nodes} nodes, {g.n_edges} edges")
    return 0


def cmd_stats(args) -> int:
    g = _read_graph(args.graph)
    st = graph_stats(g, directed=not args.undirected)
    out = Outputs(args.out_dir)
    with out.text("stats.csv") as fh:
        write_stats_csv({args.name or Path(args.graph).stem: st}, fh)
    print(st)
    return 0


def _add_solver_flags(p):
    p.add_argument("--damping", type=float, default=0.85)
    p.add_argument("--tolerance", type=float, default=1e-10)
    p.add_argument("--max-iterations", type=int, default=1000)
    p.add_argument("--alpha-fraction", type=float, default=0.9)
    p.add_argument("--katz-alpha", type=float, default=None)
    p.add_argument("--katz-beta", type=float, default=1.0)
    p.add_argument("--unweighted", action="append", default=[],
                   choices=["eigen", "pagerank", "katz"],
                   help="use the unweighted adjacency for this measure (repeatable)")
    p.add_argument("--weighted-hits", action="store_true")


def cmd_centrality(args) -> int:
    g = _read_graph(args.graph)
    params = SolverParams(
        damping=args.damping, tolerance=args.tolerance, max_iterations=args.max_iterations,
        alpha_fraction=args.alpha_fraction, katz_alpha=args.katz_alpha, katz_beta=args.katz_beta,
        eigen_weighted="eigen" not in args.unweighted,
        pagerank_weighted="pagerank" not in args.unweighted,
        katz_weighted="katz" not in args.unweighted,
        hits_weighted=args.weighted_hits,
    )
    scores = influence_scores(g, params, strict=args.strict)
    out = Outputs(args.out_dir)
    with out.text("scores.csv") as fh:
        write_scores_wide(scores, fh)
    with out.text("scores_long.csv") as fh:
        write_scores_long(scores, fh)
    if g.n_nodes >= 2:
        with out.text("correlation.csv") as fh:
            _write_correlation(scores, fh)
    for m, why in scores.flags().items():
        print(f"warning: {m}: {why}", file=sys.stderr)
    return 0


def cmd_rank(args) -> int:
    with open(args.scores, encoding="utf-8", newline="") as fh:
        comp = read_composite(fh)
    out = Outputs(args.out_dir)
    with out.text("ranking.csv") as fh:
        write_ranking(rank_videos(comp), fh)
    return 0


def cmd_select(args) -> int:
    with open(args.ranking, encoding="utf-8", newline="") as fh:
        rl = read_ranking(fh)
    titles = None
    if args.graph:
        g = _read_graph(args.graph)
        titles = {v: (m.title or "") for v, m in g.metadata.items()}
    sel = select_top_percent(rl, args.pct)
    out = Outputs(args.out_dir)
    with out.text("selection.csv") as fh:
        write_ranking(sel, fh, titles if titles is not None else {})
    print(f"selected {len(sel)} of {len(rl)}")
    return 0


def _read_selection(path):
    with open(path, encoding="utf-8", newline="") as fh:
        rows = list(csv.DictReader(fh))
    try:
        return RankedList(tuple(RankedEntry(int(r["rank"]), r["video_id"],
                                            float(r["composite_score"])) for r in rows))
    except (KeyError, ValueError) as exc:
        raise ParseError(f"{path}: {exc}") from None


def cmd_merge_labels(args) -> int:
    sel = _read_selection(args.selection)
    with open(args.labels, encoding="utf-8", newline="") as fh:
        labels, _ = read_labels(fh, args.scheme)
    out = Outputs(args.out_dir)
    try:
        lr = merge_labels(sel, labels)
    except IncompleteLabelsError as exc:
        with out.text("annotation_gaps.csv") as fh:
            fh.write("video_id\n" + "".join(f"{v}\n" for v in exc.missing))
        raise
    with out.text("labeled.csv") as fh:
        write_labeled(lr, fh)
    return 0


def cmd_bias(args) -> int:
    with open(args.labeled, encoding="utf-8", newline="") as fh:
        lr = read_labeled(fh, args.scheme)
    rep = total_bias(lr, args.profile or Path(args.labeled).parent.name)
    out = Outputs(args.out_dir)
    with out.text("bias.csv") as fh:
        write_bias_csv([rep], fh)
    print(f"{rep.profile_id}: total bias {rep.total_bias:.4f} over {rep.n} videos")
    return 0


def cmd_compare(args) -> int:
    lists = []
    for d in (args.dir_a, args.dir_b):
        with open(Path(d) / "ranking.csv", encoding="utf-8", newline="") as fh:
            lists.append(read_ranking(fh).video_ids)
    rep = compare_rankings(Path(args.dir_a).name, lists[0], Path(args.dir_b).name, lists[1],
                           args.p, args.depth, args.jaccard, args.extrapolated)
    out = Outputs(args.out_dir)
    with out.text("overlap.csv") as fh:
        write_overlap_csv([rep], fh)
    print(f"oc={rep.oc:.4f} rbo={rep.rbo:.4f}")
    return 0


def cmd_export(args) -> int:
    g = _read_graph(args.graph)
    out = Outputs(args.out_dir)
    out.path(f"graph.{EXT[args.format]}").write_bytes(export_graph(g, args.format))
    return 0


def build_parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--config", help="YAML config file")
    common.add_argument("--out-dir", help="artifact directory")
    common.add_argument("--seed", type=int, default=None, help="override rng_seed")
    common.add_argument("--strict", action="store_true",
                        help="abort on non-converged centrality instead of flagging it")
    common.add_argument("-v", "--verbose", action="store_true")

    parser = argparse.ArgumentParser(prog="recaudit", description=__doc__.splitlines()[0])
    parser.add_argument("--version", action="version", version=__version__)
    sub = parser.add_subparsers(dest="command", required=True)

    def add(name, func, help_):
        p = sub.add_parser(name, parents=[common], help=help_)
        p.set_defaults(func=func)
        return p

    add("pipeline", cmd_pipeline, "run everything from one config file")
    add("simulate", cmd_simulate, "generate a synthetic corpus and sock-puppet logs")

    p = add("ingest", cmd_ingest, "parse, topic-filter and prune a session log")
    p.add_argument("log")
    p.add_argument("--metadata")
    p.add_argument("--keyword", default=None)
    p.add_argument("--strict-titles", action="store_true")
    p.add_argument("--profile", default=None)

    p = add("build", cmd_build, "build the weighted recommendation graph")
    p.add_argument("log")
    p.add_argument("--metadata")
    p.add_argument("--r", type=float, default=0.9)

    p = add("stats", cmd_stats, "node/edge counts, average degree, path length, diameter")
    p.add_argument("graph")
    p.add_argument("--undirected", action="store_true")
    p.add_argument("--name")

    p = add("centrality", cmd_centrality, "six influence measures and the composite")
    p.add_argument("graph")
    _add_solver_flags(p)

    p = add("rank", cmd_rank, "rank videos by composite score")
    p.add_argument("scores", help="wide scores CSV from 'centrality'")

    p = add("select", cmd_select, "keep the top percent of a ranking")
    p.add_argument("ranking")
    p.add_argument("--pct", type=float, default=1.0)
    p.add_argument("--graph", help="graph JSON, for titles")

    p = add("merge-labels", cmd_merge_labels, "join a selection with manual labels")
    p.add_argument("selection")
    p.add_argument("labels")
    p.add_argument("--scheme", choices=["stance", "veracity"], default=None)

    p = add("bias", cmd_bias, "rank-weighted total bias of a labeled selection")
    p.add_argument("labeled")
    p.add_argument("--profile")
    p.add_argument("--scheme", choices=["stance", "veracity"], default=None)

    p = add("compare", cmd_compare, "overlap coefficient and RBO between two profile directories")
    p.add_argument("dir_a")
    p.add_argument("dir_b")
    p.add_argument("--p", type=float, default=0.97)
    p.add_argument("--depth", type=int, default=1000)
    p.add_argument("--jaccard", action="store_true")
    p.add_argument("--extrapolated", action="store_true")

    p = add("export", cmd_export, "export a graph as GraphML, DOT or JSON")
    p.add_argument("graph")
    p.add_argument("--format", choices=list(FORMATS), default="graphml")

    return parser


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING,
                        format="%(levelname)s %(name)s: %(message)s")
    if args.command != "pipeline" and args.command != "simulate" and not args.out_dir:
        args.out_dir = "."
    if args.command == "simulate" and not args.out_dir:
        parser.error("simulate needs --out-dir")
    try:
        return args.func(args)
    except AuditError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return exc.exit_code
    except OSError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_IO


if __name__ == "__main__":
    sys.exit(main())
