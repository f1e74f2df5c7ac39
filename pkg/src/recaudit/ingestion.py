"""Session-log file format, topic filtering and seed pruning.

Log files are JSON Lines, one watch event per line::

    {"profile_id": "p1", "step": 0, "watched_id": "a", "is_seed": true,
     "recommendations": [{"video_id": "b", "rank": 0}, {"video_id": "c", "rank": 1}]}

Ranks are 0-based and must be contiguous. Metadata files are JSON Lines too::

    {"video_id": "a", "title": "...", "duration_s": 120, "view_count": 5, "channel": "..."}
"""

from __future__ import annotations

import dataclasses
import io
import json
import logging
from collections import Counter
from dataclasses import dataclass, field
from typing import IO, Iterable, Mapping, Optional, Union

from .domain import RecEvent, SessionLog, VideoMeta
from .errors import IntegrityError, ParameterError

log = logging.getLogger(__name__)

Source = Union[IO[bytes], IO[str], Iterable[Union[str, bytes]], bytes, str]


@dataclass
class IngestReport:
    events_read: int = 0
    events_accepted: int = 0
    rejected: list[tuple[int, str]] = field(default_factory=list)
    videos_filtered_by_title: int = 0
    events_filtered_by_title: int = 0
    seeds_pruned: int = 0
    metadata_rejected: list[tuple[int, str]] = field(default_factory=list)

    @property
    def events_rejected(self) -> int:
        return len(self.rejected)

    def rejection_reasons(self) -> Counter:
        return Counter(reason.split(":")[0] for _, reason in self.rejected)

    def to_dict(self) -> dict:
        return {
            "events_read": self.events_read,
            "events_accepted": self.events_accepted,
            "events_rejected": self.events_rejected,
            "rejections": [{"line": n, "reason": r} for n, r in self.rejected],
            "videos_filtered_by_title": self.videos_filtered_by_title,
            "events_filtered_by_title": self.events_filtered_by_title,
            "seeds_pruned": self.seeds_pruned,
            "metadata_rejected": len(self.metadata_rejected),
        }


def _lines(source: Source) -> Iterable[str]:
    if isinstance(source, bytes):
        source = io.BytesIO(source)
    elif isinstance(source, str):
        source = io.StringIO(source)
    for raw in source:
        if isinstance(raw, bytes):
            raw = raw.decode("utf-8")
        yield raw


def _parse_event(rec: dict) -> RecEvent:
    if not isinstance(rec, dict):
        raise ValueError("record is not an object")
    for key in ("profile_id", "step", "watched_id", "recommendations"):
        if key not in rec:
            raise ValueError(f"missing field {key!r}")
    step = rec["step"]
    if not isinstance(step, int) or isinstance(step, bool) or step < 0:
        raise ValueError(f"bad step {step!r}")
    recs = rec["recommendations"]
    if not isinstance(recs, list):
        raise ValueError("recommendations is not a list")
    ranked = []
    for item in recs:
        if not isinstance(item, dict) or "video_id" not in item or "rank" not in item:
            raise ValueError("recommendation entry needs video_id and rank")
        ranked.append((int(item["rank"]), str(item["video_id"])))
    ranked.sort()
    if [r for r, _ in ranked] != list(range(len(ranked))):
        raise ValueError("ranks are not contiguous from 0")
    seed = rec.get("is_seed", False)
    if not isinstance(seed, bool):
        raise ValueError(f"bad is_seed {seed!r}")
    try:
        return RecEvent(
            profile_id=str(rec["profile_id"]),
            step=step,
            watched=str(rec["watched_id"]),
            recommendations=tuple(v for _, v in ranked),
            is_seed=seed,
            watch_s=None if rec.get("watch_s") is None else float(rec["watch_s"]),
        )
    except IntegrityError as exc:
        raise ValueError(str(exc)) from None


def parse_metadata(source: Source, report: Optional[IngestReport] = None) -> dict[str, VideoMeta]:
    meta = {}
    for lineno, line in enumerate(_lines(source), 1):
        if not line.strip():
            continue
        try:
            m = VideoMeta.from_record(json.loads(line))
        except (ValueError, KeyError, TypeError) as exc:
            log.warning("metadata line %d rejected: %s", lineno, exc)
            if report is not None:
                report.metadata_rejected.append((lineno, str(exc)))
            continue
        meta[m.id] = m
    return meta


def parse_session_log(
    source: Source,
    metadata: Optional[Mapping[str, VideoMeta]] = None,
    profile_id: Optional[str] = None,
    report: Optional[IngestReport] = None,
) -> SessionLog:
    """Read one profile's log.

    Malformed lines are rejected and recorded in ``report``. A video watched
    twice is fatal, since it breaks the one-list-per-video assumption.
    If ``profile_id`` is None the first accepted record fixes it and lines
    for other profiles are rejected.
    """
    report = report if report is not None else IngestReport()
    events: list[RecEvent] = []
    watched_at: dict[str, int] = {}
    for lineno, line in enumerate(_lines(source), 1):
        if not line.strip():
            continue
        report.events_read += 1
        try:
            ev = _parse_event(json.loads(line))
        except (ValueError, TypeError) as exc:
            reason = f"malformed: {exc}"
            log.warning("line %d rejected: %s", lineno, reason)
            report.rejected.append((lineno, reason))
            continue
        if profile_id is None:
            profile_id = ev.profile_id
        if ev.profile_id != profile_id:
            report.rejected.append((lineno, f"profile mismatch: {ev.profile_id} != {profile_id}"))
            continue
        if events and ev.step <= events[-1].step:
            report.rejected.append((lineno, f"step order: {ev.step} after {events[-1].step}"))
            continue
        if ev.watched in watched_at:
            raise IntegrityError(
                f"line {lineno}: video {ev.watched} already watched at line "
                f"{watched_at[ev.watched]} (no-rewatch rule)"
            )
        watched_at[ev.watched] = lineno
        events.append(ev)
        report.events_accepted += 1
    return SessionLog(profile_id or "", tuple(events), dict(metadata or {}))


def write_session_log(slog: SessionLog, fh: IO[str]) -> None:
    for ev in slog.events:
        fh.write(json.dumps(ev.to_record(), ensure_ascii=False) + "\n")


def write_metadata(metadata: Mapping[str, VideoMeta], fh: IO[str]) -> None:
    for vid in sorted(metadata):
        fh.write(json.dumps(metadata[vid].to_record(), ensure_ascii=False) + "\n")


def _title_match(slog: SessionLog, keyword: str, strict: bool):
    needle = keyword.casefold()
    cache: dict[str, bool] = {}

    def ok(vid: str) -> bool:
        if vid not in cache:
            meta = slog.metadata.get(vid)
            if meta is None or meta.title is None:
                cache[vid] = not strict
            else:
                cache[vid] = needle in meta.title.casefold()
        return cache[vid]

    return ok, cache


def filter_topic(
    slog: SessionLog,
    keyword: str,
    strict: bool = False,
    report: Optional[IngestReport] = None,
) -> SessionLog:
    """Keep only videos whose title contains ``keyword`` (case-folded substring).

    Off-topic videos vanish from every recommendation list (surviving ranks
    are re-compacted) and events watching an off-topic video are dropped.
    Videos without a title are kept unless ``strict``.
    """
    if keyword is None:
        raise ParameterError("keyword must be a string")
    ok, cache = _title_match(slog, keyword, strict)
    events = []
    for ev in slog.events:
        if not ok(ev.watched):
            if report is not None:
                report.events_filtered_by_title += 1
            continue
        recs = tuple(v for v in ev.recommendations if ok(v))
        events.append(
            dataclasses.replace(ev, recommendations=recs)
            if recs != ev.recommendations
            else ev
        )
    if report is not None:
        report.videos_filtered_by_title += sum(1 for v in cache.values() if not v)
    return slog.replace_events(events)


def prune_unrecommended(slog: SessionLog, report: Optional[IngestReport] = None) -> SessionLog:
    """Drop the events of seed videos that no remaining event recommends.

    Removing one seed can orphan another seed that only it recommended, so
    this repeats until nothing changes.
    """
    events = list(slog.events)
    while True:
        recommended = Counter()
        for ev in events:
            recommended.update(ev.recommendations)
        kept = [ev for ev in events if not ev.is_seed or recommended[ev.watched] > 0]
        if len(kept) == len(events):
            break
        if report is not None:
            report.seeds_pruned += len(events) - len(kept)
        events = kept
    return slog.replace_events(events)


def ingest(
    source: Source,
    metadata: Optional[Mapping[str, VideoMeta]] = None,
    keyword: Optional[str] = None,
    strict_titles: bool = False,
    profile_id: Optional[str] = None,
) -> tuple[SessionLog, IngestReport]:
    """Parse, optionally filter by topic keyword, then prune seeds."""
    report = IngestReport()
    slog = parse_session_log(source, metadata, profile_id=profile_id, report=report)
    if keyword is not None:
        slog = filter_topic(slog, keyword, strict=strict_titles, report=report)
    slog = prune_unrecommended(slog, report=report)
    return slog, report
