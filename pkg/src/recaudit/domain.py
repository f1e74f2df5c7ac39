"""Shared vocabulary: videos, watch events, session logs, labels and bias scores."""

from __future__ import annotations

from dataclasses import dataclass, field
from enum import Enum
from types import MappingProxyType
from typing import Mapping, Optional, Sequence, Union

from .errors import IntegrityError, ParameterError, ParseError

VideoId = str


@dataclass(frozen=True)
class VideoMeta:
    id: VideoId
    title: Optional[str] = None
    duration_s: int = 0
    view_count: int = 0
    channel: str = ""

    def __post_init__(self):
        if not self.id:
            raise ParameterError("video id must be non-empty")
        if self.duration_s < 0 or self.view_count < 0:
            raise ParameterError(f"{self.id}: duration_s and view_count must be >= 0")

    def to_record(self) -> dict:
        return {
            "video_id": self.id,
            "title": self.title,
            "duration_s": self.duration_s,
            "view_count": self.view_count,
            "channel": self.channel,
        }

    @classmethod
    def from_record(cls, rec: Mapping) -> "VideoMeta":
        return cls(
            id=str(rec["video_id"]),
            title=rec.get("title"),
            duration_s=int(rec.get("duration_s") or 0),
            view_count=int(rec.get("view_count") or 0),
            channel=str(rec.get("channel") or ""),
        )


@dataclass(frozen=True)
class RecEvent:
    """One watch: the video played and the recommendation list shown beside it.

    ``recommendations[0]`` is the top of the list.
    """

    profile_id: str
    step: int
    watched: VideoId
    recommendations: tuple[VideoId, ...]
    is_seed: bool = False
    watch_s: Optional[float] = None

    def __post_init__(self):
        object.__setattr__(self, "recommendations", tuple(self.recommendations))
        if not self.watched:
            raise IntegrityError("watched video id must be non-empty")
        if self.step < 0:
            raise IntegrityError(f"step must be >= 0, got {self.step}")
        if len(set(self.recommendations)) != len(self.recommendations):
            raise IntegrityError(f"step {self.step}: duplicate ids in recommendation list")
        if self.watched in self.recommendations:
            raise IntegrityError(f"step {self.step}: {self.watched} recommended to itself")
        if any(not r for r in self.recommendations):
            raise IntegrityError(f"step {self.step}: empty recommended id")

    def to_record(self) -> dict:
        rec = {
            "profile_id": self.profile_id,
            "step": self.step,
            "watched_id": self.watched,
            "is_seed": self.is_seed,
            "recommendations": [
                {"video_id": v, "rank": j} for j, v in enumerate(self.recommendations)
            ],
        }
        if self.watch_s is not None:
            rec["watch_s"] = self.watch_s
        return rec


@dataclass(frozen=True)
class SessionLog:
    profile_id: str
    events: tuple[RecEvent, ...] = ()
    metadata: Mapping[VideoId, VideoMeta] = field(default_factory=dict)

    def __post_init__(self):
        object.__setattr__(self, "events", tuple(self.events))
        object.__setattr__(self, "metadata", MappingProxyType(dict(self.metadata)))
        seen = set()
        last_step = -1
        for ev in self.events:
            if ev.watched in seen:
                raise IntegrityError(
                    f"profile {self.profile_id}: video {ev.watched} watched twice"
                )
            seen.add(ev.watched)
            if ev.step <= last_step:
                raise IntegrityError(
                    f"profile {self.profile_id}: step {ev.step} does not increase"
                )
            last_step = ev.step

    def __eq__(self, other):
        if not isinstance(other, SessionLog):
            return NotImplemented
        return (
            self.profile_id == other.profile_id
            and self.events == other.events
            and dict(self.metadata) == dict(other.metadata)
        )

    def __hash__(self):
        return hash((self.profile_id, self.events))

    def video_ids(self) -> set[VideoId]:
        ids = set()
        for ev in self.events:
            ids.add(ev.watched)
            ids.update(ev.recommendations)
        return ids

    @property
    def missing_metadata(self) -> set[VideoId]:
        """Referenced videos with no metadata entry (allowed, but flagged)."""
        return {v for v in self.video_ids() if v not in self.metadata}

    def replace_events(self, events: Sequence[RecEvent]) -> "SessionLog":
        return SessionLog(self.profile_id, tuple(events), self.metadata)


class StanceLabel(Enum):
    PRO = "pro"
    NEUTRAL = "neutral"
    ANTI = "anti"


class VeracityLabel(Enum):
    DEBUNK = "debunk"
    NEUTRAL = "neutral"
    MISINFO = "misinfo"


Label = Union[StanceLabel, VeracityLabel]

SCHEMES: dict[str, type] = {"stance": StanceLabel, "veracity": VeracityLabel}

_SCORES = {
    StanceLabel.PRO: -1,
    StanceLabel.NEUTRAL: 0,
    StanceLabel.ANTI: 1,
    VeracityLabel.DEBUNK: -1,
    VeracityLabel.NEUTRAL: 0,
    VeracityLabel.MISINFO: 1,
}

# accepted spellings beyond the enum values; "deceptive" is treated as misinformation
_ALIASES = {
    "stance": {
        "pro-abortion": "pro",
        "anti-abortion": "anti",
    },
    "veracity": {
        "debunks": "debunk",
        "debunk misinformation": "debunk",
        "debunks misinformation": "debunk",
        "misinformation": "misinfo",
        "deceptive": "misinfo",
    },
}


def label_to_score(label: Label) -> int:
    """-1 for pro/debunk, 0 for neutral, +1 for anti/misinformation."""
    return _SCORES[label]


def scheme_of(label: Label) -> str:
    return "stance" if isinstance(label, StanceLabel) else "veracity"


def parse_label(text: str, scheme: str) -> Label:
    if scheme not in SCHEMES:
        raise ParameterError(f"unknown label scheme {scheme!r}; expected one of {sorted(SCHEMES)}")
    key = text.strip().casefold()
    key = _ALIASES[scheme].get(key, key)
    try:
        return SCHEMES[scheme](key)
    except ValueError:
        raise ParseError(f"label {text!r} is not valid in the {scheme} scheme") from None


def infer_scheme(texts: Sequence[str]) -> str:
    """Pick the scheme that accepts every label string.

    An all-neutral file is ambiguous and defaults to ``stance``.
    """
    fits = []
    for name in SCHEMES:
        try:
            for t in texts:
                parse_label(t, name)
        except ParseError:
            continue
        fits.append(name)
    if not fits:
        raise ParseError("labels mix schemes or contain unknown strings")
    return fits[0]
