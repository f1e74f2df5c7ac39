"""Rank videos by composite influence, cut the top percent, attach manual labels."""

from __future__ import annotations

import csv
import logging
import math
from collections import Counter
from dataclasses import dataclass
from typing import IO, Iterable, Mapping, Optional

from .centrality import ScoreVector
from .domain import Label, SCHEMES, infer_scheme, label_to_score, parse_label, scheme_of
from .errors import IncompleteLabelsError, IntegrityError, ParameterError, ParseError

log = logging.getLogger(__name__)

TIE_BREAK = "score desc, video_id asc"


@dataclass(frozen=True)
class RankedEntry:
    rank: int
    video_id: str
    score: float


@dataclass(frozen=True)
class RankedList:
    entries: tuple[RankedEntry, ...]
    tie_break: str = TIE_BREAK

    def __len__(self):
        return len(self.entries)

    def __iter__(self):
        return iter(self.entries)

    @property
    def video_ids(self) -> list[str]:
        return [e.video_id for e in self.entries]


def rank_videos(composite: ScoreVector) -> RankedList:
    order = sorted(zip(composite.nodes, composite.values.tolist()), key=lambda t: (-t[1], t[0]))
    return RankedList(tuple(RankedEntry(i, v, s) for i, (v, s) in enumerate(order, 1)))


def selection_size(n: int, pct: float) -> int:
    if not 0.0 < pct <= 100.0:
        raise ParameterError(f"pct must lie in (0, 100], got {pct}")
    # round before ceil so 1% of 100 is exactly 1, not 2 from 1.0000000000000002
    return min(n, math.ceil(round(pct * n / 100.0, 9)))


def select_top_percent(rl: RankedList, pct: float = 1.0) -> RankedList:
    """First ceil(pct/100 * N) entries; a tie straddling the cut is not expanded."""
    k = selection_size(len(rl), pct)
    return RankedList(rl.entries[:k], rl.tie_break)


def write_ranking(rl: RankedList, fh: IO[str], titles: Optional[Mapping[str, str]] = None) -> None:
    w = csv.writer(fh, lineterminator="\n")
    if titles is None:
        w.writerow(["rank", "video_id", "composite_score"])
        for e in rl:
            w.writerow([e.rank, e.video_id, repr(e.score)])
    else:
        w.writerow(["rank", "video_id", "title", "composite_score"])
        for e in rl:
            w.writerow([e.rank, e.video_id, titles.get(e.video_id) or "", repr(e.score)])


def read_ranking(fh: IO[str]) -> RankedList:
    entries = []
    for lineno, row in enumerate(csv.DictReader(fh), 2):
        try:
            entries.append(RankedEntry(int(row["rank"]), row["video_id"],
                                       float(row["composite_score"])))
        except (KeyError, TypeError, ValueError) as exc:
            raise ParseError(f"ranking line {lineno}: {exc}") from None
    if [e.rank for e in entries] != list(range(1, len(entries) + 1)):
        raise IntegrityError("ranking ranks are not 1..N")
    return RankedList(tuple(entries))


@dataclass(frozen=True)
class LabeledEntry:
    rank: int
    video_id: str
    label: Label
    bias: int


@dataclass(frozen=True)
class LabeledRanking:
    entries: tuple[LabeledEntry, ...]
    scheme: str

    def __len__(self):
        return len(self.entries)

    def __iter__(self):
        return iter(self.entries)

    @property
    def scores(self) -> list[int]:
        return [e.bias for e in self.entries]


def read_labels(fh: Iterable[str], scheme: Optional[str] = None) -> tuple[dict[str, Label], str]:
    """Parse a ``video_id,label`` CSV. Returns (labels, scheme).

    Without ``scheme`` it is inferred from the label strings.
    """
    reader = csv.reader(fh)
    header = next(reader, None)
    if header is None or [h.strip().lower() for h in header[:2]] != ["video_id", "label"]:
        raise ParseError("label file line 1: header must be video_id,label")
    rows = []
    for lineno, row in enumerate(reader, 2):
        if not row or not any(c.strip() for c in row):
            continue
        if len(row) < 2 or not row[0].strip():
            raise ParseError(f"label file line {lineno}: expected video_id,label")
        rows.append((lineno, row[0].strip(), row[1]))
    if scheme is None:
        scheme = infer_scheme([t for _, _, t in rows]) if rows else "stance"
    if scheme not in SCHEMES:
        raise ParameterError(f"unknown label scheme {scheme!r}")
    labels = {}
    for lineno, vid, text in rows:
        try:
            lab = parse_label(text, scheme)
        except ParseError as exc:
            raise ParseError(f"label file line {lineno}: {exc}") from None
        if vid in labels and labels[vid] != lab:
            raise IntegrityError(f"label file line {lineno}: conflicting labels for {vid}")
        labels[vid] = lab
    return labels, scheme


def write_labels(labels: Mapping[str, Label], fh: IO[str]) -> None:
    w = csv.writer(fh, lineterminator="\n")
    w.writerow(["video_id", "label"])
    for vid in sorted(labels):
        w.writerow([vid, labels[vid].value])


def merge_labels(rl: RankedList, labels: Mapping[str, Label]) -> LabeledRanking:
    """Attach a label to every selected video.

    Any unlabeled selection is fatal (``IncompleteLabelsError`` lists the
    gaps); labels for unselected videos are ignored with a warning.
    """
    schemes = {scheme_of(lab) for lab in labels.values()}
    if len(schemes) > 1:
        raise IntegrityError("labels mix the stance and veracity schemes")
    missing = [e.video_id for e in rl if e.video_id not in labels]
    if missing:
        raise IncompleteLabelsError(missing)
    selected = set(rl.video_ids)
    extra = sum(1 for v in labels if v not in selected)
    if extra:
        log.warning("%d labeled videos are not in the selection; ignored", extra)
    entries = tuple(
        LabeledEntry(e.rank, e.video_id, labels[e.video_id], label_to_score(labels[e.video_id]))
        for e in rl
    )
    scheme = schemes.pop() if schemes else "stance"
    return LabeledRanking(entries, scheme)


def write_labeled(lr: LabeledRanking, fh: IO[str]) -> None:
    w = csv.writer(fh, lineterminator="\n")
    w.writerow(["rank", "video_id", "label", "bias"])
    for e in lr:
        w.writerow([e.rank, e.video_id, e.label.value, e.bias])


def read_labeled(fh: IO[str], scheme: Optional[str] = None) -> LabeledRanking:
    rows = list(csv.DictReader(fh))
    try:
        if scheme is None:
            scheme = infer_scheme([r["label"] for r in rows]) if rows else "stance"
        entries = []
        for r in rows:
            lab = parse_label(r["label"], scheme)
            entries.append(LabeledEntry(int(r["rank"]), r["video_id"], lab, label_to_score(lab)))
    except (KeyError, ValueError) as exc:
        raise ParseError(f"labeled ranking: {exc}") from None
    return LabeledRanking(tuple(entries), scheme)


@dataclass(frozen=True)
class ClassDistribution:
    counts: Mapping[Label, int]
    total: int
    scheme: str

    def fraction(self, label: Label) -> float:
        return self.counts.get(label, 0) / self.total

    @property
    def fractions(self) -> dict[Label, float]:
        return {lab: self.fraction(lab) for lab in SCHEMES[self.scheme]}


def class_distribution(lr: LabeledRanking) -> ClassDistribution:
    if len(lr) == 0:
        raise ParameterError("class distribution of an empty selection")
    counts = Counter(e.label for e in lr)
    return ClassDistribution(dict(counts), len(lr), lr.scheme)


def write_class_distribution(rows: Mapping[str, ClassDistribution], fh: IO[str]) -> None:
    w = csv.writer(fh, lineterminator="\n")
    w.writerow(["profile", "scheme", "label", "count", "fraction"])
    for name, cd in rows.items():
        for lab in SCHEMES[cd.scheme]:
            w.writerow([name, cd.scheme, lab.value, cd.counts.get(lab, 0), repr(cd.fraction(lab))])
