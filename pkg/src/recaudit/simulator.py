"""Synthetic black-box recommender and sock-puppet bots.

The recommender scores every unwatched candidate as

    popularity * class_skew[label] * (1 + affinity_strength * affinity[label]) * similarity

where similarity is ``1 + similarity_bonus`` for candidates sharing the
playing video's label and 1 otherwise. The list is a Plackett-Luce draw
from those scores (Gumbel top-k), so lists vary but favour high scores.
List length is ``1 + Poisson(list_length_mean - 1)``, whose mean is exactly
``list_length_mean``.

Bots follow the audit protocol: optional training watches, seeds from a
search query watched in shuffled order, then breadth-first watching of
on-topic recommendations, never rewatching a video.
"""

from __future__ import annotations

import base64
import hashlib
import math
import zlib
from collections import deque
from dataclasses import dataclass, field
from enum import Enum
from typing import Mapping, Optional, Sequence

import numpy as np

from .domain import (
    SCHEMES,
    Label,
    RecEvent,
    SessionLog,
    VideoMeta,
    infer_scheme,
    label_to_score,
    parse_label,
)
from .errors import ParameterError


class QueryPolicy(str, Enum):
    NEUTRAL = "neutral"
    BIASED = "biased"


@dataclass(frozen=True)
class SimConfig:
    corpus_size: int = 10_000
    class_mix: Mapping[str, float] = field(
        default_factory=lambda: {"pro": 1 / 3, "neutral": 1 / 3, "anti": 1 / 3}
    )
    affinity_strength: float = 0.0
    class_skew: Mapping[str, float] = field(default_factory=dict)
    list_length_mean: float = 8.0
    seed_count: int = 20
    steps: int = 5000
    rng_seed: int = 0
    similarity_bonus: float = 1.0
    popularity_sigma: float = 1.0
    keyword: str = "abortion"
    offtopic_fraction: float = 0.0

    def __post_init__(self):
        if self.corpus_size < 0:
            raise ParameterError("corpus_size must be >= 0")
        if not self.class_mix:
            raise ParameterError("class_mix is empty")
        if any(v < 0 for v in self.class_mix.values()):
            raise ParameterError("class_mix probabilities must be >= 0")
        if abs(sum(self.class_mix.values()) - 1.0) > 1e-9:
            raise ParameterError(f"class_mix sums to {sum(self.class_mix.values())}, not 1")
        scheme = infer_scheme(list(self.class_mix) + list(self.class_skew))
        object.__setattr__(
            self, "class_mix", {parse_label(k, scheme).value: v for k, v in self.class_mix.items()}
        )
        object.__setattr__(
            self, "class_skew", {parse_label(k, scheme).value: v for k, v in self.class_skew.items()}
        )
        if any(v < 0 for v in self.class_skew.values()):
            raise ParameterError("class_skew boosts must be >= 0")
        if self.affinity_strength < 0:
            raise ParameterError("affinity_strength must be >= 0")
        if self.list_length_mean < 1:
            raise ParameterError("list_length_mean must be >= 1")
        if self.seed_count < 0 or self.steps < 0:
            raise ParameterError("seed_count and steps must be >= 0")
        if not 0.0 <= self.offtopic_fraction < 1.0:
            raise ParameterError("offtopic_fraction must lie in [0, 1)")
        if self.popularity_sigma < 0 or self.similarity_bonus < 0:
            raise ParameterError("popularity_sigma and similarity_bonus must be >= 0")

    @property
    def scheme(self) -> str:
        return infer_scheme(list(self.class_mix))

    def skew(self, label: Label) -> float:
        return float(self.class_skew.get(label.value, 1.0))


@dataclass(frozen=True)
class ProfileSpec:
    profile_id: str
    training_topics: Mapping[str, float] = field(default_factory=dict)
    training_watch_count: int = 0
    query_seed_policy: QueryPolicy = QueryPolicy.NEUTRAL

    def __post_init__(self):
        if self.training_watch_count < 0:
            raise ParameterError("training_watch_count must be >= 0")
        if self.training_watch_count > 0 and not any(v > 0 for v in self.training_topics.values()):
            raise ParameterError(f"{self.profile_id}: training needs positive topic weights")
        object.__setattr__(self, "query_seed_policy", QueryPolicy(self.query_seed_policy))


@dataclass(frozen=True, eq=False)
class SyntheticCorpus:
    videos: tuple[VideoMeta, ...]
    labels: tuple[Label, ...]
    popularity: np.ndarray
    scheme: str

    def __len__(self):
        return len(self.videos)

    @property
    def ids(self) -> list[str]:
        return [v.id for v in self.videos]

    def label_map(self) -> dict[str, Label]:
        return {v.id: lab for v, lab in zip(self.videos, self.labels)}

    def metadata(self) -> dict[str, VideoMeta]:
        return {v.id: v for v in self.videos}


@dataclass(frozen=True)
class ProfileState:
    profile_id: str
    affinity: Mapping[Label, float]
    history: tuple[str, ...] = ()
    training_seconds: int = 0


def _rng(*key) -> np.random.Generator:
    words = [k if isinstance(k, int) else zlib.crc32(str(k).encode("utf-8")) for k in key]
    return np.random.default_rng(words)


def _video_id(seed: int, i: int) -> str:
    digest = hashlib.blake2b(f"{seed}:{i}".encode(), digest_size=9).digest()
    return base64.urlsafe_b64encode(digest).decode()[:11]


def generate_corpus(cfg: SimConfig) -> SyntheticCorpus:
    """Videos with i.i.d. labels from ``class_mix`` and log-normal popularity."""
    rng = _rng(cfg.rng_seed, "corpus")
    scheme = cfg.scheme
    names = sorted(cfg.class_mix)
    probs = np.array([cfg.class_mix[k] for k in names])
    n = cfg.corpus_size
    codes = rng.choice(len(names), size=n, p=probs / probs.sum()) if n else np.zeros(0, int)
    popularity = rng.lognormal(0.0, cfg.popularity_sigma, size=n)
    durations = rng.integers(30, 3600, size=n)
    offtopic = rng.random(n) < cfg.offtopic_fraction
    kw = cfg.keyword.strip() or "topic"
    videos, labels = [], []
    ids = set()
    for i in range(n):
        vid = _video_id(cfg.rng_seed, i)
        if vid in ids:  # pragma: no cover - 72-bit digests
            vid = f"{vid}-{i}"
        ids.add(vid)
        title = f"Vaccine news #{i}" if offtopic[i] else f"{kw.capitalize()} talk #{i}"
        videos.append(VideoMeta(vid, title, int(durations[i]),
                                int(round(popularity[i] * 10_000)), f"channel{i % 97}"))
        labels.append(parse_label(names[codes[i]], scheme))
    popularity.setflags(write=False)
    return SyntheticCorpus(tuple(videos), tuple(labels), popularity, scheme)


def train_profile(spec: ProfileSpec, corpus: SyntheticCorpus, rng_seed: int = 0) -> ProfileState:
    """Watch ``training_watch_count`` videos drawn by topic weight; affinity = label shares.

    With no training the affinity is uniform over the scheme's labels.
    """
    all_labels = list(SCHEMES[corpus.scheme])
    k = spec.training_watch_count
    if k > len(corpus):
        raise ParameterError("training_watch_count exceeds corpus size")
    if k == 0:
        return ProfileState(spec.profile_id, {lab: 1.0 / len(all_labels) for lab in all_labels})
    rng = _rng(rng_seed, "train", spec.profile_id)
    topics = {parse_label(t, corpus.scheme): w for t, w in spec.training_topics.items()}
    names = [lab for lab in all_labels if topics.get(lab, 0) > 0]
    weights = np.array([topics[lab] for lab in names], dtype=float)
    pools = {lab: [i for i, l2 in enumerate(corpus.labels) if l2 == lab] for lab in all_labels}
    for lab in pools:
        rng.shuffle(pools[lab])
    leftovers = [i for i in rng.permutation(len(corpus))]
    taken: set[int] = set()
    history = []
    for _ in range(k):
        lab = names[rng.choice(len(names), p=weights / weights.sum())]
        pool = pools[lab]
        while pool and pool[-1] in taken:
            pool.pop()
        if pool:
            idx = pool.pop()
        else:
            while leftovers[-1] in taken:
                leftovers.pop()
            idx = leftovers.pop()
        taken.add(idx)
        history.append(idx)
    counts = {lab: 0 for lab in all_labels}
    for idx in history:
        counts[corpus.labels[idx]] += 1
    affinity = {lab: counts[lab] / k for lab in all_labels}
    return ProfileState(spec.profile_id, affinity, tuple(corpus.videos[i].id for i in history),
                        training_seconds=180 * k)


class _Recommender:
    """Vectorised scoring for one profile over one corpus."""

    def __init__(self, state: ProfileState, corpus: SyntheticCorpus, cfg: SimConfig):
        self.corpus = corpus
        self.cfg = cfg
        self.index = {v.id: i for i, v in enumerate(corpus.videos)}
        kinds = list(SCHEMES[corpus.scheme])
        self.codes = np.array([kinds.index(lab) for lab in corpus.labels], dtype=np.int64)
        per_label = np.array([
            cfg.skew(lab) * (1.0 + cfg.affinity_strength * state.affinity.get(lab, 0.0))
            for lab in kinds
        ])
        with np.errstate(divide="ignore"):
            self.base = np.log(corpus.popularity) + np.log(per_label)[self.codes]
        self.same_label_bonus = math.log1p(cfg.similarity_bonus)

    def list_length(self, rng: np.random.Generator) -> int:
        return 1 + int(rng.poisson(self.cfg.list_length_mean - 1.0))

    def __call__(self, watched: str, rng: np.random.Generator,
                 excluded: Optional[np.ndarray] = None) -> list[str]:
        i = self.index[watched]
        n = len(self.corpus)
        keys = self.base + np.where(self.codes == self.codes[i], self.same_label_bonus, 0.0)
        keys = keys + rng.gumbel(size=n)
        keys[i] = -np.inf
        if excluded is not None:
            keys[excluded] = -np.inf
        k = self.list_length(rng)
        avail = int(np.isfinite(keys).sum())
        k = min(k, avail)
        if k == 0:
            return []
        top = np.argpartition(-keys, k - 1)[:k]
        top = top[np.lexsort((top, -keys[top]))]
        return [self.corpus.videos[j].id for j in top]


def recommend(state: ProfileState, watched: str, corpus: SyntheticCorpus, cfg: SimConfig,
              exclude: Sequence[str] = (), rng: Optional[np.random.Generator] = None) -> list[str]:
    """Ranked recommendations shown while ``watched`` plays.

    Never contains ``watched`` or anything in ``exclude``; empty once
    every candidate is excluded.
    """
    rec = _Recommender(state, corpus, cfg)
    if watched not in rec.index:
        raise ParameterError(f"{watched} is not in the corpus")
    if rng is None:
        rng = _rng(cfg.rng_seed, "recommend", state.profile_id, watched)
    mask = np.zeros(len(corpus), dtype=bool)
    for v in exclude:
        if v in rec.index:
            mask[rec.index[v]] = True
    return rec(watched, rng, mask)


def _search_seeds(spec: ProfileSpec, corpus: SyntheticCorpus, cfg: SimConfig,
                  rng: np.random.Generator) -> list[int]:
    """Seed videos for the profile's query, ordered as a search page would list them."""
    on_topic = np.array([cfg.keyword.casefold() in (v.title or "").casefold()
                         for v in corpus.videos])
    weights = corpus.popularity * on_topic
    if spec.query_seed_policy is QueryPolicy.BIASED:
        boost = np.array([3.0 if label_to_score(lab) > 0 else 1.0 for lab in corpus.labels])
        weights = weights * boost
    avail = int((weights > 0).sum())
    k = min(cfg.seed_count, avail)
    if k == 0:
        return []
    picks = rng.choice(len(corpus), size=k, replace=False, p=weights / weights.sum())
    return sorted(picks.tolist(), key=lambda j: -corpus.popularity[j])


def run_sock_puppet(spec: ProfileSpec, corpus: SyntheticCorpus, cfg: SimConfig,
                    state: Optional[ProfileState] = None) -> SessionLog:
    """One bot session: shuffled seeds, then breadth-first over recommendations.

    Stops after ``cfg.steps`` watches or when nothing is left to watch.
    Recommendation lists are recorded after dropping off-topic titles.
    """
    if cfg.seed_count < 1:
        raise ParameterError("a session needs seed_count >= 1")
    if state is None:
        state = train_profile(spec, corpus, cfg.rng_seed)
    rng = _rng(cfg.rng_seed, "session", spec.profile_id)
    rec = _Recommender(state, corpus, cfg)
    needle = cfg.keyword.casefold()
    on_topic = [needle in (v.title or "").casefold() for v in corpus.videos]

    seeds = _search_seeds(spec, corpus, cfg, rng)
    seed_set = set(seeds)
    order = list(seeds)
    rng.shuffle(order)  # do not follow the search ranking

    watched = np.zeros(len(corpus), dtype=bool)
    queued = set(order)
    queue = deque(order)
    events = []
    while queue and len(events) < cfg.steps:
        j = queue.popleft()
        if watched[j]:
            continue
        watched[j] = True
        vid = corpus.videos[j].id
        recs = [r for r in rec(vid, rng, watched) if on_topic[rec.index[r]]]
        watch_s = round(float(rng.exponential(10.0)), 1)
        events.append(RecEvent(spec.profile_id, len(events), vid, tuple(recs),
                               is_seed=j in seed_set, watch_s=watch_s))
        for r in recs:
            ri = rec.index[r]
            if ri not in queued:
                queued.add(ri)
                queue.append(ri)
    used = {e.watched for e in events}
    for e in events:
        used.update(e.recommendations)
    meta = {v.id: v for v in corpus.videos if v.id in used}
    return SessionLog(spec.profile_id, tuple(events), meta)


def planted_bias_oracle(corpus: SyntheticCorpus, cfg: SimConfig) -> int:
    """Sign the total bias should take given the planted class skew.

    Compares the mean boost of +1-scoring labels with that of -1-scoring labels.
    """
    kinds = list(SCHEMES[corpus.scheme])
    neg = [cfg.skew(lab) for lab in kinds if label_to_score(lab) < 0]
    pos = [cfg.skew(lab) for lab in kinds if label_to_score(lab) > 0]
    diff = np.mean(pos) - np.mean(neg)
    return int(np.sign(diff))
