"""Core data model: videos, label spaces, and label histograms.

A corpus is a list of :class:`VideoRecord`.  A :class:`LabelSpace` maps each
retained label to its set of relevant hashtags; matching between the two is
exact string equality on lowercased hashtags.
"""
from __future__ import annotations

import enum
import json
from dataclasses import dataclass, field
from pathlib import Path
from typing import Iterable, Mapping


class ValidationError(ValueError):
    """Raised when a record or file violates a structural invariant."""


class LabelKind(enum.Enum):
    SEED = "seed"
    VERB = "verb"
    NOUN = "noun"
    VERB_NOUN = "verbnoun"


@dataclass(frozen=True)
class VideoRecord:
    """One corpus video with its weak supervision (hashtags)."""

    id: str
    duration_s: float
    hashtags: frozenset[str]
    frame_rate: float = 16.0
    source_uri: str | None = None

    def __post_init__(self) -> None:
        if not self.id:
            raise ValidationError("video id must be non-empty")
        if not self.duration_s > 0:
            raise ValidationError(f"video {self.id!r}: duration_s must be > 0")
        if not self.frame_rate > 0:
            raise ValidationError(f"video {self.id!r}: frame_rate must be > 0")
        tags = frozenset(t.lower() for t in self.hashtags)
        for tag in tags:
            if not tag or "#" in tag or any(ch.isspace() for ch in tag):
                raise ValidationError(f"video {self.id!r}: bad hashtag {tag!r}")
        object.__setattr__(self, "hashtags", tags)


@dataclass(frozen=True)
class LabelSpace:
    """Mapping from labels to their relevant-hashtag sets."""

    name: str
    kind: LabelKind
    entries: Mapping[str, frozenset[str]]
    min_count: int = 50

    def __post_init__(self) -> None:
        if self.min_count < 1:
            raise ValidationError("min_count must be >= 1")
        frozen = {}
        for label, tags in self.entries.items():
            tagset = frozenset(tags)
            if not tagset:
                raise ValidationError(f"label {label!r} has no hashtags")
            for tag in tagset:
                if "#" in tag or any(ch.isspace() for ch in tag):
                    raise ValidationError(f"label {label!r}: bad hashtag {tag!r}")
            frozen[label] = tagset
        object.__setattr__(self, "entries", frozen)

    @property
    def labels(self) -> list[str]:
        return sorted(self.entries)

    def match(self, video: VideoRecord) -> list[str]:
        """Labels whose hashtag set intersects the video's tags, sorted."""
        return [l for l in self.labels if self.entries[l] & video.hashtags]


@dataclass
class LabelHistogram:
    """Videos-per-label counts; multi-label videos count toward every match."""

    counts: dict[str, int] = field(default_factory=dict)

    def __post_init__(self) -> None:
        for label, n in self.counts.items():
            if n < 0:
                raise ValidationError(f"negative count for label {label!r}")

    @property
    def total(self) -> int:
        return sum(self.counts.values())

    def nonzero_labels(self) -> list[str]:
        return sorted(l for l, n in self.counts.items() if n > 0)


def label_histogram(corpus: list[VideoRecord], space: LabelSpace) -> LabelHistogram:
    """Count matched videos per label over a corpus.

    A video whose hashtags intersect several labels' sets contributes one
    count to each of them.
    """
    if not corpus:
        raise ValidationError("corpus is empty")
    tag_to_labels: dict[str, list[str]] = {}
    for label, tags in space.entries.items():
        for tag in tags:
            tag_to_labels.setdefault(tag, []).append(label)
    counts = {label: 0 for label in space.entries}
    for video in corpus:
        matched = set()
        for tag in video.hashtags:
            matched.update(tag_to_labels.get(tag, ()))
        for label in matched:
            counts[label] += 1
    return LabelHistogram(counts)


def label_videos(corpus: list[VideoRecord], space: LabelSpace) -> dict[str, list[VideoRecord]]:
    """Per-label lists of matched videos, each list in corpus order."""
    tag_to_labels: dict[str, list[str]] = {}
    for label, tags in space.entries.items():
        for tag in tags:
            tag_to_labels.setdefault(tag, []).append(label)
    out: dict[str, list[VideoRecord]] = {label: [] for label in space.entries}
    for video in corpus:
        matched = set()
        for tag in video.hashtags:
            matched.update(tag_to_labels.get(tag, ()))
        for label in matched:
            out[label].append(video)
    return out


def matches_by_video(
    corpus: list[VideoRecord], space: LabelSpace
) -> dict[str, list[str]]:
    """Sorted matched-label list per video id; unmatched videos are absent.

    Inverted-index variant of LabelSpace.match for whole-corpus scans.
    """
    tag_to_labels: dict[str, list[str]] = {}
    for label, tags in space.entries.items():
        for tag in tags:
            tag_to_labels.setdefault(tag, []).append(label)
    out: dict[str, list[str]] = {}
    for video in corpus:
        matched: set[str] = set()
        for tag in video.hashtags:
            matched.update(tag_to_labels.get(tag, ()))
        if matched:
            out[video.id] = sorted(matched)
    return out


# ---------------------------------------------------------------------------
# Corpus persistence: JSONL, one VideoRecord per line.

_CORPUS_FIELDS = {"id", "duration_s", "hashtags", "frame_rate", "source_uri"}


def load_corpus(path: str | Path) -> list[VideoRecord]:
    """Read a corpus JSONL file; duplicate ids are rejected."""
    records: list[VideoRecord] = []
    seen: set[str] = set()
    with open(path, "r", encoding="utf-8") as fh:
        for lineno, line in enumerate(fh, start=1):
            line = line.strip()
            if not line:
                continue
            try:
                obj = json.loads(line)
            except json.JSONDecodeError as exc:
                raise ValidationError(f"{path}:{lineno}: bad JSON: {exc}") from exc
            unknown = set(obj) - _CORPUS_FIELDS
            if unknown:
                raise ValidationError(f"{path}:{lineno}: unknown fields {sorted(unknown)}")
            try:
                rec = VideoRecord(
                    id=obj["id"],
                    duration_s=float(obj["duration_s"]),
                    hashtags=frozenset(obj.get("hashtags", [])),
                    frame_rate=float(obj.get("frame_rate", 16.0)),
                    source_uri=obj.get("source_uri"),
                )
            except KeyError as exc:
                raise ValidationError(f"{path}:{lineno}: missing field {exc}") from exc
            if rec.id in seen:
                raise ValidationError(f"{path}:{lineno}: duplicate video id {rec.id!r}")
            seen.add(rec.id)
            records.append(rec)
    return records


def save_corpus(corpus: Iterable[VideoRecord], path: str | Path) -> None:
    with open(path, "w", encoding="utf-8") as fh:
        for rec in corpus:
            obj = {
                "id": rec.id,
                "duration_s": rec.duration_s,
                "hashtags": sorted(rec.hashtags),
                "frame_rate": rec.frame_rate,
                "source_uri": rec.source_uri,
            }
            fh.write(json.dumps(obj, sort_keys=True) + "\n")


# ---------------------------------------------------------------------------
# Label-space persistence: one JSON object with sorted keys.


def save_label_space(space: LabelSpace, path: str | Path) -> None:
    obj = {
        "name": space.name,
        "kind": space.kind.value,
        "min_count": space.min_count,
        "entries": {label: sorted(tags) for label, tags in space.entries.items()},
    }
    with open(path, "w", encoding="utf-8") as fh:
        json.dump(obj, fh, sort_keys=True, indent=1)
        fh.write("\n")


def load_label_space(path: str | Path) -> LabelSpace:
    with open(path, "r", encoding="utf-8") as fh:
        obj = json.load(fh)
    try:
        return LabelSpace(
            name=obj["name"],
            kind=LabelKind(obj["kind"]),
            entries={l: frozenset(tags) for l, tags in obj["entries"].items()},
            min_count=int(obj["min_count"]),
        )
    except KeyError as exc:
        raise ValidationError(f"{path}: missing field {exc}") from exc
