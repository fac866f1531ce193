"""Dataset manifests: the unit of persistence between pipeline stages.

File format (UTF-8 JSONL):
  line 1   {"format":"corpusforge-manifest-v1","seed":<u64>,"provenance":{...}}
  line 2.. {"video_id":str,"label":str,"clip_start_s":float,"clip_len_s":float}

Serialization is byte-deterministic: fields in the order above, floats in
fixed notation with 6 decimal places.  Clip times are quantized to the same
6 decimal places at construction so that save -> load is lossless.
"""
from __future__ import annotations

import json
from dataclasses import dataclass, field
from pathlib import Path
from typing import Iterable, Sequence

from .records import ValidationError, VideoRecord

FORMAT_TAG = "corpusforge-manifest-v1"

_ROW_FIELDS = {"video_id", "label", "clip_start_s", "clip_len_s"}


def _q(x: float) -> float:
    # 6-decimal quantization; normalizes -0.0 so formatting is stable
    v = round(float(x), 6)
    return 0.0 if v == 0.0 else v


@dataclass(frozen=True)
class ManifestRow:
    video_id: str
    label: str
    clip_start_s: float
    clip_len_s: float

    def __post_init__(self) -> None:
        object.__setattr__(self, "clip_start_s", _q(self.clip_start_s))
        object.__setattr__(self, "clip_len_s", _q(self.clip_len_s))
        if self.clip_start_s < 0:
            raise ValidationError(
                f"row for video {self.video_id!r}: clip_start_s < 0"
            )
        if self.clip_len_s <= 0:
            raise ValidationError(
                f"row for video {self.video_id!r}: clip_len_s must be > 0"
            )


@dataclass
class DatasetManifest:
    rows: list[ManifestRow] = field(default_factory=list)
    provenance: dict[str, str] = field(default_factory=dict)
    seed: int = 0

    def __post_init__(self) -> None:
        if not 0 <= self.seed < 2**64:
            raise ValidationError("seed must fit in u64")
        seen: set[tuple[str, float]] = set()
        for row in self.rows:
            key = (row.video_id, row.clip_start_s)
            if key in seen:
                raise ValidationError(
                    f"duplicate row (video {row.video_id!r}, start {row.clip_start_s})"
                )
            seen.add(key)

    def __eq__(self, other: object) -> bool:
        if not isinstance(other, DatasetManifest):
            return NotImplemented
        return (
            self.rows == other.rows
            and self.provenance == other.provenance
            and self.seed == other.seed
        )

    def validate_against(self, corpus: Sequence[VideoRecord]) -> None:
        """Check that every row fits inside its referenced video."""
        by_id = {v.id: v for v in corpus}
        for row in self.rows:
            video = by_id.get(row.video_id)
            if video is None:
                raise ValidationError(f"row references unknown video {row.video_id!r}")
            if row.clip_start_s + row.clip_len_s > video.duration_s + 1e-9:
                raise ValidationError(
                    f"row for video {row.video_id!r}: clip "
                    f"[{row.clip_start_s}, {row.clip_start_s + row.clip_len_s}] "
                    f"exceeds duration {video.duration_s}"
                )


def _header_line(m: DatasetManifest) -> str:
    prov = json.dumps(m.provenance, sort_keys=True, separators=(",", ":"), ensure_ascii=False)
    return '{"format":%s,"seed":%d,"provenance":%s}' % (
        json.dumps(FORMAT_TAG),
        m.seed,
        prov,
    )


def _row_line(row: ManifestRow) -> str:
    return '{"video_id":%s,"label":%s,"clip_start_s":%.6f,"clip_len_s":%.6f}' % (
        json.dumps(row.video_id, ensure_ascii=False),
        json.dumps(row.label, ensure_ascii=False),
        row.clip_start_s,
        row.clip_len_s,
    )


def manifest_bytes(m: DatasetManifest) -> bytes:
    """Canonical byte serialization (identical manifests, identical bytes)."""
    lines = [_header_line(m)]
    lines.extend(_row_line(row) for row in m.rows)
    return ("\n".join(lines) + "\n").encode("utf-8")


def save_manifest(
    m: DatasetManifest,
    path: str | Path,
    corpus: Sequence[VideoRecord] | None = None,
) -> None:
    """Write the canonical JSONL; validation runs before any bytes hit disk."""
    if corpus is not None:
        m.validate_against(corpus)
    data = manifest_bytes(m)
    with open(path, "wb") as fh:
        fh.write(data)


def load_manifest(path: str | Path) -> DatasetManifest:
    """Parse a manifest file; unknown fields and malformed rows are rejected."""
    with open(path, "r", encoding="utf-8") as fh:
        lines = fh.read().splitlines()
    if not lines:
        return DatasetManifest(rows=[], provenance={}, seed=0)
    try:
        header = json.loads(lines[0])
    except json.JSONDecodeError as exc:
        raise ValidationError(f"{path}:1: bad JSON: {exc}") from exc
    if header.get("format") != FORMAT_TAG:
        raise ValidationError(f"{path}:1: unsupported format {header.get('format')!r}")
    unknown = set(header) - {"format", "seed", "provenance"}
    if unknown:
        raise ValidationError(f"{path}:1: unknown header fields {sorted(unknown)}")
    rows: list[ManifestRow] = []
    for lineno, line in enumerate(lines[1:], start=2):
        if not line.strip():
            continue
        try:
            obj = json.loads(line)
        except json.JSONDecodeError as exc:
            raise ValidationError(f"{path}:{lineno}: bad JSON: {exc}") from exc
        unknown = set(obj) - _ROW_FIELDS
        if unknown:
            raise ValidationError(f"{path}:{lineno}: unknown fields {sorted(unknown)}")
        missing = _ROW_FIELDS - set(obj)
        if missing:
            raise ValidationError(f"{path}:{lineno}: missing fields {sorted(missing)}")
        try:
            rows.append(
                ManifestRow(
                    video_id=obj["video_id"],
                    label=obj["label"],
                    clip_start_s=float(obj["clip_start_s"]),
                    clip_len_s=float(obj["clip_len_s"]),
                )
            )
        except ValidationError as exc:
            raise ValidationError(f"{path}:{lineno}: {exc}") from exc
    return DatasetManifest(
        rows=rows,
        provenance=dict(header.get("provenance", {})),
        seed=int(header.get("seed", 0)),
    )


def rows_for(
    videos: Iterable[VideoRecord],
    label_of: dict[str, str],
    window_of: dict[str, tuple[float, float]] | None = None,
) -> list[ManifestRow]:
    """Build rows for videos with assigned labels and optional clip windows.

    Without a window the row covers the whole video.
    """
    rows = []
    for v in videos:
        if window_of is not None and v.id in window_of:
            start, length = window_of[v.id]
        else:
            start, length = 0.0, v.duration_s
        rows.append(ManifestRow(v.id, label_of[v.id], start, length))
    return rows
