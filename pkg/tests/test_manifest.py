from __future__ import annotations

import pytest

from corpusforge.manifest import (
    DatasetManifest,
    ManifestRow,
    load_manifest,
    manifest_bytes,
    save_manifest,
)
from corpusforge.records import (
    LabelKind,
    LabelSpace,
    ValidationError,
    VideoRecord,
    label_histogram,
    load_corpus,
    load_label_space,
    save_corpus,
    save_label_space,
)

from conftest import corpus_with_counts, zipf_corpus


def _manifest() -> DatasetManifest:
    rows = [
        ManifestRow("vid-a", "jumping", 0.0, 4.0),
        ManifestRow("vid-b", "jumping", 1.5, 2.25),
        ManifestRow("vid-a", "running", 4.0, 3.0),
    ]
    return DatasetManifest(rows=rows, provenance={"builder": "test"}, seed=42)


def test_empty_file_loads_as_zero_rows(tmp_path):
    path = tmp_path / "empty.jsonl"
    path.write_text("")
    manifest = load_manifest(path)
    assert manifest.rows == []


def test_round_trip_and_byte_stability(tmp_path):
    m = _manifest()
    path = tmp_path / "m.jsonl"
    save_manifest(m, path)
    loaded = load_manifest(path)
    assert loaded == m
    path2 = tmp_path / "m2.jsonl"
    save_manifest(loaded, path2)
    assert path.read_bytes() == path2.read_bytes()


def test_two_saves_identical_bytes():
    m = _manifest()
    assert manifest_bytes(m) == manifest_bytes(_manifest())


def test_zero_row_manifest_is_header_only(tmp_path):
    path = tmp_path / "empty.jsonl"
    save_manifest(DatasetManifest(seed=7), path)
    lines = path.read_text().splitlines()
    assert len(lines) == 1
    assert '"format":"corpusforge-manifest-v1"' in lines[0]


def test_negative_clip_start_rejected(tmp_path):
    path = tmp_path / "bad.jsonl"
    good = manifest_bytes(_manifest()).decode()
    bad = good.replace('"clip_start_s":1.500000', '"clip_start_s":-1.000000')
    path.write_text(bad)
    with pytest.raises(ValidationError, match="clip_start_s"):
        load_manifest(path)


def test_unknown_fields_rejected(tmp_path):
    path = tmp_path / "bad.jsonl"
    lines = manifest_bytes(_manifest()).decode().splitlines()
    lines[1] = lines[1][:-1] + ',"extra":1}'
    path.write_text("\n".join(lines) + "\n")
    with pytest.raises(ValidationError, match="unknown fields"):
        load_manifest(path)


def test_parse_error_carries_line_number(tmp_path):
    path = tmp_path / "bad.jsonl"
    lines = manifest_bytes(_manifest()).decode().splitlines()
    lines[2] = "{not json"
    path.write_text("\n".join(lines) + "\n")
    with pytest.raises(ValidationError, match=":3:"):
        load_manifest(path)


def test_duplicate_video_and_start_rejected():
    rows = [
        ManifestRow("vid-a", "jumping", 0.0, 4.0),
        ManifestRow("vid-a", "running", 0.0, 5.0),
    ]
    with pytest.raises(ValidationError, match="duplicate row"):
        DatasetManifest(rows=rows)


def test_unknown_video_id_with_corpus_rejected(tmp_path):
    corpus = [VideoRecord(id="vid-a", duration_s=10.0, hashtags=frozenset({"x"}))]
    m = DatasetManifest(rows=[ManifestRow("ghost", "x", 0.0, 1.0)])
    with pytest.raises(ValidationError, match="unknown video"):
        save_manifest(m, tmp_path / "m.jsonl", corpus=corpus)
    assert not (tmp_path / "m.jsonl").exists()


def test_clip_containment_checked_against_corpus(tmp_path):
    corpus = [VideoRecord(id="vid-a", duration_s=4.0, hashtags=frozenset({"x"}))]
    m = DatasetManifest(rows=[ManifestRow("vid-a", "x", 2.0, 3.0)])
    with pytest.raises(ValidationError, match="exceeds duration"):
        save_manifest(m, tmp_path / "m.jsonl", corpus=corpus)


def test_float_formatting_is_fixed_six_places(tmp_path):
    m = DatasetManifest(rows=[ManifestRow("v", "l", 1.0 / 3.0, 2.0)], seed=1)
    path = tmp_path / "m.jsonl"
    save_manifest(m, path)
    assert '"clip_start_s":0.333333' in path.read_text()
    assert load_manifest(path) == m  # quantized at construction, lossless on disk


def test_corpus_round_trip(tmp_path):
    corpus, _space = corpus_with_counts({"A": 3, "B": 2}, duration_s=7.5)
    path = tmp_path / "corpus.jsonl"
    save_corpus(corpus, path)
    assert load_corpus(path) == corpus


def test_corpus_duplicate_id_rejected(tmp_path):
    path = tmp_path / "corpus.jsonl"
    line = '{"id":"v1","duration_s":5.0,"hashtags":["a"]}\n'
    path.write_text(line + line)
    with pytest.raises(ValidationError, match="duplicate video id"):
        load_corpus(path)


def test_label_space_round_trip(tmp_path):
    _corpus, space = corpus_with_counts({"A": 3, "B": 2})
    path = tmp_path / "space.json"
    save_label_space(space, path)
    loaded = load_label_space(path)
    assert loaded.entries == space.entries
    assert loaded.kind == space.kind


# ---------------------------------------------------------------------------
# label_histogram


def test_histogram_single_label_counts_whole_corpus():
    corpus, space = corpus_with_counts({"A": 5})
    hist = label_histogram(corpus, space)
    assert hist.counts == {"A": 5}


def test_histogram_multi_label_video_counts_twice():
    space = LabelSpace(
        name="s",
        kind=LabelKind.SEED,
        entries={"A": frozenset({"both"}), "B": frozenset({"both"})},
        min_count=1,
    )
    video = VideoRecord(id="v", duration_s=3.0, hashtags=frozenset({"both"}))
    hist = label_histogram([video], space)
    assert hist.counts == {"A": 1, "B": 1}
    assert hist.total == 2  # exceeds corpus size under multi-label matching


def test_histogram_matches_zipf_generator_ground_truth():
    corpus, space, truth = zipf_corpus(1000, 10, 1.0, seed=123)
    hist = label_histogram(corpus, space)
    assert hist.counts == truth
    assert hist.total == len(corpus)


def test_video_record_invariants():
    with pytest.raises(ValidationError):
        VideoRecord(id="v", duration_s=0.0, hashtags=frozenset({"a"}))
    with pytest.raises(ValidationError):
        VideoRecord(id="v", duration_s=1.0, hashtags=frozenset({"has space"}))
    rec = VideoRecord(id="v", duration_s=1.0, hashtags=frozenset({"UPPER"}))
    assert rec.hashtags == frozenset({"upper"})
