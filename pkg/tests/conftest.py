from __future__ import annotations

import sys
from pathlib import Path

import numpy as np
import pytest

sys.path.insert(0, str(Path(__file__).parent))

from corpusforge.records import LabelKind, LabelSpace, VideoRecord


def corpus_with_counts(
    counts: dict[str, int],
    duration_s: float = 10.0,
    min_count: int = 1,
) -> tuple[list[VideoRecord], LabelSpace]:
    """Synthetic corpus where each video carries exactly its label's hashtag."""
    corpus = []
    for label in sorted(counts):
        for i in range(counts[label]):
            corpus.append(
                VideoRecord(
                    id=f"{label.lower()}-{i:05d}",
                    duration_s=duration_s,
                    hashtags=frozenset({label.lower()}),
                )
            )
    space = LabelSpace(
        name="synthetic",
        kind=LabelKind.SEED,
        entries={label: frozenset({label.lower()}) for label in counts},
        min_count=min_count,
    )
    return corpus, space


def zipf_corpus(
    n_videos: int, n_labels: int, exponent: float, seed: int
) -> tuple[list[VideoRecord], LabelSpace, dict[str, int]]:
    """Zipf-distributed single-label corpus with known ground-truth counts."""
    rng = np.random.default_rng(seed)
    weights = np.array([1.0 / (k + 1) ** exponent for k in range(n_labels)])
    weights /= weights.sum()
    assignment = rng.choice(n_labels, size=n_videos, p=weights)
    truth = {f"label{k:03d}": 0 for k in range(n_labels)}
    corpus = []
    for i, k in enumerate(assignment):
        label = f"label{k:03d}"
        truth[label] += 1
        corpus.append(
            VideoRecord(
                id=f"v{i:06d}",
                duration_s=float(rng.uniform(1.0, 60.0)),
                hashtags=frozenset({label}),
            )
        )
    space = LabelSpace(
        name="zipf",
        kind=LabelKind.SEED,
        entries={f"label{k:03d}": frozenset({f"label{k:03d}"}) for k in range(n_labels)},
        min_count=1,
    )
    return corpus, space, truth


@pytest.fixture
def small_corpus() -> tuple[list[VideoRecord], LabelSpace]:
    return corpus_with_counts({"A": 8, "B": 3, "C": 2})
