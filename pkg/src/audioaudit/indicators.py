"""Ranked-list indicators over a shared cosine-distance geometry.

Three rankers, one per issue type:

  OT  mean distance to the k nearest neighbors (local isolation)
  ND  nearest-neighbor proximity, per pair and per sample
  LE  nearest same-label vs nearest different-label distance ratio

All scores are monotone "higher = more suspect" and every list is sorted
descending with ties broken by ascending sample id (pairs lexicographically),
so rankings are reproducible byte for byte.
"""
from __future__ import annotations

import csv
import json
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from .embeddings import EmbeddingSet
from .errors import ConsistencyError, ParameterError

ISSUE_TYPES = ("OT", "ND", "LE")

DEFAULT_OT_NEIGHBORS = 10

# Cosine distances live in [0, 2]; allow for float round-off at the edges.
_DISTANCE_SLACK = 1e-9

Subject = str | tuple[str, str]


@dataclass(frozen=True)
class RankedList:
    """Ordered (subject, score) entries for one issue type."""

    issue_type: str
    entries: list[tuple[Subject, float]]
    metadata: dict = field(default_factory=dict)

    def __post_init__(self) -> None:
        if self.issue_type not in ISSUE_TYPES:
            raise ParameterError(f"unknown issue type '{self.issue_type}'")
        scores = [s for _, s in self.entries]
        if any(a < b for a, b in zip(scores, scores[1:])):
            raise ConsistencyError("ranked list scores must be non-increasing")
        subjects = [s for s, _ in self.entries]
        if len(set(subjects)) != len(subjects):
            raise ConsistencyError("ranked list repeats a subject")
        for subj in subjects:
            if isinstance(subj, tuple) and subj[0] > subj[1]:
                raise ConsistencyError(f"pair {subj} is not canonically ordered")

    def __len__(self) -> int:
        return len(self.entries)

    def subjects(self) -> list[Subject]:
        return [s for s, _ in self.entries]

    def scores(self) -> np.ndarray:
        return np.array([s for _, s in self.entries], dtype=np.float64)


@dataclass(frozen=True)
class DistanceMatrix:
    """Symmetric cosine distances d(i, j) = 1 - <e_i, e_j> over unit rows."""

    values: np.ndarray  # (n, n) float64

    def __post_init__(self) -> None:
        v = self.values
        if v.ndim != 2 or v.shape[0] != v.shape[1]:
            raise ConsistencyError("distance matrix must be square")
        if np.any(np.abs(np.diagonal(v)) > _DISTANCE_SLACK):
            raise ConsistencyError("distance matrix diagonal must be zero")
        if np.any(np.abs(v - v.T) > _DISTANCE_SLACK):
            raise ConsistencyError("distance matrix must be symmetric")
        if v.min() < -_DISTANCE_SLACK or v.max() > 2.0 + _DISTANCE_SLACK:
            raise ConsistencyError("cosine distances must lie in [0, 2]")

    @property
    def n(self) -> int:
        return self.values.shape[0]


def pairwise_distances(emb: EmbeddingSet) -> DistanceMatrix:
    """Exact O(N^2) cosine distances in float64.

    Stored rows are float32 and unit only to within 1e-4, so 1 - <e_i, e_j>
    can stray slightly outside [0, 2]; values are clamped back to the
    cosine range.
    """
    vectors = emb.vectors.astype(np.float64)
    gram = vectors @ vectors.T
    dist = np.clip(1.0 - gram, 0.0, 2.0)
    np.fill_diagonal(dist, 0.0)
    return DistanceMatrix(values=dist)


def _sort_entries(pairs: list[tuple[Subject, float]]) -> list[tuple[Subject, float]]:
    # Descending score, ascending subject on ties.
    return sorted(pairs, key=lambda e: (-e[1], e[0]))


def rank_off_topic(
    emb: EmbeddingSet, k: int = DEFAULT_OT_NEIGHBORS, dist: DistanceMatrix | None = None
) -> RankedList:
    """Score each sample by its mean distance to its k nearest neighbors."""
    n = len(emb)
    if not 1 <= k <= n - 1:
        raise ParameterError(f"k must be in [1, {n - 1}], got {k}")
    d = (dist or pairwise_distances(emb)).values
    scores = []
    for i in range(n):
        row = np.delete(d[i], i)
        nearest = np.sort(row)[:k]
        scores.append((emb.sample_ids[i], float(nearest.sum() / k)))
    return RankedList("OT", _sort_entries(scores), metadata={"k": k})


def rank_near_duplicates(
    emb: EmbeddingSet, max_pairs: int | None = None, dist: DistanceMatrix | None = None
) -> tuple[RankedList, RankedList]:
    """Closest pairs and per-sample nearest-neighbor proximity.

    Scores are 1 - d/2 so that exact duplicates score 1.0 and orthogonal
    samples 0.5. Returns (pair list capped at max_pairs, per-sample list).
    """
    n = len(emb)
    if n < 2:
        raise ParameterError("near-duplicate ranking needs at least two samples")
    if max_pairs is None:
        max_pairs = n
    if max_pairs < 1:
        raise ParameterError("max_pairs must be >= 1")
    d = (dist or pairwise_distances(emb)).values
    ids = emb.sample_ids

    pair_entries: list[tuple[Subject, float]] = []
    for i in range(n):
        for j in range(i + 1, n):
            a, b = ids[i], ids[j]
            pair = (a, b) if a < b else (b, a)
            pair_entries.append((pair, 1.0 - d[i, j] / 2.0))
    pair_entries = _sort_entries(pair_entries)[:max_pairs]

    sample_entries: list[tuple[Subject, float]] = []
    for i in range(n):
        nearest = float(np.delete(d[i], i).min())
        sample_entries.append((ids[i], 1.0 - nearest / 2.0))

    pair_list = RankedList("ND", pair_entries, metadata={"granularity": "pair"})
    sample_list = RankedList("ND", _sort_entries(sample_entries), metadata={"granularity": "sample"})
    return pair_list, sample_list


def rank_label_errors(
    emb: EmbeddingSet, labels: np.ndarray, dist: DistanceMatrix | None = None
) -> RankedList:
    """Score samples by d_intra / (d_intra + d_extra) over nearest neighbors.

    d_intra is the distance to the nearest same-label neighbor, d_extra to the
    nearest different-label neighbor. A sample whose class has no other member
    gets d_intra = 2.0 (the cosine maximum) and is flagged in the metadata.
    """
    labels = np.asarray(labels)
    n = len(emb)
    if labels.shape != (n,):
        raise ConsistencyError(f"expected {n} labels, got shape {labels.shape}")
    if len(np.unique(labels)) < 2:
        raise ParameterError("label-error ranking needs at least two distinct classes")
    d = (dist or pairwise_distances(emb)).values
    ids = emb.sample_ids

    entries: list[tuple[Subject, float]] = []
    singletons: list[str] = []
    for i in range(n):
        same = (labels == labels[i]).copy()
        same[i] = False
        if same.any():
            d_intra = float(d[i][same].min())
        else:
            d_intra = 2.0
            singletons.append(ids[i])
        d_extra = float(d[i][labels != labels[i]].min())
        denom = d_intra + d_extra
        score = 0.5 if denom == 0.0 else d_intra / denom
        entries.append((ids[i], score))
    return RankedList("LE", _sort_entries(entries), metadata={"singleton_classes": singletons})


def write_ranked_list(
    ranked: RankedList, jsonl_path: str | Path, csv_path: str | Path | None = None,
    header: dict | None = None,
) -> None:
    """Serialize to JSON lines plus an optional CSV mirror.

    The JSONL carries one `{"rank", "subject", "score"}` object per line; if a
    header dict is given it is written first as `{"header": {...}}`.
    """
    lines = []
    if header is not None:
        lines.append(json.dumps({"header": header}, sort_keys=True))
    for rank, (subject, score) in enumerate(ranked.entries, start=1):
        subj = list(subject) if isinstance(subject, tuple) else subject
        lines.append(json.dumps({"rank": rank, "subject": subj, "score": score}))
    Path(jsonl_path).write_text("\n".join(lines) + "\n", encoding="utf-8")

    if csv_path is not None:
        with open(csv_path, "w", newline="", encoding="utf-8") as fh:
            writer = csv.writer(fh)
            writer.writerow(["rank", "subject", "score"])
            for rank, (subject, score) in enumerate(ranked.entries, start=1):
                subj = "|".join(subject) if isinstance(subject, tuple) else subject
                writer.writerow([rank, subj, repr(score)])


def read_ranked_list(jsonl_path: str | Path, issue_type: str) -> RankedList:
    """Load a JSONL ranking written by :func:`write_ranked_list`."""
    entries: list[tuple[Subject, float]] = []
    metadata: dict = {}
    for line in Path(jsonl_path).read_text(encoding="utf-8").splitlines():
        if not line.strip():
            continue
        obj = json.loads(line)
        if "header" in obj:
            metadata.update(obj["header"])
            continue
        subject = obj["subject"]
        if isinstance(subject, list):
            subject = (subject[0], subject[1])
        entries.append((subject, float(obj["score"])))
    return RankedList(issue_type, entries, metadata=metadata)
