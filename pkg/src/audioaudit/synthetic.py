"""Embedding-domain issue planting for encoder-free benchmarks.

Mirrors the WAV-level harness semantics (round(alpha * N) targets, duplicates
added, off-topic replaced, labels flipped) but operates directly on an
EmbeddingSet, so ranking and metrics can be exercised end to end without any
encoder. Ground truth comes back as the same ledger type the WAV harness
writes.
"""
from __future__ import annotations

import numpy as np

from .corruption import CorruptionLedger, LedgerEntry, select_ids
from .embeddings import EmbeddingSet, class_centroids
from .errors import ParameterError


def plant_near_duplicates(
    emb: EmbeddingSet,
    labels: np.ndarray,
    alpha: float,
    seed: int,
    max_perturbation: float = 0.1,
) -> tuple[EmbeddingSet, np.ndarray, CorruptionLedger]:
    """Append perturbed copies of round(alpha * N) samples.

    Each duplicate is normalize(source + delta) with |delta| drawn uniformly
    in (0, max_perturbation]; it carries the source's label.
    """
    targets = select_ids(emb.sample_ids, alpha, seed)
    rng = np.random.default_rng(seed)
    vectors = emb.vectors.astype(np.float64)
    new_rows, new_ids, new_labels, entries = [], [], [], []
    for sid in targets:
        i = emb.index_of(sid)
        delta = rng.standard_normal(emb.dim)
        norm = float(rng.uniform(0.2, 1.0)) * max_perturbation
        delta *= norm / np.linalg.norm(delta)
        dup = vectors[i] + delta
        dup /= np.linalg.norm(dup)
        dup_id = f"{sid}__nd"
        new_rows.append(dup)
        new_ids.append(dup_id)
        new_labels.append(int(labels[i]))
        entries.append(LedgerEntry(dup_id, "ND.embed", {"source_id": sid, "perturbation": norm}))
    out = EmbeddingSet(
        sample_ids=list(emb.sample_ids) + new_ids,
        vectors=np.vstack([vectors, np.array(new_rows)]).astype(np.float32),
    )
    out_labels = np.concatenate([np.asarray(labels), np.array(new_labels, dtype=labels.dtype)])
    entries.sort(key=lambda e: e.sample_id)
    return out, out_labels, CorruptionLedger("ND", alpha, seed, entries)


def plant_off_topic(
    emb: EmbeddingSet,
    labels: np.ndarray,
    alpha: float,
    seed: int,
    centroids: np.ndarray,
) -> tuple[EmbeddingSet, CorruptionLedger]:
    """Replace round(alpha * N) vectors with unit vectors orthogonal to all centroids."""
    num_classes, dim = centroids.shape
    if dim <= num_classes:
        raise ParameterError("off-topic planting needs dim > num_classes")
    targets = select_ids(emb.sample_ids, alpha, seed)
    rng = np.random.default_rng(seed)
    vectors = emb.vectors.astype(np.float64).copy()
    entries = []
    # Project random directions onto the orthogonal complement of the centroids.
    basis = centroids.T  # (dim, classes), orthonormal columns
    for sid in targets:
        i = emb.index_of(sid)
        g = rng.standard_normal(dim)
        g -= basis @ (basis.T @ g)
        g /= np.linalg.norm(g)
        vectors[i] = g
        entries.append(LedgerEntry(sid, "OT.embed", {}))
    out = EmbeddingSet(sample_ids=list(emb.sample_ids), vectors=vectors.astype(np.float32))
    entries.sort(key=lambda e: e.sample_id)
    return out, CorruptionLedger("OT", alpha, seed, entries)


def plant_label_errors(
    emb: EmbeddingSet, labels: np.ndarray, alpha: float, seed: int, num_classes: int
) -> tuple[np.ndarray, CorruptionLedger]:
    """Flip round(alpha * N) labels uniformly to a different class."""
    if num_classes < 2:
        raise ParameterError("label flipping needs at least two classes")
    targets = select_ids(emb.sample_ids, alpha, seed)
    rng = np.random.default_rng(seed)
    out = np.asarray(labels).copy()
    entries = []
    for sid in targets:
        i = emb.index_of(sid)
        old = int(out[i])
        draw = int(rng.integers(num_classes - 1))
        new = draw if draw < old else draw + 1
        out[i] = new
        entries.append(LedgerEntry(sid, "LE.flip", {"old_label": old, "new_label": new}))
    entries.sort(key=lambda e: e.sample_id)
    return out, CorruptionLedger("LE", alpha, seed, entries)


def planted_benchmark(
    num_classes: int,
    per_class: int,
    dim: int,
    intra_spread: float,
    issue_type: str,
    alpha: float,
    seed: int,
) -> tuple[EmbeddingSet, np.ndarray, CorruptionLedger]:
    """Generate a clustered embedding set and plant one issue type into it."""
    from .embeddings import gen_synthetic_embeddings

    emb, labels = gen_synthetic_embeddings(num_classes, per_class, dim, intra_spread, seed)
    if issue_type == "ND":
        emb, labels, ledger = plant_near_duplicates(emb, labels, alpha, seed)
    elif issue_type == "OT":
        centroids = class_centroids(num_classes, dim, seed)
        emb, ledger = plant_off_topic(emb, labels, alpha, seed, centroids)
    elif issue_type == "LE":
        labels, ledger = plant_label_errors(emb, labels, alpha, seed, num_classes)
    else:
        raise ParameterError(f"unknown issue type '{issue_type}'")
    return emb, labels, ledger
