"""AEMB v1 writer.

This mirrors the audit toolkit's documented interchange format byte for byte:
magic "AEMB", u32 version 1, u64 total rows, u64 dim (all little-endian),
then row-major float32. Sample order and per-sample segment counts go into
the JSON sidecar, along with the segmentation parameters for provenance.
"""
from __future__ import annotations

import json
import struct
from pathlib import Path

import numpy as np

_HEADER = struct.Struct("<4sIQQ")
MAGIC = b"AEMB"
VERSION = 1


def write_aemb(
    binary_path: str | Path,
    manifest_path: str | Path,
    sample_ids: list[str],
    segment_counts: list[int],
    vectors: np.ndarray,
    segmentation: dict | None = None,
    padded_ids: set[str] | None = None,
) -> None:
    vectors = np.ascontiguousarray(vectors, dtype="<f4")
    if vectors.ndim != 2:
        raise ValueError("expected a 2-D segment matrix")
    total_rows, dim = vectors.shape
    if sum(segment_counts) != total_rows:
        raise ValueError(
            f"segment counts sum to {sum(segment_counts)}, matrix has {total_rows} rows"
        )
    if not np.all(np.isfinite(vectors)):
        raise ValueError("refusing to write non-finite embeddings")

    header = _HEADER.pack(MAGIC, VERSION, total_rows, dim)
    Path(binary_path).write_bytes(header + vectors.tobytes())

    padded_ids = padded_ids or set()
    samples = []
    for sid, count in zip(sample_ids, segment_counts):
        record: dict = {"id": sid, "segments": int(count)}
        if sid in padded_ids:
            record["padded"] = True
        samples.append(record)
    meta: dict = {"dim": int(dim), "samples": samples}
    if segmentation:
        meta["segmentation"] = segmentation
    Path(manifest_path).write_text(json.dumps(meta, indent=2) + "\n", encoding="utf-8")
