"""Extraction job: manifest in, AEMB pair out.

Deterministic given (encoder, audio, segmentation): samples are processed in
manifest order, segments in temporal order, and output writing is
single-threaded.
"""
from __future__ import annotations

import json
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from . import __version__
from .aemb import write_aemb
from .audio import AudioLoadError, load_wav_16k
from .encoders import EncoderError, build_encoder
from .segmentation import DEFAULT_HOP_S, DEFAULT_SEGMENT_S, segment_waveform


class ExtractionError(Exception):
    pass


@dataclass(frozen=True)
class ExtractionJob:
    dataset_dir: Path
    manifest_path: Path
    encoder: str
    checkpoint: Path | None
    out_prefix: Path
    segment_s: float = DEFAULT_SEGMENT_S
    hop_s: float = DEFAULT_HOP_S
    metadata: dict = field(default_factory=dict)


def extract(job: ExtractionJob) -> tuple[Path, Path]:
    """Run the job; returns (aemb manifest path, aemb binary path)."""
    try:
        manifest = json.loads(Path(job.manifest_path).read_text(encoding="utf-8"))
        records = [(str(s["id"]), str(s["path"])) for s in manifest["samples"]]
    except (OSError, json.JSONDecodeError, KeyError, TypeError) as exc:
        raise ExtractionError(f"bad dataset manifest {job.manifest_path}: {exc}") from exc
    if not records:
        raise ExtractionError("dataset manifest lists no samples")

    encoder = build_encoder(job.encoder, job.checkpoint)

    sample_ids: list[str] = []
    counts: list[int] = []
    rows: list[np.ndarray] = []
    padded_ids: set[str] = set()
    dim: int | None = None
    for sid, rel_path in records:
        samples = load_wav_16k(Path(job.dataset_dir) / rel_path)
        segmented = segment_waveform(samples, job.segment_s, job.hop_s)
        if segmented.padded:
            padded_ids.add(sid)
        for segment in segmented.segments:
            vec = encoder(segment)
            if dim is None:
                dim = vec.size
            elif vec.size != dim:
                raise ExtractionError(
                    f"encoder width changed from {dim} to {vec.size} on sample '{sid}'"
                )
            rows.append(vec)
        sample_ids.append(sid)
        counts.append(segmented.segments.shape[0])

    matrix = np.vstack(rows).astype(np.float32)
    binary_path = job.out_prefix.with_suffix(".aemb")
    manifest_path = job.out_prefix.with_suffix(".json")
    binary_path.parent.mkdir(parents=True, exist_ok=True)
    write_aemb(
        binary_path,
        manifest_path,
        sample_ids,
        counts,
        matrix,
        segmentation={
            "segment_s": job.segment_s,
            "hop_s": job.hop_s,
            "encoder": getattr(encoder, "name", job.encoder),
            "sidecar_version": __version__,
            **job.metadata,
        },
        padded_ids=padded_ids,
    )
    return manifest_path, binary_path


__all__ = [
    "AudioLoadError",
    "EncoderError",
    "ExtractionError",
    "ExtractionJob",
    "extract",
]
