import sys
from pathlib import Path

import numpy as np
import pytest

sys.path.insert(0, str(Path(__file__).parent))

from audioaudit.audio import Waveform, write_wav
from audioaudit.embeddings import EmbeddingSet
from audioaudit.manifest import DatasetManifest, SampleRecord


def unit_rows(rows, ids=None) -> EmbeddingSet:
    """Build an EmbeddingSet from arbitrary rows, normalizing in float64."""
    arr = np.asarray(rows, dtype=np.float64)
    arr = arr / np.linalg.norm(arr, axis=1)[:, None]
    if ids is None:
        ids = [f"s{i:03d}" for i in range(arr.shape[0])]
    return EmbeddingSet(sample_ids=list(ids), vectors=arr.astype(np.float32))


def random_embedding_set(n: int, dim: int, seed: int, duplicates: int = 0) -> EmbeddingSet:
    """Seeded random unit vectors, optionally with exact duplicate rows."""
    rng = np.random.default_rng(seed)
    rows = rng.standard_normal((n, dim))
    for d in range(duplicates):
        rows[n - 1 - d] = rows[d]
    return unit_rows(rows)


def build_tone_dataset(root: Path, num_classes: int, per_class: int,
                       duration_s: float = 0.08, name: str = "shaped") -> DatasetManifest:
    """Tiny WAV dataset of spectrally shaped noise.

    Each clip gets an individual random band-level envelope (high clip-to-clip
    variation) plus a boosted class-signature band region, so near-duplicate,
    off-topic, and label-error structure all survive a crude spectral
    featurizer.
    """
    (root / "audio").mkdir(parents=True, exist_ok=True)
    records = []
    idx = 0
    sr = 16000
    n = int(duration_s * sr)
    nbins = n // 2 + 1
    for c in range(num_classes):
        lo = int(nbins * c / num_classes)
        hi = int(nbins * (c + 1) / num_classes)
        for i in range(per_class):
            sid = f"t{c:02d}x{i:03d}"
            path = f"audio/{sid}.wav"
            rng = np.random.default_rng(1000 + idx)
            levels = rng.uniform(0.35, 1.0, 24)
            env = np.repeat(levels, int(np.ceil(nbins / 24)))[:nbins]
            env[lo:hi] *= 4.0
            phases = np.exp(2j * np.pi * rng.random(nbins))
            x = np.fft.irfft(env * phases, n=n)
            x *= 0.15 / np.sqrt(np.mean(np.square(x)))
            write_wav(root / path, Waveform(sr, np.clip(x, -1.0, 1.0)))
            records.append(SampleRecord(sid, path, c, duration_s))
            idx += 1
    manifest = DatasetManifest(name=name,
                               classes=[f"class{c}" for c in range(num_classes)],
                               samples=records)
    manifest.save(root / "manifest.json")
    return manifest


def spectral_embed(root: Path, manifest: DatasetManifest, out_json: Path,
                   out_bin: Path) -> None:
    """Log band-energy featurizer standing in for a real encoder in tests."""
    from audioaudit.audio import read_wav
    from audioaudit.embeddings import SegmentEmbeddings, write_segment_embeddings

    n_bands = 24
    rows = []
    for rec in manifest.samples:
        wave = read_wav(root / rec.path)
        spectrum = np.abs(np.fft.rfft(wave.samples))
        spectrum = spectrum / np.sqrt(np.mean(np.square(spectrum)))
        bands = np.array_split(spectrum, n_bands)
        feat = np.array([float(np.sqrt(np.mean(np.square(b)))) for b in bands])
        rows.append(np.log(feat + 1e-6))
    segs = SegmentEmbeddings(
        sample_ids=[rec.id for rec in manifest.samples],
        segment_counts=np.ones(len(manifest), dtype=np.int64),
        vectors=np.array(rows, dtype=np.float32),
    )
    write_segment_embeddings(segs, out_json, out_bin)


@pytest.fixture
def tone_dataset(tmp_path):
    root = tmp_path / "dataset"
    manifest = build_tone_dataset(root, num_classes=4, per_class=10)
    return root, manifest
