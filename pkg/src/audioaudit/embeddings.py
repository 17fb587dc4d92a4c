"""Embedding interchange: the AEMB binary format, validation, and pooling.

AEMB v1 layout (little-endian throughout):

    bytes 0-3    ASCII magic "AEMB"
    bytes 4-7    version, u32 (= 1)
    bytes 8-15   total segment row count N, u64
    bytes 16-23  embedding width D, u64
    bytes 24-    raw float32 payload, row-major, segments of sample 0 first

Sample identities, their order, and per-sample segment counts live in a JSON
sidecar manifest:

    {"dim": D, "samples": [{"id": "...", "segments": S_i}, ...]}

File-level sets are stored in the same format with one segment per sample.
"""
from __future__ import annotations

import json
import struct
from dataclasses import dataclass
from pathlib import Path

import numpy as np

from .errors import ConsistencyError, DataError, DegenerateSampleError, FormatError, ParameterError
from .manifest import DatasetManifest

AEMB_MAGIC = b"AEMB"
AEMB_VERSION = 1
_HEADER = struct.Struct("<4sIQQ")

NORM_TOLERANCE = 1e-4


@dataclass(frozen=True)
class SegmentEmbeddings:
    """Raw per-segment encoder output, not necessarily normalized."""

    sample_ids: list[str]
    segment_counts: np.ndarray  # int64, one entry per sample, each >= 1
    vectors: np.ndarray  # (sum(segment_counts), dim) float32

    def __post_init__(self) -> None:
        if len(set(self.sample_ids)) != len(self.sample_ids):
            raise ConsistencyError("segment embeddings carry duplicate sample ids")
        if len(self.segment_counts) != len(self.sample_ids):
            raise ConsistencyError("one segment count required per sample id")
        if np.any(self.segment_counts < 1):
            raise ConsistencyError("every sample needs at least one segment")
        if self.vectors.ndim != 2 or self.vectors.dtype != np.float32:
            raise ConsistencyError("segment vectors must be a 2-D float32 matrix")
        if int(self.segment_counts.sum()) != self.vectors.shape[0]:
            raise ConsistencyError(
                f"segment counts sum to {int(self.segment_counts.sum())} "
                f"but matrix has {self.vectors.shape[0]} rows"
            )

    @property
    def dim(self) -> int:
        return self.vectors.shape[1]

    def __len__(self) -> int:
        return len(self.sample_ids)

    def rows_for(self, index: int) -> np.ndarray:
        start = int(self.segment_counts[:index].sum())
        return self.vectors[start : start + int(self.segment_counts[index])]


@dataclass(frozen=True)
class EmbeddingSet:
    """File-level vectors: one L2-normalized float32 row per sample."""

    sample_ids: list[str]
    vectors: np.ndarray  # (n, dim) float32, unit rows

    def __post_init__(self) -> None:
        if len(set(self.sample_ids)) != len(self.sample_ids):
            raise ConsistencyError("embedding set carries duplicate sample ids")
        if self.vectors.ndim != 2 or self.vectors.dtype != np.float32:
            raise ConsistencyError("embedding vectors must be a 2-D float32 matrix")
        if self.vectors.shape[0] != len(self.sample_ids):
            raise ConsistencyError(
                f"{len(self.sample_ids)} ids but {self.vectors.shape[0]} vector rows"
            )
        if not np.all(np.isfinite(self.vectors)):
            raise DataError("embedding set contains NaN or Inf entries")
        norms = np.linalg.norm(self.vectors.astype(np.float64), axis=1)
        bad = np.nonzero(np.abs(norms - 1.0) > NORM_TOLERANCE)[0]
        if bad.size:
            raise DataError(
                f"row for sample '{self.sample_ids[int(bad[0])]}' has norm "
                f"{norms[int(bad[0])]:.6f}, expected 1.0 +- {NORM_TOLERANCE}"
            )

    @property
    def dim(self) -> int:
        return self.vectors.shape[1]

    def __len__(self) -> int:
        return len(self.sample_ids)

    def index_of(self, sample_id: str) -> int:
        try:
            return self._id_index[sample_id]
        except AttributeError:
            index = {sid: i for i, sid in enumerate(self.sample_ids)}
            object.__setattr__(self, "_id_index", index)
            return index[sample_id]


def write_segment_embeddings(
    segs: SegmentEmbeddings, manifest_path: str | Path, binary_path: str | Path
) -> None:
    """Write an AEMB binary plus its JSON sidecar. Floats are preserved exactly."""
    total_rows = segs.vectors.shape[0]
    header = _HEADER.pack(AEMB_MAGIC, AEMB_VERSION, total_rows, segs.dim)
    payload = np.ascontiguousarray(segs.vectors, dtype="<f4").tobytes()
    Path(binary_path).write_bytes(header + payload)
    manifest = {
        "dim": segs.dim,
        "samples": [
            {"id": sid, "segments": int(count)}
            for sid, count in zip(segs.sample_ids, segs.segment_counts)
        ],
    }
    Path(manifest_path).write_text(json.dumps(manifest, indent=2) + "\n", encoding="utf-8")


def load_segment_embeddings(
    manifest_path: str | Path,
    binary_path: str | Path,
    dataset_manifest: DatasetManifest | None = None,
) -> SegmentEmbeddings:
    """Load and validate an AEMB file pair.

    When ``dataset_manifest`` is given, the embedding ids must equal the
    manifest ids as a set.
    """
    manifest_path = Path(manifest_path)
    binary_path = Path(binary_path)
    try:
        meta = json.loads(manifest_path.read_text(encoding="utf-8"))
        dim = int(meta["dim"])
        sample_ids = [str(s["id"]) for s in meta["samples"]]
        counts = np.array([int(s["segments"]) for s in meta["samples"]], dtype=np.int64)
    except (OSError, json.JSONDecodeError, KeyError, TypeError, ValueError) as exc:
        raise FormatError(f"bad AEMB manifest {manifest_path}: {exc}") from exc

    blob = binary_path.read_bytes()
    if len(blob) < _HEADER.size:
        raise FormatError(f"{binary_path}: truncated header ({len(blob)} bytes)")
    magic, version, n_rows, bin_dim = _HEADER.unpack_from(blob)
    if magic != AEMB_MAGIC:
        raise FormatError(f"{binary_path}: bad magic {magic!r}, expected {AEMB_MAGIC!r}")
    if version != AEMB_VERSION:
        raise FormatError(f"{binary_path}: unsupported version {version}")
    if bin_dim != dim:
        raise FormatError(f"{binary_path}: binary dim {bin_dim} != manifest dim {dim}")
    declared_rows = int(counts.sum())
    if n_rows != declared_rows:
        raise FormatError(
            f"{binary_path}: header declares {n_rows} rows, manifest sums to {declared_rows}"
        )
    expected_bytes = declared_rows * dim * 4
    payload = blob[_HEADER.size :]
    if len(payload) != expected_bytes:
        raise FormatError(
            f"{binary_path}: payload is {len(payload)} bytes, "
            f"expected {declared_rows} x {dim} x 4 = {expected_bytes}"
        )
    vectors = np.frombuffer(payload, dtype="<f4").reshape(declared_rows, dim)
    vectors = np.ascontiguousarray(vectors, dtype=np.float32)

    if not np.all(np.isfinite(vectors)):
        bad_row = int(np.nonzero(~np.isfinite(vectors).all(axis=1))[0][0])
        offsets = np.concatenate([[0], np.cumsum(counts)])
        owner = int(np.searchsorted(offsets, bad_row, side="right") - 1)
        raise DataError(
            f"{binary_path}: non-finite value in a segment of sample '{sample_ids[owner]}'"
        )

    segs = SegmentEmbeddings(sample_ids=sample_ids, segment_counts=counts, vectors=vectors)
    if dataset_manifest is not None:
        emb_ids, man_ids = set(sample_ids), set(dataset_manifest.ids)
        if emb_ids != man_ids:
            missing = sorted(man_ids - emb_ids)[:3]
            extra = sorted(emb_ids - man_ids)[:3]
            raise ConsistencyError(
                f"embedding ids do not match dataset manifest "
                f"(missing e.g. {missing}, unexpected e.g. {extra})"
            )
    return segs


def aggregate_mean_pool(segs: SegmentEmbeddings) -> EmbeddingSet:
    """Mean-pool each sample's segments into one vector, then L2-normalize.

    Normalization happens after pooling so all downstream scoring sees one
    canonical unit-sphere geometry.
    """
    pooled = np.empty((len(segs), segs.dim), dtype=np.float64)
    offset = 0
    for i, count in enumerate(segs.segment_counts):
        block = segs.vectors[offset : offset + int(count)].astype(np.float64)
        pooled[i] = block.mean(axis=0)
        offset += int(count)
    norms = np.linalg.norm(pooled, axis=1)
    zero = np.nonzero(norms == 0.0)[0]
    if zero.size:
        raise DegenerateSampleError(
            f"sample '{segs.sample_ids[int(zero[0])]}' pools to the zero vector"
        )
    pooled /= norms[:, None]
    return EmbeddingSet(sample_ids=list(segs.sample_ids), vectors=pooled.astype(np.float32))


def as_segment_embeddings(emb: EmbeddingSet) -> SegmentEmbeddings:
    """View a file-level set as single-segment AEMB content for writing."""
    return SegmentEmbeddings(
        sample_ids=list(emb.sample_ids),
        segment_counts=np.ones(len(emb), dtype=np.int64),
        vectors=emb.vectors,
    )


def class_centroids(num_classes: int, dim: int, seed: int) -> np.ndarray:
    """Deterministic mutually orthonormal class centroids.

    QR-orthonormalizes a seeded Gaussian matrix; works for any dim >= classes.
    """
    if dim < num_classes:
        raise ParameterError(f"dim {dim} must be >= num_classes {num_classes}")
    rng = np.random.default_rng(seed)
    gauss = rng.standard_normal((dim, num_classes))
    q, _ = np.linalg.qr(gauss)
    return q.T  # (num_classes, dim), orthonormal rows


def gen_synthetic_embeddings(
    num_classes: int, per_class: int, dim: int, intra_spread: float, seed: int
) -> tuple[EmbeddingSet, np.ndarray]:
    """Deterministic clustered unit vectors for testing and benchmarks.

    Samples are normalize(centroid + Gaussian(0, intra_spread * I)). Returns
    the embedding set and the per-sample class labels.
    """
    if num_classes * per_class < 2:
        raise ParameterError("need at least two samples in total")
    centroids = class_centroids(num_classes, dim, seed)
    rng = np.random.default_rng(seed)
    n = num_classes * per_class
    labels = np.repeat(np.arange(num_classes), per_class)
    noise = rng.standard_normal((n, dim)) * intra_spread
    raw = centroids[labels] + noise
    raw /= np.linalg.norm(raw, axis=1)[:, None]
    ids = [f"c{c:03d}s{i:04d}" for c in range(num_classes) for i in range(per_class)]
    return EmbeddingSet(sample_ids=ids, vectors=raw.astype(np.float32)), labels
