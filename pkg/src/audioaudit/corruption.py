"""Synthetic contamination of WAV datasets with ground-truth ledgers.

Selects round(alpha * N) samples and applies one of three corruption families
per issue type:

  ND  additive noise (SNR 10-20 dB), contiguous crop (50-90%), or crop plus
      noise (SNR 5-15 dB); the corrupted copy is ADDED as a new sample so a
      duplicate pair exists in the output dataset
  OT  pure noise matched to source RMS, a length-matched clip from an
      external pool, or the original drowned in noise (SNR -10-0 dB);
      replaces the sample's audio in place, label untouched
  LE  label flipped uniformly to one of the other classes; audio untouched

Every corrupted dataset is a pure function of (input, issue, alpha, seed):
per-file RNG streams are derived from (seed, sample_id) with a keyed hash, so
results do not depend on processing order.
"""
from __future__ import annotations

import hashlib
import json
import shutil
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from .audio import TARGET_RATE, Waveform, add_noise_at_snr, read_wav, rms, white_noise_at_rms, write_wav
from .errors import ConfigError, ParameterError
from .manifest import DatasetManifest, SampleRecord, load_manifest

GENERATOR_VERSION = "audioaudit-corruptor/1"

ND_SNR_RANGE_DB = (10.0, 20.0)
ND_MIXED_SNR_RANGE_DB = (5.0, 15.0)
ND_CROP_FRACTION_RANGE = (0.5, 0.9)
OT_HEAVY_SNR_RANGE_DB = (-10.0, 0.0)

ND_FAMILIES = ("ND.additive", "ND.crop", "ND.mixed")
OT_FAMILIES = ("OT.pure_noise", "OT.external", "OT.heavy_noise")


@dataclass(frozen=True)
class LedgerEntry:
    sample_id: str
    family: str
    params: dict = field(default_factory=dict)


@dataclass(frozen=True)
class CorruptionLedger:
    """Ground truth of what was corrupted, how, and with what parameters."""

    issue_type: str
    alpha: float
    seed: int
    entries: list[LedgerEntry]
    generator_version: str = GENERATOR_VERSION

    def positive_ids(self) -> set[str]:
        return {e.sample_id for e in self.entries}

    def to_dict(self) -> dict:
        return {
            "issue_type": self.issue_type,
            "alpha": self.alpha,
            "seed": self.seed,
            "generator_version": self.generator_version,
            "entries": [
                {"sample_id": e.sample_id, "family": e.family, "params": e.params}
                for e in self.entries
            ],
        }

    def save(self, path: str | Path) -> None:
        Path(path).write_text(
            json.dumps(self.to_dict(), indent=2, sort_keys=True) + "\n", encoding="utf-8"
        )


def load_ledger(path: str | Path) -> CorruptionLedger:
    raw = json.loads(Path(path).read_text(encoding="utf-8"))
    return CorruptionLedger(
        issue_type=raw["issue_type"],
        alpha=float(raw["alpha"]),
        seed=int(raw["seed"]),
        entries=[
            LedgerEntry(sample_id=e["sample_id"], family=e["family"], params=e.get("params", {}))
            for e in raw["entries"]
        ],
        generator_version=raw.get("generator_version", "unknown"),
    )


def selection_count(alpha: float, n: int) -> int:
    if not 0.0 < alpha < 1.0:
        raise ParameterError(f"alpha must be in (0, 1), got {alpha}")
    count = int(round(alpha * n))
    if count == 0:
        raise ParameterError(f"round({alpha} * {n}) selects no samples")
    return count


def select_ids(ids: list[str], alpha: float, seed: int) -> list[str]:
    """Draw exactly round(alpha * N) ids without replacement, seed-deterministic."""
    count = selection_count(alpha, len(ids))
    rng = np.random.default_rng(seed)
    chosen = rng.choice(len(ids), size=count, replace=False)
    return [ids[int(i)] for i in chosen]


def select_targets(manifest: DatasetManifest, alpha: float, seed: int) -> list[str]:
    return select_ids(manifest.ids, alpha, seed)


def per_sample_rng(seed: int, sample_id: str) -> np.random.Generator:
    """RNG stream keyed on (seed, sample_id); independent of processing order."""
    digest = hashlib.blake2b(
        sample_id.encode("utf-8"), key=seed.to_bytes(8, "little"), digest_size=8
    ).digest()
    return np.random.default_rng(int.from_bytes(digest, "little"))


# --- corruption families ------------------------------------------------


def additive_noise(src: Waveform, snr_db: float, rng: np.random.Generator) -> Waveform:
    mixed, _ = add_noise_at_snr(src.samples, rng, snr_db)
    return Waveform(sample_rate=src.sample_rate, samples=mixed)


def contiguous_crop(src: Waveform, fraction: float, start_fraction: float) -> Waveform:
    length = int(round(fraction * len(src)))
    length = max(1, min(length, len(src)))
    start = int(round(start_fraction * (len(src) - length)))
    return Waveform(sample_rate=src.sample_rate, samples=src.samples[start : start + length])


def make_near_duplicate(
    src: Waveform, rng: np.random.Generator
) -> tuple[Waveform, str, dict]:
    """One of three duplicate-producing transforms, chosen uniformly."""
    if len(src) == 0:
        raise ParameterError("cannot duplicate an empty waveform")
    family = ND_FAMILIES[int(rng.integers(3))]
    if family == "ND.additive":
        snr_db = float(rng.uniform(*ND_SNR_RANGE_DB))
        return additive_noise(src, snr_db, rng), family, {"snr_db": snr_db}
    if family == "ND.crop":
        fraction = float(rng.uniform(*ND_CROP_FRACTION_RANGE))
        start = float(rng.uniform())
        out = contiguous_crop(src, fraction, start)
        return out, family, {"crop_fraction": fraction, "start_fraction": start}
    fraction = float(rng.uniform(*ND_CROP_FRACTION_RANGE))
    start = float(rng.uniform())
    snr_db = float(rng.uniform(*ND_MIXED_SNR_RANGE_DB))
    out = additive_noise(contiguous_crop(src, fraction, start), snr_db, rng)
    return out, family, {"crop_fraction": fraction, "start_fraction": start, "snr_db": snr_db}


def pure_noise_like(src: Waveform, rng: np.random.Generator) -> Waveform:
    """White noise matching the source's length and RMS."""
    target = rms(src.samples)
    if target < 1e-6:
        target = 0.05
    noise = white_noise_at_rms(rng, len(src), target)
    return Waveform(sample_rate=src.sample_rate, samples=np.clip(noise, -1.0, 1.0))


def length_match(clip: Waveform, n: int, rng: np.random.Generator) -> tuple[Waveform, dict]:
    """Random contiguous crop if longer than n samples, cyclic tiling if shorter."""
    if len(clip) >= n:
        start = int(rng.integers(len(clip) - n + 1))
        return (
            Waveform(sample_rate=clip.sample_rate, samples=clip.samples[start : start + n]),
            {"mode": "crop", "start": start},
        )
    reps = int(np.ceil(n / len(clip)))
    tiled = np.tile(clip.samples, reps)[:n]
    return Waveform(sample_rate=clip.sample_rate, samples=tiled), {"mode": "tile", "reps": reps}


def make_off_topic(
    src: Waveform, external_pool: list[tuple[str, Waveform]], rng: np.random.Generator
) -> tuple[Waveform, str, dict]:
    """Replacement audio: pure noise, external content, or heavy noise.

    When the external family is drawn but the pool is empty, falls back to
    pure noise and records the fallback in the parameters.
    """
    family = OT_FAMILIES[int(rng.integers(3))]
    params: dict = {}
    if family == "OT.external" and not external_pool:
        family = "OT.pure_noise"
        params["fallback_from"] = "OT.external"
    if family == "OT.pure_noise":
        return pure_noise_like(src, rng), family, params
    if family == "OT.external":
        idx = int(rng.integers(len(external_pool)))
        source_id, clip = external_pool[idx]
        matched, match_params = length_match(clip, len(src), rng)
        params.update({"source_id": source_id, **match_params})
        return matched, family, params
    snr_db = float(rng.uniform(*OT_HEAVY_SNR_RANGE_DB))
    params["snr_db"] = snr_db
    return additive_noise(src, snr_db, rng), family, params


def flip_label(label: int, num_classes: int, rng: np.random.Generator) -> int:
    """Uniform draw over the other num_classes - 1 classes."""
    if num_classes < 2:
        raise ParameterError("label flipping needs at least two classes")
    draw = int(rng.integers(num_classes - 1))
    return draw if draw < label else draw + 1


# --- dataset-level injection ---------------------------------------------


def _load_pool(pool_dir: str | Path | None) -> list[tuple[str, Waveform]]:
    if pool_dir is None:
        return []
    pool_dir = Path(pool_dir)
    if not pool_dir.is_dir():
        raise ConfigError(f"external pool directory {pool_dir} does not exist")
    clips = []
    for path in sorted(pool_dir.glob("*.wav")):
        clips.append((path.stem, read_wav(path)))
    return clips


def inject(
    dataset_dir: str | Path,
    manifest: DatasetManifest,
    issue_type: str,
    alpha: float,
    seed: int,
    out_dir: str | Path,
    external_pool_dir: str | Path | None = None,
) -> tuple[DatasetManifest, CorruptionLedger]:
    """Write a corrupted copy of the dataset plus its ground-truth ledger.

    The input tree is never mutated. Unselected audio is copied byte for byte;
    newly synthesized audio is written as PCM 16-bit mono 16 kHz. The output
    manifest and ledger land in ``out_dir`` as manifest.json and ledger.json.
    """
    if issue_type not in ("OT", "ND", "LE"):
        raise ParameterError(f"unknown issue type '{issue_type}'")
    dataset_dir = Path(dataset_dir)
    out_dir = Path(out_dir)
    out_dir.mkdir(parents=True, exist_ok=True)

    targets = set(select_targets(manifest, alpha, seed))
    entries: list[LedgerEntry] = []
    records: list[SampleRecord] = list(manifest.samples)

    if issue_type == "LE":
        for path in {s.path for s in manifest.samples}:
            dst = out_dir / path
            dst.parent.mkdir(parents=True, exist_ok=True)
            shutil.copyfile(dataset_dir / path, dst)
        new_records = []
        for rec in records:
            if rec.id in targets:
                rng = per_sample_rng(seed, rec.id)
                new_label = flip_label(rec.label, len(manifest.classes), rng)
                entries.append(
                    LedgerEntry(rec.id, "LE.flip", {"old_label": rec.label, "new_label": new_label})
                )
                rec = SampleRecord(rec.id, rec.path, new_label, rec.duration_s)
            new_records.append(rec)
        records = new_records

    elif issue_type == "OT":
        pool = _load_pool(external_pool_dir)
        new_records = []
        for rec in records:
            src_path = dataset_dir / rec.path
            dst_path = out_dir / rec.path
            dst_path.parent.mkdir(parents=True, exist_ok=True)
            if rec.id in targets:
                rng = per_sample_rng(seed, rec.id)
                src = read_wav(src_path)
                replaced, family, params = make_off_topic(src, pool, rng)
                write_wav(dst_path, replaced)
                entries.append(LedgerEntry(rec.id, family, params))
                rec = SampleRecord(rec.id, rec.path, rec.label, replaced.duration_s)
            else:
                shutil.copyfile(src_path, dst_path)
            new_records.append(rec)
        records = new_records

    else:  # ND: originals retained, corrupted copies added as new samples
        for rec in records:
            dst = out_dir / rec.path
            dst.parent.mkdir(parents=True, exist_ok=True)
            shutil.copyfile(dataset_dir / rec.path, dst)
        added: list[SampleRecord] = []
        for rec in records:
            if rec.id not in targets:
                continue
            rng = per_sample_rng(seed, rec.id)
            src = read_wav(dataset_dir / rec.path)
            dup, family, params = make_near_duplicate(src, rng)
            dup_id = f"{rec.id}__nd"
            dup_path = _dup_path(rec.path)
            write_wav(out_dir / dup_path, dup)
            added.append(SampleRecord(dup_id, dup_path, rec.label, dup.duration_s))
            entries.append(LedgerEntry(dup_id, family, {**params, "source_id": rec.id}))
        records = records + added

    entries.sort(key=lambda e: e.sample_id)
    corrupted = DatasetManifest(name=f"{manifest.name}-{issue_type}", classes=manifest.classes, samples=records)
    ledger = CorruptionLedger(issue_type=issue_type, alpha=alpha, seed=seed, entries=entries)
    corrupted.save(out_dir / "manifest.json")
    ledger.save(out_dir / "ledger.json")
    return corrupted, ledger


def _dup_path(path: str) -> str:
    p = Path(path)
    return str(p.with_name(p.stem + "__nd" + p.suffix))


def inject_from_dir(
    dataset_dir: str | Path,
    issue_type: str,
    alpha: float,
    seed: int,
    out_dir: str | Path,
    external_pool_dir: str | Path | None = None,
) -> tuple[DatasetManifest, CorruptionLedger]:
    """Like :func:`inject`, reading manifest.json from the dataset directory."""
    manifest = load_manifest(Path(dataset_dir) / "manifest.json")
    return inject(dataset_dir, manifest, issue_type, alpha, seed, out_dir, external_pool_dir)
