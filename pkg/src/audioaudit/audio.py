"""Waveform ingestion and WAV I/O for the corruption harness.

Accepts RIFF WAV with PCM 16-bit or IEEE float32 payloads, mono or stereo.
Everything is normalized on ingestion to mono float in [-1, 1] at 16 kHz;
emitted audio is written back as PCM 16-bit mono 16 kHz.

Resampling is linear interpolation: adequate for corruption benchmarks, not
for feature extraction (encoders should resample with a proper filter).
"""
from __future__ import annotations

from dataclasses import dataclass
from pathlib import Path

import numpy as np
from scipy.io import wavfile

from .errors import DataError

TARGET_RATE = 16000

_SILENCE_RMS_FLOOR = 1e-6
_SILENT_SOURCE_NOISE_RMS = 0.05


@dataclass(frozen=True)
class Waveform:
    """Mono float samples in [-1, 1]."""

    sample_rate: int
    samples: np.ndarray  # 1-D float64

    def __post_init__(self) -> None:
        if self.samples.ndim != 1:
            raise DataError("waveform must be mono (1-D)")
        if self.samples.size and (
            self.samples.min() < -1.0 - 1e-6 or self.samples.max() > 1.0 + 1e-6
        ):
            raise DataError("waveform samples must lie in [-1, 1]")

    def __len__(self) -> int:
        return len(self.samples)

    @property
    def duration_s(self) -> float:
        return len(self.samples) / self.sample_rate


def rms(samples: np.ndarray) -> float:
    if samples.size == 0:
        return 0.0
    return float(np.sqrt(np.mean(np.square(samples, dtype=np.float64))))


def downmix(data: np.ndarray) -> np.ndarray:
    """Average channels of an (n, channels) array; mono passes through."""
    if data.ndim == 1:
        return data
    return data.mean(axis=1)


def resample_linear(samples: np.ndarray, src_rate: int, dst_rate: int) -> np.ndarray:
    if src_rate == dst_rate or samples.size == 0:
        return samples
    duration = samples.size / src_rate
    n_out = max(1, int(round(duration * dst_rate)))
    src_t = np.arange(samples.size) / src_rate
    dst_t = np.arange(n_out) / dst_rate
    return np.interp(dst_t, src_t, samples)


def read_wav(path: str | Path) -> Waveform:
    """Decode a WAV file to mono float 16 kHz, clipping to [-1, 1]."""
    path = Path(path)
    try:
        rate, data = wavfile.read(path)
    except (ValueError, OSError) as exc:
        raise DataError(f"cannot decode WAV {path}: {exc}") from exc
    if data.dtype == np.int16:
        samples = data.astype(np.float64) / 32768.0
    elif data.dtype == np.float32 or data.dtype == np.float64:
        samples = data.astype(np.float64)
    elif data.dtype == np.int32:
        samples = data.astype(np.float64) / 2147483648.0
    elif data.dtype == np.uint8:
        samples = (data.astype(np.float64) - 128.0) / 128.0
    else:
        raise DataError(f"unsupported WAV sample format {data.dtype} in {path}")
    samples = downmix(samples)
    samples = resample_linear(samples, int(rate), TARGET_RATE)
    samples = np.clip(samples, -1.0, 1.0)
    return Waveform(sample_rate=TARGET_RATE, samples=samples)


def write_wav(path: str | Path, wave: Waveform) -> None:
    """Write PCM 16-bit mono."""
    clipped = np.clip(wave.samples, -1.0, 1.0)
    pcm = np.round(clipped * 32767.0).astype(np.int16)
    wavfile.write(Path(path), wave.sample_rate, pcm)


def white_noise_at_rms(rng: np.random.Generator, n: int, target_rms: float) -> np.ndarray:
    """Gaussian noise scaled to an exact RMS."""
    noise = rng.standard_normal(n)
    actual = rms(noise)
    if actual == 0.0:
        return noise
    return noise * (target_rms / actual)


def add_noise_at_snr(
    src: np.ndarray, rng: np.random.Generator, snr_db: float
) -> tuple[np.ndarray, float]:
    """Mix white Gaussian noise at the requested SNR; returns (mix, noise rms).

    SNR is 20*log10(rms_signal / rms_noise). A silent source (rms below 1e-6)
    has no defined SNR; noise rms falls back to a fixed 0.05 absolute.
    """
    signal_rms = rms(src)
    if signal_rms < _SILENCE_RMS_FLOOR:
        noise_rms = _SILENT_SOURCE_NOISE_RMS
    else:
        noise_rms = signal_rms / (10.0 ** (snr_db / 20.0))
    noise = white_noise_at_rms(rng, src.size, noise_rms)
    return np.clip(src + noise, -1.0, 1.0), noise_rms
