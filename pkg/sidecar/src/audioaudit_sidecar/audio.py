"""Encoder-grade audio loading: mono float at 16 kHz with polyphase resampling."""
from __future__ import annotations

from math import gcd
from pathlib import Path

import numpy as np
from scipy.io import wavfile
from scipy.signal import resample_poly

TARGET_RATE = 16000


class AudioLoadError(Exception):
    pass


def load_wav_16k(path: str | Path) -> np.ndarray:
    path = Path(path)
    try:
        rate, data = wavfile.read(path)
    except (ValueError, OSError) as exc:
        raise AudioLoadError(f"cannot decode {path}: {exc}") from exc
    if data.dtype == np.int16:
        samples = data.astype(np.float64) / 32768.0
    elif data.dtype in (np.float32, np.float64):
        samples = data.astype(np.float64)
    elif data.dtype == np.int32:
        samples = data.astype(np.float64) / 2147483648.0
    elif data.dtype == np.uint8:
        samples = (data.astype(np.float64) - 128.0) / 128.0
    else:
        raise AudioLoadError(f"unsupported sample format {data.dtype} in {path}")
    if samples.ndim == 2:
        samples = samples.mean(axis=1)
    if int(rate) != TARGET_RATE:
        g = gcd(TARGET_RATE, int(rate))
        samples = resample_poly(samples, TARGET_RATE // g, int(rate) // g)
    return np.clip(samples, -1.0, 1.0)
