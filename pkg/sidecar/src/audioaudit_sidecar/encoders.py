"""Encoder registry.

Two encoders run out of the box:

  mel_stats    dependency-light log-mel statistics (no checkpoint), useful
               for plumbing checks and as a weak but deterministic baseline
  torchscript  any TorchScript export mapping a [1, T] float waveform at
               16 kHz to a [D] / [1, D] / [1, T', D] embedding tensor

The published research encoders (beats, m2d, eat, cav_mae, clmr) ship as
checkpoints tied to their own model code, which is not installable from
package indexes. Their names resolve to adapters that explain how to export
a TorchScript module and use the `torchscript` route instead.
"""
from __future__ import annotations

from pathlib import Path

import numpy as np


class EncoderError(Exception):
    """Checkpoint missing, wrong architecture, or unusable output."""


RESEARCH_ENCODERS = {
    "beats": "BEATs (microsoft/unilm) checkpoints need the BEATs model code",
    "m2d": "M2D (nttcslab) checkpoints need the M2D model code",
    "eat": "EAT (cwx-worst-one) checkpoints need the EAT model code",
    "cav_mae": "CAV-MAE (yuangongnd) checkpoints need the CAV-MAE model code",
    "clmr": "CLMR (spijkervet) checkpoints need the CLMR model code",
}


class MelStatsEncoder:
    """Mean and standard deviation of log-mel frames: D = 2 * n_mels."""

    name = "mel_stats"

    def __init__(self, n_mels: int = 40, n_fft: int = 512, hop: int = 160,
                 rate: int = 16000):
        self.n_mels = n_mels
        self.n_fft = n_fft
        self.hop = hop
        self.rate = rate
        self._filterbank = _mel_filterbank(n_mels, n_fft, rate)

    @property
    def dim(self) -> int:
        return 2 * self.n_mels

    def __call__(self, samples: np.ndarray) -> np.ndarray:
        frames = _frame(samples, self.n_fft, self.hop)
        window = np.hanning(self.n_fft)
        spectra = np.abs(np.fft.rfft(frames * window, axis=1))
        mel = np.log(spectra @ self._filterbank.T + 1e-8)
        return np.concatenate([mel.mean(axis=0), mel.std(axis=0)]).astype(np.float32)


class TorchScriptEncoder:
    """Wraps a TorchScript module exported from any pretrained encoder."""

    def __init__(self, checkpoint: str | Path):
        try:
            import torch
        except ImportError as exc:
            raise EncoderError("the torchscript encoder requires torch") from exc
        self._torch = torch
        checkpoint = Path(checkpoint)
        if not checkpoint.is_file():
            raise EncoderError(f"checkpoint {checkpoint} does not exist")
        try:
            self._model = torch.jit.load(str(checkpoint), map_location="cpu")
        except Exception as exc:
            raise EncoderError(
                f"{checkpoint} is not a loadable TorchScript module: {exc}"
            ) from exc
        self._model.eval()
        self.name = f"torchscript:{checkpoint.name}"

    def __call__(self, samples: np.ndarray) -> np.ndarray:
        torch = self._torch
        with torch.no_grad():
            tensor = torch.from_numpy(np.ascontiguousarray(samples, dtype=np.float32))
            try:
                out = self._model(tensor.unsqueeze(0))
            except Exception as exc:
                raise EncoderError(f"checkpoint/architecture mismatch: {exc}") from exc
        if not hasattr(out, "ndim"):
            raise EncoderError(f"encoder returned {type(out).__name__}, expected a tensor")
        if out.ndim == 3:  # [1, T', D]: average over time
            out = out.mean(dim=1)
        out = out.reshape(-1)
        vec = out.cpu().numpy().astype(np.float32)
        if vec.size == 0 or not np.all(np.isfinite(vec)):
            raise EncoderError("encoder produced an empty or non-finite embedding")
        return vec


def build_encoder(name: str, checkpoint: str | Path | None):
    name = name.lower().replace("-", "_")
    if name == "mel_stats":
        return MelStatsEncoder()
    if name == "torchscript":
        if checkpoint is None:
            raise EncoderError("--checkpoint is required for the torchscript encoder")
        return TorchScriptEncoder(checkpoint)
    if name in RESEARCH_ENCODERS:
        raise EncoderError(
            f"'{name}' cannot be loaded directly: {RESEARCH_ENCODERS[name]}, which is "
            f"not pip-installable. Export the model with torch.jit.trace/script in its "
            f"own environment, then run with --encoder torchscript --checkpoint <file>."
        )
    known = ", ".join(["mel_stats", "torchscript", *RESEARCH_ENCODERS])
    raise EncoderError(f"unknown encoder '{name}' (known: {known})")


def _frame(samples: np.ndarray, n_fft: int, hop: int) -> np.ndarray:
    if samples.size < n_fft:
        padded = np.zeros(n_fft, dtype=np.float64)
        padded[: samples.size] = samples
        return padded[None, :]
    n_frames = 1 + (samples.size - n_fft) // hop
    idx = np.arange(n_fft)[None, :] + hop * np.arange(n_frames)[:, None]
    return samples[idx]


def _mel_filterbank(n_mels: int, n_fft: int, rate: int) -> np.ndarray:
    def to_mel(hz):
        return 2595.0 * np.log10(1.0 + hz / 700.0)

    def to_hz(mel):
        return 700.0 * (10.0 ** (mel / 2595.0) - 1.0)

    n_bins = n_fft // 2 + 1
    mel_points = np.linspace(to_mel(0.0), to_mel(rate / 2.0), n_mels + 2)
    hz_points = to_hz(mel_points)
    bins = np.floor((n_fft + 1) * hz_points / rate).astype(int)
    bank = np.zeros((n_mels, n_bins))
    for m in range(1, n_mels + 1):
        left, center, right = bins[m - 1], bins[m], bins[m + 1]
        center = max(center, left + 1)
        right = max(right, center + 1)
        for k in range(left, min(center, n_bins)):
            bank[m - 1, k] = (k - left) / (center - left)
        for k in range(center, min(right, n_bins)):
            bank[m - 1, k] = (right - k) / (right - center)
    return bank
