"""Fixed-window segmentation of 16 kHz waveforms.

Default policy: clips up to `segment_s` seconds become a single segment
(zero-padded when shorter, and flagged); longer clips are covered by
`segment_s`-second windows every `hop_s` seconds, the last window
zero-padded. Parameters are recorded in the output manifest so downstream
comparisons can account for them.
"""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np

RATE = 16000

DEFAULT_SEGMENT_S = 10.0
DEFAULT_HOP_S = 5.0


@dataclass(frozen=True)
class Segmented:
    segments: np.ndarray  # (n_segments, segment_len) float64
    padded: bool  # clip was shorter than one full segment


def segment_waveform(
    samples: np.ndarray,
    segment_s: float = DEFAULT_SEGMENT_S,
    hop_s: float = DEFAULT_HOP_S,
) -> Segmented:
    if samples.ndim != 1 or samples.size == 0:
        raise ValueError("expected a non-empty mono waveform")
    seg_len = int(round(segment_s * RATE))
    hop = int(round(hop_s * RATE))
    if seg_len < 1 or hop < 1:
        raise ValueError("segment and hop must be positive")

    if samples.size <= seg_len:
        padded = samples.size < seg_len
        out = np.zeros(seg_len, dtype=np.float64)
        out[: samples.size] = samples
        return Segmented(segments=out[None, :], padded=padded)

    starts = list(range(0, samples.size - seg_len + 1, hop))
    # Cover the tail when the last full window misses it.
    if starts[-1] + seg_len < samples.size:
        starts.append(starts[-1] + hop)
    segments = np.zeros((len(starts), seg_len), dtype=np.float64)
    for row, start in enumerate(starts):
        chunk = samples[start : start + seg_len]
        segments[row, : chunk.size] = chunk
    return Segmented(segments=segments, padded=False)
