"""Energy-based frame labeling for clean speech tracks.

A frame is active when its RMS energy is within a threshold of the track's
peak frame energy; interior silent gaps strictly shorter than the gap-fill
span are then filled so short intra-utterance pauses stay labeled speech.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from ..audio import AudioBuffer
from ..dsp import ENERGY_FLOOR_DBFS, StftConfig, frame_energy_db
from ..errors import InvalidConfig


@dataclass(frozen=True)
class LabelerConfig:
    threshold_below_peak_db: float = 40.0
    gap_fill_max_s: float = 0.300
    stft: StftConfig = StftConfig()

    def __post_init__(self):
        if self.threshold_below_peak_db <= 0.0:
            raise InvalidConfig("threshold_below_peak_db must be positive")
        if self.gap_fill_max_s <= 0.0:
            raise InvalidConfig("gap_fill_max_s must be positive")

    @property
    def max_fill_frames(self) -> int:
        """Largest gap length (in frames) that still gets filled.

        A gap of g frames spans g * frame_period seconds and is filled iff
        that is strictly shorter than gap_fill_max_s; at the default 16 ms
        frames and 300 ms span that means gaps up to 18 frames fill and 19
        stay silent.
        """
        frames = self.gap_fill_max_s / self.stft.frame_period_s
        return int(np.ceil(frames - 1e-9)) - 1

    def to_dict(self) -> dict:
        return {"threshold_below_peak_db": self.threshold_below_peak_db,
                "gap_fill_max_s": self.gap_fill_max_s}


def fill_interior_gaps(labels: np.ndarray, max_fill: int) -> np.ndarray:
    """Set zero-runs of length <= max_fill to one when bounded by ones on
    both sides. Leading and trailing silence is never filled."""
    out = np.asarray(labels, dtype=np.uint8).copy()
    if max_fill < 1 or out.size < 3:
        return out
    ones = np.flatnonzero(out)
    if ones.size < 2:
        return out
    gaps = np.diff(ones) - 1
    for idx in np.flatnonzero((gaps >= 1) & (gaps <= max_fill)):
        out[ones[idx] + 1: ones[idx + 1]] = 1
    return out


def label_speech(clean: AudioBuffer,
                 cfg: LabelerConfig = LabelerConfig()) -> np.ndarray:
    """Binary frame labels on the shared frame grid, dtype uint8."""
    energy = frame_energy_db(clean, cfg.stft)
    peak = float(energy.max())
    if peak <= ENERGY_FLOOR_DBFS + 1e-9:
        return np.zeros(energy.size, dtype=np.uint8)
    labels = (energy >= peak - cfg.threshold_below_peak_db).astype(np.uint8)
    return fill_interior_gaps(labels, cfg.max_fill_frames)
