"""Singing-robust speech activity detection toolkit.

Frame-level speech detection that treats sung vocals as non-speech:
log-mel frontend, bidirectional GRU detectors (a full and a
reduced-complexity variant), a speech/singing mixture generator for
training and evaluation data, exact ROC metrics including a
singing-rejection AUC, and complexity profiling. Pure numpy/scipy, no
learning framework.
"""

__version__ = "0.1.0"

from .audio import SAMPLE_RATE, AudioBuffer, read_wav, write_wav
from .dsp import (ENERGY_FLOOR_DBFS, FeatureConfig, MelSpectrogram,
                  StftConfig, frame_energy_db, logmel, mel_filterbank,
                  scale_to_snr, stft)
from .loudness import integrated_loudness_lkfs, normalize_loudness

__all__ = [
    "SAMPLE_RATE", "AudioBuffer", "read_wav", "write_wav",
    "ENERGY_FLOOR_DBFS", "FeatureConfig", "MelSpectrogram", "StftConfig",
    "frame_energy_db", "logmel", "mel_filterbank", "scale_to_snr", "stft",
    "integrated_loudness_lkfs", "normalize_loudness", "__version__",
]
