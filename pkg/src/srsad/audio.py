"""Mono 16 kHz audio container and WAV file I/O.

Everything downstream assumes the fixed project sample rate. Samples are
float64 with nominal full scale at +/-1.0; intermediate mixes may exceed
that (headroom is clamped only when exporting 16-bit PCM).
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np
from scipy.io import wavfile

from .errors import InvalidInput

SAMPLE_RATE = 16000


@dataclass(frozen=True)
class AudioBuffer:
    samples: np.ndarray
    sample_rate_hz: int = SAMPLE_RATE

    def __post_init__(self):
        samples = np.asarray(self.samples, dtype=np.float64)
        if samples.ndim != 1:
            raise InvalidInput(f"expected mono 1-D samples, got shape {samples.shape}")
        if samples.size == 0:
            raise InvalidInput("empty audio buffer")
        if self.sample_rate_hz != SAMPLE_RATE:
            raise InvalidInput(
                f"unsupported sample rate {self.sample_rate_hz}; fixed at {SAMPLE_RATE} Hz"
            )
        object.__setattr__(self, "samples", samples)

    @property
    def duration_s(self) -> float:
        return self.samples.size / self.sample_rate_hz

    def scaled(self, gain: float) -> "AudioBuffer":
        return AudioBuffer(self.samples * float(gain), self.sample_rate_hz)

    def __len__(self) -> int:
        return self.samples.size


def read_wav(path) -> AudioBuffer:
    """Read a WAV file; must be 16 kHz mono, 16-bit PCM or 32-bit float."""
    try:
        rate, data = wavfile.read(path)
    except (ValueError, EOFError) as exc:
        raise InvalidInput(f"unreadable WAV file {path}: {exc}") from exc
    if rate != SAMPLE_RATE:
        raise InvalidInput(f"{path}: sample rate {rate}, expected {SAMPLE_RATE}")
    if data.ndim != 1:
        raise InvalidInput(f"{path}: {data.shape[1]} channels, expected mono")
    if data.dtype == np.int16:
        samples = data.astype(np.float64) / 32768.0
    elif data.dtype == np.float32:
        samples = data.astype(np.float64)
    else:
        raise InvalidInput(f"{path}: unsupported sample format {data.dtype}")
    return AudioBuffer(samples)


def write_wav(path, audio: AudioBuffer, sample_format: str = "float32") -> None:
    """Write a WAV file as 32-bit float (lossless here) or 16-bit PCM."""
    if sample_format == "float32":
        wavfile.write(path, audio.sample_rate_hz, audio.samples.astype(np.float32))
    elif sample_format == "int16":
        clipped = np.clip(audio.samples, -1.0, 32767.0 / 32768.0)
        wavfile.write(path, audio.sample_rate_hz,
                      np.round(clipped * 32768.0).astype(np.int16))
    else:
        raise InvalidInput(f"unsupported sample format {sample_format!r}")
