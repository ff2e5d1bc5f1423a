"""Log-mel frontend and signal-measurement primitives.

Framing convention used everywhere (features, energy labels, score files):
the signal is reflect-padded by half a window on both sides, frame t is
centered on sample t*hop, and a buffer of n samples yields
floor(n / hop) + 1 frames.
"""

from __future__ import annotations

import hashlib
import json
from dataclasses import dataclass

import numpy as np

from .audio import SAMPLE_RATE, AudioBuffer
from .errors import DegenerateInterferer, InvalidConfig, InvalidInput, InvalidShape

ENERGY_FLOOR_DBFS = -120.0
_SILENCE_POWER = 1e-30


def hann_window(length: int) -> np.ndarray:
    """Periodic Hann taper (DFT-even, matches the usual STFT convention)."""
    if length < 1:
        raise InvalidConfig(f"window length {length} < 1")
    n = np.arange(length)
    return 0.5 - 0.5 * np.cos(2.0 * np.pi * n / length)


@dataclass(frozen=True)
class StftConfig:
    n_fft: int = 512
    window_len: int = 512
    hop_len: int = 256
    center: bool = True

    def __post_init__(self):
        if min(self.n_fft, self.window_len, self.hop_len) < 1:
            raise InvalidConfig("n_fft, window_len and hop_len must be >= 1")
        if self.window_len > self.n_fft:
            raise InvalidConfig(
                f"window_len {self.window_len} > n_fft {self.n_fft}")
        if self.hop_len > self.window_len:
            raise InvalidConfig(
                f"hop_len {self.hop_len} > window_len {self.window_len}")

    @property
    def n_bins(self) -> int:
        return self.n_fft // 2 + 1

    @property
    def frame_period_s(self) -> float:
        return self.hop_len / SAMPLE_RATE

    def frame_count(self, n_samples: int) -> int:
        if n_samples < 1:
            raise InvalidInput("empty signal has no frames")
        if self.center:
            return n_samples // self.hop_len + 1
        if n_samples < self.window_len:
            raise InvalidInput(
                f"{n_samples} samples shorter than one window ({self.window_len})")
        return (n_samples - self.window_len) // self.hop_len + 1


def _frame(x: np.ndarray, cfg: StftConfig) -> np.ndarray:
    """Slice a 1-D signal into (T, window_len) frames per the framing convention."""
    if cfg.center:
        half = cfg.window_len // 2
        x = np.pad(x, (half, half), mode="reflect") if x.size > 1 else \
            np.full(x.size + 2 * half, x[0])
    frames = np.lib.stride_tricks.sliding_window_view(x, cfg.window_len)
    return frames[:: cfg.hop_len]


def stft(audio: AudioBuffer, cfg: StftConfig = StftConfig()) -> np.ndarray:
    """Complex spectrogram, shape (n_fft//2 + 1, T)."""
    frames = _frame(audio.samples, cfg)
    spec = np.fft.rfft(frames * hann_window(cfg.window_len), n=cfg.n_fft, axis=1)
    return spec.T


def hz_to_mel(f) -> np.ndarray:
    return 2595.0 * np.log10(1.0 + np.asarray(f, dtype=np.float64) / 700.0)


def mel_to_hz(m) -> np.ndarray:
    return 700.0 * (10.0 ** (np.asarray(m, dtype=np.float64) / 2595.0) - 1.0)


def mel_filterbank(n_mels: int, n_fft: int, sample_rate: int = SAMPLE_RATE,
                   f_min: float = 0.0, f_max: float | None = None) -> np.ndarray:
    """Triangular peak-1.0 filters on the mel scale, shape (n_mels, n_fft//2 + 1).

    Filter m rises linearly in hertz from edge m to its center at edge m+1 and
    falls to edge m+2, the edges being uniformly spaced in mel.
    """
    if f_max is None:
        f_max = sample_rate / 2.0
    if not 0.0 <= f_min < f_max <= sample_rate / 2.0:
        raise InvalidConfig(f"bad mel band edges [{f_min}, {f_max}]")
    n_bins = n_fft // 2 + 1
    if not 1 <= n_mels <= n_bins:
        raise InvalidConfig(f"n_mels {n_mels} outside [1, {n_bins}]")
    freqs = np.arange(n_bins) * (sample_rate / n_fft)
    edges = mel_to_hz(np.linspace(hz_to_mel(f_min), hz_to_mel(f_max), n_mels + 2))
    fb = np.zeros((n_mels, n_bins))
    for m in range(n_mels):
        lo, center, hi = edges[m], edges[m + 1], edges[m + 2]
        rising = (freqs - lo) / max(center - lo, 1e-12)
        falling = (hi - freqs) / max(hi - center, 1e-12)
        fb[m] = np.clip(np.minimum(rising, falling), 0.0, None)
    return fb


@dataclass(frozen=True)
class FeatureConfig:
    """Everything that determines the log-mel features a model consumes."""

    stft: StftConfig = StftConfig()
    n_mels: int = 80
    f_min_hz: float = 0.0
    f_max_hz: float = SAMPLE_RATE / 2.0
    floor_eps: float = 1e-10

    def __post_init__(self):
        if self.floor_eps <= 0.0:
            raise InvalidConfig("floor_eps must be positive")
        mel_filterbank(self.n_mels, self.stft.n_fft,
                       f_min=self.f_min_hz, f_max=self.f_max_hz)

    def to_dict(self) -> dict:
        return {
            "n_fft": self.stft.n_fft,
            "window_len": self.stft.window_len,
            "hop_len": self.stft.hop_len,
            "center": self.stft.center,
            "n_mels": self.n_mels,
            "f_min_hz": self.f_min_hz,
            "f_max_hz": self.f_max_hz,
            "floor_eps": self.floor_eps,
        }

    @classmethod
    def from_dict(cls, d: dict) -> "FeatureConfig":
        return cls(
            stft=StftConfig(n_fft=d["n_fft"], window_len=d["window_len"],
                            hop_len=d["hop_len"], center=d["center"]),
            n_mels=d["n_mels"], f_min_hz=d["f_min_hz"], f_max_hz=d["f_max_hz"],
            floor_eps=d["floor_eps"],
        )

    def content_hash(self) -> str:
        blob = json.dumps(self.to_dict(), sort_keys=True).encode()
        return hashlib.sha256(blob).hexdigest()[:16]


@dataclass(frozen=True)
class MelSpectrogram:
    values: np.ndarray          # (n_mels, T), natural log of floored mel power
    frame_period_s: float

    def __post_init__(self):
        values = np.asarray(self.values, dtype=np.float64)
        if values.ndim != 2:
            raise InvalidShape(f"mel values must be 2-D, got {values.shape}")
        object.__setattr__(self, "values", values)

    @property
    def n_mels(self) -> int:
        return self.values.shape[0]

    @property
    def n_frames(self) -> int:
        return self.values.shape[1]


def logmel(audio: AudioBuffer, cfg: FeatureConfig = FeatureConfig()) -> MelSpectrogram:
    """Log-mel features: power spectrogram through the filterbank, floored, logged."""
    spec = stft(audio, cfg.stft)
    power = spec.real ** 2 + spec.imag ** 2
    fb = mel_filterbank(cfg.n_mels, cfg.stft.n_fft,
                        f_min=cfg.f_min_hz, f_max=cfg.f_max_hz)
    mel = fb @ power
    values = np.log(np.maximum(mel, cfg.floor_eps))
    return MelSpectrogram(values=values, frame_period_s=cfg.stft.frame_period_s)


def frame_energy_db(audio: AudioBuffer, cfg: StftConfig = StftConfig(),
                    floor_db: float = ENERGY_FLOOR_DBFS) -> np.ndarray:
    """Per-frame RMS energy in dBFS on the shared frame grid.

    Raw samples, no analysis window: a constant full-scale buffer reads 0 dBFS.
    Silent frames (and anything below it) map to floor_db.
    """
    frames = _frame(audio.samples, cfg)
    mean_sq = np.mean(frames ** 2, axis=1)
    with np.errstate(divide="ignore"):
        db = 10.0 * np.log10(mean_sq)
    return np.maximum(db, floor_db)


def scale_to_snr(signal: AudioBuffer, interferer: AudioBuffer,
                 snr_db: float) -> AudioBuffer:
    """Scale the interferer so that signal-to-interferer power ratio is snr_db.

    Powers are mean squares over the overlapping length.
    """
    n = min(len(signal), len(interferer))
    p_sig = float(np.mean(signal.samples[:n] ** 2))
    p_int = float(np.mean(interferer.samples[:n] ** 2))
    if p_int <= _SILENCE_POWER:
        raise DegenerateInterferer("interferer is silent, SNR gain undefined")
    if p_sig <= _SILENCE_POWER:
        raise InvalidInput("signal is silent, SNR is undefined")
    gain = np.sqrt(p_sig / (p_int * 10.0 ** (snr_db / 10.0)))
    return interferer.scaled(gain)
