"""Synthetic audio material for self-contained corpora.

Four generators with the spectral and temporal hallmarks the detector and
labeler care about, not realism:

  speech_like       harmonic tone with fast pitch jitter, formant-shaped
                    harmonic envelope, syllable bursts separated by true
                    silence so the energy labeler sees interior gaps
  singing_like      sustained notes on a scale with slow vibrato and
                    continuous amplitude
  instrumental_like stable sinusoid stack plus band-limited noise
  noise_like        1/f-shaped noise with slow amplitude wander

Everything is peak-normalized to 0.5 and fully determined by the caller's
generator.
"""

from __future__ import annotations

import numpy as np

from ..audio import SAMPLE_RATE, AudioBuffer
from ..biquad import BiquadSpec, filter_array
from ..errors import InvalidInput

KINDS = ("speech_like", "singing_like", "instrumental_like", "noise_like")

_PEAK = 0.5


def _normalize(x: np.ndarray) -> np.ndarray:
    peak = np.max(np.abs(x))
    if peak <= 0.0:
        raise InvalidInput("generator produced silence")
    return x * (_PEAK / peak)


def _harmonic(f0: np.ndarray, gains: np.ndarray) -> np.ndarray:
    """Sum of harmonics of a time-varying f0; phase is the integral of
    instantaneous frequency. Harmonics above 7.6 kHz are dropped."""
    phase = 2.0 * np.pi * np.cumsum(f0) / SAMPLE_RATE
    out = np.zeros(f0.size)
    f_max = float(f0.max())
    for h, g in enumerate(gains, start=1):
        if h * f_max >= 7600.0:
            break
        out += g * np.sin(h * phase)
    return out


def _formant_gains(f0_nominal: float, rng) -> np.ndarray:
    centers = np.array([rng.uniform(300.0, 800.0),
                        rng.uniform(1000.0, 1800.0),
                        rng.uniform(2200.0, 3000.0)])
    widths = rng.uniform(120.0, 250.0, size=3)
    h = np.arange(1, 25)
    freqs = h * f0_nominal
    envelope = np.zeros(h.size)
    for c, w in zip(centers, widths):
        envelope += np.exp(-0.5 * ((freqs - c) / w) ** 2)
    return (envelope + 0.05) / np.sqrt(h)


def speech_like(duration_s: float, rng) -> AudioBuffer:
    n = int(round(duration_s * SAMPLE_RATE))
    t = np.arange(n) / SAMPLE_RATE
    f0_base = rng.uniform(110.0, 200.0)
    jitter_hz = rng.uniform(4.0, 8.0)
    jitter = 4.0 * np.sin(2.0 * np.pi * jitter_hz * t
                          + rng.uniform(0.0, 2.0 * np.pi))
    f0 = f0_base * 2.0 ** (jitter / 12.0)
    voiced = _harmonic(f0, _formant_gains(f0_base, rng))

    env = np.zeros(n)
    pos = 0
    while pos < n:
        syllable = int(rng.uniform(0.100, 0.250) * SAMPLE_RATE)
        gap = int(rng.uniform(0.060, 0.150) * SAMPLE_RATE)
        end = min(pos + syllable, n)
        env[pos:end] = np.sin(np.pi * np.arange(end - pos) / syllable) ** 2
        pos = end + gap
    return AudioBuffer(_normalize(voiced * env))


_SCALE_DEGREES = np.array([0, 2, 4, 5, 7, 9, 11, 12], dtype=np.float64)


def singing_like(duration_s: float, rng) -> AudioBuffer:
    n = int(round(duration_s * SAMPLE_RATE))
    t = np.arange(n) / SAMPLE_RATE
    base = rng.uniform(196.0, 330.0)
    f0 = np.empty(n)
    pos = 0
    while pos < n:
        note = int(rng.uniform(0.5, 2.0) * SAMPLE_RATE)
        degree = rng.choice(_SCALE_DEGREES)
        f0[pos: pos + note] = base * 2.0 ** (degree / 12.0)
        pos += note
    vibrato_hz = rng.uniform(5.0, 6.5)
    depth = rng.uniform(0.1, 0.3)
    f0 = f0 * 2.0 ** (depth * np.sin(2.0 * np.pi * vibrato_hz * t) / 12.0)

    gains = (1.0 / np.arange(1, 13)) * np.exp(
        -np.arange(1, 13) / rng.uniform(4.0, 9.0))
    tone = _harmonic(f0, gains)
    env = 0.85 + 0.15 * np.sin(2.0 * np.pi * rng.uniform(0.3, 1.0) * t
                               + rng.uniform(0.0, 2.0 * np.pi))
    return AudioBuffer(_normalize(tone * env))


def instrumental_like(duration_s: float, rng) -> AudioBuffer:
    n = int(round(duration_s * SAMPLE_RATE))
    t = np.arange(n) / SAMPLE_RATE
    root = rng.uniform(90.0, 350.0)
    ratios = rng.choice([1.0, 1.26, 1.5, 2.0, 2.52, 3.0],
                        size=rng.integers(3, 6), replace=False)
    out = np.zeros(n)
    for i, ratio in enumerate(np.sort(ratios)):
        out += np.sin(2.0 * np.pi * root * ratio * t
                      + rng.uniform(0.0, 2.0 * np.pi)) / (i + 1.0)
    noise = rng.standard_normal(n)
    cutoff = rng.uniform(2000.0, 6000.0)
    noise = filter_array(noise, BiquadSpec("lowpass", cutoff))
    out += 0.1 * noise / max(np.std(noise), 1e-12)
    env = 0.9 + 0.1 * np.sin(2.0 * np.pi * rng.uniform(0.2, 0.8) * t)
    return AudioBuffer(_normalize(out * env))


def noise_like(duration_s: float, rng) -> AudioBuffer:
    n = int(round(duration_s * SAMPLE_RATE))
    white = rng.standard_normal(n)
    spectrum = np.fft.rfft(white)
    freqs = np.fft.rfftfreq(n, d=1.0 / SAMPLE_RATE)
    shaping = 1.0 / np.sqrt(np.maximum(freqs, 20.0))
    pink = np.fft.irfft(spectrum * shaping, n=n)
    t = np.arange(n) / SAMPLE_RATE
    env = 0.6 + 0.4 * np.sin(2.0 * np.pi * rng.uniform(0.1, 0.5) * t
                             + rng.uniform(0.0, 2.0 * np.pi))
    return AudioBuffer(_normalize(pink * env))


def synth_signal(kind: str, duration_s: float, rng) -> AudioBuffer:
    if duration_s <= 0.0:
        raise InvalidInput(f"duration {duration_s} must be positive")
    try:
        fn = {"speech_like": speech_like, "singing_like": singing_like,
              "instrumental_like": instrumental_like,
              "noise_like": noise_like}[kind]
    except KeyError:
        raise InvalidInput(f"unknown signal kind {kind!r}") from None
    return fn(duration_s, rng)
