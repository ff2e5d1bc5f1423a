"""Second-order IIR filters (RBJ cookbook bilinear designs).

Three kinds are exposed through BiquadSpec: single-biquad highpass and
lowpass, and a band-reject built as the parallel sum of two cascaded
branches. Each branch applies the same Butterworth-Q biquad twice
(a squared-Butterworth, Linkwitz-Riley style crossover leg), which puts
the notch floor near -22 dB for a 1-3 kHz reject instead of the -8 dB a
single-biquad sum would give, at -6 dB edges.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np
from scipy.signal import lfilter

from .audio import SAMPLE_RATE, AudioBuffer
from .errors import InvalidConfig

BUTTERWORTH_Q = 1.0 / np.sqrt(2.0)

_KINDS = ("highpass", "lowpass", "bandreject")


@dataclass(frozen=True)
class BiquadSpec:
    kind: str
    cutoff_low_hz: float
    cutoff_high_hz: float | None = None   # bandreject only
    q: float = BUTTERWORTH_Q

    def __post_init__(self):
        if self.kind not in _KINDS:
            raise InvalidConfig(f"unknown filter kind {self.kind!r}")
        if self.q <= 0.0:
            raise InvalidConfig(f"q must be positive, got {self.q}")
        nyquist = SAMPLE_RATE / 2.0
        if not 0.0 < self.cutoff_low_hz < nyquist:
            raise InvalidConfig(
                f"cutoff {self.cutoff_low_hz} Hz outside (0, {nyquist})")
        if self.kind == "bandreject":
            if self.cutoff_high_hz is None:
                raise InvalidConfig("bandreject needs cutoff_high_hz")
            if not self.cutoff_low_hz < self.cutoff_high_hz < nyquist:
                raise InvalidConfig(
                    f"bandreject cutoffs ({self.cutoff_low_hz}, "
                    f"{self.cutoff_high_hz}) must be ordered and below {nyquist}")
        elif self.cutoff_high_hz is not None:
            raise InvalidConfig(f"{self.kind} takes a single cutoff")


def lowpass_coeffs(cutoff_hz: float, q: float = BUTTERWORTH_Q,
                   sample_rate: int = SAMPLE_RATE):
    w0 = 2.0 * np.pi * cutoff_hz / sample_rate
    cw, sw = np.cos(w0), np.sin(w0)
    alpha = sw / (2.0 * q)
    b = np.array([(1.0 - cw) / 2.0, 1.0 - cw, (1.0 - cw) / 2.0])
    a = np.array([1.0 + alpha, -2.0 * cw, 1.0 - alpha])
    return b / a[0], a / a[0]


def highpass_coeffs(cutoff_hz: float, q: float = BUTTERWORTH_Q,
                    sample_rate: int = SAMPLE_RATE):
    w0 = 2.0 * np.pi * cutoff_hz / sample_rate
    cw, sw = np.cos(w0), np.sin(w0)
    alpha = sw / (2.0 * q)
    b = np.array([(1.0 + cw) / 2.0, -(1.0 + cw), (1.0 + cw) / 2.0])
    a = np.array([1.0 + alpha, -2.0 * cw, 1.0 - alpha])
    return b / a[0], a / a[0]


def biquad_response(b: np.ndarray, a: np.ndarray, freq_hz,
                    sample_rate: int = SAMPLE_RATE) -> np.ndarray:
    """Complex frequency response of one biquad at the given frequencies."""
    z = np.exp(-2j * np.pi * np.asarray(freq_hz, dtype=np.float64) / sample_rate)
    return (b[0] + b[1] * z + b[2] * z * z) / (a[0] + a[1] * z + a[2] * z * z)


def filter_array(x: np.ndarray, spec: BiquadSpec) -> np.ndarray:
    """Apply the filter along axis 0; accepts (n,) mono or (n, 2) stereo."""
    if spec.kind == "lowpass":
        b, a = lowpass_coeffs(spec.cutoff_low_hz, spec.q)
        return lfilter(b, a, x, axis=0)
    if spec.kind == "highpass":
        b, a = highpass_coeffs(spec.cutoff_low_hz, spec.q)
        return lfilter(b, a, x, axis=0)
    b_lo, a_lo = lowpass_coeffs(spec.cutoff_low_hz, spec.q)
    b_hi, a_hi = highpass_coeffs(spec.cutoff_high_hz, spec.q)
    low = lfilter(b_lo, a_lo, lfilter(b_lo, a_lo, x, axis=0), axis=0)
    high = lfilter(b_hi, a_hi, lfilter(b_hi, a_hi, x, axis=0), axis=0)
    return low + high


def apply_biquad(audio: AudioBuffer, spec: BiquadSpec) -> AudioBuffer:
    return AudioBuffer(filter_array(audio.samples, spec), audio.sample_rate_hz)
