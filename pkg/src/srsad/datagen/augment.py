"""Stochastic augmentation chain for training mixtures.

Methods fire independently with their configured probabilities and are
applied in fixed order:

    snr_jitter, band_reject, highpass, lowpass, clipping,
    amplitude_scale, white_noise, stereo_to_mono

snr_jitter is SNR-relative: inside the mixer it re-mixes the sources at
(drawn SNR + delta) through a callback; on a bare buffer it degrades to a
whole-buffer gain of delta dB. SNR-relative methods leave silent input
untouched. Arrays may be (n,) mono or (n, 2) stereo; stereo_to_mono is a
mean fold-down and is the only method that changes the shape.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from ..audio import SAMPLE_RATE, AudioBuffer
from ..biquad import BiquadSpec, filter_array
from ..errors import InvalidConfig, InvalidInput

METHOD_ORDER = ("snr_jitter", "band_reject", "highpass", "lowpass",
                "clipping", "amplitude_scale", "white_noise", "stereo_to_mono")

_SILENCE_POWER = 1e-30
_MAX_CUTOFF_HZ = 7960.0     # strictly below Nyquist for filter design


def _check_prob(name, p):
    if not 0.0 <= p <= 1.0:
        raise InvalidConfig(f"{name} probability {p} outside [0, 1]")


def _check_range(name, lo, hi, low_ok=0.0, high_ok=np.inf):
    if not low_ok <= lo <= hi <= high_ok:
        raise InvalidConfig(f"{name} range ({lo}, {hi}) invalid")


@dataclass(frozen=True)
class AugmentationConfig:
    snr_jitter_prob: float = 0.8
    snr_jitter_range_db: tuple = (-7.0, 7.0)
    band_reject_prob: float = 0.8
    band_reject_range_hz: tuple = (100.0, 4000.0)
    band_reject_min_ratio: float = 1.5
    highpass_prob: float = 0.3
    highpass_range_hz: tuple = (500.0, 4000.0)
    lowpass_prob: float = 0.1
    lowpass_range_hz: tuple = (3000.0, 8000.0)
    clipping_prob: float = 0.1
    clipping_peak_fraction: tuple = (0.3, 0.9)
    amplitude_prob: float = 0.4
    amplitude_range: tuple = (0.1, 1.0)
    white_noise_prob: float = 0.1
    white_noise_snr_db: tuple = (20.0, 40.0)
    stereo_to_mono_prob: float = 1.0

    def __post_init__(self):
        for method in METHOD_ORDER:
            attr = {"amplitude_scale": "amplitude_prob"}.get(
                method, f"{method}_prob")
            _check_prob(method, getattr(self, attr))
        _check_range("snr_jitter", *self.snr_jitter_range_db, low_ok=-np.inf)
        nyq = SAMPLE_RATE / 2.0
        _check_range("band_reject", *self.band_reject_range_hz, high_ok=nyq)
        _check_range("highpass", *self.highpass_range_hz, high_ok=nyq)
        _check_range("lowpass", *self.lowpass_range_hz, high_ok=nyq)
        _check_range("clipping", *self.clipping_peak_fraction, high_ok=1.0)
        if self.clipping_peak_fraction[0] <= 0.0:
            raise InvalidConfig("clipping fractions must be positive")
        _check_range("amplitude", *self.amplitude_range)
        if self.amplitude_range[0] <= 0.0:
            raise InvalidConfig("amplitude range must be positive")
        _check_range("white_noise", *self.white_noise_snr_db, low_ok=-np.inf)
        if self.band_reject_min_ratio <= 1.0:
            raise InvalidConfig("band_reject_min_ratio must exceed 1")

    def to_dict(self) -> dict:
        return {
            "snr_jitter": {"prob": self.snr_jitter_prob,
                           "range_db": list(self.snr_jitter_range_db)},
            "band_reject": {"prob": self.band_reject_prob,
                            "range_hz": list(self.band_reject_range_hz),
                            "min_ratio": self.band_reject_min_ratio},
            "highpass": {"prob": self.highpass_prob,
                         "range_hz": list(self.highpass_range_hz)},
            "lowpass": {"prob": self.lowpass_prob,
                        "range_hz": list(self.lowpass_range_hz)},
            "clipping": {"prob": self.clipping_prob,
                         "peak_fraction": list(self.clipping_peak_fraction)},
            "amplitude_scale": {"prob": self.amplitude_prob,
                                "range": list(self.amplitude_range)},
            "white_noise": {"prob": self.white_noise_prob,
                            "snr_db": list(self.white_noise_snr_db)},
            "stereo_to_mono": {"prob": self.stereo_to_mono_prob},
        }


def apply_augmentations(audio, cfg: AugmentationConfig, rng,
                        snr_jitter_apply=None):
    """Run the chain once. Returns (augmented, applied) where applied is a
    list of (method, params) in application order.

    audio may be an AudioBuffer or an (n,)/(n, 2) float array; the return
    matches (an AudioBuffer stays an AudioBuffer, which requires the chain
    to end mono).
    """
    was_buffer = isinstance(audio, AudioBuffer)
    x = audio.samples.copy() if was_buffer else \
        np.array(audio, dtype=np.float64)
    if x.ndim not in (1, 2) or (x.ndim == 2 and x.shape[1] != 2):
        raise InvalidInput(f"expected (n,) or (n, 2) samples, got {x.shape}")
    applied = []

    if rng.random() < cfg.snr_jitter_prob:
        delta = rng.uniform(*cfg.snr_jitter_range_db)
        if snr_jitter_apply is not None:
            x = np.asarray(snr_jitter_apply(delta), dtype=np.float64)
        elif np.mean(x ** 2) > _SILENCE_POWER:
            x = x * 10.0 ** (delta / 20.0)
        applied.append(("snr_jitter", {"delta_db": float(delta)}))

    if rng.random() < cfg.band_reject_prob:
        lo_bound, hi_bound = cfg.band_reject_range_hz
        ratio = cfg.band_reject_min_ratio
        f_low = rng.uniform(lo_bound, hi_bound / ratio)
        f_high = rng.uniform(f_low * ratio, hi_bound)
        x = filter_array(x, BiquadSpec("bandreject", f_low, f_high))
        applied.append(("band_reject", {"low_hz": float(f_low),
                                        "high_hz": float(f_high)}))

    if rng.random() < cfg.highpass_prob:
        fc = min(rng.uniform(*cfg.highpass_range_hz), _MAX_CUTOFF_HZ)
        x = filter_array(x, BiquadSpec("highpass", fc))
        applied.append(("highpass", {"cutoff_hz": float(fc)}))

    if rng.random() < cfg.lowpass_prob:
        fc = min(rng.uniform(*cfg.lowpass_range_hz), _MAX_CUTOFF_HZ)
        x = filter_array(x, BiquadSpec("lowpass", fc))
        applied.append(("lowpass", {"cutoff_hz": float(fc)}))

    if rng.random() < cfg.clipping_prob:
        fraction = rng.uniform(*cfg.clipping_peak_fraction)
        peak = float(np.max(np.abs(x)))
        if peak > 0.0:
            x = np.clip(x, -fraction * peak, fraction * peak)
        applied.append(("clipping", {"peak_fraction": float(fraction)}))

    if rng.random() < cfg.amplitude_prob:
        gain = rng.uniform(*cfg.amplitude_range)
        x = x * gain
        applied.append(("amplitude_scale", {"gain": float(gain)}))

    if rng.random() < cfg.white_noise_prob:
        snr = rng.uniform(*cfg.white_noise_snr_db)
        p_sig = float(np.mean(x ** 2))
        if p_sig > _SILENCE_POWER:
            noise = rng.standard_normal(x.shape)
            x = x + noise * np.sqrt(p_sig / 10.0 ** (snr / 10.0))
        applied.append(("white_noise", {"snr_db": float(snr)}))

    if rng.random() < cfg.stereo_to_mono_prob:
        if x.ndim == 2:
            x = x.mean(axis=1)
        applied.append(("stereo_to_mono", {}))

    if was_buffer:
        if x.ndim != 1:
            raise InvalidInput("chain left stereo output for AudioBuffer input")
        return AudioBuffer(x), applied
    return x, applied
