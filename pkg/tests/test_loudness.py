import numpy as np
import pytest

from srsad.audio import SAMPLE_RATE, AudioBuffer
from srsad.biquad import biquad_response
from srsad.errors import InvalidInput, Unmeasurable
from srsad.loudness import (integrated_loudness_lkfs, k_weighting_coeffs,
                            normalize_loudness)


def sine(freq_hz, amp=1.0, duration_s=3.0):
    t = np.arange(int(duration_s * SAMPLE_RATE)) / SAMPLE_RATE
    return AudioBuffer(amp * np.sin(2.0 * np.pi * freq_hz * t))


def test_full_scale_997hz_reference_level():
    # 10*log10(0.5) - 0.691 = -3.7013
    measured = integrated_loudness_lkfs(sine(997.0))
    assert abs(measured - (-3.69)) < 0.1
    np.testing.assert_allclose(measured, 10.0 * np.log10(0.5) - 0.691,
                               atol=0.02)


def test_gain_offset_is_exact_in_db():
    ref = integrated_loudness_lkfs(sine(997.0))
    tenth = integrated_loudness_lkfs(sine(997.0, amp=0.1))
    np.testing.assert_allclose(ref - tenth, 20.0, atol=0.01)
    assert abs(tenth - (-23.69)) < 0.12


def test_gain_equivariance_over_20db(rng):
    base = AudioBuffer(rng.normal(0.0, 0.05, size=3 * SAMPLE_RATE))
    ref = integrated_loudness_lkfs(base)
    for gain_db in np.linspace(-10.0, 10.0, 9):
        got = integrated_loudness_lkfs(base.scaled(10.0 ** (gain_db / 20.0)))
        assert abs(got - (ref + gain_db)) < 0.05


def test_chain_is_unity_at_997hz():
    shelf, highp = k_weighting_coeffs()
    h = (biquad_response(*shelf, 997.0) * biquad_response(*highp, 997.0))
    np.testing.assert_allclose(np.abs(h), 1.0, atol=1e-12)


def test_k_weighting_shape():
    shelf, highp = k_weighting_coeffs()

    def mag_db(f):
        h = biquad_response(*shelf, f) * biquad_response(*highp, f)
        return 20.0 * np.log10(np.abs(h))

    assert mag_db(30.0) < -8.0            # rumble rejected
    assert 3.0 < mag_db(6000.0) < 5.0     # high shelf boost
    assert abs(mag_db(997.0)) < 1e-9


def test_silence_unmeasurable():
    with pytest.raises(Unmeasurable):
        integrated_loudness_lkfs(AudioBuffer(np.zeros(SAMPLE_RATE)))
    with pytest.raises(Unmeasurable):
        integrated_loudness_lkfs(sine(997.0, amp=1e-5))   # below -70 LKFS


def test_too_short_for_one_block():
    with pytest.raises(InvalidInput):
        integrated_loudness_lkfs(AudioBuffer(np.ones(1000)))


def test_absolute_gate_drops_leading_silence():
    # loud tail after a long silent head: gating must ignore the silence
    loud = sine(997.0, amp=0.25, duration_s=2.0)
    padded = AudioBuffer(np.concatenate([np.zeros(4 * SAMPLE_RATE),
                                         loud.samples]))
    gated = integrated_loudness_lkfs(padded)
    plain = integrated_loudness_lkfs(loud)
    assert abs(gated - plain) < 0.6


def test_normalize_hits_target():
    audio = sine(997.0, amp=0.3)
    out = normalize_loudness(audio, -23.69)
    assert abs(integrated_loudness_lkfs(out) - (-23.69)) < 0.05
    ratio = out.samples[100] / audio.samples[100]
    assert 0.0 < ratio < 1.0


def test_normalize_to_current_is_identity():
    audio = sine(997.0, amp=0.5)
    current = integrated_loudness_lkfs(audio)
    out = normalize_loudness(audio, current)
    np.testing.assert_allclose(out.samples, audio.samples, rtol=1e-9)


def test_normalize_gain_matches_db_arithmetic():
    audio = sine(997.0)            # -3.70 LKFS
    out = normalize_loudness(audio, -23.69)
    gain = out.samples[100] / audio.samples[100]
    np.testing.assert_allclose(gain, 0.1, rtol=0.01)


def test_normalize_silent_input_errors():
    with pytest.raises(Unmeasurable):
        normalize_loudness(AudioBuffer(np.zeros(SAMPLE_RATE)), -20.0)
