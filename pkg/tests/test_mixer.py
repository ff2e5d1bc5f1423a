"""Mixture synthesis: class ratios, SNR bookkeeping, scene geometry."""

import json

import numpy as np
import pytest
from hypothesis import given, strategies as st
from scipy import stats

from srsad.audio import SAMPLE_RATE
from srsad.datagen.augment import AugmentationConfig
from srsad.datagen.labels import LabelerConfig
from srsad.datagen.manifest import (Manifest, SplitManifest, WavCache,
                                    load_manifest)
from srsad.datagen.mixer import (FRAME_CLASSES, MixPolicy, MixturePairStream,
                                 TestSetConfig, _class_spans,
                                 binary_from_spans, build_test_sample,
                                 build_test_set, classes_from_spans,
                                 draw_training_sample, mix_dataset,
                                 spans_from_binary)
from srsad.dsp import FeatureConfig
from srsad.errors import InvalidConfig, ManifestInconsistent
from srsad.rng import STREAM_MIX, stream_rng

QUIET = AugmentationConfig(**{k: 0.0 for k in (
    "snr_jitter_prob", "band_reject_prob", "highpass_prob", "lowpass_prob",
    "clipping_prob", "amplitude_prob", "white_noise_prob",
    "stereo_to_mono_prob")})


def _policy(**kw):
    base = dict(chunk_len_s=0.25, augmentations=QUIET, seed=5)
    base.update(kw)
    return MixPolicy(**base)


def _draw(split, policy, i):
    return draw_training_sample(split, policy,
                                stream_rng(policy.seed, STREAM_MIX, i),
                                _draw.cache)


_draw.cache = WavCache()


# ----------------------------------------------------- training mixtures

def test_p_speech_one_yields_only_speech(corpus):
    split = corpus.split("train")
    policy = _policy(p_speech=1.0)
    for i in range(20):
        sample = _draw(split, policy, i)
        assert sample.sample_class == "speech"
        assert sample.labels.any()


def test_p_speech_zero_yields_only_singing(corpus):
    split = corpus.split("train")
    policy = _policy(p_speech=0.0)
    for i in range(20):
        sample = _draw(split, policy, i)
        assert sample.sample_class == "singing"
        assert not sample.labels.any()
        # singing frames are annotated even though the binary label is zero
        assert (sample.frame_classes == FRAME_CLASSES.index("singing")).any()


def test_speech_fraction_matches_coin(corpus):
    """10,000 draws at p_speech = 0.8; the 99% binomial interval allows
    8000 +- 103."""
    split = corpus.split("train")
    policy = _policy(p_speech=0.8, seed=11)
    n = 10_000
    speech = sum(_draw(split, policy, i).sample_class == "speech"
                 for i in range(n))
    assert abs(speech - n * 0.8) <= 2.576 * np.sqrt(n * 0.8 * 0.2)


def test_recorded_snr_is_exact_power_ratio(corpus):
    """components carry target and interferer after all gains; their power
    ratio must reproduce snr_db to rounding."""
    split = corpus.split("train")
    for policy in (_policy(p_speech=1.0), _policy(p_speech=0.0),
                   _policy(p_speech=1.0,
                           augmentations=AugmentationConfig())):
        for i in range(8):
            s = _draw(split, policy, i)
            p_t = np.mean(s.components["target"] ** 2)
            p_i = np.mean(s.components["interferer"] ** 2)
            measured = 10.0 * np.log10(p_t / p_i)
            assert measured == pytest.approx(s.snr_db, abs=1e-9)


def test_training_snr_distribution_is_uniform(corpus):
    """KS test of 1000 drawn speech SNRs against Uniform(-5, 10)."""
    split = corpus.split("train")
    policy = _policy(p_speech=1.0, seed=29)
    snrs = [_draw(split, policy, i).snr_db for i in range(1000)]
    assert min(snrs) >= -5.0 and max(snrs) <= 10.0
    p = stats.kstest(snrs, stats.uniform(loc=-5.0, scale=15.0).cdf).pvalue
    assert p > 0.01


def test_snr_jitter_widens_the_range(corpus):
    """With the jitter augmentation on, recorded SNRs may leave the base
    range but stay inside base +- 7 dB."""
    split = corpus.split("train")
    jitter_only = AugmentationConfig(**{**{k: 0.0 for k in (
        "band_reject_prob", "highpass_prob", "lowpass_prob",
        "clipping_prob", "amplitude_prob", "white_noise_prob",
        "stereo_to_mono_prob")}, "snr_jitter_prob": 1.0})
    policy = _policy(p_speech=1.0, augmentations=jitter_only, seed=31)
    snrs = np.array([_draw(split, policy, i).snr_db for i in range(300)])
    assert snrs.min() >= -12.0 and snrs.max() <= 17.0
    assert (snrs < -5.0).any() or (snrs > 10.0).any()


def test_draws_are_rng_deterministic(corpus):
    split = corpus.split("train")
    policy = _policy(p_speech=0.8)
    a = _draw(split, policy, 3)
    b = _draw(split, policy, 3)
    np.testing.assert_array_equal(a.audio.samples, b.audio.samples)
    np.testing.assert_array_equal(a.labels, b.labels)
    assert a.provenance() == b.provenance()
    c = _draw(split, policy, 4)
    assert not np.array_equal(a.audio.samples, c.audio.samples)


def test_speech_labels_follow_clean_track(corpus):
    split = corpus.split("train")
    policy = _policy(p_speech=1.0, chunk_len_s=2.0)
    sample = _draw(split, policy, 0)
    assert sample.labels.size == 2 * SAMPLE_RATE // 256 + 1
    assert sample.labels.any()
    classes = sample.frame_classes
    speech_idx = FRAME_CLASSES.index("speech")
    np.testing.assert_array_equal(classes == speech_idx, sample.labels == 1)


def test_empty_category_is_reported(corpus, tmp_path):
    split = corpus.split("train")
    bare = SplitManifest(root=split.root,
                         categories={"speech": [], "noise":
                                     split.categories["noise"]})
    with pytest.raises(ManifestInconsistent, match="no usable entries"):
        draw_training_sample(bare, _policy(p_speech=1.0),
                             np.random.default_rng(0))


def test_oversized_chunk_is_reported(corpus):
    split = corpus.split("train")
    with pytest.raises(ManifestInconsistent, match="segment"):
        draw_training_sample(split, _policy(p_speech=1.0, chunk_len_s=60.0),
                             np.random.default_rng(0))


def test_policy_validation():
    with pytest.raises(InvalidConfig):
        MixPolicy(p_speech=1.5)
    with pytest.raises(InvalidConfig):
        MixPolicy(chunk_len_s=0.0)
    with pytest.raises(InvalidConfig):
        MixPolicy(snr_range_db=(10.0, -5.0))


# ------------------------------------------------------------ pair stream

def test_pair_stream_epochs_differ_validation_fixed(corpus):
    stream = MixturePairStream(corpus.split("train"), corpus.split("val"),
                               _policy(chunk_len_s=0.5, seed=2),
                               FeatureConfig(n_mels=8))
    mel_a, lab_a = stream.train_pair(1, 0)
    mel_b, lab_b = stream.train_pair(2, 0)
    assert not np.array_equal(mel_a.values, mel_b.values)
    mel_v1, lab_v1 = stream.val_pair(0)
    mel_v2, lab_v2 = stream.val_pair(0)
    np.testing.assert_array_equal(mel_v1.values, mel_v2.values)
    np.testing.assert_array_equal(lab_v1, lab_v2)
    assert mel_a.n_mels == 8
    assert mel_a.n_frames == lab_a.size


# ------------------------------------------------------------------ spans

@given(st.lists(st.integers(0, 1), min_size=0, max_size=60))
def test_binary_span_roundtrip(bits):
    mask = np.array(bits, dtype=np.uint8)
    np.testing.assert_array_equal(
        binary_from_spans(spans_from_binary(mask), mask.size), mask)


@given(st.lists(st.integers(0, 3), min_size=1, max_size=60))
def test_class_span_roundtrip(values):
    classes = np.array(values, dtype=np.uint8)
    spans = _class_spans(classes)
    np.testing.assert_array_equal(classes_from_spans(spans, classes.size),
                                  classes)
    # spans are contiguous, ordered and cover the whole range
    assert spans[0][0] == 0 and spans[-1][1] == classes.size
    for (_, e1, _), (s2, _, _) in zip(spans, spans[1:]):
        assert e1 == s2


# ------------------------------------------------------- materialization

def test_mix_dataset_files_and_counts(corpus, tmp_path):
    out = tmp_path / "chunks"
    dataset = mix_dataset(corpus.split("train"),
                          _policy(chunk_len_s=0.5, seed=3), 6, out)
    assert dataset["n_samples"] == 6
    assert sum(dataset["class_counts"].values()) == 6
    assert len(dataset["sample_ids"]) == 6
    for sample_id in dataset["sample_ids"]:
        assert (out / f"{sample_id}.wav").exists()
        sidecar = json.loads((out / f"{sample_id}.json").read_text())
        labels = binary_from_spans(sidecar["speech_label_spans"],
                                   sidecar["n_frames"])
        classes = classes_from_spans(sidecar["frame_class_spans"],
                                     sidecar["n_frames"])
        both = FRAME_CLASSES.index("both")
        speech = FRAME_CLASSES.index("speech")
        mask = (classes == speech) | (classes == both)
        np.testing.assert_array_equal(mask.astype(np.uint8), labels)
    reread = json.loads((out / "dataset.json").read_text())
    assert reread == dataset


def test_mix_dataset_rerun_is_byte_identical(corpus, tmp_path):
    policy = _policy(chunk_len_s=0.5, seed=4)
    a, b = tmp_path / "a", tmp_path / "b"
    mix_dataset(corpus.split("train"), policy, 4, a)
    mix_dataset(corpus.split("train"), policy, 4, b)
    for f in sorted(a.iterdir()):
        assert f.read_bytes() == (b / f.name).read_bytes(), f.name


# ------------------------------------------------------------ test scenes

def test_scene_geometry_and_classes(corpus):
    split = corpus.split("test")
    cfg = TestSetConfig(n_samples=1, seed=8, speech_prob=1.0)
    sample = build_test_sample(split, cfg, 0)
    n = 15 * SAMPLE_RATE // 256 + 1
    assert sample.audio.samples.size == 15 * SAMPLE_RATE
    assert sample.labels.size == n
    assert sample.frame_classes.size == n
    # binary labels project exactly onto the speech-bearing classes
    speech_like = np.isin(sample.frame_classes,
                          [FRAME_CLASSES.index("speech"),
                           FRAME_CLASSES.index("both")])
    np.testing.assert_array_equal(speech_like.astype(np.uint8), sample.labels)


def test_scene_speech_occupies_recorded_offset(corpus):
    split = corpus.split("test")
    cfg = TestSetConfig(n_samples=1, seed=8, speech_prob=1.0)
    for index in range(4):
        sample = build_test_sample(split, cfg, index)
        offset = int(round(sample.source_ids["speech_offset_s"] * SAMPLE_RATE))
        excerpt = int(round(cfg.speech_excerpt_s * SAMPLE_RATE))
        active = np.flatnonzero(sample.labels)
        assert active.size
        # active frames can only lie where a frame window overlaps the
        # excerpt; windows span one hop either side of the frame center
        lo = max((offset - 256) // 256, 0)
        hi = -(-(offset + excerpt + 256) // 256)
        assert active[0] >= lo
        assert active[-1] <= hi


def test_scene_without_speech_is_all_negative(corpus):
    split = corpus.split("test")
    cfg = TestSetConfig(n_samples=1, seed=8, speech_prob=0.0)
    sample = build_test_sample(split, cfg, 0)
    assert sample.sample_class == "singing"
    assert sample.snr_db is None
    assert not sample.labels.any()
    assert "speech" not in sample.source_ids


def test_scene_snr_is_exact_power_ratio(corpus):
    split = corpus.split("test")
    cfg = TestSetConfig(n_samples=1, seed=13, speech_prob=1.0)
    for index in range(3):
        sample = build_test_sample(split, cfg, index)
        p_t = np.mean(sample.components["target"] ** 2)
        p_i = np.mean(sample.components["interferer"] ** 2)
        assert 10.0 * np.log10(p_t / p_i) == pytest.approx(sample.snr_db,
                                                           abs=1e-9)


def test_scene_loudness_lands_near_draw(corpus):
    from srsad.loudness import integrated_loudness_lkfs
    split = corpus.split("test")
    cfg = TestSetConfig(n_samples=1, seed=21)
    sample = build_test_sample(split, cfg, 0)
    achieved = integrated_loudness_lkfs(sample.audio)
    assert achieved == pytest.approx(sample.loudness_lkfs, abs=0.1)


def test_build_test_set_manifest(corpus, scenes_dir):
    dataset = json.loads((scenes_dir / "dataset.json").read_text())
    assert dataset["kind"] == "eval_scenes"
    assert dataset["n_samples"] == 6
    stats_ = dataset["frame_stats"]
    fractions = (stats_["speech_fraction"] + stats_["singing_fraction"]
                 + stats_["both_fraction"])
    assert 0.0 < fractions <= 1.0
    assert stats_["total"] == 6 * (15 * SAMPLE_RATE // 256 + 1)
    for sample_id in dataset["sample_ids"]:
        assert (scenes_dir / f"{sample_id}.wav").exists()
        assert (scenes_dir / f"{sample_id}.json").exists()


def test_test_set_config_validation():
    with pytest.raises(InvalidConfig):
        TestSetConfig(n_samples=0)
    with pytest.raises(InvalidConfig):
        TestSetConfig(speech_prob=-0.2)
    with pytest.raises(InvalidConfig):
        TestSetConfig(sample_len_s=5.0, speech_excerpt_s=8.0)
