"""Mixture synthesis: training chunks, fixed datasets, evaluation sets.

Training chunks follow the speech-ratio recipe: with probability p_speech
the chunk is speech over noise at a drawn SNR (labels from the clean
speech), otherwise singing over its paired instrumental at a drawn
singing-to-music SNR (labels all zero). The mixture is normalized to a
fixed loudness, then run through the augmentation chain; SNR jitter
re-mixes the normalized components so provenance carries the effective
SNR.

Evaluation samples are fixed-length 15 s scenes: a song bed (vocal +
instrumental stems at unity) plus noise, with a 12 s speech excerpt placed
uniformly at random when the speech coin fires, SNR and loudness drawn per
sample, and per-frame class annotations {speech, singing, both, neither}.
"""

from __future__ import annotations

import json
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from ..audio import SAMPLE_RATE, AudioBuffer, write_wav
from ..dsp import FeatureConfig, logmel, scale_to_snr
from ..errors import InvalidConfig, InvalidInput, ManifestInconsistent, Unmeasurable
from ..loudness import integrated_loudness_lkfs
from ..rng import STREAM_MIX, STREAM_TEST, STREAM_TRAIN, STREAM_VAL, stream_rng
from .augment import AugmentationConfig, apply_augmentations
from .labels import LabelerConfig, label_speech
from .manifest import SplitManifest, WavCache

FRAME_CLASSES = ("speech", "singing", "both", "neither")

_SEGMENT_TRIES = 100
_MIN_SEGMENT_POWER = 1e-10


@dataclass(frozen=True)
class MixPolicy:
    p_speech: float = 0.8
    chunk_len_s: float = 2.0
    snr_range_db: tuple = (-5.0, 10.0)
    singing_to_music_snr_range_db: tuple = (-3.0, 6.0)
    loudness_range_lkfs: tuple = (-30.0, -10.0)
    train_target_lkfs: float = -20.0
    augmentations: AugmentationConfig = field(default_factory=AugmentationConfig)
    labeler: LabelerConfig = field(default_factory=LabelerConfig)
    seed: int = 0

    def __post_init__(self):
        if not 0.0 <= self.p_speech <= 1.0:
            raise InvalidConfig(f"p_speech {self.p_speech} outside [0, 1]")
        if self.chunk_len_s <= 0.0:
            raise InvalidConfig("chunk_len_s must be positive")
        for name in ("snr_range_db", "singing_to_music_snr_range_db",
                     "loudness_range_lkfs"):
            lo, hi = getattr(self, name)
            if lo > hi:
                raise InvalidConfig(f"{name} ({lo}, {hi}) not ordered")

    def to_dict(self) -> dict:
        return {
            "p_speech": self.p_speech, "chunk_len_s": self.chunk_len_s,
            "snr_range_db": list(self.snr_range_db),
            "singing_to_music_snr_range_db":
                list(self.singing_to_music_snr_range_db),
            "loudness_range_lkfs": list(self.loudness_range_lkfs),
            "train_target_lkfs": self.train_target_lkfs,
            "augmentations": self.augmentations.to_dict(),
            "labeler": self.labeler.to_dict(),
            "seed": self.seed,
        }


@dataclass
class MixtureSample:
    audio: AudioBuffer
    labels: np.ndarray                  # uint8 per frame
    sample_class: str                   # "speech" | "singing"
    source_ids: dict
    snr_db: float | None
    loudness_lkfs: float
    augmentations: list
    frame_classes: np.ndarray | None = None   # uint8 index into FRAME_CLASSES
    components: dict | None = None      # clean target/interferer, post-gain

    def provenance(self) -> dict:
        return {
            "sample_class": self.sample_class,
            "source_ids": self.source_ids,
            "snr_db": self.snr_db,
            "loudness_lkfs": self.loudness_lkfs,
            "augmentations": [
                {"method": m, "params": p} for m, p in self.augmentations],
        }


def _draw_segment(entries, length: int, cache: WavCache, split: SplitManifest,
                  rng, min_power: float | None = None) -> tuple:
    """Pick an entry and a random window; reject too-short files and (when
    min_power is set) near-silent windows, then redraw."""
    if not entries:
        raise ManifestInconsistent("category has no usable entries")
    for _ in range(_SEGMENT_TRIES):
        entry = entries[int(rng.integers(len(entries)))]
        samples = cache.load(split.resolve(entry))
        if samples.size < length:
            continue
        start = int(rng.integers(samples.size - length + 1))
        segment = AudioBuffer(samples[start: start + length])
        if min_power is not None and np.mean(segment.samples ** 2) < min_power:
            continue
        return entry, start, segment
    raise ManifestInconsistent(
        f"no usable {length}-sample segment after {_SEGMENT_TRIES} draws")


def _paired_song_segments(split: SplitManifest, length: int, cache: WavCache,
                          rng) -> tuple:
    """One window drawn over both stems of a random song."""
    stems = split.entries("singing_stem")
    if not stems:
        raise ManifestInconsistent("no singing stems in split")
    for _ in range(_SEGMENT_TRIES):
        vocal = stems[int(rng.integers(len(stems)))]
        accomp = split.paired_instrumental(vocal.source_id)
        v = cache.load(split.resolve(vocal))
        a = cache.load(split.resolve(accomp))
        usable = min(v.size, a.size)
        if usable < length:
            continue
        start = int(rng.integers(usable - length + 1))
        sing = AudioBuffer(v[start: start + length])
        if np.mean(sing.samples ** 2) < _MIN_SEGMENT_POWER:
            continue
        return vocal, start, sing, AudioBuffer(a[start: start + length])
    raise ManifestInconsistent(
        f"no usable {length}-sample song window after {_SEGMENT_TRIES} draws")


def draw_training_sample(split: SplitManifest, policy: MixPolicy, rng,
                         cache: WavCache | None = None) -> MixtureSample:
    cache = cache if cache is not None else WavCache()
    length = int(round(policy.chunk_len_s * SAMPLE_RATE))

    is_speech = rng.random() < policy.p_speech
    if is_speech:
        entry, _, target = _draw_segment(
            split.entries("speech"), length, cache, split, rng,
            min_power=_MIN_SEGMENT_POWER)
        n_entry, _, interferer = _draw_segment(
            split.entries("noise"), length, cache, split, rng)
        base_snr = rng.uniform(*policy.snr_range_db)
        sources = {"target": entry.source_id, "interferer": n_entry.source_id}
        sample_class = "speech"
    else:
        entry, _, target, interferer = _paired_song_segments(
            split, length, cache, rng)
        base_snr = rng.uniform(*policy.singing_to_music_snr_range_db)
        sources = {"target": entry.source_id,
                   "interferer": entry.source_id}
        sample_class = "singing"

    mix = AudioBuffer(target.samples
                      + scale_to_snr(target, interferer, base_snr).samples)
    try:
        current = integrated_loudness_lkfs(mix)
        gain = 10.0 ** ((policy.train_target_lkfs - current) / 20.0)
    except (Unmeasurable, InvalidInput):
        gain = 1.0      # chunk too short or too quiet to meter; leave as is
    target = target.scaled(gain)
    interferer = interferer.scaled(gain)

    state = {"snr": base_snr}

    def remix(delta):
        state["snr"] = base_snr + delta
        return (target.samples
                + scale_to_snr(target, interferer, state["snr"]).samples)

    base = AudioBuffer(target.samples
                       + scale_to_snr(target, interferer, base_snr).samples)
    augmented, applied = apply_augmentations(
        base, policy.augmentations, rng, snr_jitter_apply=remix)

    labels = (label_speech(target, policy.labeler) if sample_class == "speech"
              else np.zeros(length // policy.labeler.stft.hop_len + 1,
                            dtype=np.uint8))
    if sample_class == "speech":
        classes = np.where(labels == 1,
                           FRAME_CLASSES.index("speech"),
                           FRAME_CLASSES.index("neither")).astype(np.uint8)
    else:
        singing_frames = label_speech(target, policy.labeler)
        classes = np.where(singing_frames == 1,
                           FRAME_CLASSES.index("singing"),
                           FRAME_CLASSES.index("neither")).astype(np.uint8)

    final_interferer = scale_to_snr(target, interferer, state["snr"])
    return MixtureSample(
        audio=augmented, labels=labels, sample_class=sample_class,
        source_ids=sources, snr_db=float(state["snr"]),
        loudness_lkfs=policy.train_target_lkfs, augmentations=applied,
        frame_classes=classes,
        components={"target": target.samples,
                    "interferer": final_interferer.samples})


class MixturePairStream:
    """(mel, labels) pairs for the trainer, derived on the fly.

    Training pairs are keyed by (epoch, index) so every epoch sees fresh
    mixtures; validation pairs by index only, so the validation set is
    identical every epoch. Decoded corpus audio is cached in memory.
    """

    def __init__(self, train_split: SplitManifest, val_split: SplitManifest,
                 policy: MixPolicy, feature_config: FeatureConfig):
        self.train_split = train_split
        self.val_split = val_split
        self.policy = policy
        self.feature_config = feature_config
        self.cache = WavCache()

    def _pair(self, split, rng):
        sample = draw_training_sample(split, self.policy, rng, self.cache)
        mel = logmel(sample.audio, self.feature_config)
        return mel, sample.labels

    def train_pair(self, epoch: int, i: int):
        rng = stream_rng(self.policy.seed, STREAM_TRAIN,
                         (int(epoch) << 32) | int(i))
        return self._pair(self.train_split, rng)

    def val_pair(self, i: int):
        rng = stream_rng(self.policy.seed, STREAM_VAL, int(i))
        return self._pair(self.val_split, rng)


def spans_from_binary(mask: np.ndarray) -> list:
    """Half-open [start, end) runs of ones."""
    mask = np.asarray(mask).astype(bool)
    diff = np.diff(mask.astype(np.int8), prepend=0, append=0)
    starts = np.flatnonzero(diff == 1)
    ends = np.flatnonzero(diff == -1)
    return [[int(s), int(e)] for s, e in zip(starts, ends)]


def binary_from_spans(spans, n: int) -> np.ndarray:
    out = np.zeros(n, dtype=np.uint8)
    for s, e in spans:
        out[s:e] = 1
    return out


def _class_spans(classes: np.ndarray) -> list:
    spans = []
    start = 0
    for i in range(1, classes.size + 1):
        if i == classes.size or classes[i] != classes[start]:
            spans.append([int(start), int(i),
                          FRAME_CLASSES[int(classes[start])]])
            start = i
    return spans


def classes_from_spans(spans, n: int) -> np.ndarray:
    out = np.full(n, FRAME_CLASSES.index("neither"), dtype=np.uint8)
    for s, e, name in spans:
        out[s:e] = FRAME_CLASSES.index(name)
    return out


def _write_sample(out_dir: Path, sample_id: str, audio: AudioBuffer,
                  labels: np.ndarray, classes: np.ndarray,
                  frame_period_s: float, provenance: dict) -> None:
    from ..schemas import validate_record

    write_wav(out_dir / f"{sample_id}.wav", audio)
    sidecar = {
        "schema_version": 1,
        "sample_id": sample_id,
        "frame_period_s": frame_period_s,
        "n_frames": int(labels.size),
        "speech_label_spans": spans_from_binary(labels),
        "frame_class_spans": _class_spans(classes),
        "provenance": provenance,
    }
    validate_record("sample_sidecar", sidecar)
    with open(out_dir / f"{sample_id}.json", "w") as f:
        json.dump(sidecar, f, indent=1, sort_keys=True)
        f.write("\n")


def mix_dataset(split: SplitManifest, policy: MixPolicy, n_samples: int,
                out_dir) -> dict:
    """Materialize n training-style chunks to WAV + sidecar files."""
    from ..schemas import validate_record

    if n_samples < 1:
        raise InvalidConfig("n_samples must be >= 1")
    out_dir = Path(out_dir)
    out_dir.mkdir(parents=True, exist_ok=True)
    cache = WavCache()
    ids = []
    class_counts = {"speech": 0, "singing": 0}
    for i in range(n_samples):
        rng = stream_rng(policy.seed, STREAM_MIX, i)
        sample = draw_training_sample(split, policy, rng, cache)
        sample_id = f"sample_{i:05d}"
        ids.append(sample_id)
        class_counts[sample.sample_class] += 1
        _write_sample(out_dir, sample_id, sample.audio, sample.labels,
                      sample.frame_classes,
                      policy.labeler.stft.frame_period_s,
                      sample.provenance())
    dataset = {
        "schema_version": 1,
        "kind": "train_chunks",
        "n_samples": n_samples,
        "policy": policy.to_dict(),
        "sample_ids": ids,
        "class_counts": class_counts,
    }
    validate_record("dataset_manifest", dataset)
    with open(out_dir / "dataset.json", "w") as f:
        json.dump(dataset, f, indent=1, sort_keys=True)
        f.write("\n")
    return dataset


@dataclass(frozen=True)
class TestSetConfig:
    __test__ = False    # not a test case despite the name

    n_samples: int = 64
    speech_prob: float = 0.5
    sample_len_s: float = 15.0
    speech_excerpt_s: float = 12.0
    snr_range_db: tuple = (-5.0, 10.0)
    loudness_range_lkfs: tuple = (-30.0, -10.0)
    labeler: LabelerConfig = field(default_factory=LabelerConfig)
    seed: int = 0

    def __post_init__(self):
        if self.n_samples < 1:
            raise InvalidConfig("n_samples must be >= 1")
        if not 0.0 <= self.speech_prob <= 1.0:
            raise InvalidConfig("speech_prob outside [0, 1]")
        if self.speech_excerpt_s > self.sample_len_s:
            raise InvalidConfig("speech excerpt longer than the sample")

    def to_dict(self) -> dict:
        return {"n_samples": self.n_samples, "speech_prob": self.speech_prob,
                "sample_len_s": self.sample_len_s,
                "speech_excerpt_s": self.speech_excerpt_s,
                "snr_range_db": list(self.snr_range_db),
                "loudness_range_lkfs": list(self.loudness_range_lkfs),
                "labeler": self.labeler.to_dict(), "seed": self.seed}


def build_test_sample(split: SplitManifest, cfg: TestSetConfig, index: int,
                      cache: WavCache | None = None) -> MixtureSample:
    """One 15 s evaluation scene, fully determined by (seed, index)."""
    cache = cache if cache is not None else WavCache()
    rng = stream_rng(cfg.seed, STREAM_TEST, index)
    length = int(round(cfg.sample_len_s * SAMPLE_RATE))

    vocal, _, singing, accomp = _paired_song_segments(
        split, length, cache, rng)
    n_entry, _, noise = _draw_segment(split.entries("noise"), length, cache,
                                      split, rng)
    bed = AudioBuffer(singing.samples + accomp.samples + noise.samples)

    has_speech = rng.random() < cfg.speech_prob
    sources = {"song": vocal.source_id, "noise": n_entry.source_id,
               "genre": vocal.genre}
    hop = cfg.labeler.stft.hop_len
    n_frames = length // hop + 1

    if has_speech:
        excerpt_len = int(round(cfg.speech_excerpt_s * SAMPLE_RATE))
        s_entry, _, excerpt = _draw_segment(
            split.entries("speech"), excerpt_len, cache, split, rng,
            min_power=_MIN_SEGMENT_POWER)
        offset = int(rng.integers(length - excerpt_len + 1))
        track = np.zeros(length)
        track[offset: offset + excerpt_len] = excerpt.samples
        speech_track = AudioBuffer(track)
        snr = float(rng.uniform(*cfg.snr_range_db))
        scaled_bed = scale_to_snr(speech_track, bed, snr)
        mix = AudioBuffer(speech_track.samples + scaled_bed.samples)
        labels = label_speech(speech_track, cfg.labeler)
        sources["speech"] = s_entry.source_id
        sources["speech_offset_s"] = offset / SAMPLE_RATE
    else:
        mix = bed
        snr = None
        labels = np.zeros(n_frames, dtype=np.uint8)

    loudness = float(rng.uniform(*cfg.loudness_range_lkfs))
    gain = 1.0
    for _ in range(4):
        achieved = integrated_loudness_lkfs(
            mix if gain == 1.0 else AudioBuffer(mix.samples * gain))
        if abs(achieved - loudness) <= 0.05:
            break
        gain *= 10.0 ** ((loudness - achieved) / 20.0)
    if has_speech:
        components = {"target": speech_track.samples * gain,
                      "interferer": scaled_bed.samples * gain}
    else:
        components = {"bed": bed.samples * gain}
    mix = AudioBuffer(mix.samples * gain)

    singing_frames = label_speech(singing, cfg.labeler)
    classes = np.full(n_frames, FRAME_CLASSES.index("neither"), dtype=np.uint8)
    classes[(labels == 1) & (singing_frames == 0)] = FRAME_CLASSES.index("speech")
    classes[(labels == 0) & (singing_frames == 1)] = FRAME_CLASSES.index("singing")
    classes[(labels == 1) & (singing_frames == 1)] = FRAME_CLASSES.index("both")

    return MixtureSample(
        audio=mix, labels=labels,
        sample_class="speech" if has_speech else "singing",
        source_ids=sources, snr_db=snr, loudness_lkfs=loudness,
        augmentations=[], frame_classes=classes,
        components=components)


def build_test_set(split: SplitManifest, cfg: TestSetConfig, out_dir) -> dict:
    """Materialize the evaluation set; returns the dataset manifest."""
    from ..schemas import validate_record

    out_dir = Path(out_dir)
    out_dir.mkdir(parents=True, exist_ok=True)
    cache = WavCache()
    ids = []
    speech_frames = singing_frames = both_frames = total_frames = 0
    for i in range(cfg.n_samples):
        sample = build_test_sample(split, cfg, i, cache)
        sample_id = f"sample_{i:05d}"
        ids.append(sample_id)
        provenance = sample.provenance()
        provenance["has_speech"] = sample.sample_class == "speech"
        _write_sample(out_dir, sample_id, sample.audio, sample.labels,
                      sample.frame_classes, cfg.labeler.stft.frame_period_s,
                      provenance)
        classes = sample.frame_classes
        total_frames += classes.size
        speech_frames += int((classes == FRAME_CLASSES.index("speech")).sum())
        singing_frames += int((classes == FRAME_CLASSES.index("singing")).sum())
        both_frames += int((classes == FRAME_CLASSES.index("both")).sum())

    dataset = {
        "schema_version": 1,
        "kind": "eval_scenes",
        "n_samples": cfg.n_samples,
        "policy": cfg.to_dict(),
        "sample_ids": ids,
        "frame_stats": {
            "total": total_frames,
            "speech_fraction": speech_frames / total_frames,
            "singing_fraction": singing_frames / total_frames,
            "both_fraction": both_frames / total_frames,
        },
    }
    validate_record("dataset_manifest", dataset)
    with open(out_dir / "dataset.json", "w") as f:
        json.dump(dataset, f, indent=1, sort_keys=True)
        f.write("\n")
    return dataset
