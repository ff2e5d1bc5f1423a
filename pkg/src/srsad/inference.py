"""Whole-file scoring through fixed-length chunks, plus score/decision
file I/O.

The file is cut into non-overlapping chunks of the configured length, the
final partial chunk is reflection-padded to full length, and each chunk is
featurized and scored independently. The output always has exactly
floor(n_samples / hop) + 1 values, one per frame of the whole file under
the global framing rule: each global frame takes the score of the
temporally nearest frame within the chunk containing its center (for
chunk lengths that are whole hop multiples this is plain tiling with the
duplicated boundary frame dropped).

Score file layout: magic b"SRSC", u32 version, f64 frame period seconds,
u32 count, f32 scores. Little-endian throughout.
"""

from __future__ import annotations

import json
import struct
from dataclasses import dataclass

import numpy as np

from .audio import SAMPLE_RATE, AudioBuffer
from .dsp import FeatureConfig, logmel
from .errors import InputTooShort, InvalidConfig, InvalidInput
from .datagen.labels import fill_interior_gaps
from .model.network import forward_probs
from .model.weights import WeightStore

SCORE_MAGIC = b"SRSC"
SCORE_VERSION = 1


@dataclass(frozen=True)
class ChunkPlan:
    chunk_len_s: float = 2.0

    def __post_init__(self):
        if self.chunk_len_s <= 0.0:
            raise InvalidConfig("chunk_len_s must be positive")

    @property
    def chunk_samples(self) -> int:
        n = int(round(self.chunk_len_s * SAMPLE_RATE))
        if n < 1:
            raise InvalidConfig(f"chunk of {self.chunk_len_s}s has no samples")
        return n


def score_file(audio: AudioBuffer, store: WeightStore,
               plan: ChunkPlan = ChunkPlan(),
               feature_config: FeatureConfig | None = None) -> np.ndarray:
    """Frame scores for a whole recording."""
    if feature_config is None:
        feature_config = FeatureConfig(n_mels=store.config.srsad.c)
    hop = feature_config.stft.hop_len
    cs = plan.chunk_samples
    n = len(audio)
    if n < hop:
        raise InputTooShort(f"{n} samples is less than one hop ({hop})")
    t_global = n // hop + 1
    n_chunks = max(-(-n // cs), 1)

    chunk_scores = []
    for j in range(n_chunks):
        chunk = audio.samples[j * cs: (j + 1) * cs]
        if chunk.size < cs:
            chunk = np.pad(chunk, (0, cs - chunk.size), mode="reflect")
        mel = logmel(AudioBuffer(chunk), feature_config)
        chunk_scores.append(forward_probs(mel, store))

    frames_per_chunk = cs // hop + 1
    out = np.empty(t_global)
    centers = np.arange(t_global) * hop
    owners = np.minimum(centers // cs, n_chunks - 1)
    for j in range(n_chunks):
        mask = owners == j
        local = np.round((centers[mask] - j * cs) / hop).astype(int)
        local = np.clip(local, 0, frames_per_chunk - 1)
        out[mask] = chunk_scores[j][local]
    return out


def decide(scores: np.ndarray, threshold: float = 0.5,
           min_gap_fill_s: float | None = None,
           frame_period_s: float = 0.016) -> np.ndarray:
    """Binary decisions; optionally fill interior sub-threshold gaps
    shorter than min_gap_fill_s, mirroring the labeler's smoothing."""
    scores = np.asarray(scores, dtype=np.float64)
    if scores.ndim != 1:
        raise InvalidInput(f"scores must be 1-D, got shape {scores.shape}")
    if not 0.0 <= threshold <= 1.0:
        raise InvalidConfig(f"threshold {threshold} outside [0, 1]")
    decisions = (scores >= threshold).astype(np.uint8)
    if min_gap_fill_s is not None:
        frames = min_gap_fill_s / frame_period_s
        max_fill = int(np.ceil(frames - 1e-9)) - 1
        decisions = fill_interior_gaps(decisions, max_fill)
    return decisions


def write_scores(path, scores: np.ndarray, frame_period_s: float) -> None:
    scores = np.asarray(scores, dtype=np.float64)
    if scores.ndim != 1:
        raise InvalidInput("scores must be 1-D")
    if np.any((scores < 0.0) | (scores > 1.0)) or not np.all(np.isfinite(scores)):
        raise InvalidInput("scores must be finite and within [0, 1]")
    with open(path, "wb") as f:
        f.write(SCORE_MAGIC)
        f.write(struct.pack("<Id", SCORE_VERSION, frame_period_s))
        f.write(struct.pack("<I", scores.size))
        f.write(scores.astype("<f4").tobytes())


def read_scores(path) -> tuple[np.ndarray, float]:
    """Returns (scores as float64, frame_period_s)."""
    with open(path, "rb") as f:
        head = f.read(4)
        if head != SCORE_MAGIC:
            raise InvalidInput(f"{path}: not a score file")
        version, period = struct.unpack("<Id", f.read(12))
        if version != SCORE_VERSION:
            raise InvalidInput(f"{path}: score file version {version}, expected {SCORE_VERSION}")
        count, = struct.unpack("<I", f.read(4))
        blob = f.read(4 * count)
        if len(blob) != 4 * count:
            raise InvalidInput(f"{path}: truncated score data")
        if f.read(1):
            raise InvalidInput(f"{path}: trailing bytes")
    return np.frombuffer(blob, dtype="<f4").astype(np.float64), period


def write_decisions(path, decisions: np.ndarray, threshold: float,
                    frame_period_s: float) -> None:
    from .datagen.mixer import spans_from_binary
    from .schemas import validate_record

    record = {
        "schema_version": 1,
        "threshold": float(threshold),
        "frame_period_s": frame_period_s,
        "n_frames": int(decisions.size),
        "spans": spans_from_binary(decisions),
    }
    validate_record("decisions_sidecar", record)
    with open(path, "w") as f:
        json.dump(record, f, indent=1, sort_keys=True)
        f.write("\n")
