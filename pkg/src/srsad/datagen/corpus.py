"""Self-contained synthetic source corpus on disk.

Builds WAV files with the synth generators plus a manifest the mixer can
consume. Vocal and instrumental stems of a "song" share a source_id and a
genre; splits use disjoint sources by construction. Test-split material is
long enough for 15 s evaluation samples.
"""

from __future__ import annotations

from dataclasses import dataclass
from pathlib import Path

from ..audio import write_wav
from ..errors import InvalidConfig
from ..rng import STREAM_CORPUS, stream_rng
from .manifest import SCHEMA_VERSION, load_manifest, save_manifest
from .synth import synth_signal

GENRES = ("pop", "rock", "folk")


@dataclass(frozen=True)
class CorpusSpec:
    seed: int = 0
    train_speech: int = 12
    train_songs: int = 8
    train_noise: int = 6
    val_speech: int = 4
    val_songs: int = 3
    val_noise: int = 2
    test_speech: int = 6
    test_songs: int = 4
    test_noise: int = 3
    train_speech_s: float = 6.0
    train_song_s: float = 8.0
    train_noise_s: float = 8.0
    test_speech_s: float = 14.0
    test_song_s: float = 18.0
    test_noise_s: float = 18.0

    def __post_init__(self):
        for name in ("train_speech", "train_songs", "train_noise",
                     "val_speech", "val_songs", "val_noise",
                     "test_speech", "test_songs", "test_noise"):
            if getattr(self, name) < 1:
                raise InvalidConfig(f"{name} must be >= 1")

    def to_dict(self) -> dict:
        return {k: getattr(self, k) for k in self.__dataclass_fields__}


def build_corpus(out_dir, spec: CorpusSpec = CorpusSpec()):
    """Write the corpus and return the loaded manifest."""
    out_dir = Path(out_dir)
    out_dir.mkdir(parents=True, exist_ok=True)
    counter = 0
    splits: dict = {}
    tags = {"train": "tr", "val": "va", "test": "te"}

    def emit(split, category, kind, count, duration, prefix, genre_cycle=False):
        nonlocal counter
        entries = []
        for i in range(count):
            rng = stream_rng(spec.seed, STREAM_CORPUS, counter)
            counter += 1
            source_id = f"{prefix}_{tags[split]}{i:03d}"
            name = f"{split}_{category}_{i:03d}.wav"
            audio = synth_signal(kind, duration, rng)
            write_wav(out_dir / name, audio)
            entries.append({
                "path": name, "duration_s": audio.duration_s,
                "source_id": source_id,
                "genre": GENRES[i % len(GENRES)] if genre_cycle else None,
                "excluded": False,
            })
        splits.setdefault(split, {})[category] = entries

    for split, n_speech, n_songs, n_noise, d_speech, d_song, d_noise in (
            ("train", spec.train_speech, spec.train_songs, spec.train_noise,
             spec.train_speech_s, spec.train_song_s, spec.train_noise_s),
            ("val", spec.val_speech, spec.val_songs, spec.val_noise,
             spec.train_speech_s, spec.train_song_s, spec.train_noise_s),
            ("test", spec.test_speech, spec.test_songs, spec.test_noise,
             spec.test_speech_s, spec.test_song_s, spec.test_noise_s)):
        emit(split, "speech", "speech_like", n_speech, d_speech, "spk")
        emit(split, "singing_stem", "singing_like", n_songs, d_song, "song",
             genre_cycle=True)
        emit(split, "noise", "noise_like", n_noise, d_noise, "nz")
        # instrumental stems pair 1:1 with the singing stems just emitted
        accompaniments = []
        for i in range(n_songs):
            rng = stream_rng(spec.seed, STREAM_CORPUS, counter)
            counter += 1
            name = f"{split}_instrumental_stem_{i:03d}.wav"
            audio = synth_signal("instrumental_like", d_song, rng)
            write_wav(out_dir / name, audio)
            accompaniments.append({
                "path": name, "duration_s": audio.duration_s,
                "source_id": f"song_{tags[split]}{i:03d}",
                "genre": GENRES[i % len(GENRES)], "excluded": False,
            })
        splits[split]["instrumental_stem"] = accompaniments

    save_manifest({"schema_version": SCHEMA_VERSION,
                   "sample_rate_hz": 16000,
                   "corpus_spec": spec.to_dict(),
                   "splits": splits},
                  out_dir / "manifest.json")
    return load_manifest(out_dir / "manifest.json")
