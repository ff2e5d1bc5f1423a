"""Source-corpus manifest: what audio exists, in which split, and how
vocal/instrumental stems pair up.

The manifest is JSON next to the audio it describes; paths are relative
to the manifest's directory. Hygiene rules enforced on load: no source_id
appears in more than one split, stems pair within a split by source_id,
and every referenced file exists.
"""

from __future__ import annotations

import json
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from ..audio import read_wav
from ..errors import ManifestInconsistent

CATEGORIES = ("speech", "singing_stem", "instrumental_stem", "noise")
SPLITS = ("train", "val", "test")

SCHEMA_VERSION = 1


@dataclass(frozen=True)
class ManifestEntry:
    path: str
    duration_s: float
    source_id: str
    genre: str | None = None
    excluded: bool = False

    def to_dict(self) -> dict:
        return {"path": self.path, "duration_s": self.duration_s,
                "source_id": self.source_id, "genre": self.genre,
                "excluded": self.excluded}


@dataclass
class SplitManifest:
    root: Path
    categories: dict[str, list[ManifestEntry]] = field(default_factory=dict)

    def entries(self, category: str) -> list[ManifestEntry]:
        """Non-excluded entries of one category."""
        return [e for e in self.categories.get(category, ())
                if not e.excluded]

    def paired_instrumental(self, source_id: str) -> ManifestEntry:
        for e in self.entries("instrumental_stem"):
            if e.source_id == source_id:
                return e
        raise ManifestInconsistent(
            f"no instrumental stem paired with {source_id!r}")

    def resolve(self, entry: ManifestEntry) -> Path:
        return self.root / entry.path


@dataclass
class Manifest:
    root: Path
    splits: dict[str, SplitManifest]

    def split(self, name: str) -> SplitManifest:
        if name not in self.splits:
            raise ManifestInconsistent(f"manifest has no {name!r} split")
        return self.splits[name]


class WavCache:
    """Per-process cache of decoded corpus files."""

    def __init__(self):
        self._samples: dict[str, np.ndarray] = {}

    def load(self, path) -> np.ndarray:
        key = str(path)
        if key not in self._samples:
            self._samples[key] = read_wav(path).samples
        return self._samples[key]


def save_manifest(manifest_dict: dict, path) -> None:
    with open(path, "w") as f:
        json.dump(manifest_dict, f, indent=1, sort_keys=True)
        f.write("\n")


def load_manifest(path) -> Manifest:
    path = Path(path)
    try:
        with open(path) as f:
            raw = json.load(f)
    except (OSError, ValueError) as exc:
        raise ManifestInconsistent(f"unreadable manifest {path}: {exc}") from exc
    if raw.get("schema_version") != SCHEMA_VERSION:
        raise ManifestInconsistent(
            f"{path}: schema_version {raw.get('schema_version')!r}, "
            f"expected {SCHEMA_VERSION}")
    root = path.parent
    splits = {}
    seen_ids: dict[str, str] = {}
    for split_name, categories in raw.get("splits", {}).items():
        if split_name not in SPLITS:
            raise ManifestInconsistent(f"{path}: unknown split {split_name!r}")
        split = SplitManifest(root=root)
        for category, entries in categories.items():
            if category not in CATEGORIES:
                raise ManifestInconsistent(
                    f"{path}: unknown category {category!r}")
            parsed = [ManifestEntry(**e) for e in entries]
            split.categories[category] = parsed
            for entry in parsed:
                if entry.duration_s <= 0:
                    raise ManifestInconsistent(
                        f"{entry.path}: non-positive duration")
                if not (root / entry.path).exists():
                    raise ManifestInconsistent(
                        f"{path}: missing file {entry.path}")
                # stems of one song share a source_id inside their split
                key = entry.source_id
                owner = seen_ids.setdefault(key, split_name)
                if owner != split_name:
                    raise ManifestInconsistent(
                        f"source {key!r} appears in splits "
                        f"{owner!r} and {split_name!r}")
        for singing in split.categories.get("singing_stem", ()):
            split.paired_instrumental(singing.source_id)
        splits[split_name] = split
    return Manifest(root=root, splits=splits)
