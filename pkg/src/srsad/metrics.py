"""Frame-level evaluation: exact ROC/AUC, the singing-rejection AUC
variant, and per-song false-acceptance accuracy.

ROC curves are exact: one operating point per distinct score plus the
all-reject point, trapezoidal area. That makes AUC identical to the
normalized Mann-Whitney U statistic including tie handling.

The singing-rejection AUC keeps every positive frame (speech, including
speech over singing) but restricts negatives to singing-only frames, so
it isolates the failure mode of accepting singing as speech. Frames of
class "neither" never enter it; "both" frames count as positives.
"""

from __future__ import annotations

import json
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from .errors import (DegenerateClassDistribution, InvalidInput, InvalidShape,
                     ManifestInconsistent)

FRAME_CLASSES = ("speech", "singing", "both", "neither")
_POSITIVE_CLASSES = (0, 2)            # speech, both


@dataclass(frozen=True)
class FrameRecord:
    score: float
    speech_label: int
    frame_class: str


class FrameRecords:
    """Columnar frame container; validates label/class consistency."""

    def __init__(self, scores, speech_labels, frame_classes):
        scores = np.asarray(scores, dtype=np.float64)
        labels = np.asarray(speech_labels)
        if isinstance(frame_classes, np.ndarray) and \
                frame_classes.dtype != object and frame_classes.dtype.kind in "iu":
            classes = frame_classes.astype(np.uint8)
        else:
            classes = np.array([FRAME_CLASSES.index(c) for c in frame_classes],
                               dtype=np.uint8)
        if not scores.shape == labels.shape == classes.shape or scores.ndim != 1:
            raise InvalidShape("scores, labels and classes must be equal-length 1-D")
        if scores.size == 0:
            raise InvalidInput("no frames")
        if np.any((scores < 0.0) | (scores > 1.0)):
            raise InvalidInput("scores outside [0, 1]")
        if np.any(classes >= len(FRAME_CLASSES)):
            raise InvalidInput("unknown frame class index")
        expected = np.isin(classes, _POSITIVE_CLASSES)
        if np.any(expected != (labels == 1)):
            raise InvalidInput(
                "speech_label must be 1 exactly for classes speech/both")
        self.scores = scores
        self.labels = labels.astype(np.uint8)
        self.classes = classes

    @classmethod
    def from_records(cls, records) -> "FrameRecords":
        return cls([r.score for r in records],
                   [r.speech_label for r in records],
                   [r.frame_class for r in records])

    def __len__(self):
        return self.scores.size


@dataclass
class RocCurve:
    thresholds: np.ndarray
    tpr: np.ndarray
    fpr: np.ndarray
    auc: float
    n_positive: int
    n_negative: int


def _roc_from_masks(scores, pos_mask, neg_mask, what: str) -> RocCurve:
    n_pos = int(pos_mask.sum())
    n_neg = int(neg_mask.sum())
    if n_pos == 0 or n_neg == 0:
        raise DegenerateClassDistribution(
            f"{what}: {n_pos} positives, {n_neg} negatives")
    keep = pos_mask | neg_mask
    s = scores[keep]
    y = pos_mask[keep]
    order = np.argsort(-s, kind="stable")
    s = s[order]
    y = y[order]
    # one operating point after each distinct score value
    tp = np.cumsum(y)
    fp = np.cumsum(~y)
    distinct = np.flatnonzero(np.diff(s) != 0.0)
    last = np.concatenate([distinct, [s.size - 1]])
    thresholds = np.concatenate([[np.inf], s[last]])
    tpr = np.concatenate([[0.0], tp[last] / n_pos])
    fpr = np.concatenate([[0.0], fp[last] / n_neg])
    auc = float(np.trapezoid(tpr, fpr))
    return RocCurve(thresholds=thresholds, tpr=tpr, fpr=fpr, auc=auc,
                    n_positive=n_pos, n_negative=n_neg)


def roc_points(records: FrameRecords) -> RocCurve:
    """ROC with all non-speech frames as negatives."""
    return _roc_from_masks(records.scores, records.labels == 1,
                           records.labels == 0, "roc")


def auc(records: FrameRecords) -> float:
    return roc_points(records).auc


def singing_rejection_roc(records: FrameRecords) -> RocCurve:
    """ROC restricted to negatives of class singing (vocals, no speech)."""
    return _roc_from_masks(records.scores, records.labels == 1,
                           records.classes == FRAME_CLASSES.index("singing"),
                           "singing rejection")


def auc_singing_rejection(records: FrameRecords) -> float:
    return singing_rejection_roc(records).auc


@dataclass
class SongFrames:
    song_id: str
    genre: str | None
    scores: np.ndarray          # scores over that song's singing-only frames


@dataclass
class GroupStats:
    n_songs: int
    mean: float
    std: float                  # population standard deviation over songs

    def to_dict(self) -> dict:
        return {"n_songs": self.n_songs, "mean": self.mean, "std": self.std}


@dataclass
class AccuracyReport:
    threshold: float
    overall: GroupStats
    per_genre: dict[str, GroupStats] = field(default_factory=dict)
    skipped_songs: int = 0

    def to_dict(self) -> dict:
        return {"threshold": self.threshold,
                "overall": self.overall.to_dict(),
                "per_genre": {g: s.to_dict()
                              for g, s in sorted(self.per_genre.items())},
                "skipped_songs": self.skipped_songs}


def accuracy_per_song(songs: list[SongFrames],
                      threshold: float = 0.5) -> AccuracyReport:
    """Per-song singing rejection accuracy, aggregated per genre.

    A song's accuracy is the fraction of its singing-only frames scored
    below the threshold. Songs with no singing frames are skipped.
    """
    accs = []
    genres = []
    skipped = 0
    for song in songs:
        scores = np.asarray(song.scores, dtype=np.float64)
        if scores.size == 0:
            skipped += 1
            continue
        accs.append(float(np.mean(scores < threshold)))
        genres.append(song.genre if song.genre is not None else "unknown")
    if not accs:
        raise DegenerateClassDistribution("no songs with singing frames")
    accs_arr = np.array(accs)

    def stats(mask):
        vals = accs_arr[mask]
        return GroupStats(n_songs=int(vals.size), mean=float(vals.mean()),
                          std=float(vals.std()))

    report = AccuracyReport(
        threshold=threshold,
        overall=stats(np.ones(accs_arr.size, dtype=bool)),
        skipped_songs=skipped)
    for genre in sorted(set(genres)):
        mask = np.array([g == genre for g in genres])
        report.per_genre[genre] = stats(mask)
    return report


def load_dataset_frames(dataset_dir, scores_dir) -> tuple[FrameRecords, list]:
    """Join a materialized dataset with its score files.

    Returns pooled FrameRecords plus per-song SongFrames (singing-only
    frames grouped by the source song) for the accuracy report.
    """
    from .datagen.mixer import binary_from_spans, classes_from_spans
    from .inference import read_scores

    dataset_dir = Path(dataset_dir)
    scores_dir = Path(scores_dir)
    try:
        with open(dataset_dir / "dataset.json") as f:
            dataset = json.load(f)
    except (OSError, ValueError) as exc:
        raise ManifestInconsistent(f"unreadable dataset manifest: {exc}") from exc

    all_scores = []
    all_labels = []
    all_classes = []
    per_song: dict[tuple, list] = {}
    for sample_id in dataset["sample_ids"]:
        with open(dataset_dir / f"{sample_id}.json") as f:
            sidecar = json.load(f)
        n = sidecar["n_frames"]
        scores, _ = read_scores(scores_dir / f"{sample_id}.scores")
        if scores.size != n:
            raise InvalidShape(
                f"{sample_id}: {scores.size} scores for {n} labeled frames")
        labels = binary_from_spans(sidecar["speech_label_spans"], n)
        classes = classes_from_spans(sidecar["frame_class_spans"], n)
        all_scores.append(scores)
        all_labels.append(labels)
        all_classes.append(classes)

        song = sidecar["provenance"]["source_ids"].get("song") or \
            sidecar["provenance"]["source_ids"].get("target")
        genre = sidecar["provenance"]["source_ids"].get("genre")
        singing_mask = classes == FRAME_CLASSES.index("singing")
        if song is not None and singing_mask.any():
            per_song.setdefault((song, genre), []).append(scores[singing_mask])

    records = FrameRecords(np.concatenate(all_scores),
                           np.concatenate(all_labels),
                           np.concatenate(all_classes))
    songs = [SongFrames(song_id=song, genre=genre,
                        scores=np.concatenate(chunks))
             for (song, genre), chunks in sorted(per_song.items(),
                                                 key=lambda kv: str(kv[0]))]
    return records, songs


def evaluation_report(records: FrameRecords, songs=None,
                      threshold: float = 0.5) -> dict:
    """The JSON-ready metric summary the eval command emits."""
    roc = roc_points(records)
    sirr = singing_rejection_roc(records)
    report = {
        "schema_version": 1,
        "auc": roc.auc,
        "auc_singing_rejection": sirr.auc,
        "counts": {
            "frames": len(records),
            "positives": roc.n_positive,
            "negatives": roc.n_negative,
            "singing_only": sirr.n_negative,
            "excluded_neither": int(
                (records.classes == FRAME_CLASSES.index("neither")).sum()),
        },
        "threshold_policy": "one operating point per distinct score",
    }
    if songs:
        try:
            report["per_song_accuracy"] = accuracy_per_song(
                songs, threshold).to_dict()
        except DegenerateClassDistribution:
            report["per_song_accuracy"] = None
    return report
