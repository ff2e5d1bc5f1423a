from .augment import METHOD_ORDER, AugmentationConfig, apply_augmentations
from .corpus import GENRES, CorpusSpec, build_corpus
from .labels import LabelerConfig, fill_interior_gaps, label_speech
from .manifest import (CATEGORIES, SPLITS, Manifest, ManifestEntry,
                       SplitManifest, WavCache, load_manifest, save_manifest)
from .mixer import (FRAME_CLASSES, MixPolicy, MixtureSample,
                    MixturePairStream, TestSetConfig, binary_from_spans,
                    build_test_sample, build_test_set, classes_from_spans,
                    draw_training_sample, mix_dataset, spans_from_binary)
from .synth import (KINDS, instrumental_like, noise_like, singing_like,
                    speech_like, synth_signal)

__all__ = [
    "METHOD_ORDER", "AugmentationConfig", "apply_augmentations", "GENRES",
    "CorpusSpec", "build_corpus", "LabelerConfig", "fill_interior_gaps",
    "label_speech", "CATEGORIES", "SPLITS", "Manifest", "ManifestEntry",
    "SplitManifest", "WavCache", "load_manifest", "save_manifest",
    "FRAME_CLASSES", "MixPolicy", "MixtureSample", "MixturePairStream",
    "TestSetConfig", "binary_from_spans", "build_test_sample",
    "build_test_set", "classes_from_spans", "draw_training_sample",
    "mix_dataset", "spans_from_binary", "KINDS", "instrumental_like",
    "noise_like", "singing_like", "speech_like", "synth_signal",
]
