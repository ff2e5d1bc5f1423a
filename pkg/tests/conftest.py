import numpy as np
import pytest
from hypothesis import HealthCheck, settings

from srsad.datagen.corpus import CorpusSpec, build_corpus
from srsad.datagen.mixer import TestSetConfig, build_test_set

settings.register_profile(
    "suite", derandomize=True, deadline=None, max_examples=25,
    suppress_health_check=[HealthCheck.too_slow])
settings.load_profile("suite")


@pytest.fixture(scope="session")
def corpus(tmp_path_factory):
    """Small synthetic source corpus shared by the whole session."""
    root = tmp_path_factory.mktemp("corpus")
    manifest = build_corpus(root, CorpusSpec(
        seed=123,
        train_speech=6, train_songs=4, train_noise=3,
        val_speech=2, val_songs=2, val_noise=1,
        test_speech=3, test_songs=3, test_noise=2))
    return manifest


@pytest.fixture(scope="session")
def scenes_dir(tmp_path_factory, corpus):
    """Six 15 s evaluation scenes scored by several test modules."""
    out = tmp_path_factory.mktemp("scenes")
    build_test_set(corpus.split("test"),
                   TestSetConfig(n_samples=6, seed=77), out)
    return out


@pytest.fixture
def rng():
    return np.random.default_rng(20240817)
