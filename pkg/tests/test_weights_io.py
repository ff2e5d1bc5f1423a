"""Binary weight file format: roundtrips and corruption detection."""

import struct

import numpy as np
import pytest

from srsad.errors import CorruptWeights
from srsad.model.config import full_model, lc_model
from srsad.model.network import init_weights
from srsad.model.weights import (FORMAT_VERSION, MAGIC, load_weights,
                                 save_weights)


@pytest.fixture(params=["full", "lc"])
def store(request):
    config = full_model(c=8) if request.param == "full" else lc_model(c=8)
    return init_weights(config, seed=123)


def test_roundtrip_is_exact(store, tmp_path):
    path = tmp_path / "w.bin"
    save_weights(store, path)
    loaded = load_weights(path)
    assert loaded.config == store.config
    assert loaded.feature_hash == store.feature_hash
    assert list(loaded.tensors) == list(store.tensors)
    for name in store.tensors:
        np.testing.assert_array_equal(loaded.tensors[name],
                                      store.tensors[name])


def test_save_is_byte_deterministic(store, tmp_path):
    a, b = tmp_path / "a.bin", tmp_path / "b.bin"
    save_weights(store, a)
    save_weights(store, b)
    assert a.read_bytes() == b.read_bytes()


def test_bad_magic_rejected(store, tmp_path):
    path = tmp_path / "w.bin"
    save_weights(store, path)
    blob = bytearray(path.read_bytes())
    blob[:4] = b"NOPE"
    path.write_bytes(bytes(blob))
    with pytest.raises(CorruptWeights, match="magic"):
        load_weights(path)


def test_wrong_version_rejected(store, tmp_path):
    path = tmp_path / "w.bin"
    save_weights(store, path)
    blob = bytearray(path.read_bytes())
    blob[4:8] = struct.pack("<I", FORMAT_VERSION + 1)
    path.write_bytes(bytes(blob))
    with pytest.raises(CorruptWeights, match="version"):
        load_weights(path)


@pytest.mark.parametrize("keep", [3, 7, 11, 200, 2000])
def test_truncation_rejected(store, tmp_path, keep):
    path = tmp_path / "w.bin"
    save_weights(store, path)
    blob = path.read_bytes()
    assert keep < len(blob)
    path.write_bytes(blob[:keep])
    with pytest.raises(CorruptWeights):
        load_weights(path)


def test_trailing_bytes_rejected(store, tmp_path):
    path = tmp_path / "w.bin"
    save_weights(store, path)
    path.write_bytes(path.read_bytes() + b"\x00")
    with pytest.raises(CorruptWeights, match="trailing"):
        load_weights(path)


def test_garbage_header_rejected(store, tmp_path):
    path = tmp_path / "w.bin"
    save_weights(store, path)
    blob = bytearray(path.read_bytes())
    hdr_len, = struct.unpack("<I", blob[8:12])
    blob[12:12 + hdr_len] = b"x" * hdr_len
    path.write_bytes(bytes(blob))
    with pytest.raises(CorruptWeights, match="header"):
        load_weights(path)


def test_tensor_set_must_match_embedded_config(tmp_path):
    """A file whose header claims one width but whose tensors are another
    width must not load."""
    small = init_weights(full_model(c=8), seed=1)
    big = init_weights(full_model(c=16), seed=1)
    mixed = big.clone()
    mixed.tensors = small.tensors
    path = tmp_path / "w.bin"
    save_weights(mixed, path)
    with pytest.raises(CorruptWeights, match="config"):
        load_weights(path)


def test_not_a_weight_file(tmp_path):
    path = tmp_path / "junk.bin"
    path.write_bytes(b"RIFF" + bytes(64))
    with pytest.raises(CorruptWeights):
        load_weights(path)


def test_loaded_weights_drive_identical_forward(store, tmp_path):
    from srsad.model.network import forward_batch
    path = tmp_path / "w.bin"
    save_weights(store, path)
    loaded = load_weights(path)
    x = np.random.default_rng(0).normal(size=(1, 12, 8))
    a, _ = forward_batch(store, x)
    b, _ = forward_batch(loaded, x)
    np.testing.assert_array_equal(a, b)
