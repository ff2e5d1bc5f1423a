"""Forward-pass behaviour of both detector graphs.

The vectorized forward is checked against the scalar per-unit reference in
oracles.py, against closed-form degenerate cases (zero weights, identity
resampler), and for exact frame-count bookkeeping.
"""

import numpy as np
import pytest

from srsad.audio import AudioBuffer
from srsad.dsp import FeatureConfig, MelSpectrogram, logmel
from srsad.errors import IncompatibleWeights, InputTooShort, InvalidShape
from srsad.model.config import (ARCH_LC, ConvSpec, LcResampleConfig,
                                ModelConfig, SrSadConfig, full_model, lc_model)
from srsad.model.layers import (GruDirectionParams, GruLayerParams,
                                bigru_layer_forward, gru_cell_step,
                                gru_scan_forward)
from srsad.model.network import (forward_batch, forward_probs, graph_dims,
                                 init_weights, parameter_plan, srsad_forward,
                                 srsad_lc_forward)
from srsad.model.weights import WeightStore

from oracles import scalar_gru_scan, scalar_srsad_forward


def _zeroed(store):
    out = store.clone()
    for t in out.tensors.values():
        t[:] = 0.0
    return out


def _random_direction(rng, c_in, hidden):
    def mat(r, c):
        return rng.normal(scale=0.4, size=(r, c))

    return GruDirectionParams(
        w_r=mat(hidden, c_in), w_z=mat(hidden, c_in), w_n=mat(hidden, c_in),
        u_r=mat(hidden, hidden), u_z=mat(hidden, hidden),
        u_n=mat(hidden, hidden),
        b_wr=rng.normal(size=hidden), b_wz=rng.normal(size=hidden),
        b_wn=rng.normal(size=hidden), b_ur=rng.normal(size=hidden),
        b_uz=rng.normal(size=hidden), b_un=rng.normal(size=hidden))


def _mel(values):
    return MelSpectrogram(values=np.asarray(values, dtype=float),
                          frame_period_s=0.016)


# ------------------------------------------------------------- GRU cell

def test_zero_cell_halves_state(rng):
    hidden = 5
    p = GruDirectionParams(**{
        name: np.zeros((hidden, 3)) if name.startswith("w_")
        else np.zeros((hidden, hidden)) if name.startswith("u_")
        else np.zeros(hidden)
        for name in ("w_r", "w_z", "w_n", "u_r", "u_z", "u_n",
                     "b_wr", "b_wz", "b_wn", "b_ur", "b_uz", "b_un")})
    h = rng.normal(size=hidden)
    # r = z = 1/2 and the candidate is tanh(0) = 0, so the update keeps
    # exactly half of the previous state.
    np.testing.assert_allclose(gru_cell_step(rng.normal(size=3), h, p),
                               0.5 * h, atol=1e-15)


def test_scan_agrees_with_single_steps(rng):
    p = _random_direction(rng, 4, 6)
    x = rng.normal(size=(1, 11, 4))
    hs, _ = gru_scan_forward(x, p, reverse=False)
    h = np.zeros(6)
    for t in range(11):
        h = gru_cell_step(x[0, t], h, p)
        np.testing.assert_allclose(hs[0, t], h, atol=1e-12)


def test_reverse_scan_agrees_with_single_steps(rng):
    p = _random_direction(rng, 4, 6)
    x = rng.normal(size=(1, 9, 4))
    hs, _ = gru_scan_forward(x, p, reverse=True)
    h = np.zeros(6)
    for t in range(8, -1, -1):
        h = gru_cell_step(x[0, t], h, p)
        np.testing.assert_allclose(hs[0, t], h, atol=1e-12)


def test_scan_matches_scalar_oracle(rng):
    p = _random_direction(rng, 3, 5)
    x = rng.normal(size=(1, 7, 3))
    for reverse in (False, True):
        hs, _ = gru_scan_forward(x, p, reverse=reverse)
        ref = scalar_gru_scan(x[0], p, reverse=reverse)
        np.testing.assert_allclose(hs[0], ref, atol=1e-12)


def test_bigru_time_reversal_symmetry(rng):
    """Reversing the input and swapping the direction parameters must give
    the reversed output with its direction halves swapped."""
    hidden = 4
    fwd = _random_direction(rng, 3, hidden)
    bwd = _random_direction(rng, 3, hidden)
    layer = GruLayerParams(input_dim=3, hidden_dim=hidden, fwd=fwd, bwd=bwd)
    swapped = GruLayerParams(input_dim=3, hidden_dim=hidden, fwd=bwd, bwd=fwd)
    x = rng.normal(size=(2, 10, 3))
    y, _ = bigru_layer_forward(x, layer)
    y_rev, _ = bigru_layer_forward(x[:, ::-1], swapped)
    expected = np.concatenate([y_rev[:, ::-1, hidden:], y_rev[:, ::-1, :hidden]],
                              axis=2)
    np.testing.assert_allclose(y, expected, atol=1e-12)


def test_single_frame_directions_coincide(rng):
    """With one frame there is no past or future, so running the same cell
    in both directions produces identical halves."""
    p = _random_direction(rng, 3, 4)
    layer = GruLayerParams(input_dim=3, hidden_dim=4, fwd=p, bwd=p)
    y, _ = bigru_layer_forward(rng.normal(size=(1, 1, 3)), layer)
    np.testing.assert_allclose(y[0, 0, :4], y[0, 0, 4:], atol=1e-15)


def test_bigru_layer_rejects_wrong_width(rng):
    p = _random_direction(rng, 3, 4)
    layer = GruLayerParams(input_dim=3, hidden_dim=4, fwd=p, bwd=p)
    with pytest.raises(InvalidShape):
        bigru_layer_forward(rng.normal(size=(1, 5, 7)), layer)


# ------------------------------------------------------ full architecture

def test_zero_weights_score_half_everywhere():
    store = _zeroed(init_weights(full_model(c=8), seed=0))
    mel = _mel(np.zeros((8, 13)))
    np.testing.assert_array_equal(srsad_forward(mel, store), np.full(13, 0.5))


@pytest.mark.parametrize("c,t_len,layers", [(4, 6, 1), (6, 9, 2), (8, 5, 2)])
def test_forward_matches_scalar_reference(rng, c, t_len, layers):
    config = ModelConfig(srsad=SrSadConfig(c=c, gru_layers_per_block=layers))
    store = init_weights(config, seed=int(rng.integers(1 << 30)))
    mel_ct = rng.normal(size=(c, t_len))
    got = srsad_forward(_mel(mel_ct), store)
    want = scalar_srsad_forward(store, mel_ct)
    assert np.max(np.abs(got - want)) < 1e-10


def test_two_second_clip_yields_126_scores():
    cfg = FeatureConfig(n_mels=8)
    store = init_weights(full_model(c=8), seed=3, feature_config=cfg)
    audio = AudioBuffer(np.zeros(32000))
    scores = srsad_forward(logmel(audio, cfg), store)
    assert scores.shape == (126,)
    assert np.all((scores >= 0.0) & (scores <= 1.0))


def test_batched_forward_is_per_sample(rng):
    """Samples in a batch must not interact."""
    store = init_weights(full_model(c=6), seed=9)
    x = rng.normal(size=(3, 12, 6))
    batched, _ = forward_batch(store, x)
    for b in range(3):
        single, _ = forward_batch(store, x[b:b + 1])
        np.testing.assert_allclose(batched[b], single[0], atol=1e-12)


def test_forward_batch_rejects_wrong_feature_width(rng):
    store = init_weights(full_model(c=6), seed=1)
    with pytest.raises(InvalidShape):
        forward_batch(store, rng.normal(size=(1, 10, 5)))
    with pytest.raises(InvalidShape):
        forward_batch(store, rng.normal(size=(10, 6)))


def test_forward_rejects_band_count_mismatch(rng):
    store = init_weights(full_model(c=8), seed=1)
    with pytest.raises(IncompatibleWeights):
        srsad_forward(_mel(rng.normal(size=(6, 10))), store)


def test_architecture_mismatch_rejected(rng):
    full = init_weights(full_model(c=4), seed=0)
    lc = init_weights(lc_model(c=4), seed=0)
    mel = _mel(rng.normal(size=(4, 16)))
    with pytest.raises(IncompatibleWeights):
        srsad_forward(mel, lc)
    with pytest.raises(IncompatibleWeights):
        srsad_lc_forward(mel, full)


# --------------------------------------------------- reduced architecture

def test_lc_restores_exact_frame_count(rng):
    store = init_weights(lc_model(c=8), seed=5)
    for t_len in (126, 127, 100, 4, 5):
        scores = srsad_lc_forward(_mel(rng.normal(size=(8, t_len))), store)
        assert scores.shape == (t_len,)


def test_lc_internal_frame_chain(rng):
    """126 frames must shrink to 63 then 32 inside the resampler."""
    store = init_weights(lc_model(c=8), seed=5)
    x = rng.normal(size=(1, 126, 8))
    _, cache = forward_batch(store, x, want_cache=True)
    assert cache["down_lengths"] == [126, 63]
    # the front linear consumes the last down stage's output
    assert cache["front"][0].shape[1] == 32


def test_lc_rejects_clip_shorter_than_stride(rng):
    store = init_weights(lc_model(c=8), seed=5)
    with pytest.raises(InputTooShort):
        srsad_lc_forward(_mel(rng.normal(size=(8, 3))), store)
    # exactly the total stride is fine
    assert srsad_lc_forward(_mel(rng.normal(size=(8, 4))), store).shape == (4,)


def test_identity_resampler_matches_full_graph(rng):
    """With 1x1 identity convs the reduced graph collapses onto the
    one-layer full graph, so their outputs must agree to rounding."""
    c = 6
    full_cfg = ModelConfig(srsad=SrSadConfig(c=c, gru_layers_per_block=1))
    full_store = init_weights(full_cfg, seed=11)
    # the up stage consumes the 2*gru3_hidden core output, so its identity
    # conv is twice as wide as the down stage's
    lc_cfg = ModelConfig(
        architecture=ARCH_LC,
        srsad=SrSadConfig(c=c, gru_layers_per_block=1),
        resampler=LcResampleConfig(
            down=(ConvSpec(kernel=1, stride=1, channels=c),),
            up=(ConvSpec(kernel=1, stride=1, channels=2 * c),)))
    tensors = {}
    for name, shape, _ in parameter_plan(lc_cfg):
        if name.startswith(("down", "up")):
            width = shape[-1]
            tensors[name] = (np.eye(width)[None] if name.endswith(".w")
                             else np.zeros(width))
        else:
            tensors[name] = full_store.tensors[name].copy()
    lc_store = WeightStore(config=lc_cfg,
                           feature_hash=full_store.feature_hash,
                           tensors=tensors)
    mel_ct = rng.normal(size=(c, 17))
    got = srsad_lc_forward(_mel(mel_ct), lc_store)
    want = srsad_forward(_mel(mel_ct), full_store)
    np.testing.assert_allclose(got, want, atol=1e-12)


def test_forward_probs_dispatches_by_architecture(rng):
    mel = _mel(rng.normal(size=(4, 20)))
    for config in (full_model(c=4), lc_model(c=4)):
        store = init_weights(config, seed=2)
        scores = forward_probs(mel, store)
        assert scores.shape == (20,)


# ------------------------------------------------------- initialization

def test_init_follows_parameter_plan():
    for config in (full_model(c=8), lc_model(c=8)):
        store = init_weights(config, seed=7)
        plan = parameter_plan(config)
        assert [(n, t.shape) for n, t in store.tensors.items()] \
            == [(n, s) for n, s, _ in plan]
        for name, _, scale in plan:
            t = store.tensors[name]
            assert np.all(np.abs(t) <= scale)
            assert np.any(t != 0.0)


def test_init_is_seed_deterministic():
    a = init_weights(full_model(c=8), seed=42)
    b = init_weights(full_model(c=8), seed=42)
    other = init_weights(full_model(c=8), seed=43)
    for name in a.tensors:
        np.testing.assert_array_equal(a.tensors[name], b.tensors[name])
    assert any(not np.array_equal(a.tensors[n], other.tensors[n])
               for n in a.tensors)


def test_graph_dims_default_ratios():
    dims = graph_dims(full_model(c=80))
    assert dims["block_in"] == [40, 40 + 80 + 80, 80 + 80 + 80]
    assert dims["block_hidden"] == [40, 40, 80]
    assert dims["head_in"] == 160
    lc = graph_dims(lc_model(c=80))
    assert lc["mel_inner"] == 80
    assert lc["down_channels"] == [(80, 80), (80, 80)]
    assert lc["up_channels"] == [(160, 80), (80, 80)]
    assert lc["head_in"] == 80
