"""The detector graphs: forward, backward, initialization.

Both architectures share the recurrent core, a three-block bidirectional
GRU stack with skip concatenations:

    f0 = tanh(front mel')
    g1 = block1(f0)
    g2 = block2([f0, g1, mel'])
    g3 = block3([g1, g2, mel'])
    scores = sigmoid(out(tanh(head(h))))

For the full model mel' is the log-mel input and h = g3. The reduced model
first shrinks the frame rate with strided convs (mel' is the last down
stage's output), runs 1-layer blocks at the low rate, and restores the
original frame count with transposed convs before the head.
"""

from __future__ import annotations

import numpy as np

from ..dsp import FeatureConfig, MelSpectrogram
from ..errors import IncompatibleWeights, InputTooShort, InvalidShape
from ..rng import STREAM_INIT, stream_rng
from .config import ARCH_LC, ModelConfig
from .layers import (GruDirectionParams, GruLayerParams, MacCounter,
                     bigru_layer_backward, bigru_layer_forward, conv1d_backward,
                     conv1d_forward, conv1d_transpose_backward,
                     conv1d_transpose_forward, linear_backward, linear_forward,
                     sigmoid, tanh_backward, tanh_forward)
from .weights import WeightStore

_GATE_TENSORS = ("w_r", "w_z", "w_n", "u_r", "u_z", "u_n",
                 "b_wr", "b_wz", "b_wn", "b_ur", "b_uz", "b_un")


def _gru_shapes(input_dim: int, hidden: int):
    shapes = {}
    for name in _GATE_TENSORS:
        if name.startswith("w_"):
            shapes[name] = (hidden, input_dim)
        elif name.startswith("u_"):
            shapes[name] = (hidden, hidden)
        else:
            shapes[name] = (hidden,)
    return shapes


def graph_dims(config: ModelConfig) -> dict:
    """Channel bookkeeping for both architectures.

    mel_inner is what the recurrent core sees as its spectral input; for
    the reduced model that is the last down-conv's channel count.
    """
    s = config.srsad
    dims = {"mel_in": s.c}
    if config.architecture == ARCH_LC:
        chain = []
        c_in = s.c
        for spec in config.resampler.down:
            chain.append((c_in, spec.channels))
            c_in = spec.channels
        dims["down_channels"] = chain
        dims["mel_inner"] = c_in
    else:
        dims["mel_inner"] = s.c
    dims["block_in"] = [
        s.front_out,
        s.front_out + 2 * s.gru1_hidden + dims["mel_inner"],
        2 * s.gru1_hidden + 2 * s.gru2_hidden + dims["mel_inner"],
    ]
    dims["block_hidden"] = [s.gru1_hidden, s.gru2_hidden, s.gru3_hidden]
    core_out = 2 * s.gru3_hidden
    if config.architecture == ARCH_LC:
        chain = []
        c_in = core_out
        for spec in config.resampler.up:
            chain.append((c_in, spec.channels))
            c_in = spec.channels
        dims["up_channels"] = chain
        dims["head_in"] = c_in
    else:
        dims["head_in"] = core_out
    return dims


def parameter_plan(config: ModelConfig) -> list[tuple[str, tuple, float]]:
    """Ordered (name, shape, init_scale) for every tensor in the graph."""
    dims = graph_dims(config)
    s = config.srsad
    plan = []

    def linear(prefix, c_in, c_out):
        scale = 1.0 / np.sqrt(c_in)
        plan.append((f"{prefix}.w", (c_out, c_in), scale))
        plan.append((f"{prefix}.b", (c_out,), scale))

    def conv(prefix, spec, c_in):
        scale = 1.0 / np.sqrt(spec.kernel * c_in)
        plan.append((f"{prefix}.w", (spec.kernel, c_in, spec.channels), scale))
        plan.append((f"{prefix}.b", (spec.channels,), scale))

    if config.architecture == ARCH_LC:
        for j, spec in enumerate(config.resampler.down):
            conv(f"down{j}", spec, dims["down_channels"][j][0])
    linear("front", dims["mel_inner"], s.front_out)
    for k in range(3):
        layer_in = dims["block_in"][k]
        hidden = dims["block_hidden"][k]
        for i in range(s.gru_layers_per_block):
            c_in = layer_in if i == 0 else 2 * hidden
            scale = 1.0 / np.sqrt(hidden)
            for direction in ("fwd", "bwd"):
                for name, shape in _gru_shapes(c_in, hidden).items():
                    plan.append((f"gru{k + 1}.l{i}.{direction}.{name}",
                                 shape, scale))
    if config.architecture == ARCH_LC:
        for j, spec in enumerate(config.resampler.up):
            conv(f"up{j}", spec, dims["up_channels"][j][0])
    linear("head", dims["head_in"], s.head_hidden)
    linear("out", s.head_hidden, 1)
    return plan


def init_weights(config: ModelConfig, seed: int,
                 feature_config: FeatureConfig | None = None) -> WeightStore:
    """Uniform(-k, k) init, k = 1/sqrt(fan), in fixed graph order."""
    if feature_config is None:
        feature_config = FeatureConfig(n_mels=config.srsad.c)
    rng = stream_rng(seed, STREAM_INIT)
    tensors = {}
    for name, shape, scale in parameter_plan(config):
        tensors[name] = rng.uniform(-scale, scale, size=shape)
    return WeightStore(config=config, feature_hash=feature_config.content_hash(),
                       tensors=tensors)


def _layer_params(store: WeightStore, block: int, layer: int,
                  input_dim: int, hidden: int) -> GruLayerParams:
    def direction(tag):
        t = {name: store.tensors[f"gru{block}.l{layer}.{tag}.{name}"]
             for name in _GATE_TENSORS}
        return GruDirectionParams(**t)
    return GruLayerParams(input_dim=input_dim, hidden_dim=hidden,
                          fwd=direction("fwd"), bwd=direction("bwd"))


def forward_batch(store: WeightStore, x: np.ndarray,
                  counter: MacCounter | None = None, want_cache: bool = False):
    """Batched forward over (B, T, c) features; returns (B, T) scores."""
    config = store.config
    dims = graph_dims(config)
    s = config.srsad
    if x.ndim != 3 or x.shape[2] != s.c:
        raise InvalidShape(f"expected (B, T, {s.c}) features, got {x.shape}")
    cache: dict = {"t_in": x.shape[1]}

    h = x
    if config.architecture == ARCH_LC:
        down_caches = []
        down_lengths = []
        for j, spec in enumerate(config.resampler.down):
            down_lengths.append(h.shape[1])
            h, c = conv1d_forward(h, store.tensors[f"down{j}.w"],
                                  store.tensors[f"down{j}.b"], spec.stride,
                                  counter)
            down_caches.append(c)
        cache["down"] = down_caches
        cache["down_lengths"] = down_lengths
    mel_inner = h

    pre_f0, lin_cache = linear_forward(mel_inner, store.tensors["front.w"],
                                       store.tensors["front.b"], counter)
    f0, tanh_cache = tanh_forward(pre_f0)
    cache["front"] = (lin_cache, tanh_cache)

    block_caches = []
    block_inputs = []
    g = [None, None, None]
    for k in range(3):
        if k == 0:
            block_x = f0
        elif k == 1:
            block_x = np.concatenate([f0, g[0], mel_inner], axis=2)
        else:
            block_x = np.concatenate([g[0], g[1], mel_inner], axis=2)
        block_inputs.append(block_x.shape[2])
        layer_caches = []
        h_k = block_x
        for i in range(s.gru_layers_per_block):
            params = _layer_params(store, k + 1, i,
                                   h_k.shape[2], dims["block_hidden"][k])
            h_k, c = bigru_layer_forward(h_k, params, counter)
            layer_caches.append(c)
        block_caches.append(layer_caches)
        g[k] = h_k
    cache["blocks"] = block_caches
    cache["block_inputs"] = block_inputs

    h = g[2]
    if config.architecture == ARCH_LC:
        up_caches = []
        targets = list(reversed(cache["down_lengths"]))
        for j, spec in enumerate(config.resampler.up):
            h, c = conv1d_transpose_forward(h, store.tensors[f"up{j}.w"],
                                            store.tensors[f"up{j}.b"],
                                            spec.stride, targets[j], counter)
            up_caches.append(c)
        cache["up"] = up_caches

    pre_z, head_cache = linear_forward(h, store.tensors["head.w"],
                                       store.tensors["head.b"], counter)
    z1, head_tanh = tanh_forward(pre_z)
    logits, out_cache = linear_forward(z1, store.tensors["out.w"],
                                       store.tensors["out.b"], counter)
    cache["head"] = (head_cache, head_tanh, out_cache)
    probs = sigmoid(logits[..., 0])
    if want_cache:
        cache["probs"] = probs
        return probs, cache
    return probs, None


def backward_batch(store: WeightStore, cache: dict,
                   dlogits: np.ndarray) -> dict[str, np.ndarray]:
    """Gradients for every tensor given d(loss)/d(logits), shape (B, T)."""
    config = store.config
    s = config.srsad
    grads: dict[str, np.ndarray] = {}

    head_cache, head_tanh, out_cache = cache["head"]
    dz1, grads["out.w"], grads["out.b"] = linear_backward(
        dlogits[..., None], store.tensors["out.w"], out_cache)
    dpre_z = tanh_backward(dz1, head_tanh)
    dh, grads["head.w"], grads["head.b"] = linear_backward(
        dpre_z, store.tensors["head.w"], head_cache)

    if config.architecture == ARCH_LC:
        for j in range(len(config.resampler.up) - 1, -1, -1):
            dh, grads[f"up{j}.w"], grads[f"up{j}.b"] = conv1d_transpose_backward(
                dh, cache["up"][j])

    dmel_inner = None
    df0 = None
    dg = [None, None, dh]
    for k in range(2, -1, -1):
        d_block = dg[k]
        for i in range(s.gru_layers_per_block - 1, -1, -1):
            d_block, gf, gb = bigru_layer_backward(d_block, cache["blocks"][k][i])
            _store_gru_grads(grads, k + 1, i, gf, gb)
        h1, h2 = 2 * s.gru1_hidden, 2 * s.gru2_hidden
        f0_dim = s.front_out
        if k == 2:
            _add(dg, 0, d_block[:, :, :h1])
            _add(dg, 1, d_block[:, :, h1:h1 + h2])
            dmel_inner = _acc(dmel_inner, d_block[:, :, h1 + h2:])
        elif k == 1:
            df0 = _acc(df0, d_block[:, :, :f0_dim])
            _add(dg, 0, d_block[:, :, f0_dim:f0_dim + h1])
            dmel_inner = _acc(dmel_inner, d_block[:, :, f0_dim + h1:])
        else:
            df0 = _acc(df0, d_block)

    lin_cache, tanh_cache = cache["front"]
    dpre_f0 = tanh_backward(df0, tanh_cache)
    dx, grads["front.w"], grads["front.b"] = linear_backward(
        dpre_f0, store.tensors["front.w"], lin_cache)
    dmel_inner = _acc(dmel_inner, dx)

    if config.architecture == ARCH_LC:
        d = dmel_inner
        for j in range(len(config.resampler.down) - 1, -1, -1):
            d, grads[f"down{j}.w"], grads[f"down{j}.b"] = conv1d_backward(
                d, cache["down"][j])
    return grads


def _acc(acc, value):
    return value.copy() if acc is None else acc + value


def _add(dg, idx, value):
    dg[idx] = value.copy() if dg[idx] is None else dg[idx] + value


def _store_gru_grads(grads, block, layer, gf, gb):
    for tag, g in (("fwd", gf), ("bwd", gb)):
        h = g["w_hh"].shape[1]
        prefix = f"gru{block}.l{layer}.{tag}"
        for i, gate in enumerate(("r", "z", "n")):
            grads[f"{prefix}.w_{gate}"] = g["w_ih"][i * h:(i + 1) * h]
            grads[f"{prefix}.u_{gate}"] = g["w_hh"][i * h:(i + 1) * h]
            grads[f"{prefix}.b_w{gate}"] = g["b_ih"][i * h:(i + 1) * h]
            grads[f"{prefix}.b_u{gate}"] = g["b_hh"][i * h:(i + 1) * h]


def _check_mel(mel: MelSpectrogram, store: WeightStore) -> None:
    if mel.n_mels != store.config.srsad.c:
        raise IncompatibleWeights(
            f"model expects {store.config.srsad.c} mel bands, got {mel.n_mels}")


def srsad_forward(mel: MelSpectrogram, store: WeightStore,
                  counter: MacCounter | None = None) -> np.ndarray:
    """Frame scores in [0, 1] for the full architecture."""
    if store.config.architecture != "sr-sad":
        raise IncompatibleWeights(
            f"weights are for {store.config.architecture}, expected sr-sad")
    _check_mel(mel, store)
    x = np.ascontiguousarray(mel.values.T)[None]
    probs, _ = forward_batch(store, x, counter=counter)
    return probs[0]


def srsad_lc_forward(mel: MelSpectrogram, store: WeightStore,
                     counter: MacCounter | None = None) -> np.ndarray:
    """Frame scores for the reduced architecture; restores the exact input
    frame count after resampling."""
    if store.config.architecture != ARCH_LC:
        raise IncompatibleWeights(
            f"weights are for {store.config.architecture}, expected {ARCH_LC}")
    _check_mel(mel, store)
    min_frames = store.config.resampler.total_stride
    if mel.n_frames < min_frames:
        raise InputTooShort(
            f"{mel.n_frames} frames < resampler stride {min_frames}")
    x = np.ascontiguousarray(mel.values.T)[None]
    probs, _ = forward_batch(store, x, counter=counter)
    return probs[0]


def forward_probs(mel: MelSpectrogram, store: WeightStore,
                  counter: MacCounter | None = None) -> np.ndarray:
    if store.config.architecture == ARCH_LC:
        return srsad_lc_forward(mel, store, counter)
    return srsad_forward(mel, store, counter)
