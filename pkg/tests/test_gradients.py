"""Analytic backward passes against central finite differences.

Each primitive is probed in isolation with a random projection loss, then
the whole graphs (both architectures) are probed end to end through the
training objective. The acceptance suite repeats the end-to-end check over
many instances; here a few instances with every coordinate probed keep the
failure surface small.
"""

import numpy as np
import pytest

from srsad.model.config import ModelConfig, SrSadConfig, full_model, lc_model
from srsad.model.layers import (GruLayerParams, bigru_layer_backward,
                                bigru_layer_forward, conv1d_backward,
                                conv1d_forward, conv1d_transpose_backward,
                                conv1d_transpose_forward, linear_backward,
                                linear_forward, tanh_backward, tanh_forward)
from srsad.model.network import backward_batch, forward_batch, init_weights
from srsad.trainer import bce_loss

from oracles import fd_gradients, max_rel_err

H = 1e-5
TOL = 1e-4


def _fd_array(loss_fn, arr, h=H):
    return fd_gradients(loss_fn, {"x": arr}, h=h)["x"]


# ------------------------------------------------------------ primitives

def test_linear_backward_matches_fd(rng):
    x = rng.normal(size=(2, 5, 3))
    w = rng.normal(size=(4, 3))
    b = rng.normal(size=4)
    proj = rng.normal(size=(2, 5, 4))

    def loss():
        y, _ = linear_forward(x, w, b)
        return float(np.sum(y * proj))

    _, cache = linear_forward(x, w, b)
    dx, dw, db = linear_backward(proj, w, cache)
    analytic = {"x": dx, "w": dw, "b": db}
    numeric = {"x": _fd_array(loss, x), "w": _fd_array(loss, w),
               "b": _fd_array(loss, b)}
    assert max_rel_err(analytic, numeric) < TOL


def test_tanh_backward_matches_fd(rng):
    x = rng.normal(size=(3, 4))
    proj = rng.normal(size=(3, 4))

    def loss():
        y, _ = tanh_forward(x)
        return float(np.sum(y * proj))

    _, cache = tanh_forward(x)
    analytic = {"x": tanh_backward(proj, cache)}
    assert max_rel_err(analytic, {"x": _fd_array(loss, x)}) < TOL


@pytest.mark.parametrize("t_in,stride", [(7, 2), (8, 2), (6, 3)])
def test_conv_backward_matches_fd(rng, t_in, stride):
    x = rng.normal(size=(2, t_in, 3))
    w = rng.normal(size=(5, 3, 2))
    b = rng.normal(size=2)
    t_out = -(-t_in // stride)
    proj = rng.normal(size=(2, t_out, 2))

    def loss():
        y, _ = conv1d_forward(x, w, b, stride)
        return float(np.sum(y * proj))

    _, cache = conv1d_forward(x, w, b, stride)
    dx, dw, db = conv1d_backward(proj, cache)
    analytic = {"x": dx, "w": dw, "b": db}
    numeric = {"x": _fd_array(loss, x), "w": _fd_array(loss, w),
               "b": _fd_array(loss, b)}
    assert max_rel_err(analytic, numeric) < TOL


@pytest.mark.parametrize("t_in,t_target", [(4, 7), (4, 8), (3, 6)])
def test_transpose_conv_backward_matches_fd(rng, t_in, t_target):
    x = rng.normal(size=(2, t_in, 2))
    w = rng.normal(size=(5, 2, 3))
    b = rng.normal(size=3)
    proj = rng.normal(size=(2, t_target, 3))

    def loss():
        y, _ = conv1d_transpose_forward(x, w, b, 2, t_target)
        return float(np.sum(y * proj))

    _, cache = conv1d_transpose_forward(x, w, b, 2, t_target)
    dx, dw, db = conv1d_transpose_backward(proj, cache)
    analytic = {"x": dx, "w": dw, "b": db}
    numeric = {"x": _fd_array(loss, x), "w": _fd_array(loss, w),
               "b": _fd_array(loss, b)}
    assert max_rel_err(analytic, numeric) < TOL


def test_bigru_backward_matches_fd(rng):
    store = init_weights(full_model(c=4), seed=8)
    params = {name: t for name, t in store.tensors.items()
              if name.startswith("gru1.l0.")}
    from srsad.model.network import _layer_params
    layer = _layer_params(store, 1, 0, 2, 2)
    x = rng.normal(size=(2, 6, 2))
    proj = rng.normal(size=(2, 6, 4))

    def loss():
        y, _ = bigru_layer_forward(x, _layer_params(store, 1, 0, 2, 2))
        return float(np.sum(y * proj))

    _, cache = bigru_layer_forward(x, layer)
    dx, gf, gb = bigru_layer_backward(proj, cache)
    analytic = {"x": dx}
    h = layer.hidden_dim
    for tag, g in (("fwd", gf), ("bwd", gb)):
        for i, gate in enumerate(("r", "z", "n")):
            analytic[f"gru1.l0.{tag}.w_{gate}"] = g["w_ih"][i * h:(i + 1) * h]
            analytic[f"gru1.l0.{tag}.u_{gate}"] = g["w_hh"][i * h:(i + 1) * h]
            analytic[f"gru1.l0.{tag}.b_w{gate}"] = g["b_ih"][i * h:(i + 1) * h]
            analytic[f"gru1.l0.{tag}.b_u{gate}"] = g["b_hh"][i * h:(i + 1) * h]
    numeric = fd_gradients(loss, params)
    numeric["x"] = _fd_array(loss, x)
    assert max_rel_err(analytic, numeric) < TOL


# ------------------------------------------------------------ whole graph

def _graph_fd(config, t_len, seed):
    rng = np.random.default_rng(seed)
    store = init_weights(config, seed=seed)
    x = rng.normal(size=(1, t_len, config.srsad.c))
    y = rng.integers(0, 2, size=(1, t_len)).astype(float)

    probs, cache = forward_batch(store, x, want_cache=True)
    analytic = backward_batch(store, cache, (probs - y) / probs.size)

    def loss():
        p, _ = forward_batch(store, x)
        return bce_loss(p, y)

    numeric = fd_gradients(loss, store.tensors)
    return analytic, numeric


def test_full_graph_gradients_match_fd():
    analytic, numeric = _graph_fd(
        ModelConfig(srsad=SrSadConfig(c=4, gru_layers_per_block=2)),
        t_len=4, seed=101)
    assert set(analytic) == set(numeric)
    assert max_rel_err(analytic, numeric) < TOL


def test_lc_graph_gradients_match_fd():
    analytic, numeric = _graph_fd(lc_model(c=4), t_len=9, seed=202)
    assert set(analytic) == set(numeric)
    assert max_rel_err(analytic, numeric) < TOL


def test_gradient_keys_cover_every_tensor(rng):
    for config in (full_model(c=6), lc_model(c=6)):
        store = init_weights(config, seed=4)
        x = rng.normal(size=(2, 8, 6))
        y = rng.integers(0, 2, size=(2, 8)).astype(float)
        probs, cache = forward_batch(store, x, want_cache=True)
        grads = backward_batch(store, cache, (probs - y) / probs.size)
        assert set(grads) == set(store.tensors)
        for name, g in grads.items():
            assert g.shape == store.tensors[name].shape, name
            assert np.all(np.isfinite(g)), name


def test_zero_weights_head_bias_gradient_is_half(rng):
    """Zero weights score 1/2 everywhere; against all-zero labels the loss
    gradient reaches only the output layer, and its bias gradient is the
    mean residual, exactly 1/2."""
    store = init_weights(full_model(c=4), seed=0)
    for t in store.tensors.values():
        t[:] = 0.0
    x = rng.normal(size=(1, 10, 4))
    y = np.zeros((1, 10))
    probs, cache = forward_batch(store, x, want_cache=True)
    grads = backward_batch(store, cache, (probs - y) / probs.size)
    np.testing.assert_allclose(grads["out.b"], [0.5], atol=1e-15)
    for name, g in grads.items():
        if not name.startswith("out."):
            np.testing.assert_array_equal(g, np.zeros_like(g), err_msg=name)
