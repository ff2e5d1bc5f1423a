"""Network primitives with explicit forward and backward passes.

All batched activations are (batch, time, channels) float64. Forward
functions return (output, cache); the cache carries exactly what the
matching backward needs. Backward functions return input gradients plus
per-tensor weight gradients. No autograd anywhere; every backward here is
hand-derived and checked against finite differences in the test suite.

Multiply-accumulate accounting: pass a MacCounter and every matmul,
convolution and recurrent step adds its MAC count (bias adds and
element-wise gates are excluded by convention).
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np
from scipy.special import expit

from ..errors import InvalidShape


class MacCounter:
    """Accumulates multiply-accumulate counts observed during forwards."""

    def __init__(self):
        self.total = 0

    def add(self, n: int) -> None:
        self.total += int(n)


def sigmoid(x):
    return expit(x)


def _matmul(a: np.ndarray, b: np.ndarray, counter: MacCounter | None):
    if counter is not None:
        rows = int(np.prod(a.shape[:-1]))
        counter.add(rows * a.shape[-1] * b.shape[-1])
    return a @ b


# ---------------------------------------------------------------- linear

def linear_forward(x, w, b, counter=None):
    """x: (B,T,Cin) or (B,Cin); w: (Cout,Cin); b: (Cout,)."""
    y = _matmul(x, w.T, counter) + b
    return y, x


def linear_backward(dy, w, cache):
    x = cache
    dy2 = dy.reshape(-1, dy.shape[-1])
    x2 = x.reshape(-1, x.shape[-1])
    dw = dy2.T @ x2
    db = dy2.sum(axis=0)
    dx = dy @ w
    return dx, dw, db


def tanh_forward(x):
    y = np.tanh(x)
    return y, y


def tanh_backward(dy, cache):
    y = cache
    return dy * (1.0 - y * y)


# ---------------------------------------------------------------- GRU

@dataclass
class GruDirectionParams:
    """One scan direction of a GRU layer.

    Gate equations (two-bias convention, reset gate inside the candidate):

        r = sigmoid(w_r x + b_wr + u_r h + b_ur)
        z = sigmoid(w_z x + b_wz + u_z h + b_uz)
        n = tanh(w_n x + b_wn + r * (u_n h + b_un))
        h' = (1 - z) * n + z * h
    """

    w_r: np.ndarray
    w_z: np.ndarray
    w_n: np.ndarray
    u_r: np.ndarray
    u_z: np.ndarray
    u_n: np.ndarray
    b_wr: np.ndarray
    b_wz: np.ndarray
    b_wn: np.ndarray
    b_ur: np.ndarray
    b_uz: np.ndarray
    b_un: np.ndarray

    def stacked(self):
        """(w_ih, w_hh, b_ih, b_hh) with gates stacked in r, z, n order."""
        w_ih = np.concatenate([self.w_r, self.w_z, self.w_n], axis=0)
        w_hh = np.concatenate([self.u_r, self.u_z, self.u_n], axis=0)
        b_ih = np.concatenate([self.b_wr, self.b_wz, self.b_wn])
        b_hh = np.concatenate([self.b_ur, self.b_uz, self.b_un])
        return w_ih, w_hh, b_ih, b_hh


@dataclass
class GruLayerParams:
    """One bidirectional GRU layer: the same cell run forward and backward
    in time, outputs concatenated to 2*hidden_dim channels."""

    input_dim: int
    hidden_dim: int
    fwd: GruDirectionParams
    bwd: GruDirectionParams

    direction_count = 2


def gru_cell_step(x_t: np.ndarray, h_prev: np.ndarray,
                  params: GruDirectionParams) -> np.ndarray:
    """Single recurrent step for one direction; 1-D vectors in and out."""
    r = sigmoid(params.w_r @ x_t + params.b_wr + params.u_r @ h_prev + params.b_ur)
    z = sigmoid(params.w_z @ x_t + params.b_wz + params.u_z @ h_prev + params.b_uz)
    n = np.tanh(params.w_n @ x_t + params.b_wn
                + r * (params.u_n @ h_prev + params.b_un))
    return (1.0 - z) * n + z * h_prev


def gru_scan_forward(x, direction: GruDirectionParams, reverse: bool,
                     counter=None):
    """Run one direction over (B,T,Cin); returns (B,T,H) hidden sequence.

    Input projections for every step are one matmul; only the recurrent
    term is sequential.
    """
    w_ih, w_hh, b_ih, b_hh = direction.stacked()
    batch, steps, _ = x.shape
    hidden = w_hh.shape[1]
    xp = _matmul(x, w_ih.T, counter) + b_ih
    order = range(steps - 1, -1, -1) if reverse else range(steps)

    hs = np.empty((batch, steps, hidden))
    rs = np.empty_like(hs)
    zs = np.empty_like(hs)
    ns = np.empty_like(hs)
    us = np.empty_like(hs)          # u_n h + b_un, needed for the reset grad
    h_t = np.zeros((batch, hidden))
    for t in order:
        rec = _matmul(h_t, w_hh.T, counter) + b_hh
        pre = xp[:, t]
        r = sigmoid(pre[:, :hidden] + rec[:, :hidden])
        z = sigmoid(pre[:, hidden:2 * hidden] + rec[:, hidden:2 * hidden])
        u = rec[:, 2 * hidden:]
        n = np.tanh(pre[:, 2 * hidden:] + r * u)
        h_t = (1.0 - z) * n + z * h_t
        rs[:, t], zs[:, t], ns[:, t], us[:, t], hs[:, t] = r, z, n, u, h_t
    cache = (x, rs, zs, ns, us, hs, w_ih, w_hh, reverse)
    return hs, cache


def gru_scan_backward(dh_seq, cache):
    """Backprop through one direction scan.

    Returns (dx, grads) where grads has the stacked keys w_ih, w_hh, b_ih,
    b_hh; the caller splits them back into per-gate tensors.
    """
    x, rs, zs, ns, us, hs, w_ih, w_hh, reverse = cache
    batch, steps, hidden = hs.shape
    order = range(steps - 1, -1, -1) if reverse else range(steps)

    dxp = np.zeros((batch, steps, 3 * hidden))
    dw_hh = np.zeros_like(w_hh)
    db_hh = np.zeros(3 * hidden)
    carry = np.zeros((batch, hidden))
    zero_h = np.zeros((batch, hidden))
    seq = list(order)
    for i in range(steps - 1, -1, -1):
        t = seq[i]
        h_prev = hs[:, seq[i - 1]] if i > 0 else zero_h
        r, z, n, u = rs[:, t], zs[:, t], ns[:, t], us[:, t]

        dh = dh_seq[:, t] + carry
        dn = dh * (1.0 - z)
        dz = dh * (h_prev - n)
        dh_prev = dh * z

        dan = dn * (1.0 - n * n)
        daz = dz * z * (1.0 - z)
        dr = dan * u
        du = dan * r
        dar = dr * r * (1.0 - r)

        drec = np.concatenate([dar, daz, du], axis=1)
        dxp[:, t, :hidden] = dar
        dxp[:, t, hidden:2 * hidden] = daz
        dxp[:, t, 2 * hidden:] = dan
        dw_hh += drec.T @ h_prev
        db_hh += drec.sum(axis=0)
        carry = dh_prev + drec @ w_hh

    dxp2 = dxp.reshape(-1, 3 * hidden)
    grads = {
        "w_ih": dxp2.T @ x.reshape(-1, x.shape[-1]),
        "w_hh": dw_hh,
        "b_ih": dxp2.sum(axis=0),
        "b_hh": db_hh,
    }
    dx = dxp @ w_ih
    return dx, grads


def bigru_layer_forward(x, layer: GruLayerParams, counter=None):
    if x.shape[-1] != layer.input_dim:
        raise InvalidShape(
            f"GRU layer expects {layer.input_dim} channels, got {x.shape[-1]}")
    h_f, cache_f = gru_scan_forward(x, layer.fwd, reverse=False, counter=counter)
    h_b, cache_b = gru_scan_forward(x, layer.bwd, reverse=True, counter=counter)
    return np.concatenate([h_f, h_b], axis=2), (cache_f, cache_b, layer.hidden_dim)


def bigru_layer_backward(dy, cache):
    cache_f, cache_b, hidden = cache
    dx_f, grads_f = gru_scan_backward(dy[:, :, :hidden], cache_f)
    dx_b, grads_b = gru_scan_backward(dy[:, :, hidden:], cache_b)
    return dx_f + dx_b, grads_f, grads_b


def bigru_forward(x_ct: np.ndarray, layers: list[GruLayerParams]) -> np.ndarray:
    """Channel-by-time convenience wrapper over a stack of bidirectional layers."""
    h = np.ascontiguousarray(x_ct.T)[None]
    for layer in layers:
        h, _ = bigru_layer_forward(h, layer)
    return h[0].T


# ---------------------------------------------------------------- conv

def _conv_padding(t_in: int, kernel: int, stride: int):
    t_out = -(-t_in // stride)
    pad_total = max((t_out - 1) * stride + kernel - t_in, 0)
    return t_out, pad_total // 2, pad_total - pad_total // 2


def conv1d_forward(x, w, b, stride: int, counter=None):
    """Strided 1-D conv along time with ceil-mode centered zero padding.

    x: (B,T,Cin); w: (k,Cin,Cout); output (B, ceil(T/stride), Cout).
    Purely linear, no activation.
    """
    batch, t_in, _ = x.shape
    kernel = w.shape[0]
    t_out, pad_left, pad_right = _conv_padding(t_in, kernel, stride)
    xp = np.pad(x, ((0, 0), (pad_left, pad_right), (0, 0)))
    windows = np.lib.stride_tricks.sliding_window_view(xp, kernel, axis=1)
    windows = windows[:, ::stride]                     # (B, t_out, Cin, k)
    if counter is not None:
        counter.add(batch * t_out * kernel * w.shape[1] * w.shape[2])
    y = np.einsum("btik,kio->bto", windows, w) + b
    cache = (windows, w, stride, t_in, pad_left)
    return y, cache


def conv1d_backward(dy, cache):
    windows, w, stride, t_in, pad_left = cache
    kernel = w.shape[0]
    batch, t_out, _ = dy.shape
    dw = np.einsum("btik,bto->kio", windows, dy)
    db = dy.sum(axis=(0, 1))
    contrib = np.einsum("bto,kio->btki", dy, w)
    pad_total = max((t_out - 1) * stride + kernel - t_in, 0)
    dxp = np.zeros((batch, t_in + pad_total, w.shape[1]))
    for tap in range(kernel):
        dxp[:, tap: tap + (t_out - 1) * stride + 1: stride] += contrib[:, :, tap]
    dx = dxp[:, pad_left: pad_left + t_in]
    return dx, dw, db


def conv1d_transpose_forward(x, w, b, stride: int, t_target: int, counter=None):
    """Transposed strided conv: scatter each input frame through the kernel,
    then center-crop to t_target frames (the mirrored down stage's input
    length). x: (B,T,Cin); w: (k,Cin,Cout)."""
    batch, t_in, _ = x.shape
    kernel, c_in, c_out = w.shape
    t_full = (t_in - 1) * stride + kernel
    if t_full < t_target:
        raise InvalidShape(
            f"transposed conv covers {t_full} frames, target {t_target}")
    crop_left = (t_full - t_target) // 2
    if counter is not None:
        counter.add(batch * t_in * kernel * c_in * c_out)
    contrib = np.einsum("bti,kio->btko", x, w)
    y_full = np.zeros((batch, t_full, c_out))
    for tap in range(kernel):
        y_full[:, tap: tap + (t_in - 1) * stride + 1: stride] += contrib[:, :, tap]
    y = y_full[:, crop_left: crop_left + t_target] + b
    cache = (x, w, stride, t_full, crop_left, t_target)
    return y, cache


def conv1d_transpose_backward(dy, cache):
    x, w, stride, t_full, crop_left, t_target = cache
    kernel = w.shape[0]
    batch = dy.shape[0]
    dy_full = np.zeros((batch, t_full, w.shape[2]))
    dy_full[:, crop_left: crop_left + t_target] = dy
    dyw = np.lib.stride_tricks.sliding_window_view(dy_full, kernel, axis=1)
    dyw = dyw[:, ::stride]                             # (B, t_in, Cout, k)
    dw = np.einsum("bti,btok->kio", x, dyw)
    db = dy.sum(axis=(0, 1))
    dx = np.einsum("btok,kio->bti", dyw, w)
    return dx, dw, db
