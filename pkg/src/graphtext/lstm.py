"""Minimal LSTM with hand-derived backpropagation through time.

Single-direction cells only; bidirectional behavior is obtained by running a
second parameter set over the reversed sequence. Gate layout inside the
stacked (4H,) pre-activation is [input, forget, candidate, output].

All math is float64 numpy; forward passes return a cache consumed by the
matching backward pass.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np


def sigmoid(x):
    out = np.empty_like(x)
    pos = x >= 0
    out[pos] = 1.0 / (1.0 + np.exp(-x[pos]))
    ez = np.exp(x[~pos])
    out[~pos] = ez / (1.0 + ez)
    return out


@dataclass
class LSTMParams:
    """Stacked gate weights: wx (4H, D), wh (4H, H), b (4H,)."""
    wx: np.ndarray
    wh: np.ndarray
    b: np.ndarray

    @classmethod
    def init(cls, input_dim: int, hidden_dim: int, rng: np.random.Generator) -> "LSTMParams":
        """Xavier-uniform weights; zero biases except forget gate at 1."""
        def xavier(rows, cols):
            limit = np.sqrt(6.0 / (rows + cols))
            return rng.uniform(-limit, limit, size=(rows, cols))

        wx = xavier(4 * hidden_dim, input_dim)
        wh = xavier(4 * hidden_dim, hidden_dim)
        b = np.zeros(4 * hidden_dim)
        b[hidden_dim:2 * hidden_dim] = 1.0
        return cls(wx=wx, wh=wh, b=b)

    @classmethod
    def zeros(cls, input_dim: int, hidden_dim: int) -> "LSTMParams":
        return cls(np.zeros((4 * hidden_dim, input_dim)),
                   np.zeros((4 * hidden_dim, hidden_dim)),
                   np.zeros(4 * hidden_dim))

    @property
    def hidden_dim(self) -> int:
        return self.wh.shape[1]

    def arrays(self) -> tuple[np.ndarray, np.ndarray, np.ndarray]:
        return self.wx, self.wh, self.b


@dataclass
class LSTMGrads:
    wx: np.ndarray
    wh: np.ndarray
    b: np.ndarray


class _Cache:
    __slots__ = ("xs", "i", "f", "g", "o", "c", "tanh_c", "h_prev")

    def __init__(self, xs, i, f, g, o, c, tanh_c, h_prev):
        self.xs = xs
        self.i = i
        self.f = f
        self.g = g
        self.o = o
        self.c = c
        self.tanh_c = tanh_c
        self.h_prev = h_prev


def lstm_forward(xs: np.ndarray, params: LSTMParams):
    """Run the cell over ``xs`` (T, D) from zero initial state.

    Returns (hs, cache) where hs is (T, H).
    """
    T = xs.shape[0]
    H = params.hidden_dim
    x_proj = xs @ params.wx.T  # (T, 4H)
    i = np.empty((T, H)); f = np.empty((T, H))
    g = np.empty((T, H)); o = np.empty((T, H))
    c = np.empty((T, H)); tanh_c = np.empty((T, H))
    h_prev = np.zeros((T, H))
    hs = np.empty((T, H))
    h = np.zeros(H)
    c_prev = np.zeros(H)
    for t in range(T):
        h_prev[t] = h
        z = x_proj[t] + params.wh @ h + params.b
        i[t] = sigmoid(z[:H])
        f[t] = sigmoid(z[H:2 * H])
        g[t] = np.tanh(z[2 * H:3 * H])
        o[t] = sigmoid(z[3 * H:])
        c[t] = f[t] * c_prev + i[t] * g[t]
        tanh_c[t] = np.tanh(c[t])
        h = o[t] * tanh_c[t]
        hs[t] = h
        c_prev = c[t]
    return hs, _Cache(xs, i, f, g, o, c, tanh_c, h_prev)


def lstm_backward(d_hs: np.ndarray, cache: _Cache, params: LSTMParams):
    """Backpropagate per-timestep output gradients ``d_hs`` (T, H).

    Returns (d_xs, LSTMGrads). Passing zeros everywhere except the last row
    of ``d_hs`` gives the final-state-only gradient.
    """
    T, H = d_hs.shape
    dz_all = np.empty((T, 4 * H))
    dh_next = np.zeros(H)
    dc_next = np.zeros(H)
    i, f, g, o = cache.i, cache.f, cache.g, cache.o
    for t in range(T - 1, -1, -1):
        dh = d_hs[t] + dh_next
        dc = dc_next + dh * o[t] * (1.0 - cache.tanh_c[t] ** 2)
        c_prev = cache.c[t - 1] if t > 0 else np.zeros(H)
        di = dc * g[t]
        df = dc * c_prev
        dg = dc * i[t]
        do = dh * cache.tanh_c[t]
        dz = dz_all[t]
        dz[:H] = di * i[t] * (1.0 - i[t])
        dz[H:2 * H] = df * f[t] * (1.0 - f[t])
        dz[2 * H:3 * H] = dg * (1.0 - g[t] ** 2)
        dz[3 * H:] = do * o[t] * (1.0 - o[t])
        dh_next = params.wh.T @ dz
        dc_next = dc * f[t]
    d_xs = dz_all @ params.wx
    grads = LSTMGrads(wx=dz_all.T @ cache.xs,
                      wh=dz_all.T @ cache.h_prev,
                      b=dz_all.sum(axis=0))
    return d_xs, grads


def bilstm_outputs(xs: np.ndarray, fwd: LSTMParams, bwd: LSTMParams):
    """Per-timestep concatenated bidirectional hidden states, (T, 2H).

    Returns (outputs, (fwd_cache, bwd_cache)); the backward direction runs
    the second parameter set over the reversed sequence and is flipped back
    into input order.
    """
    hs_f, cache_f = lstm_forward(xs, fwd)
    hs_b_rev, cache_b = lstm_forward(xs[::-1], bwd)
    return np.concatenate([hs_f, hs_b_rev[::-1]], axis=1), (cache_f, cache_b)


def bilstm_outputs_backward(d_out: np.ndarray, caches, fwd: LSTMParams, bwd: LSTMParams):
    """Backward for ``bilstm_outputs``; returns (d_xs, fwd grads, bwd grads)."""
    H = fwd.hidden_dim
    d_xs_f, grads_f = lstm_backward(d_out[:, :H], caches[0], fwd)
    d_xs_b_rev, grads_b = lstm_backward(d_out[::-1, H:], caches[1], bwd)
    return d_xs_f + d_xs_b_rev[::-1], grads_f, grads_b


def bilstm_final(xs: np.ndarray, fwd: LSTMParams, bwd: LSTMParams):
    """Concatenation of both directions' final hidden states, (2H,)."""
    hs_f, cache_f = lstm_forward(xs, fwd)
    hs_b_rev, cache_b = lstm_forward(xs[::-1], bwd)
    return np.concatenate([hs_f[-1], hs_b_rev[-1]]), (cache_f, cache_b)


def bilstm_final_backward(d_summary: np.ndarray, caches, fwd: LSTMParams, bwd: LSTMParams):
    """Backward for ``bilstm_final``; returns (d_xs, fwd grads, bwd grads)."""
    H = fwd.hidden_dim
    T = caches[0].xs.shape[0]
    d_hs_f = np.zeros((T, H))
    d_hs_f[-1] = d_summary[:H]
    d_hs_b = np.zeros((T, H))
    d_hs_b[-1] = d_summary[H:]
    d_xs_f, grads_f = lstm_backward(d_hs_f, caches[0], fwd)
    d_xs_b_rev, grads_b = lstm_backward(d_hs_b, caches[1], bwd)
    return d_xs_f + d_xs_b_rev[::-1], grads_f, grads_b
