"""Sequence kernels with a numba fast path and a numpy fallback.

The recurrent cell is the only genuinely sequential hot loop in the
model, so it and the embedding scatter-add get @njit versions; matrix
products (including convolution via im2col) go through BLAS in both
backends.  LANGGRID_NUMBA=0 in the environment, or set_backend(), picks
the fallback.  Both backends implement identical math; results agree to
rounding.

Gate layout along the last axis is i, f, g, o in blocks of H.
"""
from __future__ import annotations

import math
import os

import numpy as np

try:
    from numba import njit

    _HAVE_NUMBA = True
except ImportError:  # pragma: no cover - numba is an install dependency
    _HAVE_NUMBA = False


def _default_backend() -> str:
    if not _HAVE_NUMBA:
        return "numpy"
    return "numpy" if os.environ.get("LANGGRID_NUMBA", "1") == "0" else "numba"


_BACKEND = _default_backend()


def set_backend(name: str) -> None:
    global _BACKEND
    if name not in ("numba", "numpy"):
        raise ValueError(f"unknown backend {name!r}")
    if name == "numba" and not _HAVE_NUMBA:
        raise RuntimeError("numba is not installed")
    _BACKEND = name


def current_backend() -> str:
    return _BACKEND


# -- numpy implementations ----------------------------------------------------


def _sigmoid(x: np.ndarray) -> np.ndarray:
    return 1.0 / (1.0 + np.exp(-x))


def _lstm_fwd_numpy(xg, h0, c0, Wh):
    B, T, H4 = xg.shape
    H = H4 // 4
    h_seq = np.empty((B, T, H), dtype=xg.dtype)
    c_seq = np.empty((B, T, H), dtype=xg.dtype)
    act = np.empty((B, T, H4), dtype=xg.dtype)
    tanc = np.empty((B, T, H), dtype=xg.dtype)
    h = h0.copy()
    c = c0.copy()
    for t in range(T):
        pre = xg[:, t] + h @ Wh
        i = _sigmoid(pre[:, :H])
        f = _sigmoid(pre[:, H : 2 * H])
        g = np.tanh(pre[:, 2 * H : 3 * H])
        o = _sigmoid(pre[:, 3 * H :])
        c = f * c + i * g
        tc = np.tanh(c)
        h = o * tc
        act[:, t, :H] = i
        act[:, t, H : 2 * H] = f
        act[:, t, 2 * H : 3 * H] = g
        act[:, t, 3 * H :] = o
        c_seq[:, t] = c
        tanc[:, t] = tc
        h_seq[:, t] = h
    return h_seq, c_seq, act, tanc


def _lstm_bwd_numpy(dh_seq, dh_last, dc_last, act, tanc, c_seq, c0, WhT):
    B, T, H4 = act.shape
    H = H4 // 4
    dgates = np.empty((B, T, H4), dtype=act.dtype)
    dh = dh_last.copy()
    dc = dc_last.copy()
    for t in range(T - 1, -1, -1):
        dh = dh + dh_seq[:, t]
        i = act[:, t, :H]
        f = act[:, t, H : 2 * H]
        g = act[:, t, 2 * H : 3 * H]
        o = act[:, t, 3 * H :]
        tc = tanc[:, t]
        cprev = c_seq[:, t - 1] if t > 0 else c0
        dcc = dc + dh * o * (1.0 - tc * tc)
        dgates[:, t, :H] = dcc * g * i * (1.0 - i)
        dgates[:, t, H : 2 * H] = dcc * cprev * f * (1.0 - f)
        dgates[:, t, 2 * H : 3 * H] = dcc * i * (1.0 - g * g)
        dgates[:, t, 3 * H :] = dh * tc * o * (1.0 - o)
        dc = dcc * f
        dh = dgates[:, t] @ WhT
    return dgates, dh, dc


def _scatter_rows_numpy(out, idx, vals):
    np.add.at(out, idx, vals)


# -- numba implementations -----------------------------------------------------

if _HAVE_NUMBA:

    @njit(cache=True)
    def _lstm_fwd_numba(xg, h0, c0, Wh):
        B, T, H4 = xg.shape
        H = H4 // 4
        h_seq = np.empty((B, T, H), dtype=xg.dtype)
        c_seq = np.empty((B, T, H), dtype=xg.dtype)
        act = np.empty((B, T, H4), dtype=xg.dtype)
        tanc = np.empty((B, T, H), dtype=xg.dtype)
        h = h0.copy()
        c = c0.copy()
        for t in range(T):
            pre = np.dot(h, Wh)
            for b in range(B):
                for j in range(H):
                    zi = xg[b, t, j] + pre[b, j]
                    zf = xg[b, t, H + j] + pre[b, H + j]
                    zg = xg[b, t, 2 * H + j] + pre[b, 2 * H + j]
                    zo = xg[b, t, 3 * H + j] + pre[b, 3 * H + j]
                    gi = 1.0 / (1.0 + math.exp(-zi))
                    gf = 1.0 / (1.0 + math.exp(-zf))
                    gg = math.tanh(zg)
                    go = 1.0 / (1.0 + math.exp(-zo))
                    cn = gf * c[b, j] + gi * gg
                    tc = math.tanh(cn)
                    c[b, j] = cn
                    h[b, j] = go * tc
                    act[b, t, j] = gi
                    act[b, t, H + j] = gf
                    act[b, t, 2 * H + j] = gg
                    act[b, t, 3 * H + j] = go
                    c_seq[b, t, j] = cn
                    tanc[b, t, j] = tc
                    h_seq[b, t, j] = h[b, j]
        return h_seq, c_seq, act, tanc

    @njit(cache=True)
    def _lstm_bwd_numba(dh_seq, dh_last, dc_last, act, tanc, c_seq, c0, WhT):
        B, T, H4 = act.shape
        H = H4 // 4
        dgates = np.empty((B, T, H4), dtype=act.dtype)
        dg_t = np.empty((B, H4), dtype=act.dtype)
        dh = dh_last.copy()
        dc = dc_last.copy()
        for t in range(T - 1, -1, -1):
            for b in range(B):
                for j in range(H):
                    dhj = dh[b, j] + dh_seq[b, t, j]
                    gi = act[b, t, j]
                    gf = act[b, t, H + j]
                    gg = act[b, t, 2 * H + j]
                    go = act[b, t, 3 * H + j]
                    tc = tanc[b, t, j]
                    cprev = c_seq[b, t - 1, j] if t > 0 else c0[b, j]
                    dcc = dc[b, j] + dhj * go * (1.0 - tc * tc)
                    dg_t[b, j] = dcc * gg * gi * (1.0 - gi)
                    dg_t[b, H + j] = dcc * cprev * gf * (1.0 - gf)
                    dg_t[b, 2 * H + j] = dcc * gi * (1.0 - gg * gg)
                    dg_t[b, 3 * H + j] = dhj * tc * go * (1.0 - go)
                    dc[b, j] = dcc * gf
            dgates[:, t] = dg_t
            dh = np.dot(dg_t, WhT)
        return dgates, dh, dc

    @njit(cache=True)
    def _scatter_rows_numba(out, idx, vals):
        for m in range(idx.shape[0]):
            row = idx[m]
            for j in range(vals.shape[1]):
                out[row, j] += vals[m, j]


# -- dispatch -------------------------------------------------------------------


def lstm_seq_forward(xg, h0, c0, Wh):
    """Run the cell over (B, T, 4H) precomputed input gates.

    Returns h_seq, c_seq, gate activations, tanh(c); the last three are
    backward caches.
    """
    if _BACKEND == "numba":
        return _lstm_fwd_numba(xg, h0, c0, np.ascontiguousarray(Wh))
    return _lstm_fwd_numpy(xg, h0, c0, Wh)


def lstm_seq_backward(dh_seq, dh_last, dc_last, act, tanc, c_seq, c0, Wh):
    """Gradients of the sequential part: (dgates, dh0, dc0)."""
    WhT = np.ascontiguousarray(Wh.T)
    if _BACKEND == "numba":
        return _lstm_bwd_numba(dh_seq, dh_last, dc_last, act, tanc, c_seq, c0, WhT)
    return _lstm_bwd_numpy(dh_seq, dh_last, dc_last, act, tanc, c_seq, c0, WhT)


def scatter_add_rows(out, idx, vals):
    """out[idx[m]] += vals[m] with repeated indices accumulated."""
    if _BACKEND == "numba":
        _scatter_rows_numba(out, idx.astype(np.int64), vals)
    else:
        _scatter_rows_numpy(out, idx, vals)
