"""Differentiable ops over tape Vars.

Shapes follow a batch-first convention.  Masks are plain bool arrays
(never differentiated).  Every op computes forward eagerly and records
a closure on the active tape; with no tape active the closure is
dropped, so inference pays no bookkeeping.
"""
from __future__ import annotations

import numpy as np

from . import kernels
from .tape import Var, accumulate, out_grad, record


def constant(data, dtype=None) -> Var:
    arr = np.asarray(data, dtype=dtype)
    return Var(arr, requires=False)


def _unbroadcast(grad: np.ndarray, shape: tuple[int, ...]) -> np.ndarray:
    extra = grad.ndim - len(shape)
    if extra:
        grad = grad.sum(axis=tuple(range(extra)))
    axes = tuple(i for i, (g, s) in enumerate(zip(grad.shape, shape)) if s == 1 and g != 1)
    if axes:
        grad = grad.sum(axis=axes, keepdims=True)
    return grad


# -- elementwise ---------------------------------------------------------------


def add(a: Var, b: Var) -> Var:
    out = Var(a.data + b.data)

    def backward() -> None:
        g = out_grad(out)
        accumulate(a, _unbroadcast(g, a.data.shape))
        accumulate(b, _unbroadcast(g, b.data.shape))

    record((out,), backward)
    return out


def sub(a: Var, b: Var) -> Var:
    out = Var(a.data - b.data)

    def backward() -> None:
        g = out_grad(out)
        accumulate(a, _unbroadcast(g, a.data.shape))
        accumulate(b, _unbroadcast(-g, b.data.shape))

    record((out,), backward)
    return out


def mul(a: Var, b: Var) -> Var:
    out = Var(a.data * b.data)

    def backward() -> None:
        g = out_grad(out)
        accumulate(a, _unbroadcast(g * b.data, a.data.shape))
        accumulate(b, _unbroadcast(g * a.data, b.data.shape))

    record((out,), backward)
    return out


def mul_const(a: Var, c: float) -> Var:
    out = Var(a.data * c)

    def backward() -> None:
        accumulate(a, out_grad(out) * c)

    record((out,), backward)
    return out


def neg(a: Var) -> Var:
    return mul_const(a, -1.0)


def relu(a: Var) -> Var:
    out = Var(np.maximum(a.data, 0))

    def backward() -> None:
        accumulate(a, out_grad(out) * (a.data > 0))

    record((out,), backward)
    return out


def tanh(a: Var) -> Var:
    y = np.tanh(a.data)
    out = Var(y)

    def backward() -> None:
        accumulate(a, out_grad(out) * (1.0 - y * y))

    record((out,), backward)
    return out


def sigmoid(a: Var) -> Var:
    y = 1.0 / (1.0 + np.exp(-a.data))
    out = Var(y)

    def backward() -> None:
        accumulate(a, out_grad(out) * y * (1.0 - y))

    record((out,), backward)
    return out


# -- structure -----------------------------------------------------------------


def reshape(a: Var, shape) -> Var:
    out = Var(a.data.reshape(shape))

    def backward() -> None:
        accumulate(a, out_grad(out).reshape(a.data.shape))

    record((out,), backward)
    return out


def moveaxis(a: Var, src: int, dst: int) -> Var:
    out = Var(np.ascontiguousarray(np.moveaxis(a.data, src, dst)))

    def backward() -> None:
        accumulate(a, np.moveaxis(out_grad(out), dst, src))

    record((out,), backward)
    return out


def concat(parts: list[Var], axis: int) -> Var:
    out = Var(np.concatenate([p.data for p in parts], axis=axis))

    def backward() -> None:
        g = out_grad(out)
        offset = 0
        for p in parts:
            width = p.data.shape[axis]
            sl = [slice(None)] * g.ndim
            sl[axis] = slice(offset, offset + width)
            accumulate(p, g[tuple(sl)])
            offset += width

    record((out,), backward)
    return out


# -- linear algebra -------------------------------------------------------------


def linear(x: Var, W: Var, b: Var | None = None) -> Var:
    shape = x.data.shape
    xflat = x.data.reshape(-1, shape[-1])
    y = xflat @ W.data
    if b is not None:
        y = y + b.data
    out = Var(y.reshape(shape[:-1] + (W.data.shape[1],)))

    def backward() -> None:
        g = out_grad(out).reshape(-1, W.data.shape[1])
        accumulate(W, xflat.T @ g)
        if b is not None:
            accumulate(b, g.sum(axis=0))
        accumulate(x, (g @ W.data.T).reshape(shape))

    record((out,), backward)
    return out


def bmm(a: Var, b: Var) -> Var:
    """(B, m, k) @ (B, k, n) -> (B, m, n)."""
    out = Var(np.matmul(a.data, b.data))

    def backward() -> None:
        g = out_grad(out)
        accumulate(a, np.matmul(g, b.data.swapaxes(-1, -2)))
        accumulate(b, np.matmul(a.data.swapaxes(-1, -2), g))

    record((out,), backward)
    return out


def embedding(E: Var, ids: np.ndarray) -> Var:
    out = Var(E.data[ids])

    def backward() -> None:
        if not E.requires:
            return
        if E.grad is None:
            E.grad = np.zeros_like(E.data)
        g = out_grad(out).reshape(-1, E.data.shape[1])
        kernels.scatter_add_rows(E.grad, ids.reshape(-1).astype(np.int64), g)

    record((out,), backward)
    return out


# -- gathers ----------------------------------------------------------------------


def gather_steps(x: Var, idx: np.ndarray) -> Var:
    """(B, T, D), (B,) -> (B, D): one time step per row."""
    B, T, D = x.data.shape
    rows = np.arange(B)
    out = Var(x.data[rows, idx])

    def backward() -> None:
        g = out_grad(out)
        if x.grad is None:
            x.grad = np.zeros_like(x.data)
        flat = x.grad.reshape(B * T, D)
        kernels.scatter_add_rows(flat, (rows * T + idx).astype(np.int64), g)

    record((out,), backward)
    return out


def gather_seq(x: Var, idx: np.ndarray) -> Var:
    """(B, T, D), (B, J) -> (B, J, D): several positions per row."""
    B, T, D = x.data.shape
    J = idx.shape[1]
    rows = np.repeat(np.arange(B), J)
    flat_idx = (rows * T + idx.reshape(-1)).astype(np.int64)
    out = Var(x.data.reshape(B * T, D)[flat_idx].reshape(B, J, D))

    def backward() -> None:
        g = out_grad(out).reshape(B * J, D)
        if x.grad is None:
            x.grad = np.zeros_like(x.data)
        kernels.scatter_add_rows(x.grad.reshape(B * T, D), flat_idx, g)

    record((out,), backward)
    return out


def gather_cols(x: Var, idx: np.ndarray) -> Var:
    """(B, A), (B,) -> (B,)."""
    rows = np.arange(x.data.shape[0])
    out = Var(x.data[rows, idx])

    def backward() -> None:
        g = out_grad(out)
        if x.grad is None:
            x.grad = np.zeros_like(x.data)
        np.add.at(x.grad, (rows, idx), g)

    record((out,), backward)
    return out


def reverse_padded(x: Var, lengths: np.ndarray) -> Var:
    """Reverse each row's first lengths[b] steps of (B, T, D); pads stay put."""
    B, T = x.data.shape[:2]
    t = np.arange(T)[None, :]
    idx = np.where(t < lengths[:, None], lengths[:, None] - 1 - t, t)
    out = Var(np.take_along_axis(x.data, idx[:, :, None], axis=1))

    def backward() -> None:
        accumulate(x, np.take_along_axis(out_grad(out), idx[:, :, None], axis=1))

    record((out,), backward)
    return out


# -- softmax family --------------------------------------------------------------


def masked_softmax(scores: Var, mask: np.ndarray | None = None) -> Var:
    s = scores.data
    if mask is None:
        m = s.max(axis=-1, keepdims=True)
        e = np.exp(s - m)
    else:
        neg = np.where(mask, s, -np.inf)
        m = neg.max(axis=-1, keepdims=True)
        e = np.exp(neg - m)
    p = e / e.sum(axis=-1, keepdims=True)
    out = Var(p)

    def backward() -> None:
        g = out_grad(out)
        inner = (g * p).sum(axis=-1, keepdims=True)
        accumulate(scores, p * (g - inner))

    record((out,), backward)
    return out


def masked_log_softmax(scores: Var, mask: np.ndarray | None = None) -> Var:
    s = scores.data
    if mask is None:
        neg = s
    else:
        neg = np.where(mask, s, -np.inf)
    m = neg.max(axis=-1, keepdims=True)
    e = np.exp(neg - m)
    z = e.sum(axis=-1, keepdims=True)
    logp = np.where(np.isfinite(neg), neg - m - np.log(z), -1e30)
    p = e / z
    out = Var(logp)

    def backward() -> None:
        g = out_grad(out)
        accumulate(scores, g - p * g.sum(axis=-1, keepdims=True))

    record((out,), backward)
    return out


def convex_pool_sorted(H: Var, scores: Var) -> Var:
    """Softmax-weighted sum over axis 1 of (B, n, d), order-independent.

    Addends are sorted before summation (numerator per coordinate and
    denominator alike), so permuting the n inputs reproduces the output
    bit for bit.
    """
    e = np.exp(scores.data - scores.data.max(axis=-1, keepdims=True))
    z = np.sort(e, axis=-1).sum(axis=-1, keepdims=True)
    terms = e[:, :, None] * H.data
    num = np.sort(terms, axis=1).sum(axis=1)
    out = Var(num / z)
    w = e / z

    def backward() -> None:
        g = out_grad(out)
        accumulate(H, w[:, :, None] * g[:, None, :])
        dw = (g[:, None, :] * H.data).sum(axis=-1)
        inner = (dw * w).sum(axis=-1, keepdims=True)
        accumulate(scores, w * (dw - inner))

    record((out,), backward)
    return out


# -- recurrent -----------------------------------------------------------------


def lstm(x: Var, h0: Var, c0: Var, Wx: Var, Wh: Var, b: Var):
    """Full sequence LSTM: (B, T, I) -> (h_seq, h_last, c_last)."""
    B, T, I = x.data.shape
    H = Wh.data.shape[0]
    xflat = x.data.reshape(B * T, I)
    xg = (xflat @ Wx.data + b.data).reshape(B, T, 4 * H)
    h_seq_d, c_seq_d, act, tanc = kernels.lstm_seq_forward(xg, h0.data, c0.data, Wh.data)
    h_seq = Var(h_seq_d)
    h_last = Var(h_seq_d[:, -1].copy())
    c_last = Var(c_seq_d[:, -1].copy())

    def backward() -> None:
        dh_seq = out_grad(h_seq)
        dgates, dh0, dc0 = kernels.lstm_seq_backward(
            dh_seq, out_grad(h_last), out_grad(c_last),
            act, tanc, c_seq_d, c0.data, Wh.data,
        )
        gflat = dgates.reshape(B * T, 4 * H)
        accumulate(Wx, xflat.T @ gflat)
        accumulate(b, gflat.sum(axis=0))
        accumulate(x, (gflat @ Wx.data.T).reshape(B, T, I))
        hprev = np.concatenate([h0.data[:, None], h_seq_d[:, :-1]], axis=1)
        accumulate(Wh, hprev.reshape(B * T, H).T @ gflat)
        accumulate(h0, dh0)
        accumulate(c0, dc0)

    record((h_seq, h_last, c_last), backward)
    return h_seq, h_last, c_last


# -- convolution and pooling ------------------------------------------------------


def conv2d_same(x: Var, W: Var, b: Var) -> Var:
    """3x3 same-padding convolution: (B, C, H, W) -> (B, F, H, W)."""
    B, C, H, Wd = x.data.shape
    F = W.data.shape[0]
    xpad = np.zeros((B, C, H + 2, Wd + 2), dtype=x.data.dtype)
    xpad[:, :, 1:-1, 1:-1] = x.data
    patches = np.empty((B, C, 3, 3, H, Wd), dtype=x.data.dtype)
    for di in range(3):
        for dj in range(3):
            patches[:, :, di, dj] = xpad[:, :, di : di + H, dj : dj + Wd]
    P = patches.reshape(B, C * 9, H * Wd)
    Wmat = W.data.reshape(F, C * 9)
    y = np.matmul(Wmat[None], P) + b.data[None, :, None]
    out = Var(y.reshape(B, F, H, Wd))

    def backward() -> None:
        g = out_grad(out).reshape(B, F, H * Wd)
        accumulate(b, g.sum(axis=(0, 2)))
        dW = np.einsum("bfn,bcn->fc", g, P, optimize=True)
        accumulate(W, dW.reshape(W.data.shape))
        dP = np.matmul(Wmat.T[None], g).reshape(B, C, 3, 3, H, Wd)
        dxpad = np.zeros((B, C, H + 2, Wd + 2), dtype=g.dtype)
        for di in range(3):
            for dj in range(3):
                dxpad[:, :, di : di + H, dj : dj + Wd] += dP[:, :, di, dj]
        accumulate(x, dxpad[:, :, 1:-1, 1:-1])

    record((out,), backward)
    return out


def crop_window(x: Var, centers: np.ndarray, size: int = 5) -> Var:
    """(B, C, H, W) -> (B, C, size, size) window centered per row.

    Out-of-bounds cells are zero, matching an agent near a wall.
    """
    B, C, H, Wd = x.data.shape
    half = size // 2
    xpad = np.zeros((B, C, H + 2 * half, Wd + 2 * half), dtype=x.data.dtype)
    xpad[:, :, half : half + H, half : half + Wd] = x.data
    out_d = np.empty((B, C, size, size), dtype=x.data.dtype)
    for i in range(B):
        r, c = centers[i]
        out_d[i] = xpad[i, :, r : r + size, c : c + size]
    out = Var(out_d)

    def backward() -> None:
        g = out_grad(out)
        gpad = np.zeros((B, C, H + 2 * half, Wd + 2 * half), dtype=g.dtype)
        for i in range(B):
            r, c = centers[i]
            gpad[i, :, r : r + size, c : c + size] += g[i]
        accumulate(x, gpad[:, :, half : half + H, half : half + Wd])

    record((out,), backward)
    return out


def spatial_max(x: Var) -> Var:
    """(B, C, H, W) -> (B, C) max over the spatial plane."""
    B, C, H, Wd = x.data.shape
    flat = x.data.reshape(B, C, H * Wd)
    arg = flat.argmax(axis=-1)
    out = Var(np.take_along_axis(flat, arg[:, :, None], axis=-1)[:, :, 0])

    def backward() -> None:
        g = out_grad(out)
        if x.grad is None:
            x.grad = np.zeros_like(x.data)
        gflat = x.grad.reshape(B, C, H * Wd)
        np.put_along_axis(
            gflat, arg[:, :, None],
            np.take_along_axis(gflat, arg[:, :, None], axis=-1) + g[:, :, None],
            axis=-1,
        )

    record((out,), backward)
    return out


# -- reductions -----------------------------------------------------------------


def sum_all(x: Var) -> Var:
    out = Var(np.asarray(x.data.sum()))

    def backward() -> None:
        accumulate(x, np.broadcast_to(out_grad(out), x.data.shape).copy())

    record((out,), backward)
    return out


def sum_axis(x: Var, axis: int) -> Var:
    out = Var(x.data.sum(axis=axis))

    def backward() -> None:
        accumulate(x, np.expand_dims(out_grad(out), axis))

    record((out,), backward)
    return out


def add_n(parts: list[Var]) -> Var:
    """Sum of same-shaped Vars (loss accumulation across chunks)."""
    out = parts[0]
    for p in parts[1:]:
        out = add(out, p)
    return out
