"""Reverse-mode autodiff on numpy arrays.

A Var wraps an ndarray and its gradient; ops append (outputs, backward)
entries to the active tape.  With no active tape, ops run forward only,
which is the rollout fast path.  backward() walks entries in reverse,
skipping any whose outputs never received a gradient.
"""
from __future__ import annotations

from contextlib import contextmanager

import numpy as np


class Var:
    """An array node; requires=False marks constants the tape skips."""

    __slots__ = ("data", "grad", "requires")

    def __init__(self, data, requires: bool = True) -> None:
        self.data = np.asarray(data)
        self.grad: np.ndarray | None = None
        self.requires = requires

    @property
    def shape(self) -> tuple[int, ...]:
        return self.data.shape

    @property
    def dtype(self):
        return self.data.dtype

    def __repr__(self) -> str:
        return f"Var(shape={self.data.shape}, dtype={self.data.dtype})"


class Tape:
    """Ordered record of op applications for one backward pass."""

    def __init__(self) -> None:
        self._entries: list[tuple[tuple[Var, ...], object]] = []

    def record(self, outputs: tuple[Var, ...], backward) -> None:
        self._entries.append((outputs, backward))

    def backward(self, loss: Var) -> None:
        if loss.data.size != 1:
            raise ValueError("backward() expects a scalar loss")
        loss.grad = np.ones_like(loss.data)
        for outputs, fn in reversed(self._entries):
            if any(o.grad is not None for o in outputs):
                fn()

    def __len__(self) -> int:
        return len(self._entries)


_ACTIVE: list[Tape] = []


@contextmanager
def tape():
    """Context manager activating a fresh tape; yields it."""
    t = Tape()
    _ACTIVE.append(t)
    try:
        yield t
    finally:
        _ACTIVE.pop()


def recording() -> bool:
    return bool(_ACTIVE)


def record(outputs: tuple[Var, ...], backward) -> None:
    """Append to the active tape; no-op when nothing is recording."""
    if _ACTIVE:
        _ACTIVE[-1].record(outputs, backward)


def accumulate(var: Var, grad: np.ndarray) -> None:
    """Add grad into var.grad, respecting requires."""
    if not var.requires:
        return
    if var.grad is None:
        var.grad = np.zeros_like(var.data)
    var.grad += grad


def out_grad(var: Var) -> np.ndarray:
    """The output gradient of a var during backward (zeros if unused)."""
    if var.grad is None:
        return np.zeros_like(var.data)
    return var.grad
