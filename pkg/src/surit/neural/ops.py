"""Differentiable building blocks.

Every ``*_forward`` returns ``(output, cache)`` and the matching
``*_backward(d_output, cache)`` returns exact vector-Jacobian products.
All arithmetic is float64.
"""

from typing import Any

import numpy as np

from surit.errors import ShapeError

Cache = tuple[Any, ...]


def _check(condition: bool, message: str) -> None:
    if not condition:
        raise ShapeError(message)


# Elementwise


def sigmoid(x: np.ndarray) -> np.ndarray:
    return np.exp(-np.logaddexp(0.0, -x))


def sigmoid_forward(x: np.ndarray) -> tuple[np.ndarray, Cache]:
    y = sigmoid(x)
    return y, (y,)


def sigmoid_backward(dy: np.ndarray, cache: Cache) -> np.ndarray:
    (y,) = cache
    return dy * y * (1.0 - y)


def tanh_forward(x: np.ndarray) -> tuple[np.ndarray, Cache]:
    y = np.tanh(x)
    return y, (y,)


def tanh_backward(dy: np.ndarray, cache: Cache) -> np.ndarray:
    (y,) = cache
    return dy * (1.0 - y * y)


def softmax_forward(x: np.ndarray, axis: int = -1) -> tuple[np.ndarray, Cache]:
    shifted = x - np.max(x, axis=axis, keepdims=True)
    e = np.exp(shifted)
    s = e / np.sum(e, axis=axis, keepdims=True)
    return s, (s, axis)


def softmax_backward(dy: np.ndarray, cache: Cache) -> np.ndarray:
    s, axis = cache
    return s * (dy - np.sum(dy * s, axis=axis, keepdims=True))


# Affine


def linear_forward(x: np.ndarray, W: np.ndarray, b: np.ndarray) -> tuple[np.ndarray, Cache]:
    """y = x @ W + b over the last axis of x."""
    _check(W.ndim == 2 and x.shape[-1] == W.shape[0], f"linear: x {x.shape} vs W {W.shape}")
    _check(b.shape == (W.shape[1],), f"linear: bias {b.shape} vs W {W.shape}")
    return x @ W + b, (x, W)


def linear_backward(dy: np.ndarray, cache: Cache) -> tuple[np.ndarray, np.ndarray, np.ndarray]:
    x, W = cache
    flat_x = x.reshape(-1, W.shape[0])
    flat_dy = dy.reshape(-1, W.shape[1])
    return dy @ W.T, flat_x.T @ flat_dy, flat_dy.sum(axis=0)


def conv1d_forward(x: np.ndarray, W: np.ndarray, b: np.ndarray) -> tuple[np.ndarray, Cache]:
    """Causal convolution over time. x: (T, C_in), W: (k, C_in, C_out).

    Output frame t only sees input frames t-k+1 .. t.
    """
    _check(x.ndim == 2 and W.ndim == 3, f"conv1d: x {x.shape}, W {W.shape}")
    _check(x.shape[1] == W.shape[1], f"conv1d: {x.shape[1]} input channels vs W {W.shape}")
    _check(b.shape == (W.shape[2],), f"conv1d: bias {b.shape} vs W {W.shape}")
    k = W.shape[0]
    T = x.shape[0]
    padded = np.concatenate((np.zeros((k - 1, x.shape[1])), x), axis=0)
    y = np.broadcast_to(b, (T, W.shape[2])).copy()
    for j in range(k):
        y += padded[j : j + T] @ W[j]
    return y, (padded, W, T)


def conv1d_backward(dy: np.ndarray, cache: Cache) -> tuple[np.ndarray, np.ndarray, np.ndarray]:
    padded, W, T = cache
    k = W.shape[0]
    d_padded = np.zeros_like(padded)
    dW = np.empty_like(W)
    for j in range(k):
        dW[j] = padded[j : j + T].T @ dy
        d_padded[j : j + T] += dy @ W[j].T
    return d_padded[k - 1 :], dW, dy.sum(axis=0)


def embed_forward(ids: np.ndarray, E: np.ndarray) -> tuple[np.ndarray, Cache]:
    ids = np.asarray(ids, dtype=np.int64)
    _check(E.ndim == 2, f"embedding table must be 2-D, got {E.shape}")
    if ids.size and (ids.min() < 0 or ids.max() >= E.shape[0]):
        raise ShapeError(f"embedding ids outside [0, {E.shape[0]})")
    return E[ids], (ids, E.shape)


def embed_backward(dy: np.ndarray, cache: Cache) -> np.ndarray:
    ids, shape = cache
    dE = np.zeros(shape)
    np.add.at(dE, ids, dy)
    return dE


# Time reduction


def time_reduction_forward(x: np.ndarray, W: np.ndarray, b: np.ndarray) -> tuple[np.ndarray, Cache]:
    """Concatenate frame pairs then project; an odd final frame is paired with zeros."""
    T, d = x.shape
    if T % 2:
        x = np.concatenate((x, np.zeros((1, d))), axis=0)
    pairs = x.reshape(-1, 2 * d)
    y, lin_cache = linear_forward(pairs, W, b)
    return y, (lin_cache, T, d)


def time_reduction_backward(dy: np.ndarray, cache: Cache) -> tuple[np.ndarray, np.ndarray, np.ndarray]:
    lin_cache, T, d = cache
    d_pairs, dW, db = linear_backward(dy, lin_cache)
    return d_pairs.reshape(-1, d)[:T], dW, db


# Gated recurrent cell
#
# Gate layout along the 3H axis: [reset | update | candidate].
#   r = s(a_r + h U_r), z = s(a_z + h U_z), n = tanh(a_n + r * (h U_n))
#   h' = (1 - z) * n + z * h,  with a = x W + b


def _gru_cell(a: np.ndarray, h_prev: np.ndarray, U: np.ndarray) -> tuple[np.ndarray, Cache]:
    H = h_prev.shape[-1]
    hu = h_prev @ U
    r = sigmoid(a[:H] + hu[:H])
    z = sigmoid(a[H : 2 * H] + hu[H : 2 * H])
    n = np.tanh(a[2 * H :] + r * hu[2 * H :])
    h = (1.0 - z) * n + z * h_prev
    return h, (h_prev, hu, r, z, n)


def _gru_cell_backward(dh: np.ndarray, cache: Cache, U: np.ndarray) -> tuple[np.ndarray, np.ndarray, np.ndarray]:
    """Returns (da, dh_prev, dU)."""
    h_prev, hu, r, z, n = cache
    H = h_prev.shape[-1]
    dn = dh * (1.0 - z)
    dz = dh * (h_prev - n)
    dan = dn * (1.0 - n * n)
    dr = dan * hu[2 * H :]
    dar = dr * r * (1.0 - r)
    daz = dz * z * (1.0 - z)
    da = np.concatenate((dar, daz, dan))
    dhu = np.concatenate((dar, daz, dan * r))
    dh_prev = dh * z + U @ dhu
    return da, dh_prev, np.outer(h_prev, dhu)


def _check_gru(x_dim: int, h_dim: int, W: np.ndarray, U: np.ndarray, b: np.ndarray) -> None:
    _check(W.shape == (x_dim, 3 * h_dim), f"recurrent W {W.shape} vs input {x_dim}, hidden {h_dim}")
    _check(U.shape == (h_dim, 3 * h_dim), f"recurrent U {U.shape} vs hidden {h_dim}")
    _check(b.shape == (3 * h_dim,), f"recurrent b {b.shape} vs hidden {h_dim}")


def recurrent_step_forward(
    x: np.ndarray, h_prev: np.ndarray, W: np.ndarray, U: np.ndarray, b: np.ndarray
) -> tuple[np.ndarray, Cache]:
    """One left-to-right gated recurrent update h_t = g(x_t, h_{t-1})."""
    _check(x.ndim == 1 and h_prev.ndim == 1, "recurrent_step expects vectors")
    _check_gru(x.shape[0], h_prev.shape[0], W, U, b)
    a = x @ W + b
    h, cell = _gru_cell(a, h_prev, U)
    return h, (x, W, U, cell)


def recurrent_step_backward(
    dh: np.ndarray, cache: Cache
) -> tuple[np.ndarray, np.ndarray, np.ndarray, np.ndarray, np.ndarray]:
    """Returns (dx, dh_prev, dW, dU, db)."""
    x, W, U, cell = cache
    da, dh_prev, dU = _gru_cell_backward(dh, cell, U)
    return W @ da, dh_prev, np.outer(x, da), dU, da


def recurrent_forward(
    X: np.ndarray, h0: np.ndarray, W: np.ndarray, U: np.ndarray, b: np.ndarray
) -> tuple[np.ndarray, Cache]:
    """Run the cell over X (T, in) strictly left to right; returns (T, H)."""
    _check(X.ndim == 2, f"recurrent_forward expects (T, in), got {X.shape}")
    _check_gru(X.shape[1], h0.shape[0], W, U, b)
    A = X @ W + b
    hs = np.empty((X.shape[0], h0.shape[0]))
    cells = []
    h = h0
    for t in range(X.shape[0]):
        h, cell = _gru_cell(A[t], h, U)
        hs[t] = h
        cells.append(cell)
    return hs, (X, W, U, cells)


def recurrent_backward(
    dHs: np.ndarray, cache: Cache
) -> tuple[np.ndarray, np.ndarray, np.ndarray, np.ndarray, np.ndarray]:
    """Backpropagation through time. Returns (dX, dh0, dW, dU, db)."""
    X, W, U, cells = cache
    dA = np.empty((X.shape[0], W.shape[1]))
    dU = np.zeros_like(U)
    dh = np.zeros(U.shape[0])
    for t in range(X.shape[0] - 1, -1, -1):
        da, dh, dU_t = _gru_cell_backward(dHs[t] + dh, cells[t], U)
        dA[t] = da
        dU += dU_t
    return dA @ W.T, dh, X.T @ dA, dU, dA.sum(axis=0)
