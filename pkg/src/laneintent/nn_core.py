"""Minimal verified numerical core: dense and LSTM layers with hand-written
backward passes, softmax cross-entropy, clipped SGD, and a central-difference
gradient checker.

Everything runs on float64 numpy arrays. Analytic gradients are the training
path; the finite-difference checker is the independent verification path, so
the two must never share code beyond the forward evaluation.
"""

from __future__ import annotations

import json
import struct
from dataclasses import dataclass, field
from pathlib import Path
from typing import Callable, Mapping, Union

import numpy as np

Params = dict[str, np.ndarray]


class DimensionError(ValueError):
    """Operand shapes do not agree."""


class NumericError(FloatingPointError):
    """Non-finite values where finite ones are required."""


class CheckpointError(ValueError):
    """Checkpoint file is corrupt or from an incompatible version."""


@dataclass(frozen=True)
class TrainConfig:
    learning_rate: float = 0.00125
    batch_size: int = 16  # plain SGD at the default lr needs the extra steps
    max_epochs: int = 50
    patience: int = 5  # early-stop patience, epochs without val improvement
    clip_norm: float = 5.0
    seed: int = 0
    val_fraction: float = 0.1

    def __post_init__(self) -> None:
        if self.learning_rate <= 0:
            raise ValueError("learning_rate must be positive")
        if self.batch_size < 1:
            raise ValueError("batch_size must be at least 1")
        if not 0.0 <= self.val_fraction < 1.0:
            raise ValueError("val_fraction must lie in [0, 1)")


def sigmoid(z: np.ndarray) -> np.ndarray:
    """Numerically stable logistic function."""
    out = np.empty_like(z, dtype=np.float64)
    pos = z >= 0
    out[pos] = 1.0 / (1.0 + np.exp(-z[pos]))
    ez = np.exp(z[~pos])
    out[~pos] = ez / (1.0 + ez)
    return out


# --- dense layer -------------------------------------------------------------

def dense_forward(x: np.ndarray, w: np.ndarray, b: np.ndarray):
    """y = x W^T + b for a batch of rows; returns (y, cache)."""
    if x.ndim != 2 or w.ndim != 2 or x.shape[1] != w.shape[1] or b.shape != (w.shape[0],):
        raise DimensionError(
            f"dense shapes disagree: x {x.shape}, W {w.shape}, b {b.shape}"
        )
    return x @ w.T + b, (x, w)


def dense_backward(grad_y: np.ndarray, cache) -> tuple[np.ndarray, np.ndarray, np.ndarray]:
    """Exact gradients of the dense map; grad_b sums over the batch."""
    x, w = cache
    if grad_y.shape != (x.shape[0], w.shape[0]):
        raise DimensionError(f"grad_y shape {grad_y.shape} does not match layer")
    grad_x = grad_y @ w
    grad_w = grad_y.T @ x
    grad_b = grad_y.sum(axis=0)
    return grad_x, grad_w, grad_b


# --- LSTM cell ---------------------------------------------------------------
# Gate order inside the stacked 4H dimension: input, forget, candidate, output.

def lstm_step(x_t: np.ndarray, h_prev: np.ndarray, c_prev: np.ndarray,
              w: np.ndarray, u: np.ndarray, b: np.ndarray):
    """One gated update; returns (h_t, c_t, cache)."""
    hidden = h_prev.shape[1]
    if w.shape != (4 * hidden, x_t.shape[1]) or u.shape != (4 * hidden, hidden) \
            or b.shape != (4 * hidden,):
        raise DimensionError(
            f"lstm shapes disagree: x {x_t.shape}, W {w.shape}, U {u.shape}, b {b.shape}"
        )
    if not (np.isfinite(x_t).all() and np.isfinite(h_prev).all() and np.isfinite(c_prev).all()):
        raise NumericError("non-finite input to lstm_step")
    z = x_t @ w.T + h_prev @ u.T + b
    i = sigmoid(z[:, :hidden])
    f = sigmoid(z[:, hidden:2 * hidden])
    g = np.tanh(z[:, 2 * hidden:3 * hidden])
    o = sigmoid(z[:, 3 * hidden:])
    c_t = f * c_prev + i * g
    h_t = o * np.tanh(c_t)
    cache = (x_t, h_prev, c_prev, i, f, g, o, c_t)
    return h_t, c_t, cache


def lstm_step_backward(grad_h: np.ndarray, grad_c: np.ndarray, cache,
                       w: np.ndarray, u: np.ndarray):
    """Backward through one gated update.

    Returns (grad_x, grad_h_prev, grad_c_prev, grad_W, grad_U, grad_b).
    """
    x_t, h_prev, c_prev, i, f, g, o, c_t = cache
    tanh_c = np.tanh(c_t)
    d_o = grad_h * tanh_c
    d_c = grad_c + grad_h * o * (1.0 - tanh_c ** 2)
    d_i = d_c * g
    d_f = d_c * c_prev
    d_g = d_c * i
    grad_c_prev = d_c * f

    dz = np.concatenate(
        [
            d_i * i * (1.0 - i),
            d_f * f * (1.0 - f),
            d_g * (1.0 - g ** 2),
            d_o * o * (1.0 - o),
        ],
        axis=1,
    )
    grad_w = dz.T @ x_t
    grad_u = dz.T @ h_prev
    grad_b = dz.sum(axis=0)
    grad_x = dz @ w
    grad_h_prev = dz @ u
    return grad_x, grad_h_prev, grad_c_prev, grad_w, grad_u, grad_b


def lstm_forward(xs: np.ndarray, w: np.ndarray, u: np.ndarray, b: np.ndarray):
    """Run the cell over a (batch, time, dim) input; returns (h_T, caches)."""
    batch, steps, _ = xs.shape
    hidden = u.shape[1]
    h = np.zeros((batch, hidden))
    c = np.zeros((batch, hidden))
    caches = []
    for t in range(steps):
        h, c, cache = lstm_step(xs[:, t, :], h, c, w, u, b)
        caches.append(cache)
    return h, caches


def lstm_backward(grad_h_last: np.ndarray, caches, w: np.ndarray, u: np.ndarray):
    """Backpropagation through time from the final hidden state.

    Returns (grad_xs (B, T, D), grad_W, grad_U, grad_b).
    """
    grad_w = np.zeros_like(w)
    grad_u = np.zeros_like(u)
    grad_b = np.zeros(w.shape[0])
    grad_h = grad_h_last
    grad_c = np.zeros_like(grad_h_last)
    grad_xs = []
    for cache in reversed(caches):
        grad_x, grad_h, grad_c, d_w, d_u, d_b = lstm_step_backward(grad_h, grad_c, cache, w, u)
        grad_w += d_w
        grad_u += d_u
        grad_b += d_b
        grad_xs.append(grad_x)
    return np.stack(grad_xs[::-1], axis=1), grad_w, grad_u, grad_b


# --- loss --------------------------------------------------------------------

def softmax(logits: np.ndarray) -> np.ndarray:
    shifted = logits - logits.max(axis=-1, keepdims=True)
    e = np.exp(shifted)
    return e / e.sum(axis=-1, keepdims=True)


def softmax_ce(logits: np.ndarray, one_hot: np.ndarray) -> tuple[float, np.ndarray]:
    """Mean cross-entropy over the batch and its gradient w.r.t. the logits.

    Computed with max-subtraction so huge logits cannot overflow. Each label
    row must be one-hot.
    """
    logits = np.atleast_2d(logits)
    one_hot = np.atleast_2d(one_hot)
    if logits.shape != one_hot.shape:
        raise DimensionError(f"logits {logits.shape} vs labels {one_hot.shape}")
    row_sums = one_hot.sum(axis=1)
    if not np.all((row_sums == 1.0) & np.isin(one_hot, (0.0, 1.0)).all(axis=1)):
        raise ValueError("labels must be one-hot rows")
    shifted = logits - logits.max(axis=1, keepdims=True)
    log_probs = shifted - np.log(np.exp(shifted).sum(axis=1, keepdims=True))
    batch = logits.shape[0]
    loss = float(-(one_hot * log_probs).sum() / batch)
    grad = (np.exp(log_probs) - one_hot) / batch
    return loss, grad


# --- optimizer ---------------------------------------------------------------

def global_norm(grads: Mapping[str, np.ndarray]) -> float:
    return float(np.sqrt(sum(float((g ** 2).sum()) for g in grads.values())))


def sgd_step(params: Params, grads: Mapping[str, np.ndarray], cfg: TrainConfig) -> Params:
    """In-place p <- p - lr * g after clipping the global gradient norm."""
    for name, grad in grads.items():
        if not np.isfinite(grad).all():
            raise NumericError(f"non-finite gradient in parameter block {name!r}")
        if params[name].shape != grad.shape:
            raise DimensionError(
                f"gradient shape {grad.shape} does not match {name!r} {params[name].shape}"
            )
    scale = 1.0
    if cfg.clip_norm > 0:
        norm = global_norm(grads)
        if norm > cfg.clip_norm:
            scale = cfg.clip_norm / norm
    for name, grad in grads.items():
        params[name] -= cfg.learning_rate * scale * grad
    return params


# --- initialization ----------------------------------------------------------

def uniform_init(rng: np.random.Generator, shape: tuple[int, ...], fan_in: int) -> np.ndarray:
    bound = 1.0 / np.sqrt(fan_in)
    return rng.uniform(-bound, bound, size=shape)


# --- gradient verification ---------------------------------------------------

@dataclass
class GradCheckReport:
    max_rel_err: float
    worst_param: str
    n_checked: int
    tol: float
    per_param: dict[str, float] = field(default_factory=dict)

    @property
    def passed(self) -> bool:
        return self.max_rel_err < self.tol


def grad_check(
    loss_fn: Callable[[], tuple[float, Mapping[str, np.ndarray]]],
    params: Params,
    eps: float = 1e-5,
    tol: float = 1e-4,
) -> GradCheckReport:
    """Compare analytic gradients against central differences, per entry.

    ``loss_fn`` evaluates the loss and analytic gradients at the current
    ``params`` (which are perturbed in place and restored). Relative error
    uses a 1e-6 floor in the denominator so near-zero gradients are compared
    on an absolute scale.
    """
    _, analytic = loss_fn()
    max_rel = 0.0
    worst = ""
    per_param: dict[str, float] = {}
    checked = 0
    for name, block in params.items():
        grad_block = np.asarray(analytic[name])
        flat = block.reshape(-1)
        block_max = 0.0
        for idx in range(flat.size):
            orig = flat[idx]
            flat[idx] = orig + eps
            loss_plus, _ = loss_fn()
            flat[idx] = orig - eps
            loss_minus, _ = loss_fn()
            flat[idx] = orig
            numeric = (loss_plus - loss_minus) / (2.0 * eps)
            a = grad_block.reshape(-1)[idx]
            rel = abs(a - numeric) / max(abs(a), abs(numeric), 1e-6)
            block_max = max(block_max, rel)
            checked += 1
        per_param[name] = block_max
        if block_max > max_rel:
            max_rel = block_max
            worst = name
    return GradCheckReport(max_rel_err=max_rel, worst_param=worst,
                           n_checked=checked, tol=tol, per_param=per_param)


# --- checkpoint format --------------------------------------------------------

CHECKPOINT_MAGIC = b"LCKP"
CHECKPOINT_VERSION = 1


def save_checkpoint(path: Union[str, Path], arch: dict, params: Params,
                    metadata: dict | None = None) -> None:
    """Versioned binary: magic, version, JSON header (arch + shapes), f64 blocks.

    Run metadata (config, seed, normalization) goes to a JSON sidecar next to
    the binary file.
    """
    names = sorted(params)
    header = {
        "arch": arch,
        "params": [{"name": n, "shape": list(params[n].shape)} for n in names],
    }
    header_bytes = json.dumps(header, sort_keys=True).encode("utf-8")
    with open(path, "wb") as fh:
        fh.write(CHECKPOINT_MAGIC)
        fh.write(struct.pack("<I", CHECKPOINT_VERSION))
        fh.write(struct.pack("<Q", len(header_bytes)))
        fh.write(header_bytes)
        for name in names:
            fh.write(np.ascontiguousarray(params[name], dtype="<f8").tobytes())
    if metadata is not None:
        Path(str(path) + ".json").write_text(json.dumps(metadata, indent=2, sort_keys=True) + "\n")


def load_checkpoint(path: Union[str, Path]) -> tuple[dict, Params, dict]:
    """Read a checkpoint; returns (arch, params, metadata)."""
    with open(path, "rb") as fh:
        magic = fh.read(4)
        if magic != CHECKPOINT_MAGIC:
            raise CheckpointError(f"bad checkpoint magic {magic!r}")
        (version,) = struct.unpack("<I", fh.read(4))
        if version != CHECKPOINT_VERSION:
            raise CheckpointError(
                f"checkpoint version {version} not supported (expected {CHECKPOINT_VERSION})"
            )
        (header_len,) = struct.unpack("<Q", fh.read(8))
        header = json.loads(fh.read(header_len).decode("utf-8"))
        params: Params = {}
        for entry in header["params"]:
            shape = tuple(entry["shape"])
            count = int(np.prod(shape)) if shape else 1
            data = np.frombuffer(fh.read(8 * count), dtype="<f8", count=count)
            if data.size != count:
                raise CheckpointError("checkpoint truncated")
            params[entry["name"]] = data.reshape(shape).copy()
    meta_path = Path(str(path) + ".json")
    metadata = json.loads(meta_path.read_text()) if meta_path.exists() else {}
    return header["arch"], params, metadata
