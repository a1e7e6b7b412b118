"""Segment classifiers: an LSTM sequence model and two flattened baselines.

The sequence model embeds each step, runs the LSTM over the window, and reads
the decision off the final hidden state. The feedforward and logistic
baselines see the identical window flattened, so any accuracy gap isolates
sequence modeling rather than input content.
"""

from __future__ import annotations

import copy
import csv
from dataclasses import dataclass, field
from pathlib import Path
from typing import Sequence as TypingSequence, Union

import numpy as np

from .features import NormalizationStats, apply_normalization
from .labeling import Maneuver, Segment
from .nn_core import (
    NumericError,
    Params,
    TrainConfig,
    dense_backward,
    dense_forward,
    load_checkpoint,
    lstm_backward,
    lstm_forward,
    save_checkpoint,
    sgd_step,
    softmax,
    softmax_ce,
    uniform_init,
)

MODEL_KINDS = ("lstm", "ffnn", "logreg")

FFNN_HIDDEN = (128, 64)

N_CLASSES = 3


@dataclass(frozen=True)
class ModelSpec:
    kind: str
    input_dim: int  # per-step feature dimension (12 default, 22 augmented)
    n: int  # segment length in steps
    embed_dim: int = 64
    hidden_dim: int = 128

    def __post_init__(self) -> None:
        if self.kind not in MODEL_KINDS:
            raise ValueError(f"unknown model kind {self.kind!r}; expected one of {MODEL_KINDS}")
        if min(self.input_dim, self.n, self.embed_dim, self.hidden_dim) < 1:
            raise ValueError("model dimensions must be positive")

    def to_dict(self) -> dict:
        return {
            "kind": self.kind,
            "input_dim": self.input_dim,
            "n": self.n,
            "embed_dim": self.embed_dim,
            "hidden_dim": self.hidden_dim,
        }

    @classmethod
    def from_dict(cls, doc: dict) -> "ModelSpec":
        return cls(
            kind=doc["kind"],
            input_dim=int(doc["input_dim"]),
            n=int(doc["n"]),
            embed_dim=int(doc["embed_dim"]),
            hidden_dim=int(doc["hidden_dim"]),
        )


@dataclass(frozen=True)
class DecisionVector:
    """Class probabilities in fixed order [left, follow, right]."""

    probabilities: np.ndarray

    def __post_init__(self) -> None:
        p = np.asarray(self.probabilities, dtype=np.float64)
        if p.shape != (N_CLASSES,) or np.any(p < 0) or abs(p.sum() - 1.0) > 1e-12:
            raise ValueError(f"not a probability vector: {p}")
        object.__setattr__(self, "probabilities", p)

    @property
    def label(self) -> Maneuver:
        # np.argmax returns the first maximum, which matches the documented
        # tie-break order LEFT < FOLLOW < RIGHT.
        return Maneuver(int(np.argmax(self.probabilities)))


class Model:
    """Shared state and prediction surface for all three classifier kinds."""

    def __init__(self, spec: ModelSpec, params: Params,
                 norm: NormalizationStats | None = None) -> None:
        self.spec = spec
        self.params = params
        self.norm = norm

    @property
    def n_params(self) -> int:
        return int(sum(p.size for p in self.params.values()))

    def _check_input(self, x: np.ndarray) -> np.ndarray:
        x = np.asarray(x, dtype=np.float64)
        if x.ndim == 2:
            x = x[None, :, :]
        if x.ndim != 3 or x.shape[1] != self.spec.n or x.shape[2] != self.spec.input_dim:
            raise ValueError(
                f"expected segments of shape (batch, {self.spec.n}, {self.spec.input_dim}), "
                f"got {x.shape}"
            )
        return x

    def normalize(self, x: np.ndarray) -> np.ndarray:
        return apply_normalization(x, self.norm) if self.norm is not None else x

    def logits(self, x_norm: np.ndarray) -> np.ndarray:
        raise NotImplementedError

    def loss_and_grads(self, x_norm: np.ndarray, one_hot: np.ndarray) -> tuple[float, Params]:
        raise NotImplementedError

    def predict_proba(self, x_raw: np.ndarray) -> np.ndarray:
        x = self.normalize(self._check_input(x_raw))
        return softmax(self.logits(x))


class LSTMClassifier(Model):
    """dense embed -> LSTM over the window -> dense head on the final state."""

    def logits(self, x: np.ndarray) -> np.ndarray:
        return self._forward(x)[0]

    def _forward(self, x: np.ndarray):
        p = self.params
        batch, steps, dim = x.shape
        flat = x.reshape(batch * steps, dim)
        embedded, cache_embed = dense_forward(flat, p["w_embed"], p["b_embed"])
        seq = embedded.reshape(batch, steps, -1)
        h_last, caches = lstm_forward(seq, p["w_lstm"], p["u_lstm"], p["b_lstm"])
        logits, cache_out = dense_forward(h_last, p["w_out"], p["b_out"])
        return logits, (cache_embed, caches, cache_out, (batch, steps))

    def loss_and_grads(self, x: np.ndarray, one_hot: np.ndarray) -> tuple[float, Params]:
        p = self.params
        logits, (cache_embed, caches, cache_out, (batch, steps)) = self._forward(x)
        loss, grad_logits = softmax_ce(logits, one_hot)
        grad_h, grad_w_out, grad_b_out = dense_backward(grad_logits, cache_out)
        grad_seq, grad_w, grad_u, grad_b = lstm_backward(
            grad_h, caches, p["w_lstm"], p["u_lstm"]
        )
        grad_flat = grad_seq.reshape(batch * steps, -1)
        _, grad_w_embed, grad_b_embed = dense_backward(grad_flat, cache_embed)
        grads = {
            "w_embed": grad_w_embed,
            "b_embed": grad_b_embed,
            "w_lstm": grad_w,
            "u_lstm": grad_u,
            "b_lstm": grad_b,
            "w_out": grad_w_out,
            "b_out": grad_b_out,
        }
        return loss, grads


class FFNNClassifier(Model):
    """Two tanh hidden layers on the flattened window."""

    def logits(self, x: np.ndarray) -> np.ndarray:
        return self._forward(x)[0]

    def _forward(self, x: np.ndarray):
        p = self.params
        flat = x.reshape(x.shape[0], -1)
        z1, cache1 = dense_forward(flat, p["w1"], p["b1"])
        a1 = np.tanh(z1)
        z2, cache2 = dense_forward(a1, p["w2"], p["b2"])
        a2 = np.tanh(z2)
        logits, cache3 = dense_forward(a2, p["w3"], p["b3"])
        return logits, (cache1, a1, cache2, a2, cache3)

    def loss_and_grads(self, x: np.ndarray, one_hot: np.ndarray) -> tuple[float, Params]:
        logits, (cache1, a1, cache2, a2, cache3) = self._forward(x)
        loss, grad_logits = softmax_ce(logits, one_hot)
        grad_a2, grad_w3, grad_b3 = dense_backward(grad_logits, cache3)
        grad_z2 = grad_a2 * (1.0 - a2 ** 2)
        grad_a1, grad_w2, grad_b2 = dense_backward(grad_z2, cache2)
        grad_z1 = grad_a1 * (1.0 - a1 ** 2)
        _, grad_w1, grad_b1 = dense_backward(grad_z1, cache1)
        grads = {"w1": grad_w1, "b1": grad_b1, "w2": grad_w2, "b2": grad_b2,
                 "w3": grad_w3, "b3": grad_b3}
        return loss, grads


class LogRegClassifier(Model):
    """Single linear map on the flattened window."""

    def logits(self, x: np.ndarray) -> np.ndarray:
        flat = x.reshape(x.shape[0], -1)
        logits, _ = dense_forward(flat, self.params["w"], self.params["b"])
        return logits

    def loss_and_grads(self, x: np.ndarray, one_hot: np.ndarray) -> tuple[float, Params]:
        flat = x.reshape(x.shape[0], -1)
        logits, cache = dense_forward(flat, self.params["w"], self.params["b"])
        loss, grad_logits = softmax_ce(logits, one_hot)
        _, grad_w, grad_b = dense_backward(grad_logits, cache)
        return loss, {"w": grad_w, "b": grad_b}


_MODEL_CLASSES = {"lstm": LSTMClassifier, "ffnn": FFNNClassifier, "logreg": LogRegClassifier}


def build(spec: ModelSpec, seed: int = 0,
          norm: NormalizationStats | None = None) -> Model:
    """Seeded construction; weights and biases are uniform(+/- 1/sqrt(fan_in)),
    and the LSTM forget-gate bias block starts at 1."""
    rng = np.random.default_rng(seed)
    if spec.kind == "lstm":
        d, e, h = spec.input_dim, spec.embed_dim, spec.hidden_dim
        params = {
            "w_embed": uniform_init(rng, (e, d), d),
            "b_embed": uniform_init(rng, (e,), d),
            "w_lstm": uniform_init(rng, (4 * h, e), e),
            "u_lstm": uniform_init(rng, (4 * h, h), h),
            "b_lstm": uniform_init(rng, (4 * h,), h),
            "w_out": uniform_init(rng, (N_CLASSES, h), h),
            "b_out": uniform_init(rng, (N_CLASSES,), h),
        }
        params["b_lstm"][h:2 * h] = 1.0  # forget gate
    elif spec.kind == "ffnn":
        flat = spec.n * spec.input_dim
        h1, h2 = FFNN_HIDDEN
        params = {
            "w1": uniform_init(rng, (h1, flat), flat),
            "b1": uniform_init(rng, (h1,), flat),
            "w2": uniform_init(rng, (h2, h1), h1),
            "b2": uniform_init(rng, (h2,), h1),
            "w3": uniform_init(rng, (N_CLASSES, h2), h2),
            "b3": uniform_init(rng, (N_CLASSES,), h2),
        }
    else:
        flat = spec.n * spec.input_dim
        params = {
            "w": uniform_init(rng, (N_CLASSES, flat), flat),
            "b": uniform_init(rng, (N_CLASSES,), flat),
        }
    return _MODEL_CLASSES[spec.kind](spec, params, norm)


# --- training ----------------------------------------------------------------

@dataclass
class EpochStats:
    epoch: int
    train_loss: float
    val_loss: float
    val_acc: float


@dataclass
class TrainingHistory:
    epochs: list[EpochStats] = field(default_factory=list)
    best_epoch: int = -1
    aborted: bool = False


def one_hot_labels(y: np.ndarray) -> np.ndarray:
    out = np.zeros((len(y), N_CLASSES))
    out[np.arange(len(y)), np.asarray(y, dtype=int)] = 1.0
    return out


def _dataset_loss_acc(model: Model, x: np.ndarray, one_hot: np.ndarray) -> tuple[float, float]:
    logits = model.logits(x)
    loss, _ = softmax_ce(logits, one_hot)
    acc = float((logits.argmax(axis=1) == one_hot.argmax(axis=1)).mean())
    return loss, acc


def train(model: Model, x_raw: np.ndarray, y: np.ndarray, cfg: TrainConfig,
          norm: NormalizationStats | None = None) -> TrainingHistory:
    """Mini-batch SGD on mean cross-entropy; deterministic given cfg.seed.

    Holds out ``val_fraction`` of the data for early stopping (patience in
    epochs) and restores the best-validation parameters at the end. A
    non-finite loss aborts training and rolls the parameters back to the end
    of the last healthy epoch.
    """
    if norm is not None:
        model.norm = norm
    x = model.normalize(model._check_input(x_raw))
    labels = one_hot_labels(y)
    history = TrainingHistory()
    if cfg.max_epochs == 0:
        return history

    rng = np.random.default_rng(cfg.seed)
    order = rng.permutation(len(x))
    n_val = int(round(cfg.val_fraction * len(x)))
    val_idx, train_idx = order[:n_val], order[n_val:]
    if len(train_idx) == 0:
        raise ValueError("validation split leaves no training data")

    best_val = np.inf
    best_params = None
    stall = 0
    snapshot = copy.deepcopy(model.params)
    for epoch in range(cfg.max_epochs):
        epoch_order = train_idx[rng.permutation(len(train_idx))]
        healthy = True
        for lo in range(0, len(epoch_order), cfg.batch_size):
            batch = epoch_order[lo:lo + cfg.batch_size]
            try:
                loss, grads = model.loss_and_grads(x[batch], labels[batch])
                if not np.isfinite(loss):
                    raise NumericError("non-finite training loss")
                sgd_step(model.params, grads, cfg)
            except NumericError:
                healthy = False
                break
        if not healthy:
            model.params = snapshot
            history.aborted = True
            break
        snapshot = copy.deepcopy(model.params)

        train_loss, train_acc = _dataset_loss_acc(model, x[train_idx], labels[train_idx])
        if len(val_idx):
            val_loss, val_acc = _dataset_loss_acc(model, x[val_idx], labels[val_idx])
        else:
            val_loss, val_acc = train_loss, train_acc
        history.epochs.append(EpochStats(epoch, train_loss, val_loss, val_acc))

        if val_loss < best_val - 1e-12:
            best_val = val_loss
            best_params = copy.deepcopy(model.params)
            history.best_epoch = epoch
            stall = 0
        else:
            stall += 1
            if len(val_idx) and stall > cfg.patience:
                break
    if best_params is not None:
        model.params = best_params
    return history


def predict(model: Model, segment: np.ndarray) -> DecisionVector:
    """Decision vector for one raw (unnormalized) segment."""
    probs = model.predict_proba(segment)[0]
    # Renormalize away float rounding so the probability invariant holds exactly.
    return DecisionVector(probs / probs.sum())


def classify(model: Model, segment: np.ndarray) -> Maneuver:
    return predict(model, segment).label


def classify_batch(model: Model, x_raw: np.ndarray) -> np.ndarray:
    """Argmax classes for a batch of raw segments (ties to the lower class)."""
    x = model.normalize(model._check_input(x_raw))
    return model.logits(x).argmax(axis=1)


# --- persistence ---------------------------------------------------------------

def save_model(path: Union[str, Path], model: Model, metadata: dict | None = None) -> None:
    arch = model.spec.to_dict()
    arch["normalization"] = model.norm.to_dict() if model.norm is not None else None
    save_checkpoint(path, arch, model.params, metadata or {})


def load_model(path: Union[str, Path]) -> Model:
    arch, params, _ = load_checkpoint(path)
    spec = ModelSpec.from_dict(arch)
    norm = (
        NormalizationStats.from_dict(arch["normalization"])
        if arch.get("normalization") else None
    )
    model = _MODEL_CLASSES[spec.kind](spec, params, norm)
    return model


def write_history_csv(history: TrainingHistory, path: Union[str, Path]) -> None:
    with open(path, "w", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow(["epoch", "train_loss", "val_loss", "val_acc"])
        for ep in history.epochs:
            writer.writerow([ep.epoch, repr(ep.train_loss), repr(ep.val_loss), repr(ep.val_acc)])


# --- dataset helpers -------------------------------------------------------------

def segments_to_arrays(
    segments: TypingSequence[Segment],
) -> tuple[np.ndarray, np.ndarray, np.ndarray, np.ndarray]:
    """Stack segments into (features, labels, vehicle_ids, last_frames)."""
    x = np.stack([seg.features for seg in segments])
    y = np.array([int(seg.label) for seg in segments], dtype=np.int64)
    vids = np.array([seg.vehicle_id for seg in segments], dtype=np.int64)
    last = np.array([seg.last_frame for seg in segments], dtype=np.int64)
    return x, y, vids, last


def parameter_count(spec: ModelSpec) -> int:
    """Closed-form parameter count for each architecture."""
    d, n, e, h = spec.input_dim, spec.n, spec.embed_dim, spec.hidden_dim
    if spec.kind == "lstm":
        return (d * e + e) + (4 * h * (e + h) + 4 * h) + (h * N_CLASSES + N_CLASSES)
    if spec.kind == "ffnn":
        flat = n * d
        h1, h2 = FFNN_HIDDEN
        return (flat * h1 + h1) + (h1 * h2 + h2) + (h2 * N_CLASSES + N_CLASSES)
    flat = n * d
    return flat * N_CLASSES + N_CLASSES
