"""Training loop: BCE objective, Adam with decoupled weight decay,
plateau LR halving and early stopping on validation loss.

The data source is anything implementing PairStream: train pairs are
indexed by (epoch, i) so each epoch can see fresh mixtures, validation
pairs by i alone so the validation set is fixed across epochs. Best-epoch
weights (lowest validation loss) are what fit() returns.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Protocol

import numpy as np

from .dsp import MelSpectrogram
from .errors import InvalidConfig, InvalidShape, TrainingDiverged
from .model.network import backward_batch, forward_batch, init_weights
from .model.config import ModelConfig
from .model.weights import WeightStore

BCE_EPS = 1e-7
ADAM_BETA1 = 0.9
ADAM_BETA2 = 0.999
ADAM_EPS = 1e-8


class PairStream(Protocol):
    def train_pair(self, epoch: int, i: int) -> tuple[MelSpectrogram, np.ndarray]:
        ...

    def val_pair(self, i: int) -> tuple[MelSpectrogram, np.ndarray]:
        ...


class FixedPairStream:
    """Finite pair list, cycled; validation defaults to the same pairs."""

    def __init__(self, pairs, val_pairs=None):
        if not pairs:
            raise InvalidConfig("empty pair list")
        self.pairs = list(pairs)
        self.vals = list(val_pairs) if val_pairs is not None else self.pairs

    def train_pair(self, epoch, i):
        return self.pairs[i % len(self.pairs)]

    def val_pair(self, i):
        return self.vals[i % len(self.vals)]


def bce_loss(pred: np.ndarray, labels: np.ndarray,
             eps: float = BCE_EPS) -> float:
    """Mean binary cross-entropy with probability clamping to [eps, 1-eps]."""
    if pred.shape != labels.shape:
        raise InvalidShape(f"pred {pred.shape} vs labels {labels.shape}")
    p = np.clip(pred, eps, 1.0 - eps)
    y = labels.astype(np.float64)
    return float(-np.mean(y * np.log(p) + (1.0 - y) * np.log1p(-p)))


@dataclass
class AdamState:
    m: dict[str, np.ndarray]
    v: dict[str, np.ndarray]
    t: int = 0

    @classmethod
    def for_store(cls, store: WeightStore) -> "AdamState":
        return cls(m={k: np.zeros_like(w) for k, w in store.tensors.items()},
                   v={k: np.zeros_like(w) for k, w in store.tensors.items()})


def adam_step(store: WeightStore, grads: dict[str, np.ndarray],
              state: AdamState, lr: float, weight_decay: float) -> None:
    """One decoupled-weight-decay Adam update, in place.

    Decay multiplies weights by (1 - lr*wd) before the moment update; a
    zero gradient with nonzero decay still shrinks the weight.
    """
    state.t += 1
    t = state.t
    bias1 = 1.0 - ADAM_BETA1 ** t
    bias2 = 1.0 - ADAM_BETA2 ** t
    for name, w in store.tensors.items():
        g = grads[name]
        if weight_decay:
            w *= 1.0 - lr * weight_decay
        m = state.m[name]
        v = state.v[name]
        m *= ADAM_BETA1
        m += (1.0 - ADAM_BETA1) * g
        v *= ADAM_BETA2
        v += (1.0 - ADAM_BETA2) * g * g
        w -= lr * (m / bias1) / (np.sqrt(v / bias2) + ADAM_EPS)


class PlateauController:
    """Epoch-level schedule: halve LR after `patience` epochs without a new
    best validation loss (and at each further multiple), stop after
    `stop_patience` epochs without one."""

    def __init__(self, patience: int = 20, stop_patience: int = 20,
                 improvement_eps: float = 1e-6):
        if patience < 1 or stop_patience < 1:
            raise InvalidConfig("patience values must be >= 1")
        self.patience = patience
        self.stop_patience = stop_patience
        self.improvement_eps = improvement_eps
        self.best = np.inf
        self.since_best = 0

    def update(self, val_loss: float) -> tuple[bool, bool, bool]:
        """Returns (improved, halve_now, stop_now)."""
        if val_loss < self.best - self.improvement_eps:
            self.best = val_loss
            self.since_best = 0
            return True, False, False
        self.since_best += 1
        halve = self.since_best % self.patience == 0
        stop = self.since_best >= self.stop_patience
        return False, halve, stop


@dataclass(frozen=True)
class TrainConfig:
    max_epochs: int = 100
    batch_size: int = 8
    epoch_train_pairs: int = 512
    epoch_val_pairs: int = 64
    initial_lr: float = 1e-3
    weight_decay: float = 1e-4
    plateau_patience: int = 20
    early_stop_patience: int = 20
    lr_factor: float = 0.5
    seed: int = 0

    def __post_init__(self):
        if self.max_epochs < 1 or self.batch_size < 1:
            raise InvalidConfig("max_epochs and batch_size must be >= 1")
        if self.epoch_train_pairs < 1 or self.epoch_val_pairs < 1:
            raise InvalidConfig("epoch pair counts must be >= 1")
        if not 0.0 < self.lr_factor < 1.0:
            raise InvalidConfig("lr_factor must be in (0, 1)")
        if self.initial_lr <= 0.0 or self.weight_decay < 0.0:
            raise InvalidConfig("bad lr/weight_decay")

    def to_dict(self) -> dict:
        return {k: getattr(self, k) for k in (
            "max_epochs", "batch_size", "epoch_train_pairs", "epoch_val_pairs",
            "initial_lr", "weight_decay", "plateau_patience",
            "early_stop_patience", "lr_factor", "seed")}


@dataclass
class EpochRecord:
    epoch: int
    train_loss: float
    val_loss: float
    lr: float
    improved: bool

    def to_dict(self) -> dict:
        return {"epoch": self.epoch, "train_loss": self.train_loss,
                "val_loss": self.val_loss, "lr": self.lr,
                "improved": self.improved}


@dataclass
class FitResult:
    store: WeightStore
    log: list = field(default_factory=list)
    best_epoch: int = 0
    best_val_loss: float = np.inf


def _stack_pairs(pairs):
    xs = np.stack([np.ascontiguousarray(m.values.T) for m, _ in pairs])
    ys = np.stack([np.asarray(y, dtype=np.float64) for _, y in pairs])
    if xs.shape[:2] != ys.shape:
        raise InvalidShape(f"features {xs.shape} vs labels {ys.shape}")
    return xs, ys


def fit(model_config: ModelConfig, stream: PairStream,
        cfg: TrainConfig = TrainConfig(), feature_config=None,
        on_epoch=None) -> FitResult:
    """Train from scratch; returns best-epoch weights and the epoch log."""
    store = init_weights(model_config, cfg.seed, feature_config)
    state = AdamState.for_store(store)
    controller = PlateauController(cfg.plateau_patience,
                                   cfg.early_stop_patience)
    lr = cfg.initial_lr
    best = store.clone()
    result = FitResult(store=best)

    val_pairs = [stream.val_pair(i) for i in range(cfg.epoch_val_pairs)]

    for epoch in range(1, cfg.max_epochs + 1):
        batch_losses = []
        for start in range(0, cfg.epoch_train_pairs, cfg.batch_size):
            size = min(cfg.batch_size, cfg.epoch_train_pairs - start)
            pairs = [stream.train_pair(epoch, start + j) for j in range(size)]
            x, y = _stack_pairs(pairs)
            probs, cache = forward_batch(store, x, want_cache=True)
            loss = bce_loss(probs, y)
            if not np.isfinite(loss):
                raise TrainingDiverged(f"non-finite loss at epoch {epoch}")
            batch_losses.append(loss)
            dlogits = (probs - y) / probs.size
            grads = backward_batch(store, cache, dlogits)
            adam_step(store, grads, state, lr, cfg.weight_decay)

        val_losses = []
        for i in range(0, cfg.epoch_val_pairs, cfg.batch_size):
            chunk = val_pairs[i: i + cfg.batch_size]
            x, y = _stack_pairs(chunk)
            probs, _ = forward_batch(store, x)
            val_losses.append(bce_loss(probs, y) * len(chunk))
        val_loss = float(np.sum(val_losses) / len(val_pairs))
        if not np.isfinite(val_loss):
            raise TrainingDiverged(f"non-finite validation loss at epoch {epoch}")

        improved, halve, stop = controller.update(val_loss)
        record = EpochRecord(epoch=epoch,
                             train_loss=float(np.mean(batch_losses)),
                             val_loss=val_loss, lr=lr, improved=improved)
        result.log.append(record)
        if on_epoch is not None:
            on_epoch(record)
        if improved:
            best = store.clone()
            result.best_epoch = epoch
            result.best_val_loss = val_loss
        if halve:
            lr *= cfg.lr_factor
        if stop:
            break

    result.store = best
    return result
