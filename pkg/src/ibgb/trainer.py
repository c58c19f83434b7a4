"""Full-batch gradient-descent training with an optional dual-gradient-descent
MI constraint, plus SWAG moment collection over the tail of training.

The constrained step is theta <- theta - lr * grad[CE + lam * (mi_hat - rho)]
with weight decay added to the gradient, and the multiplier updated by
lam <- max(0, lam + lr_lambda * (mi_hat - rho)), which penalizes constraint
violation mi_hat > rho and keeps the multiplier dual-feasible.  An equality
mode flips the sign convention (multiplier unprojected, objective term
lam * (rho - mi_hat)) for runs that want the constraint treated as equality.
"""

from __future__ import annotations

import hashlib
import json
from dataclasses import dataclass, field

import numpy as np

from . import mlp
from .dataset import LabeledDataset
from .errors import InvalidArgument, TrainingDiverged
from .mi_model import VAR_FLOOR, SwagPosterior


@dataclass
class TrainConfig:
    widths: tuple = (32, 32, 16, 16)
    weight_decay: float = 0.0
    lr_theta: float = 1e-2
    lr_lambda: float = 0.5
    iterations: int = 300
    k: int = 8
    rho: float | None = None
    constraint_mode: str = "inequality"   # or "equality" (unprojected sign)
    lambda_max: float = 3.0               # clip |lambda|: prevents dual windup
    lambda_warmup_fraction: float = 0.0   # dual updates start after this fraction
    fixed_mi_weight: float = 0.0          # static regularizer when rho is None
    seed: int = 0
    swag_start_fraction: float = 0.5
    swag_sample_every: int = 1
    eval_k: int = 64
    eval_mode: str = "mean"               # mean-latent readout or "sample"
    fixed_sigma: float | None = None
    sigma_bias: float = 0.0
    accept_train_accuracy: float = 0.85

    def __post_init__(self):
        if self.lr_theta < 0 or self.lr_lambda <= 0:
            raise InvalidArgument("learning rates must be positive")
        if self.iterations < 1:
            raise InvalidArgument("iterations must be >= 1")
        if self.rho is not None and self.rho < 0:
            raise InvalidArgument("rho must be nonnegative")
        if self.constraint_mode not in ("inequality", "equality"):
            raise InvalidArgument("constraint_mode must be inequality or equality")
        if not 0.0 <= self.lambda_warmup_fraction < 1.0:
            raise InvalidArgument("lambda warmup fraction must lie in [0, 1)")
        if self.eval_mode not in ("mean", "sample"):
            raise InvalidArgument("eval_mode must be mean or sample")

    def config_hash(self) -> str:
        blob = json.dumps(self.__dict__, sort_keys=True, default=str)
        return hashlib.sha256(blob.encode()).hexdigest()[:12]


@dataclass
class TrainedModel:
    params: mlp.MlpParams
    config: TrainConfig
    dataset_seed: int
    lambda_history: np.ndarray
    loss_history: np.ndarray
    mi_history: np.ndarray
    train_loss: float
    train_error: float
    test_loss: float
    test_error: float
    max_train_loss: float
    max_observed_loss: float
    swag: SwagPosterior
    accepted: bool
    diverged: bool = False

    @property
    def gap_loss(self) -> float:
        return self.test_loss - self.train_loss

    @property
    def gap_error(self) -> float:
        return self.test_error - self.train_error

    @property
    def final_mi(self) -> float:
        """Training-time MI estimate, averaged over the last 10 iterations."""
        tail = self.mi_history[-10:]
        return float(tail.mean()) if len(tail) else float("nan")

    def run_record(self) -> dict:
        return {
            "config_hash": self.config.config_hash(),
            "widths": list(self.config.widths),
            "weight_decay": self.config.weight_decay,
            "model_seed": self.config.seed,
            "dataset_seed": self.dataset_seed,
            "rho": self.config.rho,
            "train_loss": self.train_loss,
            "train_accuracy": 1.0 - self.train_error,
            "test_loss": self.test_loss,
            "test_accuracy": 1.0 - self.test_error,
            "gap_loss": self.gap_loss,
            "gap_error": self.gap_error,
            "final_mi": self.final_mi,
            "final_lambda": float(self.lambda_history[-1]),
            "accepted": bool(self.accepted),
            "diverged": bool(self.diverged),
        }


def dual_update(lam: float, eta_lambda: float, rho: float, mi_hat: float) -> float:
    """Projected multiplier step penalizing constraint violation mi_hat > rho."""
    return max(0.0, lam + eta_lambda * (mi_hat - rho))


def dual_update_equality(lam: float, eta_lambda: float, rho: float,
                         mi_hat: float) -> float:
    """Literal equality-constraint step; the multiplier may go negative."""
    return lam + eta_lambda * (rho - mi_hat)


class SwagAccumulator:
    """Running first and second moments of parameter iterates."""

    def __init__(self):
        self.count = 0
        self._mean = None
        self._sq = None

    def push(self, vec: np.ndarray) -> None:
        if self._mean is None:
            self._mean = np.zeros_like(vec)
            self._sq = np.zeros_like(vec)
        self.count += 1
        w = 1.0 / self.count
        self._mean += (vec - self._mean) * w
        self._sq += (vec * vec - self._sq) * w

    def finalize(self, layer_slices: dict) -> SwagPosterior:
        if self.count < 2:
            raise InvalidArgument("need at least 2 iterates for SWAG")
        var = np.maximum(self._sq - self._mean ** 2, VAR_FLOOR)
        return SwagPosterior(self._mean.copy(), var, dict(layer_slices))


def fit_swag(iterates, layer_slices: dict | None = None) -> SwagPosterior:
    """Diagonal SWAG from a list of flat parameter vectors."""
    if len(iterates) < 2:
        raise InvalidArgument("need at least 2 iterates for SWAG")
    acc = SwagAccumulator()
    for v in iterates:
        acc.push(np.asarray(v, dtype=np.float64))
    if layer_slices is None:
        layer_slices = {1: len(iterates[0])}
    return acc.finalize(layer_slices)


def decay_step(vec: np.ndarray, lr: float, weight_decay: float) -> np.ndarray:
    """The weight-decay part of the update in isolation."""
    return vec - lr * weight_decay * vec


def train(config: TrainConfig, data: LabeledDataset, rng=None) -> TrainedModel:
    """Train one model; bit-reproducible given (config.seed, data.seed)."""
    if rng is None:
        rng = np.random.default_rng(
            np.random.SeedSequence([int(config.seed), int(data.seed), 0x7124]))

    params = mlp.init_params(config.widths, data.inputs.shape[1],
                             data.n_classes, rng,
                             fixed_sigma=config.fixed_sigma,
                             sigma_bias=config.sigma_bias)
    eval_rng_seed = rng.integers(0, 2 ** 63)
    xb, yb = data.train_inputs, data.train_labels

    lam = 0.0
    lam_hist, loss_hist, mi_hist = [], [], []
    swag_start = int(np.floor(config.iterations * config.swag_start_fraction))
    warmup = int(np.floor(config.iterations * config.lambda_warmup_fraction))
    acc = SwagAccumulator()
    vec = params.flatten()

    for it in range(config.iterations):
        if config.rho is None:
            coef = config.fixed_mi_weight
        elif config.constraint_mode == "inequality":
            coef = lam
        else:
            coef = -lam
        try:
            loss, grads, mi_hat, ce = mlp.loss_and_grads(
                params, xb, yb, config.k, coef, rng)
        except FloatingPointError as exc:
            raise TrainingDiverged(it, f"{exc} at iteration {it}") from exc
        if not np.isfinite(loss):
            raise TrainingDiverged(it)

        gvec = grads.flatten()
        vec = vec - config.lr_theta * (gvec + config.weight_decay * vec)
        params = params.unflatten(vec)

        lam_hist.append(lam)
        loss_hist.append(ce)
        mi_hist.append(mi_hat)
        if config.rho is not None and it >= warmup:
            if config.constraint_mode == "inequality":
                lam = dual_update(lam, config.lr_lambda, config.rho, mi_hat)
            else:
                lam = dual_update_equality(lam, config.lr_lambda, config.rho, mi_hat)
            lam = float(np.clip(lam, -config.lambda_max, config.lambda_max))
        if it >= swag_start and (it - swag_start) % config.swag_sample_every == 0:
            acc.push(vec)

    if acc.count < 2:       # very short runs still get a posterior
        acc.push(vec)
        acc.push(vec)
    swag = acc.finalize(params.layer_slices())

    if config.eval_mode == "mean":
        train_loss, train_err, max_train = mlp.eval_losses_mean(params, xb, yb)
        test_loss, test_err, max_test = mlp.eval_losses_mean(
            params, data.test_inputs, data.test_labels)
    else:
        eval_rng = np.random.default_rng(
            np.random.SeedSequence([int(eval_rng_seed)]))
        train_loss, train_err, max_train = mlp.eval_losses(
            params, xb, yb, config.eval_k, eval_rng)
        test_loss, test_err, max_test = mlp.eval_losses(
            params, data.test_inputs, data.test_labels, config.eval_k, eval_rng)

    return TrainedModel(
        params=params, config=config, dataset_seed=data.seed,
        lambda_history=np.array(lam_hist), loss_history=np.array(loss_hist),
        mi_history=np.array(mi_hist),
        train_loss=train_loss, train_error=train_err,
        test_loss=test_loss, test_error=test_err,
        max_train_loss=max_train,
        max_observed_loss=max(max_train, max_test),
        swag=swag,
        accepted=(1.0 - train_err) >= config.accept_train_accuracy,
    )
