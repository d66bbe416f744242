"""Training procedures and the trained-model container.

Two trainers are provided. Gradient descent minimizes a batch loss over
the coefficients of polynomial angle functions (and, for the five-angle
network, the scalar state and observable angles), using the analytic
circuit derivatives chained with d(angle)/d(c_kj) = x_j^k. The one-shot
least-squares trainer maps labels through arctanh and solves for the
polynomial coefficients with a pseudoinverse, which is a global minimum
of the squared error in the transformed space.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Optional

import numpy as np

from . import circuit, linalg
from .features import (NormalizationRecord, PolynomialWeightFunction,
                       build_design_matrix, eval_angle, fit_feature_scaling)

__all__ = [
    "GdConfig",
    "LlsConfig",
    "TrainedModel",
    "TrainingDiverged",
    "InvalidLabel",
    "mse_loss",
    "hinge_loss",
    "gd_train",
    "lls_train",
    "predict",
    "predict_class",
    "arctanh_labels",
]

DIVERGENCE_CAP = 1e6
TRAINABLE_ALL = frozenset({"coefficients", "theta", "omega"})


class TrainingDiverged(RuntimeError):
    """Gradient descent produced a non-finite or runaway loss."""

    def __init__(self, epoch: int, loss: float):
        super().__init__(f"training diverged at epoch {epoch} (loss={loss!r})")
        self.epoch = epoch
        self.loss = loss


class InvalidLabel(ValueError):
    """A label lies outside [-1, 1] and cannot pass through arctanh."""


def _check_pair(predictions, targets) -> tuple[np.ndarray, np.ndarray]:
    p = np.asarray(predictions, dtype=float).ravel()
    t = np.asarray(targets, dtype=float).ravel()
    if p.size != t.size:
        raise ValueError(f"length mismatch: {p.size} predictions vs {t.size} targets")
    if p.size == 0:
        raise ValueError("empty prediction/target vectors")
    return p, t


def mse_loss(predictions, targets) -> float:
    """Mean squared error (1/n) sum (yhat_i - y_i)^2."""
    p, t = _check_pair(predictions, targets)
    return float(np.mean((p - t) ** 2))


def hinge_loss(predictions, targets) -> float:
    """Mean hinge loss (1/n) sum max(0, 1 - yhat_i * y_i)."""
    p, t = _check_pair(predictions, targets)
    return float(np.mean(np.maximum(0.0, 1.0 - p * t)))


def _loss_and_residual(kind: str, yhat: np.ndarray, y: np.ndarray):
    """Loss value and d(loss)/d(yhat) for the batch."""
    n = y.size
    if kind == "mse":
        diff = yhat - y
        return float(np.mean(diff ** 2)), 2.0 * diff / n
    if kind == "hinge":
        margin = 1.0 - yhat * y
        active = margin > 0
        return float(np.mean(np.maximum(0.0, margin))), np.where(active, -y, 0.0) / n
    raise ValueError(f"unknown loss {kind!r}, expected 'mse' or 'hinge'")


@dataclass(frozen=True)
class GdConfig:
    """Gradient-descent settings.

    `trainable` selects which parameter groups receive updates; the
    reduced network has no state/observable angles so only the
    "coefficients" entry matters there.
    """

    learning_rate: float = 0.05
    max_epochs: int = 500
    target_loss: float = 0.0
    seed: int = 0
    init_scale: float = 0.1
    K: int = 1
    loss: str = "mse"
    trainable: frozenset = TRAINABLE_ALL
    normalize: bool = True

    def __post_init__(self):
        if self.learning_rate <= 0:
            raise ValueError(f"learning_rate must be positive, got {self.learning_rate}")
        if self.max_epochs < 1:
            raise ValueError(f"max_epochs must be at least 1, got {self.max_epochs}")
        if self.target_loss < 0:
            raise ValueError(f"target_loss must be non-negative, got {self.target_loss}")
        if self.init_scale < 0:
            raise ValueError(f"init_scale must be non-negative, got {self.init_scale}")
        if self.K < 1:
            raise ValueError(f"K must be positive, got {self.K}")
        unknown = set(self.trainable) - TRAINABLE_ALL
        if unknown:
            raise ValueError(f"unknown trainable entries {sorted(unknown)}")


@dataclass(frozen=True)
class LlsConfig:
    """One-shot least-squares settings. `epsilon` nudges +-1 labels off
    the asymptotes of tanh before the arctanh transform."""

    K: int = 1
    epsilon: float = 1e-16
    rcond: Optional[float] = None
    normalize: bool = True

    def __post_init__(self):
        if self.K < 1:
            raise ValueError(f"K must be positive, got {self.K}")
        if not 0 < self.epsilon < 1:
            raise ValueError(f"epsilon must be in (0, 1), got {self.epsilon}")
        if self.rcond is not None and self.rcond < 0:
            raise ValueError(f"rcond must be non-negative, got {self.rcond}")


@dataclass(frozen=True)
class TrainedModel:
    """A fitted network plus the preprocessing needed to apply it.

    `beta` always holds the polynomial for the Ry angle. The five-angle
    network ("gd-full") additionally carries polynomials for both Rz
    angles and scalar state/observable angles; they are None/0 otherwise.
    """

    kind: str  # "gd-full" | "gd-reduced" | "lls"
    K: int
    p: int
    beta: PolynomialWeightFunction
    alpha: Optional[PolynomialWeightFunction] = None
    gamma: Optional[PolynomialWeightFunction] = None
    theta: float = 0.0
    omega: float = 0.0
    normalization: Optional[NormalizationRecord] = None
    config: dict = field(default_factory=dict)

    def __post_init__(self):
        if self.kind not in ("gd-full", "gd-reduced", "lls"):
            raise ValueError(f"unknown model kind {self.kind!r}")
        if self.kind == "gd-full" and (self.alpha is None or self.gamma is None):
            raise ValueError("five-angle model requires alpha and gamma polynomials")

    def _prepare(self, x) -> np.ndarray:
        arr = np.asarray(x, dtype=float)
        dim = arr.size if arr.ndim == 1 else (arr.shape[1] if arr.ndim == 2 else None)
        if dim != self.p:
            raise ValueError(f"input has dimension {dim}, model expects {self.p}")
        if self.normalization is not None:
            arr = self.normalization.apply_features(arr)
        return arr

    def predict(self, x):
        """Model output in [-1, 1] for one input vector or an (n, p) batch."""
        u = self._prepare(x)
        if self.kind == "lls":
            return np.tanh(eval_angle(self.beta, u))
        if self.kind == "gd-reduced":
            return np.cos(eval_angle(self.beta, u))
        return circuit.expectation_batch(
            eval_angle(self.alpha, u), eval_angle(self.beta, u),
            eval_angle(self.gamma, u), self.theta, self.omega)

    def predict_class(self, x):
        """Sign of the prediction in {-1, +1}; an exact 0 maps to +1."""
        pred = self.predict(x)
        cls = np.where(np.asarray(pred) >= 0, 1.0, -1.0)
        return float(cls) if np.isscalar(pred) or np.ndim(pred) == 0 else cls


def predict(model: TrainedModel, x):
    return model.predict(x)


def predict_class(model: TrainedModel, x):
    return model.predict_class(x)


def _fit_scaling(data, normalize: bool):
    """Scaled inputs plus the record a trained model must carry: fitted
    feature ranges and, when the dataset's targets were rescaled at load
    time, the original target range for recalibration."""
    record = fit_feature_scaling(data.inputs) if normalize else None
    target_range = getattr(data, "target_range", None)
    if target_range is not None:
        lo, hi = target_range
        if record is None:
            record = NormalizationRecord(feature_min=None, feature_max=None,
                                         target_min=lo, target_max=hi)
        else:
            record = NormalizationRecord(feature_min=record.feature_min,
                                         feature_max=record.feature_max,
                                         target_min=lo, target_max=hi)
    inputs = record.apply_features(data.inputs) if normalize else data.inputs
    return inputs, record


def gd_train(data, config: GdConfig = GdConfig(), model_shape: str = "reduced"):
    """Batch gradient descent; returns (model, loss_history).

    `model_shape` is "reduced" (single polynomial Ry angle, computational
    basis measurement of |0>-input) or "full" (polynomials for all three
    neuron angles plus scalar state and observable angles). Loss history
    holds the batch loss after each epoch's update; training stops when
    it reaches `target_loss` or after `max_epochs` updates, and aborts if
    the loss leaves the finite range.
    """
    if model_shape not in ("reduced", "full"):
        raise ValueError(f"model_shape must be 'reduced' or 'full', got {model_shape!r}")
    if data.n < 1:
        raise ValueError("dataset is empty")
    y = data.targets
    u, record = _fit_scaling(data, config.normalize)
    with np.errstate(over="ignore"):  # extreme powers overflow to inf and
        design = build_design_matrix(u, config.K)  # trip the divergence guard
    n_coef = design.shape[1]

    rng = np.random.default_rng(config.seed)
    full = model_shape == "full"
    n_params = (3 * n_coef + 2) if full else n_coef
    w = rng.uniform(-config.init_scale, config.init_scale, n_params)

    coef_on = "coefficients" in config.trainable
    theta_on = full and "theta" in config.trainable
    omega_on = full and "omega" in config.trainable

    def forward(w):
        if full:
            wa, wb, wg = w[:n_coef], w[n_coef:2 * n_coef], w[2 * n_coef:3 * n_coef]
            al, be, ga = design @ wa, design @ wb, design @ wg
            th, om = w[-2], w[-1]
        else:
            al = ga = th = om = 0.0
            be = design @ w
        yhat = circuit.expectation_batch(al, be, ga, th, om)
        return yhat, (al, be, ga, th, om)

    history: list[float] = []
    # non-finite intermediates are expected on the way to the divergence
    # guard below, so numpy's warnings are silenced for the loop
    with np.errstate(invalid="ignore", over="ignore"):
        yhat, angles = forward(w)
        loss, res = _loss_and_residual(config.loss, yhat, y)
        for epoch in range(config.max_epochs):
            if loss <= config.target_loss:
                break
            d_al, d_be, d_ga, d_th, d_om = circuit.gradient_batch(*angles)
            if full:
                grad = np.empty_like(w)
                if coef_on:
                    grad[:n_coef] = (res * d_al) @ design
                    grad[n_coef:2 * n_coef] = (res * d_be) @ design
                    grad[2 * n_coef:3 * n_coef] = (res * d_ga) @ design
                else:
                    grad[:3 * n_coef] = 0.0
                grad[-2] = res @ d_th if theta_on else 0.0
                grad[-1] = res @ d_om if omega_on else 0.0
            else:
                grad = ((res * d_be) @ design) if coef_on else np.zeros_like(w)
            w = w - config.learning_rate * grad
            yhat, angles = forward(w)
            loss, res = _loss_and_residual(config.loss, yhat, y)
            history.append(loss)
            if not np.isfinite(loss) or loss > DIVERGENCE_CAP:
                raise TrainingDiverged(epoch=len(history), loss=loss)
    if not history:
        history.append(loss)

    K, p = config.K, data.p
    if full:
        model = TrainedModel(
            kind="gd-full", K=K, p=p,
            alpha=PolynomialWeightFunction.from_flat(w[:n_coef], K, p),
            beta=PolynomialWeightFunction.from_flat(w[n_coef:2 * n_coef], K, p),
            gamma=PolynomialWeightFunction.from_flat(w[2 * n_coef:3 * n_coef], K, p),
            theta=float(w[-2]), omega=float(w[-1]),
            normalization=record, config=_gd_snapshot(config, model_shape))
    else:
        model = TrainedModel(
            kind="gd-reduced", K=K, p=p,
            beta=PolynomialWeightFunction.from_flat(w, K, p),
            normalization=record, config=_gd_snapshot(config, model_shape))
    return model, history


def _gd_snapshot(config: GdConfig, shape: str) -> dict:
    return {
        "trainer": "gd", "shape": shape, "learning_rate": config.learning_rate,
        "max_epochs": config.max_epochs, "target_loss": config.target_loss,
        "seed": config.seed, "init_scale": config.init_scale, "K": config.K,
        "loss": config.loss, "trainable": sorted(config.trainable),
        "normalize": config.normalize,
    }


def arctanh_labels(targets, epsilon: float = 1e-16) -> np.ndarray:
    """arctanh of labels, with +-1 nudged inward by epsilon first."""
    y = np.asarray(targets, dtype=float)
    if not np.all(np.isfinite(y)) or np.any(np.abs(y) > 1.0):
        raise InvalidLabel("labels must lie in [-1, 1]")
    clipped = np.where(y >= 1.0, 1.0 - epsilon, np.where(y <= -1.0, -1.0 + epsilon, y))
    return np.arctanh(clipped)


def lls_train(data, config: LlsConfig = LlsConfig()) -> TrainedModel:
    """One-shot least-squares fit of the reduced network.

    Builds the power design matrix, transforms labels with arctanh (after
    nudging +-1 inward by epsilon) and solves the linear system by
    pseudoinverse. The model prediction is tanh of the fitted polynomial.
    """
    if data.n < 1:
        raise ValueError("dataset is empty")
    u, record = _fit_scaling(data, config.normalize)
    design = build_design_matrix(u, config.K)
    rhs = arctanh_labels(data.targets, config.epsilon)
    coeffs = linalg.lls_solve(design, rhs, rcond=config.rcond)
    return TrainedModel(
        kind="lls", K=config.K, p=data.p,
        beta=PolynomialWeightFunction.from_flat(coeffs, config.K, data.p),
        normalization=record,
        config={"trainer": "lls", "K": config.K, "epsilon": config.epsilon,
                "rcond": config.rcond, "normalize": config.normalize})
