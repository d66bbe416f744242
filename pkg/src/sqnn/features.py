"""Input-to-angle feature maps and preprocessing.

The polynomial weight function sums per-power dot products of the input
coordinates, c0 + sum_k sum_j c_kj * x_j^k. It can feed a rotation angle
directly, or through arccos(tanh(.)) so that the resulting model output
cos(angle) equals tanh of the polynomial. The same power expansion, laid
out row-wise, is the design matrix used by the least-squares trainer.
Image preprocessing uses the orthonormal type-II DCT.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np
from scipy import fft as _fft

__all__ = [
    "PolynomialWeightFunction",
    "NormalizationRecord",
    "eval_angle",
    "eval_beta_classifier",
    "build_design_matrix",
    "fit_feature_scaling",
    "normalize_features",
    "fit_target_scaling",
    "dct2",
    "idct2",
    "dct_features",
]


@dataclass(frozen=True)
class PolynomialWeightFunction:
    """Polynomial map from a p-vector to a scalar angle.

    `c` has shape (K, p); entry c[k-1, j-1] multiplies x_j^k. The flat
    coefficient layout is [c0, c_11..c_1p, ..., c_K1..c_Kp], matching the
    design-matrix column order.
    """

    K: int
    p: int
    c0: float = 0.0
    c: np.ndarray = field(default=None)  # type: ignore[assignment]

    def __post_init__(self):
        if self.K < 1 or self.p < 1:
            raise ValueError(f"K and p must be positive, got K={self.K}, p={self.p}")
        c = np.zeros((self.K, self.p)) if self.c is None else np.asarray(self.c, dtype=float)
        if c.shape != (self.K, self.p):
            raise ValueError(f"coefficient matrix must be {self.K}x{self.p}, got {c.shape}")
        object.__setattr__(self, "c", c)

    @classmethod
    def from_flat(cls, flat, K: int, p: int) -> "PolynomialWeightFunction":
        flat = np.asarray(flat, dtype=float).ravel()
        if flat.size != 1 + K * p:
            raise ValueError(f"expected {1 + K * p} coefficients for K={K}, p={p}, got {flat.size}")
        return cls(K=K, p=p, c0=float(flat[0]), c=flat[1:].reshape(K, p))

    def flat(self) -> np.ndarray:
        return np.concatenate([[self.c0], self.c.ravel()])


def _as_rows(x, p: int) -> tuple[np.ndarray, bool]:
    """Coerce a single p-vector or an (n, p) batch to 2-D."""
    arr = np.asarray(x, dtype=float)
    if arr.ndim == 1:
        if arr.size != p:
            raise ValueError(f"input has dimension {arr.size}, expected {p}")
        return arr[None, :], True
    if arr.ndim == 2 and arr.shape[1] == p:
        return arr, False
    raise ValueError(f"input must be a {p}-vector or an (n, {p}) array, got shape {arr.shape}")


def eval_angle(f: PolynomialWeightFunction, x):
    """Evaluate c0 + sum_{k,j} c_kj x_j^k for one input or a batch."""
    rows, single = _as_rows(x, f.p)
    total = np.full(rows.shape[0], f.c0)
    powers = rows.copy()
    for k in range(f.K):
        if k > 0:
            powers = powers * rows
        total = total + powers @ f.c[k]
    return float(total[0]) if single else total


def eval_beta_classifier(f: PolynomialWeightFunction, x):
    """Angle arccos(tanh(poly(x))), in [0, pi].

    The model output cos of this angle equals tanh(poly(x)), so it stays
    strictly inside (-1, 1).
    """
    return np.arccos(np.tanh(eval_angle(f, x)))


def build_design_matrix(inputs, K: int) -> np.ndarray:
    """Rows [1, x_1..x_p, x_1^2..x_p^2, ..., x_1^K..x_p^K].

    Column order matches PolynomialWeightFunction.flat(), so
    design @ flat == eval_angle row-wise.
    """
    if K < 1:
        raise ValueError(f"K must be positive, got {K}")
    X = np.asarray(inputs, dtype=float)
    if X.ndim == 1:
        X = X[None, :]
    if X.ndim != 2 or X.shape[0] < 1 or X.shape[1] < 1:
        raise ValueError(f"inputs must be a non-empty 2-D array, got shape {X.shape}")
    n = X.shape[0]
    blocks = [np.ones((n, 1))]
    powers = X
    for k in range(1, K + 1):
        if k > 1:
            powers = powers * X
        blocks.append(powers)
    return np.hstack(blocks)


@dataclass(frozen=True)
class NormalizationRecord:
    """Per-feature min/max for input rescaling to [-1, 1], plus optional
    target min/max for regression recalibration.

    `feature_min`/`feature_max` of None mean no input scaling was fitted
    (the record then only carries the target range)."""

    feature_min: np.ndarray | None
    feature_max: np.ndarray | None
    target_min: float | None = None
    target_max: float | None = None

    def apply_features(self, inputs):
        if self.feature_min is None:
            return np.asarray(inputs, dtype=float)
        rows, single = _as_rows(inputs, self.feature_min.size)
        lo, hi = self.feature_min, self.feature_max
        span = hi - lo
        with np.errstate(invalid="ignore", divide="ignore"):
            scaled = 2.0 * (rows - lo) / span - 1.0
        scaled = np.where(span > 0, scaled, 0.0)  # constant feature -> 0
        return scaled[0] if single else scaled

    def apply_target(self, y):
        if self.target_min is None or self.target_max is None:
            raise ValueError("record carries no target scaling")
        span = self.target_max - self.target_min
        if span == 0:
            return np.zeros_like(np.asarray(y, dtype=float))
        return 2.0 * (np.asarray(y, dtype=float) - self.target_min) / span - 1.0

    def invert_target(self, y):
        if self.target_min is None or self.target_max is None:
            raise ValueError("record carries no target scaling")
        span = self.target_max - self.target_min
        return (np.asarray(y, dtype=float) + 1.0) * span / 2.0 + self.target_min


def fit_feature_scaling(inputs) -> NormalizationRecord:
    X = np.asarray(inputs, dtype=float)
    if X.ndim != 2 or X.shape[0] < 1:
        raise ValueError("need at least one sample to fit feature scaling")
    return NormalizationRecord(feature_min=X.min(axis=0), feature_max=X.max(axis=0))


def normalize_features(inputs) -> tuple[np.ndarray, NormalizationRecord]:
    """Min-max scale each feature to [-1, 1]; constant features map to 0.

    Returns the scaled inputs and the record needed to apply the same
    affine map to held-out data.
    """
    record = fit_feature_scaling(inputs)
    return record.apply_features(np.asarray(inputs, dtype=float)), record


def fit_target_scaling(targets, record: NormalizationRecord | None = None) -> NormalizationRecord:
    y = np.asarray(targets, dtype=float)
    lo, hi = float(y.min()), float(y.max())
    if record is None:
        record = NormalizationRecord(feature_min=None, feature_max=None)
    return NormalizationRecord(feature_min=record.feature_min,
                               feature_max=record.feature_max,
                               target_min=lo, target_max=hi)


def dct2(image) -> np.ndarray:
    """Orthonormal 2-D type-II DCT of a square image."""
    img = np.asarray(image, dtype=float)
    if img.ndim != 2 or img.shape[0] != img.shape[1]:
        raise ValueError(f"expected a square image, got shape {img.shape}")
    return _fft.dctn(img, type=2, norm="ortho")


def idct2(coeffs) -> np.ndarray:
    """Inverse of dct2."""
    arr = np.asarray(coeffs, dtype=float)
    if arr.ndim != 2 or arr.shape[0] != arr.shape[1]:
        raise ValueError(f"expected a square coefficient block, got shape {arr.shape}")
    return _fft.idctn(arr, type=2, norm="ortho")


def dct_features(images, keep: int | None = None) -> np.ndarray:
    """DCT-transform a stack of square images into flat feature rows.

    `images` has shape (n, s, s). By default all s*s coefficients are kept
    and flattened row-major; `keep=B` retains only the top-left BxB
    low-frequency block.
    """
    imgs = np.asarray(images, dtype=float)
    if imgs.ndim != 3 or imgs.shape[1] != imgs.shape[2]:
        raise ValueError(f"expected (n, s, s) image stack, got shape {imgs.shape}")
    coeffs = _fft.dctn(imgs, type=2, norm="ortho", axes=(1, 2))
    if keep is not None:
        if not 1 <= keep <= imgs.shape[1]:
            raise ValueError(f"keep must be in [1, {imgs.shape[1]}], got {keep}")
        coeffs = coeffs[:, :keep, :keep]
    return coeffs.reshape(imgs.shape[0], -1)
