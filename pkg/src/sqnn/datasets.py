"""Dataset container, file loaders, synthetic generators and fold plans.

All loaders produce the same `Dataset` shape: an (n, p) float matrix of
inputs and n targets inside [-1, 1]. Regression targets that arrive
outside that range are min-max rescaled at load time and the original
range is kept so predictions can be recalibrated.
"""

from __future__ import annotations

import csv
import gzip
import logging
import struct
from dataclasses import dataclass, replace

import numpy as np

from .features import dct_features

__all__ = [
    "Dataset",
    "FoldPlan",
    "load_csv",
    "load_mnist_idx",
    "filter_pair",
    "gen_logic_gate",
    "gen_sinc",
    "gen_two_moons",
    "kfold_plan",
    "split",
    "LOGIC_GATES",
]

log = logging.getLogger(__name__)

MISSING_MARKERS = {"", "?", "NA", "nan"}

# Truth tables over inputs ((-1,-1), (-1,+1), (+1,-1), (+1,+1)),
# false -> -1 and true -> +1.
LOGIC_GATES = {
    "AND": (-1, -1, -1, 1),
    "OR": (-1, 1, 1, 1),
    "XOR": (-1, 1, 1, -1),
    "NAND": (1, 1, 1, -1),
    "NOR": (1, -1, -1, -1),
    "XNOR": (1, -1, -1, 1),
}


@dataclass(frozen=True)
class Dataset:
    """Inputs in R^p with targets in [-1, 1].

    `target_range` records the original (min, max) when targets were
    rescaled at load time, so regression outputs can be mapped back.
    `dropped_rows` counts rows removed for missing values.
    """

    inputs: np.ndarray
    targets: np.ndarray
    feature_names: tuple[str, ...] | None = None
    tag: str = ""
    target_range: tuple[float, float] | None = None
    dropped_rows: int = 0

    def __post_init__(self):
        X = np.asarray(self.inputs, dtype=float)
        y = np.asarray(self.targets, dtype=float)
        if X.ndim != 2 or X.shape[0] < 1:
            raise ValueError(f"inputs must be a non-empty (n, p) array, got shape {X.shape}")
        if y.shape != (X.shape[0],):
            raise ValueError(f"targets must have shape ({X.shape[0]},), got {y.shape}")
        if not np.all(np.isfinite(X)) or not np.all(np.isfinite(y)):
            raise ValueError("dataset contains non-finite values")
        if y.min() < -1.0 or y.max() > 1.0:
            raise ValueError(
                f"targets must lie in [-1, 1], got range [{y.min()}, {y.max()}]; "
                "rescale at load time")
        object.__setattr__(self, "inputs", X)
        object.__setattr__(self, "targets", y)

    @property
    def n(self) -> int:
        return self.inputs.shape[0]

    @property
    def p(self) -> int:
        return self.inputs.shape[1]

    def subset(self, indices) -> "Dataset":
        idx = np.asarray(indices, dtype=int)
        return replace(self, inputs=self.inputs[idx], targets=self.targets[idx],
                       dropped_rows=0)


def _parse_cell(cell: str, label_map: dict[str, float] | None) -> float | None:
    text = cell.strip()
    if text in MISSING_MARKERS:
        return None
    if label_map and text in label_map:
        return float(label_map[text])
    return float(text)


def load_csv(path, target_column=-1, has_header: bool | None = None, *,
             label_map: dict[str, float] | None = None,
             drop_cols=(), drop_sparse_cols: float | None = None,
             scale_targets: bool | str = "auto", tag: str = "") -> Dataset:
    """Load a numeric CSV into a Dataset.

    The target column may be given by index (negative counts from the
    end) or, when a header is present, by name. Cells equal to "?" or
    empty count as missing; rows containing a missing value are dropped
    and the count is reported. `drop_cols` removes columns (indices or
    header names) before the target is resolved; `drop_sparse_cols=t`
    additionally removes feature columns whose missing fraction exceeds
    t. `has_header=None` sniffs the first line. `scale_targets` is
    "auto" (rescale to [-1, 1] only when out of range), True or False.

    `label_map` translates categorical target strings, e.g.
    {"M": 1, "B": -1}.
    """
    with open(path, newline="") as fh:
        rows = [row for row in csv.reader(fh) if row]
    if not rows:
        raise ValueError(f"{path}: empty file")

    header: list[str] | None = None
    if has_header is None:
        probe = rows[0]
        try:
            for cell in probe:
                _parse_cell(cell, label_map)
        except ValueError:
            header = [h.strip() for h in probe]
    elif has_header:
        header = [h.strip() for h in rows[0]]
    if header is not None:
        rows = rows[1:]
    if not rows:
        raise ValueError(f"{path}: no data rows")

    ncols = len(rows[0])

    def resolve(col) -> int:
        if isinstance(col, str):
            if header is None or col not in header:
                raise ValueError(f"{path}: no column named {col!r}")
            return header.index(col)
        idx = int(col)
        if not -ncols <= idx < ncols:
            raise ValueError(f"{path}: column index {idx} out of range for "
                             f"{ncols} columns")
        return idx % ncols

    dropped_cols = sorted({resolve(c) for c in drop_cols})
    if drop_sparse_cols is not None:
        missing = np.zeros(ncols)
        for row in rows:
            for j, cell in enumerate(row):
                if cell.strip() in MISSING_MARKERS:
                    missing[j] += 1
        sparse = np.where(missing / len(rows) > drop_sparse_cols)[0]
        dropped_cols = sorted(set(dropped_cols) | set(sparse.tolist()))

    target_idx = resolve(target_column)
    if target_idx in dropped_cols:
        raise ValueError(f"{path}: target column {target_column!r} was dropped")
    keep = [j for j in range(ncols) if j not in dropped_cols]

    data, dropped_rows = [], 0
    for row in rows:
        if len(row) != ncols:
            raise ValueError(f"{path}: ragged row with {len(row)} cells, expected {ncols}")
        try:
            values = [_parse_cell(row[j], label_map if j == target_idx else None)
                      for j in keep]
        except ValueError as exc:
            raise ValueError(f"{path}: non-numeric cell: {exc}") from exc
        if any(v is None for v in values):
            dropped_rows += 1
            continue
        data.append(values)
    if not data:
        raise ValueError(f"{path}: all rows dropped for missing values")
    if dropped_rows:
        log.warning("%s: dropped %d row(s) with missing values", path, dropped_rows)

    matrix = np.array(data, dtype=float)
    tcol = keep.index(target_idx)
    y = matrix[:, tcol]
    X = np.delete(matrix, tcol, axis=1)
    names = None
    if header is not None:
        kept_names = [header[j] for j in keep]
        names = tuple(name for i, name in enumerate(kept_names) if i != tcol)

    target_range = None
    need_scale = scale_targets is True or (
        scale_targets == "auto" and (y.min() < -1.0 or y.max() > 1.0))
    if need_scale:
        lo, hi = float(y.min()), float(y.max())
        y = np.zeros_like(y) if hi == lo else 2.0 * (y - lo) / (hi - lo) - 1.0
        target_range = (lo, hi)

    return Dataset(inputs=X, targets=y, feature_names=names,
                   tag=tag or str(path), target_range=target_range,
                   dropped_rows=dropped_rows)


def _open_maybe_gzip(path):
    with open(path, "rb") as probe:
        magic = probe.read(2)
    if magic == b"\x1f\x8b":
        return gzip.open(path, "rb")
    return open(path, "rb")

# IDX layout (big-endian):
#   images: int32 magic 0x00000803, int32 count, int32 rows, int32 cols,
#           then count*rows*cols unsigned bytes
#   labels: int32 magic 0x00000801, int32 count, then count unsigned bytes
IDX_IMAGES_MAGIC = 0x00000803
IDX_LABELS_MAGIC = 0x00000801


def load_mnist_idx(images_path, labels_path) -> tuple[np.ndarray, np.ndarray]:
    """Read an IDX image/label file pair.

    Returns (images, labels) with images of shape (n, rows, cols) scaled
    from byte values to [0, 1] and integer labels. Accepts gzipped files.
    """
    with _open_maybe_gzip(images_path) as fh:
        head = fh.read(16)
        if len(head) < 16:
            raise ValueError(f"{images_path}: truncated IDX header")
        magic, count, rows, cols = struct.unpack(">IIII", head)
        if magic != IDX_IMAGES_MAGIC:
            raise ValueError(f"{images_path}: bad magic {magic:#010x}, "
                             f"expected {IDX_IMAGES_MAGIC:#010x}")
        raw = fh.read(count * rows * cols)
        if len(raw) != count * rows * cols:
            raise ValueError(f"{images_path}: truncated pixel data "
                             f"({len(raw)} of {count * rows * cols} bytes)")
    images = np.frombuffer(raw, dtype=np.uint8).reshape(count, rows, cols)
    images = images.astype(float) / 255.0

    with _open_maybe_gzip(labels_path) as fh:
        head = fh.read(8)
        if len(head) < 8:
            raise ValueError(f"{labels_path}: truncated IDX header")
        magic, lcount = struct.unpack(">II", head)
        if magic != IDX_LABELS_MAGIC:
            raise ValueError(f"{labels_path}: bad magic {magic:#010x}, "
                             f"expected {IDX_LABELS_MAGIC:#010x}")
        raw = fh.read(lcount)
        if len(raw) != lcount:
            raise ValueError(f"{labels_path}: truncated label data")
    labels = np.frombuffer(raw, dtype=np.uint8)
    if lcount != count:
        raise ValueError(f"label count {lcount} does not match image count {count}")
    return images, labels


def filter_pair(images, labels, a: int, b: int, *,
                dct_block: int | None = None) -> Dataset:
    """Binary dataset for one digit pair, with DCT feature rows.

    Keeps only images labeled `a` or `b`; the lower digit maps to +1 and
    the higher to -1. Features are the flattened orthonormal DCT
    coefficients of each image (optionally only the top-left
    `dct_block` x `dct_block` low-frequency block).
    """
    if a == b:
        raise ValueError("digit pair must be distinct")
    if not (0 <= a <= 9 and 0 <= b <= 9):
        raise ValueError(f"digits must be in 0..9, got {a} and {b}")
    labels = np.asarray(labels)
    mask = (labels == a) | (labels == b)
    if not mask.any():
        raise ValueError(f"no samples labeled {a} or {b}")
    lo = min(a, b)
    feats = dct_features(np.asarray(images)[mask], keep=dct_block)
    targets = np.where(labels[mask] == lo, 1.0, -1.0)
    return Dataset(inputs=feats, targets=targets, tag=f"mnist-{a}v{b}")


def gen_logic_gate(gate: str) -> Dataset:
    """Four-row truth table of a two-input gate, encoded over {-1, +1}."""
    name = gate.upper()
    if name not in LOGIC_GATES:
        raise ValueError(f"unknown gate {gate!r}, expected one of {sorted(LOGIC_GATES)}")
    inputs = np.array([[-1, -1], [-1, 1], [1, -1], [1, 1]], dtype=float)
    targets = np.array(LOGIC_GATES[name], dtype=float)
    return Dataset(inputs=inputs, targets=targets, tag=name.lower())


def gen_sinc(n_train: int = 800, n_val: int = 100, n_test: int = 100,
             noise_sigma: float = 0.0, seed: int = 0,
             x_range: tuple[float, float] = (-10.0, 10.0)):
    """Train/validation/test splits of y = sin(x)/x with optional white noise.

    x is sampled uniformly on `x_range`; sinc(0) = 1 by continuity. Noisy
    targets are clipped to [-1, 1] (relevant only for sigma large enough
    to push a sample past the peak).
    """
    if noise_sigma < 0:
        raise ValueError(f"noise_sigma must be non-negative, got {noise_sigma}")
    rng = np.random.default_rng(seed)

    def make(n: int, part: str) -> Dataset:
        x = rng.uniform(x_range[0], x_range[1], n)
        y = np.sinc(x / np.pi)  # np.sinc(t) = sin(pi t)/(pi t)
        if noise_sigma > 0:
            y = np.clip(y + rng.normal(0.0, noise_sigma, n), -1.0, 1.0)
        return Dataset(inputs=x[:, None], targets=y, tag=f"sinc-{part}")

    return make(n_train, "train"), make(n_val, "val"), make(n_test, "test")


def gen_two_moons(n: int = 1000, noise: float = 0.07, seed: int = 0) -> Dataset:
    """Two interleaved half-circle arcs with isotropic Gaussian noise.

    The +1 moon is the upper unit arc (cos t, sin t), t in [0, pi]; the
    -1 moon is its reflection shifted to (1 - cos t, 0.5 - sin t) so the
    arcs interlock. Labels are balanced within one sample.
    """
    if n < 2:
        raise ValueError(f"need at least 2 samples, got {n}")
    if noise < 0:
        raise ValueError(f"noise must be non-negative, got {noise}")
    rng = np.random.default_rng(seed)
    n_up = n // 2
    n_dn = n - n_up
    t_up = rng.uniform(0.0, np.pi, n_up)
    t_dn = rng.uniform(0.0, np.pi, n_dn)
    upper = np.column_stack([np.cos(t_up), np.sin(t_up)])
    lower = np.column_stack([1.0 - np.cos(t_dn), 0.5 - np.sin(t_dn)])
    points = np.vstack([upper, lower])
    if noise > 0:
        points = points + rng.normal(0.0, noise, points.shape)
    targets = np.concatenate([np.ones(n_up), -np.ones(n_dn)])
    order = rng.permutation(n)
    return Dataset(inputs=points[order], targets=targets[order], tag="two-moons")


@dataclass(frozen=True)
class FoldPlan:
    """A k-way partition of sample indices, optionally stratified."""

    k: int
    folds: tuple[np.ndarray, ...]
    seed: int
    stratified: bool

    def __post_init__(self):
        if self.k < 2:
            raise ValueError(f"k must be at least 2, got {self.k}")
        if len(self.folds) != self.k:
            raise ValueError("fold count does not match k")

    @property
    def n(self) -> int:
        return sum(f.size for f in self.folds)


def kfold_plan(n: int, k: int = 10, stratified: bool = False,
               seed: int = 0, labels=None) -> FoldPlan:
    """Deterministic k-fold partition of range(n).

    Fold sizes differ by at most one. With `stratified=True`, `labels`
    (+1/-1) are required and each class is spread as evenly as possible;
    leftover samples of the two classes are assigned from opposite ends
    of the fold list so total sizes still differ by at most one.
    """
    if k < 2:
        raise ValueError(f"k must be at least 2, got {k}")
    if k > n:
        raise ValueError(f"k={k} exceeds the number of samples n={n}")
    rng = np.random.default_rng(seed)
    if not stratified:
        perm = rng.permutation(n)
        folds = tuple(np.sort(chunk) for chunk in np.array_split(perm, k))
        return FoldPlan(k=k, folds=folds, seed=seed, stratified=False)

    if labels is None:
        raise ValueError("stratified folding requires labels")
    y = np.asarray(labels)
    if y.shape != (n,):
        raise ValueError(f"labels must have shape ({n},), got {y.shape}")
    pos = rng.permutation(np.where(y > 0)[0])
    neg = rng.permutation(np.where(y <= 0)[0])
    buckets: list[list[int]] = [[] for _ in range(k)]
    for arr, reverse in ((pos, False), (neg, True)):
        base, extra = divmod(arr.size, k)
        order = range(k - 1, -1, -1) if reverse else range(k)
        start = 0
        for rank, fold_idx in enumerate(order):
            size = base + (1 if rank < extra else 0)
            buckets[fold_idx].extend(arr[start:start + size].tolist())
            start += size
    folds = tuple(np.sort(np.array(b, dtype=int)) for b in buckets)
    return FoldPlan(k=k, folds=folds, seed=seed, stratified=True)


def split(dataset: Dataset, plan: FoldPlan, fold: int) -> tuple[Dataset, Dataset]:
    """(train, test) datasets for one fold of the plan; the test set is
    the fold itself and the train set is its complement."""
    if not 0 <= fold < plan.k:
        raise ValueError(f"fold must be in [0, {plan.k}), got {fold}")
    if plan.n != dataset.n:
        raise ValueError(f"plan covers {plan.n} samples but dataset has {dataset.n}")
    test_idx = plan.folds[fold]
    train_idx = np.concatenate([plan.folds[j] for j in range(plan.k) if j != fold])
    return dataset.subset(np.sort(train_idx)), dataset.subset(test_idx)
