"""Versioned on-disk model format.

Models are stored as a JSON key/value tree. Every floating-point
coefficient is encoded as a C99 hex-float string (float.hex), so a
reloaded model reproduces predictions bit for bit. Files are written to
a temporary sibling and renamed into place.

Format version 1 fields:
    format_version   int, always 1
    kind             "gd-full" | "gd-reduced" | "lls"
    K, p             polynomial degree and input dimension
    coefficients     flat hex-float list [c0, c_11..c_1p, ..., c_K1..c_Kp]
                     for the Ry-angle polynomial
    alpha, gamma     same layout for the two Rz-angle polynomials
                     (null unless kind is "gd-full")
    theta, omega     hex-float scalars (state / observable angles)
    normalization    {feature_min, feature_max: hex lists;
                      target_min, target_max: hex or null} or null
    config           trainer settings snapshot (plain JSON)
    created          ISO-8601 UTC timestamp
"""

from __future__ import annotations

import json
import os
import tempfile
from datetime import datetime, timezone

import numpy as np

from .features import NormalizationRecord, PolynomialWeightFunction
from .training import TrainedModel

__all__ = ["save", "load", "FORMAT_VERSION", "UnsupportedFormat", "ModelFormatError"]

FORMAT_VERSION = 1


class UnsupportedFormat(ValueError):
    """The file declares a format version this code does not understand."""


class ModelFormatError(ValueError):
    """The file is structurally invalid; the message names the field."""


def _hex_list(values) -> list[str]:
    return [float(v).hex() for v in np.asarray(values, dtype=float).ravel()]


def _opt_hex(value):
    return None if value is None else float(value).hex()


def save(model: TrainedModel, path) -> None:
    """Write the model atomically as versioned JSON."""
    norm = None
    if model.normalization is not None:
        rec = model.normalization
        norm = {
            "feature_min": None if rec.feature_min is None else _hex_list(rec.feature_min),
            "feature_max": None if rec.feature_max is None else _hex_list(rec.feature_max),
            "target_min": _opt_hex(rec.target_min),
            "target_max": _opt_hex(rec.target_max),
        }
    doc = {
        "format_version": FORMAT_VERSION,
        "kind": model.kind,
        "K": model.K,
        "p": model.p,
        "coefficients": _hex_list(model.beta.flat()),
        "alpha": None if model.alpha is None else _hex_list(model.alpha.flat()),
        "gamma": None if model.gamma is None else _hex_list(model.gamma.flat()),
        "theta": float(model.theta).hex(),
        "omega": float(model.omega).hex(),
        "normalization": norm,
        "config": model.config,
        "created": datetime.now(timezone.utc).isoformat(timespec="seconds"),
    }
    path = os.fspath(path)
    directory = os.path.dirname(path) or "."
    fd, tmp = tempfile.mkstemp(prefix=".model-", suffix=".tmp", dir=directory)
    try:
        with os.fdopen(fd, "w") as fh:
            json.dump(doc, fh, indent=2)
            fh.write("\n")
        os.replace(tmp, path)
    except BaseException:
        if os.path.exists(tmp):
            os.unlink(tmp)
        raise


def _parse_floats(doc, name, expected: int | None = None) -> np.ndarray:
    raw = doc.get(name)
    if not isinstance(raw, list):
        raise ModelFormatError(f"field {name!r} must be a list of hex floats")
    try:
        values = np.array([float.fromhex(v) for v in raw], dtype=float)
    except (TypeError, ValueError) as exc:
        raise ModelFormatError(f"field {name!r}: bad hex float ({exc})") from exc
    if expected is not None and values.size != expected:
        raise ModelFormatError(f"field {name!r} has {values.size} entries, expected {expected}")
    return values


def _parse_scalar(doc, name) -> float:
    raw = doc.get(name)
    try:
        return float.fromhex(raw)
    except (TypeError, ValueError) as exc:
        raise ModelFormatError(f"field {name!r}: bad hex float ({exc})") from exc


def _parse_opt_scalar(value, name) -> float | None:
    if value is None:
        return None
    try:
        return float.fromhex(value)
    except (TypeError, ValueError) as exc:
        raise ModelFormatError(f"field {name!r}: bad hex float ({exc})") from exc


def load(path) -> TrainedModel:
    """Read a model file; raises UnsupportedFormat for unknown versions
    and ModelFormatError naming the offending field otherwise."""
    with open(path) as fh:
        try:
            doc = json.load(fh)
        except json.JSONDecodeError as exc:
            raise ModelFormatError(f"not valid JSON: {exc}") from exc
    if not isinstance(doc, dict):
        raise ModelFormatError("top-level value must be an object")
    version = doc.get("format_version")
    if version != FORMAT_VERSION:
        raise UnsupportedFormat(f"format_version {version!r} is not supported "
                                f"(this build reads version {FORMAT_VERSION})")

    kind = doc.get("kind")
    if kind not in ("gd-full", "gd-reduced", "lls"):
        raise ModelFormatError(f"field 'kind' has unknown value {kind!r}")
    try:
        K, p = int(doc["K"]), int(doc["p"])
    except (KeyError, TypeError, ValueError) as exc:
        raise ModelFormatError(f"field 'K'/'p' invalid: {exc}") from exc
    if K < 1 or p < 1:
        raise ModelFormatError(f"field 'K'/'p' must be positive, got K={K}, p={p}")

    n_coef = 1 + K * p
    beta = PolynomialWeightFunction.from_flat(_parse_floats(doc, "coefficients", n_coef), K, p)
    alpha = gamma = None
    if kind == "gd-full":
        alpha = PolynomialWeightFunction.from_flat(_parse_floats(doc, "alpha", n_coef), K, p)
        gamma = PolynomialWeightFunction.from_flat(_parse_floats(doc, "gamma", n_coef), K, p)

    norm = None
    raw_norm = doc.get("normalization")
    if raw_norm is not None:
        if not isinstance(raw_norm, dict):
            raise ModelFormatError("field 'normalization' must be an object or null")
        if raw_norm.get("feature_min") is None:
            lo = hi = None
            if raw_norm.get("feature_max") is not None:
                raise ModelFormatError("field 'feature_max' present without 'feature_min'")
        else:
            lo = _parse_floats(raw_norm, "feature_min", p)
            hi = _parse_floats(raw_norm, "feature_max", p)
        norm = NormalizationRecord(
            feature_min=lo, feature_max=hi,
            target_min=_parse_opt_scalar(raw_norm.get("target_min"), "target_min"),
            target_max=_parse_opt_scalar(raw_norm.get("target_max"), "target_max"),
        )

    config = doc.get("config") or {}
    if not isinstance(config, dict):
        raise ModelFormatError("field 'config' must be an object")
    return TrainedModel(kind=kind, K=K, p=p, beta=beta, alpha=alpha, gamma=gamma,
                        theta=_parse_scalar(doc, "theta"),
                        omega=_parse_scalar(doc, "omega"),
                        normalization=norm, config=config)
