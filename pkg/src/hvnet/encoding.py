"""Hidden-layer encoding for the randomized network.

A feature value in [0, 1] becomes a bipolar thermometer code, is bound to
a fixed random bipolar column, and the per-feature results are summed and
clipped.  All outputs are integer vectors, which downstream code relies on
for exact aggregation.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np
from numpy.typing import NDArray

from .errors import DimensionError, InvalidParameterError
from .hdc import SeedSpec, clip, random_bipolar

__all__ = [
    "InputProjection",
    "encode_batch",
    "encode_batch_sums",
    "encode_sample",
    "encode_sums",
    "init_projection",
    "thermometer_encode",
]


@dataclass(frozen=True)
class InputProjection:
    """Frozen random first layer: one bipolar column of length dim per input feature."""

    columns: np.ndarray  # (dim, n_features) int8, entries in {-1, +1}
    seed: SeedSpec

    @property
    def dim(self) -> int:
        return self.columns.shape[0]

    @property
    def n_features(self) -> int:
        return self.columns.shape[1]


def init_projection(n_features: int, dim: int, seed: SeedSpec) -> InputProjection:
    """Draw the fixed input projection; every column gets its own derived stream.

    Any party holding the same seed reconstructs the identical matrix.
    """
    if n_features < 1 or dim < 1:
        raise InvalidParameterError("n_features and dim must be >= 1")
    cols = np.stack(
        [random_bipolar(dim, seed.child("input_column", j)) for j in range(n_features)],
        axis=1,
    )
    return InputProjection(columns=cols, seed=seed)


def _prefix_lengths(values: np.ndarray, dim: int) -> np.ndarray:
    if np.any(values < 0.0) or np.any(values > 1.0):
        raise InvalidParameterError("feature values must lie in [0, 1]; normalize first")
    # Quantize to dim+1 levels, rounding half up so encodings are platform-independent.
    return np.floor(values * dim + 0.5).astype(np.int64)


def thermometer_encode(value: float, dim: int) -> NDArray[np.int8]:
    """Monotone bipolar code: the first round(value*dim) entries are +1, the rest -1."""
    if dim < 1:
        raise InvalidParameterError(f"dim must be >= 1, got {dim}")
    n_plus = _prefix_lengths(np.asarray([value], dtype=np.float64), dim)[0]
    return np.where(np.arange(dim) < n_plus, 1, -1).astype(np.int8)


def encode_sums(x, proj: InputProjection) -> NDArray[np.int64]:
    """Unclipped hidden activation: sum over features of (column * thermometer code)."""
    x = np.asarray(x, dtype=np.float64)
    if x.ndim != 1 or x.shape[0] != proj.n_features:
        raise DimensionError(
            f"sample has {x.shape} features, projection expects {proj.n_features}"
        )
    counts = _prefix_lengths(x, proj.dim)
    idx = np.arange(proj.dim)
    acc = np.zeros(proj.dim, dtype=np.int64)
    for j in range(proj.n_features):
        col = proj.columns[:, j]
        acc += np.where(idx < counts[j], col, -col)
    return acc


def encode_sample(x, proj: InputProjection, kappa: int) -> NDArray[np.int64]:
    """Hidden activation of one sample: clipped sum of bound thermometer codes."""
    return clip(encode_sums(x, proj), kappa)


def encode_batch_sums(X, proj: InputProjection) -> NDArray[np.int64]:
    """Unclipped hidden activations for a whole (n_samples, n_features) matrix."""
    X = np.asarray(X, dtype=np.float64)
    if X.ndim != 2 or X.shape[1] != proj.n_features:
        raise DimensionError(
            f"batch has shape {X.shape}, projection expects {proj.n_features} features"
        )
    counts = _prefix_lengths(X.ravel(), proj.dim).reshape(X.shape)
    idx = np.arange(proj.dim)
    acc = np.zeros((X.shape[0], proj.dim), dtype=np.int64)
    for j in range(proj.n_features):
        col = proj.columns[:, j]
        plus = idx[None, :] < counts[:, j][:, None]
        acc += np.where(plus, col[None, :], -col[None, :])
    return acc


def encode_batch(X, proj: InputProjection, kappa: int) -> NDArray[np.int64]:
    """Encode a whole (n_samples, n_features) matrix; rows are hidden activations."""
    if not isinstance(kappa, (int, np.integer)) or isinstance(kappa, bool) or kappa < 1:
        raise InvalidParameterError(f"kappa must be an integer >= 1, got {kappa!r}")
    return np.clip(encode_batch_sums(X, proj), -kappa, kappa)
