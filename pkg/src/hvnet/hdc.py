"""Elementary hypervector algebra.

Hypervectors are plain 1-D numpy arrays of a fixed dimensionality D.
Bipolar vectors (entries in {-1, +1}) are kept as int8; generic
real-valued vectors are float64.  All randomized constructors are pure
functions of a :class:`SeedSpec`, so identical seeds give byte-identical
vectors on every run.
"""

from __future__ import annotations

import hashlib
from dataclasses import dataclass

import numpy as np
from numpy.typing import NDArray

from .errors import (
    DimensionError,
    InvalidParameterError,
    SingularKeyError,
    UndefinedSimilarityError,
)

__all__ = [
    "SeedSpec",
    "bind_elementwise",
    "circ_convolve",
    "clip",
    "cosine",
    "inverse",
    "random_bipolar",
    "random_gaussian_key",
    "superpose",
]

INVERSE_MODES = ("exact", "involution")

# Spectral components with magnitude at or below this are treated as zero
# when building an exact inverse.
SPECTRUM_EPS = 1e-12

_MASK64 = 0xFFFFFFFFFFFFFFFF


def _tag_to_int(tag: str) -> int:
    # Stable across processes and platforms, unlike builtin hash().
    return int.from_bytes(hashlib.blake2b(tag.encode("utf-8"), digest_size=8).digest(), "big")


@dataclass(frozen=True)
class SeedSpec:
    """Deterministic random-stream address: a master seed plus a path of (tag, index) labels.

    Identical (master_seed, stream_labels) always produce identical random
    output; distinct labels under one master seed produce statistically
    independent streams.
    """

    master_seed: int
    stream_labels: tuple[tuple[str, int], ...] = ()

    def child(self, tag: str, index: int = 0) -> "SeedSpec":
        """Derive a sub-stream for one purpose, e.g. ``seed.child("key", 3)``."""
        return SeedSpec(self.master_seed, self.stream_labels + ((tag, int(index)),))

    def rng(self) -> np.random.Generator:
        entropy = [self.master_seed & _MASK64]
        for tag, index in self.stream_labels:
            entropy.append(_tag_to_int(tag))
            entropy.append(index & _MASK64)
        return np.random.default_rng(np.random.SeedSequence(entropy))


def _as_vector(v, name: str = "vector") -> np.ndarray:
    arr = np.asarray(v)
    if arr.ndim != 1 or arr.size < 1:
        raise DimensionError(f"{name} must be a non-empty 1-D vector, got shape {arr.shape}")
    return arr


def _check_same_length(x: np.ndarray, y: np.ndarray) -> None:
    if x.shape[0] != y.shape[0]:
        raise DimensionError(f"length mismatch: {x.shape[0]} vs {y.shape[0]}")


def clip(v, kappa: int) -> np.ndarray:
    """Saturate every component to the range [-kappa, kappa]."""
    if not isinstance(kappa, (int, np.integer)) or isinstance(kappa, bool) or kappa < 1:
        raise InvalidParameterError(f"kappa must be an integer >= 1, got {kappa!r}")
    return np.clip(_as_vector(v), -kappa, kappa)


def bind_elementwise(x, y) -> np.ndarray:
    """Bind two bipolar hypervectors by component-wise multiplication."""
    x = _as_vector(x, "x")
    y = _as_vector(y, "y")
    _check_same_length(x, y)
    return x * y


def superpose(vs) -> np.ndarray:
    """Component-wise sum of one or more hypervectors. No clipping is applied."""
    vs = list(vs)
    if not vs:
        raise InvalidParameterError("superpose needs at least one vector")
    arrs = [_as_vector(v) for v in vs]
    first = arrs[0]
    for a in arrs[1:]:
        _check_same_length(first, a)
    stacked = np.stack(arrs)
    # Accumulate wide so int8 bipolar inputs cannot overflow.
    dtype = np.int64 if np.issubdtype(stacked.dtype, np.integer) else np.float64
    return stacked.sum(axis=0, dtype=dtype)


def circ_convolve(x, y) -> NDArray[np.float64]:
    """Circular convolution z, with z_j = sum_k y_k * x_{(j-k) mod D}.

    Uses an FFT fast path; agrees with the direct double sum to better
    than 1e-9 absolute for D up to a few thousand in double precision.
    """
    x = _as_vector(x, "x").astype(np.float64)
    y = _as_vector(y, "y").astype(np.float64)
    _check_same_length(x, y)
    d = x.shape[0]
    return np.fft.irfft(np.fft.rfft(x) * np.fft.rfft(y), n=d)


def inverse(k, mode: str = "exact") -> NDArray[np.float64]:
    """Convolutive inverse of a key hypervector.

    ``involution`` reverses indices cyclically (output_j = k_{(-j) mod D});
    it is only an approximate inverse.  ``exact`` inverts the spectrum, so
    circ_convolve(k, inverse(k)) is the unit impulse up to roundoff; it
    requires every spectral component of k to be nonzero.
    """
    k = _as_vector(k, "k").astype(np.float64)
    if mode == "involution":
        return np.roll(k[::-1], 1)
    if mode == "exact":
        spectrum = np.fft.rfft(k)
        if np.min(np.abs(spectrum)) <= SPECTRUM_EPS:
            raise SingularKeyError(
                "key has a near-zero spectral component; no exact inverse exists"
            )
        return np.fft.irfft(1.0 / spectrum, n=k.shape[0])
    raise InvalidParameterError(f"mode must be one of {INVERSE_MODES}, got {mode!r}")


def cosine(x, y) -> float:
    """Cosine similarity in [-1, 1]."""
    x = _as_vector(x, "x").astype(np.float64)
    y = _as_vector(y, "y").astype(np.float64)
    _check_same_length(x, y)
    nx = np.linalg.norm(x)
    ny = np.linalg.norm(y)
    if nx == 0.0 or ny == 0.0:
        raise UndefinedSimilarityError("cosine is undefined for a zero-norm vector")
    return float(np.dot(x, y) / (nx * ny))


def random_bipolar(dim: int, seed: SeedSpec) -> NDArray[np.int8]:
    """Random vector with entries drawn equiprobably from {-1, +1}."""
    if dim < 1:
        raise InvalidParameterError(f"dim must be >= 1, got {dim}")
    bits = seed.rng().integers(0, 2, size=dim, dtype=np.int8)
    return (2 * bits - 1).astype(np.int8)


def random_gaussian_key(dim: int, seed: SeedSpec) -> NDArray[np.float64]:
    """Random key with i.i.d. zero-mean Gaussian entries of variance 1/dim.

    This scaling makes circular convolution norm-preserving in expectation.
    """
    if dim < 1:
        raise InvalidParameterError(f"dim must be >= 1, got {dim}")
    return seed.rng().standard_normal(dim) / np.sqrt(dim)
