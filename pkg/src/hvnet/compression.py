"""Lossy classifier compression with holographic reduced representations.

An (n_classes, dim) classifier is packed into a single dim-length vector
by convolving each row with a per-class random key and superposing the
results.  Decompression convolves with key inverses; the residual error is
crosstalk from the other rows.  Keys are regenerated from the producing
agent's ID alone, so no key material ever travels.
"""

from __future__ import annotations

import struct
import warnings
from dataclasses import dataclass

import numpy as np
from numpy.typing import NDArray

from .classifiers import ClassifierMatrix
from .errors import (
    DimensionError,
    InvalidParameterError,
    KeyCorrelationWarning,
    WireFormatError,
)
from .hdc import INVERSE_MODES, SeedSpec, circ_convolve, cosine, inverse, random_gaussian_key, superpose

__all__ = [
    "CompressedClassifier",
    "KeySet",
    "compress",
    "compression_fidelity",
    "decompress",
    "from_bytes",
    "generate_keys",
    "load_compressed",
    "save_compressed",
    "to_bytes",
]

MAGIC = b"HRRC"
WIRE_VERSION = 1
_HEADER = struct.Struct("<4sHQIIB")
_MODE_CODES = {"exact": 0, "involution": 1}
_CODE_MODES = {v: k for k, v in _MODE_CODES.items()}

# Pairwise key cosines should stay below this at dim >= 512; checked at
# generation because decompression quality degrades with correlated keys.
_KEY_COSINE_BOUND = 0.2


@dataclass(frozen=True)
class KeySet:
    """Per-class key hypervectors of one agent, plus the inverse mode to use."""

    agent_id: int
    keys: np.ndarray  # (n_classes, dim) float64
    mode: str = "exact"

    @property
    def n_classes(self) -> int:
        return self.keys.shape[0]

    @property
    def dim(self) -> int:
        return self.keys.shape[1]


@dataclass(frozen=True)
class CompressedClassifier:
    """A whole classifier packed into one hypervector."""

    w: np.ndarray  # (dim,) float64
    agent_id: int
    n_classes: int

    @property
    def dim(self) -> int:
        return self.w.shape[0]


def generate_keys(agent_id: int, n_classes: int, dim: int, mode: str = "exact") -> KeySet:
    """Regenerate an agent's key set from its ID alone.

    Every party that knows ``agent_id`` (and the shared n_classes, dim)
    reproduces bit-identical keys.
    """
    if agent_id < 0:
        raise InvalidParameterError("agent_id must be non-negative")
    if n_classes < 1 or dim < 1:
        raise InvalidParameterError("n_classes and dim must be >= 1")
    if mode not in INVERSE_MODES:
        raise InvalidParameterError(f"mode must be one of {INVERSE_MODES}")
    base = SeedSpec(agent_id)
    keys = np.stack(
        [random_gaussian_key(dim, base.child("class_key", i)) for i in range(n_classes)]
    )
    if dim >= 512 and n_classes >= 2:
        norms = np.linalg.norm(keys, axis=1)
        cosines = (keys / norms[:, None]) @ (keys / norms[:, None]).T
        np.fill_diagonal(cosines, 0.0)
        worst = float(np.max(np.abs(cosines)))
        if worst >= _KEY_COSINE_BOUND:
            warnings.warn(
                f"key set for agent {agent_id} has pairwise |cosine| {worst:.3f}",
                KeyCorrelationWarning,
                stacklevel=2,
            )
    return KeySet(agent_id=agent_id, keys=keys, mode=mode)


def compress(w_out: ClassifierMatrix, keys: KeySet) -> CompressedClassifier:
    """Superpose the key-bound classifier rows into a single hypervector."""
    if w_out.n_classes != keys.n_classes or w_out.dim != keys.dim:
        raise DimensionError(
            f"classifier is {w_out.n_classes}x{w_out.dim}, "
            f"keys are {keys.n_classes}x{keys.dim}"
        )
    bound = [circ_convolve(keys.keys[i], w_out.weights[i]) for i in range(keys.n_classes)]
    return CompressedClassifier(
        w=superpose(bound), agent_id=keys.agent_id, n_classes=keys.n_classes
    )


def decompress(c: CompressedClassifier, keys: KeySet, kind: str = "rls") -> ClassifierMatrix:
    """Approximately reconstruct each row by convolving with the key inverse.

    With more than one class the reconstruction carries crosstalk noise
    from the other key-row pairs; it is exact only for n_classes == 1 in
    exact mode.
    """
    if c.n_classes != keys.n_classes or c.dim != keys.dim:
        raise DimensionError("compressed payload and key set disagree on shape")
    rows = np.stack(
        [circ_convolve(c.w, inverse(keys.keys[i], keys.mode)) for i in range(keys.n_classes)]
    )
    return ClassifierMatrix(weights=rows, kind=kind)


def compression_fidelity(w_out: ClassifierMatrix, keys: KeySet) -> NDArray[np.float64]:
    """Per-class cosine between original and reconstructed rows; zero rows give 0.0."""
    recon = decompress(compress(w_out, keys), keys, kind=w_out.kind)
    out = np.zeros(w_out.n_classes)
    for i in range(w_out.n_classes):
        orig = w_out.weights[i]
        if np.linalg.norm(orig) == 0.0 or np.linalg.norm(recon.weights[i]) == 0.0:
            continue
        out[i] = cosine(orig, recon.weights[i])
    return out


def to_bytes(c: CompressedClassifier, mode: str = "exact") -> bytes:
    """Serialize with the HRRC wire header, payload as little-endian float64."""
    if mode not in _MODE_CODES:
        raise InvalidParameterError(f"mode must be one of {INVERSE_MODES}")
    header = _HEADER.pack(MAGIC, WIRE_VERSION, c.agent_id, c.n_classes, c.dim, _MODE_CODES[mode])
    return header + np.ascontiguousarray(c.w, dtype="<f8").tobytes()


def from_bytes(buf: bytes) -> tuple[CompressedClassifier, str]:
    """Parse an HRRC payload; returns the classifier and its inverse mode."""
    if len(buf) < _HEADER.size:
        raise WireFormatError(f"buffer too short for header: {len(buf)} bytes")
    magic, version, agent_id, n_classes, dim, mode_code = _HEADER.unpack_from(buf)
    if magic != MAGIC:
        raise WireFormatError(f"bad magic {magic!r}")
    if version != WIRE_VERSION:
        raise WireFormatError(f"unsupported version {version}")
    if mode_code not in _CODE_MODES:
        raise WireFormatError(f"unknown inverse mode code {mode_code}")
    expected = _HEADER.size + 8 * dim
    if len(buf) != expected:
        raise WireFormatError(f"expected {expected} bytes, got {len(buf)}")
    w = np.frombuffer(buf, dtype="<f8", offset=_HEADER.size).astype(np.float64)
    return (
        CompressedClassifier(w=w, agent_id=agent_id, n_classes=n_classes),
        _CODE_MODES[mode_code],
    )


def save_compressed(c: CompressedClassifier, path, mode: str = "exact") -> None:
    with open(path, "wb") as fh:
        fh.write(to_bytes(c, mode))


def load_compressed(path) -> tuple[CompressedClassifier, str]:
    with open(path, "rb") as fh:
        return from_bytes(fh.read())
