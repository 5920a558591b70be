"""Dataset loading, normalization, splitting, and synthetic data generation."""

from __future__ import annotations

import csv
import json
import warnings
from dataclasses import dataclass, replace
from pathlib import Path

import numpy as np

from .errors import (
    InvalidDatasetError,
    InvalidParameterError,
    ParseError,
    StratificationWarning,
)
from .hdc import SeedSpec

__all__ = [
    "Dataset",
    "SplitSpec",
    "filter_min_train",
    "load_csv",
    "load_manifest",
    "load_split_file",
    "normalize",
    "resolve_dataset",
    "split",
    "synth_blobs",
]


@dataclass(frozen=True)
class Dataset:
    """Tabular classification data with 1-based dense labels."""

    samples: np.ndarray  # (n_samples, n_features) float64
    labels: np.ndarray  # (n_samples,) int64 in 1..n_classes
    n_classes: int
    name: str = "dataset"
    feature_ranges: np.ndarray | None = None  # (n_features, 2) min/max used to normalize
    label_values: tuple = ()  # raw label of class i at position i-1

    @property
    def n_samples(self) -> int:
        return self.samples.shape[0]

    @property
    def n_features(self) -> int:
        return self.samples.shape[1]


@dataclass(frozen=True)
class SplitSpec:
    mode: str = "holdout"  # holdout | kfold
    fraction: float = 0.5  # train share, holdout mode
    k: int = 4
    stratified: bool = True
    seed: SeedSpec = SeedSpec(0)

    def __post_init__(self):
        if self.mode not in ("holdout", "kfold"):
            raise InvalidParameterError(f"unknown split mode {self.mode!r}")
        if self.mode == "holdout" and not 0.0 < self.fraction < 1.0:
            raise InvalidParameterError("holdout fraction must be in (0, 1)")
        if self.mode == "kfold" and self.k < 2:
            raise InvalidParameterError("k must be >= 2")


def load_csv(path, label_column=-1, header: bool = False, name: str | None = None) -> Dataset:
    """Load a numeric-feature CSV; the label column may be categorical.

    Labels are densely re-indexed to 1..n_classes (numeric order when all
    raw labels parse as numbers, lexicographic otherwise).
    """
    path = Path(path)
    if not path.exists():
        raise FileNotFoundError(f"dataset file not found: {path}")
    with open(path, newline="", encoding="utf-8") as fh:
        rows = [row for row in csv.reader(fh) if row]
    if not rows:
        raise InvalidDatasetError(f"{path} is empty")
    columns = rows[0]
    if header:
        if isinstance(label_column, str):
            try:
                label_idx = columns.index(label_column)
            except ValueError:
                raise ParseError(f"no column named {label_column!r} in {path}") from None
        else:
            label_idx = int(label_column)
        rows = rows[1:]
    else:
        if isinstance(label_column, str):
            raise InvalidParameterError("named label column requires header=True")
        label_idx = int(label_column)
    if not rows:
        raise InvalidDatasetError(f"{path} has no data rows")
    label_idx = label_idx % len(rows[0])

    features = []
    raw_labels = []
    for r, row in enumerate(rows):
        vals = []
        for c, cell in enumerate(row):
            if c == label_idx:
                raw_labels.append(cell.strip())
                continue
            try:
                vals.append(float(cell))
            except ValueError:
                raise ParseError(
                    f"{path}: non-numeric feature cell {cell!r} at row {r + 1}, column {c + 1}"
                ) from None
        features.append(vals)

    try:
        ordered = sorted(set(raw_labels), key=float)
    except ValueError:
        ordered = sorted(set(raw_labels))
    if len(ordered) < 2:
        raise InvalidDatasetError(f"{path} contains a single class; need at least two")
    index = {v: i + 1 for i, v in enumerate(ordered)}
    return Dataset(
        samples=np.asarray(features, dtype=np.float64),
        labels=np.asarray([index[v] for v in raw_labels], dtype=np.int64),
        n_classes=len(ordered),
        name=name or path.stem,
        label_values=tuple(ordered),
    )


def normalize(ds: Dataset, train_indices=None) -> Dataset:
    """Min-max scale every feature to [0, 1] using statistics from the training rows.

    Rows outside the training range (possible for test data) are clamped.
    Constant features map to 0.5.  Idempotent: normalizing twice with the
    same training rows changes nothing.
    """
    rows = np.arange(ds.n_samples) if train_indices is None else np.asarray(train_indices)
    mins = ds.samples[rows].min(axis=0)
    maxs = ds.samples[rows].max(axis=0)
    span = maxs - mins
    constant = span == 0.0
    safe_span = np.where(constant, 1.0, span)
    scaled = np.clip((ds.samples - mins) / safe_span, 0.0, 1.0)
    scaled[:, constant] = 0.5
    return replace(ds, samples=scaled, feature_ranges=np.stack([mins, maxs], axis=1))


def _stratify_ok(labels: np.ndarray, n_classes: int) -> bool:
    counts = np.bincount(labels, minlength=n_classes + 1)[1:]
    return bool(np.all(counts >= 2))


def split(ds: Dataset, spec: SplitSpec):
    """Seeded train/test split (holdout) or list of k disjoint covering folds."""
    stratified = spec.stratified
    if stratified and not _stratify_ok(ds.labels, ds.n_classes):
        warnings.warn(
            "a class has fewer than 2 samples; falling back to an unstratified split",
            StratificationWarning,
            stacklevel=2,
        )
        stratified = False
    rng = spec.seed.child("split").rng()

    if spec.mode == "holdout":
        train_parts, test_parts = [], []
        if stratified:
            for i in range(1, ds.n_classes + 1):
                idx = np.flatnonzero(ds.labels == i)
                idx = idx[rng.permutation(idx.shape[0])]
                n_train = int(np.floor(spec.fraction * idx.shape[0] + 0.5))
                n_train = min(max(n_train, 1), idx.shape[0] - 1)
                train_parts.append(idx[:n_train])
                test_parts.append(idx[n_train:])
        else:
            idx = rng.permutation(ds.n_samples)
            n_train = int(np.floor(spec.fraction * ds.n_samples + 0.5))
            n_train = min(max(n_train, 1), ds.n_samples - 1)
            train_parts.append(idx[:n_train])
            test_parts.append(idx[n_train:])
        return np.sort(np.concatenate(train_parts)), np.sort(np.concatenate(test_parts))

    folds = [[] for _ in range(spec.k)]
    if stratified:
        for i in range(1, ds.n_classes + 1):
            idx = np.flatnonzero(ds.labels == i)
            idx = idx[rng.permutation(idx.shape[0])]
            for pos, sample in enumerate(idx):
                folds[pos % spec.k].append(sample)
    else:
        idx = rng.permutation(ds.n_samples)
        for f, part in enumerate(np.array_split(idx, spec.k)):
            folds[f].extend(part.tolist())
    return [np.sort(np.asarray(f, dtype=np.int64)) for f in folds]


def filter_min_train(datasets, train_sizes, threshold: int = 1000) -> list[Dataset]:
    """Keep datasets whose training partition has strictly more than ``threshold`` samples."""
    datasets = list(datasets)
    train_sizes = list(train_sizes)
    if len(datasets) != len(train_sizes):
        raise InvalidParameterError("datasets and train_sizes must align")
    return [ds for ds, n in zip(datasets, train_sizes) if n > threshold]


def synth_blobs(
    n_classes: int, n_features: int, n_samples: int, separation: float, seed: SeedSpec
) -> Dataset:
    """Balanced Gaussian blobs with class means ``separation`` away from the origin.

    Means sit on a seeded random simplex (unit directions scaled by the
    separation), noise is unit isotropic, and the result is min-max
    normalized to [0, 1].  separation=0 makes the classes indistinguishable.
    """
    if n_classes < 1 or n_features < 1 or n_samples < 1:
        raise InvalidParameterError("n_classes, n_features, n_samples must be >= 1")
    if separation < 0:
        raise InvalidParameterError("separation must be >= 0")
    rng = seed.rng()
    dirs = rng.standard_normal((n_classes, n_features))
    dirs /= np.linalg.norm(dirs, axis=1, keepdims=True)
    means = separation * dirs
    base, rem = divmod(n_samples, n_classes)
    labels = np.concatenate(
        [np.full(base + (1 if i < rem else 0), i + 1, dtype=np.int64) for i in range(n_classes)]
    )
    samples = means[labels - 1] + rng.standard_normal((n_samples, n_features))
    order = rng.permutation(n_samples)
    ds = Dataset(
        samples=samples[order],
        labels=labels[order],
        n_classes=n_classes,
        name=f"synth-L{n_classes}-K{n_features}-M{n_samples}-s{separation:g}",
    )
    return normalize(ds)


def load_manifest(path) -> dict:
    """Read a dataset manifest: a JSON object mapping name -> {path, label_column, header}.

    An entry may also name a ``split_file`` (JSON with ``train`` and ``test``
    index lists) to replace the seeded split protocol for that dataset.
    """
    path = Path(path)
    with open(path, encoding="utf-8") as fh:
        entries = json.load(fh)
    if not isinstance(entries, dict):
        raise InvalidParameterError(f"manifest {path} must be a JSON object")
    for name, entry in entries.items():
        if "path" not in entry:
            raise InvalidParameterError(f"manifest entry {name!r} lacks a path")
        entry["path"] = str((path.parent / entry["path"]).resolve())
        if "split_file" in entry:
            entry["split_file"] = str((path.parent / entry["split_file"]).resolve())
    return entries


def load_split_file(path, n_samples: int):
    """Read predefined train/test indices from JSON: {"train": [...], "test": [...]}."""
    with open(path, encoding="utf-8") as fh:
        payload = json.load(fh)
    try:
        train_idx = np.asarray(payload["train"], dtype=np.int64)
        test_idx = np.asarray(payload["test"], dtype=np.int64)
    except (KeyError, TypeError, ValueError):
        raise InvalidParameterError(
            f"split file {path} must hold integer 'train' and 'test' index lists"
        ) from None
    merged = np.concatenate([train_idx, test_idx])
    if merged.size == 0 or merged.min() < 0 or merged.max() >= n_samples:
        raise InvalidParameterError(f"split file {path} indexes outside 0..{n_samples - 1}")
    if len(np.intersect1d(train_idx, test_idx)):
        raise InvalidParameterError(f"split file {path} has overlapping train/test indices")
    return train_idx, test_idx


_SYNTH_KEYS = {"classes": 3, "features": 10, "samples": 3000, "sep": 3.0, "seed": 0}


def resolve_dataset(spec: str, manifest: dict | None = None) -> Dataset:
    """Turn a dataset reference into a Dataset.

    ``synth:classes=3,features=10,samples=3000,sep=3.0,seed=0`` builds a
    seeded blob dataset; any other name is looked up in the manifest.
    """
    if spec.startswith("synth:") or spec == "synth":
        params = dict(_SYNTH_KEYS)
        body = spec.partition(":")[2]
        for item in filter(None, body.split(",")):
            key, _, value = item.partition("=")
            key = key.strip()
            if key not in params:
                raise InvalidParameterError(
                    f"unknown synth parameter {key!r}; expected {sorted(params)}"
                )
            params[key] = float(value) if key == "sep" else int(value)
        return synth_blobs(
            params["classes"],
            params["features"],
            params["samples"],
            params["sep"],
            SeedSpec(params["seed"]).child("synth"),
        )
    if manifest is None or spec not in manifest:
        raise InvalidParameterError(
            f"dataset {spec!r} not found; supply a manifest entry or a synth: spec"
        )
    entry = manifest[spec]
    return load_csv(
        entry["path"],
        label_column=entry.get("label_column", -1),
        header=bool(entry.get("header", False)),
        name=spec,
    )
