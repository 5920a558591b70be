"""Experiment harness: grid search, multi-seed suites, statistics, reporting.

Every suite is a pure function of its configuration and master seed, so
rerunning one produces byte-identical report files.  Wall-clock timing is
kept on the in-memory records but deliberately excluded from serialized
output to preserve that property.
"""

from __future__ import annotations

import csv
import hashlib
import io
import json
import time
import warnings
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from .classifiers import evaluate, rls_from_gram, train_rls, one_hot
from .data import (
    Dataset,
    SplitSpec,
    load_manifest,
    load_split_file,
    normalize,
    resolve_dataset,
    split,
)
from .encoding import encode_batch_sums, init_projection
from .errors import (
    InvalidParameterError,
    PairingError,
    SuiteError,
    UndefinedCorrelationError,
)
from .hdc import SeedSpec
from .network import ExperimentVersion, ModelParams, run_version

__all__ = [
    "DEFAULT_DIM_GRID",
    "DEFAULT_KAPPA_GRID",
    "DEFAULT_LAMBDA_GRID",
    "ExperimentConfig",
    "GridSpec",
    "ResultRecord",
    "format_table",
    "grid_search",
    "pearson",
    "records_from_jsonl",
    "records_to_csv",
    "records_to_jsonl",
    "relative_improvement",
    "report",
    "run_suite",
    "scatter_export",
    "version_label",
]

DEFAULT_DIM_GRID = tuple(range(50, 1501, 50))  # 30 values
DEFAULT_LAMBDA_GRID = tuple(float(2.0**e) for e in range(-10, 6))  # 16 values
DEFAULT_KAPPA_GRID = (1, 3, 7, 15)

_GRID_RANGES = {
    "dim": (DEFAULT_DIM_GRID[0], DEFAULT_DIM_GRID[-1]),
    "lam": (DEFAULT_LAMBDA_GRID[0], DEFAULT_LAMBDA_GRID[-1]),
    "kappa": (DEFAULT_KAPPA_GRID[0], DEFAULT_KAPPA_GRID[-1]),
}


@dataclass(frozen=True)
class GridSpec:
    dim_values: tuple[int, ...] = DEFAULT_DIM_GRID
    lambda_values: tuple[float, ...] = DEFAULT_LAMBDA_GRID
    kappa_values: tuple[int, ...] = DEFAULT_KAPPA_GRID

    @property
    def size(self) -> int:
        return len(self.dim_values) * len(self.lambda_values) * len(self.kappa_values)


@dataclass(frozen=True)
class ExperimentConfig:
    """One experiment suite: a dataset, model versions, agent counts, hyperparameters.

    Fixed hyperparameters must lie inside the default search ranges unless
    ``allow_off_grid`` is set.
    """

    dataset: str
    versions: tuple[ExperimentVersion, ...]
    agent_counts: tuple[int, ...] = (10,)
    dim: int = 500
    lam: float = 1.0
    kappa: int = 7
    n_seeds: int = 10
    master_seed: int = 0
    split_mode: str = "holdout"  # holdout | kfold
    train_fraction: float = 0.5
    k_folds: int = 4
    stratified: bool = True
    eval_on_full_test: bool = False
    manifest: str | None = None
    allow_off_grid: bool = False

    def __post_init__(self):
        if self.allow_off_grid:
            return
        for name, value in (("dim", self.dim), ("lam", self.lam), ("kappa", self.kappa)):
            lo, hi = _GRID_RANGES[name]
            if not lo <= value <= hi:
                raise InvalidParameterError(
                    f"{name}={value} is outside the search range [{lo}, {hi}]; "
                    "set allow_off_grid=True (--allow-off-grid) to override"
                )


@dataclass(frozen=True)
class ResultRecord:
    """Aggregated outcome of one (dataset, version, agent count) suite."""

    dataset: str
    version: str
    classifier: str
    compressed: bool
    n_agents: int
    dim: int
    lam: float
    kappa: int
    n_seeds: int
    master_seed: int
    per_seed_mean: tuple[float, ...]
    mean_accuracy: float
    std_accuracy: float
    per_agent_mean: tuple[float, ...]
    payload_values_per_producer: int
    payload_bytes_per_producer: int
    config_hash: str
    wall_time_s: float = field(default=0.0, compare=False)

    def to_dict(self, include_timing: bool = False) -> dict:
        out = {
            "dataset": self.dataset,
            "version": self.version,
            "classifier": self.classifier,
            "compressed": self.compressed,
            "n_agents": self.n_agents,
            "dim": self.dim,
            "lam": self.lam,
            "kappa": self.kappa,
            "n_seeds": self.n_seeds,
            "master_seed": self.master_seed,
            "per_seed_mean": list(self.per_seed_mean),
            "mean_accuracy": self.mean_accuracy,
            "std_accuracy": self.std_accuracy,
            "per_agent_mean": list(self.per_agent_mean),
            "payload_values_per_producer": self.payload_values_per_producer,
            "payload_bytes_per_producer": self.payload_bytes_per_producer,
            "config_hash": self.config_hash,
        }
        if include_timing:
            out["wall_time_s"] = self.wall_time_s
        return out

    @classmethod
    def from_dict(cls, d: dict) -> "ResultRecord":
        return cls(
            dataset=d["dataset"],
            version=d["version"],
            classifier=d["classifier"],
            compressed=bool(d["compressed"]),
            n_agents=int(d["n_agents"]),
            dim=int(d["dim"]),
            lam=float(d["lam"]),
            kappa=int(d["kappa"]),
            n_seeds=int(d["n_seeds"]),
            master_seed=int(d["master_seed"]),
            per_seed_mean=tuple(float(x) for x in d["per_seed_mean"]),
            mean_accuracy=float(d["mean_accuracy"]),
            std_accuracy=float(d["std_accuracy"]),
            per_agent_mean=tuple(float(x) for x in d["per_agent_mean"]),
            payload_values_per_producer=int(d["payload_values_per_producer"]),
            payload_bytes_per_producer=int(d["payload_bytes_per_producer"]),
            config_hash=d["config_hash"],
            wall_time_s=float(d.get("wall_time_s", 0.0)),
        )


def version_label(version: ExperimentVersion) -> str:
    if version.kind == "distributed" and version.compression:
        return "distributed+compressed"
    return version.kind


def _canonical_json(obj) -> str:
    return json.dumps(obj, sort_keys=True, separators=(",", ":"))


def _config_hash(payload: dict) -> str:
    return hashlib.sha256(_canonical_json(payload).encode("utf-8")).hexdigest()


def grid_search(
    ds: Dataset,
    grid: GridSpec,
    seed: SeedSpec,
    train_fraction: float = 0.5,
    stratified: bool = True,
) -> tuple[int, float, int]:
    """Exhaustive hyperparameter search with the centralized least-squares model.

    Trains on one half of a seeded holdout of ``ds`` and scores on the
    other; returns the (dim, lambda, kappa) with the best validation
    accuracy, ties resolved toward smaller dim, then lambda, then kappa.
    The selected triple is meant to be reused for both classifier kinds
    and every version.
    """
    spec = SplitSpec(
        mode="holdout", fraction=train_fraction, stratified=stratified,
        seed=seed.child("grid_split"),
    )
    train_idx, val_idx = split(ds, spec)
    ds = normalize(ds, train_idx)
    X_train, y_train = ds.samples[train_idx], ds.labels[train_idx]
    X_val, y_val = ds.samples[val_idx], ds.labels[val_idx]
    Y_train = one_hot(y_train, ds.n_classes)

    best_acc = -1.0
    best: tuple[int, float, int] | None = None
    for d_i, dim in enumerate(sorted(grid.dim_values)):
        proj = init_projection(ds.n_features, dim, seed.child("grid_projection", d_i))
        sums_train = encode_batch_sums(X_train, proj)
        sums_val = encode_batch_sums(X_val, proj)
        for kappa in sorted(grid.kappa_values):
            H = np.clip(sums_train, -kappa, kappa)
            H_val = np.clip(sums_val, -kappa, kappa)
            use_gram = H.shape[0] >= dim
            if use_gram:
                Hf = H.astype(np.float64)
                gram = Hf.T @ Hf
                cross = Hf.T @ Y_train
            for lam in sorted(grid.lambda_values):
                if use_gram:
                    model = rls_from_gram(gram, cross, lam)
                else:
                    model = train_rls(H, Y_train, lam)
                acc = evaluate(model, H_val, y_val)
                triple = (dim, float(lam), int(kappa))
                if acc > best_acc or (acc == best_acc and best is not None and triple < best):
                    best_acc = acc
                    best = triple
    assert best is not None
    return best


def _resolve(config: ExperimentConfig, dataset: Dataset | None):
    manifest = load_manifest(config.manifest) if config.manifest else None
    if dataset is None:
        dataset = resolve_dataset(config.dataset, manifest)
    split_file = None
    if manifest and config.dataset in manifest:
        split_file = manifest[config.dataset].get("split_file")
    return dataset, split_file


def run_suite(config: ExperimentConfig, dataset: Dataset | None = None) -> list[ResultRecord]:
    """Run every (version, agent count) of the config over its seeds.

    All randomness derives from (master_seed, seed index); one failing
    seed aborts the whole suite so averages are never silently partial.
    """
    raw, split_file = _resolve(config, dataset)
    base = SeedSpec(config.master_seed)
    params = ModelParams(dim=config.dim, kappa=config.kappa, lam=config.lam)

    if split_file is not None:
        # Predefined splits from the manifest override the seeded protocol.
        train_idx, test_idx = load_split_file(split_file, raw.n_samples)
        pieces = [(normalize(raw, train_idx), train_idx, test_idx)]
    elif config.split_mode == "holdout":
        spec = SplitSpec(
            mode="holdout", fraction=config.train_fraction,
            stratified=config.stratified, seed=base.child("split"),
        )
        train_idx, test_idx = split(raw, spec)
        pieces = [(normalize(raw, train_idx), train_idx, test_idx)]
    elif config.split_mode == "kfold":
        spec = SplitSpec(
            mode="kfold", k=config.k_folds, stratified=config.stratified,
            seed=base.child("split"),
        )
        folds = split(raw, spec)
        pieces = []
        for f in range(len(folds)):
            train_idx = np.sort(np.concatenate([folds[g] for g in range(len(folds)) if g != f]))
            pieces.append((normalize(raw, train_idx), train_idx, folds[f]))
    else:
        raise InvalidParameterError(f"unknown split_mode {config.split_mode!r}")

    records = []
    for version in config.versions:
        counts = (1,) if version.kind == "centralized" else tuple(config.agent_counts)
        for n_agents in counts:
            started = time.perf_counter()
            per_seed = []
            per_agent_sum = None
            payload = 0
            for i in range(config.n_seeds):
                seed = base.child("seed", i)
                try:
                    fold_means = []
                    fold_agents = None
                    for f, (ds, train_idx, test_idx) in enumerate(pieces):
                        res = run_version(
                            ds, train_idx, test_idx, version, params, n_agents,
                            seed if len(pieces) == 1 else seed.child("fold", f),
                            eval_on_full_test=config.eval_on_full_test,
                        )
                        fold_means.append(res.mean_accuracy)
                        fold_agents = (
                            res.per_agent_accuracy
                            if fold_agents is None
                            else fold_agents + res.per_agent_accuracy
                        )
                        payload = res.payload_values_per_producer
                    per_seed.append(float(np.mean(fold_means)))
                    agents = fold_agents / len(pieces)
                    per_agent_sum = agents if per_agent_sum is None else per_agent_sum + agents
                except Exception as exc:
                    raise SuiteError(
                        f"suite aborted: seed index {i} failed for "
                        f"version={version_label(version)} n_agents={n_agents}: {exc}"
                    ) from exc
            per_agent_mean = per_agent_sum / config.n_seeds
            hash_payload = {
                "dataset": raw.name,
                "version": version_label(version),
                "classifier": version.classifier_kind,
                "compressed": version.compression,
                "n_agents": n_agents,
                "dim": config.dim,
                "lam": config.lam,
                "kappa": config.kappa,
                "n_seeds": config.n_seeds,
                "master_seed": config.master_seed,
                "split_mode": config.split_mode,
                "train_fraction": config.train_fraction,
                "k_folds": config.k_folds,
                "stratified": config.stratified,
                "eval_on_full_test": config.eval_on_full_test,
            }
            records.append(
                ResultRecord(
                    dataset=raw.name,
                    version=version.kind,
                    classifier=version.classifier_kind,
                    compressed=version.compression,
                    n_agents=n_agents,
                    dim=config.dim,
                    lam=config.lam,
                    kappa=config.kappa,
                    n_seeds=config.n_seeds,
                    master_seed=config.master_seed,
                    per_seed_mean=tuple(per_seed),
                    mean_accuracy=float(np.mean(per_seed)),
                    std_accuracy=float(np.std(per_seed)),
                    per_agent_mean=tuple(float(x) for x in per_agent_mean),
                    payload_values_per_producer=payload,
                    payload_bytes_per_producer=8 * payload,
                    config_hash=_config_hash(hash_payload),
                    wall_time_s=time.perf_counter() - started,
                )
            )
    return records


def pearson(xs, ys) -> float:
    """Sample Pearson correlation coefficient."""
    xs = np.asarray(xs, dtype=np.float64)
    ys = np.asarray(ys, dtype=np.float64)
    if xs.ndim != 1 or xs.shape != ys.shape or xs.size < 2:
        raise InvalidParameterError("need two equal-length vectors of at least 2 values")
    dx = xs - xs.mean()
    dy = ys - ys.mean()
    sx = np.sqrt(np.sum(dx * dx))
    sy = np.sqrt(np.sum(dy * dy))
    if sx == 0.0 or sy == 0.0:
        raise UndefinedCorrelationError("correlation is undefined for a zero-variance input")
    return float(np.sum(dx * dy) / (sx * sy))


def relative_improvement(records, compressed: bool = False) -> dict[int, float]:
    """Percent improvement of the distributed over the local version, per agent count.

    Pairs local records with distributed records (of the requested
    compression flavor) sharing the same dataset, classifier and agent
    count; records must cover exactly one such pairing per count.
    """
    local = {}
    dist = {}
    for r in records:
        key = (r.dataset, r.classifier, r.n_agents)
        if r.version == "local":
            if key in local:
                raise PairingError(f"duplicate local record for {key}")
            local[key] = r
        elif r.version == "distributed" and r.compressed == compressed:
            if key in dist:
                raise PairingError(f"duplicate distributed record for {key}")
            dist[key] = r
    if not local or set(local) != set(dist):
        missing = set(local).symmetric_difference(dist)
        raise PairingError(f"unmatched local/distributed records: {sorted(missing)}")
    groups = {(d, c) for d, c, _ in local}
    if len(groups) != 1:
        raise PairingError(f"records span multiple dataset/classifier groups: {sorted(groups)}")
    return {
        k[2]: 100.0 * (dist[k].mean_accuracy - local[k].mean_accuracy) / local[k].mean_accuracy
        for k in sorted(local)
    }


def _sorted_records(records) -> list[ResultRecord]:
    return sorted(
        records,
        key=lambda r: (r.dataset, r.classifier, r.version, r.compressed, r.n_agents),
    )


def records_to_jsonl(records, include_timing: bool = False) -> str:
    lines = [_canonical_json(r.to_dict(include_timing)) for r in _sorted_records(records)]
    return "\n".join(lines) + "\n"


def records_to_csv(records, include_timing: bool = False) -> str:
    rows = [r.to_dict(include_timing) for r in _sorted_records(records)]
    if not rows:
        raise InvalidParameterError("no records to report")
    header = list(rows[0].keys())
    buffer = io.StringIO()
    writer = csv.writer(buffer, lineterminator="\n")
    writer.writerow(header)
    for row in rows:
        cells = []
        for key in header:
            value = row[key]
            if isinstance(value, list):
                cells.append(_canonical_json(value))
            elif isinstance(value, bool):
                cells.append("true" if value else "false")
            else:
                cells.append(str(value))
        writer.writerow(cells)
    return buffer.getvalue()


def format_table(records) -> str:
    """Text table: one row per (classifier, version), one column per agent count.

    When a local or distributed row has no record at one agent, a
    centralized record of the same classifier fills that column (the two
    coincide by definition for a single agent).
    """
    records = list(records)
    if not records:
        raise InvalidParameterError("no records to report")
    counts = sorted({r.n_agents for r in records})
    central = {r.classifier: r for r in records if r.version == "centralized"}
    rows: dict[tuple[str, str], dict[int, float]] = {}
    for r in _sorted_records(records):
        label = "distributed+compressed" if r.compressed else r.version
        rows.setdefault((r.classifier, label), {})[r.n_agents] = r.mean_accuracy
    for (classifier, label), cells in rows.items():
        if label != "centralized" and 1 in counts and 1 not in cells and classifier in central:
            cells[1] = central[classifier].mean_accuracy
    widths = max(len(f"{c}/{l}") for c, l in rows)
    header = " " * widths + " | " + " | ".join(f"N={n:<6d}" for n in counts)
    lines = [header, "-" * len(header)]
    for (classifier, label), cells in sorted(rows.items()):
        name = f"{classifier}/{label}".ljust(widths)
        cols = " | ".join(
            f"{cells[n]:.4f}  " if n in cells else " " * 8 for n in counts
        )
        lines.append(f"{name} | {cols}")
    return "\n".join(lines) + "\n"


def report(records, fmt: str = "jsonl", out=None, include_timing: bool = False):
    """Render records deterministically; write to ``out`` if given, else return the text.

    The full text is built before any I/O, so an unwritable path never
    leaves a partial file behind.
    """
    if fmt == "jsonl":
        text = records_to_jsonl(records, include_timing)
    elif fmt == "csv":
        text = records_to_csv(records, include_timing)
    elif fmt == "table":
        text = format_table(records)
    else:
        raise InvalidParameterError(f"unknown report format {fmt!r}")
    if out is None:
        return text
    out = Path(out)
    with open(out, "w", encoding="utf-8") as fh:
        fh.write(text)
    return out


def records_from_jsonl(path) -> list[ResultRecord]:
    with open(path, encoding="utf-8") as fh:
        return [ResultRecord.from_dict(json.loads(line)) for line in fh if line.strip()]


def scatter_export(records, version_a: str, version_b: str, out=None):
    """Plot-ready pairing of per-dataset accuracy under two versions.

    Version names use :func:`version_label` values.  Pairs on (dataset,
    classifier, agent count), except that a centralized side matches any
    agent count.  Datasets present under only one version are excluded
    with a warning, so exports stay symmetric-complete.
    """
    def label_of(r: ResultRecord) -> str:
        return "distributed+compressed" if r.compressed else r.version

    sides = {version_a: {}, version_b: {}}
    for r in records:
        label = label_of(r)
        if label in sides:
            key = (r.dataset, r.classifier) if label == "centralized" else (
                r.dataset, r.classifier, r.n_agents
            )
            sides[label][key] = r

    lines = ["dataset,classifier,n_agents,acc_a,acc_b"]
    for key in sorted(sides[version_a], key=str):
        ra = sides[version_a][key]
        if version_b == "centralized":
            other = sides[version_b].get((ra.dataset, ra.classifier))
        elif version_a == "centralized":
            continue  # handled from the richer side below
        else:
            other = sides[version_b].get(key)
        if other is None:
            warnings.warn(f"dataset {ra.dataset!r} missing under {version_b!r}; excluded")
            continue
        lines.append(
            f"{ra.dataset},{ra.classifier},{ra.n_agents},"
            f"{ra.mean_accuracy!r},{other.mean_accuracy!r}"
        )
    if version_a == "centralized":
        for key in sorted(sides[version_b], key=str):
            rb = sides[version_b][key]
            ra = sides[version_a].get((rb.dataset, rb.classifier))
            if ra is None:
                warnings.warn(f"dataset {rb.dataset!r} missing under {version_a!r}; excluded")
                continue
            lines.append(
                f"{rb.dataset},{rb.classifier},{rb.n_agents},"
                f"{ra.mean_accuracy!r},{rb.mean_accuracy!r}"
            )
    text = "\n".join(lines) + "\n"
    if out is None:
        return text
    out = Path(out)
    with open(out, "w", encoding="utf-8") as fh:
        fh.write(text)
    return out
