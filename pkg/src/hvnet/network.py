"""Agent-network simulation: shard the data, train locally, exchange, aggregate.

Agents never see each other's samples; the only things crossing agent
boundaries are classifier matrices (or their compressed hypervectors),
so the exchange payload size is independent of shard sizes.  Aggregation
is a single round: every agent sums the classifiers of its neighbors and
itself, in sorted-agent-id order so the result is exactly order-free.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .classifiers import (
    ClassifierMatrix,
    evaluate,
    finalize_centroids,
    one_hot,
    train_centroids,
    train_rls,
)
from .compression import compress, decompress, generate_keys
from .data import Dataset
from .encoding import InputProjection, encode_batch, init_projection
from .errors import InsufficientDataError, InvalidParameterError, ProtocolError
from .hdc import SeedSpec

__all__ = [
    "AgentNetwork",
    "DataPartition",
    "ExchangeStats",
    "ExperimentVersion",
    "ModelParams",
    "RunResult",
    "exchange_and_aggregate",
    "partition",
    "run_version",
    "train_local",
]

VERSION_KINDS = ("centralized", "local", "distributed")


@dataclass(frozen=True)
class AgentNetwork:
    """Undirected connectivity between agents; the diagonal is irrelevant because
    every agent always aggregates its own classifier."""

    omega: np.ndarray  # (n, n) with entries in {0, 1}, symmetric
    agent_ids: tuple[int, ...]

    def __post_init__(self):
        om = np.asarray(self.omega)
        n = len(self.agent_ids)
        if om.shape != (n, n):
            raise InvalidParameterError("omega must be square and match agent_ids")
        if not np.array_equal(om, om.T):
            raise InvalidParameterError("omega must be symmetric")
        if not np.all((om == 0) | (om == 1)):
            raise InvalidParameterError("omega entries must be 0 or 1")
        if len(set(self.agent_ids)) != n:
            raise InvalidParameterError("agent_ids must be distinct")

    @classmethod
    def fully_connected(cls, n_agents: int, agent_ids=None) -> "AgentNetwork":
        if n_agents < 1:
            raise InvalidParameterError("need at least one agent")
        ids = tuple(range(n_agents)) if agent_ids is None else tuple(agent_ids)
        return cls(omega=np.ones((n_agents, n_agents), dtype=np.int64), agent_ids=ids)

    @property
    def n_agents(self) -> int:
        return len(self.agent_ids)

    def neighborhood(self, p: int) -> list[int]:
        """Indices of p's neighbors plus p itself, sorted by agent id."""
        members = set(np.flatnonzero(np.asarray(self.omega)[p]).tolist())
        members.add(p)
        return sorted(members, key=lambda s: self.agent_ids[s])


@dataclass(frozen=True)
class DataPartition:
    shards: tuple[np.ndarray, ...]
    seed: SeedSpec


@dataclass(frozen=True)
class ExperimentVersion:
    kind: str  # centralized | local | distributed
    compression: bool = False
    classifier_kind: str = "rls"

    def __post_init__(self):
        if self.kind not in VERSION_KINDS:
            raise InvalidParameterError(f"kind must be one of {VERSION_KINDS}")
        if self.compression and self.kind != "distributed":
            raise InvalidParameterError("compression applies to the distributed version only")
        if self.classifier_kind not in ("rls", "centroid"):
            raise InvalidParameterError("classifier_kind must be rls or centroid")


@dataclass(frozen=True)
class ModelParams:
    dim: int
    kappa: int
    lam: float


@dataclass(frozen=True)
class ExchangeStats:
    """Float64 payload accounting for one exchange round, per producing agent."""

    payload_values_per_producer: int
    total_payload_values: int

    @property
    def payload_bytes_per_producer(self) -> int:
        return 8 * self.payload_values_per_producer


@dataclass(frozen=True)
class RunResult:
    version: ExperimentVersion
    n_agents: int
    per_agent_accuracy: np.ndarray
    payload_values_per_producer: int

    @property
    def mean_accuracy(self) -> float:
        return float(np.mean(self.per_agent_accuracy))

    @property
    def std_accuracy(self) -> float:
        return float(np.std(self.per_agent_accuracy))


def partition(n_samples: int, n_agents: int, seed: SeedSpec) -> DataPartition:
    """Uniform seeded shuffle split into n_agents near-equal disjoint shards."""
    if n_agents < 1:
        raise InvalidParameterError("n_agents must be >= 1")
    if n_samples < n_agents:
        raise InsufficientDataError(
            f"{n_samples} samples cannot give {n_agents} non-empty shards"
        )
    perm = seed.rng().permutation(n_samples)
    return DataPartition(shards=tuple(np.array_split(perm, n_agents)), seed=seed)


def train_local(
    X, y, classifier_kind: str, proj: InputProjection, kappa: int, lam: float, n_classes: int
) -> ClassifierMatrix:
    """Encode one shard with the shared projection and train its classifier.

    A shard may lack some class entirely: least squares proceeds with an
    all-zero one-hot column, centroids produce a zero row.
    """
    X = np.asarray(X)
    if X.ndim != 2 or X.shape[0] < 1:
        raise InvalidParameterError("shard must be non-empty")
    H = encode_batch(X, proj, kappa)
    if classifier_kind == "centroid":
        return train_centroids(H, y, n_classes)
    return train_rls(H, one_hot(y, n_classes), lam)


def _check_consistent(classifiers: list[ClassifierMatrix]) -> tuple[str, int, int]:
    kinds = {c.kind for c in classifiers}
    shapes = {(c.n_classes, c.dim) for c in classifiers}
    if len(kinds) != 1 or len(shapes) != 1:
        raise ProtocolError(f"agents disagree on classifier kind/shape: {kinds}, {shapes}")
    (kind,) = kinds
    ((n_classes, dim),) = shapes
    return kind, n_classes, dim


def exchange_and_aggregate(
    network: AgentNetwork, classifiers: list[ClassifierMatrix], compression: bool
) -> tuple[list[ClassifierMatrix], ExchangeStats]:
    """One-shot exchange: each agent sums the classifiers of its neighborhood.

    Uncompressed centroids travel as raw per-class sums and counts, and each
    agent normalizes after aggregation; over a fully connected network this
    reproduces the centralized centroid classifier exactly.  Compressed
    classifiers are packed once per producer; every consumer regenerates the
    producer's keys from its agent id and decompresses the reconstruction,
    which is then aggregated as-is.
    """
    if len(classifiers) != network.n_agents:
        raise ProtocolError("need exactly one classifier per agent")
    kind, n_classes, dim = _check_consistent(classifiers)

    if compression:
        payload_per = dim
        reconstructed = []
        for s in range(network.n_agents):
            keys = generate_keys(network.agent_ids[s], n_classes, dim)
            packed = compress(classifiers[s], keys)
            # Deterministic, so one reconstruction stands in for every consumer's.
            reconstructed.append(decompress(packed, keys, kind=kind))
        aggregated = []
        for p in range(network.n_agents):
            members = network.neighborhood(p)
            weights = np.zeros((n_classes, dim))
            for s in members:
                weights += reconstructed[s].weights
            aggregated.append(ClassifierMatrix(weights=weights, kind=kind))
        return aggregated, ExchangeStats(payload_per, payload_per * network.n_agents)

    payload_per = n_classes * dim
    stats = ExchangeStats(payload_per, payload_per * network.n_agents)
    if kind == "centroid":
        for c in classifiers:
            if c.class_sums is None or c.class_counts is None:
                raise ProtocolError("centroid exchange requires class sums and counts")
        aggregated = []
        for p in range(network.n_agents):
            members = network.neighborhood(p)
            sums = sum(classifiers[s].class_sums for s in members)
            counts = sum(classifiers[s].class_counts for s in members)
            aggregated.append(finalize_centroids(sums, counts))
        return aggregated, stats

    aggregated = []
    for p in range(network.n_agents):
        members = network.neighborhood(p)
        weights = np.zeros((n_classes, dim))
        for s in members:
            weights += classifiers[s].weights
        aggregated.append(ClassifierMatrix(weights=weights, kind=kind))
    return aggregated, stats


def run_version(
    ds: Dataset,
    train_idx,
    test_idx,
    version: ExperimentVersion,
    params: ModelParams,
    n_agents: int,
    seed: SeedSpec,
    network: AgentNetwork | None = None,
    eval_on_full_test: bool = False,
) -> RunResult:
    """Run one seeded realization of a model version and report per-agent accuracy.

    All randomness (projection, shard partitions) derives from ``seed``.
    Local and distributed versions evaluate each agent on its own test
    shard unless ``eval_on_full_test`` is set; the centralized version
    always uses the full test set.
    """
    train_idx = np.asarray(train_idx)
    test_idx = np.asarray(test_idx)
    if train_idx.size < 1 or test_idx.size < 1:
        raise InvalidParameterError("train and test index sets must be non-empty")
    proj = init_projection(ds.n_features, params.dim, seed.child("projection"))
    H_train = encode_batch(ds.samples[train_idx], proj, params.kappa)
    H_test = encode_batch(ds.samples[test_idx], proj, params.kappa)
    y_train = ds.labels[train_idx]
    y_test = ds.labels[test_idx]

    def fit(rows) -> ClassifierMatrix:
        if version.classifier_kind == "centroid":
            return train_centroids(H_train[rows], y_train[rows], ds.n_classes)
        return train_rls(H_train[rows], one_hot(y_train[rows], ds.n_classes), params.lam)

    if version.kind == "centralized":
        model = fit(np.arange(train_idx.size))
        acc = evaluate(model, H_test, y_test)
        return RunResult(version, 1, np.asarray([acc]), 0)

    train_shards = partition(train_idx.size, n_agents, seed.child("train_partition")).shards
    test_shards = partition(test_idx.size, n_agents, seed.child("test_partition")).shards
    locals_ = [fit(shard) for shard in train_shards]

    if version.kind == "local":
        models = locals_
        payload_per = 0
    else:
        net = network if network is not None else AgentNetwork.fully_connected(n_agents)
        if net.n_agents != n_agents:
            raise InvalidParameterError("network size must match n_agents")
        models, stats = exchange_and_aggregate(net, locals_, version.compression)
        payload_per = stats.payload_values_per_producer

    accs = []
    for p in range(n_agents):
        if eval_on_full_test:
            accs.append(evaluate(models[p], H_test, y_test))
        else:
            rows = test_shards[p]
            accs.append(evaluate(models[p], H_test[rows], y_test[rows]))
    return RunResult(version, n_agents, np.asarray(accs), payload_per)
