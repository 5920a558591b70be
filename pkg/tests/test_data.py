"""CSV loading, normalization, splits, and synthetic blob generation."""

import json

import numpy as np
import pytest

from hvnet.classifiers import evaluate, one_hot, train_rls
from hvnet.data import (
    Dataset,
    SplitSpec,
    filter_min_train,
    load_csv,
    load_manifest,
    normalize,
    resolve_dataset,
    split,
    synth_blobs,
)
from hvnet.encoding import encode_batch, init_projection
from hvnet.errors import (
    InvalidDatasetError,
    InvalidParameterError,
    ParseError,
    StratificationWarning,
)
from hvnet.hdc import SeedSpec


def write(tmp_path, name, text):
    path = tmp_path / name
    path.write_text(text, encoding="utf-8")
    return path


# ---------------------------------------------------------------- load_csv


def test_load_csv_dense_reindexing(tmp_path):
    path = write(tmp_path, "toy.csv", "1.0,2.0,a\n3.0,4.0,b\n5.0,6.0,a\n")
    ds = load_csv(path, label_column=-1)
    assert ds.n_classes == 2
    np.testing.assert_array_equal(ds.labels, [1, 2, 1])
    np.testing.assert_array_equal(ds.samples, [[1, 2], [3, 4], [5, 6]])
    assert ds.label_values == ("a", "b")


def test_load_csv_numeric_labels_sort_numerically(tmp_path):
    path = write(tmp_path, "num.csv", "0.5,10\n0.6,2\n0.7,10\n")
    ds = load_csv(path, label_column=1)
    assert ds.label_values == ("2", "10")
    np.testing.assert_array_equal(ds.labels, [2, 1, 2])


def test_load_csv_header_and_named_column(tmp_path):
    path = write(tmp_path, "hdr.csv", "f1,f2,target\n1,2,x\n3,4,y\n")
    ds = load_csv(path, label_column="target", header=True)
    assert ds.n_samples == 2  # header row excluded
    np.testing.assert_array_equal(ds.samples, [[1, 2], [3, 4]])


def test_load_csv_missing_file(tmp_path):
    with pytest.raises(FileNotFoundError):
        load_csv(tmp_path / "absent.csv")


def test_load_csv_non_numeric_cell_reports_position(tmp_path):
    path = write(tmp_path, "bad.csv", "1.0,2.0,a\noops,4.0,b\n")
    with pytest.raises(ParseError, match="row 2, column 1"):
        load_csv(path)


def test_load_csv_single_class_rejected(tmp_path):
    path = write(tmp_path, "one.csv", "1,a\n2,a\n")
    with pytest.raises(InvalidDatasetError):
        load_csv(path)


# --------------------------------------------------------------- normalize


def test_normalize_affine_map():
    ds = Dataset(samples=np.array([[2.0], [4.0], [6.0]]), labels=np.array([1, 2, 1]), n_classes=2)
    out = normalize(ds)
    np.testing.assert_allclose(out.samples[:, 0], [0.0, 0.5, 1.0])
    np.testing.assert_array_equal(out.feature_ranges, [[2.0, 6.0]])


def test_normalize_constant_column_is_half():
    ds = Dataset(samples=np.full((3, 1), 7.0), labels=np.array([1, 2, 1]), n_classes=2)
    np.testing.assert_allclose(normalize(ds).samples[:, 0], 0.5)


def test_normalize_clamps_rows_outside_training_range():
    samples = np.array([[2.0], [6.0], [8.0]])
    ds = Dataset(samples=samples, labels=np.array([1, 2, 1]), n_classes=2)
    out = normalize(ds, train_indices=[0, 1])  # range [2, 6]; row 2 is out of range
    np.testing.assert_allclose(out.samples[:, 0], [0.0, 1.0, 1.0])


def test_normalize_idempotent():
    rng = SeedSpec(0).rng()
    ds = Dataset(
        samples=rng.uniform(-5, 5, size=(20, 3)),
        labels=rng.integers(1, 3, size=20),
        n_classes=2,
    )
    once = normalize(ds, train_indices=range(10))
    twice = normalize(once, train_indices=range(10))
    np.testing.assert_allclose(twice.samples, once.samples, atol=1e-12)


# ------------------------------------------------------------------- split


def test_holdout_stratified_arithmetic():
    labels = np.array([1] * 50 + [2] * 50)
    ds = Dataset(samples=np.zeros((100, 1)), labels=labels, n_classes=2)
    train_idx, test_idx = split(ds, SplitSpec(fraction=0.5, seed=SeedSpec(1)))
    assert len(train_idx) == 50 and len(test_idx) == 50
    for side in (train_idx, test_idx):
        counts = np.bincount(labels[side], minlength=3)[1:]
        assert counts.tolist() == [25, 25]
    assert len(np.intersect1d(train_idx, test_idx)) == 0


def test_kfold_disjoint_and_covering():
    labels = np.array([1, 2] * 30)
    ds = Dataset(samples=np.zeros((60, 1)), labels=labels, n_classes=2)
    folds = split(ds, SplitSpec(mode="kfold", k=4, seed=SeedSpec(2)))
    assert len(folds) == 4
    merged = np.concatenate(folds)
    assert len(merged) == 60 and len(np.unique(merged)) == 60


def test_split_deterministic():
    ds = synth_blobs(2, 3, 50, 2.0, SeedSpec(3))
    a = split(ds, SplitSpec(seed=SeedSpec(4)))
    b = split(ds, SplitSpec(seed=SeedSpec(4)))
    np.testing.assert_array_equal(a[0], b[0])
    np.testing.assert_array_equal(a[1], b[1])


def test_split_downgrades_when_class_too_small():
    labels = np.array([1, 1, 1, 1, 1, 2])  # class 2 has one sample
    ds = Dataset(samples=np.zeros((6, 1)), labels=labels, n_classes=2)
    with pytest.warns(StratificationWarning):
        train_idx, test_idx = split(ds, SplitSpec(fraction=0.5, seed=SeedSpec(5)))
    assert len(train_idx) + len(test_idx) == 6


def test_split_spec_validation():
    with pytest.raises(InvalidParameterError):
        SplitSpec(fraction=1.0)
    with pytest.raises(InvalidParameterError):
        SplitSpec(mode="kfold", k=1)
    with pytest.raises(InvalidParameterError):
        SplitSpec(mode="bootstrap")


# --------------------------------------------------------- filter_min_train


def test_filter_min_train_strict_threshold():
    ds = synth_blobs(2, 2, 10, 1.0, SeedSpec(6))
    kept = filter_min_train([ds, ds, ds], [1001, 1000, 999])
    assert len(kept) == 1


def test_filter_min_train_empty():
    assert filter_min_train([], []) == []


# --------------------------------------------------------------- synth_blobs


def test_synth_blobs_deterministic_and_balanced():
    a = synth_blobs(3, 5, 100, 2.0, SeedSpec(7))
    b = synth_blobs(3, 5, 100, 2.0, SeedSpec(7))
    np.testing.assert_array_equal(a.samples, b.samples)
    np.testing.assert_array_equal(a.labels, b.labels)
    counts = np.bincount(a.labels, minlength=4)[1:]
    assert counts.max() - counts.min() <= 1
    assert a.samples.min() >= 0.0 and a.samples.max() <= 1.0


def _centralized_accuracy(ds, dim=100, kappa=7, lam=1.0):
    train_idx, test_idx = split(ds, SplitSpec(seed=SeedSpec(8)))
    proj = init_projection(ds.n_features, dim, SeedSpec(9).child("projection"))
    H_train = encode_batch(ds.samples[train_idx], proj, kappa)
    H_test = encode_batch(ds.samples[test_idx], proj, kappa)
    model = train_rls(H_train, one_hot(ds.labels[train_idx], ds.n_classes), lam)
    return evaluate(model, H_test, ds.labels[test_idx])


def test_synth_blobs_zero_separation_is_chance():
    ds = synth_blobs(3, 10, 1200, 0.0, SeedSpec(10))
    assert abs(_centralized_accuracy(ds) - 1 / 3) < 0.08


def test_synth_blobs_generous_separation_is_easy():
    ds = synth_blobs(3, 10, 3000, 10.0, SeedSpec(11))
    assert _centralized_accuracy(ds) > 0.95


def test_synth_blobs_validation():
    with pytest.raises(InvalidParameterError):
        synth_blobs(0, 2, 10, 1.0, SeedSpec(0))
    with pytest.raises(InvalidParameterError):
        synth_blobs(2, 2, 10, -1.0, SeedSpec(0))


# ----------------------------------------------------- manifest / resolution


def test_resolve_synth_spec():
    ds = resolve_dataset("synth:classes=2,features=4,samples=60,sep=1.5,seed=5")
    assert ds.n_classes == 2 and ds.n_features == 4 and ds.n_samples == 60


def test_resolve_synth_rejects_unknown_key():
    with pytest.raises(InvalidParameterError):
        resolve_dataset("synth:blobs=3")


def test_manifest_round_trip(tmp_path):
    csv_path = write(tmp_path, "toy.csv", "1.0,a\n2.0,b\n3.0,a\n")
    manifest_path = write(
        tmp_path, "manifest.json",
        '{"toy": {"path": "toy.csv", "label_column": -1, "header": false}}',
    )
    entries = load_manifest(manifest_path)
    assert entries["toy"]["path"] == str(csv_path.resolve())
    ds = resolve_dataset("toy", entries)
    assert ds.name == "toy" and ds.n_samples == 3


def test_resolve_unknown_dataset():
    with pytest.raises(InvalidParameterError):
        resolve_dataset("mystery", {})


def test_split_file_round_trip(tmp_path):
    from hvnet.data import load_split_file

    write(tmp_path, "splits.json", '{"train": [0, 2, 4], "test": [1, 3]}')
    train_idx, test_idx = load_split_file(tmp_path / "splits.json", 5)
    np.testing.assert_array_equal(train_idx, [0, 2, 4])
    np.testing.assert_array_equal(test_idx, [1, 3])
    with pytest.raises(InvalidParameterError):
        load_split_file(tmp_path / "splits.json", 4)  # index 4 out of range
    write(tmp_path, "overlap.json", '{"train": [0, 1], "test": [1, 2]}')
    with pytest.raises(InvalidParameterError):
        load_split_file(tmp_path / "overlap.json", 5)


def test_manifest_split_file_overrides_protocol(tmp_path):
    from hvnet.harness import ExperimentConfig, run_suite
    from hvnet.network import ExperimentVersion

    # Training rows map feature 0 -> class 1 and feature 1 -> class 2; the
    # predefined test rows invert that mapping, so accuracy is exactly zero
    # if and only if the split file governed the split.
    lines = ["0.0,1"] * 15 + ["1.0,2"] * 15 + ["0.0,2"] * 5 + ["1.0,1"] * 5
    write(tmp_path, "toy.csv", "\n".join(lines) + "\n")
    write(tmp_path, "splits.json",
          json.dumps({"train": list(range(30)), "test": list(range(30, 40))}))
    write(
        tmp_path, "manifest.json",
        json.dumps({"toy": {"path": "toy.csv", "label_column": -1,
                            "split_file": "splits.json"}}),
    )
    cfg = ExperimentConfig(
        dataset="toy",
        manifest=str(tmp_path / "manifest.json"),
        versions=(ExperimentVersion("centralized"),),
        dim=20, lam=1.0, kappa=3, n_seeds=1, master_seed=0, allow_off_grid=True,
    )
    (rec,) = run_suite(cfg)
    assert rec.mean_accuracy == 0.0
