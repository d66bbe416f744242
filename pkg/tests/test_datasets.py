"""Dataset container, CSV/IDX loaders, generators, fold plans."""

import gzip
import struct

import numpy as np
import pytest

from sqnn.datasets import (Dataset, filter_pair, gen_logic_gate, gen_sinc,
                           gen_two_moons, kfold_plan, load_csv,
                           load_mnist_idx, split)
from sqnn.features import dct2


def write_idx_pair(tmp_path, images, labels, *, compress=False,
                   image_magic=0x803, label_magic=0x801, label_count=None):
    images = np.asarray(images, dtype=np.uint8)
    labels = np.asarray(labels, dtype=np.uint8)
    n, rows, cols = images.shape
    img_bytes = struct.pack(">IIII", image_magic, n, rows, cols) + images.tobytes()
    lab_bytes = struct.pack(">II", label_magic,
                            n if label_count is None else label_count) + labels.tobytes()
    suffix = ".gz" if compress else ""
    img_path = tmp_path / f"images-idx3-ubyte{suffix}"
    lab_path = tmp_path / f"labels-idx1-ubyte{suffix}"
    opener = gzip.open if compress else open
    with opener(img_path, "wb") as fh:
        fh.write(img_bytes)
    with opener(lab_path, "wb") as fh:
        fh.write(lab_bytes)
    return img_path, lab_path


class TestDataset:
    def test_validation(self):
        with pytest.raises(ValueError, match="targets"):
            Dataset(inputs=np.ones((2, 1)), targets=np.array([0.5, 1.5]))
        with pytest.raises(ValueError, match="non-finite"):
            Dataset(inputs=np.array([[np.nan]]), targets=np.array([0.0]))
        with pytest.raises(ValueError, match="non-empty"):
            Dataset(inputs=np.empty((0, 2)), targets=np.empty(0))

    def test_subset_keeps_metadata(self):
        ds = Dataset(inputs=np.arange(8.0).reshape(4, 2),
                     targets=np.array([0.1, -0.2, 0.3, -0.4]),
                     tag="demo", target_range=(0.0, 10.0))
        sub = ds.subset([2, 0])
        assert sub.n == 2 and sub.tag == "demo" and sub.target_range == (0.0, 10.0)
        np.testing.assert_array_equal(sub.inputs[0], [4.0, 5.0])


class TestLoadCsv:
    def test_header_file(self, tmp_path):
        path = tmp_path / "t.csv"
        path.write_text("a,b,y\n1,2,0.5\n3,4,-0.5\n")
        ds = load_csv(path)
        assert (ds.n, ds.p) == (2, 2)
        assert ds.feature_names == ("a", "b")
        np.testing.assert_array_equal(ds.targets, [0.5, -0.5])

    def test_missing_marker_drops_row(self, tmp_path):
        path = tmp_path / "t.csv"
        path.write_text("a,b,y\n1,?,0.5\n3,4,-0.5\n")
        ds = load_csv(path)
        assert ds.n == 1
        assert ds.dropped_rows == 1

    def test_non_numeric_cell_rejected(self, tmp_path):
        path = tmp_path / "t.csv"
        path.write_text("a,b,y\n1,2,0.5\nfoo,4,-0.5\n")
        with pytest.raises(ValueError, match="non-numeric"):
            load_csv(path)

    def test_target_by_name(self, tmp_path):
        path = tmp_path / "t.csv"
        path.write_text("y,a\n0.5,1\n-0.5,3\n")
        ds = load_csv(path, target_column="y")
        np.testing.assert_array_equal(ds.targets, [0.5, -0.5])
        np.testing.assert_array_equal(ds.inputs.ravel(), [1.0, 3.0])

    def test_missing_target_column(self, tmp_path):
        path = tmp_path / "t.csv"
        path.write_text("a,b\n1,2\n")
        with pytest.raises(ValueError, match="no column named"):
            load_csv(path, target_column="z")

    def test_label_map(self, tmp_path):
        path = tmp_path / "t.csv"
        path.write_text("1,M\n2,B\n")
        ds = load_csv(path, target_column=1, label_map={"M": 1.0, "B": -1.0})
        np.testing.assert_array_equal(ds.targets, [1.0, -1.0])

    def test_auto_target_scaling(self, tmp_path):
        path = tmp_path / "t.csv"
        path.write_text("x,y\n0,420\n1,500\n2,460\n")
        ds = load_csv(path)
        assert ds.target_range == (420.0, 500.0)
        np.testing.assert_allclose(ds.targets, [-1.0, 1.0, 0.0], atol=1e-12)

    def test_scaling_disabled_fails_validation(self, tmp_path):
        path = tmp_path / "t.csv"
        path.write_text("x,y\n0,420\n1,500\n")
        with pytest.raises(ValueError, match="rescale"):
            load_csv(path, scale_targets=False)

    def test_drop_cols_and_sparse(self, tmp_path):
        path = tmp_path / "t.csv"
        rows = ["id,junk,a,y"]
        for i in range(10):
            junk = "?" if i < 8 else "1"
            rows.append(f"{i},{junk},{i / 10},{(-1) ** i}")
        path.write_text("\n".join(rows) + "\n")
        ds = load_csv(path, drop_cols=("id",), drop_sparse_cols=0.5)
        assert ds.p == 1  # junk dropped as sparse, id dropped by name
        assert ds.n == 10
        assert ds.dropped_rows == 0

    def test_empty_file(self, tmp_path):
        path = tmp_path / "t.csv"
        path.write_text("")
        with pytest.raises(ValueError, match="empty"):
            load_csv(path)

    def test_out_of_range_target_index(self, tmp_path):
        path = tmp_path / "t.csv"
        path.write_text("1,2,0.5\n")
        with pytest.raises(ValueError, match="out of range"):
            load_csv(path, target_column=9)


class TestLoadMnistIdx:
    def test_round_trip(self, tmp_path):
        rng = np.random.default_rng(0)
        raw = rng.integers(0, 256, size=(3, 4, 4), dtype=np.uint8)
        raw[0, 0, 0] = 0
        raw[1, 0, 0] = 255
        labels = np.array([7, 1, 7], dtype=np.uint8)
        img_path, lab_path = write_idx_pair(tmp_path, raw, labels)
        images, got_labels = load_mnist_idx(img_path, lab_path)
        assert images.shape == (3, 4, 4)
        assert images[0, 0, 0] == 0.0
        assert images[1, 0, 0] == 1.0
        np.testing.assert_allclose(images, raw / 255.0, atol=1e-15)
        np.testing.assert_array_equal(got_labels, labels)

    def test_gzipped(self, tmp_path):
        raw = np.zeros((2, 3, 3), dtype=np.uint8)
        img_path, lab_path = write_idx_pair(tmp_path, raw, [0, 1], compress=True)
        images, labels = load_mnist_idx(img_path, lab_path)
        assert images.shape == (2, 3, 3)
        np.testing.assert_array_equal(labels, [0, 1])

    def test_bad_magic(self, tmp_path):
        raw = np.zeros((1, 2, 2), dtype=np.uint8)
        img_path, lab_path = write_idx_pair(tmp_path, raw, [0], image_magic=0x123)
        with pytest.raises(ValueError, match="magic"):
            load_mnist_idx(img_path, lab_path)

    def test_count_mismatch(self, tmp_path):
        raw = np.zeros((2, 2, 2), dtype=np.uint8)
        img_path, lab_path = write_idx_pair(tmp_path, raw, [0, 1], label_count=3)
        with pytest.raises(ValueError, match="truncated label|count"):
            load_mnist_idx(img_path, lab_path)

    def test_truncated_pixels(self, tmp_path):
        raw = np.zeros((2, 2, 2), dtype=np.uint8)
        img_path, lab_path = write_idx_pair(tmp_path, raw, [0, 1])
        data = img_path.read_bytes()
        img_path.write_bytes(data[:-3])
        with pytest.raises(ValueError, match="truncated"):
            load_mnist_idx(img_path, lab_path)


class TestFilterPair:
    def test_lower_digit_positive(self):
        rng = np.random.default_rng(1)
        images = rng.uniform(0, 1, (6, 4, 4))
        labels = np.array([3, 5, 3, 9, 5, 3])
        ds = filter_pair(images, labels, 5, 3)
        assert ds.n == 5
        np.testing.assert_array_equal(ds.targets, [1.0, -1.0, 1.0, -1.0, 1.0])
        assert ds.p == 16

    def test_features_are_dct(self):
        rng = np.random.default_rng(2)
        images = rng.uniform(0, 1, (2, 8, 8))
        ds = filter_pair(images, np.array([0, 1]), 0, 1)
        np.testing.assert_allclose(ds.inputs[0], dct2(images[0]).ravel(), atol=1e-12)

    def test_block_selection(self):
        rng = np.random.default_rng(3)
        images = rng.uniform(0, 1, (2, 8, 8))
        ds = filter_pair(images, np.array([0, 1]), 0, 1, dct_block=4)
        assert ds.p == 16

    def test_same_digit_rejected(self):
        with pytest.raises(ValueError, match="distinct"):
            filter_pair(np.zeros((1, 2, 2)), np.array([1]), 1, 1)

    def test_empty_selection_rejected(self):
        with pytest.raises(ValueError, match="no samples"):
            filter_pair(np.zeros((2, 2, 2)), np.array([4, 4]), 0, 1)


class TestGenerators:
    def test_xor_truth_table(self):
        ds = gen_logic_gate("XOR")
        np.testing.assert_array_equal(
            ds.inputs, [[-1, -1], [-1, 1], [1, -1], [1, 1]])
        np.testing.assert_array_equal(ds.targets, [-1, 1, 1, -1])

    def test_and_truth_table(self):
        np.testing.assert_array_equal(gen_logic_gate("AND").targets, [-1, -1, -1, 1])

    def test_nand_is_negated_and(self):
        np.testing.assert_array_equal(gen_logic_gate("NAND").targets,
                                      -gen_logic_gate("AND").targets)

    def test_unknown_gate(self):
        with pytest.raises(ValueError, match="unknown gate"):
            gen_logic_gate("IMPLIES")

    def test_sinc_values_match_definition(self):
        train, val, test = gen_sinc(n_train=50, n_val=10, n_test=10, seed=3)
        assert (train.n, val.n, test.n) == (50, 10, 10)
        x = train.inputs.ravel()
        expected = np.where(x == 0, 1.0, np.sin(x) / np.where(x == 0, 1.0, x))
        np.testing.assert_allclose(train.targets, expected, atol=1e-12)

    def test_sinc_noise_config(self):
        train, _, _ = gen_sinc(noise_sigma=0.01, seed=4)
        clean, _, _ = gen_sinc(noise_sigma=0.0, seed=4)
        assert train.n == 800
        assert np.std(train.targets - clean.targets) == pytest.approx(0.01, abs=0.002)

    def test_sinc_zero_is_one(self):
        assert np.sinc(0.0) == 1.0  # removable singularity handled by np.sinc

    def test_generators_reproducible(self):
        a = gen_two_moons(n=40, noise=0.05, seed=9)
        b = gen_two_moons(n=40, noise=0.05, seed=9)
        np.testing.assert_array_equal(a.inputs, b.inputs)
        np.testing.assert_array_equal(a.targets, b.targets)
        s1 = gen_sinc(seed=2)[0]
        s2 = gen_sinc(seed=2)[0]
        np.testing.assert_array_equal(s1.inputs, s2.inputs)

    def test_moons_lie_on_arcs_without_noise(self):
        ds = gen_two_moons(n=200, noise=0.0, seed=5)
        up = ds.inputs[ds.targets == 1]
        dn = ds.inputs[ds.targets == -1]
        np.testing.assert_allclose(np.hypot(up[:, 0], up[:, 1]), 1.0, atol=1e-9)
        assert np.all(up[:, 1] >= -1e-9)
        np.testing.assert_allclose(np.hypot(dn[:, 0] - 1.0, dn[:, 1] - 0.5), 1.0,
                                   atol=1e-9)
        assert np.all(dn[:, 1] <= 0.5 + 1e-9)

    def test_moons_balance(self):
        for n in (10, 11, 100, 101):
            ds = gen_two_moons(n=n, noise=0.07, seed=6)
            assert abs(np.sum(ds.targets == 1) - np.sum(ds.targets == -1)) <= 1

    def test_moons_benchmark_configuration(self):
        ds = gen_two_moons(n=1000, noise=0.07, seed=0)
        assert ds.n == 1000 and ds.p == 2


class TestRealFiles:
    """Shape checks against the published files; skipped when absent."""

    def test_mnist_standard_training_split(self, data_dir):
        from conftest import require_dataset
        require_dataset("mnist", data_dir)
        images, labels = load_mnist_idx(data_dir / "train-images-idx3-ubyte.gz",
                                        data_dir / "train-labels-idx1-ubyte.gz")
        assert images.shape == (60000, 28, 28)
        assert int(np.sum(labels == 0)) == 5923
        assert int(np.sum(labels == 1)) == 6742

    def test_ccpp_shape(self, data_dir):
        from conftest import require_dataset
        require_dataset("ccpp", data_dir)
        ds = load_csv(data_dir / "ccpp.csv")
        assert ds.p == 4
        assert ds.n == 9568

    def test_wdbc_shape(self, data_dir):
        from conftest import require_dataset
        require_dataset("wdbc", data_dir)
        ds = load_csv(data_dir / "wdbc.data", target_column=1, has_header=False,
                      drop_cols=(0,), label_map={"M": 1.0, "B": -1.0})
        assert (ds.n, ds.p) == (569, 30)
        assert int(np.sum(ds.targets == 1.0)) == 212  # malignant
        assert int(np.sum(ds.targets == -1.0)) == 357


class TestFolds:
    def test_singleton_folds(self):
        plan = kfold_plan(10, k=10, seed=0)
        assert all(f.size == 1 for f in plan.folds)

    def test_partition_property(self):
        plan = kfold_plan(25, k=4, seed=1)
        union = np.sort(np.concatenate(plan.folds))
        np.testing.assert_array_equal(union, np.arange(25))
        sizes = [f.size for f in plan.folds]
        assert max(sizes) - min(sizes) <= 1

    def test_stratified_counts(self):
        labels = np.array([1.0] * 60 + [-1.0] * 40)
        plan = kfold_plan(100, k=10, stratified=True, seed=2, labels=labels)
        for fold in plan.folds:
            pos = int(np.sum(labels[fold] == 1))
            neg = int(np.sum(labels[fold] == -1))
            assert abs(pos - 6) <= 1
            assert abs(neg - 4) <= 1
        sizes = [f.size for f in plan.folds]
        assert max(sizes) - min(sizes) <= 1

    def test_stratified_ragged_classes(self):
        rng = np.random.default_rng(3)
        labels = np.where(rng.uniform(size=53) < 0.37, 1.0, -1.0)
        plan = kfold_plan(53, k=7, stratified=True, seed=3, labels=labels)
        union = np.sort(np.concatenate(plan.folds))
        np.testing.assert_array_equal(union, np.arange(53))
        sizes = [f.size for f in plan.folds]
        assert max(sizes) - min(sizes) <= 1

    def test_k_exceeding_n_rejected(self):
        with pytest.raises(ValueError, match="exceeds"):
            kfold_plan(5, k=6)

    def test_deterministic(self):
        a = kfold_plan(30, k=5, seed=4)
        b = kfold_plan(30, k=5, seed=4)
        for fa, fb in zip(a.folds, b.folds):
            np.testing.assert_array_equal(fa, fb)

    def test_split_disjoint_and_complete(self):
        ds = gen_two_moons(n=33, noise=0.05, seed=7)
        plan = kfold_plan(33, k=5, seed=5)
        for fold in range(5):
            train, test = split(ds, plan, fold)
            assert train.n + test.n == 33
            train_rows = {tuple(r) for r in train.inputs}
            test_rows = {tuple(r) for r in test.inputs}
            assert not train_rows & test_rows

    def test_split_bad_fold(self):
        ds = gen_two_moons(n=10, noise=0.0, seed=8)
        plan = kfold_plan(10, k=5, seed=6)
        with pytest.raises(ValueError, match="fold"):
            split(ds, plan, 5)
