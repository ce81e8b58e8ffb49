from __future__ import annotations

import json

import numpy as np
import pytest

from dbmmd.datamodel import LabeledDomain, UnlabeledDomain
from dbmmd.errors import FormatError
from dbmmd.io import atomic_write_text, load_features, save_features


@pytest.fixture
def awkward_features():
    rng = np.random.default_rng(7)
    x = rng.normal(size=(3, 5))
    # values whose decimal forms stress the round-trip
    x[0, 0] = 1.0 / 3.0
    x[1, 1] = 1e-17
    x[2, 2] = -0.1
    return x


class TestCsv:
    def test_roundtrip_bitwise(self, tmp_path, awkward_features):
        path = tmp_path / "feat.csv"
        save_features(path, awkward_features)
        dom = load_features(path)
        assert isinstance(dom, UnlabeledDomain)
        # repr round-trips doubles exactly, so equality is bitwise
        assert np.array_equal(dom.features, awkward_features)

    def test_roundtrip_with_labels(self, tmp_path, awkward_features):
        path = tmp_path / "feat.csv"
        labels = np.array([0, 1, 2, 1, 0])
        save_features(path, awkward_features, labels)
        dom = load_features(path)
        assert isinstance(dom, LabeledDomain)
        assert np.array_equal(dom.features, awkward_features)
        assert np.array_equal(dom.labels, labels)
        assert dom.label_values == (0, 1, 2)

    def test_layout_one_row_per_sample(self, tmp_path):
        path = tmp_path / "feat.csv"
        save_features(path, np.array([[1.0, 2.0], [3.0, 4.0], [5.0, 6.0]]))
        lines = path.read_text().strip().split("\n")
        assert lines[0] == "f0,f1,f2"
        assert lines[1] == "1.0,3.0,5.0"
        assert lines[2] == "2.0,4.0,6.0"
        assert len(lines) == 3

    def test_noncontiguous_labels_remapped(self, tmp_path):
        path = tmp_path / "feat.csv"
        save_features(path, np.zeros((2, 4)), np.array([9, 3, 7, 3]))
        dom = load_features(path)
        assert np.array_equal(dom.labels, [2, 0, 1, 0])
        assert dom.label_values == (3, 7, 9)

    def test_hand_written_file(self, tmp_path):
        path = tmp_path / "hand.csv"
        path.write_text("f0,f1,label\n0.5,1.5,4\n2.5,3.5,2\n")
        dom = load_features(path)
        assert dom.features.shape == (2, 2)
        assert np.array_equal(dom.features[:, 0], [0.5, 1.5])
        assert np.array_equal(dom.labels, [1, 0])
        assert dom.label_values == (2, 4)

    def test_empty_file(self, tmp_path):
        path = tmp_path / "e.csv"
        path.write_text("")
        with pytest.raises(FormatError, match="empty"):
            load_features(path)

    def test_header_only(self, tmp_path):
        path = tmp_path / "h.csv"
        path.write_text("f0,f1\n")
        with pytest.raises(FormatError, match="no samples"):
            load_features(path)

    def test_ragged_row(self, tmp_path):
        path = tmp_path / "r.csv"
        path.write_text("f0,f1\n1.0,2.0\n3.0\n")
        with pytest.raises(FormatError, match="columns"):
            load_features(path)

    def test_malformed_feature(self, tmp_path):
        path = tmp_path / "m.csv"
        path.write_text("f0,f1\n1.0,banana\n")
        with pytest.raises(FormatError, match="malformed feature"):
            load_features(path)

    def test_malformed_label(self, tmp_path):
        path = tmp_path / "ml.csv"
        path.write_text("f0,label\n1.0,two\n")
        with pytest.raises(FormatError, match="malformed label"):
            load_features(path)

    def test_non_finite_rejected(self, tmp_path):
        path = tmp_path / "nan.csv"
        path.write_text("f0,f1\n1.0,nan\n")
        with pytest.raises(FormatError, match="non-finite"):
            load_features(path)

    def test_missing_file(self, tmp_path):
        with pytest.raises(FormatError, match="no such file"):
            load_features(tmp_path / "ghost.csv")


class TestRaw:
    def test_roundtrip_bitwise(self, tmp_path, awkward_features):
        path = tmp_path / "feat.f64"
        labels = np.array([1, 0, 1, 0, 1])
        save_features(path, awkward_features, labels)
        dom = load_features(path)
        assert np.array_equal(dom.features, awkward_features)
        assert np.array_equal(dom.labels, labels)

    def test_sidecar_contents(self, tmp_path):
        path = tmp_path / "feat.f64"
        save_features(path, np.zeros((3, 7)))
        sidecar = json.loads((tmp_path / "feat.json").read_text())
        assert sidecar == {"rows": 7, "cols": 3}

    def test_blob_is_row_major_samples(self, tmp_path):
        path = tmp_path / "feat.f64"
        x = np.array([[1.0, 2.0], [3.0, 4.0]])  # dim 2, samples 2
        save_features(path, x)
        blob = np.frombuffer(path.read_bytes(), dtype="<f8")
        # sample 0 is (1, 3), sample 1 is (2, 4)
        assert np.array_equal(blob, [1.0, 3.0, 2.0, 4.0])

    def test_missing_sidecar(self, tmp_path):
        path = tmp_path / "feat.f64"
        path.write_bytes(b"\x00" * 16)
        with pytest.raises(FormatError, match="sidecar"):
            load_features(path)

    def test_malformed_sidecar_json(self, tmp_path):
        path = tmp_path / "feat.f64"
        path.write_bytes(b"\x00" * 16)
        (tmp_path / "feat.json").write_text("{nope")
        with pytest.raises(FormatError, match="JSON"):
            load_features(path)

    def test_sidecar_needs_rows_cols(self, tmp_path):
        path = tmp_path / "feat.f64"
        path.write_bytes(b"\x00" * 16)
        (tmp_path / "feat.json").write_text('{"rows": 2}')
        with pytest.raises(FormatError, match="rows and cols"):
            load_features(path)

    def test_size_mismatch(self, tmp_path):
        path = tmp_path / "feat.f64"
        path.write_bytes(b"\x00" * 24)
        (tmp_path / "feat.json").write_text('{"rows": 2, "cols": 2}')
        with pytest.raises(FormatError, match="size"):
            load_features(path)

    def test_labels_length_mismatch(self, tmp_path):
        path = tmp_path / "feat.f64"
        path.write_bytes(b"\x00" * 32)
        (tmp_path / "feat.json").write_text('{"rows": 2, "cols": 2, "labels": [0]}')
        with pytest.raises(FormatError, match="labels"):
            load_features(path)


class TestFormatInference:
    def test_unknown_suffix_needs_fmt(self, tmp_path):
        with pytest.raises(FormatError, match="infer"):
            load_features(tmp_path / "feat.dat")

    def test_explicit_fmt_overrides_suffix(self, tmp_path):
        path = tmp_path / "feat.dat"
        save_features(path, np.ones((2, 3)), fmt="csv")
        dom = load_features(path, fmt="csv")
        assert dom.features.shape == (2, 3)

    def test_bad_fmt_value(self, tmp_path):
        with pytest.raises(FormatError):
            save_features(tmp_path / "x.csv", np.ones((2, 2)), fmt="parquet")

    def test_save_rejects_bad_shapes(self, tmp_path):
        with pytest.raises(FormatError):
            save_features(tmp_path / "x.csv", np.ones(4))
        with pytest.raises(FormatError):
            save_features(tmp_path / "x.csv", np.ones((2, 3)), labels=np.array([0, 1]))


class TestAtomicWrite:
    def test_writes_and_leaves_no_temp(self, tmp_path):
        path = tmp_path / "deep" / "nested" / "out.txt"
        atomic_write_text(path, "hello\n")
        assert path.read_text() == "hello\n"
        leftovers = [p for p in path.parent.iterdir() if p.name != "out.txt"]
        assert leftovers == []

    def test_overwrites_existing(self, tmp_path):
        path = tmp_path / "out.txt"
        atomic_write_text(path, "one")
        atomic_write_text(path, "two")
        assert path.read_text() == "two"
