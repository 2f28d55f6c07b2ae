import numpy as np
import pytest

from pawprint.deepfeat import (
    bind_features,
    dataset_key,
    read_feature_file,
    woof_train,
    write_feature_file,
)
from pawprint.errors import ParseError, PawprintError
from pawprint.svm import svm_predict


def write(path, text):
    path.write_text(text, encoding="utf-8")
    return path


class TestReader:
    def test_two_valid_records(self, tmp_path):
        path = write(
            tmp_path / "ok.dogfeat",
            "DOGFEAT 1 2 3\nrex\timg1\t1.0 2.0 3.0\nfido\timg2\t-1.5 0.25 4e-3\n",
        )
        ff = read_feature_file(path)
        assert ff.count == 2 and ff.dim == 3
        assert ff.records[0].individual_label == "rex"
        assert np.allclose(ff.records[1].vector, [-1.5, 0.25, 0.004])

    def test_short_row_names_line(self, tmp_path):
        path = write(
            tmp_path / "short.dogfeat",
            "DOGFEAT 1 1 3\nrex\timg1\t1.0 2.0\n",
        )
        with pytest.raises(ParseError, match="line 2"):
            read_feature_file(path)

    def test_empty_file_missing_header(self, tmp_path):
        path = write(tmp_path / "empty.dogfeat", "")
        with pytest.raises(ParseError, match="header"):
            read_feature_file(path)

    def test_bad_magic(self, tmp_path):
        path = write(tmp_path / "bad.dogfeat", "CATFEAT 1 0 3\n")
        with pytest.raises(ParseError, match="line 1"):
            read_feature_file(path)

    def test_bad_version(self, tmp_path):
        path = write(tmp_path / "v9.dogfeat", "DOGFEAT 9 0 3\n")
        with pytest.raises(ParseError, match="version"):
            read_feature_file(path)

    def test_duplicate_key(self, tmp_path):
        path = write(
            tmp_path / "dup.dogfeat",
            "DOGFEAT 1 2 1\nrex\timg1\t1.0\nrex\timg1\t2.0\n",
        )
        with pytest.raises(ParseError, match="duplicate"):
            read_feature_file(path)

    def test_non_finite_value_reports_column(self, tmp_path):
        path = write(
            tmp_path / "nan.dogfeat",
            "DOGFEAT 1 1 3\nrex\timg1\t1.0 nan 3.0\n",
        )
        with pytest.raises(ParseError, match="column 2"):
            read_feature_file(path)

    def test_bad_number_reports_column(self, tmp_path):
        path = write(
            tmp_path / "junk.dogfeat",
            "DOGFEAT 1 1 2\nrex\timg1\t1.0 abc\n",
        )
        with pytest.raises(ParseError, match="column 2"):
            read_feature_file(path)

    def test_count_mismatch(self, tmp_path):
        path = write(tmp_path / "count.dogfeat", "DOGFEAT 1 2 1\nrex\timg1\t1.0\n")
        with pytest.raises(ParseError, match="declares 2"):
            read_feature_file(path)

    def test_comment_lines_ignored(self, tmp_path):
        path = write(
            tmp_path / "comments.dogfeat",
            "DOGFEAT 1 1 2\n# model: whatever\n# layer: fc7\nrex\timg1\t0.5 0.5\n",
        )
        assert read_feature_file(path).count == 1


class TestWriterRoundTrip:
    def test_bit_exact_roundtrip(self, tmp_path):
        rng = np.random.default_rng(0)
        vectors = rng.normal(size=(5, 7)) * 10.0 ** rng.integers(-8, 8, size=(5, 1))
        records = [(f"dog{i}", f"img{i}", vectors[i]) for i in range(5)]
        path = tmp_path / "rt.dogfeat"
        write_feature_file(path, records, 7, comments=["roundtrip fixture"])
        ff = read_feature_file(path)
        for i, rec in enumerate(ff.records):
            assert np.array_equal(rec.vector, vectors[i])

    def test_dim_mismatch_rejected(self, tmp_path):
        with pytest.raises(PawprintError):
            write_feature_file(tmp_path / "x.dogfeat", [("a", "b", np.zeros(2))], 3)


class TestBind:
    def make_file(self, tmp_path, keys, dim=2, extra=0):
        rows = [(label, image_id, np.arange(dim) + i) for i, (label, image_id) in enumerate(keys)]
        for j in range(extra):
            rows.append((f"ghost{j}", "x", np.zeros(dim)))
        path = tmp_path / "bind.dogfeat"
        write_feature_file(path, rows, dim)
        return read_feature_file(path)

    def test_exact_match_preserves_dataset_order(self, tmp_path, small_gallery):
        keys = [dataset_key(img.source_id) for img, _ in small_gallery.samples]
        ff = self.make_file(tmp_path, keys)
        features, labels = bind_features(ff, small_gallery)
        assert len(features) == len(small_gallery)
        assert np.array_equal(labels, small_gallery.labels())
        # order pure function of dataset, not file order
        assert features[0][1] == 1.0  # first key got vector [0, 1]

    def test_missing_record_names_key(self, tmp_path, small_gallery):
        keys = [dataset_key(img.source_id) for img, _ in small_gallery.samples][1:]
        ff = self.make_file(tmp_path, keys)
        with pytest.raises(PawprintError, match="dog00/shot00"):
            bind_features(ff, small_gallery)

    def test_extras_warn_with_count(self, tmp_path, small_gallery):
        keys = [dataset_key(img.source_id) for img, _ in small_gallery.samples]
        ff = self.make_file(tmp_path, keys, extra=5)
        with pytest.warns(UserWarning, match="5 unmatched"):
            bind_features(ff, small_gallery)


class TestWoof:
    def test_separable_clusters_train_perfectly(self):
        rng = np.random.default_rng(1)
        features = [np.array([0.0, 0.0]) + rng.uniform(-0.1, 0.1, 2) for _ in range(6)]
        features += [np.array([5.0, 5.0]) + rng.uniform(-0.1, 0.1, 2) for _ in range(6)]
        labels = [0] * 6 + [1] * 6
        model = woof_train(features, labels)
        assert model.config.c == 1.0
        assert all(svm_predict(model, f) == l for f, l in zip(features, labels))

    def test_single_class_rejected(self):
        with pytest.raises(PawprintError):
            woof_train([np.zeros(2), np.ones(2)], [0, 0])
