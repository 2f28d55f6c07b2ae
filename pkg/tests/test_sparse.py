import numpy as np
import pytest

from pawprint.errors import PawprintError
from pawprint.evalkit import ABSENT_SCORE
from pawprint.imaging import FaceImage, GalleryDataset
from pawprint.sparse import (
    SparseConfig,
    SparseModel,
    selection_size,
    sparse_classify,
    sparse_phase1,
    sparse_train,
)


def model_from_columns(columns, labels, m_fraction=0.25, ridge=0.0, num_classes=None):
    x = np.asarray(columns, dtype=float).T.copy()
    norms = np.sqrt((x * x).sum(axis=0))
    x /= norms
    labels = np.asarray(labels)
    return SparseModel(
        gallery=x,
        gallery_labels=labels,
        config=SparseConfig(m_fraction=m_fraction, ridge=ridge),
        num_classes=num_classes or int(labels.max()) + 1,
        width=x.shape[0],
        height=1,
    )


class TestPhase1:
    def test_orthonormal_gallery_identity_probe(self):
        cols = np.eye(4)
        model = model_from_columns(cols, [0, 0, 1, 1])
        a, dev, selected = sparse_phase1(model, cols[:, 0])
        assert np.allclose(a, [1.0, 0.0, 0.0, 0.0], atol=1e-12)
        assert dev[0] == pytest.approx(0.0, abs=1e-12)
        assert selected[0] == 0

    def test_selection_size_floor(self):
        model = model_from_columns(np.eye(4), [0, 0, 1, 1], m_fraction=0.25)
        assert selection_size(model) == 1
        model = model_from_columns(np.eye(4), [0, 0, 1, 1], m_fraction=0.8)
        assert selection_size(model) == 3

    def test_two_face_example_by_hand(self):
        cols = np.array([[1.0, 0.0], [0.0, 1.0]]).T  # columns (1,0) and (0,1)
        model = model_from_columns(cols.T, [0, 1])
        y = np.array([0.8, 0.6])
        a, dev, selected = sparse_phase1(model, y)
        assert np.allclose(a, [0.8, 0.6], atol=1e-12)
        assert dev[0] == pytest.approx(0.36, abs=1e-12)
        assert dev[1] == pytest.approx(0.64, abs=1e-12)
        assert selected.tolist() == [0]

    def test_deviations_nonnegative(self):
        rng = np.random.default_rng(0)
        cols = rng.normal(size=(5, 6))
        model = model_from_columns(cols.T, [0, 0, 1, 1, 2, 2], ridge=1e-6)
        _, dev, _ = sparse_phase1(model, rng.normal(size=5))
        assert np.all(dev >= 0.0)

    def test_ties_break_to_lower_index(self):
        cols = np.array([[1.0, 0.0], [1.0, 0.0], [0.0, 1.0]]).T
        model = model_from_columns(cols.T, [0, 1, 2], m_fraction=0.67, ridge=1e-9)
        y = np.array([1.0, 0.0])
        _, dev, selected = sparse_phase1(model, y)
        assert dev[0] == pytest.approx(dev[1], abs=1e-12)
        assert selected.tolist()[:2] == [0, 1]


class TestClassify:
    def test_two_class_hand_computation(self):
        model = model_from_columns(np.eye(2), [0, 1], m_fraction=1.0)
        scores = sparse_classify(model, np.array([1.0, 0.0]))
        assert scores[0] == pytest.approx(0.0, abs=1e-12)
        assert scores[1] == pytest.approx(-1.0, abs=1e-12)

    def test_selection_from_single_class_leaves_sentinel(self):
        cols = np.array([[1.0, 0.0], [0.9, 0.1], [0.0, 1.0]])
        model = model_from_columns(cols, [0, 0, 1], m_fraction=0.4, ridge=1e-9)
        scores = sparse_classify(model, np.array([1.0, 0.0]))
        assert scores[1] == ABSENT_SCORE
        assert scores[0] > scores[1]

    def test_orthogonal_probe_ties_all_classes(self):
        cols = np.array([[1.0, 0.0, 0.0], [0.0, 1.0, 0.0]])
        model = model_from_columns(cols, [0, 1], m_fraction=1.0, ridge=1e-6)
        y = np.array([0.0, 0.0, 1.0])
        scores = sparse_classify(model, y)
        assert scores[0] == pytest.approx(scores[1], abs=1e-12)
        assert scores[0] == pytest.approx(-1.0, abs=1e-9)
        assert int(np.argmax(scores)) == 0  # argmax tie -> lower index

    def test_scale_equivariance_of_deviations(self):
        rng = np.random.default_rng(1)
        cols = rng.normal(size=(6, 4))
        model = model_from_columns(cols.T, [0, 0, 1, 1], m_fraction=1.0, ridge=0.0)
        y = rng.normal(size=6)
        base = sparse_classify(model, y)
        scaled = sparse_classify(model, 3.0 * y)
        assert np.allclose(scaled, 9.0 * base, rtol=1e-9)
        assert int(np.argmax(scaled)) == int(np.argmax(base))

    def test_full_selection_contributions_sum_to_reconstruction(self):
        rng = np.random.default_rng(2)
        cols = rng.normal(size=(8, 5))
        labels = np.array([0, 0, 1, 2, 2])
        model = model_from_columns(cols.T, labels, m_fraction=1.0, ridge=0.0)
        y = rng.normal(size=8)
        a, _, selected = sparse_phase1(model, y)
        assert len(selected) == 5
        total = np.zeros(8)
        for cls in range(3):
            contribution = model.gallery[:, labels == cls] @ a[labels == cls]
            total += contribution
        assert np.abs(total - model.gallery @ a).max() <= 1e-9


class TestOracleEquivalence:
    def direct_transcription(self, gallery, labels, y, m_fraction, ridge, num_classes):
        """Independent implementation of the two-phase formulas using the
        normal equations."""

        def ridge_solve(x, rhs):
            g = x.T @ x + ridge * np.eye(x.shape[1])
            return np.linalg.solve(g, x.T @ rhs)

        a = ridge_solve(gallery, y)
        dev = np.array(
            [np.sum((y - a[i] * gallery[:, i]) ** 2) for i in range(gallery.shape[1])]
        )
        m = max(1, int(np.floor(m_fraction * gallery.shape[1])))
        order = sorted(range(len(dev)), key=lambda i: (dev[i], i))[:m]
        sub = gallery[:, order]
        a2 = ridge_solve(sub, y)
        scores = np.full(num_classes, ABSENT_SCORE)
        for cls in sorted(set(labels[i] for i in order)):
            members = [j for j, i in enumerate(order) if labels[i] == cls]
            contribution = sub[:, members] @ a2[members]
            scores[cls] = -np.sum((y - contribution) ** 2)
        return scores

    def test_matches_direct_formulas(self):
        rng = np.random.default_rng(9)
        for trial in range(100):
            n = int(rng.integers(2, 7))
            d = int(rng.integers(2, 5))
            cols = rng.uniform(-1, 1, size=(d, n))
            labels = rng.integers(0, min(3, n), size=n)
            labels[0] = 0
            num_classes = 3
            m_fraction = float(rng.choice([0.25, 0.5, 1.0]))
            model = SparseModel(
                gallery=cols / np.sqrt((cols * cols).sum(axis=0)),
                gallery_labels=labels,
                config=SparseConfig(m_fraction=m_fraction, ridge=1e-6),
                num_classes=num_classes,
                width=d,
                height=1,
            )
            y = rng.uniform(-1, 1, size=d)
            got = sparse_classify(model, y)
            expected = self.direct_transcription(
                model.gallery, labels, y, m_fraction, 1e-6, num_classes
            )
            assert np.abs(got - expected).max() <= 1e-8


class TestTrain:
    def test_columns_unit_norm(self, small_gallery):
        model = sparse_train(small_gallery)
        norms = np.sqrt((model.gallery**2).sum(axis=0))
        assert np.abs(norms - 1.0).max() <= 1e-9

    def test_needs_two_images(self):
        ds = GalleryDataset(
            individuals=["a"],
            samples=[(FaceImage(pixels=np.full((2, 2), 0.5), source_id="a/x"), 0)],
            name="tiny",
        )
        with pytest.raises(PawprintError):
            sparse_train(ds)

    def test_zero_image_rejected(self):
        ds = GalleryDataset(
            individuals=["a", "b"],
            samples=[
                (FaceImage(pixels=np.zeros((2, 2)), source_id="a/x"), 0),
                (FaceImage(pixels=np.full((2, 2), 0.5), source_id="b/x"), 1),
            ],
            name="tiny",
        )
        with pytest.raises(PawprintError, match="zero"):
            sparse_train(ds)
