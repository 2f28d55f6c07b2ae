import numpy as np
import pytest

from pawprint.errors import PawprintError
from pawprint.svm import (
    SvmConfig,
    SvmModel,
    softmax_probabilities,
    svm_predict,
    svm_scores,
    svm_train,
)


def hand_model(weights, biases):
    weights = np.asarray(weights, dtype=float)
    return SvmModel(
        weights=weights,
        biases=np.asarray(biases, dtype=float),
        classes=np.arange(weights.shape[0]),
        feature_dim=weights.shape[1],
        config=SvmConfig(),
    )


def xor_linear_oracle():
    """Best training accuracy any affine separator reaches on 4-point XOR,
    by brute force over a dense grid of directions and thresholds."""
    points = np.array([[0.0, 0.0], [1.0, 1.0], [0.0, 1.0], [1.0, 0.0]])
    labels = np.array([0, 0, 1, 1])
    best = 0.0
    for angle in np.linspace(0, np.pi, 721):
        direction = np.array([np.cos(angle), np.sin(angle)])
        proj = points @ direction
        for threshold in np.concatenate([proj - 1e-6, proj + 1e-6]):
            pred = (proj > threshold).astype(int)
            best = max(best, (pred == labels).mean(), (1 - pred == labels).mean())
    return best


class TestTraining:
    def test_separable_one_dimensional(self):
        features = [np.array([-1.0]), np.array([1.0])]
        model = svm_train(features, [0, 1], SvmConfig(c=10.0))
        assert svm_predict(model, features[0]) == 0
        assert svm_predict(model, features[1]) == 1
        # the decision difference changes sign inside (-1, 1)
        diff = lambda x: svm_scores(model, np.array([x]))[1] - svm_scores(model, np.array([x]))[0]
        assert diff(-1.0) < 0 < diff(1.0)

    def test_contradictory_duplicate_point_stays_finite(self):
        features = [np.array([0.5, 0.5]), np.array([0.5, 0.5])]
        model = svm_train(features, [0, 1], SvmConfig(c=5.0, max_iterations=20))
        assert np.all(np.isfinite(model.weights))
        assert np.all(np.isfinite(model.biases))

    def test_xor_cannot_exceed_linear_oracle(self):
        oracle = xor_linear_oracle()
        assert oracle == 0.75
        points = [
            np.array([0.0, 0.0]),
            np.array([1.0, 1.0]),
            np.array([0.0, 1.0]),
            np.array([1.0, 0.0]),
        ]
        labels = [0, 0, 1, 1]
        model = svm_train(points, labels, SvmConfig(c=1e5, max_iterations=200))
        accuracy = np.mean([svm_predict(model, p) == l for p, l in zip(points, labels)])
        assert accuracy <= oracle

    def test_separable_fixture_reaches_full_accuracy(self):
        rng = np.random.default_rng(0)
        centers = np.array([[0.0, 0.0], [1.0, 0.0], [0.5, 1.0]])
        features, labels = [], []
        for ci, center in enumerate(centers):
            for _ in range(8):
                features.append(center + rng.uniform(-0.2, 0.2, size=2))
                labels.append(ci)
        model = svm_train(features, labels, SvmConfig(c=1e5))
        assert all(svm_predict(model, f) == l for f, l in zip(features, labels))

    def test_convergence_diagnostics_exposed(self):
        features = [np.array([-1.0]), np.array([-0.9]), np.array([0.9]), np.array([1.0])]
        model = svm_train(features, [0, 0, 1, 1], SvmConfig(c=1.0, tolerance=1e-6))
        assert len(model.diagnostics) == 2
        for diag in model.diagnostics:
            assert diag.converged
            assert diag.max_kkt_violation < 1e-6

    def test_deterministic_retraining(self):
        rng = np.random.default_rng(1)
        features = [rng.normal(size=5) for _ in range(12)]
        labels = rng.integers(0, 3, size=12).tolist()
        labels[:3] = [0, 1, 2]
        a = svm_train(features, labels, SvmConfig(c=2.0))
        b = svm_train(features, labels, SvmConfig(c=2.0))
        assert np.array_equal(a.weights, b.weights)
        assert np.array_equal(a.biases, b.biases)

    def test_single_class_rejected(self):
        with pytest.raises(PawprintError):
            svm_train([np.zeros(2), np.ones(2)], [1, 1])

    def test_dimension_mismatch_rejected(self):
        with pytest.raises(PawprintError):
            svm_train([np.zeros(2), np.ones(3)], [0, 1])


class TestScores:
    def test_hand_built_scores(self):
        model = hand_model([[1.0, 0.0], [0.0, 1.0]], [0.0, 0.0])
        scores = svm_scores(model, np.array([2.0, 1.0]))
        assert np.array_equal(scores, [2.0, 1.0])
        assert svm_predict(model, np.array([2.0, 1.0])) == 0

    def test_zero_weight_model_returns_biases(self):
        model = hand_model(np.zeros((3, 2)), [0.3, -0.1, 0.2])
        scores = svm_scores(model, np.array([5.0, -7.0]))
        assert np.array_equal(scores, [0.3, -0.1, 0.2])

    def test_deep_margin_point_scores_highest_for_its_class(self):
        features = [np.array([-2.0, 0.0]), np.array([2.0, 0.0])]
        model = svm_train(features, [0, 1], SvmConfig(c=100.0))
        scores = svm_scores(model, np.array([-5.0, 0.0]))
        assert int(np.argmax(scores)) == 0

    def test_linearity_without_bias(self):
        model = hand_model([[1.0, 2.0], [3.0, -1.0]], [0.0, 0.0])
        x = np.array([0.5, -0.25])
        y = np.array([1.5, 2.0])
        lhs = svm_scores(model, 2.0 * x + 3.0 * y)
        rhs = 2.0 * svm_scores(model, x) + 3.0 * svm_scores(model, y)
        assert np.allclose(lhs, rhs, atol=1e-12)

    def test_argmax_tie_goes_to_lowest_class(self):
        model = hand_model([[1.0], [1.0]], [0.0, 0.0])
        assert svm_predict(model, np.array([2.0])) == 0

    def test_dimension_mismatch_rejected(self):
        model = hand_model([[1.0, 0.0]], [0.0])
        with pytest.raises(PawprintError):
            svm_scores(model, np.zeros(3))


class TestSoftmax:
    def test_sums_to_one_and_orders_like_scores(self):
        p = softmax_probabilities(np.array([2.0, 1.0, -1.0]))
        assert p.sum() == pytest.approx(1.0)
        assert p[0] > p[1] > p[2]

    def test_survives_absent_sentinel(self):
        from pawprint.evalkit import ABSENT_SCORE

        p = softmax_probabilities(np.array([1.0, ABSENT_SCORE]))
        assert p[0] == pytest.approx(1.0)
        assert p[1] == 0.0
