"""One-vs-rest linear SVM trained by dual coordinate descent.

Each binary subproblem minimizes the L1-hinge dual with box constraint
[0, C], sweeping samples in a seeded random permutation per epoch and
maintaining the primal weights incrementally (no kernel matrix is stored).
The bias is learned as an extra always-one feature. Scores are raw
decision values; the softmax helper exists only for display.
"""

from __future__ import annotations

import warnings
from dataclasses import dataclass, field

import numpy as np

from . import kernels
from .errors import PawprintError

BARK_SVM_C = 1e5
WOOF_SVM_C = 1.0


@dataclass(frozen=True)
class SvmConfig:
    c: float = 1.0
    tolerance: float = 1e-4
    max_iterations: int = 1000
    seed: int = 0

    def __post_init__(self):
        if self.c <= 0.0:
            raise PawprintError("C must be positive")
        if self.tolerance <= 0.0:
            raise PawprintError("tolerance must be positive")


@dataclass(frozen=True)
class ClassDiagnostics:
    converged: bool
    epochs: int
    max_kkt_violation: float


@dataclass(frozen=True)
class SvmModel:
    weights: np.ndarray  # (class_count, feature_dim)
    biases: np.ndarray  # (class_count,)
    classes: np.ndarray  # original labels, ascending
    feature_dim: int
    config: SvmConfig
    diagnostics: tuple[ClassDiagnostics, ...] = field(default=())

    @property
    def class_count(self) -> int:
        return len(self.classes)


def _as_feature_matrix(features) -> np.ndarray:
    rows = [np.asarray(f, dtype=np.float64).ravel() for f in features]
    dims = {r.shape[0] for r in rows}
    if len(dims) > 1:
        raise PawprintError(f"feature vectors disagree on dimension: {sorted(dims)}")
    return np.stack(rows)


def svm_train(features, labels, config: SvmConfig = SvmConfig()) -> SvmModel:
    """Train one binary hinge-loss problem per class (one-vs-rest)."""
    x = _as_feature_matrix(features)
    y = np.asarray(labels)
    n, d = x.shape
    if y.shape[0] != n:
        raise PawprintError(f"{n} feature vectors but {y.shape[0]} labels")
    classes = np.unique(y)
    if len(classes) < 2:
        raise PawprintError("svm needs at least 2 classes")
    if not np.isfinite(x).all():
        raise PawprintError("features contain non-finite values")

    aug = np.ascontiguousarray(np.hstack([x, np.ones((n, 1))]))
    qdiag = (aug * aug).sum(axis=1)

    weights = np.zeros((len(classes), d))
    biases = np.zeros(len(classes))
    diags = []
    for j, cls in enumerate(classes):
        yb = np.where(y == cls, 1.0, -1.0)
        alpha = np.zeros(n)
        w = np.zeros(d + 1)
        rng = np.random.default_rng(np.random.SeedSequence((config.seed, j)))
        converged = False
        violation = np.inf
        epoch = 0
        for epoch in range(1, config.max_iterations + 1):
            perm = np.ascontiguousarray(rng.permutation(n), dtype=np.intp)
            violation = kernels.dcd_epoch(aug, yb, qdiag, alpha, w, config.c, perm)
            if violation < config.tolerance:
                converged = True
                break
        if not converged:
            warnings.warn(
                f"svm class {cls!r} stopped after {config.max_iterations} epochs "
                f"with KKT violation {violation:.3g}; returning best iterate",
                stacklevel=2,
            )
        weights[j] = w[:d]
        biases[j] = w[d]
        diags.append(ClassDiagnostics(converged, epoch, float(violation)))

    return SvmModel(
        weights=weights,
        biases=biases,
        classes=classes,
        feature_dim=d,
        config=config,
        diagnostics=tuple(diags),
    )


def svm_scores(model: SvmModel, x) -> np.ndarray:
    """Raw decision values w_c . x + b_c, one per class."""
    x = np.asarray(x, dtype=np.float64).ravel()
    if x.shape[0] != model.feature_dim:
        raise PawprintError(
            f"feature dimension {x.shape[0]} does not match model {model.feature_dim}"
        )
    return model.weights @ x + model.biases


def svm_predict(model: SvmModel, x):
    """Label with the highest score; ties go to the lowest class index."""
    return model.classes[int(np.argmax(svm_scores(model, x)))]


def softmax_probabilities(scores: np.ndarray) -> np.ndarray:
    """Display-only pseudo-probabilities; ranking always uses raw scores."""
    s = np.asarray(scores, dtype=np.float64)
    shifted = s - s.max()
    e = np.exp(shifted)
    return e / e.sum()
