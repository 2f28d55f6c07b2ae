"""Two-phase sparse-reconstruction classifier.

Phase 1 reconstructs the probe as a linear combination of all gallery
faces and ranks faces by their single-face deviation; phase 2 re-solves on
the nearest quarter (by default) and scores each class by the deviation of
its summed contribution. Gallery columns are L2-normalized so bright
images cannot dominate the coefficients; callers are expected to normalize
probes the same way (the operations themselves do not, which keeps the
deviation scale-equivariance visible).
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import PawprintError
from .evalkit import ABSENT_SCORE
from .imaging import GalleryDataset
from .numerics import DEFAULT_RIDGE, solve_least_squares

DEFAULT_M_FRACTION = 0.25


@dataclass(frozen=True)
class SparseConfig:
    m_fraction: float = DEFAULT_M_FRACTION
    ridge: float = DEFAULT_RIDGE

    def __post_init__(self):
        if not 0.0 < self.m_fraction <= 1.0:
            raise PawprintError(f"m_fraction must be in (0, 1], got {self.m_fraction}")
        if self.ridge < 0.0:
            raise PawprintError("ridge must be nonnegative")


@dataclass(frozen=True)
class SparseModel:
    gallery: np.ndarray  # d x n, L2-normalized columns
    gallery_labels: np.ndarray  # (n,)
    config: SparseConfig
    num_classes: int
    width: int
    height: int


def sparse_train(train: GalleryDataset, config: SparseConfig = SparseConfig()) -> SparseModel:
    n = len(train)
    if n < 2:
        raise PawprintError(f"sparse classifier needs at least 2 gallery images, got {n}")
    x = train.pixel_matrix().T.copy()  # d x n
    norms = np.sqrt((x * x).sum(axis=0))
    if np.any(norms < 1e-12):
        raise PawprintError("gallery contains an all-zero image; cannot normalize")
    x /= norms
    width, height = train.image_size()
    return SparseModel(
        gallery=x,
        gallery_labels=train.labels(),
        config=config,
        num_classes=train.num_classes,
        width=width,
        height=height,
    )


def selection_size(model: SparseModel) -> int:
    n = model.gallery.shape[1]
    return max(1, int(np.floor(model.config.m_fraction * n)))


def sparse_phase1(model: SparseModel, probe: np.ndarray):
    """Coefficients, per-face deviations and the M nearest face indices.

    deviation_i = ||y - a_i x_i||^2; the M smallest win, ties going to the
    lower index.
    """
    y = np.asarray(probe, dtype=np.float64).ravel()
    x = model.gallery
    if y.shape[0] != x.shape[0]:
        raise PawprintError(
            f"probe length {y.shape[0]} does not match gallery dimension {x.shape[0]}"
        )
    a = solve_least_squares(x, y, model.config.ridge)
    residuals = y[:, None] - x * a[None, :]
    deviations = (residuals * residuals).sum(axis=0)
    m = selection_size(model)
    selected = np.argsort(deviations, kind="stable")[:m]
    return a, deviations, selected


def sparse_classify(model: SparseModel, probe: np.ndarray) -> np.ndarray:
    """Per-class scores: negated deviation of each class's phase-2
    contribution; classes outside the selection get the absent sentinel.
    """
    y = np.asarray(probe, dtype=np.float64).ravel()
    _, _, selected = sparse_phase1(model, y)
    sub = model.gallery[:, selected]
    a2 = solve_least_squares(sub, y, model.config.ridge)
    sub_labels = model.gallery_labels[selected]

    scores = np.full(model.num_classes, ABSENT_SCORE)
    for cls in np.unique(sub_labels):
        mask = sub_labels == cls
        contribution = sub[:, mask] @ a2[mask]
        deviation = float(((y - contribution) ** 2).sum())
        scores[cls] = -deviation
    return scores
