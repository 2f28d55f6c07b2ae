"""Eigenfaces, Fisherfaces and LBPH baselines.

Each recognizer trains to an immutable model and scores probes into a
per-class vector where higher is better (distances are negated). Classes
with no gallery sample receive the shared absent-class sentinel so every
method ranks identically downstream.
"""

from __future__ import annotations

import logging
import warnings
from dataclasses import dataclass

import numpy as np

from . import kernels
from .errors import PawprintError
from .evalkit import ABSENT_SCORE
from .imaging import FaceImage, GalleryDataset
from .numerics import gram_matrix, sym_eigen

log = logging.getLogger(__name__)

DEFAULT_EIGENFACE_COMPONENTS = 80
DEFAULT_LBPH_GRID = (8, 8)

# Relative eigenvalue cutoff below which a principal direction is treated
# as numerically zero variance.
_RANK_RTOL = 1e-10


def _snapshot_pca(centered: np.ndarray, max_components: int):
    """Principal directions of mean-centered rows via the N x N Gram matrix.

    Returns (basis d x K, eigenvalues K). Only directions with eigenvalue
    above the relative rank cutoff survive; K <= max_components.
    """
    n = centered.shape[0]
    g = gram_matrix(centered.T)  # N x N
    dec = sym_eigen(g)
    lam = dec.eigenvalues
    cutoff = max(lam[0], 0.0) * _RANK_RTOL
    available = int(np.sum(lam > cutoff))
    if available == 0:
        raise PawprintError("training images have zero variance")
    keep = min(max_components, available, n - 1)
    u = dec.eigenvectors[:, :keep]
    basis = centered.T @ u
    basis /= np.sqrt(lam[:keep])
    return basis, lam[:keep]


def _nearest_class_scores(projections, labels, num_classes, z):
    """Negated min Euclidean distance from z to each class's projections."""
    d2 = ((projections - z) ** 2).sum(axis=1)
    best = np.full(num_classes, np.inf)
    np.minimum.at(best, labels, d2)
    scores = np.full(num_classes, ABSENT_SCORE)
    present = np.isfinite(best)
    scores[present] = -np.sqrt(best[present])
    return scores


def _check_probe_size(probe: FaceImage, width: int, height: int):
    if (probe.width, probe.height) != (width, height):
        raise PawprintError(
            f"probe size {probe.width}x{probe.height} does not match "
            f"training size {width}x{height}"
        )


@dataclass(frozen=True)
class EigenfacesModel:
    mean_face: np.ndarray  # (d,)
    components: np.ndarray  # (d, K), orthonormal columns
    projected_gallery: np.ndarray  # (N, K)
    gallery_labels: np.ndarray  # (N,)
    num_components: int
    num_classes: int
    width: int
    height: int


def eigenfaces_train(train: GalleryDataset, num_components: int) -> EigenfacesModel:
    """PCA subspace of mean-centered training vectors.

    The component count is clamped to N-1 (and to the numerical rank) with
    a warning; a zero-variance gallery is an error since no component
    would remain.
    """
    if num_components < 1:
        raise PawprintError("num_components must be at least 1")
    n = len(train)
    if n < 2:
        raise PawprintError(f"eigenfaces needs at least 2 training images, got {n}")
    x = train.pixel_matrix()
    mean = x.mean(axis=0)
    centered = x - mean
    basis, _ = _snapshot_pca(centered, num_components)
    kept = basis.shape[1]
    if kept < num_components:
        warnings.warn(
            f"eigenfaces components clamped from {num_components} to {kept} "
            f"(gallery of {n} images)",
            stacklevel=2,
        )
    width, height = train.image_size()
    return EigenfacesModel(
        mean_face=mean,
        components=basis,
        projected_gallery=centered @ basis,
        gallery_labels=train.labels(),
        num_components=kept,
        num_classes=train.num_classes,
        width=width,
        height=height,
    )


def eigenfaces_score(model: EigenfacesModel, probe: FaceImage) -> np.ndarray:
    """Negated distance to the nearest gallery projection of each class."""
    _check_probe_size(probe, model.width, model.height)
    z = (probe.pixels.ravel() - model.mean_face) @ model.components
    return _nearest_class_scores(
        model.projected_gallery, model.gallery_labels, model.num_classes, z
    )


def eigenfaces_reconstruct(model: EigenfacesModel, probe: FaceImage, k=None) -> np.ndarray:
    """Reconstruction of the probe from the first k components (flat vector)."""
    _check_probe_size(probe, model.width, model.height)
    k = model.num_components if k is None else k
    basis = model.components[:, :k]
    z = (probe.pixels.ravel() - model.mean_face) @ basis
    return model.mean_face + basis @ z


@dataclass(frozen=True)
class FisherfacesModel:
    mean_face: np.ndarray
    projection: np.ndarray  # (d, K) combined PCA + discriminant basis
    projected_gallery: np.ndarray
    gallery_labels: np.ndarray
    num_classes: int
    width: int
    height: int


def fisherfaces_train(train: GalleryDataset) -> FisherfacesModel:
    """PCA to N-C dimensions, then Fisher discriminant directions.

    The discriminant problem is solved as a symmetric eigenproblem on
    W Sb W with W = Sw^(-1/2); Sw is ridge-stabilized because same-dog
    photos are near-duplicates. Keeps min(C-1, available) components.
    """
    labels = train.labels()
    present = np.unique(labels)
    c = len(present)
    n = len(train)
    if c < 2:
        raise PawprintError("fisherfaces needs at least 2 classes")
    if n <= c:
        raise PawprintError(
            f"fisherfaces needs more samples ({n}) than classes ({c}); "
            "within-class scatter is singular beyond repair"
        )
    x = train.pixel_matrix()
    mean = x.mean(axis=0)
    centered = x - mean
    pca_basis, _ = _snapshot_pca(centered, n - c)
    z = centered @ pca_basis  # N x p, zero global mean
    p = z.shape[1]

    sw = np.zeros((p, p))
    sb = np.zeros((p, p))
    for cls in present:
        zc = z[labels == cls]
        mu = zc.mean(axis=0)
        dev = zc - mu
        sw += dev.T @ dev
        sb += len(zc) * np.outer(mu, mu)

    trace = float(np.trace(sw))
    if trace <= 0.0:
        raise PawprintError("within-class scatter vanished (duplicate images?)")
    sw[np.diag_indices(p)] += 1e-6 * trace / p

    dec_w = sym_eigen(sw)
    inv_sqrt = dec_w.eigenvectors @ (
        dec_w.eigenvectors / np.sqrt(np.maximum(dec_w.eigenvalues, 1e-300))
    ).T
    m = inv_sqrt @ sb @ inv_sqrt
    dec_m = sym_eigen((m + m.T) / 2.0)
    cutoff = max(dec_m.eigenvalues[0], 0.0) * _RANK_RTOL
    available = int(np.sum(dec_m.eigenvalues > cutoff))
    keep = min(c - 1, max(available, 1))
    if keep < c:
        log.debug(
            "fisherfaces retains %d discriminant components (rank bound C-1 of %d classes)",
            keep,
            c,
        )
    directions = inv_sqrt @ dec_m.eigenvectors[:, :keep]
    directions /= np.sqrt((directions**2).sum(axis=0))

    projection = pca_basis @ directions
    width, height = train.image_size()
    return FisherfacesModel(
        mean_face=mean,
        projection=projection,
        projected_gallery=centered @ projection,
        gallery_labels=labels,
        num_classes=train.num_classes,
        width=width,
        height=height,
    )


def fisherfaces_score(model: FisherfacesModel, probe: FaceImage) -> np.ndarray:
    """Same contract as eigenfaces_score, in the discriminant subspace."""
    _check_probe_size(probe, model.width, model.height)
    z = (probe.pixels.ravel() - model.mean_face) @ model.projection
    return _nearest_class_scores(
        model.projected_gallery, model.gallery_labels, model.num_classes, z
    )


def lbp_code(img: FaceImage, x: int, y: int) -> int:
    """8-neighbor LBP code at radius 1 for an interior pixel.

    Bit b compares neighbor b (east first, counterclockwise, diagonals
    bilinearly interpolated) against the center with >=, so flat patches
    give 255.
    """
    if not (1 <= x <= img.width - 2 and 1 <= y <= img.height - 2):
        raise PawprintError(f"pixel ({x}, {y}) is not interior to the image")
    patch = np.ascontiguousarray(img.pixels[y - 1 : y + 2, x - 1 : x + 2])
    return int(kernels.lbp_code_map(patch)[0, 0])


def lbp_histogram(img: FaceImage, grid: tuple[int, int]) -> np.ndarray:
    """Concatenated 256-bin cell histograms of the interior LBP code map.

    The interior splits into grid = (gx, gy) cells of equal size, remainder
    rows/columns going to the last cells; cell order is row-major.
    """
    gx, gy = grid
    ih = img.height - 2
    iw = img.width - 2
    if gx < 1 or gy < 1 or iw < gx or ih < gy:
        raise PawprintError(
            f"grid {gx}x{gy} does not fit the {iw}x{ih} image interior"
        )
    codes = kernels.lbp_code_map(np.ascontiguousarray(img.pixels))
    ch = ih // gy
    cw = iw // gx
    hists = []
    for r in range(gy):
        y0 = r * ch
        y1 = (r + 1) * ch if r < gy - 1 else ih
        for c in range(gx):
            x0 = c * cw
            x1 = (c + 1) * cw if c < gx - 1 else iw
            cell = codes[y0:y1, x0:x1]
            hists.append(np.bincount(cell.ravel(), minlength=256).astype(np.float64))
    return np.concatenate(hists)


@dataclass(frozen=True)
class LbphModel:
    grid: tuple[int, int]
    radius: int
    neighbors: int
    gallery_histograms: np.ndarray  # (N, gx*gy*256)
    gallery_labels: np.ndarray
    num_classes: int
    width: int
    height: int


def lbph_train(train: GalleryDataset, grid: tuple[int, int] = DEFAULT_LBPH_GRID) -> LbphModel:
    hists = np.stack([lbp_histogram(img, grid) for img, _ in train.samples])
    width, height = train.image_size()
    return LbphModel(
        grid=tuple(grid),
        radius=1,
        neighbors=8,
        gallery_histograms=hists,
        gallery_labels=train.labels(),
        num_classes=train.num_classes,
        width=width,
        height=height,
    )


def chi_square_distance(h: np.ndarray, g: np.ndarray) -> float:
    """Chi-square histogram distance; empty bins on both sides contribute 0."""
    num = (h - g) ** 2
    den = h + g
    out = np.zeros_like(num)
    np.divide(num, den, out=out, where=den > 0)
    return float(out.sum())


def lbph_score(model: LbphModel, probe: FaceImage) -> np.ndarray:
    """Negated min chi-square distance to each class's gallery histograms."""
    _check_probe_size(probe, model.width, model.height)
    h = lbp_histogram(probe, model.grid)
    num = (model.gallery_histograms - h) ** 2
    den = model.gallery_histograms + h
    terms = np.zeros_like(num)
    np.divide(num, den, out=terms, where=den > 0)
    dists = terms.sum(axis=1)
    best = np.full(model.num_classes, np.inf)
    np.minimum.at(best, model.gallery_labels, dists)
    scores = np.full(model.num_classes, ABSENT_SCORE)
    present = np.isfinite(best)
    scores[present] = -best[present]
    return scores
