"""Loading, normalizing and aligning face images into a labeled gallery.

On-disk layout: one directory per individual, directory name = label,
holding PNG/JPEG files. All intensities live in [0, 1] as float64 so the
whole pipeline shares one numeric domain.
"""

from __future__ import annotations

import logging
import math
import warnings
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np
from PIL import Image, UnidentifiedImageError

from . import kernels
from .errors import DatasetError

log = logging.getLogger(__name__)

MIN_SAMPLES_PER_INDIVIDUAL = 5


@dataclass(frozen=True)
class FaceImage:
    """Aligned fixed-size grayscale raster with intensities in [0, 1]."""

    pixels: np.ndarray  # (height, width) float64
    source_id: str = ""

    @property
    def height(self) -> int:
        return self.pixels.shape[0]

    @property
    def width(self) -> int:
        return self.pixels.shape[1]

    def __post_init__(self):
        p = self.pixels
        if p.ndim != 2 or p.shape[0] < 1 or p.shape[1] < 1:
            raise DatasetError(f"face image must be a 2-D raster, got shape {p.shape}")
        if not np.isfinite(p).all() or p.min() < 0.0 or p.max() > 1.0:
            raise DatasetError("face image intensities must be finite and within [0, 1]")


@dataclass
class GalleryDataset:
    """Labeled collection of equally sized face images grouped by individual."""

    individuals: list[str]
    samples: list[tuple[FaceImage, int]]
    name: str = ""
    load_report: list[str] = field(default_factory=list)

    @property
    def num_classes(self) -> int:
        return len(self.individuals)

    def __len__(self) -> int:
        return len(self.samples)

    def image_size(self) -> tuple[int, int]:
        """(width, height) shared by all samples."""
        img = self.samples[0][0]
        return img.width, img.height

    def labels(self) -> np.ndarray:
        return np.array([c for _, c in self.samples], dtype=np.intp)

    def pixel_matrix(self) -> np.ndarray:
        """Row-per-sample matrix of flattened images (N x d)."""
        return np.stack([img.pixels.ravel() for img, _ in self.samples])

    def subset(self, indices) -> "GalleryDataset":
        """Restricted view keeping the full individual list and class indices.

        Fold subsets may leave some individuals without samples; that is
        intentional and handled by the evaluation protocol.
        """
        return GalleryDataset(
            individuals=self.individuals,
            samples=[self.samples[i] for i in indices],
            name=self.name,
        )

    def sample_keys(self) -> list[str]:
        return [img.source_id for img, _ in self.samples]


def to_grayscale(raster: np.ndarray, source_id: str = "") -> FaceImage:
    """Convert an H x W x 3 raster in [0,1] to luminance; 1-channel input
    passes through unchanged.

    Luminance = 0.299 R + 0.587 G + 0.114 B, grouped as r + (g + b) so pure
    white maps to exactly 1.0.
    """
    raster = np.asarray(raster, dtype=np.float64)
    if raster.ndim == 2:
        return FaceImage(pixels=raster, source_id=source_id)
    if raster.ndim == 3 and raster.shape[2] == 1:
        return FaceImage(pixels=raster[:, :, 0], source_id=source_id)
    if raster.ndim != 3 or raster.shape[2] != 3:
        raise DatasetError(
            f"expected 1 or 3 channels, got raster of shape {raster.shape}"
        )
    lum = 0.299 * raster[:, :, 0] + (0.587 * raster[:, :, 1] + 0.114 * raster[:, :, 2])
    return FaceImage(pixels=np.clip(lum, 0.0, 1.0), source_id=source_id)


def resize_bilinear(img: FaceImage, width: int, height: int) -> FaceImage:
    """Bilinear resample to (width, height), clamped back to [0, 1]."""
    if width < 1 or height < 1:
        raise DatasetError("target size must be at least 1x1")
    if (width, height) == (img.width, img.height):
        return FaceImage(pixels=img.pixels.copy(), source_id=img.source_id)
    out = kernels.resize_bilinear(np.ascontiguousarray(img.pixels), height, width)
    return FaceImage(pixels=np.clip(out, 0.0, 1.0), source_id=img.source_id)


def align_by_eyes(img: FaceImage, left_eye, right_eye) -> FaceImage:
    """Rotate about the eye midpoint so the eye segment is horizontal with
    the left eye on the left; uncovered pixels become 0.
    """
    lx, ly = float(left_eye[0]), float(left_eye[1])
    rx, ry = float(right_eye[0]), float(right_eye[1])
    if (lx, ly) == (rx, ry):
        raise DatasetError("eye points must be distinct")
    for x, y in ((lx, ly), (rx, ry)):
        if not (0 <= x <= img.width - 1 and 0 <= y <= img.height - 1):
            raise DatasetError(f"eye point ({x}, {y}) lies outside the image")
    theta = math.atan2(ry - ly, rx - lx)
    cx = (lx + rx) / 2.0
    cy = (ly + ry) / 2.0
    out = kernels.rotate_bilinear(
        np.ascontiguousarray(img.pixels), cx, cy, math.cos(theta), math.sin(theta)
    )
    return FaceImage(pixels=np.clip(out, 0.0, 1.0), source_id=img.source_id)


def decode_image(path: Path) -> np.ndarray:
    """Decode a PNG/JPEG file to an H x W x 3 float raster in [0, 1]."""
    with Image.open(path) as im:
        rgb = im.convert("RGB")
        arr = np.asarray(rgb, dtype=np.float64) / 255.0
    return arr


def load_dataset(root_path, target_size: tuple[int, int]) -> GalleryDataset:
    """Load ``root/<individual>/<images>`` into a normalized gallery.

    Every image is grayscale-converted, resized to ``target_size`` (w, h)
    and scaled to [0, 1]. Individuals sort lexicographically and samples
    sort by (individual, filename), so two loads of the same tree are
    identical. Undecodable files are skipped and recorded in the load
    report (also echoed to the logger); an individual with no decodable
    image is fatal.
    """
    root = Path(root_path)
    if not root.is_dir():
        raise DatasetError(f"dataset root {root} is not a directory")
    width, height = target_size
    if width < 1 or height < 1:
        raise DatasetError("target size must be at least 1x1")

    subdirs = sorted(p for p in root.iterdir() if p.is_dir())
    if not subdirs:
        raise DatasetError(f"dataset root {root} contains no individual directories")

    individuals = [p.name for p in subdirs]
    samples: list[tuple[FaceImage, int]] = []
    report: list[str] = []
    for class_index, subdir in enumerate(subdirs):
        files = sorted(p for p in subdir.iterdir() if p.is_file())
        decoded = 0
        for f in files:
            try:
                raster = decode_image(f)
            except (UnidentifiedImageError, OSError, ValueError) as exc:
                msg = f"skipped undecodable file {subdir.name}/{f.name}: {exc}"
                report.append(msg)
                log.warning(msg)
                continue
            face = to_grayscale(raster, source_id=f"{subdir.name}/{f.name}")
            face = resize_bilinear(face, width, height)
            samples.append((face, class_index))
            decoded += 1
        if decoded == 0:
            raise DatasetError(f"individual {subdir.name!r} has no decodable image")
        if decoded < MIN_SAMPLES_PER_INDIVIDUAL:
            warnings.warn(
                f"individual {subdir.name!r} has fewer than "
                f"{MIN_SAMPLES_PER_INDIVIDUAL} samples ({decoded})",
                stacklevel=2,
            )
    return GalleryDataset(
        individuals=individuals, samples=samples, name=root.name, load_report=report
    )
