"""Synthetic textured galleries for tests and demos.

Each individual is a distinct base texture (an oriented square-wave
grating over a smooth random field); samples are circular shifts of up to
2 px plus Gaussian pixel noise. The construction guarantees same-class
samples stay far closer than cross-class ones, which is what makes it a
usable identification gate without real data.
"""

from __future__ import annotations

import numpy as np

from .imaging import FaceImage, GalleryDataset
from .kernels import resize_bilinear as _resize


def _smooth_field(rng: np.random.Generator, size: int) -> np.ndarray:
    coarse = rng.uniform(-1.0, 1.0, size=(8, 8))
    return _resize(coarse, size, size)


def make_synthetic_gallery(
    num_individuals: int = 10,
    samples_each: int = 8,
    size: int = 64,
    noise_sigma: float = 0.05,
    max_shift: int = 2,
    seed: int = 0,
) -> GalleryDataset:
    base_rng = np.random.default_rng(np.random.SeedSequence((seed, 2087)))
    yy, xx = np.meshgrid(np.arange(size), np.arange(size), indexing="ij")
    individuals = [f"dog{i:02d}" for i in range(num_individuals)]
    samples = []
    for i in range(num_individuals):
        angle = np.pi * i / max(num_individuals, 1)
        wavelength = (16, 22, 28)[i % 3]
        phase = base_rng.uniform(0.0, 2.0 * np.pi)
        wave = np.sin(
            2.0 * np.pi * (np.cos(angle) * xx + np.sin(angle) * yy) / wavelength + phase
        )
        grating = 0.22 * np.sign(wave)
        smooth = 0.16 * _smooth_field(base_rng, size)
        base = np.clip(0.5 + grating + smooth, 0.12, 0.88)
        for j in range(samples_each):
            dy, dx = base_rng.integers(-max_shift, max_shift + 1, size=2)
            shifted = np.roll(np.roll(base, dy, axis=0), dx, axis=1)
            noisy = shifted + base_rng.normal(0.0, noise_sigma, size=(size, size))
            pixels = np.clip(noisy, 0.0, 1.0)
            img = FaceImage(pixels=pixels, source_id=f"{individuals[i]}/shot{j:02d}.png")
            samples.append((img, i))
    return GalleryDataset(individuals=individuals, samples=samples, name="synthetic")


def write_gallery_tree(ds: GalleryDataset, root) -> None:
    """Materialize a gallery as PNG files in the dataset directory layout."""
    from pathlib import Path

    from PIL import Image

    root = Path(root)
    for img, class_index in ds.samples:
        label = ds.individuals[class_index]
        rel = img.source_id.partition("/")[2] or f"{id(img)}.png"
        path = root / label / rel
        path.parent.mkdir(parents=True, exist_ok=True)
        eight_bit = np.clip(np.round(img.pixels * 255.0), 0, 255).astype(np.uint8)
        Image.fromarray(eight_bit, mode="L").save(path)


def main(argv=None) -> int:
    import argparse

    parser = argparse.ArgumentParser(
        description="Generate a synthetic dog-face gallery as a dataset directory."
    )
    parser.add_argument("--out", required=True, help="output dataset root")
    parser.add_argument("--individuals", type=int, default=10)
    parser.add_argument("--samples", type=int, default=8)
    parser.add_argument("--size", type=int, default=64)
    parser.add_argument("--seed", type=int, default=0)
    args = parser.parse_args(argv)
    ds = make_synthetic_gallery(
        num_individuals=args.individuals,
        samples_each=args.samples,
        size=args.size,
        seed=args.seed,
    )
    write_gallery_tree(ds, args.out)
    print(f"wrote {len(ds)} images for {ds.num_classes} individuals under {args.out}")
    return 0


if __name__ == "__main__":
    raise SystemExit(main())
