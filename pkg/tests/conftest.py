import numpy as np
import pytest
from PIL import Image

from pawprint.synthetic import make_synthetic_gallery


def write_png(path, pixels):
    """pixels: float array in [0,1] (grayscale) or HxWx3."""
    path.parent.mkdir(parents=True, exist_ok=True)
    arr = np.clip(np.round(np.asarray(pixels) * 255.0), 0, 255).astype(np.uint8)
    mode = "L" if arr.ndim == 2 else "RGB"
    Image.fromarray(arr, mode=mode).save(path)


@pytest.fixture
def toy_dataset_dir(tmp_path):
    """Two individuals x three distinctive 32x32 images on disk."""
    rng = np.random.default_rng(5)
    root = tmp_path / "toy"
    for label, base_level in (("aldo", 0.25), ("brutus", 0.7)):
        base = np.clip(base_level + 0.15 * rng.random((32, 32)), 0, 1)
        for j in range(3):
            shifted = np.roll(base, j, axis=1)
            write_png(root / label / f"photo{j}.png", shifted)
    return root


@pytest.fixture(scope="session")
def small_gallery():
    """In-memory 4-individual gallery for recognizer-level tests."""
    return make_synthetic_gallery(num_individuals=4, samples_each=6, size=32, seed=3)
