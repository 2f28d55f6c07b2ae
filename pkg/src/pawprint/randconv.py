"""Random-weight convolutional feature extractor.

A 1-3 layer network whose filters are drawn once from a seeded uniform
distribution and never trained: per layer, valid convolution, clipping to
[0, 1], Lp pooling and optional divisive normalization. The architecture
(not the weights) is what gets optimized by the search module.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from . import kernels
from .errors import ParseError, PawprintError, ShapeRejection
from .imaging import FaceImage, resize_bilinear

ORIGINAL = "original"

INPUT_SIZES = (64, 128, 256, ORIGINAL)
LAYER_COUNTS = (1, 2, 3)
NUM_FILTERS = (32, 64, 128, 256)
FILTER_SIZES = (3, 5, 7, 9)
POOL_EXPONENTS = (1, 2, 10)
POOL_STRIDES = (1, 2, 4, 8)

ACTIVATION_LO = 0.0
ACTIVATION_HI = 1.0

STD_FLOOR = 1e-6


def pool_window(stride: int) -> int:
    """Pooling window: at least 2 so neighbors are actually pooled."""
    return max(2, stride)


@dataclass(frozen=True)
class LayerSpec:
    num_filters: int
    filter_size: int
    pool_exponent: int
    pool_stride: int
    normalize: bool

    def __post_init__(self):
        for value, domain, name in (
            (self.num_filters, NUM_FILTERS, "num_filters"),
            (self.filter_size, FILTER_SIZES, "filter_size"),
            (self.pool_exponent, POOL_EXPONENTS, "pool_exponent"),
            (self.pool_stride, POOL_STRIDES, "pool_stride"),
        ):
            if value not in domain:
                raise PawprintError(f"{name} must be one of {domain}, got {value}")


@dataclass(frozen=True)
class ArchitectureSpec:
    input_size: int | str  # 64 / 128 / 256 / "original"
    layers: tuple[LayerSpec, ...]
    seed: int

    def __post_init__(self):
        if self.input_size not in INPUT_SIZES:
            raise PawprintError(
                f"input_size must be one of {INPUT_SIZES}, got {self.input_size}"
            )
        if not 1 <= len(self.layers) <= 3:
            raise PawprintError(f"network must have 1-3 layers, got {len(self.layers)}")


def make_filter_bank(layer: LayerSpec, in_channels: int, seed) -> np.ndarray:
    """Uniform [-1, 1] kernels, then per-kernel zero mean and unit L2 norm.

    ``seed`` feeds a SeedSequence, so callers pass (architecture seed,
    layer index) for per-layer determinism.
    """
    if in_channels < 1:
        raise PawprintError("in_channels must be at least 1")
    rng = np.random.default_rng(np.random.SeedSequence(seed))
    k = layer.filter_size
    bank = rng.uniform(-1.0, 1.0, size=(layer.num_filters, k, k, in_channels))
    bank -= bank.mean(axis=(1, 2, 3), keepdims=True)
    norms = np.sqrt((bank * bank).sum(axis=(1, 2, 3), keepdims=True))
    bank /= np.maximum(norms, 1e-30)
    return bank


def activate(t: np.ndarray, lo: float = ACTIVATION_LO, hi: float = ACTIVATION_HI) -> np.ndarray:
    if not lo < hi:
        raise PawprintError(f"activation range [{lo}, {hi}] is empty")
    return np.clip(t, lo, hi)


def _resolved_input_size(spec: ArchitectureSpec, native_size: tuple[int, int]):
    if spec.input_size == ORIGINAL:
        return native_size
    return (spec.input_size, spec.input_size)


def feature_shape(spec: ArchitectureSpec, native_size: tuple[int, int]):
    """(height, width, channels) of the final tensor, by the shape recurrence.

    conv: dim -> dim - k + 1; pool: dim -> floor((dim - w)/s) + 1 with
    w = max(2, stride). Raises ShapeRejection naming the first layer that
    collapses a dimension below 1.
    """
    w, h = _resolved_input_size(spec, native_size)
    channels = 1
    for li, layer in enumerate(spec.layers, start=1):
        k = layer.filter_size
        if h < k or w < k:
            raise ShapeRejection(
                f"layer {li}: {k}x{k} convolution does not fit {w}x{h} input",
                layer=li,
            )
        h, w = h - k + 1, w - k + 1
        win = pool_window(layer.pool_stride)
        if h < win or w < win:
            raise ShapeRejection(
                f"layer {li}: {win}x{win} pooling window does not fit {w}x{h} maps",
                layer=li,
            )
        h = (h - win) // layer.pool_stride + 1
        w = (w - win) // layer.pool_stride + 1
        channels = layer.num_filters
    return (h, w, channels)


def feature_length(spec: ArchitectureSpec, native_size: tuple[int, int]) -> int:
    h, w, c = feature_shape(spec, native_size)
    return h * w * c


def extract_features(spec: ArchitectureSpec, img: FaceImage) -> np.ndarray:
    """Run the random-weight network over one image; flat row-major output.

    The image is resized to the spec input size, standardized per image
    (zero mean, unit variance with a floor on sigma), then pushed through
    the layers. Deterministic given (spec, image).
    """
    native = (img.width, img.height)
    feature_shape(spec, native)  # reject impossible architectures up front
    w, h = _resolved_input_size(spec, native)
    resized = resize_bilinear(img, w, h)
    x = resized.pixels
    std = float(x.std())
    x = (x - x.mean()) / max(std, STD_FLOOR)

    t = np.ascontiguousarray(x[:, :, None])
    for li, layer in enumerate(spec.layers):
        bank = make_filter_bank(layer, t.shape[2], (spec.seed, li))
        t = kernels.convolve_valid(t, np.ascontiguousarray(bank))
        t = activate(t)
        t = kernels.lp_pool(
            np.ascontiguousarray(t),
            float(layer.pool_exponent),
            pool_window(layer.pool_stride),
            layer.pool_stride,
        )
        if layer.normalize:
            t = kernels.divisive_normalize(np.ascontiguousarray(t))
    return np.ascontiguousarray(t).ravel()


_BOOL_WORDS = {"yes": True, "no": False, "true": True, "false": False}


def spec_to_text(spec: ArchitectureSpec) -> str:
    """Human-readable one-field-per-line form, diffable and re-runnable."""
    lines = [
        f"input_size {spec.input_size}",
        f"seed {spec.seed}",
        f"layers {len(spec.layers)}",
    ]
    for i, layer in enumerate(spec.layers, start=1):
        lines.append(f"layer{i}.num_filters {layer.num_filters}")
        lines.append(f"layer{i}.filter_size {layer.filter_size}")
        lines.append(f"layer{i}.pool_exponent {layer.pool_exponent}")
        lines.append(f"layer{i}.pool_stride {layer.pool_stride}")
        lines.append(f"layer{i}.normalize {'yes' if layer.normalize else 'no'}")
    return "\n".join(lines) + "\n"


def spec_from_text(text: str) -> ArchitectureSpec:
    fields: dict[str, str] = {}
    for ln, raw in enumerate(text.splitlines(), start=1):
        line = raw.strip()
        if not line or line.startswith("#"):
            continue
        parts = line.split(None, 1)
        if len(parts) != 2:
            raise ParseError("expected '<name> <value>'", line=ln)
        if parts[0] in fields:
            raise ParseError(f"duplicate field {parts[0]!r}", line=ln)
        fields[parts[0]] = parts[1]
    return _spec_from_fields(fields)


def _spec_from_fields(fields: dict[str, str]) -> ArchitectureSpec:
    def take(name: str) -> str:
        if name not in fields:
            raise ParseError(f"missing field {name!r}")
        return fields.pop(name)

    raw_input = take("input_size")
    input_size: int | str = raw_input if raw_input == ORIGINAL else int(raw_input)
    seed = int(take("seed"))
    count = int(take("layers"))
    layers = []
    for i in range(1, count + 1):
        norm_word = take(f"layer{i}.normalize").lower()
        if norm_word not in _BOOL_WORDS:
            raise ParseError(f"layer{i}.normalize must be yes/no, got {norm_word!r}")
        layers.append(
            LayerSpec(
                num_filters=int(take(f"layer{i}.num_filters")),
                filter_size=int(take(f"layer{i}.filter_size")),
                pool_exponent=int(take(f"layer{i}.pool_exponent")),
                pool_stride=int(take(f"layer{i}.pool_stride")),
                normalize=_BOOL_WORDS[norm_word],
            )
        )
    if fields:
        raise ParseError(f"unknown fields: {sorted(fields)}")
    return ArchitectureSpec(input_size=input_size, layers=tuple(layers), seed=seed)


def spec_to_line(spec: ArchitectureSpec) -> str:
    """Compact single-line key=value form used by search history logs."""
    return " ".join(
        f"{name}={value}"
        for name, value in (
            line.split(None, 1) for line in spec_to_text(spec).strip().splitlines()
        )
    )


def spec_from_line(line: str) -> ArchitectureSpec:
    fields = {}
    for token in line.split():
        if "=" not in token:
            raise ParseError(f"expected key=value, got {token!r}")
        key, value = token.split("=", 1)
        fields[key] = value
    return _spec_from_fields(fields)
