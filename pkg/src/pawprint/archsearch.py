"""Architecture search over the random-convnet hyperparameter space.

Two samplers share one candidate budget: uniform random draws, and a
tree-of-Parzen-estimators variant specialized for this all-categorical
space (smoothed category counts for the good/bad split, proposals drawn
from the good density and ranked by the density ratio). Candidates are
scored by inner stratified cross-validation of a linear SVM on the
extracted features, using training data only.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from .errors import PawprintError, ShapeRejection
from .evalkit import balanced_accuracy, map_ordered, stratified_folds
from .imaging import GalleryDataset
from .randconv import (
    ArchitectureSpec,
    FILTER_SIZES,
    INPUT_SIZES,
    LAYER_COUNTS,
    LayerSpec,
    NUM_FILTERS,
    POOL_EXPONENTS,
    POOL_STRIDES,
    extract_features,
)
from .svm import BARK_SVM_C, SvmConfig, svm_scores, svm_train

STATUS_OK = "ok"
STATUS_REJECTED = "rejected_shape"
STATUS_FAILED = "failed"

_LAYER_AXES = (
    ("num_filters", NUM_FILTERS),
    ("filter_size", FILTER_SIZES),
    ("pool_exponent", POOL_EXPONENTS),
    ("pool_stride", POOL_STRIDES),
    ("normalize", (False, True)),
)


@dataclass(frozen=True)
class SearchConfig:
    budget: int = 2000
    optimizer: str = "random"
    master_seed: int = 0
    inner_folds: int = 3
    svm_c: float = BARK_SVM_C
    tpe_gamma: float = 0.25
    tpe_candidates: int = 24
    tpe_startup: int = 20

    def __post_init__(self):
        if self.budget < 1:
            raise PawprintError("search budget must be at least 1")
        if self.optimizer not in ("random", "tpe"):
            raise PawprintError(f"unknown optimizer {self.optimizer!r}")
        if not 0.0 < self.tpe_gamma < 1.0:
            raise PawprintError("tpe_gamma must lie in (0, 1)")
        if self.tpe_candidates < 1 or self.tpe_startup < 0:
            raise PawprintError("tpe_candidates must be >= 1 and tpe_startup >= 0")
        if self.inner_folds < 2:
            raise PawprintError("inner_folds must be at least 2")


@dataclass
class Trial:
    index: int
    spec: ArchitectureSpec
    status: str
    objective: float | None = None


def _draw_uniform_spec(rng: np.random.Generator) -> ArchitectureSpec:
    """Uniform draw over the whole space: layer count first, then fields."""
    count = int(rng.choice(LAYER_COUNTS))
    input_size = INPUT_SIZES[int(rng.integers(len(INPUT_SIZES)))]
    layers = []
    for _ in range(count):
        layers.append(
            LayerSpec(
                num_filters=int(rng.choice(NUM_FILTERS)),
                filter_size=int(rng.choice(FILTER_SIZES)),
                pool_exponent=int(rng.choice(POOL_EXPONENTS)),
                pool_stride=int(rng.choice(POOL_STRIDES)),
                normalize=bool(rng.integers(2)),
            )
        )
    seed = int(rng.integers(2**31))
    return ArchitectureSpec(input_size=input_size, layers=tuple(layers), seed=seed)


def sample_random(master_seed: int, index: int) -> ArchitectureSpec:
    """Deterministic uniform draw for candidate ``index``."""
    rng = np.random.default_rng(np.random.SeedSequence((master_seed, index)))
    return _draw_uniform_spec(rng)


def _axis_value(spec: ArchitectureSpec, axis) -> object | None:
    """Value of an axis in a spec, or None when the layer is absent."""
    kind = axis[0]
    if kind == "input_size":
        return spec.input_size
    if kind == "num_layers":
        return len(spec.layers)
    _, li, name = axis
    if li >= len(spec.layers):
        return None
    return getattr(spec.layers[li], name)


def _all_axes():
    axes = [("input_size",), ("num_layers",)]
    for li in range(3):
        for name, _ in _LAYER_AXES:
            axes.append(("layer", li, name))
    return axes


def _axis_domain(axis):
    if axis[0] == "input_size":
        return INPUT_SIZES
    if axis[0] == "num_layers":
        return LAYER_COUNTS
    name = axis[2]
    return dict(_LAYER_AXES)[name]


def _smoothed_distribution(specs, axis):
    """Add-one smoothed category probabilities over the specs that carry
    the axis (deeper-layer axes ignore shallower trials)."""
    domain = _axis_domain(axis)
    counts = {v: 1.0 for v in domain}
    total = float(len(domain))
    for spec in specs:
        value = _axis_value(spec, axis)
        if value is not None:
            counts[value] += 1.0
            total += 1.0
    return {v: c / total for v, c in counts.items()}


def _pick(rng: np.random.Generator, dist: dict) -> object:
    values = list(dist.keys())
    probs = np.array([dist[v] for v in values])
    return values[int(rng.choice(len(values), p=probs / probs.sum()))]


def sample_tpe(history, config: SearchConfig, round_seed) -> ArchitectureSpec:
    """Propose a spec from the good/bad density ratio.

    Falls back to the uniform sampler until ``tpe_startup`` trials have an
    objective (so an empty history behaves exactly like random search).
    """
    rng = np.random.default_rng(np.random.SeedSequence(round_seed))
    ok = [t for t in history if t.status == STATUS_OK]
    if len(ok) < config.tpe_startup:
        return _draw_uniform_spec(rng)

    ranked = sorted(ok, key=lambda t: (-t.objective, t.index))
    n_good = math.ceil(config.tpe_gamma * len(ranked))
    good = [t.spec for t in ranked[:n_good]]
    bad = [t.spec for t in ranked[n_good:]]

    axes = _all_axes()
    l_dists = {axis: _smoothed_distribution(good, axis) for axis in axes}
    g_dists = {axis: _smoothed_distribution(bad, axis) for axis in axes}

    best_spec = None
    best_score = -math.inf
    for _ in range(config.tpe_candidates):
        count = _pick(rng, l_dists[("num_layers",)])
        input_size = _pick(rng, l_dists[("input_size",)])
        layers = []
        for li in range(count):
            values = {
                name: _pick(rng, l_dists[("layer", li, name)])
                for name, _ in _LAYER_AXES
            }
            layers.append(LayerSpec(**values))
        spec = ArchitectureSpec(
            input_size=input_size,
            layers=tuple(layers),
            seed=int(rng.integers(2**31)),
        )
        score = 0.0
        for axis in axes:
            value = _axis_value(spec, axis)
            if value is not None:
                score += math.log(l_dists[axis][value] / g_dists[axis][value])
        if score > best_score:
            best_score = score
            best_spec = spec
    return best_spec


def evaluate_candidate(
    spec: ArchitectureSpec, train_split: GalleryDataset, config: SearchConfig
) -> Trial:
    """Inner-CV objective: mean balanced accuracy of an SVM on the features.

    Shape-impossible architectures come back as rejected_shape; other
    toolkit failures as failed. The index is filled in by run_search.
    """
    try:
        features = [extract_features(spec, img) for img, _ in train_split.samples]
    except ShapeRejection:
        return Trial(index=-1, spec=spec, status=STATUS_REJECTED)
    labels = train_split.labels()
    svm_config = SvmConfig(c=config.svm_c, seed=0)
    try:
        plan = stratified_folds(
            train_split, config.inner_folds, seed=config.master_seed
        )
        accuracies = []
        for fold in range(config.inner_folds):
            train_idx = np.flatnonzero(plan.assignments != fold)
            test_idx = np.flatnonzero(plan.assignments == fold)
            if len(test_idx) == 0:
                continue
            model = svm_train(
                [features[i] for i in train_idx], labels[train_idx], svm_config
            )
            c = train_split.num_classes
            confusion = np.zeros((c, c), dtype=np.int64)
            for i in test_idx:
                scores = svm_scores(model, features[i])
                pred = model.classes[int(np.argmax(scores))]
                confusion[labels[i], pred] += 1
            accuracies.append(balanced_accuracy(confusion, warn_missing=False))
        if not accuracies:
            return Trial(index=-1, spec=spec, status=STATUS_FAILED)
        objective = float(np.mean(accuracies))
    except PawprintError:
        return Trial(index=-1, spec=spec, status=STATUS_FAILED)
    return Trial(index=-1, spec=spec, status=STATUS_OK, objective=objective)


def run_search(
    train_split: GalleryDataset | None,
    config: SearchConfig,
    evaluate=None,
    jobs: int = 1,
):
    """Evaluate ``budget`` candidates and return (best ok trial, history).

    ``evaluate`` may be injected (tests use synthetic objectives); it maps
    an ArchitectureSpec to a Trial whose index is overwritten here. Random
    search may evaluate candidates concurrently; TPE is sequential since
    each proposal conditions on every earlier result.
    """
    if evaluate is None:
        if train_split is None:
            raise PawprintError("run_search needs a training split or an evaluator")
        evaluate = lambda spec: evaluate_candidate(spec, train_split, config)

    history: list[Trial] = []
    if config.optimizer == "random":
        specs = [sample_random(config.master_seed, i) for i in range(config.budget)]
        trials = map_ordered(evaluate, specs, jobs)
        for i, trial in enumerate(trials):
            trial.index = i
            history.append(trial)
    else:
        for i in range(config.budget):
            spec = sample_tpe(history, config, (config.master_seed, i))
            trial = evaluate(spec)
            trial.index = i
            history.append(trial)

    best = None
    counts = {STATUS_OK: 0, STATUS_REJECTED: 0, STATUS_FAILED: 0}
    for trial in history:
        counts[trial.status] += 1
        if trial.status == STATUS_OK and (best is None or trial.objective > best.objective):
            best = trial
    if best is None:
        raise PawprintError(
            "no candidate produced an objective "
            f"({counts[STATUS_REJECTED]} shape-rejected, {counts[STATUS_FAILED]} failed)"
        )
    return best, history
