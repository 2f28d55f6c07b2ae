"""Recognizer adapters: one fit/score object per method.

Every adapter fits on a GalleryDataset (possibly a fold subset that lacks
some individuals) and scores a FaceImage into a vector over the full class
list, padding unseen classes with the absent sentinel. Adapters also know
how to round-trip themselves through the model container.
"""

from __future__ import annotations

import numpy as np

from . import archsearch, classical, deepfeat, randconv, sparse
from .errors import ContainerError, PawprintError
from .evalkit import ABSENT_SCORE
from .imaging import FaceImage, GalleryDataset
from .svm import BARK_SVM_C, SvmConfig, SvmModel, WOOF_SVM_C, svm_scores, svm_train

METHODS = ("eigen", "fisher", "lbph", "sparse", "bark", "woof")


def _base_metadata(individuals, width, height, dataset_name):
    return {
        "individuals": "\t".join(individuals),
        "width": str(width),
        "height": str(height),
        "dataset": dataset_name,
    }


def _expand_scores(raw: np.ndarray, classes: np.ndarray, num_classes: int) -> np.ndarray:
    scores = np.full(num_classes, ABSENT_SCORE)
    scores[classes] = raw
    return scores


class EigenfacesRecognizer:
    method = "eigen"

    def __init__(self, num_components: int = classical.DEFAULT_EIGENFACE_COMPONENTS):
        self.num_components = num_components
        self.model = None

    def fit(self, train: GalleryDataset):
        self.model = classical.eigenfaces_train(train, self.num_components)
        self.individuals = list(train.individuals)
        self.dataset_name = train.name
        return self

    def score(self, img: FaceImage) -> np.ndarray:
        return classical.eigenfaces_score(self.model, img)

    def to_container(self):
        m = self.model
        meta = _base_metadata(self.individuals, m.width, m.height, self.dataset_name)
        meta["num_components"] = str(m.num_components)
        arrays = [
            ("mean_face", m.mean_face),
            ("components", m.components.ravel()),
            ("projected_gallery", m.projected_gallery.ravel()),
            ("gallery_labels", m.gallery_labels.astype(np.float64)),
        ]
        return self.method, meta, arrays

    @classmethod
    def from_container(cls, meta, arrays):
        width, height = int(meta["width"]), int(meta["height"])
        k = int(meta["num_components"])
        individuals = meta["individuals"].split("\t")
        d = width * height
        rec = cls(num_components=k)
        rec.individuals = individuals
        rec.dataset_name = meta.get("dataset", "")
        rec.model = classical.EigenfacesModel(
            mean_face=arrays["mean_face"],
            components=arrays["components"].reshape(d, k),
            projected_gallery=arrays["projected_gallery"].reshape(-1, k),
            gallery_labels=arrays["gallery_labels"].astype(np.intp),
            num_components=k,
            num_classes=len(individuals),
            width=width,
            height=height,
        )
        return rec


class FisherfacesRecognizer:
    method = "fisher"

    def __init__(self):
        self.model = None

    def fit(self, train: GalleryDataset):
        self.model = classical.fisherfaces_train(train)
        self.individuals = list(train.individuals)
        self.dataset_name = train.name
        return self

    def score(self, img: FaceImage) -> np.ndarray:
        return classical.fisherfaces_score(self.model, img)

    def to_container(self):
        m = self.model
        meta = _base_metadata(self.individuals, m.width, m.height, self.dataset_name)
        meta["num_components"] = str(m.projection.shape[1])
        arrays = [
            ("mean_face", m.mean_face),
            ("projection", m.projection.ravel()),
            ("projected_gallery", m.projected_gallery.ravel()),
            ("gallery_labels", m.gallery_labels.astype(np.float64)),
        ]
        return self.method, meta, arrays

    @classmethod
    def from_container(cls, meta, arrays):
        width, height = int(meta["width"]), int(meta["height"])
        k = int(meta["num_components"])
        individuals = meta["individuals"].split("\t")
        rec = cls()
        rec.individuals = individuals
        rec.dataset_name = meta.get("dataset", "")
        rec.model = classical.FisherfacesModel(
            mean_face=arrays["mean_face"],
            projection=arrays["projection"].reshape(width * height, k),
            projected_gallery=arrays["projected_gallery"].reshape(-1, k),
            gallery_labels=arrays["gallery_labels"].astype(np.intp),
            num_classes=len(individuals),
            width=width,
            height=height,
        )
        return rec


class LbphRecognizer:
    method = "lbph"

    def __init__(self, grid=classical.DEFAULT_LBPH_GRID):
        self.grid = tuple(grid)
        self.model = None

    def fit(self, train: GalleryDataset):
        self.model = classical.lbph_train(train, self.grid)
        self.individuals = list(train.individuals)
        self.dataset_name = train.name
        return self

    def score(self, img: FaceImage) -> np.ndarray:
        return classical.lbph_score(self.model, img)

    def to_container(self):
        m = self.model
        meta = _base_metadata(self.individuals, m.width, m.height, self.dataset_name)
        meta["grid"] = f"{m.grid[0]}x{m.grid[1]}"
        meta["radius"] = str(m.radius)
        meta["neighbors"] = str(m.neighbors)
        arrays = [
            ("gallery_histograms", m.gallery_histograms.ravel()),
            ("gallery_labels", m.gallery_labels.astype(np.float64)),
        ]
        return self.method, meta, arrays

    @classmethod
    def from_container(cls, meta, arrays):
        width, height = int(meta["width"]), int(meta["height"])
        gx, gy = (int(v) for v in meta["grid"].split("x"))
        individuals = meta["individuals"].split("\t")
        rec = cls(grid=(gx, gy))
        rec.individuals = individuals
        rec.dataset_name = meta.get("dataset", "")
        rec.model = classical.LbphModel(
            grid=(gx, gy),
            radius=int(meta["radius"]),
            neighbors=int(meta["neighbors"]),
            gallery_histograms=arrays["gallery_histograms"].reshape(-1, gx * gy * 256),
            gallery_labels=arrays["gallery_labels"].astype(np.intp),
            num_classes=len(individuals),
            width=width,
            height=height,
        )
        return rec


class SparseRecognizer:
    """Probes are L2-normalized here to match the gallery normalization."""

    method = "sparse"

    def __init__(self, config: sparse.SparseConfig = sparse.SparseConfig()):
        self.config = config
        self.model = None

    def fit(self, train: GalleryDataset):
        self.model = sparse.sparse_train(train, self.config)
        self.individuals = list(train.individuals)
        self.dataset_name = train.name
        return self

    def score(self, img: FaceImage) -> np.ndarray:
        if (img.width, img.height) != (self.model.width, self.model.height):
            raise PawprintError(
                f"probe size {img.width}x{img.height} does not match "
                f"training size {self.model.width}x{self.model.height}"
            )
        y = img.pixels.ravel().astype(np.float64)
        norm = float(np.sqrt(y @ y))
        if norm > 0.0:
            y = y / norm
        return sparse.sparse_classify(self.model, y)

    def to_container(self):
        m = self.model
        meta = _base_metadata(self.individuals, m.width, m.height, self.dataset_name)
        meta["m_fraction"] = repr(m.config.m_fraction)
        meta["ridge"] = repr(m.config.ridge)
        arrays = [
            ("gallery", m.gallery.ravel()),
            ("gallery_labels", m.gallery_labels.astype(np.float64)),
        ]
        return self.method, meta, arrays

    @classmethod
    def from_container(cls, meta, arrays):
        width, height = int(meta["width"]), int(meta["height"])
        individuals = meta["individuals"].split("\t")
        config = sparse.SparseConfig(
            m_fraction=float(meta["m_fraction"]), ridge=float(meta["ridge"])
        )
        rec = cls(config=config)
        rec.individuals = individuals
        rec.dataset_name = meta.get("dataset", "")
        labels = arrays["gallery_labels"].astype(np.intp)
        rec.model = sparse.SparseModel(
            gallery=arrays["gallery"].reshape(width * height, len(labels)),
            gallery_labels=labels,
            config=config,
            num_classes=len(individuals),
            width=width,
            height=height,
        )
        return rec


class BarkRecognizer:
    """Random-convnet features with a fixed architecture, plus a linear SVM."""

    method = "bark"

    def __init__(self, spec: randconv.ArchitectureSpec, svm_c: float = BARK_SVM_C,
                 svm_seed: int = 0):
        self.spec = spec
        self.svm_c = svm_c
        self.svm_seed = svm_seed
        self.svm = None

    def fit(self, train: GalleryDataset):
        features = [randconv.extract_features(self.spec, img) for img, _ in train.samples]
        self.svm = svm_train(
            features, train.labels(), SvmConfig(c=self.svm_c, seed=self.svm_seed)
        )
        self.individuals = list(train.individuals)
        self.dataset_name = train.name
        width, height = train.image_size()
        self.width, self.height = width, height
        return self

    def score(self, img: FaceImage) -> np.ndarray:
        feature = randconv.extract_features(self.spec, img)
        raw = svm_scores(self.svm, feature)
        return _expand_scores(raw, self.svm.classes, len(self.individuals))

    def to_container(self):
        meta = _base_metadata(self.individuals, self.width, self.height, self.dataset_name)
        meta["spec"] = randconv.spec_to_line(self.spec)
        meta["svm_c"] = repr(self.svm_c)
        arrays = [
            ("weights", self.svm.weights.ravel()),
            ("biases", self.svm.biases),
            ("classes", self.svm.classes.astype(np.float64)),
        ]
        return self.method, meta, arrays

    @classmethod
    def from_container(cls, meta, arrays):
        spec = randconv.spec_from_line(meta["spec"])
        rec = cls(spec=spec, svm_c=float(meta["svm_c"]))
        rec.individuals = meta["individuals"].split("\t")
        rec.dataset_name = meta.get("dataset", "")
        rec.width, rec.height = int(meta["width"]), int(meta["height"])
        classes = arrays["classes"].astype(np.intp)
        biases = arrays["biases"]
        rec.svm = SvmModel(
            weights=arrays["weights"].reshape(len(classes), -1),
            biases=biases,
            classes=classes,
            feature_dim=arrays["weights"].size // len(classes),
            config=SvmConfig(c=float(meta["svm_c"])),
        )
        return rec


class BarkSearchRecognizer:
    """Runs the architecture search inside fit, on the training split only,
    then behaves like a fixed-spec recognizer with the winning spec."""

    method = "bark"

    def __init__(self, search_config: archsearch.SearchConfig, svm_seed: int = 0):
        self.search_config = search_config
        self.svm_seed = svm_seed
        self.inner = None
        self.best_trial = None
        self.history = None

    def fit(self, train: GalleryDataset):
        best, history = archsearch.run_search(train, self.search_config)
        self.best_trial = best
        self.history = history
        self.inner = BarkRecognizer(
            best.spec, svm_c=self.search_config.svm_c, svm_seed=self.svm_seed
        ).fit(train)
        return self

    def score(self, img: FaceImage) -> np.ndarray:
        return self.inner.score(img)

    def to_container(self):
        return self.inner.to_container()

    @property
    def individuals(self):
        return self.inner.individuals


class WoofRecognizer:
    """Deep features ingested from a DOGFEAT file, classified by a linear SVM."""

    method = "woof"

    def __init__(self, feature_file: deepfeat.FeatureFile | None, svm_c: float = WOOF_SVM_C,
                 svm_seed: int = 0):
        self.feature_file = feature_file
        self.svm_c = svm_c
        self.svm_seed = svm_seed
        self.svm = None

    def fit(self, train: GalleryDataset):
        if self.feature_file is None:
            raise PawprintError("woof recognizer needs a feature file to fit")
        features, labels = deepfeat.bind_features(self.feature_file, train)
        self.svm = svm_train(features, labels, SvmConfig(c=self.svm_c, seed=self.svm_seed))
        self.individuals = list(train.individuals)
        self.dataset_name = train.name
        self._table = self.feature_file.key_map()
        return self

    def _lookup(self, img: FaceImage) -> np.ndarray:
        key = deepfeat.dataset_key(img.source_id)
        if key not in self._table:
            raise PawprintError(f"no feature record for probe {img.source_id!r}")
        return self._table[key]

    def score(self, img: FaceImage) -> np.ndarray:
        raw = svm_scores(self.svm, self._lookup(img))
        return _expand_scores(raw, self.svm.classes, len(self.individuals))

    def score_feature(self, feature) -> np.ndarray:
        raw = svm_scores(self.svm, feature)
        return _expand_scores(raw, self.svm.classes, len(self.individuals))

    def to_container(self):
        meta = _base_metadata(self.individuals, 0, 0, self.dataset_name)
        meta["svm_c"] = repr(self.svm_c)
        meta["feature_dim"] = str(self.svm.feature_dim)
        arrays = [
            ("weights", self.svm.weights.ravel()),
            ("biases", self.svm.biases),
            ("classes", self.svm.classes.astype(np.float64)),
        ]
        return self.method, meta, arrays

    @classmethod
    def from_container(cls, meta, arrays):
        rec = cls(feature_file=None, svm_c=float(meta["svm_c"]))
        rec.individuals = meta["individuals"].split("\t")
        rec.dataset_name = meta.get("dataset", "")
        classes = arrays["classes"].astype(np.intp)
        rec.svm = SvmModel(
            weights=arrays["weights"].reshape(len(classes), -1),
            biases=arrays["biases"],
            classes=classes,
            feature_dim=int(meta["feature_dim"]),
            config=SvmConfig(c=float(meta["svm_c"])),
        )
        return rec


_FROM_CONTAINER = {
    "eigen": EigenfacesRecognizer.from_container,
    "fisher": FisherfacesRecognizer.from_container,
    "lbph": LbphRecognizer.from_container,
    "sparse": SparseRecognizer.from_container,
    "bark": BarkRecognizer.from_container,
    "woof": WoofRecognizer.from_container,
}


def recognizer_from_container(method: str, meta: dict, arrays: dict):
    if method not in _FROM_CONTAINER:
        raise ContainerError(f"unknown method tag {method!r}")
    return _FROM_CONTAINER[method](meta, arrays)
