"""Ingestion of externally computed deep features (DOGFEAT files).

Grammar (UTF-8, LF line endings)::

    DOGFEAT 1 <count> <dim>
    <individual_label>\t<image_id>\t<v1> <v2> ... <v_dim>

Comment lines starting with ``#`` may follow the header and are ignored.
Records are matched to gallery samples by (individual label, source file
name without extension). Output ordering always follows the dataset, never
the file.
"""

from __future__ import annotations

import math
import warnings
from dataclasses import dataclass
from pathlib import Path

import numpy as np

from .errors import ParseError, PawprintError
from .imaging import GalleryDataset
from .svm import SvmConfig, SvmModel, WOOF_SVM_C, svm_scores, svm_train

MAGIC = "DOGFEAT"
VERSION = 1


@dataclass(frozen=True)
class FeatureRecord:
    individual_label: str
    image_id: str
    vector: np.ndarray


@dataclass(frozen=True)
class FeatureFile:
    count: int
    dim: int
    records: tuple[FeatureRecord, ...]

    def key_map(self) -> dict[tuple[str, str], np.ndarray]:
        return {(r.individual_label, r.image_id): r.vector for r in self.records}


def read_feature_file(path) -> FeatureFile:
    """Parse and validate a DOGFEAT file; errors carry line/column."""
    text = Path(path).read_text(encoding="utf-8")
    lines = text.split("\n")
    if lines and lines[-1] == "":
        lines.pop()
    if not lines:
        raise ParseError("missing header", line=1)

    header = lines[0].split(" ")
    if len(header) != 4 or header[0] != MAGIC:
        raise ParseError(f"expected '{MAGIC} {VERSION} <count> <dim>' header", line=1)
    if header[1] != str(VERSION):
        raise ParseError(f"unsupported version {header[1]!r}", line=1)
    try:
        count = int(header[2])
        dim = int(header[3])
    except ValueError:
        raise ParseError("header count and dim must be unsigned integers", line=1)
    if count < 0 or dim < 1:
        raise ParseError("header count must be >= 0 and dim >= 1", line=1)

    records: list[FeatureRecord] = []
    seen: set[tuple[str, str]] = set()
    for ln, raw in enumerate(lines[1:], start=2):
        if raw.startswith("#"):
            continue
        if raw == "":
            raise ParseError("blank line inside record section", line=ln)
        parts = raw.split("\t")
        if len(parts) != 3:
            raise ParseError(
                f"expected label<TAB>id<TAB>values, got {len(parts)} field(s)", line=ln
            )
        label, image_id, value_text = parts
        tokens = value_text.split(" ")
        if len(tokens) != dim:
            raise ParseError(
                f"expected {dim} values, got {len(tokens)}", line=ln
            )
        values = np.empty(dim)
        for col, token in enumerate(tokens, start=1):
            try:
                v = float(token)
            except ValueError:
                raise ParseError(f"bad number {token!r}", line=ln, column=col)
            if not math.isfinite(v):
                raise ParseError(f"non-finite value {token!r}", line=ln, column=col)
            values[col - 1] = v
        key = (label, image_id)
        if key in seen:
            raise ParseError(f"duplicate record for {label!r}/{image_id!r}", line=ln)
        seen.add(key)
        records.append(FeatureRecord(label, image_id, values))

    if len(records) != count:
        raise ParseError(
            f"header declares {count} records but file has {len(records)}", line=1
        )
    return FeatureFile(count=count, dim=dim, records=tuple(records))


def write_feature_file(path, records, dim: int, comments=()) -> None:
    """Write the grammar exactly; floats use shortest round-trip form."""
    rows = list(records)
    out = [f"{MAGIC} {VERSION} {len(rows)} {dim}"]
    out.extend(f"# {c}" for c in comments)
    for label, image_id, vector in rows:
        vec = np.asarray(vector, dtype=np.float64).ravel()
        if vec.shape[0] != dim:
            raise PawprintError(
                f"record {label!r}/{image_id!r} has {vec.shape[0]} values, not {dim}"
            )
        values = " ".join(repr(float(v)) for v in vec)
        out.append(f"{label}\t{image_id}\t{values}")
    Path(path).write_text("\n".join(out) + "\n", encoding="utf-8")


def dataset_key(source_id: str) -> tuple[str, str]:
    """(label, file stem) for a sample's ``label/filename`` source id."""
    label, _, filename = source_id.partition("/")
    stem = filename.rsplit(".", 1)[0] if "." in filename else filename
    return label, stem


def bind_features(ff: FeatureFile, ds: GalleryDataset):
    """Align feature vectors to dataset order; returns (features, labels).

    Missing records are an error (up to 10 keys listed); extra records are
    ignored with a count warning.
    """
    table = ff.key_map()
    features = []
    missing = []
    used = set()
    for img, _ in ds.samples:
        key = dataset_key(img.source_id)
        if key in table:
            features.append(table[key])
            used.add(key)
        else:
            missing.append(key)
    if missing:
        shown = ", ".join(f"{l}/{i}" for l, i in missing[:10])
        more = f" (+{len(missing) - 10} more)" if len(missing) > 10 else ""
        raise PawprintError(f"feature file lacks {len(missing)} sample(s): {shown}{more}")
    extra = len(table) - len(used)
    if extra > 0:
        warnings.warn(f"{extra} unmatched feature record(s) ignored", stacklevel=2)
    return features, ds.labels()


def woof_train(features, labels, c: float = WOOF_SVM_C, seed: int = 0) -> SvmModel:
    """Linear SVM over ingested deep features (default C = 1.0)."""
    return svm_train(features, labels, SvmConfig(c=c, seed=seed))


def woof_scores(model: SvmModel, feature) -> np.ndarray:
    return svm_scores(model, feature)
