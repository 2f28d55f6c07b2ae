"""Stratified k-fold protocol, balanced accuracy, top-k recall, odds ratios.

Ranking ties are broken by the lowest class index everywhere (argmax and
top-k agree); recognizers mark classes they cannot score with ABSENT_SCORE,
the most negative finite double, so a total ordering always exists.
"""

from __future__ import annotations

import math
import sys
import warnings
from dataclasses import dataclass, field
from concurrent.futures import ThreadPoolExecutor

import numpy as np

from .errors import PawprintError
from .imaging import GalleryDataset

ABSENT_SCORE = -sys.float_info.max


def map_ordered(fn, items, jobs: int = 1):
    """Apply fn to items, optionally on a thread pool; results keep order."""
    if jobs <= 1 or len(items) <= 1:
        return [fn(item) for item in items]
    with ThreadPoolExecutor(max_workers=jobs) as pool:
        return list(pool.map(fn, items))


@dataclass(frozen=True)
class FoldPlan:
    k: int
    assignments: np.ndarray  # fold index per sample
    seed: int


def stratified_folds(ds: GalleryDataset, k: int, seed: int) -> FoldPlan:
    """Deal each class's shuffled samples round-robin into k folds.

    The dealing position starts at a seed-derived offset and runs on
    cumulatively across classes, which keeps both per-class and global
    fold sizes within one sample of each other. Classes with fewer than
    k samples simply miss some folds.
    """
    n = len(ds)
    if k < 2:
        raise PawprintError("fold count must be at least 2")
    if k > n:
        raise PawprintError(f"cannot split {n} samples into {k} folds")
    labels = ds.labels()
    assignments = np.empty(n, dtype=np.intp)
    rng = np.random.default_rng(np.random.SeedSequence((seed, k)))
    position = int(rng.integers(k))
    for ci in range(ds.num_classes):
        idx = np.flatnonzero(labels == ci)
        if len(idx) == 0:
            continue
        class_rng = np.random.default_rng(np.random.SeedSequence((seed, k, ci)))
        order = class_rng.permutation(len(idx))
        for j in order:
            assignments[idx[j]] = position % k
            position += 1
    return FoldPlan(k=k, assignments=assignments, seed=seed)


def balanced_accuracy(confusion: np.ndarray, warn_missing: bool = True) -> float:
    """Arithmetic mean of per-class accuracies (not pooled accuracy).

    Classes with no test sample are excluded; by default that raises a
    warning since it usually signals a protocol mistake.
    """
    confusion = np.asarray(confusion, dtype=np.float64)
    row_sums = confusion.sum(axis=1)
    present = row_sums > 0
    if not present.any():
        raise PawprintError("confusion matrix has no test samples")
    if warn_missing and not present.all():
        warnings.warn(
            f"{int((~present).sum())} class(es) without test samples excluded "
            "from balanced accuracy",
            stacklevel=2,
        )
    accs = np.diagonal(confusion)[present] / row_sums[present]
    return float(accs.mean())


def rank_of_true_class(true_class: int, scores: np.ndarray) -> int:
    """1-based rank of the true class; ties go to the lower class index."""
    s = np.asarray(scores)
    st = s[true_class]
    better = int((s > st).sum())
    tied_lower = int((s[:true_class] == st).sum())
    return 1 + better + tied_lower


def topk_recall(rankings, k: int) -> float:
    """Fraction of tests whose true class ranks within the top k scores."""
    if not rankings:
        raise PawprintError("no rankings to evaluate")
    c = len(rankings[0][1])
    if not 1 <= k <= c:
        raise PawprintError(f"k must be within [1, {c}], got {k}")
    hits = sum(1 for true, scores in rankings if rank_of_true_class(true, scores) <= k)
    return hits / len(rankings)


def odds_ratio(p: float, q: float) -> float:
    """(p/(1-p)) / (q/(1-q)); p = 1 maps to +inf (printed as the infinity sign)."""
    if not 0.0 <= p <= 1.0:
        raise PawprintError(f"recall must lie in [0, 1], got {p}")
    if not 0.0 < q < 1.0:
        raise PawprintError(f"chance level must lie in (0, 1), got {q}")
    if p == 1.0:
        return math.inf
    return (p / (1.0 - p)) / (q / (1.0 - q))


@dataclass
class EvaluationReport:
    dataset_name: str
    method: str
    k: int
    seed: int
    class_labels: list[str]
    per_fold: list[list[tuple[int, np.ndarray]]]
    confusion: np.ndarray  # C x C counts, rows = true class
    balanced_accuracy: float
    topk_recall: dict[int, float]
    odds_ratios: dict[int, float]
    chance_classes: int
    fold_train_keys: list[list[str]] = field(default_factory=list)
    fold_test_keys: list[list[str]] = field(default_factory=list)

    def rankings(self):
        return [pair for fold in self.per_fold for pair in fold]


def run_protocol(
    ds: GalleryDataset,
    make_recognizer,
    k: int = 10,
    seed: int = 0,
    method: str = "",
    chance_classes: int | None = None,
    jobs: int = 1,
) -> EvaluationReport:
    """Evaluate a recognizer with stratified k-fold cross-validation.

    ``make_recognizer`` builds a fresh recognizer per fold; it is fitted on
    the k-1 training folds only (any architecture search a recognizer runs
    internally therefore also sees only training data) and scores every
    held-out sample. The report records, per fold, which sample keys went
    to training and which to test so leakage is auditable.
    """
    plan = stratified_folds(ds, k, seed)
    c = ds.num_classes

    def eval_fold(fold: int):
        train_idx = np.flatnonzero(plan.assignments != fold)
        test_idx = np.flatnonzero(plan.assignments == fold)
        train = ds.subset(train_idx)
        rec = make_recognizer()
        rec.fit(train)
        rankings = []
        for i in test_idx:
            img, true_class = ds.samples[i]
            rankings.append((true_class, np.asarray(rec.score(img), dtype=np.float64)))
        test_keys = [ds.samples[i][0].source_id for i in test_idx]
        return rankings, train.sample_keys(), test_keys

    fold_results = map_ordered(eval_fold, list(range(k)), jobs)

    per_fold = [r[0] for r in fold_results]
    confusion = np.zeros((c, c), dtype=np.int64)
    for fold_rankings in per_fold:
        for true_class, scores in fold_rankings:
            confusion[true_class, int(np.argmax(scores))] += 1

    chance = chance_classes if chance_classes is not None else c
    recalls: dict[int, float] = {}
    odds: dict[int, float] = {}
    all_rankings = [pair for fold in per_fold for pair in fold]
    for kk in range(1, c + 1):
        recalls[kk] = topk_recall(all_rankings, kk)
        q = kk / chance
        if 0.0 < q < 1.0:
            odds[kk] = odds_ratio(recalls[kk], q)

    return EvaluationReport(
        dataset_name=ds.name,
        method=method,
        k=k,
        seed=seed,
        class_labels=list(ds.individuals),
        per_fold=per_fold,
        confusion=confusion,
        balanced_accuracy=balanced_accuracy(confusion),
        topk_recall=recalls,
        odds_ratios=odds,
        chance_classes=chance,
        fold_train_keys=[r[1] for r in fold_results],
        fold_test_keys=[r[2] for r in fold_results],
    )


def _fmt(value: float) -> str:
    if value == math.inf:
        return "∞"
    return repr(float(value))


def per_class_accuracy(report: EvaluationReport) -> dict[str, float]:
    out = {}
    for i, label in enumerate(report.class_labels):
        row = report.confusion[i].sum()
        if row > 0:
            out[label] = float(report.confusion[i, i] / row)
    return out


def grouped_accuracy(report: EvaluationReport, groups: dict[str, str]) -> dict[str, float]:
    """Mean per-class accuracy within each group of a label -> group map."""
    acc = per_class_accuracy(report)
    sums: dict[str, list[float]] = {}
    for label, value in acc.items():
        group = groups.get(label)
        if group is not None:
            sums.setdefault(group, []).append(value)
    return {g: float(np.mean(v)) for g, v in sorted(sums.items())}


def write_report_files(report: EvaluationReport, out_dir, groups=None) -> list[str]:
    """Write the four report artifacts; returns the file names written.

    report.txt     human-readable summary table
    report.tsv     metric<TAB>key<TAB>value records
    confusion.csv  counts with class labels on both axes
    recall_curve.tsv  k<TAB>recall<TAB>odds_ratio rows for plotting
    """
    from pathlib import Path

    out = Path(out_dir)
    out.mkdir(parents=True, exist_ok=True)
    class_acc = per_class_accuracy(report)
    group_acc = grouped_accuracy(report, groups) if groups else {}

    lines = [
        f"dataset: {report.dataset_name}",
        f"method: {report.method}",
        f"folds: {report.k}",
        f"seed: {report.seed}",
        f"classes: {len(report.class_labels)}",
        f"tests: {int(report.confusion.sum())}",
        f"balanced accuracy: {report.balanced_accuracy:.4f}",
        "",
        "top-k recall (chance = k/%d):" % report.chance_classes,
    ]
    for kk, recall in report.topk_recall.items():
        odds = report.odds_ratios.get(kk)
        odds_text = f"  odds vs chance {_fmt(odds)}" if odds is not None else ""
        lines.append(f"  k={kk:<3d} recall {recall:.4f}{odds_text}")
    lines.append("")
    lines.append("per-class accuracy:")
    for label in report.class_labels:
        if label in class_acc:
            lines.append(f"  {label}: {class_acc[label]:.4f}")
    if group_acc:
        lines.append("")
        lines.append("per-group accuracy:")
        for group, value in group_acc.items():
            lines.append(f"  {group}: {value:.4f}")
    (out / "report.txt").write_text("\n".join(lines) + "\n", encoding="utf-8")

    rows = [
        ("dataset", "-", report.dataset_name),
        ("method", "-", report.method),
        ("folds", "-", str(report.k)),
        ("seed", "-", str(report.seed)),
        ("balanced_accuracy", "-", _fmt(report.balanced_accuracy)),
    ]
    for kk, recall in report.topk_recall.items():
        rows.append(("topk_recall", str(kk), _fmt(recall)))
    for kk, value in report.odds_ratios.items():
        rows.append(("odds_ratio", str(kk), _fmt(value)))
    for label in report.class_labels:
        if label in class_acc:
            rows.append(("class_accuracy", label, _fmt(class_acc[label])))
    for group, value in group_acc.items():
        rows.append(("group_accuracy", group, _fmt(value)))
    (out / "report.tsv").write_text(
        "".join(f"{m}\t{key}\t{v}\n" for m, key, v in rows), encoding="utf-8"
    )

    header = "," + ",".join(report.class_labels)
    csv_lines = [header]
    for i, label in enumerate(report.class_labels):
        csv_lines.append(label + "," + ",".join(str(int(v)) for v in report.confusion[i]))
    (out / "confusion.csv").write_text("\n".join(csv_lines) + "\n", encoding="utf-8")

    curve = ["k\trecall\todds_ratio"]
    for kk, recall in report.topk_recall.items():
        odds = report.odds_ratios.get(kk)
        curve.append(f"{kk}\t{_fmt(recall)}\t{_fmt(odds) if odds is not None else '-'}")
    (out / "recall_curve.tsv").write_text("\n".join(curve) + "\n", encoding="utf-8")

    return ["report.txt", "report.tsv", "confusion.csv", "recall_curve.tsv"]
