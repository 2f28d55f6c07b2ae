import math

import numpy as np
import pytest

from pawprint.errors import PawprintError
from pawprint.evalkit import (
    balanced_accuracy,
    grouped_accuracy,
    odds_ratio,
    rank_of_true_class,
    run_protocol,
    stratified_folds,
    topk_recall,
    write_report_files,
)
from pawprint.imaging import FaceImage, GalleryDataset
from pawprint.synthetic import make_synthetic_gallery


def dataset_with_class_sizes(sizes):
    samples = []
    individuals = [f"c{i}" for i in range(len(sizes))]
    for ci, count in enumerate(sizes):
        for j in range(count):
            img = FaceImage(pixels=np.full((2, 2), 0.5), source_id=f"c{ci}/{j}.png")
            samples.append((img, ci))
    return GalleryDataset(individuals=individuals, samples=samples, name="sizes")


class TestStratifiedFolds:
    def test_ten_samples_one_per_fold(self):
        ds = dataset_with_class_sizes([10])
        plan = stratified_folds(ds, 10, seed=1)
        counts = np.bincount(plan.assignments, minlength=10)
        assert np.all(counts == 1)

    def test_five_sample_class_hits_five_distinct_folds(self):
        ds = dataset_with_class_sizes([5, 10])
        plan = stratified_folds(ds, 10, seed=2)
        labels = ds.labels()
        counts = np.bincount(plan.assignments[labels == 0], minlength=10)
        assert np.sum(counts == 1) == 5
        assert np.sum(counts == 0) == 5

    def test_same_seed_same_plan(self):
        ds = dataset_with_class_sizes([7, 9, 4])
        a = stratified_folds(ds, 5, seed=3)
        b = stratified_folds(ds, 5, seed=3)
        assert np.array_equal(a.assignments, b.assignments)

    def test_global_and_per_class_balance(self):
        rng = np.random.default_rng(0)
        for _ in range(20):
            sizes = rng.integers(1, 12, size=rng.integers(2, 6)).tolist()
            k = int(rng.integers(2, 8))
            ds = dataset_with_class_sizes(sizes)
            if k > len(ds):
                continue
            plan = stratified_folds(ds, k, seed=int(rng.integers(100)))
            global_counts = np.bincount(plan.assignments, minlength=k)
            assert global_counts.max() - global_counts.min() <= 1
            labels = ds.labels()
            for ci in range(len(sizes)):
                counts = np.bincount(plan.assignments[labels == ci], minlength=k)
                assert counts.max() - counts.min() <= 1

    def test_more_folds_than_samples_rejected(self):
        ds = dataset_with_class_sizes([3])
        with pytest.raises(PawprintError):
            stratified_folds(ds, 4, seed=0)


class TestBalancedAccuracy:
    def test_perfect_diagonal(self):
        assert balanced_accuracy(np.diag([4, 9, 2])) == 1.0

    def test_two_class_mean(self):
        confusion = np.array([[4, 0], [2, 2]])
        assert balanced_accuracy(confusion) == 0.75

    def test_balanced_is_not_pooled(self):
        confusion = np.array([[9, 1], [1, 1]])
        assert balanced_accuracy(confusion) == pytest.approx(0.7)
        assert balanced_accuracy(confusion) != pytest.approx(10 / 12)

    def test_missing_class_excluded_with_warning(self):
        confusion = np.array([[3, 0], [0, 0]])
        with pytest.warns(UserWarning, match="without test samples"):
            assert balanced_accuracy(confusion) == 1.0

    def test_empty_confusion_rejected(self):
        with pytest.raises(PawprintError):
            balanced_accuracy(np.zeros((3, 3)))


class TestTopkRecall:
    def rankings_with_ranks(self, ranks, c=6):
        """Fixtures whose true class sits at the given 1-based ranks."""
        out = []
        for r in ranks:
            scores = -np.arange(c, dtype=float)  # descending: rank i+1 at index i
            out.append((r - 1, scores))
        return out

    def test_full_k_is_always_one(self):
        rankings = self.rankings_with_ranks([1, 3, 6])
        assert topk_recall(rankings, 6) == 1.0

    def test_rank_three_counts_only_from_k_three(self):
        rankings = self.rankings_with_ranks([3])
        assert topk_recall(rankings, 2) == 0.0
        assert topk_recall(rankings, 3) == 1.0

    def test_hand_fixture(self):
        rankings = self.rankings_with_ranks([1, 2, 4, 5])
        assert topk_recall(rankings, 2) == 0.5

    def test_tie_breaks_to_lower_class_index(self):
        scores = np.array([1.0, 1.0, 0.0])
        assert rank_of_true_class(0, scores) == 1
        assert rank_of_true_class(1, scores) == 2

    def test_out_of_range_k_rejected(self):
        rankings = self.rankings_with_ranks([1])
        with pytest.raises(PawprintError):
            topk_recall(rankings, 0)
        with pytest.raises(PawprintError):
            topk_recall(rankings, 7)

    def test_monotone_in_k(self):
        rng = np.random.default_rng(1)
        for _ in range(50):
            c = int(rng.integers(2, 9))
            rankings = [
                (int(rng.integers(c)), rng.normal(size=c)) for _ in range(20)
            ]
            values = [topk_recall(rankings, k) for k in range(1, c + 1)]
            assert all(b >= a for a, b in zip(values, values[1:]))
            assert values[-1] == 1.0


class TestOddsRatio:
    def test_equal_probabilities(self):
        assert odds_ratio(0.3, 0.3) == pytest.approx(1.0)

    def test_paper_style_example(self):
        assert odds_ratio(0.9, 5 / 21) == pytest.approx(28.8, abs=1e-12)

    def test_zero_recall(self):
        assert odds_ratio(0.0, 0.5) == 0.0

    def test_perfect_recall_is_infinite(self):
        assert odds_ratio(1.0, 0.5) == math.inf

    def test_invalid_chance_rejected(self):
        with pytest.raises(PawprintError):
            odds_ratio(0.5, 0.0)
        with pytest.raises(PawprintError):
            odds_ratio(0.5, 1.0)

    def test_above_chance_iff_ratio_above_one(self):
        rng = np.random.default_rng(2)
        for _ in range(100):
            p = float(rng.uniform(0, 0.99))
            q = float(rng.uniform(0.01, 0.99))
            assert (odds_ratio(p, q) > 1.0) == (p > q)


class OracleRecognizer:
    """Scores the true class highest by construction (reads nothing)."""

    def __init__(self, ds):
        self.truth = {img.source_id: c for img, c in ds.samples}
        self.c = ds.num_classes

    def fit(self, train):
        pass

    def score(self, img):
        scores = np.zeros(self.c)
        scores[self.truth[img.source_id]] = 1.0
        return scores


class ConstantRecognizer:
    def __init__(self, c):
        self.c = c

    def fit(self, train):
        pass

    def score(self, img):
        scores = np.zeros(self.c)
        scores[0] = 1.0
        return scores


class TestRunProtocol:
    def test_oracle_stub_is_perfect(self):
        ds = make_synthetic_gallery(num_individuals=3, samples_each=4, size=16, seed=1)
        report = run_protocol(ds, lambda: OracleRecognizer(ds), k=4, seed=0)
        assert report.balanced_accuracy == 1.0
        assert report.topk_recall[1] == 1.0

    def test_constant_stub_on_balanced_two_class_set(self):
        ds = make_synthetic_gallery(num_individuals=2, samples_each=6, size=16, seed=2)
        report = run_protocol(ds, lambda: ConstantRecognizer(2), k=3, seed=0)
        assert report.balanced_accuracy == 0.5

    def test_deterministic_repeat(self):
        ds = make_synthetic_gallery(num_individuals=3, samples_each=4, size=16, seed=3)
        a = run_protocol(ds, lambda: OracleRecognizer(ds), k=4, seed=5)
        b = run_protocol(ds, lambda: OracleRecognizer(ds), k=4, seed=5)
        assert np.array_equal(a.confusion, b.confusion)
        assert a.topk_recall == b.topk_recall
        assert a.fold_test_keys == b.fold_test_keys

    def test_every_sample_tested_exactly_once(self):
        ds = make_synthetic_gallery(num_individuals=3, samples_each=5, size=16, seed=4)
        report = run_protocol(ds, lambda: OracleRecognizer(ds), k=5, seed=1)
        assert report.confusion.sum() == len(ds)
        tested = [key for fold in report.fold_test_keys for key in fold]
        assert sorted(tested) == sorted(ds.sample_keys())

    def test_jobs_do_not_change_the_report(self):
        ds = make_synthetic_gallery(num_individuals=3, samples_each=4, size=16, seed=5)
        a = run_protocol(ds, lambda: OracleRecognizer(ds), k=4, seed=2, jobs=1)
        b = run_protocol(ds, lambda: OracleRecognizer(ds), k=4, seed=2, jobs=3)
        assert np.array_equal(a.confusion, b.confusion)
        assert a.topk_recall == b.topk_recall

    def test_singleton_class_still_scored_when_absent_from_training(self):
        # a class with one sample has no training data in its own test fold;
        # recognizers score it with the absent sentinel and the protocol
        # still completes with every sample tested once
        from pawprint.recognizers import EigenfacesRecognizer
        from pawprint.synthetic import make_synthetic_gallery

        base = make_synthetic_gallery(num_individuals=3, samples_each=5, size=16,
                                      seed=8)
        keep = [i for i, (_, c) in enumerate(base.samples) if c != 2 or i % 5 == 0]
        ds = base.subset(keep)
        assert int((ds.labels() == 2).sum()) == 1
        with pytest.warns(UserWarning):  # component clamp on tiny folds
            report = run_protocol(ds, lambda: EigenfacesRecognizer(80), k=3, seed=0)
        assert report.confusion.sum() == len(ds)
        assert report.confusion[2].sum() == 1

    def test_random_scorer_converges_to_chance(self):
        # balanced accuracy of a uniform scorer over C classes ~ 1/C within
        # 3 sigma of the binomial mean over 10000 simulated tests
        c, per_class = 5, 2000
        rng = np.random.default_rng(6)
        confusion = np.zeros((c, c), dtype=np.int64)
        for true in range(c):
            preds = rng.integers(0, c, size=per_class)
            for p in preds:
                confusion[true, p] += 1
        ba = balanced_accuracy(confusion)
        sigma = math.sqrt((1 / c) * (1 - 1 / c) / per_class / c)
        assert abs(ba - 1 / c) <= 3 * sigma


class TestReportFiles:
    def test_files_written_and_deterministic(self, tmp_path):
        ds = make_synthetic_gallery(num_individuals=3, samples_each=4, size=16, seed=7)
        report = run_protocol(ds, lambda: OracleRecognizer(ds), k=4, seed=0,
                              method="oracle")
        out1 = tmp_path / "r1"
        out2 = tmp_path / "r2"
        names = write_report_files(report, out1)
        write_report_files(report, out2)
        assert set(names) == {
            "report.txt", "report.tsv", "confusion.csv", "recall_curve.tsv"
        }
        for name in names:
            assert (out1 / name).read_bytes() == (out2 / name).read_bytes()

    def test_tsv_and_curve_contents(self, tmp_path):
        ds = make_synthetic_gallery(num_individuals=3, samples_each=4, size=16, seed=8)
        report = run_protocol(ds, lambda: OracleRecognizer(ds), k=4, seed=0,
                              method="oracle")
        write_report_files(report, tmp_path)
        tsv = (tmp_path / "report.tsv").read_text()
        assert "balanced_accuracy\t-\t1.0\n" in tsv
        curve = (tmp_path / "recall_curve.tsv").read_text().splitlines()
        assert curve[0] == "k\trecall\todds_ratio"
        # full-k recall of 1.0 renders the infinity sign for its odds ratio
        assert any("∞" in line for line in curve[1:])

    def test_grouped_accuracy(self, tmp_path):
        ds = make_synthetic_gallery(num_individuals=4, samples_each=4, size=16, seed=9)
        report = run_protocol(ds, lambda: OracleRecognizer(ds), k=4, seed=0)
        groups = {"dog00": "pug", "dog01": "pug", "dog02": "husky", "dog03": "husky"}
        acc = grouped_accuracy(report, groups)
        assert acc == {"husky": 1.0, "pug": 1.0}
        write_report_files(report, tmp_path, groups=groups)
        assert "group_accuracy\thusky\t1.0" in (tmp_path / "report.tsv").read_text()

    def test_confusion_csv_shape(self, tmp_path):
        ds = make_synthetic_gallery(num_individuals=3, samples_each=4, size=16, seed=10)
        report = run_protocol(ds, lambda: OracleRecognizer(ds), k=4, seed=0)
        write_report_files(report, tmp_path)
        lines = (tmp_path / "confusion.csv").read_text().strip().splitlines()
        assert len(lines) == 4  # header + 3 classes
        assert lines[0] == ",dog00,dog01,dog02"
