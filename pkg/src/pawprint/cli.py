"""Command-line interface: evaluate / train / query / search-arch / align.

All randomness flows from --seed, so any command repeated with identical
flags reproduces its outputs byte for byte. Exit codes: 0 success, 1
runtime failure, 2 usage error.
"""

from __future__ import annotations

import argparse
import logging
import sys
import warnings
from pathlib import Path

import numpy as np

from . import archsearch, container, deepfeat, evalkit, imaging, randconv, recognizers
from .errors import PawprintError
from .svm import BARK_SVM_C, WOOF_SVM_C, softmax_probabilities

log = logging.getLogger(__name__)

USAGE_ERROR = 2


class UsageError(PawprintError):
    pass


def _parse_size(text: str) -> tuple[int, int]:
    try:
        w, h = (int(v) for v in text.lower().split("x"))
    except ValueError:
        raise UsageError(f"size must look like 250x250, got {text!r}")
    if w < 1 or h < 1:
        raise UsageError("size components must be positive")
    return (w, h)


def _parse_point(text: str) -> tuple[float, float]:
    try:
        x, y = (float(v) for v in text.split(","))
    except ValueError:
        raise UsageError(f"point must look like x,y; got {text!r}")
    return (x, y)


def _read_groups(path) -> dict[str, str]:
    groups = {}
    for raw in Path(path).read_text(encoding="utf-8").splitlines():
        line = raw.strip()
        if not line or line.startswith("#"):
            continue
        label, sep, group = line.partition("\t")
        if not sep:
            raise UsageError(f"groups file line must be label<TAB>group: {raw!r}")
        groups[label] = group
    return groups


def _recognizer_factory(args):
    """Zero-arg factory building a fresh recognizer; fresh per fold."""
    method = args.method
    if method == "eigen":
        return lambda: recognizers.EigenfacesRecognizer(num_components=args.components)
    if method == "fisher":
        return lambda: recognizers.FisherfacesRecognizer()
    if method == "lbph":
        grid = _parse_size(args.grid)
        return lambda: recognizers.LbphRecognizer(grid=grid)
    if method == "sparse":
        from .sparse import SparseConfig

        config = SparseConfig(m_fraction=args.m_fraction, ridge=args.ridge)
        return lambda: recognizers.SparseRecognizer(config=config)
    if method == "bark":
        svm_c = args.svm_c if args.svm_c is not None else BARK_SVM_C
        if args.spec:
            spec = randconv.spec_from_text(Path(args.spec).read_text(encoding="utf-8"))
            return lambda: recognizers.BarkRecognizer(spec, svm_c=svm_c)
        if args.search_budget:
            config = archsearch.SearchConfig(
                budget=args.search_budget,
                optimizer=args.optimizer,
                master_seed=args.seed,
                svm_c=svm_c,
            )
            return lambda: recognizers.BarkSearchRecognizer(config)
        raise UsageError("--method bark needs --spec FILE or --search-budget N")
    if method == "woof":
        if not args.features:
            raise UsageError(
                "--method woof needs --features FILE with precomputed deep features"
            )
        ff = deepfeat.read_feature_file(args.features)
        svm_c = args.svm_c if args.svm_c is not None else WOOF_SVM_C
        return lambda: recognizers.WoofRecognizer(ff, svm_c=svm_c)
    raise UsageError(f"unknown method {method!r}")


def cmd_evaluate(args) -> int:
    ds = imaging.load_dataset(args.dataset, _parse_size(args.size))
    factory = _recognizer_factory(args)
    report = evalkit.run_protocol(
        ds,
        factory,
        k=args.folds,
        seed=args.seed,
        method=args.method,
        chance_classes=args.chance_classes,
        jobs=args.jobs,
    )
    groups = _read_groups(args.groups) if args.groups else None
    files = evalkit.write_report_files(report, args.out, groups=groups)
    print(f"balanced accuracy: {report.balanced_accuracy:.4f}")
    print(f"report files in {args.out}: {', '.join(files)}")
    return 0


def cmd_train(args) -> int:
    ds = imaging.load_dataset(args.dataset, _parse_size(args.size))
    rec = _recognizer_factory(args)()
    rec.fit(ds)
    method, meta, arrays = rec.to_container()
    container.save_container(args.model, method, meta, arrays)
    print(f"saved {method} model to {args.model}")
    return 0


def cmd_query(args) -> int:
    method, meta, arrays = container.load_container(args.model)
    rec = recognizers.recognizer_from_container(method, meta, arrays)
    individuals = rec.individuals

    if method == "woof":
        if not args.probe_features:
            raise UsageError("querying a woof model needs --probe-features FILE")
        ff = deepfeat.read_feature_file(args.probe_features)
        if len(ff.records) != 1:
            raise UsageError(
                f"probe feature file must hold exactly 1 record, found {len(ff.records)}"
            )
        scores = rec.score_feature(ff.records[0].vector)
        probe_name = f"{ff.records[0].individual_label}/{ff.records[0].image_id}"
    else:
        if not args.probe:
            raise UsageError("query needs --probe IMAGE")
        raster = imaging.decode_image(Path(args.probe))
        face = imaging.to_grayscale(raster, source_id=Path(args.probe).name)
        width, height = int(meta["width"]), int(meta["height"])
        face = imaging.resize_bilinear(face, width, height)
        scores = rec.score(face)
        probe_name = args.probe

    top_k = args.top_k
    if top_k > len(individuals):
        warnings.warn(
            f"top-k clamped from {top_k} to the {len(individuals)} known individuals"
        )
        top_k = len(individuals)
    order = np.argsort(-scores, kind="stable")[:top_k]
    probs = softmax_probabilities(scores)
    print(f"top-{top_k} matches for {probe_name}:")
    for rank, idx in enumerate(order, start=1):
        print(
            f"  {rank}. {individuals[idx]}  score {scores[idx]:.6g}  "
            f"pseudo-probability {probs[idx]:.4f}"
        )
    return 0


def cmd_search_arch(args) -> int:
    ds = imaging.load_dataset(args.dataset, _parse_size(args.size))
    config = archsearch.SearchConfig(
        budget=args.budget,
        optimizer=args.optimizer,
        master_seed=args.seed,
        inner_folds=args.inner_folds,
        svm_c=args.svm_c if args.svm_c is not None else BARK_SVM_C,
    )
    best, history = archsearch.run_search(ds, config, jobs=args.jobs)
    out = Path(args.out)
    out.mkdir(parents=True, exist_ok=True)
    with (out / "history.log").open("w", encoding="utf-8") as fh:
        for trial in history:
            objective = repr(trial.objective) if trial.objective is not None else "-"
            fh.write(
                f"{trial.index}\t{trial.status}\t{objective}\t"
                f"{randconv.spec_to_line(trial.spec)}\n"
            )
    (out / "best.spec").write_text(randconv.spec_to_text(best.spec), encoding="utf-8")
    print(
        f"best objective {best.objective:.4f} at trial {best.index}; "
        f"history.log and best.spec in {out}"
    )
    return 0


def cmd_align(args) -> int:
    from PIL import Image

    raster = imaging.decode_image(Path(args.image))
    face = imaging.to_grayscale(raster, source_id=Path(args.image).name)
    aligned = imaging.align_by_eyes(
        face, _parse_point(args.left_eye), _parse_point(args.right_eye)
    )
    eight_bit = np.clip(np.round(aligned.pixels * 255.0), 0, 255).astype(np.uint8)
    Image.fromarray(eight_bit, mode="L").save(args.out)
    print(f"aligned image written to {args.out}")
    return 0


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="pawprint",
        description="Individual dog-face identification: train, evaluate and query recognizers.",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    def add_common(p, with_method=True):
        p.add_argument("--dataset", required=True, help="dataset root directory")
        p.add_argument("--size", default="250x250", help="working image size WxH")
        p.add_argument("--seed", type=int, default=0)
        p.add_argument("--jobs", type=int, default=1, help="concurrent folds/candidates")
        if with_method:
            p.add_argument(
                "--method",
                required=True,
                choices=list(recognizers.METHODS),
            )
            p.add_argument("--components", type=int, default=80,
                           help="eigenfaces component count")
            p.add_argument("--grid", default="8x8", help="LBPH cell grid GXxGY")
            p.add_argument("--m-fraction", type=float, default=0.25,
                           dest="m_fraction", help="sparse phase-2 fraction")
            p.add_argument("--ridge", type=float, default=1e-6)
            p.add_argument("--svm-c", type=float, default=None, dest="svm_c",
                           help="SVM C (default 1e5 for bark, 1.0 for woof)")
            p.add_argument("--features", help="DOGFEAT file for woof")
            p.add_argument("--spec", help="architecture spec file for bark")
            p.add_argument("--search-budget", type=int, default=0,
                           dest="search_budget",
                           help="run architecture search per fold with this budget")
            p.add_argument("--optimizer", choices=["random", "tpe"], default="random")

    p_eval = sub.add_parser("evaluate", help="stratified k-fold evaluation")
    add_common(p_eval)
    p_eval.add_argument("--folds", type=int, default=10)
    p_eval.add_argument("--chance-classes", type=int, default=None,
                        dest="chance_classes",
                        help="odds-ratio chance denominator (default: class count)")
    p_eval.add_argument("--groups", help="label<TAB>group file for per-group accuracy")
    p_eval.add_argument("--out", default="reports", help="report output directory")
    p_eval.set_defaults(func=cmd_evaluate)

    p_train = sub.add_parser("train", help="train on a whole dataset and save a model")
    add_common(p_train)
    p_train.add_argument("--model", required=True, help="output model container path")
    p_train.set_defaults(func=cmd_train)

    p_query = sub.add_parser("query", help="rank individuals for one probe")
    p_query.add_argument("--model", required=True)
    p_query.add_argument("--probe", help="probe image file")
    p_query.add_argument("--probe-features", dest="probe_features",
                         help="single-record DOGFEAT file (woof models)")
    p_query.add_argument("--top-k", type=int, default=5, dest="top_k")
    p_query.set_defaults(func=cmd_query)

    p_search = sub.add_parser("search-arch", help="architecture search on a dataset")
    add_common(p_search, with_method=False)
    p_search.add_argument("--budget", type=int, required=True)
    p_search.add_argument("--optimizer", choices=["random", "tpe"], default="random")
    p_search.add_argument("--inner-folds", type=int, default=3, dest="inner_folds")
    p_search.add_argument("--svm-c", type=float, default=None, dest="svm_c")
    p_search.add_argument("--out", default="search", help="output directory")
    p_search.set_defaults(func=cmd_search_arch)

    p_align = sub.add_parser("align", help="rotate an image so the eyes are horizontal")
    p_align.add_argument("--image", required=True)
    p_align.add_argument("--left-eye", required=True, dest="left_eye", help="x,y")
    p_align.add_argument("--right-eye", required=True, dest="right_eye", help="x,y")
    p_align.add_argument("--out", required=True)
    p_align.set_defaults(func=cmd_align)

    return parser


def main(argv=None) -> int:
    logging.basicConfig(stream=sys.stderr, level=logging.INFO, format="%(message)s")
    parser = build_parser()
    args = parser.parse_args(argv)
    if getattr(args, "budget", None) is not None and args.command == "search-arch":
        if args.budget < 1:
            parser.error("--budget must be at least 1")
    try:
        return args.func(args)
    except UsageError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return USAGE_ERROR
    except PawprintError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1


if __name__ == "__main__":
    raise SystemExit(main())
