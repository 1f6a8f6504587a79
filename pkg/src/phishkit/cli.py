"""Command-line entry point for batch processing snapshot corpora.

A corpus is a directory of snapshot JSON files; labels come from a
manifest CSV of "filename,label" rows (label phish or legit). Exit codes:
0 success, 2 unusable configuration or I/O, 3 data-contract violation.
"""

from __future__ import annotations

import argparse
import csv
import statistics
import sys
import time
from concurrent.futures import ProcessPoolExecutor
from pathlib import Path

from . import evalharness, features, gbm
from .features import FEATURE_NAMES, extract_features, load_alexa
from .snapshot import (
    LABEL_LEGITIMATE,
    LABEL_PHISH,
    MalformedSnapshot,
    load_snapshot,
)
from .target_id import FixtureSearchClient, identify_target
from .urlparts import SuffixListError, UrlParseError, load_suffix_list

EXIT_OK = 0
EXIT_CONFIG = 2
EXIT_DATA = 3


class _ConfigError(Exception):
    pass


def _load_suffixes(path):
    try:
        return load_suffix_list(path)
    except SuffixListError as exc:
        raise _ConfigError(str(exc)) from exc


def _load_alexa(path):
    try:
        return load_alexa(path)
    except OSError as exc:
        raise _ConfigError(f"cannot read rank list: {exc}") from exc


def _corpus_files(corpus_dir) -> list[Path]:
    root = Path(corpus_dir)
    if not root.is_dir():
        raise _ConfigError(f"corpus directory not found: {corpus_dir}")
    files = sorted(p for p in root.iterdir() if p.suffix == ".json" and p.is_file())
    if not files:
        raise _ConfigError(f"no snapshot files in {corpus_dir}")
    return files


def _read_manifest(path) -> dict[str, str]:
    labels = {}
    try:
        with open(path, encoding="utf-8", newline="") as fh:
            for row in csv.reader(fh):
                if not row or row[0].strip() == "filename":
                    continue
                if len(row) < 2:
                    raise _ConfigError(f"manifest row without label: {row}")
                name, label = row[0].strip(), row[1].strip().lower()
                if label in ("legit", "legitimate"):
                    label = LABEL_LEGITIMATE
                elif label in ("phish", "phishing"):
                    label = LABEL_PHISH
                else:
                    raise _ConfigError(f"manifest label {label!r} not phish/legit")
                labels[name] = label
    except OSError as exc:
        raise _ConfigError(f"cannot read manifest: {exc}") from exc
    return labels


def _extract_one(path: Path, suffixes, alexa):
    snap = load_snapshot(path, suffixes)
    started = time.perf_counter()
    vec = extract_features(snap, suffixes, alexa)
    return vec, (time.perf_counter() - started) * 1000.0, snap.label


def _extract_corpus(files, suffixes, alexa, jobs=1):
    """Feature vectors per file; failures are skipped and reported.

    Returns (names, vectors, file_labels, timings_ms, skipped).
    """
    names, vectors, labels, timings = [], [], [], []
    skipped = 0

    def consume(path, outcome):
        nonlocal skipped
        if isinstance(outcome, Exception):
            skipped += 1
            print(f"skipping {path.name}: {outcome}", file=sys.stderr)
            return
        vec, ms, label = outcome
        names.append(path.name)
        vectors.append(vec)
        labels.append(label)
        timings.append(ms)

    if jobs > 1:
        with ProcessPoolExecutor(max_workers=jobs) as pool:
            futures = [pool.submit(_extract_one, p, suffixes, alexa) for p in files]
            for path, future in zip(files, futures):
                try:
                    consume(path, future.result())
                except (MalformedSnapshot, UrlParseError) as exc:
                    consume(path, exc)
    else:
        for path in files:
            try:
                consume(path, _extract_one(path, suffixes, alexa))
            except (MalformedSnapshot, UrlParseError) as exc:
                consume(path, exc)
    return names, vectors, labels, timings, skipped


def _manifest_labels_for(names, file_labels, manifest):
    out = []
    for name, embedded in zip(names, file_labels):
        label = manifest.get(name, embedded) if manifest else embedded
        out.append(label or "")
    return out


def _numeric_labels(labels):
    return [1 if lab == LABEL_PHISH else 0 for lab in labels]


def _print_timing(timings):
    if not timings:
        return
    stdev = statistics.pstdev(timings) if len(timings) > 1 else 0.0
    print(
        f"extraction ms per snapshot: median={statistics.median(timings):.1f} "
        f"mean={statistics.fmean(timings):.1f} stdev={stdev:.1f}"
    )


def cmd_extract(args) -> int:
    suffixes = _load_suffixes(args.suffixes)
    alexa = _load_alexa(args.alexa)
    files = _corpus_files(args.corpus)
    manifest = _read_manifest(args.manifest) if args.manifest else {}
    names, vectors, file_labels, timings, skipped = _extract_corpus(
        files, suffixes, alexa, args.jobs
    )
    labels = _manifest_labels_for(names, file_labels, manifest)
    features.write_feature_csv(args.out, vectors, labels)
    _print_timing(timings)
    print(f"wrote {len(vectors)} rows to {args.out} (skipped {skipped})")
    return EXIT_OK


def _labeled_rows(args, suffixes, alexa):
    """Rows and 0/1 labels from either a feature CSV or a corpus."""
    if args.features:
        try:
            rows, labels = features.read_feature_csv(args.features)
        except (OSError, ValueError) as exc:
            raise _ConfigError(f"cannot read feature CSV: {exc}") from exc
        keep = [(r, l) for r, l in zip(rows, labels) if l]
        if not keep:
            return [], []
        rows = [r for r, _ in keep]
        labels = [LABEL_PHISH if l.lower() in ("phish", "phishing") else LABEL_LEGITIMATE
                  for _, l in keep]
        return rows, _numeric_labels(labels)
    files = _corpus_files(args.corpus)
    manifest = _read_manifest(args.manifest) if args.manifest else {}
    names, vectors, file_labels, _, _ = _extract_corpus(files, suffixes, alexa, args.jobs)
    labels = _manifest_labels_for(names, file_labels, manifest)
    keep = [(v.values, lab) for v, lab in zip(vectors, labels) if lab]
    return [r for r, _ in keep], _numeric_labels([lab for _, lab in keep])


def cmd_train(args) -> int:
    suffixes = alexa = None
    if not args.features:
        suffixes = _load_suffixes(args.suffixes)
        alexa = _load_alexa(args.alexa)
    rows, labels = _labeled_rows(args, suffixes, alexa)
    cfg = gbm.TrainConfig(
        n_trees=args.trees,
        max_depth=args.depth,
        learning_rate=args.learning_rate,
        min_leaf=args.min_leaf,
        subsample=args.subsample,
        seed=args.seed,
    )
    try:
        cfg.validate()
    except gbm.ConfigError as exc:
        raise _ConfigError(str(exc)) from exc
    try:
        model = gbm.train(
            rows, labels, cfg, feature_names=FEATURE_NAMES, threshold=args.threshold
        )
    except gbm.SingleClassError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_DATA
    gbm.save_model(model, args.out)
    print(
        f"trained {len(model.trees)} trees on {len(rows)} rows; "
        f"final log-loss {model.train_loss[-1]:.6f}; model at {args.out}"
    )
    return EXIT_OK


def _load_model(path) -> gbm.GbmModel:
    try:
        return gbm.load_model(path)
    except gbm.ModelFileError as exc:
        raise _ConfigError(str(exc)) from exc


def cmd_predict(args) -> int:
    model = _load_model(args.model)
    suffixes = _load_suffixes(args.suffixes)
    alexa = _load_alexa(args.alexa)
    files = _corpus_files(args.corpus)
    names, vectors, _, _, skipped = _extract_corpus(files, suffixes, alexa, args.jobs)
    threshold = model.threshold if args.threshold is None else args.threshold
    with open(args.out, "w", encoding="utf-8", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow(["file", "confidence", "class"])
        for name, vec in zip(names, vectors):
            confidence = model.predict_confidence(vec.values)
            writer.writerow([name, repr(confidence), gbm.decide(confidence, threshold)])
    print(f"wrote {len(names)} verdicts to {args.out} (skipped {skipped})")
    return EXIT_OK


def _eval_inputs(args):
    model = _load_model(args.model)
    suffixes = _load_suffixes(args.suffixes)
    alexa = _load_alexa(args.alexa)
    files = _corpus_files(args.corpus)
    manifest = _read_manifest(args.manifest) if args.manifest else {}
    names, vectors, file_labels, _, _ = _extract_corpus(files, suffixes, alexa, args.jobs)
    labels = _manifest_labels_for(names, file_labels, manifest)
    pairs = [(v.values, lab) for v, lab in zip(vectors, labels) if lab]
    if not pairs:
        print("error: no labeled snapshots", file=sys.stderr)
        return model, None, None
    rows = [r for r, _ in pairs]
    y = _numeric_labels([lab for _, lab in pairs])
    return model, rows, y


def _write_metrics_csv(path, reports):
    with open(path, "w", encoding="utf-8", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow(
            ["threshold", "tp", "fp", "tn", "fn",
             "precision", "recall", "f1", "fpr", "accuracy"]
        )
        for rep in reports:
            writer.writerow(
                [repr(rep.threshold), rep.tp, rep.fp, rep.tn, rep.fn,
                 repr(rep.precision), repr(rep.recall), repr(rep.f1),
                 repr(rep.fpr), repr(rep.accuracy)]
            )


def cmd_evaluate(args) -> int:
    model, rows, y = _eval_inputs(args)
    if rows is None:
        return EXIT_DATA
    report = evalharness.evaluate(model, rows, y, args.threshold)
    _write_metrics_csv(args.out, [report])
    print(
        f"precision={report.precision:.4f} recall={report.recall:.4f} "
        f"f1={report.f1:.4f} fpr={report.fpr:.6f} accuracy={report.accuracy:.4f}"
    )
    return EXIT_OK


def cmd_roc(args) -> int:
    model, rows, y = _eval_inputs(args)
    if rows is None:
        return EXIT_DATA
    if len(set(y)) < 2:
        print("error: ROC needs both classes", file=sys.stderr)
        return EXIT_DATA
    curve = evalharness.roc(model, rows, y)
    with open(args.out, "w", encoding="utf-8", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow(["fpr", "tpr"])
        for fpr, tpr in curve.points:
            writer.writerow([repr(fpr), repr(tpr)])
    print(f"auc={curve.auc:.6f}; curve at {args.out}")
    return EXIT_OK


def cmd_sweep(args) -> int:
    model, rows, y = _eval_inputs(args)
    if rows is None:
        return EXIT_DATA
    legit = [r for r, lab in zip(rows, y) if lab == 0]
    phish = [r for r, lab in zip(rows, y) if lab == 1]
    try:
        reports = evalharness.scalability_sweep(
            model, legit, phish,
            step_legit=args.step_legit, step_phish=args.step_phish,
            seed=args.seed, threshold=args.threshold,
        )
    except evalharness.PoolExhausted as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_DATA
    _write_metrics_csv(args.out, reports)
    print(f"wrote {len(reports)} sweep steps to {args.out}")
    return EXIT_OK


def cmd_identify(args) -> int:
    suffixes = _load_suffixes(args.suffixes)
    try:
        client = FixtureSearchClient.from_file(args.fixture_index)
    except (OSError, ValueError) as exc:
        raise _ConfigError(f"cannot load fixture search index: {exc}") from exc
    files = _corpus_files(args.corpus)
    rows = []
    for path in files:
        try:
            snap = load_snapshot(path, suffixes)
            verdict = identify_target(
                snap, suffixes, client, n_keyterms=args.keyterms_n
            )
        except (MalformedSnapshot, UrlParseError) as exc:
            print(f"skipping {path.name}: {exc}", file=sys.stderr)
            continue
        top = verdict.top_k_targets(3)
        rows.append(
            [path.name, verdict.status] + list(top) + [""] * (3 - len(top))
        )
    with open(args.out, "w", encoding="utf-8", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow(["file", "status", "top1", "top2", "top3"])
        writer.writerows(rows)
    print(f"wrote {len(rows)} target reports to {args.out}")
    return EXIT_OK


def _build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="phishkit",
        description="Offline phishing-page detection and target identification.",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    def common(p, corpus=True, model=False, manifest=False, needs_alexa=True):
        if corpus:
            p.add_argument("--corpus", required=True, help="snapshot directory")
        p.add_argument("--suffixes", required=True, help="public-suffix list file")
        if needs_alexa:
            p.add_argument("--alexa", required=True, help="rank,domain CSV")
        if model:
            p.add_argument("--model", required=True, help="model file")
        if manifest:
            p.add_argument("--manifest", help="filename,label CSV")
        p.add_argument("--out", required=True, help="output file")
        p.add_argument("--jobs", type=int, default=1, help="parallel workers")

    p = sub.add_parser("extract", help="dump feature vectors as CSV")
    common(p, manifest=True)
    p.set_defaults(func=cmd_extract)

    p = sub.add_parser("train", help="train a classifier")
    p.add_argument("--features", help="feature CSV from `extract` (alternative to --corpus)")
    p.add_argument("--corpus")
    p.add_argument("--manifest")
    p.add_argument("--suffixes")
    p.add_argument("--alexa")
    p.add_argument("--out", required=True)
    p.add_argument("--jobs", type=int, default=1)
    p.add_argument("--trees", type=int, default=100)
    p.add_argument("--depth", type=int, default=3)
    p.add_argument("--learning-rate", type=float, default=0.1)
    p.add_argument("--min-leaf", type=int, default=5)
    p.add_argument("--subsample", type=float, default=1.0)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--threshold", type=float, default=gbm.DEFAULT_THRESHOLD)
    p.set_defaults(func=cmd_train)

    p = sub.add_parser("predict", help="classify a corpus")
    common(p, model=True)
    p.add_argument("--threshold", type=float, default=None)
    p.set_defaults(func=cmd_predict)

    p = sub.add_parser("evaluate", help="metrics at one threshold")
    common(p, model=True, manifest=True)
    p.add_argument("--threshold", type=float, default=None)
    p.set_defaults(func=cmd_evaluate)

    p = sub.add_parser("roc", help="threshold sweep curve and AUC")
    common(p, model=True, manifest=True)
    p.set_defaults(func=cmd_roc)

    p = sub.add_parser("sweep", help="metrics vs growing test-set size")
    common(p, model=True, manifest=True)
    p.add_argument("--step-legit", type=int, default=10_000)
    p.add_argument("--step-phish", type=int, default=100)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--threshold", type=float, default=None)
    p.set_defaults(func=cmd_sweep)

    p = sub.add_parser("identify", help="target identification per snapshot")
    p.add_argument("--corpus", required=True)
    p.add_argument("--suffixes", required=True)
    p.add_argument("--fixture-index", required=True, help="query->results JSON")
    p.add_argument("--out", required=True)
    p.add_argument("--keyterms-n", type=int, default=5)
    p.set_defaults(func=cmd_identify)

    return parser


def main(argv=None) -> int:
    parser = _build_parser()
    args = parser.parse_args(argv)
    if args.command == "train" and not args.features:
        missing = [
            flag
            for flag, value in (
                ("--corpus", args.corpus), ("--suffixes", args.suffixes),
                ("--alexa", args.alexa),
            )
            if not value
        ]
        if missing:
            print(
                f"error: train needs --features or {', '.join(missing)}",
                file=sys.stderr,
            )
            return EXIT_CONFIG
    if getattr(args, "threshold", None) is not None and not (
        0.0 <= args.threshold <= 1.0
    ):
        print("error: threshold must be in [0, 1]", file=sys.stderr)
        return EXIT_CONFIG
    try:
        return args.func(args)
    except _ConfigError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_CONFIG


if __name__ == "__main__":
    sys.exit(main())
