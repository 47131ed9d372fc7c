"""Command-line entry point: ``costarr {synth,fit,score,eval,stats,analyze}``.

Reports go to stdout as ``key=value`` lines; data files go to ``--out``.
Exit codes: 0 success, 2 usage or argument error (including a missing input
file), 3 data or shape error, 4 I/O error.
"""

from __future__ import annotations

import argparse
import logging
import os
import sys

import numpy as np

from . import __version__
from .analyze import DEFAULT_BINS, weight_stats
from .errors import CostarrError, DegenerateError, TruncatedFileError
from .fit import fit_model, load_model, save_model
from .manifest import RunManifest
from .metrics import BinLabeled, auroc, oosa, osa_curve, oscr
from .score import METHODS, read_score_csv, score
from .stats import bonferroni, wilcoxon_signed_rank
from .svg import curve_svg, heat_strip_svg
from .synth import SynthConfig, generate
from .tensors import ClassifierHead, LabeledSet, read_csv_matrix, read_tensor, write_tensor

EXIT_OK, EXIT_USAGE, EXIT_DATA, EXIT_IO = 0, 2, 3, 4

log = logging.getLogger("costarr")


class UsageError(Exception):
    pass


def _require(*paths):
    for p in paths:
        if p is not None and not os.path.exists(p):
            raise UsageError(f"input file not found: {p}")


def _report(pairs) -> None:
    for k, v in pairs:
        if isinstance(v, float):
            v = repr(v)
        print(f"{k}={v}")


def _read_array(path):
    if str(path).lower().endswith(".csv"):
        return read_csv_matrix(path)
    return read_tensor(path)


def _read_labels(path) -> np.ndarray:
    arr = np.asarray(_read_array(path)).ravel()
    labels = arr.astype(np.int64)
    if not np.array_equal(labels, arr):
        raise CostarrError(f"{path}: labels must be integers")
    return labels


def _manifest_path(out: str) -> str:
    return os.path.join(out, "run.manifest") if os.path.isdir(out) else out + ".manifest"


# -- subcommands --------------------------------------------------------------


def cmd_synth(args, argv) -> int:
    try:
        cfg = SynthConfig(
            seed=args.seed,
            n_classes=args.classes,
            dim=args.dim,
            train_per_class=args.train_per_class,
            test_known=args.test_known,
            test_unknown=args.test_unknown,
            active_frac=args.active_frac,
            unknown_boost=args.unknown_boost,
        )
    except ValueError as exc:
        raise UsageError(str(exc)) from None
    data = generate(cfg)
    os.makedirs(args.out, exist_ok=True)
    data.train.save(args.out, "train")
    data.val.save(args.out, "val")
    data.test.save(args.out, "test")
    write_tensor(data.head.weights, os.path.join(args.out, "weights.cst"))
    write_tensor(data.head.bias, os.path.join(args.out, "bias.cst"))
    man = RunManifest(argv, config=cfg.as_dict())
    man.write(os.path.join(args.out, "run.manifest"))
    _report([("command", "synth"), *cfg.as_dict().items(),
             ("n_train", len(data.train)), ("n_val", len(data.val)), ("n_test", len(data.test))])
    return EXIT_OK


def cmd_fit(args, argv) -> int:
    _require(args.features, args.logits, args.labels, args.weights, args.bias)
    train = LabeledSet(_read_array(args.features), _read_array(args.logits), _read_labels(args.labels))
    head = ClassifierHead(_read_array(args.weights), np.ravel(_read_array(args.bias)))
    model = fit_model(train, head, threads=args.threads)
    save_model(model, args.out)
    man = RunManifest(argv)
    for p in (args.features, args.logits, args.labels, args.weights, args.bias):
        man.add_input(p)
    man.write(os.path.join(args.out, "run.manifest"))
    _report([
        ("command", "fit"),
        ("C", model.n_classes),
        ("D", model.dim),
        ("l_tmin", model.gnl.l_tmin),
        ("l_tmax", model.gnl.l_tmax),
        ("n_used", int(model.counts.sum())),
        ("fallback_classes", ",".join(str(j) for j in np.flatnonzero(model.fallback)) or "none"),
    ])
    return EXIT_OK


def cmd_score(args, argv) -> int:
    if args.method not in METHODS:
        raise UsageError(f"unknown method {args.method!r}; choose from {', '.join(METHODS)}")
    _require(args.features, args.logits, args.labels, args.model)
    needs_model = args.method not in ("maxlogit", "msp", "magnorm")
    if needs_model and args.model is None:
        raise UsageError(f"--method {args.method} requires --model")
    feats, logits = _read_array(args.features), _read_array(args.logits)
    if args.labels:
        labels = _read_labels(args.labels)
    else:
        labels = np.full(feats.shape[0], -1, dtype=np.int64)
    data = LabeledSet(feats, logits, labels)
    model = load_model(args.model) if args.model else None
    table = score(data, model, args.method, threads=args.threads)
    table.write_csv(args.out)
    man = RunManifest(argv)
    for p in (args.features, args.logits, args.labels):
        if p:
            man.add_input(p)
    if args.model:
        for name in ("class_means.cst", "gnl.cst", "weights.cst"):
            man.add_input(os.path.join(args.model, name))
    man.write(_manifest_path(args.out))
    _report([("command", "score"), ("method", args.method), ("n", len(table))])
    return EXIT_OK


def _bin_labeled(scores_path, labels_path) -> BinLabeled:
    _require(scores_path, labels_path)
    table = read_score_csv(scores_path)
    labels = _read_labels(labels_path)
    if labels.shape[0] != len(table):
        raise CostarrError(f"{scores_path} has {len(table)} rows but {labels_path} has {labels.shape[0]} labels")
    return BinLabeled.from_predictions(table.score, table.predicted, labels)


def cmd_eval(args, argv) -> int:
    test = _bin_labeled(args.scores, args.labels)
    man = RunManifest(argv)
    pairs = [("command", f"eval {args.metric}"), ("n_known", test.n_known), ("n_unknown", test.n_unknown)]
    if args.metric == "oosa":
        if args.val_scores is None or args.val_labels is None:
            raise UsageError("eval oosa requires --val-scores and --val-labels")
        val = _bin_labeled(args.val_scores, args.val_labels)
        res = oosa(val, test)
        pairs += [("threshold", res.threshold), ("val_osa", res.val_osa), ("test_osa", res.test_osa)]
        if args.out or args.emit_svg:
            thr, values = osa_curve(test)
            if args.out:
                _write_rows(args.out, "threshold,osa", zip(thr.tolist(), values.tolist()))
            if args.emit_svg:
                x = (thr - thr[0]) / (thr[-1] - thr[0]) if thr[-1] > thr[0] else np.zeros_like(thr)
                _write_text(args.emit_svg, curve_svg(x, values, xlabel="threshold (rescaled)", ylabel="OSA"))
        inputs = (args.scores, args.labels, args.val_scores, args.val_labels)
    elif args.metric == "oscr":
        curve = oscr(test)
        pairs += [("auoscr", curve.auc), ("closed_set_accuracy", float(curve.ccr[-1]))]
        if args.out:
            _write_rows(args.out, "fpr,ccr", zip(curve.fpr.tolist(), curve.ccr.tolist()))
        if args.emit_svg:
            _write_text(args.emit_svg, curve_svg(curve.fpr, curve.ccr))
        inputs = (args.scores, args.labels)
    else:
        pairs += [("auroc", auroc(test))]
        inputs = (args.scores, args.labels)
    for p in inputs:
        man.add_input(p)
    if args.out:
        man.write(_manifest_path(args.out))
    _report(pairs)
    return EXIT_OK


def cmd_stats(args, argv) -> int:
    _require(args.a, args.b)
    if args.bonferroni < 1:
        raise UsageError("--bonferroni must be >= 1")
    a, b = read_csv_matrix(args.a).ravel(), read_csv_matrix(args.b).ravel()
    if a.shape != b.shape:
        raise CostarrError(f"paired runs differ in length: {a.size} vs {b.size}")
    try:
        res = wilcoxon_signed_rank(a, b, method=args.method)
    except DegenerateError:
        print("W=0.0 p=1.0 p_adj=1.0 n=0 method=degenerate")
        return EXIT_OK
    p_adj = bonferroni(res.p_value, args.bonferroni)
    print(f"W={res.statistic!r} p={res.p_value!r} p_adj={p_adj!r} n={res.n} method={res.method}")
    return EXIT_OK


def cmd_analyze(args, argv) -> int:
    _require(args.weights)
    if args.bins < 2:
        raise UsageError("--bins must be >= 2")
    w = _read_array(args.weights)
    head = ClassifierHead(w, np.zeros(w.shape[0]))
    st = weight_stats(head, args.bins)
    os.makedirs(args.out, exist_ok=True)
    _write_text(os.path.join(args.out, "weight_stats.csv"), st.summary_csv())
    _write_text(os.path.join(args.out, "weight_histogram.csv"), st.histogram_csv())
    if args.emit_svg:
        _write_text(os.path.join(args.out, "weight_histogram.svg"), heat_strip_svg(st.histogram[::-1]))
    man = RunManifest(argv, config={"bins": args.bins})
    man.add_input(args.weights)
    man.write(os.path.join(args.out, "run.manifest"))
    _report([
        ("command", "analyze"),
        ("C", w.shape[0]),
        ("D", w.shape[1]),
        ("min_of_dim_max", float(st.per_dim_max.min())),
        ("max_of_dim_min", float(st.per_dim_min.max())),
    ])
    return EXIT_OK


def _write_text(path, text) -> None:
    with open(path, "w", newline="") as fh:
        fh.write(text)


def _write_rows(path, header, rows) -> None:
    _write_text(path, header + "\n" + "".join(f"{a!r},{b!r}\n" for a, b in rows))


# -- parser ---------------------------------------------------------------------


def build_parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--threads", type=int, default=1, help="worker threads (results do not depend on it)")

    p = argparse.ArgumentParser(prog="costarr", description=__doc__.splitlines()[0])
    p.add_argument("--version", action="version", version=f"costarr {__version__}")
    p.add_argument("-v", "--verbose", action="store_true")
    sub = p.add_subparsers(dest="command", required=True)

    s = sub.add_parser("synth", parents=[common], help="write a synthetic benchmark")
    d = SynthConfig()
    s.add_argument("--out", required=True)
    s.add_argument("--seed", type=int, default=d.seed)
    s.add_argument("--classes", type=int, default=d.n_classes)
    s.add_argument("--dim", type=int, default=d.dim)
    s.add_argument("--train-per-class", type=int, default=d.train_per_class)
    s.add_argument("--test-known", type=int, default=d.test_known)
    s.add_argument("--test-unknown", type=int, default=d.test_unknown)
    s.add_argument("--active-frac", type=float, default=d.active_frac)
    s.add_argument("--unknown-boost", type=float, default=d.unknown_boost)
    s.set_defaults(func=cmd_synth)

    f = sub.add_parser("fit", parents=[common], help="fit class means and GNL bounds")
    for name in ("--features", "--logits", "--labels", "--weights", "--bias", "--out"):
        f.add_argument(name, required=True)
    f.set_defaults(func=cmd_fit)

    sc = sub.add_parser("score", parents=[common], help="score a split with one method")
    sc.add_argument("--method", required=True, help=", ".join(METHODS))
    sc.add_argument("--features", required=True)
    sc.add_argument("--logits", required=True)
    sc.add_argument("--labels", help="optional; only validated against the logits")
    sc.add_argument("--model", help="model directory written by fit")
    sc.add_argument("--out", required=True)
    sc.set_defaults(func=cmd_score)

    e = sub.add_parser("eval", parents=[common], help="evaluate score CSVs")
    e.add_argument("metric", choices=("oosa", "oscr", "auroc"))
    e.add_argument("--scores", required=True)
    e.add_argument("--labels", required=True)
    e.add_argument("--val-scores")
    e.add_argument("--val-labels")
    e.add_argument("--out", help="curve CSV (fpr,ccr for oscr; threshold,osa for oosa)")
    e.add_argument("--emit-svg", metavar="PATH")
    e.set_defaults(func=cmd_eval)

    st = sub.add_parser("stats", parents=[common], help="paired significance tests")
    st.add_argument("test", choices=("wilcoxon",))
    st.add_argument("--a", required=True)
    st.add_argument("--b", required=True)
    st.add_argument("--bonferroni", type=int, default=1, metavar="M")
    st.add_argument("--method", choices=("auto", "exact", "approx"), default="auto")
    st.set_defaults(func=cmd_stats)

    a = sub.add_parser("analyze", parents=[common], help="per-dimension weight statistics")
    a.add_argument("--weights", required=True)
    a.add_argument("--bins", type=int, default=DEFAULT_BINS)
    a.add_argument("--out", required=True)
    a.add_argument("--emit-svg", action="store_true")
    a.set_defaults(func=cmd_analyze)
    return p


def main(argv: list[str] | None = None) -> int:
    argv = list(sys.argv[1:] if argv is None else argv)
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return int(exc.code or 0)
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING, format="%(levelname)s: %(message)s")
    if args.threads < 1:
        print("error: --threads must be >= 1", file=sys.stderr)
        return EXIT_USAGE
    try:
        return args.func(args, argv)
    except UsageError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except TruncatedFileError as exc:
        print(f"I/O error: {exc}", file=sys.stderr)
        return EXIT_IO
    except (CostarrError, ValueError, IndexError) as exc:
        print(f"data error: {exc}", file=sys.stderr)
        return EXIT_DATA
    except OSError as exc:
        print(f"I/O error: {exc}", file=sys.stderr)
        return EXIT_IO


if __name__ == "__main__":
    sys.exit(main())
