"""Command-line interface.

    embedviz synth --n 8000 --d 49 --minority 0.1329 --seed 1 --out data.csv
    embedviz run --input data.csv --options 1,2,3,4 --out-dir results/
    embedviz embed --input data.csv --perplexity 100 --seed 7
    embedviz smote --input train.csv --out resampled.csv
    embedviz classify --train train.csv --test test.csv --classifier svm
    embedviz metrics --predictions predictions.csv

Exit codes: 0 success, 1 usage error, 2 data error.
"""

from __future__ import annotations

import argparse
import csv
import logging
import sys
from dataclasses import replace
from pathlib import Path

import numpy as np

from . import __version__, viz
from .classifiers import DEFAULTS, ClassifierSpec, Kind, default_classifiers, save_model
from .data import generate_synthetic, load_csv, normalize, save_csv
from .errors import EmbedVizError
from .metrics import evaluate, format_table, reports_to_json
from .pipeline import OPTIONS, PipelineConfig, run_all
from .smote import SmoteConfig, smote_oversample
from .tsne import TsneConfig, run_tsne, save_embedding_csv

log = logging.getLogger("embedviz")


class UsageError(Exception):
    pass


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        raise UsageError(f"{self.format_usage()}{self.prog}: error: {message}")


def _int_list(text):
    try:
        return [int(v) for v in text.split(",") if v.strip()]
    except ValueError:
        raise argparse.ArgumentTypeError(f"expected comma-separated integers, got {text!r}") from None


def _float_list(text):
    try:
        return [float(v) for v in text.split(",") if v.strip()]
    except ValueError:
        raise argparse.ArgumentTypeError(f"expected comma-separated numbers, got {text!r}") from None


def _label_column(text):
    return int(text) if text.lstrip("-").isdigit() else text


def _common(p):
    p.add_argument("--seed", type=int, default=0, help="seed for every random step (default 0)")
    p.add_argument("--out-dir", default=".", help="directory for outputs (default: current)")
    p.add_argument("--quiet", action="store_true", help="suppress progress messages")


def _tsne_flags(p):
    p.add_argument("--perplexity", type=float, default=100.0)
    p.add_argument("--iterations", type=int, default=1000)
    p.add_argument("--learning-rate", type=float, default=200.0)


def _classifier_flags(p):
    p.add_argument("--k", type=int, default=3, help="KNN neighbours")
    p.add_argument("--gamma", type=float, default=2.0, help="RBF SVM kernel width")
    p.add_argument("--C", type=float, default=1.0, help="RBF SVM penalty")
    p.add_argument("--max-depth", type=int, default=5, help="DT / RF depth")
    p.add_argument("--n-estimators", type=int, default=None, help="RF trees / AdaBoost rounds")
    p.add_argument("--max-features", type=int, default=1, help="RF features per split")
    p.add_argument("--alpha", type=float, default=1.0, help="MLP L2 penalty")
    p.add_argument("--max-epochs", type=int, default=1000, help="MLP epochs")
    p.add_argument("--hidden-units", type=int, default=100, help="MLP hidden width")


def build_parser() -> argparse.ArgumentParser:
    parser = _Parser(prog="embedviz", description="t-SNE + SMOTE + six classifiers on imbalanced binary data")
    parser.add_argument("--version", action="version", version=f"%(prog)s {__version__}")
    sub = parser.add_subparsers(dest="command", metavar="COMMAND", parser_class=_Parser)
    sub.required = True

    p = sub.add_parser("run", help="run the four-option benchmark")
    _common(p)
    p.add_argument("--input", required=True)
    p.add_argument("--label-column", type=_label_column, default="label")
    p.add_argument("--options", type=_int_list, default=list(OPTIONS))
    p.add_argument("--test-fraction", type=float, default=0.25)
    p.add_argument("--k-neighbors", type=int, default=5, help="SMOTE neighbours")
    p.add_argument("--classifiers", default="all", help="comma-separated subset, e.g. knn,svm,mlp")
    p.add_argument("--resolution", type=int, default=200, help="decision-surface grid size")
    p.add_argument("--sweep", type=_float_list, default=None,
                   help="also write perplexity sweep maps, e.g. 5,30,50,100")
    p.add_argument("--no-figures", action="store_true")
    p.add_argument("--no-models", action="store_true")
    _tsne_flags(p)
    _classifier_flags(p)

    p = sub.add_parser("embed", help="t-SNE embedding of a CSV dataset")
    _common(p)
    p.add_argument("--input", required=True)
    p.add_argument("--label-column", type=_label_column, default="label")
    p.add_argument("--out", default=None, help="embedding CSV (default OUT_DIR/embedding.csv)")
    p.add_argument("--svg", default=None, help="also write a scatter plot here")
    p.add_argument("--no-normalize", action="store_true")
    _tsne_flags(p)

    p = sub.add_parser("smote", help="oversample the minority class of a CSV dataset")
    _common(p)
    p.add_argument("--input", required=True)
    p.add_argument("--label-column", type=_label_column, default="label")
    p.add_argument("--k-neighbors", type=int, default=5)
    p.add_argument("--ratio", type=float, default=1.0, help="minority/majority after resampling")
    p.add_argument("--out", default=None, help="default OUT_DIR/resampled.csv")

    p = sub.add_parser("classify", help="fit one classifier and predict a test CSV")
    _common(p)
    p.add_argument("--train", required=True)
    p.add_argument("--test", required=True)
    p.add_argument("--label-column", type=_label_column, default="label")
    p.add_argument("--classifier", required=True, help="knn, svm, dt, rf, mlp or adaboost")
    p.add_argument("--out", default=None, help="predictions CSV (default OUT_DIR/predictions.csv)")
    p.add_argument("--save-model", default=None)
    _classifier_flags(p)

    p = sub.add_parser("metrics", help="metrics from a predictions CSV (label,prediction,score)")
    _common(p)
    p.add_argument("--predictions", required=True)
    p.add_argument("--out", default=None, help="also write the JSON report here")

    p = sub.add_parser("synth", help="write a synthetic imbalanced dataset")
    _common(p)
    p.add_argument("--n", type=int, default=8000)
    p.add_argument("--d", type=int, default=49)
    p.add_argument("--minority", type=float, default=0.1329)
    p.add_argument("--separation", type=float, default=3.0)
    p.add_argument("--out", default=None, help="default OUT_DIR/synthetic.csv")
    return parser


def _spec_for(kind: Kind, args) -> ClassifierSpec:
    flags = {
        Kind.KNN: {"k": args.k},
        Kind.SVM_RBF: {"gamma": args.gamma, "C": args.C},
        Kind.DECISION_TREE: {"max_depth": args.max_depth},
        Kind.RANDOM_FOREST: {"max_depth": args.max_depth, "max_features": args.max_features,
                             "seed": args.seed},
        Kind.MLP: {"alpha": args.alpha, "max_epochs": args.max_epochs,
                   "hidden_units": args.hidden_units, "seed": args.seed},
        Kind.ADABOOST: {},
    }[kind]
    if args.n_estimators is not None and "n_estimators" in DEFAULTS[kind]:
        flags["n_estimators"] = args.n_estimators
    return ClassifierSpec(kind, flags)


def _target(args, default_name):
    if args.out:
        path = Path(args.out)
    else:
        path = Path(args.out_dir) / default_name
    path.parent.mkdir(parents=True, exist_ok=True)
    return path


def _tsne_cfg(args):
    return TsneConfig(perplexity=args.perplexity, iterations=args.iterations,
                      learning_rate=args.learning_rate, seed=args.seed)


def _validate_tsne_flags(args):
    if args.perplexity < 2:
        raise UsageError(f"--perplexity must be >= 2, got {args.perplexity}")
    if args.iterations < 1:
        raise UsageError("--iterations must be >= 1")


def cmd_run(args):
    _validate_tsne_flags(args)
    bad = [o for o in args.options if o not in OPTIONS]
    if bad or not args.options:
        raise UsageError(f"--options must be a subset of 1,2,3,4, got {args.options}")
    if args.classifiers == "all":
        kinds = list(Kind)
    else:
        try:
            kinds = [Kind.parse(s) for s in args.classifiers.split(",") if s.strip()]
        except ValueError as e:
            raise UsageError(str(e)) from None
    ds = load_csv(args.input, args.label_column)
    cfg = PipelineConfig(
        tsne=_tsne_cfg(args),
        smote=SmoteConfig(k_neighbors=args.k_neighbors, seed=args.seed),
        test_fraction=args.test_fraction,
        split_seed=args.seed,
        classifiers=tuple(_spec_for(k, args) for k in kinds),
        output_dir=args.out_dir,
        resolution=args.resolution,
        figures=not args.no_figures,
        save_models=not args.no_models,
        sweep_perplexities=tuple(args.sweep or ()),
    )
    run = run_all(ds, cfg, args.options)
    if not args.quiet:
        sys.stdout.write(format_table(run.reports))
    return 0


def cmd_embed(args):
    _validate_tsne_flags(args)
    ds = load_csv(args.input, args.label_column)
    X = ds.samples if args.no_normalize else normalize(ds).samples
    emb = run_tsne(X, _tsne_cfg(args))
    target = _target(args, "embedding.csv")
    save_embedding_csv(emb.points, ds.labels, target)
    if args.svg:
        Path(args.svg).write_text(
            viz.scatter_svg(emb.points, ds.labels, f"perplexity = {args.perplexity:g}"), encoding="utf-8")
    log.info("wrote %s (KL %.4f)", target, emb.final_kl)
    return 0


def cmd_smote(args):
    if args.k_neighbors < 1 or not 0 < args.ratio <= 1:
        raise UsageError("--k-neighbors must be >= 1 and --ratio in (0, 1]")
    ds = load_csv(args.input, args.label_column)
    out = smote_oversample(ds, SmoteConfig(args.k_neighbors, args.seed, args.ratio))
    target = _target(args, "resampled.csv")
    save_csv(out, target)
    log.info("wrote %s: %d rows (%d positive)", target, out.n, out.n_positive)
    return 0


def cmd_classify(args):
    try:
        kind = Kind.parse(args.classifier)
    except ValueError as e:
        raise UsageError(str(e)) from None
    train = load_csv(args.train, args.label_column)
    test = load_csv(args.test, args.label_column)
    model = _spec_for(kind, args).build().fit(train.samples, train.labels)
    pred = model.predict(test.samples)
    score = model.predict_score(test.samples)
    target = _target(args, "predictions.csv")
    with open(target, "w", newline="", encoding="utf-8") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(["label", "prediction", "score"])
        for t, p, s in zip(test.labels.tolist(), pred.tolist(), score.tolist()):
            w.writerow([t, p, repr(float(s))])
    if args.save_model:
        save_model(model, args.save_model)
    log.info("wrote %s", target)
    return 0


def _read_predictions(path):
    from .errors import DataError, MissingFile

    if not Path(path).is_file():
        raise MissingFile(f"no such file: {path}")
    with open(path, newline="", encoding="utf-8") as fh:
        rows = list(csv.DictReader(fh))
    try:
        t = np.array([int(float(r["label"])) for r in rows])
        p = np.array([int(float(r["prediction"])) for r in rows])
        s = np.array([float(r["score"]) for r in rows])
    except (KeyError, ValueError, TypeError) as e:
        raise DataError(f"{path}: need numeric columns label, prediction, score ({e})") from None
    return t, p, s


def cmd_metrics(args):
    t, p, s = _read_predictions(args.predictions)
    report = evaluate(t, p, s)
    text = reports_to_json([report])
    sys.stdout.write(text)
    if args.out:
        Path(args.out).write_text(text, encoding="utf-8")
    return 0


def cmd_synth(args):
    ds = generate_synthetic(args.n, args.d, args.minority, args.separation, args.seed)
    target = _target(args, "synthetic.csv")
    save_csv(ds, target)
    log.info("wrote %s: %d rows, %d positive", target, ds.n, ds.n_positive)
    return 0


COMMANDS = {
    "run": cmd_run,
    "embed": cmd_embed,
    "smote": cmd_smote,
    "classify": cmd_classify,
    "metrics": cmd_metrics,
    "synth": cmd_synth,
}


def main(argv=None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except UsageError as e:
        print(e, file=sys.stderr)
        return 1
    logging.basicConfig(level=logging.WARNING if args.quiet else logging.INFO,
                        format="%(levelname)s %(name)s: %(message)s", stream=sys.stderr, force=True)
    try:
        return COMMANDS[args.command](args)
    except UsageError as e:
        print(parser.format_usage().rstrip(), file=sys.stderr)
        print(f"embedviz {args.command}: error: {e}", file=sys.stderr)
        return 1
    except (EmbedVizError, OSError) as e:
        print(f"embedviz {args.command}: {type(e).__name__}: {e}", file=sys.stderr)
        return 2


if __name__ == "__main__":
    sys.exit(main())
