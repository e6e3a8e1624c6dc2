"""``texsom`` command-line interface.

Exit codes: 0 success, 2 configuration error, 3 I/O error, 4 data error.
"""

import argparse
import logging
import sys
import warnings
from concurrent.futures import ProcessPoolExecutor
from pathlib import Path

from . import config as C
from .dataset import (
    TabularDataset, load_features, load_labels, load_pgm, save_features, synth_blobs,
)
from .errors import ConfigError, TexsomError
from .evaluation import (
    DegenerateMetricWarning, compare_models, confusion, format_table, fscore_from,
    precision, recall, report_csv,
)
from .features import MinMaxScaler, Transaction, extract_features
from .isom import IsomClassifier
from .modelio import load_model, save_model
from .som import SomClassifier, quantization_error

EXIT_OK, EXIT_CONFIG, EXIT_IO, EXIT_DATA = 0, 2, 3, 4

log = logging.getLogger("texsom")


def _add_common(p):
    p.add_argument("--config", type=Path, help="key=value config file")
    p.add_argument("--seed", type=int, help="global seed (default 0)")
    p.add_argument("--out", type=Path, default=Path("."), help="output directory")
    p.add_argument("--set", action="append", default=[], metavar="KEY=VALUE",
                   help="override any config key (repeatable)")


def _flag(p, name, key=None, **kw):
    p.add_argument(name, dest=key or name.lstrip("-").replace("-", "_"), default=None, **kw)


def build_parser():
    parser = argparse.ArgumentParser(prog="texsom", description=__doc__.splitlines()[0])
    parser.add_argument("-v", "--verbose", action="store_true")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("extract", help="bloc-wise texture features for a directory of PGM images")
    _add_common(p)
    p.add_argument("images", type=Path)
    p.add_argument("labels", type=Path)
    p.add_argument("-o", "--output", type=Path, help="features CSV (default OUT/features.csv)")
    for name in ("--sn", "--m-blocs", "--l-clusters", "--levels", "--jobs"):
        _flag(p, name)

    p = sub.add_parser("synth", help="write a synthetic two-blob feature table")
    _add_common(p)
    p.add_argument("-o", "--output", type=Path, help="features CSV (default OUT/features.csv)")
    for name in ("--n-per-class", "--dim", "--separation", "--spread"):
        _flag(p, name)

    p = sub.add_parser("train", help="train a map on a feature table and save it")
    _add_common(p)
    p.add_argument("features", type=Path)
    p.add_argument("-o", "--output", type=Path, help="model file (default OUT/model.txt)")
    for name in ("--model", "--rows", "--cols", "--epochs", "--eta0", "--radius0"):
        _flag(p, name)

    p = sub.add_parser("predict", help="classify a feature table with a saved model")
    _add_common(p)
    p.add_argument("model_file", type=Path)
    p.add_argument("features", type=Path)
    p.add_argument("-o", "--output", type=Path, help="predictions CSV (default OUT/predictions.csv)")

    p = sub.add_parser("cv", help="stratified k-fold comparison over map sizes")
    _add_common(p)
    p.add_argument("features", type=Path)
    for name in ("--model", "--map-sizes", "--folds", "--epochs", "--eta0", "--radius0"):
        _flag(p, name)
    return parser


def resolve_config(args):
    file_values = C.load_config_file(args.config) if args.config else {}
    flags = {}
    for item in args.set:
        key, sep, raw = item.partition("=")
        if not sep:
            raise ConfigError(f"--set expects KEY=VALUE, got {item!r}")
        flags[key.strip()] = C.parse_value(key.strip(), raw.strip())
    for key in C.SCHEMA:
        raw = getattr(args, key, None)
        if raw is not None:
            flags[key] = C.parse_value(key, raw)
    if args.seed is not None:
        flags["seed"] = C.parse_value("seed", args.seed)
    return C.resolve(file_values, flags)


def _require_file(path, what):
    if not path.is_file():
        raise ConfigError(f"{what} not found: {path}")


def _output(args, default_name):
    return args.output if getattr(args, "output", None) else args.out / default_name


def _prepare_out(path):
    path.parent.mkdir(parents=True, exist_ok=True)


def _make_classifier(kind, rows, cols, train_cfg, n_classes=None):
    if kind == "isom":
        return IsomClassifier(rows, cols, train_cfg, n_classes=n_classes)
    return SomClassifier(rows, cols, train_cfg)


def _require_labeled(ds, path):
    if len(ds) == 0:
        raise TexsomError(f"{path}: feature table is empty")
    if not ds.labeled:
        raise TexsomError(f"{path}: every row needs a label for training")


# -- commands -------------------------------------------------------------

def _extract_one(job):
    path, label, pipe = job
    try:
        return Transaction(extract_features(load_pgm(path), pipe), label, path.stem), None
    except (TexsomError, OSError) as exc:
        return None, f"{path.stem}: {exc}"


def cmd_extract(args, cfg):
    _require_file(args.labels, "labels file")
    if not args.images.is_dir():
        raise ConfigError(f"image directory not found: {args.images}")
    pipe = C.pipeline_config(cfg)
    labels = load_labels(args.labels)
    paths = sorted(p for p in args.images.iterdir() if p.suffix.lower() == ".pgm")
    if not paths:
        raise TexsomError(f"no .pgm images in {args.images}")
    missing = [p.stem for p in paths if p.stem not in labels]
    if missing:
        raise TexsomError(f"no label for images: {', '.join(missing[:10])}")
    jobs = [(p, labels[p.stem], pipe) for p in paths]
    if cfg["jobs"] > 1:
        with ProcessPoolExecutor(cfg["jobs"]) as pool:
            results = list(pool.map(_extract_one, jobs))
    else:
        results = [_extract_one(j) for j in jobs]
    failures = [err for _, err in results if err]
    for err in failures:
        log.error("extraction failed for %s", err)
    if failures:
        raise TexsomError(f"{len(failures)} of {len(paths)} images failed; no output written")
    ds = TabularDataset([t for t, _ in results])
    out = _output(args, "features.csv")
    _prepare_out(out)
    save_features(ds, out)
    print(f"extracted {len(ds)} images, dim={ds.dim} (sn={pipe.sn} x l={pipe.l_clusters} x 4), "
          f"class counts {ds.class_counts()} -> {out}")
    return EXIT_OK


def cmd_synth(args, cfg):
    for key in ("n_per_class", "dim"):
        if cfg[key] < 1:
            raise ConfigError(f"{key} must be >= 1")
    if cfg["separation"] < 0 or cfg["spread"] < 0:
        raise ConfigError("separation and spread must be >= 0")
    if cfg["separation"] == 0:
        log.warning("separation is 0: both classes share one distribution")
    ds = synth_blobs(cfg["n_per_class"], cfg["dim"], cfg["separation"], cfg["spread"], cfg["synth_seed"])
    out = _output(args, "features.csv")
    _prepare_out(out)
    save_features(ds, out)
    print(f"wrote {len(ds)} x {ds.dim} synthetic table -> {out}")
    return EXIT_OK


def cmd_train(args, cfg):
    _require_file(args.features, "features file")
    train_cfg = C.train_config(cfg)
    kind = cfg["model"]
    if kind == "both":
        raise ConfigError("train needs model=som or model=isom")
    if cfg["rows"] < 1 or cfg["cols"] < 1:
        raise ConfigError("rows and cols must be >= 1")
    ds = load_features(args.features)
    _require_labeled(ds, args.features)
    scaler = MinMaxScaler().fit(ds.X)
    X = scaler.transform(ds.X)
    log_rows = []

    def on_epoch(t, grid):
        log_rows.append((t, quantization_error(grid, X)))

    model = _make_classifier(kind, cfg["rows"], cfg["cols"], train_cfg)
    model.fit(X, ds.y, on_epoch=on_epoch)
    out = _output(args, "model.txt")
    _prepare_out(out)
    save_model(out, model, scaler)
    log_path = out.with_name(out.stem + "_train_log.csv")
    with open(log_path, "w") as fh:
        fh.write("epoch,quantization_error,weight_updates,counter_increments\n")
        for (t, qe), (upd, inc) in zip(log_rows, model.update_stats.per_epoch):
            fh.write(f"{t},{qe:.9g},{upd},{inc}\n")
    st = model.update_stats
    print(f"trained {kind} {cfg['rows']}x{cfg['cols']} on {len(ds)} instances: "
          f"final quantization error {log_rows[-1][1]:.6g}, weight updates {st.weight_updates}, "
          f"counter increments {st.counter_increments} -> {out}")
    return EXIT_OK


def cmd_predict(args, cfg):
    _require_file(args.model_file, "model file")
    _require_file(args.features, "features file")
    model, scaler = load_model(args.model_file)
    ds = load_features(args.features)
    if len(ds) == 0:
        raise TexsomError(f"{args.features}: feature table is empty")
    if ds.dim != model.grid.dim:
        raise TexsomError(f"feature dim {ds.dim} does not match model dim {model.grid.dim}")
    X = scaler.transform(ds.X) if scaler is not None else ds.X
    preds = model.predict(X)
    out = _output(args, "predictions.csv")
    _prepare_out(out)
    lines = ["id,predicted,truth"]
    for t, p in zip(ds.transactions, preds):
        lines.append(f"{t.source_id},{int(p)},{'' if t.label is None else t.label}")
    if ds.labeled:
        c = confusion(preds, ds.y)
        with warnings.catch_warnings():
            warnings.simplefilter("ignore", DegenerateMetricWarning)
            p, r = precision(c), recall(c)
            f = fscore_from(p, r) if p + r > 0 else 0.0
        summary = f"precision={p:.6f} recall={r:.6f} fscore={f:.6f} tp={c.tp} fp={c.fp} fn={c.fn} tn={c.tn}"
        lines.append(f"# {summary}")
        print(summary)
    with open(out, "w") as fh:
        fh.write("\n".join(lines) + "\n")
    print(f"wrote {len(preds)} predictions -> {out}")
    return EXIT_OK


def cmd_cv(args, cfg):
    _require_file(args.features, "features file")
    train_cfg = C.train_config(cfg)
    sizes = C.check_map_sizes(cfg["map_sizes"])
    if cfg["folds"] < 2:
        raise ConfigError("folds must be >= 2")
    models = ("isom", "som") if cfg["model"] == "both" else (cfg["model"],)
    ds = load_features(args.features)
    _require_labeled(ds, args.features)
    n_classes = max(int(ds.y.max()) + 1, 2)
    rows = compare_models(
        ds.X, ds.y, sizes,
        lambda kind, r, c: _make_classifier(kind, r, c, train_cfg, n_classes),
        models=models, k=cfg["folds"], seed=cfg["cv_seed"],
    )
    table = format_table(rows)
    detail = ["", "per-fold (precision, recall, fscore) and fold-averaged metrics:"]
    for row in rows:
        macro = row.report.macro_metrics()
        detail.append(f"{row.map_size} {row.model}: macro P={macro[0]:.4f} R={macro[1]:.4f} F={macro[2]:.4f}")
        for i, (p, r, f) in enumerate(row.report.fold_metrics()):
            detail.append(f"  fold {i}: {p:.4f} {r:.4f} {f:.4f}")
    args.out.mkdir(parents=True, exist_ok=True)
    (args.out / "report.csv").write_text(report_csv(rows))
    (args.out / "report.txt").write_text(table + "\n".join(detail) + "\n")
    print(table, end="")
    print(f"reports -> {args.out / 'report.csv'}, {args.out / 'report.txt'}")
    return EXIT_OK


COMMANDS = {
    "extract": cmd_extract, "synth": cmd_synth, "train": cmd_train,
    "predict": cmd_predict, "cv": cmd_cv,
}


def main(argv=None):
    args = build_parser().parse_args(argv)
    logging.basicConfig(level=logging.DEBUG if args.verbose else logging.INFO,
                        format="%(levelname)s %(name)s: %(message)s")
    try:
        cfg = resolve_config(args)
        log.info("config: %s", C.format_config(cfg))
        return COMMANDS[args.command](args, cfg)
    except ConfigError as exc:
        log.error("config error: %s", exc)
        return EXIT_CONFIG
    except TexsomError as exc:
        log.error("data error: %s", exc)
        return EXIT_DATA
    except OSError as exc:
        log.error("I/O error: %s", exc)
        return EXIT_IO


if __name__ == "__main__":
    sys.exit(main())
