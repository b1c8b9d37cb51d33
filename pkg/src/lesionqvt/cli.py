"""Command line: extract, cv, train, predict, phantom make-dataset.

Exit codes: 0 success, 1 run failure (no rows, fold collapse), 2 bad input
(arguments, config, manifest, feature table).
"""
from __future__ import annotations

import argparse
import csv
import json
import logging
import sys
from pathlib import Path

from . import ml, phantom
from .errors import FoldClassCollapse, LesionQvtError
from .pipeline import (
    FEATURE_COLUMNS,
    ConfigError,
    ManifestError,
    extract_batch,
    load_config,
    parse_feature_id,
    read_diameters,
    read_feature_table,
    read_manifest,
    select_profile,
    write_feature_table,
)
from .pipeline.table import format_value

log = logging.getLogger("lesionqvt")

EXIT_OK, EXIT_FAIL, EXIT_USAGE = 0, 1, 2


class UsageError(Exception):
    pass


def _write_json(obj, path: Path) -> None:
    path.write_text(json.dumps(obj, indent=2, sort_keys=True) + "\n")


def _load_table(path, profile: str) -> ml.Dataset:
    try:
        return select_profile(read_feature_table(path), profile)
    except (OSError, ValueError) as e:
        raise UsageError(f"feature table {path}: {e}") from e


def _trainer(kind: str, cfg):
    params = cfg.rf if kind == "rf" else cfg.gb
    return lambda d, seed: ml.train(kind, d, params, seed)


def cmd_extract(args) -> int:
    cfg = load_config(args.config)
    if args.workers is not None:
        from dataclasses import replace

        cfg = replace(cfg, extraction=replace(cfg.extraction, workers=args.workers))
    records = read_manifest(args.manifest)
    diameters = read_diameters(args.diameters) if args.diameters else None
    results = extract_batch(records, cfg, diameters)
    rows = [(r.lesion_id, r.patient_id, r.label, r.values) for r in results if r.error is None]
    if not rows:
        log.error("no rows: none of %d lesion(s) could be extracted", len(records))
        return EXIT_FAIL
    write_feature_table(rows, FEATURE_COLUMNS, args.out)
    log.info("wrote %d of %d lesion(s) to %s", len(rows), len(records), args.out)
    return EXIT_OK


def _importance_rows(ranked, top_n: int):
    rows = []
    for rank, (fid, weight) in enumerate(ranked[:top_n], start=1):
        family, name, roi, tp = parse_feature_id(fid)
        rows.append([rank, fid, family, name, roi or "", tp, format_value(weight)])
    return rows


def cmd_cv(args) -> int:
    cfg = load_config(args.config)
    k = args.k if args.k is not None else cfg.cv.k
    seed = args.seed if args.seed is not None else cfg.cv.seed
    d = _load_table(args.features, args.profile)
    try:
        report = ml.kfold_cv(d, k, _trainer(args.model, cfg), seed)
    except FoldClassCollapse as e:
        log.error("fold class collapse: %s", e)
        return EXIT_FAIL
    except ValueError as e:
        raise UsageError(str(e)) from e
    out = Path(args.out)
    out.mkdir(parents=True, exist_ok=True)
    doc = report.to_dict()
    doc.update(model=args.model, profile=args.profile, seed=seed, n_features=d.n_cols, n_lesions=d.n_rows)
    _write_json(doc, out / "cv_report.json")
    with open(out / "roc.csv", "w", newline="") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(["fold", "fpr", "tpr", "threshold"])
        for fold, (fpr, tpr, thr) in enumerate(report.roc):
            for a, b, c in zip(fpr, tpr, thr):
                w.writerow([fold, format_value(a), format_value(b), format_value(c)])
    top_n = args.top if args.top is not None else cfg.cv.top_n
    with open(out / "importance.csv", "w", newline="") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(["rank", "feature_id", "family", "name", "roi", "timepoint", "weight"])
        w.writerows(_importance_rows(report.importance, top_n))
    print(f"{args.model} {args.profile}: mean AUC {report.mean_auc:.4f} +/- {report.std_auc:.4f} over {k} folds")
    return EXIT_OK


def cmd_train(args) -> int:
    cfg = load_config(args.config)
    seed = args.seed if args.seed is not None else cfg.cv.seed
    d = _load_table(args.features, args.profile)
    model = _trainer(args.model, cfg)(d, seed)
    ml.save_model(model, args.out)
    return EXIT_OK


def cmd_predict(args) -> int:
    try:
        model = ml.load_model(args.model)
    except LesionQvtError as e:
        raise UsageError(str(e)) from e
    try:
        d = read_feature_table(args.features)
        d = d.columns(model.feature_ids)
    except KeyError as e:
        raise UsageError(f"feature table lacks model column {e}") from e
    except (OSError, ValueError) as e:
        raise UsageError(f"feature table {args.features}: {e}") from e
    scores = model.predict_proba(d.features)
    with open(args.out, "w", newline="") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(["lesion_id", "patient_id", "score"])
        for lid, pid, s in sorted(zip(d.lesion_ids, d.patient_ids, scores)):
            w.writerow([lid, pid, format_value(s)])
    return EXIT_OK


def cmd_phantom_dataset(args) -> int:
    lesions = phantom.planted_dataset(
        args.n, args.out, seed=args.seed, label_noise=args.label_noise, separation=args.separation
    )
    positives = sum(p.label for p in lesions)
    log.info("wrote %d lesion(s), %d labeled 1, to %s", len(lesions), positives, args.out)
    return EXIT_OK


def build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(prog="lesionqvt", description=__doc__.splitlines()[0])
    p.add_argument("-v", "--verbose", action="store_true", help="log progress at INFO level")
    sub = p.add_subparsers(dest="command", required=True)

    e = sub.add_parser("extract", help="manifest -> 460-column feature CSV")
    e.add_argument("--manifest", required=True)
    e.add_argument("--config")
    e.add_argument("--out", required=True)
    e.add_argument("--diameters", help="diameter CSV; default measures each lesion mask")
    e.add_argument("--workers", type=int, help="parallel lesion workers (overrides config)")
    e.set_defaults(func=cmd_extract)

    def model_args(q, seed_help):
        q.add_argument("--features", required=True)
        q.add_argument("--model", choices=("rf", "gb"), default="rf")
        q.add_argument("--seed", type=int, help=seed_help)
        q.add_argument("--profile", choices=("both", "tp1", "tp2"), default="both")
        q.add_argument("--config")

    c = sub.add_parser("cv", help="patient-level k-fold cross-validation")
    model_args(c, "fold shuffling and training seed (default from config)")
    c.add_argument("--k", type=int)
    c.add_argument("--top", type=int, help="rows in importance.csv (default from config)")
    c.add_argument("--out", required=True, help="output directory")
    c.set_defaults(func=cmd_cv)

    t = sub.add_parser("train", help="fit one model on the whole table")
    model_args(t, "training seed (default from config)")
    t.add_argument("--out", required=True, help="model JSON path")
    t.set_defaults(func=cmd_train)

    pr = sub.add_parser("predict", help="score a feature table with a saved model")
    pr.add_argument("--model", required=True)
    pr.add_argument("--features", required=True)
    pr.add_argument("--out", required=True)
    pr.set_defaults(func=cmd_predict)

    ph = sub.add_parser("phantom", help="synthetic data generators")
    phs = ph.add_subparsers(dest="phantom_command", required=True)
    md = phs.add_parser("make-dataset", help="planted-signal lesion cohort")
    md.add_argument("--n", type=int, default=200)
    md.add_argument("--seed", type=int, default=7)
    md.add_argument("--out", required=True)
    md.add_argument("--label-noise", type=float, default=0.05)
    md.add_argument("--separation", type=float, default=1.0)
    md.set_defaults(func=cmd_phantom_dataset)
    return p


def main(argv=None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as e:
        return int(e.code or 0)
    logging.basicConfig(
        level=logging.INFO if args.verbose else logging.WARNING,
        format="%(levelname)s %(message)s",
        stream=sys.stderr,
    )
    try:
        return args.func(args)
    except (UsageError, ConfigError, ManifestError) as e:
        log.error("%s", e)
        return EXIT_USAGE
    except LesionQvtError as e:
        log.error("%s", e)
        return EXIT_FAIL


if __name__ == "__main__":
    sys.exit(main())
