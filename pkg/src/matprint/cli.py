"""matprint command line: ingest ratings, extract features, train, predict,
retrieve, evaluate, embed, build trials, serve.

Exit codes: 0 success, 2 invalid input, 3 missing dependency, 4 format error.
"""

from __future__ import annotations

import argparse
import csv
import json
import sys
from pathlib import Path

import numpy as np

from . import __version__
from .errors import (
    DependencyUnavailableError,
    EXIT_FORMAT,
    EXIT_INVALID_INPUT,
    EXIT_MISSING_DEPENDENCY,
    EXIT_OK,
    FormatError,
    InvalidInputError,
    MatprintError,
    NotFoundError,
)
from .evalmetrics import build_validation_trials, classical_mds, evaluate, write_per_attribute_csv
from .features import (
    DEFAULT_SPECULAR_OFFSET_DEGREES,
    FramePair,
    STAT_FEATURE_SPEC_ID,
    extract_stat_features,
    load_frame_dir,
    load_image,
    normalize_wild_capture,
    select_frames,
)
from .mfdb import build_database, load_mfdb, save_mfdb
from .mfx import load_mfx, save_mfx, table_from_matrix
from .model import (
    EMBEDDING_SPEC_ID,
    TrainConfig,
    load_model,
    mlp_forward,
    mlp_train,
    preset_spec,
    save_model,
    stratified_split,
)
from .ratings import build_fingerprints, read_ratings_csv, write_exclusion_report
from .schema import Fingerprint, MaterialRecord, SimilarityParams, clamp_values, default_schema
from .similarity import attach_typicality, retrieve, similarity_matrix


def _load_categories(path) -> dict[str, str]:
    mapping = {}
    with open(path, newline="", encoding="utf-8") as fh:
        reader = csv.DictReader(fh)
        if reader.fieldnames is None or not {"material_id", "category"} <= set(reader.fieldnames):
            raise InvalidInputError("categories CSV needs material_id,category header")
        for row in reader:
            mapping[row["material_id"]] = row["category"]
    return mapping


def cmd_ingest_ratings(args) -> int:
    ratings = read_ratings_csv(args.csv)
    fingerprints, report = build_fingerprints(ratings)
    categories = _load_categories(args.categories) if args.categories else {}
    records = [
        MaterialRecord(
            material_id=fp.material_id,
            category=categories.get(fp.material_id, "other"),
            fingerprint=fp,
        )
        for fp in fingerprints
    ]
    db = build_database(attach_typicality(records) if len(records) >= 2 else records)
    save_mfdb(db, args.output)
    if args.exclusion_report:
        write_exclusion_report(report, args.exclusion_report)
    print(
        f"ingested {len(ratings)} ratings -> {len(records)} materials "
        f"({len(report.excluded)} rater exclusions) -> {args.output}"
    )
    return EXIT_OK


def cmd_extract_stat(args) -> int:
    root = Path(args.frames_dir)
    if not root.is_dir():
        raise InvalidInputError(f"{root} is not a directory")
    has_frames = any(root.glob("frame_0*.png")) or any(root.glob("frame_0*.jpg"))
    material_dirs = [root] if has_frames else sorted(p for p in root.iterdir() if p.is_dir())
    if not material_dirs:
        raise InvalidInputError(f"{root} holds no frame directories")
    ids, rows, indices = [], [], []
    for mdir in material_dirs:
        pair = select_frames(load_frame_dir(mdir), offset_degrees=args.offset)
        feats = extract_stat_features(pair)
        ids.append(mdir.name)
        rows.append(feats.values)
        indices.append(pair.frame_indices)
    table = table_from_matrix(STAT_FEATURE_SPEC_ID, ids, np.array(rows), indices)
    save_mfx(table, args.output)
    print(f"extracted {len(ids)} materials -> {args.output}")
    return EXIT_OK


def cmd_train(args) -> int:
    table = load_mfx(args.features)
    db = load_mfdb(args.db)
    feature_spec = STAT_FEATURE_SPEC_ID if args.spec == "s" else EMBEDDING_SPEC_ID
    if table.extractor_id != feature_spec:
        raise InvalidInputError(
            f"feature file is {table.extractor_id!r}, --spec {args.spec} needs {feature_spec!r}"
        )
    common = sorted(set(table.material_ids()) & set(db.ids()))
    if not common:
        raise InvalidInputError("no materials shared between features and database")

    train_ids = common
    if args.test_ratio > 0:
        split = stratified_split(
            [db.by_id(m) for m in common], ratio=args.test_ratio, seed=args.seed
        )
        train_ids = [m for m in common if m in set(split.train_ids)]
        if args.split_out:
            with open(args.split_out, "w", encoding="utf-8") as fh:
                json.dump(
                    {"train_ids": list(split.train_ids), "test_ids": list(split.test_ids)},
                    fh,
                    indent=2,
                )

    features = np.array([table.row(m) for m in train_ids], dtype=np.float64)
    variant_rows = [table.variant_matrix(m).astype(np.float64) for m in train_ids]
    if all(v.shape[0] == 1 for v in variant_rows):
        variant_rows = None
    targets = np.array([db.by_id(m).fingerprint.values for m in train_ids])

    config = TrainConfig(
        learning_rate=args.lr,
        batch_size=args.batch_size,
        max_epochs=args.epochs,
        seed=args.seed,
        augmentation=TrainConfig().augmentation,
    )
    model = mlp_train(
        features,
        targets,
        config,
        spec=preset_spec(feature_spec),
        feature_spec_id=feature_spec,
        variant_rows=variant_rows,
        standardize=(feature_spec == STAT_FEATURE_SPEC_ID),
    )
    save_model(model, args.output)
    summary = model.train_summary or {}
    print(
        f"trained {feature_spec} model on {len(train_ids)} materials "
        f"(val loss {summary.get('best_val_loss', float('nan')):.4g}) -> {args.output}"
    )
    return EXIT_OK


def cmd_predict(args) -> int:
    model = load_model(args.model)
    outputs = []
    if args.images:
        if model.feature_spec_id != STAT_FEATURE_SPEC_ID:
            raise DependencyUnavailableError(
                f"model consumes {model.feature_spec_id!r}; image input needs the "
                "embedding sidecar, submit a precomputed vector instead"
            )
        a, b = (normalize_wild_capture(load_image(p)) for p in args.images)
        pair = FramePair(non_specular=a, near_specular=b, source="smartphone")
        feats = extract_stat_features(pair)
        outputs.append(("query", mlp_forward(model, feats.values)))
    else:
        table = load_mfx(args.vector)
        for mid in table.material_ids():
            vec = table.row(mid).astype(np.float64)
            outputs.append((mid, mlp_forward(model, vec)))

    results = [
        Fingerprint(material_id=mid, values=clamp_values(raw)).to_dict() for mid, raw in outputs
    ]
    payload = {
        "extractor_id": model.feature_spec_id,
        "model_version": model.schema_version,
        "fingerprints": results,
    }
    _emit(payload, args.output)
    return EXIT_OK


def cmd_retrieve(args) -> int:
    db = load_mfdb(args.db)
    query_arg = args.query
    if Path(query_arg).exists():
        with open(query_arg, encoding="utf-8") as fh:
            doc = json.load(fh)
        if "material_id" not in doc:
            doc["material_id"] = "query"
        query = Fingerprint.from_dict(doc)
    else:
        query = db.by_id(query_arg).fingerprint
    params = SimilarityParams(alpha=args.alpha)
    ranked = retrieve(db.materials, query, k=args.k, params=params)
    _emit({"query": query.material_id, "results": [
        {"material_id": mid, "score": score} for mid, score in ranked
    ]}, args.output)
    return EXIT_OK


def cmd_eval(args) -> int:
    pred = load_mfdb(args.pred)
    gt = load_mfdb(args.gt)
    report = evaluate(pred.materials, gt.materials, k_params=args.k_params)
    report.to_json(args.output)
    if args.per_attribute:
        write_per_attribute_csv(report, gt.schema, args.per_attribute)
    print(
        f"r_sm={report.r_sm:.4f} r_a={report.r_a:.4f} mae={report.mae:.4f} "
        f"n={report.sample_count} -> {args.output}"
    )
    return EXIT_OK


def cmd_embed(args) -> int:
    db = load_mfdb(args.db)
    sm = similarity_matrix(db.materials)
    coords = classical_mds(sm, dims=2)
    with open(args.output, "w", newline="", encoding="utf-8") as fh:
        writer = csv.writer(fh)
        writer.writerow(["material_id", "x", "y"])
        for mid, (x, y) in zip(db.ids(), coords):
            writer.writerow([mid, repr(float(x)), repr(float(y))])
    print(f"embedded {len(db.materials)} materials -> {args.output}")
    return EXIT_OK


def cmd_trials(args) -> int:
    db = load_mfdb(args.db)
    pred = load_mfdb(args.pred)
    preds = {rec.material_id: rec.fingerprint for rec in pred.materials}
    trials = build_validation_trials(db.materials, preds, seed=args.seed)
    with open(args.output, "w", encoding="utf-8") as fh:
        json.dump([t.to_dict() for t in trials], fh, indent=2)
        fh.write("\n")
    print(f"built {len(trials)} trials -> {args.output}")
    return EXIT_OK


def cmd_serve(args) -> int:
    import uvicorn

    from .service import build_state, create_app

    db = load_mfdb(args.db)
    models = {}
    for path in args.model or []:
        model = load_model(path)
        models[model.feature_spec_id] = model
    app = create_app(build_state(db, models))
    uvicorn.run(app, host=args.host, port=args.port, log_level="warning")
    return EXIT_OK


def _emit(payload: dict, output: str | None) -> None:
    text = json.dumps(payload, indent=2)
    if output:
        Path(output).write_text(text + "\n", encoding="utf-8")
    else:
        print(text)


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="matprint", description=__doc__)
    parser.add_argument("--version", action="version", version=f"matprint {__version__}")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("ingest-ratings", help="ratings CSV -> fingerprint database")
    p.add_argument("csv")
    p.add_argument("-o", "--output", required=True)
    p.add_argument("--categories", help="optional material_id,category CSV")
    p.add_argument("--exclusion-report", help="write rater-exclusion JSON here")
    p.set_defaults(func=cmd_ingest_ratings)

    p = sub.add_parser("extract-stat", help="frame directories -> statistical features")
    p.add_argument("frames_dir")
    p.add_argument("-o", "--output", required=True)
    p.add_argument("--offset", type=float, default=DEFAULT_SPECULAR_OFFSET_DEGREES)
    p.set_defaults(func=cmd_extract_stat)

    p = sub.add_parser("train", help="fit an MLP on features + database fingerprints")
    p.add_argument("--features", required=True)
    p.add_argument("--db", required=True)
    p.add_argument("--spec", choices=["s", "clip"], required=True)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("-o", "--output", required=True)
    p.add_argument("--lr", type=float, default=1e-3)
    p.add_argument("--batch-size", type=int, default=32)
    p.add_argument("--epochs", type=int, default=2000)
    p.add_argument("--test-ratio", type=float, default=0.0)
    p.add_argument("--split-out", help="write the train/test id split here")
    p.set_defaults(func=cmd_train)

    p = sub.add_parser("predict", help="predict fingerprints from images or vectors")
    p.add_argument("--model", required=True)
    group = p.add_mutually_exclusive_group(required=True)
    group.add_argument("--images", nargs=2, metavar=("NON_SPECULAR", "NEAR_SPECULAR"))
    group.add_argument("--vector", help="MFX file of precomputed feature vectors")
    p.add_argument("-o", "--output")
    p.set_defaults(func=cmd_predict)

    p = sub.add_parser("retrieve", help="top-k most similar materials")
    p.add_argument("--db", required=True)
    p.add_argument("--query", required=True, help="material id or fingerprint JSON path")
    p.add_argument("-k", type=int, default=5)
    p.add_argument("--alpha", type=float, default=0.5)
    p.add_argument("-o", "--output")
    p.set_defaults(func=cmd_retrieve)

    p = sub.add_parser("eval", help="compare predicted vs ground-truth databases")
    p.add_argument("--pred", required=True)
    p.add_argument("--gt", required=True)
    p.add_argument("-o", "--output", required=True)
    p.add_argument("--k-params", type=int, default=0)
    p.add_argument("--per-attribute", help="write per-attribute CSV here")
    p.set_defaults(func=cmd_eval)

    p = sub.add_parser("embed", help="2-D similarity map coordinates")
    p.add_argument("--db", required=True)
    p.add_argument("-o", "--output", required=True)
    p.set_defaults(func=cmd_embed)

    p = sub.add_parser("trials", help="build validation-trial definitions")
    p.add_argument("--db", required=True)
    p.add_argument("--pred", required=True)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("-o", "--output", required=True)
    p.set_defaults(func=cmd_trials)

    p = sub.add_parser("serve", help="run the REST service")
    p.add_argument("--db", required=True)
    p.add_argument("--model", action="append", help="model checkpoint (repeatable)")
    p.add_argument("--port", type=int, default=8080)
    p.add_argument("--host", default="127.0.0.1")
    p.set_defaults(func=cmd_serve)
    return parser


def main(argv: list[str] | None = None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return args.func(args)
    except FormatError as exc:
        print(f"format error: {exc}", file=sys.stderr)
        return EXIT_FORMAT
    except DependencyUnavailableError as exc:
        print(f"missing dependency: {exc}", file=sys.stderr)
        return EXIT_MISSING_DEPENDENCY
    except (InvalidInputError, NotFoundError) as exc:
        print(f"invalid input: {exc}", file=sys.stderr)
        return EXIT_INVALID_INPUT
    except MatprintError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_INVALID_INPUT
    except OSError as exc:
        print(f"io error: {exc}", file=sys.stderr)
        return EXIT_INVALID_INPUT


if __name__ == "__main__":
    sys.exit(main())
