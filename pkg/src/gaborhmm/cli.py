"""Command line interface.

Exit codes: 0 success, 1 usage error, 2 data error (bad files, configs,
manifests, shapes), 3 numeric failure.
"""

from __future__ import annotations

import argparse
import csv
import hashlib
import os
import re
import sys
from pathlib import Path

import numpy as np

from . import artifacts, pipeline
from .config import RunConfig, load_config, save_config
from .errors import DataError, NumericError
from .evaluate import render_table
from .features import extract_observations
from .images import load_image, write_pgm
from .manifest import load_manifest
from .sampling import scan_order

OUT_DIR_ENV = "GABORHMM_OUT"


class _UsageError(Exception):
    pass


class _Parser(argparse.ArgumentParser):
    def error(self, message):  # noqa: D102 - argparse hook
        raise _UsageError(message)


def _config_from_args(args) -> RunConfig:
    if args.config is None:
        cfg = RunConfig()
        cfg.validate()
        return cfg
    return load_config(args.config)


def _resolve_out_dir(flag_value: str | None, default: str) -> Path:
    if flag_value:
        return Path(flag_value)
    env = os.environ.get(OUT_DIR_ENV)
    if env:
        return Path(env)
    return Path(default)


def _artifact_name(manifest_path: str, suffix: str) -> str:
    safe = re.sub(r"[^A-Za-z0-9._-]", "_", manifest_path)
    digest = hashlib.sha256(manifest_path.encode("utf-8")).hexdigest()[:8]
    return f"{safe}.{digest}{suffix}"


def _cmd_gabor(args) -> int:
    cfg = _config_from_args(args)
    image = load_image(args.image, size=(cfg.image_w, cfg.image_h))
    gf = pipeline.feature_image(image, cfg)
    artifacts.write_feature_image(args.out, gf)
    if args.preview:
        write_pgm(args.preview, gf)
    print(f"wrote {args.out} ({gf.shape[1]}x{gf.shape[0]})")
    return 0


def _cmd_plan(args) -> int:
    cfg = _config_from_args(args)
    plan = pipeline.sampling_plan(cfg)
    if args.dump:
        writer = csv.writer(sys.stdout)
        writer.writerow(["index", "x0", "y0"])
        for i, (x0, y0) in enumerate(plan.blocks):
            writer.writerow([i, x0, y0])
    else:
        print(f"image {plan.image_w}x{plan.image_h}, block {plan.block_k}, "
              f"overlap {plan.overlap_p}, strip {plan.strip_h}")
        print(f"rows {plan.n_rows}, cols {plan.n_cols}, blocks {plan.n_blocks}")
    return 0


def _cmd_extract(args) -> int:
    cfg = _config_from_args(args)
    if (args.image is None) == (args.feature is None):
        raise _UsageError("give exactly one of --image or --feature")
    if args.image is not None:
        seq = pipeline.observations_from_file(args.image, cfg)
    else:
        gf = artifacts.read_feature_image(args.feature)
        plan = pipeline.sampling_plan(cfg)
        order = scan_order(plan, mode=cfg.sampling.scan)
        seq = extract_observations(gf, plan, order=order,
                                   fallback_scale=cfg.sampling.fallback_scale)
    if args.out:
        artifacts.save_sequence(args.out, seq)
        print(f"wrote {args.out} ({len(seq)} observations)")
    else:
        for v in seq.values:
            print(repr(float(v)))
    return 0


def _cmd_train(args) -> int:
    cfg = _config_from_args(args)
    manifest = load_manifest(args.manifest)
    out_dir = _resolve_out_dir(args.out_dir, "gaborhmm_out")
    out_dir.mkdir(parents=True, exist_ok=True)
    system = pipeline.train_system(manifest, cfg, base_dir=args.base_dir)

    model_path = out_dir / "model.json"
    artifacts.save_model(model_path, system.model, system.fingerprint)
    written = [model_path]
    if system.classifier is not None:
        clf_path = out_dir / "classifier.json"
        artifacts.save_classifier(clf_path, system.classifier, system.fingerprint,
                                  tau=system.tau)
        written.append(clf_path)
    save_config(cfg, out_dir / "config.json")
    written.append(out_dir / "config.json")
    for p in written:
        print(f"wrote {p}")
    print(f"tau {system.tau!r}")
    return 0


def _cmd_classify(args) -> int:
    cfg = _config_from_args(args)
    fingerprint = cfg.fingerprint()
    model = artifacts.load_model(args.model, expect_fingerprint=fingerprint)
    seq = pipeline.observations_from_file(args.image, cfg)

    if isinstance(model, dict):
        system = pipeline.TrainedSystem(
            config=cfg, fingerprint=fingerprint, mode="per_class",
            model=model, classifier=None, tau=float("inf"),
        )
    else:
        if args.classifier is None:
            raise _UsageError("a shared model needs --classifier")
        state, _tau = artifacts.load_classifier(args.classifier,
                                                expect_fingerprint=fingerprint)
        system = pipeline.TrainedSystem(
            config=cfg, fingerprint=fingerprint, mode="global",
            model=model, classifier=state, tau=float("inf"),
        )

    predicted, scores, ids = system.probe_scores(seq)
    print(predicted)
    writer = csv.writer(sys.stdout)
    writer.writerow(["class", "score"])
    for cid, score in zip(ids, scores):
        writer.writerow([cid, repr(float(score))])
    return 0


def _cmd_eval(args) -> int:
    cfg = _config_from_args(args)
    manifest = load_manifest(args.manifest)
    system, report = pipeline.run_protocol(manifest, cfg, base_dir=args.base_dir)

    if args.out:
        artifacts.write_report_json(args.out, report.to_dict())
        print(f"wrote {args.out}")
    if args.probes_csv:
        with open(args.probes_csv, "w", newline="", encoding="utf-8") as fh:
            writer = csv.writer(fh)
            writer.writerow(["path", "subject", "role", "claimed", "predicted",
                             "best_score", "accepted", "outcome"])
            for p in report.probes:
                writer.writerow([p.path, p.subject, p.role, p.claimed_class,
                                 p.predicted_class, repr(p.best_score),
                                 int(p.accepted), p.outcome])
        print(f"wrote {args.probes_csv}")
    if args.write_artifacts or args.artifacts_dir:
        art_dir = _resolve_out_dir(args.artifacts_dir, "gaborhmm_out")
        _write_eval_artifacts(art_dir, system, report, manifest, cfg, args.base_dir)
        print(f"wrote artifacts under {art_dir}")
    if args.table or not (args.out or args.probes_csv):
        print(render_table(report))
    return 0


def _write_eval_artifacts(art_dir: Path, system, report, manifest, cfg,
                          base_dir: str | None) -> None:
    features_dir = art_dir / "features"
    sequences_dir = art_dir / "sequences"
    features_dir.mkdir(parents=True, exist_ok=True)
    sequences_dir.mkdir(parents=True, exist_ok=True)
    seen: set[str] = set()
    for entry in manifest.entries:
        if entry.path in seen:
            continue
        seen.add(entry.path)
        image = load_image(manifest.resolved_path(entry, base_dir),
                           size=(cfg.image_w, cfg.image_h))
        gf = pipeline.feature_image(image, cfg)
        artifacts.write_feature_image(
            features_dir / _artifact_name(entry.path, ".gfi"), gf)
        seq = pipeline.image_observations(image, cfg, source_id=entry.path)
        artifacts.save_sequence(
            sequences_dir / _artifact_name(entry.path, ".csv"), seq)
    artifacts.save_model(art_dir / "model.json", system.model, system.fingerprint)
    if system.classifier is not None:
        artifacts.save_classifier(art_dir / "classifier.json", system.classifier,
                                  system.fingerprint, tau=system.tau)
    save_config(cfg, art_dir / "config.json")
    artifacts.write_report_json(art_dir / "report.json", report.to_dict())


def build_parser() -> _Parser:
    parser = _Parser(prog="gaborhmm",
                     description="face identification from wavelet features "
                                 "and a cyclic hidden Markov model")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("gabor", help="fuse an image into a feature image")
    p.add_argument("--in", dest="image", required=True, metavar="IMAGE")
    p.add_argument("--out", required=True)
    p.add_argument("--preview", help="also write a viewable PGM")
    p.add_argument("--config")
    p.set_defaults(func=_cmd_gabor)

    p = sub.add_parser("plan", help="show the block sampling layout")
    p.add_argument("--dump", action="store_true", help="print blocks as CSV")
    p.add_argument("--config")
    p.set_defaults(func=_cmd_plan)

    p = sub.add_parser("extract", help="turn a feature image (or raw image) into a sequence")
    p.add_argument("--in", dest="feature", metavar="FEATURE_IMAGE")
    p.add_argument("--image", help="raw image to fuse and extract in one step")
    p.add_argument("--out")
    p.add_argument("--config")
    p.set_defaults(func=_cmd_extract)

    p = sub.add_parser("train", help="fit the model and classifier from a manifest")
    p.add_argument("--manifest", required=True)
    p.add_argument("--out-dir")
    p.add_argument("--base-dir")
    p.add_argument("--config")
    p.set_defaults(func=_cmd_train)

    p = sub.add_parser("classify", help="identify one image with trained artifacts")
    p.add_argument("--in", dest="image", required=True, metavar="IMAGE")
    p.add_argument("--model", required=True)
    p.add_argument("--classifier")
    p.add_argument("--config")
    p.set_defaults(func=_cmd_classify)

    p = sub.add_parser("eval", help="train and evaluate per a manifest protocol")
    p.add_argument("--manifest", required=True)
    p.add_argument("--base-dir")
    p.add_argument("--config")
    p.add_argument("--out", help="write the report JSON here")
    p.add_argument("--probes-csv", help="write per-probe outcomes here")
    p.add_argument("--artifacts-dir")
    p.add_argument("--write-artifacts", action="store_true")
    p.add_argument("--table", action="store_true", help="print the text table")
    p.set_defaults(func=_cmd_eval)

    return parser


def main(argv: list[str] | None = None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
        return args.func(args)
    except _UsageError as exc:
        print(f"usage error: {exc}", file=sys.stderr)
        return 1
    except DataError as exc:
        print(f"data error: {exc}", file=sys.stderr)
        return 2
    except ValueError as exc:
        print(f"data error: {exc}", file=sys.stderr)
        return 2
    except (NumericError, np.linalg.LinAlgError, FloatingPointError) as exc:
        print(f"numeric error: {exc}", file=sys.stderr)
        return 3


if __name__ == "__main__":
    sys.exit(main())
