"""Command-line pipeline driver.

Verbs: synth (fixture cohort), ingest (validate + summarize), features
(feature CSV), train-eval (cross-validated reports), report (plots from
stored artifacts). Exit codes: 0 ok, 1 usage/config, 2 data, 3 numeric.
"""

from __future__ import annotations

import argparse
import csv
import json
import logging
import os
import sys
from pathlib import Path

import numpy as np

from .bdf import read_bdf, with_subject, Subject
from .config import PipelineConfig, canonical_json
from .errors import (
    ConfigError,
    DataError,
    MissingArtifact,
    NumericError,
    PdeegError,
)
from .eval import correlation_matrix, cross_validate, ols_stats
from .features import FeatureMatrix
from .models import SearchSpace, fit_classifier, model_to_json, random_grid_search
from .pipeline import extract_features
from .preprocess import average_channels, resample, split_bands
from .spectral import spectrogram
from .synth import CohortSpec, write_cohort

log = logging.getLogger("pdeeg")

EXIT_OK = 0
EXIT_USAGE = 1
EXIT_DATA = 2
EXIT_NUMERIC = 3


def _write_json(path: Path, obj) -> None:
    path.write_text(canonical_json(obj) + "\n")


def _load_manifest(cfg: PipelineConfig) -> dict:
    path = Path(cfg.input_dir) / cfg.manifest
    if not path.exists():
        raise DataError(f"label manifest not found: {path}")
    doc = json.loads(path.read_text())
    files = doc.get("files")
    if not isinstance(files, dict) or not files:
        raise DataError(f"{path}: manifest needs a non-empty 'files' map")
    for name, meta in files.items():
        if "group" not in meta or "subject" not in meta:
            raise DataError(f"{path}: entry {name!r} needs 'group' and 'subject'")
    return files


def _iter_recordings(cfg: PipelineConfig, subject_filter: str | None):
    """Yield labeled recordings in sorted-filename order."""
    files = _load_manifest(cfg)
    input_dir = Path(cfg.input_dir)
    unlabeled = sorted(
        p.name for p in input_dir.glob("*.bdf") if p.name not in files
    )
    if unlabeled:
        raise DataError(f"files without manifest labels: {unlabeled}")
    for name in sorted(files):
        meta = files[name]
        if subject_filter and subject_filter not in meta["subject"]:
            continue
        path = input_dir / name
        if not path.exists():
            raise DataError(f"manifest names missing file: {path}")
        rec = read_bdf(path)
        yield name, with_subject(
            rec, Subject(id=meta["subject"], group=meta["group"], session=rec.subject.session)
        )


def cmd_synth(args) -> int:
    spec = CohortSpec(
        n_hc=args.hc,
        n_pd=args.pd,
        contrast_uv2=args.contrast,
        seed=args.seed,
        rate_hz=args.rate,
        duration_s=args.duration,
        n_eeg_channels=args.eeg_channels,
    )
    out = Path(args.out)
    manifest = write_cohort(spec, out)
    labels = [l for l in spec.labels if not l.startswith("EXG")]
    cfg = PipelineConfig(
        input_dir=str(out),
        manifest=manifest.name,
        output_dir=str(out / "results"),
        channels=tuple(labels),
    )
    cfg.save(out / "config.json")
    print(f"wrote {spec.n_hc + spec.n_pd} recordings to {out}")
    print(f"manifest: {manifest}")
    print(f"starter config: {out / 'config.json'}")
    return EXIT_OK


def cmd_ingest(cfg: PipelineConfig, args) -> int:
    files = _load_manifest(cfg)
    input_dir = Path(cfg.input_dir)
    unlabeled = sorted(p.name for p in input_dir.glob("*.bdf") if p.name not in files)
    if unlabeled:
        raise DataError(f"files without manifest labels: {unlabeled}")

    groups: dict[str, int] = {}
    rates, durations = set(), set()
    failures = []
    for name in sorted(files):
        if args.subjects and args.subjects not in files[name]["subject"]:
            continue
        path = input_dir / name
        try:
            rec = read_bdf(path)
        except PdeegError as exc:
            failures.append(f"{name}: {type(exc).__name__}: {exc}")
            continue
        groups[files[name]["group"]] = groups.get(files[name]["group"], 0) + 1
        rates.add(rec.rate_hz)
        durations.add(round(rec.duration_s, 3))

    if failures:
        for line in failures:
            print(f"parse error: {line}", file=sys.stderr)
        raise DataError(f"{len(failures)} file(s) failed to parse")
    if not groups:
        raise DataError("no recordings matched")

    print("cohort summary")
    for group in sorted(groups):
        print(f"  {group}: {groups[group]} subjects")
    print(f"  rate: {sorted(rates)} Hz")
    print(f"  duration: {sorted(durations)} s")
    return EXIT_OK


def _spectrogram_rows(rec, cfg: PipelineConfig):
    """Long-format spectrogram of one subject's five band signals."""
    signal = average_channels(rec, cfg.channels).data[0]
    if rec.rate_hz != cfg.resample_hz:
        signal = resample(signal, rec.rate_hz, cfg.resample_hz)
    bands = split_bands(signal, cfg.resample_hz, cfg.bands, cfg.transition_hz)
    rows = []
    for band, sig in bands.bands.items():
        sg = spectrogram(
            sig, cfg.resample_hz, cfg.welch.segment_len, cfg.welch.overlap_len,
            cfg.welch.window,
        )
        keep = sg.freqs_hz <= 60.0
        for ti, t in enumerate(sg.times_s):
            for fi in np.flatnonzero(keep):
                rows.append((band, float(t), float(sg.freqs_hz[fi]), float(sg.power[fi, ti])))
    return rows


def cmd_features(cfg: PipelineConfig, args) -> int:
    out_dir = Path(cfg.output_dir)
    out_dir.mkdir(parents=True, exist_ok=True)

    recordings = []
    first_rec = None
    for name, rec in _iter_recordings(cfg, args.subjects):
        log.info("loaded %s (%s, %.0f Hz)", name, rec.subject.id, rec.rate_hz)
        if first_rec is None:
            first_rec = rec
        recordings.append(rec)
    if not recordings:
        raise DataError("no recordings matched the manifest/filter")

    fm, diags = extract_features(recordings, cfg)
    csv_path = out_dir / "features.csv"
    fm.to_csv(csv_path)

    sidecar = {
        "config_hash": cfg.hash(),
        "columns": list(fm.columns),
        "subjects": {
            d.subject_id: {"group": d.group, "n_epochs": d.n_epochs, "n_kept": d.n_kept}
            for d in diags
        },
    }
    _write_json(out_dir / "features.json", sidecar)

    spec_path = out_dir / "spectrogram.csv"
    with open(spec_path, "w", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow(["band", "time_s", "freq_hz", "power"])
        for row in _spectrogram_rows(first_rec, cfg):
            writer.writerow([row[0], repr(row[1]), repr(row[2]), repr(row[3])])

    for d in diags:
        print(f"{d.subject_id} ({d.group}): kept {d.n_kept}/{d.n_epochs} epochs")
    print(f"feature matrix: {fm.n_rows} rows x {len(fm.columns)} columns -> {csv_path}")
    return EXIT_OK


def _table3_line(kind, agg) -> str:
    return (
        f"{kind.upper():<6} {agg['accuracy'] * 100:>12.3f} {agg['precision'] * 100:>13.3f} "
        f"{agg['recall'] * 100:>10.3f} {agg['f1']:>9.3f} {agg['roc_auc']:>8.3f}"
    )


def cmd_train_eval(cfg: PipelineConfig, args) -> int:
    out_dir = Path(cfg.output_dir)
    csv_path = out_dir / "features.csv"
    if not csv_path.exists():
        raise MissingArtifact(f"feature matrix not found: {csv_path} (run 'features')")
    fm = FeatureMatrix.from_csv(csv_path)

    artifacts = {"features": csv_path.name}
    summaries = {}
    failures = {}
    groups = np.array(fm.subject_ids) if cfg.cv.grouped_by_subject else None

    print(f"{'model':<6} {'accuracy (%)':>12} {'precision (%)':>13} "
          f"{'recall (%)':>10} {'F1':>9} {'ROC AUC':>8}")
    for clf in cfg.classifiers:
        kind = clf.kind
        params = clf.params
        tuner = None
        if cfg.grid_search and kind in cfg.grid_search.space:
            space = SearchSpace(kind=kind, grid={
                k: tuple(v) for k, v in cfg.grid_search.space[kind].items()
            })
            gs = cfg.grid_search
            if gs.mode == "flat":
                params = random_grid_search(
                    space, fm.X, fm.y, k_folds=gs.k, n_draws=gs.n_draws, seed=cfg.cv.seed
                )
            else:
                def tuner(Xt, yt, _space=space, _gs=gs):
                    return random_grid_search(
                        _space, Xt, yt, k_folds=_gs.k, n_draws=_gs.n_draws, seed=cfg.cv.seed
                    )
        try:
            report = cross_validate(
                kind, fm.X, fm.y, params=params, k=cfg.cv.k, seed=cfg.cv.seed,
                columns=fm.columns, groups=groups, tuner=tuner,
            )
            doc = report.to_dict()
            doc["config_hash"] = cfg.hash()
            path = out_dir / f"cvreport_{kind}.json"
            _write_json(path, doc)
            artifacts[f"cvreport_{kind}"] = path.name
            summaries[kind] = report.aggregate
            print(_table3_line(kind, report.aggregate))
            for w in report.warnings:
                log.warning("%s: %s", kind, w)
            if cfg.save_models:
                model = fit_classifier(
                    kind, fm.X, fm.y, params, seed=cfg.cv.seed, columns=fm.columns
                )
                mpath = out_dir / f"model_{kind}.json"
                mpath.write_text(model_to_json(model) + "\n")
                artifacts[f"model_{kind}"] = mpath.name
        except PdeegError as exc:
            failures[kind] = f"{type(exc).__name__}: {exc}"
            print(f"{kind.upper():<6} failed: {failures[kind]}", file=sys.stderr)

    stats = {
        "config_hash": cfg.hash(),
        "ols": ols_stats(fm.X, fm.y, columns=fm.columns).to_dict(),
        "correlation": correlation_matrix(fm).to_dict(),
        "n_rows": fm.n_rows,
        "n_columns": len(fm.columns),
    }
    stats_path = out_dir / "stats.json"
    _write_json(stats_path, stats)
    artifacts["stats"] = stats_path.name

    manifest = {
        "config_hash": cfg.hash(),
        "artifacts": artifacts,
        "summaries": summaries,
        "failures": failures,
    }
    _write_json(out_dir / "run_manifest.json", manifest)

    if failures:
        numeric = any("NoConvergence" in msg or "ZeroSpectrum" in msg
                      for msg in failures.values())
        return EXIT_NUMERIC if numeric else EXIT_DATA
    return EXIT_OK


def _require(path: Path) -> Path:
    if not path.exists():
        raise MissingArtifact(f"required artifact missing: {path}")
    return path


def cmd_report(args) -> int:
    import matplotlib

    matplotlib.use("Agg")
    import matplotlib.pyplot as plt

    art_dir = Path(args.artifacts)
    if not art_dir.is_dir():
        raise MissingArtifact(f"artifacts directory not found: {art_dir}")
    reports = {}
    for path in sorted(art_dir.glob("cvreport_*.json")):
        doc = json.loads(path.read_text())
        reports[doc["kind"]] = doc
    if not reports:
        raise MissingArtifact(f"no curve reports found: {art_dir / 'cvreport_*.json'}")

    written = []

    fig, ax = plt.subplots(figsize=(6, 5))
    for kind, doc in reports.items():
        ax.plot(doc["roc"]["fpr"], doc["roc"]["tpr"],
                label=f"{kind.upper()} (AUC={doc['roc']['auc']:.3f})")
    ax.plot([0, 1], [0, 1], "k--", lw=0.8)
    ax.set_xlabel("false positive rate")
    ax.set_ylabel("true positive rate")
    ax.legend()
    fig.savefig(art_dir / "roc.png", dpi=120, bbox_inches="tight")
    plt.close(fig)
    written.append("roc.png")

    fig, ax = plt.subplots(figsize=(6, 5))
    for kind, doc in reports.items():
        ax.plot(doc["pr"]["recall"], doc["pr"]["precision"], label=kind.upper())
    ax.set_xlabel("recall")
    ax.set_ylabel("precision")
    ax.legend()
    fig.savefig(art_dir / "pr.png", dpi=120, bbox_inches="tight")
    plt.close(fig)
    written.append("pr.png")

    for kind, doc in reports.items():
        cm = doc["pooled"]["confusion"]
        grid = np.array([[cm["tn"], cm["fp"]], [cm["fn"], cm["tp"]]])
        fig, ax = plt.subplots(figsize=(4, 4))
        ax.imshow(grid, cmap="Blues")
        for (i, j), v in np.ndenumerate(grid):
            ax.text(j, i, str(v), ha="center", va="center")
        ax.set_xticks([0, 1], ["pred HC", "pred PD"])
        ax.set_yticks([0, 1], ["true HC", "true PD"])
        ax.set_title(f"{kind.upper()} pooled confusion")
        fig.savefig(art_dir / f"confusion_{kind}.png", dpi=120, bbox_inches="tight")
        plt.close(fig)
        written.append(f"confusion_{kind}.png")

        if doc.get("importance"):
            imp = doc["importance"]
            fig, axes = plt.subplots(1, 2, figsize=(10, 4))
            for ax_i, key in zip(axes, ("feature_types", "bands")):
                items = sorted(imp[key].items(), key=lambda kv: -kv[1])
                ax_i.bar([k for k, _ in items], [v for _, v in items])
                ax_i.set_ylabel("importance")
                ax_i.tick_params(axis="x", rotation=45)
                ax_i.set_title(key.replace("_", " "))
            fig.suptitle(f"{kind.upper()} feature importance")
            fig.savefig(art_dir / f"importance_{kind}.png", dpi=120, bbox_inches="tight")
            plt.close(fig)
            written.append(f"importance_{kind}.png")

    stats_path = art_dir / "stats.json"
    if stats_path.exists():
        stats = json.loads(stats_path.read_text())
        corr = stats["correlation"]
        mat = np.array(corr["matrix"])
        fig, ax = plt.subplots(figsize=(5.5, 5))
        im = ax.imshow(mat, vmin=-1, vmax=1, cmap="RdBu_r")
        ax.set_xticks(range(len(corr["labels"])), corr["labels"], rotation=45)
        ax.set_yticks(range(len(corr["labels"])), corr["labels"])
        for (i, j), v in np.ndenumerate(mat):
            ax.text(j, i, f"{v:.2f}", ha="center", va="center", fontsize=7)
        fig.colorbar(im)
        fig.savefig(art_dir / "correlation.png", dpi=120, bbox_inches="tight")
        plt.close(fig)
        written.append("correlation.png")

    spec_path = art_dir / "spectrogram.csv"
    if spec_path.exists():
        bands: dict[str, dict] = {}
        with open(spec_path, newline="") as fh:
            for row in csv.DictReader(fh):
                b = bands.setdefault(row["band"], {"t": [], "f": [], "p": []})
                b["t"].append(float(row["time_s"]))
                b["f"].append(float(row["freq_hz"]))
                b["p"].append(float(row["power"]))
        fig, axes = plt.subplots(len(bands), 1, figsize=(8, 2.2 * len(bands)),
                                 sharex=True, squeeze=False)
        for ax, (band, b) in zip(axes[:, 0], bands.items()):
            ts = np.unique(b["t"])
            fs = np.unique(b["f"])
            grid = np.zeros((fs.size, ts.size))
            ti = np.searchsorted(ts, b["t"])
            fi = np.searchsorted(fs, b["f"])
            grid[fi, ti] = b["p"]
            ax.pcolormesh(ts, fs, np.log10(grid + 1e-12), shading="nearest")
            ax.set_ylabel(f"{band}\nHz")
            ax.set_ylim(0, 50)
        axes[-1, 0].set_xlabel("time (s)")
        fig.savefig(art_dir / "spectrogram.png", dpi=120, bbox_inches="tight")
        plt.close(fig)
        written.append("spectrogram.png")

    for name in written:
        print(f"wrote {art_dir / name}")
    return EXIT_OK


def _build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="pdeeg",
        description="Resting-state EEG band-feature pipeline (HC vs PD).",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    p_synth = sub.add_parser("synth", help="generate a synthetic labeled cohort")
    p_synth.add_argument("--out", required=True, help="output directory")
    p_synth.add_argument("--hc", type=int, default=16)
    p_synth.add_argument("--pd", type=int, default=15)
    p_synth.add_argument("--contrast", type=float, default=12.0,
                         help="extra alpha-band power (uV^2) for the PD class")
    p_synth.add_argument("--seed", type=int, default=0)
    p_synth.add_argument("--duration", type=float, default=180.0)
    p_synth.add_argument("--rate", type=float, default=512.0)
    p_synth.add_argument("--eeg-channels", type=int, default=32)

    for name, help_txt in (
        ("ingest", "validate input files and print a cohort summary"),
        ("features", "run preprocessing + feature extraction"),
        ("train-eval", "cross-validate the configured classifiers"),
    ):
        p = sub.add_parser(name, help=help_txt)
        p.add_argument("--config", required=True)
        p.add_argument("--seed", type=int, default=None, help="override cv.seed")
        p.add_argument("--out", default=None, help="override output_dir")
        p.add_argument("--subjects", default=None, help="subject id substring filter")

    p_rep = sub.add_parser("report", help="render plots from stored artifacts")
    p_rep.add_argument("--artifacts", required=True, help="artifacts directory")
    return parser


def _load_config(args) -> PipelineConfig:
    cfg = PipelineConfig.load(args.config)
    if getattr(args, "seed", None) is not None:
        from dataclasses import replace

        cfg.cv = replace(cfg.cv, seed=args.seed)
    if getattr(args, "out", None):
        cfg.output_dir = args.out
    return cfg


def main(argv=None) -> int:
    logging.basicConfig(
        level=os.environ.get("PDEEG_LOG_LEVEL", "WARNING").upper(),
        format="%(levelname)s %(name)s: %(message)s",
        stream=sys.stderr,
    )
    parser = _build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return EXIT_OK if exc.code in (0, None) else EXIT_USAGE

    try:
        if args.command == "synth":
            return cmd_synth(args)
        if args.command == "report":
            return cmd_report(args)
        cfg = _load_config(args)
        if args.command == "ingest":
            return cmd_ingest(cfg, args)
        if args.command == "features":
            return cmd_features(cfg, args)
        if args.command == "train-eval":
            return cmd_train_eval(cfg, args)
        parser.error(f"unknown command {args.command}")
    except ConfigError as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except NumericError as exc:
        print(f"numeric error: {exc}", file=sys.stderr)
        return EXIT_NUMERIC
    except DataError as exc:
        print(f"data error: {exc}", file=sys.stderr)
        return EXIT_DATA
    return EXIT_USAGE


if __name__ == "__main__":
    sys.exit(main())
