"""Command-line interface.

Subcommands cover the whole workflow on synthetic material:

    synth       build a synthetic source corpus + manifest
    mix         materialize training chunks or 15 s evaluation scenes
    train       train a detector from a manifest (fresh mixtures per
                epoch) or from a materialized chunk dataset
    infer       score a WAV file or a whole dataset with trained weights
    eval        compute AUC / singing-rejection AUC (and per-song
                accuracy) from scores + sidecars
    complexity  parameter/MAC counts, optional wall-clock RTF
    sweep       train/eval grids over p_speech or chunk length, with CSV
                and SVG plot

Every command that writes results also writes a run.json reproducibility
record (command, config, seed, input hashes, toolkit version; never a
timestamp). Exit codes: 0 success, 2 invalid arguments or configuration,
3 data/compatibility errors, 4 training divergence, 5 internal failure.

--strict-deterministic re-executes the process with threaded BLAS pinned
to one thread so that repeated runs are byte-identical on the same
machine.
"""

from __future__ import annotations

import argparse
import hashlib
import json
import os
import sys
import traceback
from pathlib import Path

import numpy as np

from . import __version__
from .audio import AudioBuffer, read_wav
from .dsp import FeatureConfig, logmel
from .errors import (CorruptWeights, DegenerateClassDistribution,
                     DegenerateInterferer, IncompatibleWeights, InputTooShort,
                     InvalidConfig, InvalidInput, InvalidShape,
                     ManifestInconsistent, TrainingDiverged, Unmeasurable)
from .schemas import validate_record

_STRICT_ENV = "SRSAD_STRICT_ACTIVE"
_THREAD_VARS = ("OMP_NUM_THREADS", "OPENBLAS_NUM_THREADS", "MKL_NUM_THREADS",
                "NUMEXPR_NUM_THREADS", "VECLIB_MAXIMUM_THREADS")

_DATA_ERRORS = (ManifestInconsistent, CorruptWeights, IncompatibleWeights,
                InputTooShort, Unmeasurable, DegenerateClassDistribution,
                DegenerateInterferer, InvalidShape)
_USAGE_ERRORS = (InvalidConfig, InvalidInput)


def _sha256_file(path) -> str:
    digest = hashlib.sha256()
    with open(path, "rb") as f:
        for block in iter(lambda: f.read(1 << 20), b""):
            digest.update(block)
    return digest.hexdigest()


def _write_json(path, record) -> None:
    with open(path, "w") as f:
        json.dump(record, f, indent=1, sort_keys=True)
        f.write("\n")


def _write_run_record(out_dir: Path, command: str, seed: int, config: dict,
                      input_hashes: dict) -> None:
    record = {
        "schema_version": 1,
        "command": command,
        "seed": seed,
        "config": config,
        "toolkit_version": __version__,
        "input_hashes": input_hashes,
    }
    validate_record("run_record", record)
    _write_json(out_dir / "run.json", record)


def _load_config_file(path) -> dict:
    if path is None:
        return {}
    try:
        with open(path) as f:
            cfg = json.load(f)
    except (OSError, ValueError) as exc:
        raise InvalidConfig(f"unreadable config file {path}: {exc}") from exc
    if not isinstance(cfg, dict):
        raise InvalidConfig(f"config file {path} must hold a JSON object")
    return cfg


def _policy_from_args(args, overrides: dict):
    from .datagen.mixer import MixPolicy

    base = overrides.get("policy", {})
    fields = dict(base)
    if getattr(args, "p_speech", None) is not None:
        fields["p_speech"] = args.p_speech
    if getattr(args, "chunk_len_s", None) is not None:
        fields["chunk_len_s"] = args.chunk_len_s
    fields["seed"] = args.seed
    if "augmentations" in fields:
        from .datagen.augment import AugmentationConfig
        fields["augmentations"] = AugmentationConfig(**fields["augmentations"])
    return MixPolicy(**fields)


def _model_config(args):
    from .model.config import full_model, lc_model

    if args.model == "sr-sad-lc":
        return lc_model(args.c)
    return full_model(args.c)


# ------------------------------------------------------------ commands

def cmd_synth(args) -> int:
    from .datagen.corpus import CorpusSpec, build_corpus

    spec = CorpusSpec(seed=args.seed,
                      train_speech=args.train_speech,
                      train_songs=args.train_songs,
                      train_noise=args.train_noise)
    out = Path(args.out)
    build_corpus(out, spec)
    _write_run_record(out, "synth", args.seed, spec.to_dict(), {})
    print(f"corpus written to {out} (manifest.json + WAVs)")
    return 0


def cmd_mix(args) -> int:
    from .datagen.corpus import CorpusSpec, build_corpus
    from .datagen.manifest import load_manifest
    from .datagen.mixer import TestSetConfig, build_test_set, mix_dataset

    overrides = _load_config_file(args.config)
    out = Path(args.out)
    out.mkdir(parents=True, exist_ok=True)
    if args.synthetic:
        # one-stop mode: build the source corpus right next to the mixtures
        manifest = build_corpus(out / "corpus", CorpusSpec(seed=args.seed))
        manifest_path = out / "corpus" / "manifest.json"
    else:
        manifest = load_manifest(args.manifest)
        manifest_path = Path(args.manifest)
    hashes = {"manifest": _sha256_file(manifest_path)}

    if args.kind == "train":
        policy = _policy_from_args(args, overrides)
        dataset = mix_dataset(manifest.split(args.split), policy,
                              args.samples, out)
        _write_run_record(out, "mix", args.seed, policy.to_dict(), hashes)
        counts = dataset["class_counts"]
        print(f"{args.samples} chunks written to {out} "
              f"(speech {counts['speech']}, singing {counts['singing']})")
    else:
        fields = dict(overrides.get("test_set", {}))
        fields["n_samples"] = args.samples
        fields["seed"] = args.seed
        if args.speech_prob is not None:
            fields["speech_prob"] = args.speech_prob
        cfg = TestSetConfig(**fields)
        dataset = build_test_set(manifest.split(args.split), cfg, out)
        _write_run_record(out, "mix", args.seed, cfg.to_dict(), hashes)
        stats = dataset["frame_stats"]
        print(f"{args.samples} scenes written to {out} "
              f"(speech {stats['speech_fraction']:.1%}, "
              f"singing {stats['singing_fraction']:.1%}, "
              f"both {stats['both_fraction']:.1%} of frames)")
    return 0


def _pairs_from_dataset(dataset_dir: Path, feature_config: FeatureConfig):
    from .datagen.mixer import binary_from_spans

    with open(dataset_dir / "dataset.json") as f:
        dataset = json.load(f)
    pairs = []
    for sample_id in dataset["sample_ids"]:
        with open(dataset_dir / f"{sample_id}.json") as f:
            sidecar = json.load(f)
        audio = read_wav(dataset_dir / f"{sample_id}.wav")
        mel = logmel(audio, feature_config)
        labels = binary_from_spans(sidecar["speech_label_spans"],
                                   sidecar["n_frames"])
        if mel.n_frames != labels.size:
            raise ManifestInconsistent(
                f"{sample_id}: {mel.n_frames} feature frames vs "
                f"{labels.size} labeled frames")
        pairs.append((mel, labels))
    return pairs


def _train_config(args, overrides: dict):
    from .trainer import TrainConfig

    fields = dict(overrides.get("train", {}))
    for name, attr in (("max_epochs", "epochs"), ("batch_size", "batch_size"),
                       ("epoch_train_pairs", "train_pairs"),
                       ("epoch_val_pairs", "val_pairs"),
                       ("initial_lr", "lr")):
        value = getattr(args, attr, None)
        if value is not None:
            fields[name] = value
    fields["seed"] = args.seed
    return TrainConfig(**fields)


def cmd_train(args) -> int:
    from .datagen.manifest import load_manifest
    from .datagen.mixer import MixturePairStream
    from .model.weights import save_weights
    from .trainer import FixedPairStream, fit

    overrides = _load_config_file(args.config)
    cfg = _train_config(args, overrides)
    model_config = _model_config(args)
    feature_config = FeatureConfig(n_mels=args.c)
    out = Path(args.out)
    out.mkdir(parents=True, exist_ok=True)
    hashes = {}

    if args.dataset:
        dataset_dir = Path(args.dataset)
        pairs = _pairs_from_dataset(dataset_dir, feature_config)
        val_pairs = None
        if args.val_dataset:
            val_pairs = _pairs_from_dataset(Path(args.val_dataset),
                                            feature_config)
            hashes["val_dataset"] = _sha256_file(
                Path(args.val_dataset) / "dataset.json")
        stream = FixedPairStream(pairs, val_pairs)
        hashes["dataset"] = _sha256_file(dataset_dir / "dataset.json")
        policy_dict = None
    elif args.manifest:
        manifest = load_manifest(args.manifest)
        policy = _policy_from_args(args, overrides)
        stream = MixturePairStream(manifest.split(args.train_split),
                                   manifest.split(args.val_split),
                                   policy, feature_config)
        hashes["manifest"] = _sha256_file(args.manifest)
        policy_dict = policy.to_dict()
    else:
        raise InvalidConfig("train needs --dataset or --manifest")

    log_path = out / "train_log.ndjson"
    with open(log_path, "w") as log_f:
        def on_epoch(record):
            line = record.to_dict()
            validate_record("train_log_line", line)
            log_f.write(json.dumps(line, sort_keys=True) + "\n")
            log_f.flush()
            if not args.quiet:
                print(f"epoch {record.epoch:4d}  train {record.train_loss:.4f}"
                      f"  val {record.val_loss:.4f}  lr {record.lr:.2e}"
                      f"{'  *' if record.improved else ''}")

        result = fit(model_config, stream, cfg,
                     feature_config=feature_config, on_epoch=on_epoch)

    save_weights(result.store, out / "weights.bin")
    _write_run_record(out, "train", args.seed,
                      {"model": model_config.to_dict(),
                       "train": cfg.to_dict(),
                       "features": feature_config.to_dict(),
                       "policy": policy_dict},
                      hashes)
    print(f"best epoch {result.best_epoch} "
          f"(val loss {result.best_val_loss:.4f}); weights in {out}")
    return 0


def cmd_infer(args) -> int:
    from .inference import (ChunkPlan, decide, score_file, write_decisions,
                            write_scores)
    from .model.weights import load_weights

    store = load_weights(args.weights)
    feature_config = FeatureConfig(n_mels=store.config.srsad.c)
    if store.feature_hash != feature_config.content_hash():
        raise IncompatibleWeights(
            "weights were trained with a different feature configuration")
    plan = ChunkPlan(chunk_len_s=args.chunk_len_s)
    period = feature_config.stft.frame_period_s

    if args.audio:
        audio = read_wav(args.audio)
        scores = score_file(audio, store, plan, feature_config)
        out = Path(args.out)
        write_scores(out, scores, period)
        if args.decisions:
            decisions = decide(scores, args.threshold,
                               min_gap_fill_s=args.gap_fill_s,
                               frame_period_s=period)
            write_decisions(out.with_suffix(out.suffix + ".decisions.json"),
                            decisions, args.threshold, period)
        print(f"{scores.size} frame scores -> {out}")
        return 0

    dataset_dir = Path(args.dataset)
    with open(dataset_dir / "dataset.json") as f:
        dataset = json.load(f)
    out = Path(args.out)
    out.mkdir(parents=True, exist_ok=True)
    for sample_id in dataset["sample_ids"]:
        audio = read_wav(dataset_dir / f"{sample_id}.wav")
        scores = score_file(audio, store, plan, feature_config)
        write_scores(out / f"{sample_id}.scores", scores, period)
        if args.decisions:
            decisions = decide(scores, args.threshold,
                               min_gap_fill_s=args.gap_fill_s,
                               frame_period_s=period)
            write_decisions(out / f"{sample_id}.decisions.json", decisions,
                            args.threshold, period)
    _write_run_record(out, "infer", args.seed,
                      {"chunk_len_s": plan.chunk_len_s,
                       "threshold": args.threshold},
                      {"weights": _sha256_file(args.weights),
                       "dataset": _sha256_file(dataset_dir / "dataset.json")})
    print(f"scored {len(dataset['sample_ids'])} samples -> {out}")
    return 0


def cmd_eval(args) -> int:
    from .metrics import evaluation_report, load_dataset_frames

    records, songs = load_dataset_frames(args.dataset, args.scores)
    report = evaluation_report(records, songs if args.per_song else None,
                               threshold=args.threshold)
    validate_record("metrics_report", report)

    if args.format == "table":
        counts = report["counts"]
        print(f"frames {counts['frames']}  positives {counts['positives']}  "
              f"singing-only {counts['singing_only']}")
        print(f"AUC                {report['auc']:.4f}")
        print(f"AUC (sing reject)  {report['auc_singing_rejection']:.4f}")
        acc = report.get("per_song_accuracy")
        if acc:
            for genre, stats in acc["per_genre"].items():
                print(f"ACC {genre:<10} {stats['mean']:.3f} "
                      f"+/- {stats['std']:.3f} ({stats['n_songs']} songs)")
            overall = acc["overall"]
            print(f"ACC overall    {overall['mean']:.3f} "
                  f"+/- {overall['std']:.3f} ({overall['n_songs']} songs)")
    elif args.format == "csv":
        print("metric,value")
        print(f"auc,{report['auc']}")
        print(f"auc_singing_rejection,{report['auc_singing_rejection']}")
        for key, value in sorted(report["counts"].items()):
            print(f"count_{key},{value}")
        acc = report.get("per_song_accuracy")
        if acc:
            for genre, stats in sorted(acc["per_genre"].items()):
                print(f"acc_mean_{genre},{stats['mean']}")
                print(f"acc_std_{genre},{stats['std']}")
            print(f"acc_mean_overall,{acc['overall']['mean']}")
            print(f"acc_std_overall,{acc['overall']['std']}")
    else:
        print(json.dumps(report, indent=1, sort_keys=True))
    if args.out:
        _write_json(Path(args.out), report)
    return 0


def cmd_complexity(args) -> int:
    from .complexity import comparison_table, measure_rtf, profile
    from .model.network import init_weights
    from .model.weights import load_weights

    reports = []
    for model_name in (args.model,) if args.model else ("sr-sad", "sr-sad-lc"):
        ns = argparse.Namespace(model=model_name, c=args.c)
        config = _model_config(ns)
        report = profile(config, args.chunk_len_s)
        if args.rtf:
            store = load_weights(args.weights) if args.weights else \
                init_weights(config, args.seed)
            report.rtf = measure_rtf(store, args.chunk_len_s)
        reports.append(report)

    print(comparison_table(reports))
    if args.out:
        payload = [r.to_dict() for r in reports]
        for record in payload:
            validate_record("complexity_report", record)
        _write_json(Path(args.out), payload if len(payload) > 1 else payload[0])
    return 0


def _sweep_run(args, overrides, manifest, test_dir: Path, run_dir: Path,
               value: float, seed: int) -> dict:
    """Train, score the shared test set, evaluate. One sweep grid point."""
    from .datagen.mixer import MixturePairStream
    from .inference import ChunkPlan, score_file, write_scores
    from .metrics import evaluation_report, load_dataset_frames
    from .model.weights import save_weights
    from .trainer import fit

    run_dir.mkdir(parents=True, exist_ok=True)
    ns = argparse.Namespace(
        p_speech=value if args.variable == "p_speech" else None,
        chunk_len_s=value if args.variable == "chunk_len_s" else None,
        seed=seed)
    policy = _policy_from_args(ns, overrides)
    train_pairs = 100000 if args.full_scale else args.train_pairs
    train_args = argparse.Namespace(
        epochs=args.epochs, batch_size=args.batch_size,
        train_pairs=train_pairs, val_pairs=args.val_pairs, lr=None, seed=seed)
    cfg = _train_config(train_args, overrides)
    model_config = _model_config(args)
    feature_config = FeatureConfig(n_mels=args.c)
    stream = MixturePairStream(manifest.split("train"), manifest.split("val"),
                               policy, feature_config)
    result = fit(model_config, stream, cfg, feature_config=feature_config)
    save_weights(result.store, run_dir / "weights.bin")

    plan = ChunkPlan(chunk_len_s=value
                     if args.variable == "chunk_len_s" else 2.0)
    scores_dir = run_dir / "scores"
    scores_dir.mkdir(exist_ok=True)
    with open(test_dir / "dataset.json") as f:
        dataset = json.load(f)
    for sample_id in dataset["sample_ids"]:
        audio = read_wav(test_dir / f"{sample_id}.wav")
        scores = score_file(audio, result.store, plan, feature_config)
        write_scores(scores_dir / f"{sample_id}.scores", scores,
                     feature_config.stft.frame_period_s)
    records, songs = load_dataset_frames(test_dir, scores_dir)
    report = evaluation_report(records, songs)
    validate_record("metrics_report", report)
    _write_json(run_dir / "metrics.json", report)
    return report


def cmd_sweep(args) -> int:
    import csv

    from .datagen.manifest import load_manifest

    overrides = _load_config_file(args.config)
    values = [float(v) for v in args.values.split(",") if v]
    seeds = [int(s) for s in args.seeds.split(",") if s]
    if not values or not seeds:
        raise InvalidConfig("sweep needs at least one value and one seed")
    manifest = load_manifest(args.manifest)
    test_dir = Path(args.test_dataset)
    out = Path(args.out)
    out.mkdir(parents=True, exist_ok=True)

    rows = []
    failures = []
    for value in values:
        for seed in seeds:
            run_dir = out / f"{args.variable}_{value:g}" / f"seed_{seed}"
            metrics_path = run_dir / "metrics.json"
            if metrics_path.exists():
                with open(metrics_path) as f:
                    report = json.load(f)
                rows.append((value, seed, report))
                continue
            try:
                report = _sweep_run(args, overrides, manifest, test_dir,
                                    run_dir, value, seed)
            except Exception as exc:        # noqa: BLE001  keep sweeping
                failures.append({"variable": args.variable, "value": value,
                                 "seed": seed, "error": str(exc),
                                 "error_type": type(exc).__name__})
                print(f"{args.variable}={value:g} seed={seed} failed: {exc}",
                      file=sys.stderr)
                continue
            rows.append((value, seed, report))
            print(f"{args.variable}={value:g} seed={seed}: "
                  f"auc {report['auc']:.4f}  "
                  f"sing-reject {report['auc_singing_rejection']:.4f}")

    if failures:
        _write_json(out / "failures.json", failures)
    if not rows:
        print("error: every sweep run failed; see failures.json",
              file=sys.stderr)
        return 3

    csv_path = out / "sweep.csv"
    with open(csv_path, "w", newline="") as f:
        writer = csv.writer(f)
        writer.writerow([args.variable, "seed", "auc",
                         "auc_singing_rejection"])
        for value, seed, report in rows:
            writer.writerow([value, seed, report["auc"],
                             report["auc_singing_rejection"]])

    _plot_sweep(out, args.variable, rows)
    _write_run_record(out, "sweep", seeds[0],
                      {"variable": args.variable, "values": values,
                       "seeds": seeds},
                      {"manifest": _sha256_file(args.manifest),
                       "test_dataset": _sha256_file(
                           test_dir / "dataset.json")})
    print(f"sweep results in {csv_path}")
    return 0


def _plot_sweep(out: Path, variable: str, rows) -> None:
    import matplotlib
    matplotlib.use("Agg")
    matplotlib.rcParams["svg.hashsalt"] = "srsad"
    import matplotlib.pyplot as plt

    values = sorted({v for v, _, _ in rows})
    for metric, label in (("auc", "AUC"),
                          ("auc_singing_rejection", "singing-rejection AUC")):
        means = []
        stds = []
        for v in values:
            vals = [r[metric] for vv, _, r in rows if vv == v]
            means.append(float(np.mean(vals)))
            stds.append(float(np.std(vals)))
        plt.errorbar(values, means, yerr=stds, marker="o", capsize=3,
                     label=label)
    plt.xlabel(variable)
    plt.ylabel("area under curve")
    plt.ylim(0.0, 1.05)
    plt.grid(alpha=0.3)
    plt.legend()
    plt.tight_layout()
    plt.savefig(out / "sweep.svg", metadata={"Date": None})
    plt.close()


# ------------------------------------------------------------ parser

def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="srsad",
        description="singing-robust speech activity detection toolkit")
    parser.add_argument("--version", action="version",
                        version=f"srsad {__version__}")
    parser.add_argument("--strict-deterministic", action="store_true",
                        help="pin BLAS threads for byte-identical reruns")
    sub = parser.add_subparsers(dest="command", required=True)

    def common(p):
        p.add_argument("--seed", type=int, default=0)
        p.add_argument("--config", help="JSON file with config overrides")
        # accepted in either position; the re-exec looks at raw argv
        p.add_argument("--strict-deterministic", action="store_true",
                       default=argparse.SUPPRESS, help=argparse.SUPPRESS)

    p = sub.add_parser("synth", help="build a synthetic source corpus")
    common(p)
    p.add_argument("--out", required=True)
    p.add_argument("--train-speech", type=int, default=12)
    p.add_argument("--train-songs", type=int, default=8)
    p.add_argument("--train-noise", type=int, default=6)
    p.set_defaults(func=cmd_synth)

    p = sub.add_parser("mix", help="materialize a mixture dataset")
    common(p)
    p.add_argument("--manifest")
    p.add_argument("--synthetic", action="store_true",
                   help="build a default source corpus on the fly")
    p.add_argument("--out", required=True)
    p.add_argument("--samples", type=int, required=True)
    p.add_argument("--kind", choices=("train", "test"), default="train")
    p.add_argument("--split", default=None,
                   help="manifest split (default: train for --kind train, "
                        "test for --kind test)")
    p.add_argument("--p-speech", type=float, default=None)
    p.add_argument("--chunk-len-s", type=float, default=None)
    p.add_argument("--speech-prob", type=float, default=None,
                   help="test scenes: probability a scene contains speech")
    p.set_defaults(func=cmd_mix)

    p = sub.add_parser("train", help="train a detector")
    common(p)
    p.add_argument("--manifest")
    p.add_argument("--dataset", help="materialized chunk dataset directory")
    p.add_argument("--val-dataset")
    p.add_argument("--train-split", default="train")
    p.add_argument("--val-split", default="val")
    p.add_argument("--out", required=True)
    p.add_argument("--model", choices=("sr-sad", "sr-sad-lc"),
                   default="sr-sad")
    p.add_argument("--c", type=int, default=80, help="mel bands / model width")
    p.add_argument("--epochs", type=int, default=None)
    p.add_argument("--batch-size", type=int, default=None)
    p.add_argument("--train-pairs", type=int, default=None)
    p.add_argument("--val-pairs", type=int, default=None)
    p.add_argument("--lr", type=float, default=None)
    p.add_argument("--p-speech", type=float, default=None)
    p.add_argument("--chunk-len-s", type=float, default=None)
    p.add_argument("--quiet", action="store_true")
    p.set_defaults(func=cmd_train)

    p = sub.add_parser("infer", help="score audio with trained weights")
    common(p)
    p.add_argument("--weights", required=True)
    p.add_argument("--audio", help="single WAV file")
    p.add_argument("--dataset", help="dataset directory to score")
    p.add_argument("--out", required=True)
    p.add_argument("--chunk-len-s", type=float, default=2.0)
    p.add_argument("--threshold", type=float, default=0.5)
    p.add_argument("--decisions", action="store_true",
                   help="also write thresholded decision spans")
    p.add_argument("--gap-fill-s", type=float, default=None)
    p.set_defaults(func=cmd_infer)

    p = sub.add_parser("eval", help="metrics from scores + sidecars")
    common(p)
    p.add_argument("--dataset", required=True)
    p.add_argument("--scores", required=True)
    p.add_argument("--out")
    p.add_argument("--threshold", type=float, default=0.5)
    p.add_argument("--per-song", action="store_true")
    p.add_argument("--format", choices=("json", "csv", "table"),
                   default="json")
    p.set_defaults(func=cmd_eval)

    p = sub.add_parser("complexity", help="parameter/MAC counts and RTF")
    common(p)
    p.add_argument("--model", choices=("sr-sad", "sr-sad-lc"), default=None,
                   help="default: both")
    p.add_argument("--c", type=int, default=80)
    p.add_argument("--chunk-len-s", type=float, default=2.0)
    p.add_argument("--rtf", action="store_true")
    p.add_argument("--weights")
    p.add_argument("--out")
    p.set_defaults(func=cmd_complexity)

    p = sub.add_parser("sweep", help="train/eval a variable grid")
    common(p)
    p.add_argument("--variable", choices=("p_speech", "chunk_len_s"),
                   required=True)
    p.add_argument("--values", required=True, help="comma-separated")
    p.add_argument("--seeds", required=True, help="comma-separated")
    p.add_argument("--manifest", required=True)
    p.add_argument("--test-dataset", required=True)
    p.add_argument("--out", required=True)
    p.add_argument("--model", choices=("sr-sad", "sr-sad-lc"),
                   default="sr-sad")
    p.add_argument("--c", type=int, default=16)
    p.add_argument("--epochs", type=int, default=12)
    p.add_argument("--batch-size", type=int, default=16)
    p.add_argument("--train-pairs", type=int, default=256)
    p.add_argument("--val-pairs", type=int, default=32)
    p.add_argument("--full-scale", action="store_true",
                   help="100,000 training pairs per epoch instead of the "
                        "desk-scale default")
    p.set_defaults(func=cmd_sweep)
    return parser


def _reexec_strict(argv) -> None:
    env = dict(os.environ)
    for var in _THREAD_VARS:
        env[var] = "1"
    env[_STRICT_ENV] = "1"
    os.execve(sys.executable,
              [sys.executable, "-m", "srsad.cli", *argv], env)


def main(argv=None) -> int:
    argv = list(sys.argv[1:] if argv is None else argv)
    if "--strict-deterministic" in argv and _STRICT_ENV not in os.environ:
        _reexec_strict(argv)

    parser = build_parser()
    args = parser.parse_args(argv)
    if args.command == "mix":
        if args.split is None:
            args.split = "test" if args.kind == "test" else "train"
        if bool(args.manifest) == bool(args.synthetic):
            parser.error("mix needs exactly one of --manifest or --synthetic")
    if args.command == "infer" and bool(args.audio) == bool(args.dataset):
        parser.error("infer needs exactly one of --audio or --dataset")
    try:
        return args.func(args)
    except _USAGE_ERRORS as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2
    except (*_DATA_ERRORS, OSError, json.JSONDecodeError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 3
    except TrainingDiverged as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 4
    except Exception:                    # noqa: BLE001  internal failure
        traceback.print_exc()
        return 5


if __name__ == "__main__":
    sys.exit(main())
