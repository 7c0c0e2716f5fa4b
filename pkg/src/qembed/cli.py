"""Command-line surface: train, eval, predict, benchmark, gradcheck, synth,
dump-circuit.

Exit status: 0 on success, 1 on validation or tolerance failure (bad data
files, failed gradient check, missed --min-f1), 2 on usage errors.
"""
from __future__ import annotations

import argparse
import json
import sys

import numpy as np

from .benchmark import run_benchmark
from .checkpoint import load_checkpoint, save_checkpoint
from .circuits import build_real_amplitudes, build_z_feature_map, serialize_gates
from .config import (
    apply_overrides,
    default_config,
    model_from_config,
    parse_config_file,
    specs_from,
    training_config_from,
)
from .data import generate_synthetic, load_embeddings, write_embeddings
from .gradcheck import draw_samples, format_report, gradient_check
from .metrics import format_comparison_table
from .model import model_forward
from .training import decide_label, evaluate, train


def _load_config(args) -> dict:
    config = parse_config_file(args.config) if args.config else default_config()
    return apply_overrides(config, args.set or [])


def _cmd_synth(args) -> int:
    records = generate_synthetic(args.n, args.d, args.sep, args.seed)
    write_embeddings(args.out, records)
    print(f"wrote {len(records)} records of dimension {args.d} to {args.out}")
    return 0


def _cmd_train(args) -> int:
    config = _load_config(args)
    if args.seed is not None:
        config["train.seed"] = args.seed
    if args.freeze_encoder:
        config["train.freeze_encoder"] = True
    if not config["model.bypass_encoder"]:
        raise ValueError(
            "CLI training consumes embedding CSVs; set model.bypass_encoder = true "
            "(encoder models are trained through the library API)"
        )
    dataset = load_embeddings(args.data)
    model = model_from_config(config, seed=config["train.seed"], in_dim=len(dataset[0].features))
    train_config = training_config_from(config)
    model, history = train(dataset, model, train_config)
    save_checkpoint(args.out, model)
    history.write_csv(args.history)
    best = history.records[history.best_epoch]
    print(
        f"trained {len(history.records)} epoch(s); best epoch {best.epoch}: "
        f"val_loss={best.val_loss:.6f} val_f1={best.val_f1:.4f}"
    )
    print(f"checkpoint: {args.out}")
    print(f"history: {args.history}")
    return 0


def _cmd_eval(args) -> int:
    model = load_checkpoint(args.checkpoint)
    dataset = load_embeddings(args.data)
    report = evaluate(model, dataset)
    print(json.dumps(report.to_dict(), indent=2))
    if args.min_f1 is not None and report.f1 < args.min_f1:
        print(f"F1 {report.f1:.4f} below required {args.min_f1}", file=sys.stderr)
        return 1
    return 0


def _cmd_predict(args) -> int:
    model = load_checkpoint(args.checkpoint)
    dataset = load_embeddings(args.data)
    lines = ["id,label,p0,p1"]
    for rec in dataset:
        cache = model_forward(model, rec.features)
        lines.append(f"{rec.id},{decide_label(cache.p0)},{cache.p0!r},{cache.p1!r}")
    text = "\n".join(lines) + "\n"
    if args.out:
        with open(args.out, "w", encoding="utf-8", newline="\n") as fh:
            fh.write(text)
        print(f"wrote {len(dataset)} prediction(s) to {args.out}")
    else:
        sys.stdout.write(text)
    return 0


def _parse_seeds(args) -> list[int]:
    if args.seeds:
        return [int(s) for s in args.seeds.split(",") if s.strip()]
    return list(range(args.n_seeds))


def _cmd_benchmark(args) -> int:
    config = _load_config(args)
    if not config["model.bypass_encoder"]:
        raise ValueError("benchmark runs on embedding CSVs or synthetic vectors only")
    seeds = _parse_seeds(args)
    if args.data:
        fixed = load_embeddings(args.data)
        make_dataset = lambda seed: fixed  # noqa: E731 - data fixed, seed drives init/shuffle
        dim = len(fixed[0].features)
    else:
        make_dataset = lambda seed: generate_synthetic(  # noqa: E731
            args.synth_n, args.synth_d, args.synth_sep, seed
        )
        dim = args.synth_d
    make_model = lambda seed: model_from_config(config, seed=seed, in_dim=dim)  # noqa: E731
    summary = run_benchmark(
        make_dataset,
        make_model,
        training_config_from(config),
        seeds,
        method=args.method,
        history_dir=args.history_dir,
    )
    rows = [(summary.method, summary.sd_f1, summary.median_f1)]
    for extra in args.row or []:
        parts = extra.split(",")
        if len(parts) != 3:
            raise ValueError(f"--row expects 'Label,sd,median', got {extra!r}")
        rows.append((parts[0], float(parts[1]), float(parts[2])))
    print(json.dumps(summary.to_dict(), indent=2))
    print()
    print(format_comparison_table(rows))
    return 0


def _cmd_gradcheck(args) -> int:
    config = _load_config(args)
    model = model_from_config(config, seed=args.seed)
    rng = np.random.default_rng(args.seed)
    image_shape = None
    if not config["model.bypass_encoder"]:
        image_shape = (
            config["encoder.image_h"],
            config["encoder.image_w"],
            config["encoder.channels"],
        )
    samples = draw_samples(model, args.samples, rng, image_shape=image_shape)
    ok, groups = gradient_check(
        model, samples, h=args.h, abs_tol=args.abs_tol, rel_tol=args.rel_tol
    )
    print(format_report(groups))
    if not ok:
        print("gradient check FAILED", file=sys.stderr)
        return 1
    print("gradient check passed")
    return 0


def _cmd_dump_circuit(args) -> int:
    config = _load_config(args)
    fm, an = specs_from(config)
    features = [float(v) for v in args.features.split(",") if v.strip()]
    if args.theta:
        theta = [float(v) for v in args.theta.split(",") if v.strip()]
    else:
        theta = [0.0] * an.parameter_count()
    gates = build_z_feature_map(features, fm) + build_real_amplitudes(theta, an)
    print(serialize_gates(gates))
    return 0


def _add_config_flags(sub) -> None:
    sub.add_argument("--config", help="flat key = value config file")
    sub.add_argument(
        "--set",
        action="append",
        metavar="KEY=VALUE",
        help="override a config key (repeatable)",
    )


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="qembed",
        description="Hybrid quantum-classical binary classifier toolkit",
    )
    sub = parser.add_subparsers(dest="command", metavar="COMMAND")

    p = sub.add_parser("synth", help="write a synthetic two-cluster embedding CSV")
    p.add_argument("--n", type=int, required=True, help="number of samples")
    p.add_argument("--d", type=int, required=True, help="feature dimension")
    p.add_argument("--sep", type=float, default=6.0, help="cluster mean separation")
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--out", required=True, help="output CSV path")
    p.set_defaults(func=_cmd_synth)

    p = sub.add_parser("train", help="train on an embedding CSV")
    p.add_argument("--data", required=True, help="embedding CSV")
    _add_config_flags(p)
    p.add_argument("--seed", type=int, help="override train.seed")
    p.add_argument("--freeze-encoder", action="store_true")
    p.add_argument("--out", default="model.ckpt", help="checkpoint path")
    p.add_argument("--history", default="history.csv", help="history CSV path")
    p.set_defaults(func=_cmd_train)

    p = sub.add_parser("eval", help="evaluate a checkpoint on a dataset")
    p.add_argument("--data", required=True)
    p.add_argument("--checkpoint", required=True)
    p.add_argument("--min-f1", type=float, help="exit 1 when F1 falls below this")
    p.set_defaults(func=_cmd_eval)

    p = sub.add_parser("predict", help="per-record label and probabilities")
    p.add_argument("--data", required=True)
    p.add_argument("--checkpoint", required=True)
    p.add_argument("--out", help="write CSV here instead of stdout")
    p.set_defaults(func=_cmd_predict)

    p = sub.add_parser("benchmark", help="multi-seed sweep with median-F1/SD summary")
    p.add_argument("--data", help="fixed embedding CSV (else synthetic per seed)")
    p.add_argument("--synth-n", type=int, default=200)
    p.add_argument("--synth-d", type=int, default=16)
    p.add_argument("--synth-sep", type=float, default=6.0)
    _add_config_flags(p)
    p.add_argument("--seeds", help="comma-separated seed list")
    p.add_argument("--n-seeds", type=int, default=10, help="use seeds 0..n-1")
    p.add_argument("--method", default="Transformer-based", help="label for the table row")
    p.add_argument(
        "--row",
        action="append",
        metavar="LABEL,SD,MEDIAN",
        help="extra externally supplied comparison row (repeatable)",
    )
    p.add_argument("--history-dir", help="write per-seed history CSVs here")
    p.set_defaults(func=_cmd_benchmark)

    p = sub.add_parser("gradcheck", help="finite-difference audit of all gradients")
    _add_config_flags(p)
    p.add_argument("--seed", type=int, default=7)
    p.add_argument("--samples", type=int, default=3)
    p.add_argument("--h", type=float, default=1e-5)
    p.add_argument("--abs-tol", type=float, default=1e-6)
    p.add_argument("--rel-tol", type=float, default=1e-4)
    p.set_defaults(func=_cmd_gradcheck)

    p = sub.add_parser("dump-circuit", help="print the gate list as plain text")
    p.add_argument("--features", required=True, help="comma-separated feature values")
    p.add_argument("--theta", help="comma-separated ansatz angles (default zeros)")
    _add_config_flags(p)
    p.set_defaults(func=_cmd_dump_circuit)

    return parser


def main(argv=None) -> int:
    parser = build_parser()
    if argv is None:
        argv = sys.argv[1:]
    if not argv:
        parser.print_usage(sys.stderr)
        return 2
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return 0 if exc.code in (0, None) else int(exc.code)
    if not getattr(args, "command", None):
        parser.print_usage(sys.stderr)
        return 2
    try:
        return args.func(args)
    except (ValueError, KeyError, OSError, RuntimeError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1


cli_main = main


def console_main() -> None:
    sys.exit(main())
