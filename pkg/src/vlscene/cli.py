"""Command-line surface.

Subcommands:
    gen-scenes   write a synthetic dataset directory
    reason       run the reasoner on one scene bundle
    evaluate     run every scene of a dataset and write a report
    train-toy    pretrain the toy encoders on raw pairs derived from a dataset
    report       render a report JSON as a parameter/value table

Exit codes: 0 success, 1 usage error, 2 data error. Diagnostics go to
stderr as a single line.
"""

import argparse
import json
import sys
from pathlib import Path

import numpy as np

from . import datasetio, scenegen, vleb
from .encoders import init_params
from .errors import ConfigInvalidError, VlsceneError
from .evaluate import ABLATION_MODES, evaluate_with_ablation
from .metrics import Report
from .reasoner import ReasonConfig, reason_scene
from .training import TrainConfig, train_toy

_RUN_CONFIG_KEYS = {"tau", "alpha", "beta", "k", "threshold", "fusion_mode", "context", "seed"}


class _UsageError(Exception):
    pass


class _Parser(argparse.ArgumentParser):
    # argparse exits 2 on bad usage; the contract here is exit 1.
    def error(self, message):
        raise _UsageError(message)


def load_run_config(path) -> tuple[ReasonConfig, int]:
    """Parse a run-config JSON file into (ReasonConfig, seed).

    All keys are optional; unknown keys are rejected. "context" is the
    string "on" or "off".
    """
    raw = json.loads(Path(path).read_text(encoding="utf-8"))
    if not isinstance(raw, dict):
        raise ConfigInvalidError("run config must be a JSON object")
    unknown = set(raw) - _RUN_CONFIG_KEYS
    if unknown:
        raise ConfigInvalidError(f"unknown run config keys: {sorted(unknown)}")
    kwargs = {}
    for key in ("tau", "alpha", "beta", "threshold"):
        if key in raw:
            kwargs[key] = float(raw[key])
    if "k" in raw:
        kwargs["k"] = int(raw["k"])
    if "fusion_mode" in raw:
        kwargs["fusion_mode"] = raw["fusion_mode"]
    if "context" in raw:
        if raw["context"] not in ("on", "off"):
            raise ConfigInvalidError(f'context must be "on" or "off", got {raw["context"]!r}')
        kwargs["context"] = raw["context"] == "on"
    seed = int(raw.get("seed", 0))
    return ReasonConfig(**kwargs).validate(), seed


def _write_json(path, payload: dict) -> None:
    Path(path).write_text(json.dumps(payload, indent=2) + "\n", encoding="utf-8")


def _cmd_gen_scenes(args) -> int:
    cfg = scenegen.GenConfig(
        classes=args.classes,
        dim=args.dim,
        scenes=args.scenes,
        objects_per_scene=args.objects,
        clutter=args.clutter,
        noise=args.noise,
        novel_fraction=args.novel_fraction,
        seed=args.seed,
    )
    ds = scenegen.gen_dataset(cfg)
    datasetio.save_dataset(ds, args.out)
    print(f"wrote {len(ds.scenes)} scenes ({cfg.classes} classes, dim {cfg.dim}) to {args.out}")
    return 0


def _cmd_reason(args) -> int:
    rows, meta = vleb.read_bundle(args.scene)
    scene = datasetio.scene_from_bundle(rows, meta, fallback_id=Path(args.scene).stem)
    p_rows, p_meta = vleb.read_bundle(args.prompts)
    prompts = datasetio.prompt_set_from_bundle(p_rows, p_meta)
    cfg = ReasonConfig()
    if args.config:
        cfg, _ = load_run_config(args.config)
    result = reason_scene(scene, prompts, cfg)
    _write_json(args.out, result.to_json_dict())
    print(f"{scene.scene_id}: {result.predicted_label} (ambiguity {result.ambiguity:.3f})")
    return 0


def _cmd_evaluate(args) -> int:
    ds = datasetio.load_dataset(args.dataset)
    cfg = ReasonConfig()
    if args.config:
        cfg, _ = load_run_config(args.config)
    outcome = evaluate_with_ablation(ds, cfg, ablate=args.ablate, workers=args.workers)
    _write_json(args.out, outcome.report.to_json_dict())
    gain = outcome.report.gen_gain_points
    gain_txt = f", gain {gain:+.2f} pts" if gain is not None else ""
    print(f"evaluated {outcome.report.n_records} scenes: top1 {outcome.report.top1:.3f}{gain_txt}")
    return 0


def _cmd_train_toy(args) -> int:
    ds_dir = Path(args.dataset)
    manifest = json.loads((ds_dir / "manifest.json").read_text(encoding="utf-8"))
    gen_cfg = manifest["config"]
    n_train_classes = len(manifest["classes"]) - len(manifest.get("novel_classes", []))
    batches = scenegen.gen_training_batches(
        n_classes=n_train_classes,
        feature_dim=args.feat_dim,
        vocab=args.vocab,
        n_batches=args.batches,
        noise=gen_cfg.get("noise", 0.1),
        seed=gen_cfg["seed"],
    )
    params = init_params(args.feat_dim, gen_cfg["dim"], args.vocab, args.seed)
    trained, trace = train_toy(params, batches, TrainConfig(
        steps=args.steps, lr=args.lr, tau=args.tau, seed=args.seed,
    ))
    sections = [
        ("w_vision", trained.w_vision),
        ("token_table", trained.token_table),
        ("w_text", trained.w_text),
    ]
    vleb.write_bundle(
        np.vstack([m for _, m in sections]),
        {
            "kind": "prototype",
            "extra": {
                "content": "toy-encoder-params",
                "sections": [[name, int(m.shape[0])] for name, m in sections],
                "seed": args.seed,
            },
        },
        args.out,
    )
    with open(args.trace, "w", encoding="utf-8") as fh:
        fh.write("step,loss\n")
        for step, loss in enumerate(trace):
            fh.write(f"{step},{loss!r}\n")
    first = trace[0] if trace else float("nan")
    last = trace[-1] if trace else float("nan")
    print(f"trained {args.steps} steps: loss {first:.4f} -> {last:.4f}")
    return 0


def _cmd_report(args) -> int:
    report = Report.from_json_dict(json.loads(Path(args.infile).read_text(encoding="utf-8")))
    rows = report.rows()
    if args.format == "csv":
        print("parameter,value")
        for name, value in rows:
            print(f"{name},{'' if value is None else value}")
    else:
        width = max(len(name) for name, _ in rows)
        print(f"| {'parameter'.ljust(width)} | value |")
        print(f"| {'-' * width} | ----- |")
        for name, value in rows:
            shown = "n/a" if value is None else value
            print(f"| {name.ljust(width)} | {shown} |")
    return 0


def build_parser() -> _Parser:
    parser = _Parser(prog="vlscene", description="Zero-shot scene reasoning toolkit")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("gen-scenes", help="generate a synthetic dataset directory")
    p.add_argument("--classes", type=int, default=8)
    p.add_argument("--dim", type=int, default=32)
    p.add_argument("--scenes", type=int, default=200)
    p.add_argument("--objects", type=int, default=6)
    p.add_argument("--clutter", type=float, default=0.3)
    p.add_argument("--noise", type=float, default=0.1)
    p.add_argument("--novel-fraction", type=float, default=0.1)
    p.add_argument("--seed", type=int, default=42)
    p.add_argument("--out", required=True)
    p.set_defaults(func=_cmd_gen_scenes)

    p = sub.add_parser("reason", help="reason over one scene bundle")
    p.add_argument("--scene", required=True)
    p.add_argument("--prompts", required=True)
    p.add_argument("--config")
    p.add_argument("--out", required=True)
    p.set_defaults(func=_cmd_reason)

    p = sub.add_parser("evaluate", help="evaluate a dataset and write a report")
    p.add_argument("--dataset", required=True)
    p.add_argument("--config")
    p.add_argument("--ablate", choices=ABLATION_MODES, default="none")
    p.add_argument("--workers", type=int, default=1)
    p.add_argument("--out", required=True)
    p.set_defaults(func=_cmd_evaluate)

    p = sub.add_parser("train-toy", help="pretrain toy encoders on dataset-derived raw pairs")
    p.add_argument("--dataset", required=True)
    p.add_argument("--steps", type=int, default=200)
    p.add_argument("--lr", type=float, default=0.05)
    p.add_argument("--tau", type=float, default=0.07)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--feat-dim", type=int, default=16)
    p.add_argument("--vocab", type=int, default=64)
    p.add_argument("--batches", type=int, default=16)
    p.add_argument("--out", required=True)
    p.add_argument("--trace", required=True)
    p.set_defaults(func=_cmd_train_toy)

    p = sub.add_parser("report", help="render a report JSON as a table")
    p.add_argument("--in", dest="infile", required=True)
    p.add_argument("--format", choices=("md", "csv"), default="md")
    p.set_defaults(func=_cmd_report)

    return parser


def main(argv=None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except _UsageError as exc:
        print(f"usage error: {exc}", file=sys.stderr)
        return 1
    try:
        return args.func(args)
    except (VlsceneError, OSError, json.JSONDecodeError, KeyError, ValueError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2


def console_main() -> None:
    sys.exit(main())


if __name__ == "__main__":
    sys.exit(main())
