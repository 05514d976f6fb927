"""Command-line interface for the color-enhancement engine.

Subcommands:
    distort   synthesize distorted/reference training pairs from a folder of
              reference photos
    train     run Q-learning on a pair folder and write a checkpoint
    enhance   apply a trained checkpoint to one image
    eval      score a checkpoint against a pair folder (L2 before/after, SSIM)
    bench     time the compiled kernels against the numpy fallbacks

Every command is deterministic given its --seed.  Config precedence for
training is CLI flag > config file > built-in default.
"""

import argparse
import concurrent.futures
import csv
import sys
from pathlib import Path

import numpy as np

from . import agent, bench, color, env, features, imgio, metrics, nn, train
from .distort import OP_POOLS, SynthesisError, TrainingPair, synthesize_pair

# Odd golden-ratio multiplier used to derive distinct per-variant seeds when
# --per-ref asks for several pairs from one reference.
_VARIANT_MIX = 0x9E3779B97F4A7C15
_SEED_MASK = 0xFFFFFFFFFFFFFFFF


def _pair_seed(seed: int, index: int, variant: int) -> int:
    base = (seed ^ index) & _SEED_MASK
    if variant:
        base ^= (_VARIANT_MIX * variant) & _SEED_MASK
    return base


def _distort_one(task):
    """Worker: synthesize and persist one pair; returns a manifest row or an
    error marker."""
    ref_path, stem, pair_seed, d_min, d_max, pool_name, out_dir = task
    try:
        reference = imgio.read_image(ref_path)
    except (OSError, ValueError) as exc:
        return ("unreadable", stem, str(exc))
    try:
        pair = synthesize_pair(
            reference,
            pair_seed,
            d_min=d_min,
            d_max=d_max,
            op_pool=OP_POOLS[pool_name],
            name=stem,
        )
    except SynthesisError as exc:
        return ("failed", stem, str(exc))
    out = Path(out_dir)
    imgio.write_image(out / f"{stem}.dist.png", pair.distorted)
    imgio.write_image(out / f"{stem}.ref.png", pair.reference)
    return ("ok", stem, pair.achieved_distance, len(pair.op_log), pair_seed)


def cmd_distort(args) -> int:
    refs = imgio.list_images(args.refs)
    if not refs:
        print(f"error: no images found in {args.refs}", file=sys.stderr)
        return 1
    out_dir = Path(args.out)
    out_dir.mkdir(parents=True, exist_ok=True)

    tasks = []
    for index, ref_path in enumerate(refs):
        for k in range(args.per_ref):
            stem = ref_path.stem if args.per_ref == 1 else f"{ref_path.stem}_v{k}"
            seed = _pair_seed(args.seed, index, k)
            tasks.append((str(ref_path), stem, seed, args.min_d, args.max_d, args.pool, str(out_dir)))

    if args.jobs > 1:
        with concurrent.futures.ProcessPoolExecutor(max_workers=args.jobs) as pool:
            results = list(pool.map(_distort_one, tasks))
    else:
        results = [_distort_one(t) for t in tasks]

    rows, failures = [], []
    for res in results:
        if res[0] == "ok":
            rows.append(res[1:])
        elif res[0] == "unreadable":
            print(f"warning: skipping {res[1]}: {res[2]}", file=sys.stderr)
        else:
            failures.append((res[1], res[2]))

    with open(out_dir / "manifest.csv", "w", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow(["stem", "achieved_distance", "op_count", "seed"])
        for stem, dist, ops, seed in rows:
            writer.writerow([stem, f"{dist:.6f}", ops, seed])

    print(f"wrote {len(rows)} pairs to {out_dir}")
    if failures:
        print("synthesis failures:", file=sys.stderr)
        for stem, msg in failures:
            print(f"  {stem}: {msg}", file=sys.stderr)
        return 1
    return 0


def load_pairs(pairs_dir) -> list[TrainingPair]:
    """Read a pair folder written by ``distort`` back into memory."""
    pairs_dir = Path(pairs_dir)
    manifest = pairs_dir / "manifest.csv"
    if not manifest.exists():
        raise ValueError(f"no manifest.csv in {pairs_dir}")
    pairs = []
    with open(manifest, newline="") as fh:
        for row in csv.DictReader(fh):
            stem = row["stem"]
            distorted = imgio.read_image(pairs_dir / f"{stem}.dist.png")
            reference = imgio.read_image(pairs_dir / f"{stem}.ref.png")
            achieved = color.mean_lab_distance(distorted, reference)
            pairs.append(TrainingPair(distorted, reference, achieved, (), stem))
    if not pairs:
        raise ValueError(f"manifest in {pairs_dir} lists no pairs")
    return pairs


def _load_contexts(pairs: list[TrainingPair], features_dir) -> dict:
    features_dir = Path(features_dir)
    missing = [p.stem for p in pairs if not (features_dir / f"{p.stem}.ctxf").exists()]
    if missing:
        raise ValueError(f"missing context features for stems: {', '.join(sorted(missing))}")
    return {
        p.stem: features.load_context_feature(features_dir / f"{p.stem}.ctxf") for p in pairs
    }


def cmd_train(args) -> int:
    overrides: dict = {}
    if args.config:
        overrides.update(train.parse_config_file(args.config))
    if args.desk and "hidden_dims" not in overrides:
        overrides["hidden_dims"] = nn.DESK_HIDDEN_DIMS
    if args.steps is not None:
        overrides["steps"] = args.steps
    if args.seed is not None:
        overrides["seed"] = args.seed
    cfg = train.TrainConfig(**overrides)

    pairs = load_pairs(args.pairs)
    contexts = None
    if args.context == "file":
        if not args.features_dir:
            raise ValueError("--features-dir is required with --context file")
        contexts = _load_contexts(pairs, args.features_dir)

    resume = nn.load_checkpoint(args.resume) if args.resume else None
    log_path = Path(args.log) if args.log else Path(args.out).with_suffix(".log.csv")
    progress = None
    if args.verbose:
        def progress(row):
            step, loss, eps, lr, ret = row
            print(
                f"step {step:>8}  loss {loss:.5f}  eps {eps:.3f}  lr {lr:.2e}  "
                f"return {ret:.3f}"
            )

    result = train.run_training(
        pairs,
        cfg,
        contexts=contexts,
        log_path=log_path,
        checkpoint_path=args.out,
        resume=resume,
        progress=progress,
    )
    print(
        f"trained {cfg.steps} steps on {len(pairs)} pairs; "
        f"checkpoint {args.out}, log {log_path}"
    )
    return 0 if result is not None else 1


def cmd_enhance(args) -> int:
    net, _ = nn.load_checkpoint(args.checkpoint)
    img = imgio.read_image(args.input)
    context = "tiny"
    if args.feature:
        context = features.load_context_feature(args.feature)
    enhanced, trace = agent.enhance(net, img, context=context, max_steps=args.max_steps)
    imgio.write_image(args.output, enhanced)
    if args.trace:
        Path(args.trace).write_text(env.trace_to_json(trace))
    print(f"wrote {args.output} after {len(trace)} edits")
    return 0


_EVAL_STATE: dict = {}


def _eval_init(checkpoint, pairs_dir, max_steps):
    net, _ = nn.load_checkpoint(checkpoint)
    _EVAL_STATE.update(net=net, pairs_dir=Path(pairs_dir), max_steps=max_steps)


def _eval_one(stem: str):
    net = _EVAL_STATE["net"]
    pairs_dir = _EVAL_STATE["pairs_dir"]
    distorted = imgio.read_image(pairs_dir / f"{stem}.dist.png")
    reference = imgio.read_image(pairs_dir / f"{stem}.ref.png")
    enhanced, _ = agent.enhance(net, distorted, max_steps=_EVAL_STATE["max_steps"])
    return (
        stem,
        color.mean_lab_distance(distorted, reference),
        color.mean_lab_distance(enhanced, reference),
        metrics.ssim(enhanced, reference),
    )


def cmd_eval(args) -> int:
    pairs_dir = Path(args.pairs)
    manifest = pairs_dir / "manifest.csv"
    if not manifest.exists():
        raise ValueError(f"no manifest.csv in {pairs_dir}")
    with open(manifest, newline="") as fh:
        stems = [row["stem"] for row in csv.DictReader(fh)]
    if not stems:
        raise ValueError(f"manifest in {pairs_dir} lists no pairs")

    if args.jobs > 1:
        with concurrent.futures.ProcessPoolExecutor(
            max_workers=args.jobs,
            initializer=_eval_init,
            initargs=(args.checkpoint, args.pairs, args.max_steps),
        ) as pool:
            rows = list(pool.map(_eval_one, stems))
    else:
        _eval_init(args.checkpoint, args.pairs, args.max_steps)
        rows = [_eval_one(s) for s in stems]

    before = float(np.mean([r[1] for r in rows]))
    after = float(np.mean([r[2] for r in rows]))
    mean_ssim = float(np.mean([r[3] for r in rows]))
    with open(args.report, "w", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow(["stem", "l2_before", "l2_after", "ssim"])
        for stem, l2b, l2a, s in rows:
            writer.writerow([stem, f"{l2b:.6f}", f"{l2a:.6f}", f"{s:.6f}"])
        writer.writerow(["AGGREGATE", f"{before:.6f}", f"{after:.6f}", f"{mean_ssim:.6f}"])

    reduction = 100.0 * (1.0 - after / before) if before > 0 else 0.0
    print(f"pairs:          {len(rows)}")
    print(f"mean L2 before: {before:.4f}")
    print(f"mean L2 after:  {after:.4f}  ({reduction:+.1f}% reduction)")
    print(f"mean SSIM:      {mean_ssim:.4f}")
    return 0


def cmd_bench(args) -> int:
    return bench.main(side=args.side, repeats=args.repeats)


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="retouchq",
        description="Reinforcement-learned global color enhancement.",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("distort", help="synthesize distorted/reference training pairs")
    p.add_argument("--refs", required=True, help="folder of reference images")
    p.add_argument("--out", required=True, help="output pair folder")
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--min-d", type=float, default=10.0, help="lower CIELab distance bound")
    p.add_argument("--max-d", type=float, default=20.0, help="upper CIELab distance bound")
    p.add_argument("--per-ref", type=int, default=1, help="pairs per reference image")
    p.add_argument("--pool", choices=sorted(OP_POOLS), default="all", help="distortion op pool")
    p.add_argument("--jobs", type=int, default=1, help="parallel worker processes")
    p.set_defaults(func=cmd_distort)

    p = sub.add_parser("train", help="train a Q-network on a pair folder")
    p.add_argument("--pairs", required=True, help="pair folder written by distort")
    p.add_argument("--out", required=True, help="checkpoint file to write")
    p.add_argument("--config", help="key = value config file")
    p.add_argument("--steps", type=int, help="environment steps (0 writes an initialized checkpoint)")
    p.add_argument("--seed", type=int)
    p.add_argument("--context", choices=("tiny", "file"), default="tiny")
    p.add_argument("--features-dir", help="folder of <stem>.ctxf files (with --context file)")
    p.add_argument("--log", help="training-log CSV path (default: alongside checkpoint)")
    p.add_argument("--resume", help="checkpoint to continue from")
    p.add_argument("--desk", action="store_true", help="use the small CPU-scale network")
    p.add_argument("--verbose", action="store_true", help="stream log rows to stdout")
    p.set_defaults(func=cmd_train)

    p = sub.add_parser("enhance", help="enhance one image with a trained checkpoint")
    p.add_argument("--checkpoint", required=True)
    p.add_argument("--input", required=True)
    p.add_argument("--output", required=True)
    p.add_argument("--trace", help="write the action trace as JSON")
    p.add_argument("--max-steps", type=int, default=20)
    p.add_argument("--feature", help="fixed .ctxf context feature for this image")
    p.set_defaults(func=cmd_enhance)

    p = sub.add_parser("eval", help="score a checkpoint against a pair folder")
    p.add_argument("--checkpoint", required=True)
    p.add_argument("--pairs", required=True)
    p.add_argument("--report", required=True, help="per-image CSV report path")
    p.add_argument("--max-steps", type=int, default=20)
    p.add_argument("--jobs", type=int, default=1, help="parallel worker processes")
    p.set_defaults(func=cmd_eval)

    p = sub.add_parser("bench", help="compare compiled kernels with the numpy fallbacks")
    p.add_argument("--side", type=int, default=256, help="square test-image side")
    p.add_argument("--repeats", type=int, default=5)
    p.set_defaults(func=cmd_bench)

    return parser


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    if args.command == "distort" and args.per_ref < 1:
        parser.error("per-ref must be ≥ 1")
    if args.command == "distort" and not args.min_d <= args.max_d:
        parser.error("min-d must not exceed max-d")
    try:
        return args.func(args)
    except (ValueError, OSError, RuntimeError, SynthesisError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1


if __name__ == "__main__":
    raise SystemExit(main())
