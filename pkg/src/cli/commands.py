"""
Command-line interface.

    train <config>                                   train one model
    upscale <checkpoint> <in.png> <out.png> (--scale S | --size HxW)
    eval <checkpoint...> <dir> --scales 2,3,4 [--ssim]
    ablate-k <config> --k-list 1,2,4
    make-toy-set <dir> [--count 16] [--val-count 4] [--seed 0]

Library code raises; this module is the only place exceptions become exit codes.
"""

from __future__ import annotations

import argparse
import math
import re
import sys
from collections.abc import Callable, Sequence
from pathlib import Path

from src.config.experiment import TrainConfig, load_train_config, validate_train_config
from src.config.logging_config import setup_logger
from src.config.settings import validate_config_dependencies
from src.services.exceptions import (
    CheckpointError,
    ConfigError,
    ContractError,
    DatasetError,
    ImageIOError,
    SuperResolutionError,
    TrainingDivergedError,
)
from src.services.harness.ablation import parse_k_list, run_k_ablation
from src.services.harness.checkpoint import load_checkpoint
from src.services.harness.evaluation import (
    BICUBIC,
    ModelUpscaler,
    bicubic_upscaler,
    evaluate,
    load_eval_images,
    method_names,
    parse_scales,
)
from src.services.imaging.png_io import load_png, save_png
from src.services.training.dataset import ImageDataset
from src.services.training.synthetic import write_toy_set
from src.services.training.trainer import Trainer

logger = setup_logger(__name__)

EXIT_OK = 0
EXIT_FAILED = 1
EXIT_USAGE = 2
EXIT_DATASET = 3
EXIT_CHECKPOINT = 4
EXIT_IMAGE_IO = 5
EXIT_DIVERGED = 6

# Most specific first.
_EXIT_CODES: tuple[tuple[type[Exception], int], ...] = (
    (ConfigError, EXIT_USAGE),
    (ContractError, EXIT_USAGE),
    (DatasetError, EXIT_DATASET),
    (CheckpointError, EXIT_CHECKPOINT),
    (ImageIOError, EXIT_IMAGE_IO),
    (TrainingDivergedError, EXIT_DIVERGED),
)

_SIZE_PATTERN = re.compile(r"^\s*(\d+)\s*[xX]\s*(\d+)\s*$")


def exit_code_for(exc: BaseException) -> int:
    for error_type, code in _EXIT_CODES:
        if isinstance(exc, error_type):
            return code
    return EXIT_FAILED


def parse_size(text: str) -> tuple[int, int]:
    """'HxW' -> (H, W), both >= 1."""
    match = _SIZE_PATTERN.match(text)
    if not match:
        raise ContractError(f"size must look like HxW, got {text!r}")
    height, width = int(match.group(1)), int(match.group(2))
    if height < 1 or width < 1:
        raise ContractError(f"size must be at least 1x1, got {text!r}")
    return height, width


def parse_scale(text: str) -> float:
    try:
        scale = float(text)
    except ValueError:
        raise ContractError(f"scale must be a number, got {text!r}") from None
    if not math.isfinite(scale) or scale <= 0:
        raise ContractError(f"scale must be > 0, got {text}")
    return scale


def _load_valid_config(path: str) -> TrainConfig:
    cfg = load_train_config(path)
    errors = validate_train_config(cfg)
    if errors:
        for error in errors:
            logger.error("Config %s: %s", path, error)
        raise ConfigError("config", "; ".join(errors))
    if not cfg.dataset_dir:
        raise ConfigError("dataset_dir", "required")
    return cfg


# ---------------------------------------------------------------------------
# Commands
# ---------------------------------------------------------------------------
def cmd_train(args: argparse.Namespace) -> int:
    cfg = _load_valid_config(args.config)
    dataset = ImageDataset.from_directory(cfg.dataset_dir)
    output_dir = Path(args.output_dir) if args.output_dir else cfg.output_path
    run_name = Path(args.config).stem
    logger.info(
        "Training %s (K=%d, D=%d, B=%d) for %d x %d steps, seed %d",
        cfg.mode,
        cfg.model_spec().k,
        cfg.feature_channels,
        cfg.num_blocks,
        cfg.epochs,
        cfg.iterations_per_epoch,
        cfg.seed,
    )
    result = Trainer(cfg, dataset).train(output_dir, run_name=run_name)
    logger.info("Checkpoint %s, loss log %s", result.checkpoint.path, result.loss_csv)
    return EXIT_OK


def cmd_upscale(args: argparse.Namespace) -> int:
    if (args.scale is None) == (args.size is None):
        raise ContractError("give exactly one of --scale or --size")
    model = load_checkpoint(args.checkpoint)
    lr = load_png(args.input)
    if args.size is not None:
        sr = model.upscale(lr, size=parse_size(args.size))
    else:
        sr = model.upscale(lr, scale=parse_scale(args.scale))
    save_png(sr, args.output)
    logger.info("Upscaled %dx%d -> %dx%d: %s", lr.height, lr.width, sr.height, sr.width, args.output)
    return EXIT_OK


def cmd_eval(args: argparse.Namespace) -> int:
    scales = parse_scales(args.scales)
    methods: dict[str, Callable] = {BICUBIC: bicubic_upscaler}
    for name, path in zip(method_names(args.checkpoints), args.checkpoints, strict=True):
        methods[name] = ModelUpscaler(load_checkpoint(path))

    images, unreadable = load_eval_images(args.dataset_dir)
    if not images and not unreadable:
        raise DatasetError(f"no PNG images in {args.dataset_dir}")
    report = evaluate(methods, images, scales, with_ssim=args.ssim, unreadable=len(unreadable))
    report.write_csv(args.output)
    sys.stdout.write(report.format_table() + "\n")
    logger.info("Wrote evaluation report %s", args.output)
    return EXIT_FAILED if report.all_failed else EXIT_OK


def cmd_ablate_k(args: argparse.Namespace) -> int:
    k_values = parse_k_list(args.k_list)
    cfg = _load_valid_config(args.config)
    dataset = ImageDataset.from_directory(cfg.dataset_dir)
    val_images, _ = load_eval_images(cfg.validation_dir)
    if not val_images:
        raise DatasetError(f"no readable validation images in {cfg.validation_dir}")
    output_dir = Path(args.output_dir) if args.output_dir else cfg.output_path
    report = run_k_ablation(cfg, k_values, dataset, val_images, output_dir)
    csv_path = report.write_csv(output_dir / "ablation_k.csv")
    logger.info("Wrote K ablation report %s", csv_path)
    return EXIT_FAILED if all(row.status == "failed" for row in report.rows) else EXIT_OK


def cmd_make_toy_set(args: argparse.Namespace) -> int:
    train_dir, val_dir = write_toy_set(args.directory, count=args.count, val_count=args.val_count, seed=args.seed)
    logger.info("Toy set ready: %s (train), %s (held out)", train_dir, val_dir)
    return EXIT_OK


# ---------------------------------------------------------------------------
# Parser
# ---------------------------------------------------------------------------
def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="aliif", description="Arbitrary-scale super-resolution (LIIF / A-LIIF)")
    sub = parser.add_subparsers(dest="command", required=True)

    train = sub.add_parser("train", help="Train a model from an experiment config")
    train.add_argument("config", help="Experiment config (key = value lines)")
    train.add_argument("--output-dir", default=None, help="Overrides output_dir of the config")
    train.set_defaults(handler=cmd_train)

    upscale = sub.add_parser("upscale", help="Upscale one PNG with a trained checkpoint")
    upscale.add_argument("checkpoint")
    upscale.add_argument("input", help="LR PNG")
    upscale.add_argument("output", help="Where to write the SR PNG")
    upscale.add_argument("--scale", default=None, help="Real upscale factor, e.g. 2.5")
    upscale.add_argument("--size", default=None, help="Exact output size HxW, e.g. 120x90")
    upscale.set_defaults(handler=cmd_upscale)

    evaluate_parser = sub.add_parser("eval", help="PSNR/SSIM of checkpoints and bicubic on a PNG folder")
    evaluate_parser.add_argument("checkpoints", nargs="+", help="One or more checkpoints")
    evaluate_parser.add_argument("dataset_dir", help="Folder of HR PNGs")
    evaluate_parser.add_argument("--scales", default="2,3,4", help="Comma list, or the presets 'in' / 'out'")
    evaluate_parser.add_argument("--ssim", action="store_true", help="Also report SSIM")
    evaluate_parser.add_argument("--output", default="eval_report.csv", help="CSV report path")
    evaluate_parser.set_defaults(handler=cmd_eval)

    ablate = sub.add_parser("ablate-k", help="Train one model per K and report PSNR vs K")
    ablate.add_argument("config")
    ablate.add_argument("--k-list", default="1,2,4,8,10", help="Comma-separated K values")
    ablate.add_argument("--output-dir", default=None, help="Overrides output_dir of the config")
    ablate.set_defaults(handler=cmd_ablate_k)

    toy = sub.add_parser("make-toy-set", help="Write the seeded synthetic texture set")
    toy.add_argument("directory")
    toy.add_argument("--count", type=int, default=16)
    toy.add_argument("--val-count", type=int, default=4)
    toy.add_argument("--seed", type=int, default=0)
    toy.set_defaults(handler=cmd_make_toy_set)
    return parser


def run(argv: Sequence[str] | None = None) -> int:
    """Parse arguments, dispatch, and map failures to an exit code."""
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return int(exc.code or 0)

    problems = validate_config_dependencies()
    if problems:
        for problem in problems:
            logger.error("Environment: %s", problem)
        return EXIT_USAGE

    try:
        return args.handler(args)
    except SuperResolutionError as exc:
        code = exit_code_for(exc)
        logger.error("%s failed (exit %d): %s", args.command, code, exc)
        return code
