"""
Main entry point for the MRDC reconstruction toolkit.

This script simulates multi-coil datasets, trains the D-POCSENSE and DC-CNN
cascades, reconstructs records with a checkpoint or a baseline, and evaluates
reconstructions into a per-protocol PSNR/SSIM table.

Exit codes: 0 on success, 1 on runtime failure, 2 on usage errors.
"""

import argparse
import json
import sys
from pathlib import Path
from typing import List, Optional

import torch

from exceptions import ReconToolkitError
from DatasetGeneration import PROTOCOLS, read_dataset, simulate_dataset, write_dataset
from Evaluation import EvaluationReport, evaluate_reconstructions
from Networks import VARIANTS, ModelConfig, build_model
from Reconstruction import BASELINES, METHOD_MODEL, METHOD_POCSENSE, Reconstructor, worker_count, write_reconstructions
from Training import TrainConfig, load_checkpoint, precision, train

EXIT_OK = 0
EXIT_FAILURE = 1
EXIT_USAGE = 2


def run_simulate(args) -> int:
    """
    Generate a synthetic dataset and write it to disk.

    Args:
        args: Parsed command line arguments.
    Returns:
        int: Exit code.
    """
    records = simulate_dataset(args.records, args.size, args.coils, args.noise, args.seed,
                               protocols=args.protocols, af=args.af, calib=args.calib,
                               show_progress=args.verbose)
    directory = write_dataset(records, args.out, overwrite=args.overwrite, show_progress=args.verbose)
    print(f"Wrote {len(records)} records to {directory}")
    return EXIT_OK


def run_train(args) -> int:
    """
    Train a cascade on a dataset and write its checkpoint.

    Args:
        args: Parsed command line arguments.
    Returns:
        int: Exit code.
    """
    records = read_dataset(args.data, show_progress=args.verbose)
    if not records:
        print(f"No records were found in {args.data}")
        return EXIT_FAILURE

    model_config = ModelConfig(variant=args.variant, n_c=args.nc, n_d=args.nd, n_filters=args.filters,
                               lambda_init=args.lambda_init, lambda_trainable=not args.fixed_lambda,
                               shared_lambda=args.shared_lambda)
    train_config = TrainConfig(lr=args.lr, epochs=args.epochs, batch_size=args.batch, seed=args.seed,
                               loss=args.loss, precision=args.precision, af=args.af, calib=args.calib,
                               resample_masks=args.resample_masks, checkpoint_every=args.checkpoint_every,
                               checkpoint_path=args.out, show_progress=args.verbose)
    real_dtype, _ = precision(args.precision)
    first = records[0]
    model = build_model(model_config, first.n_coil, first.height, first.width, args.seed, real_dtype)

    result = train(model, records, train_config)
    if result.epoch_losses:
        print(f"Final training loss: {result.epoch_losses[-1]:.4e}")
    print(f"Checkpoint written to: {args.out}")
    return EXIT_OK


def _reconstructor(args, checkpoint: Optional[str], baseline: Optional[str], af: Optional[float]) -> Reconstructor:
    if checkpoint is not None:
        model, _ = load_checkpoint(checkpoint)
        return Reconstructor(METHOD_MODEL, model, af=af, calib=args.calib)
    return Reconstructor(baseline, af=af, calib=args.calib, iters=args.iters, step=args.step)


def _warn_non_monotone(reconstructions):
    for reconstruction in reconstructions:
        if not reconstruction.monotone:
            print(f"Warning: POCSENSE residual increased on record {reconstruction.record_id}")


def run_recon(args) -> int:
    """
    Reconstruct every record of a dataset and write images.

    Args:
        args: Parsed command line arguments.
    Returns:
        int: Exit code.
    """
    torch.set_num_threads(worker_count())
    records = read_dataset(args.data, show_progress=args.verbose)
    reconstructor = _reconstructor(args, args.model, args.baseline, args.af)
    reconstructions = reconstructor.reconstruct_dataset(records, show_progress=args.verbose)
    if reconstructor.method == METHOD_POCSENSE:
        _warn_non_monotone(reconstructions)
    directory = write_reconstructions(reconstructions, args.out, reconstructor.label, args.af, args.calib)
    print(f"Wrote {len(reconstructions)} {reconstructor.label} reconstructions to {directory}")
    return EXIT_OK


def run_eval(args) -> int:
    """
    Evaluate models and baselines and print the per-protocol table.

    Args:
        args: Parsed command line arguments.
    Returns:
        int: Exit code.
    """
    torch.set_num_threads(worker_count())
    records = read_dataset(args.data, show_progress=args.verbose)
    methods = [(path, None) for path in args.model or []] + [(None, name) for name in args.baseline or []]
    report = EvaluationReport()
    for af in args.af or [4.0]:
        for checkpoint, baseline in methods:
            reconstructor = _reconstructor(args, checkpoint, baseline, af)
            reconstructions = reconstructor.reconstruct_dataset(records, show_progress=args.verbose)
            if reconstructor.method == METHOD_POCSENSE:
                _warn_non_monotone(reconstructions)
            report.add(reconstructor.label, af, evaluate_reconstructions(reconstructions))

    print(report.to_text())
    if args.json:
        path = Path(args.json)
        path.parent.mkdir(parents=True, exist_ok=True)
        path.write_text(json.dumps(report.to_json(), indent=2, ensure_ascii=False), encoding='utf-8')
        if args.verbose:
            print(f"Report written to: {path}")
    return EXIT_OK


def build_parser() -> argparse.ArgumentParser:
    """
    Build the command line parser.
    """
    parser = argparse.ArgumentParser(prog="mrdc", description="Parallel-MRI data-consistency cascade toolkit.")
    parser.add_argument("--verbose", action="store_true", help="Display progress bars and verbose output.")
    subparsers = parser.add_subparsers(dest="command", metavar="{simulate,train,recon,eval}")

    simulate = subparsers.add_parser("simulate", help="Generate a synthetic multi-coil dataset.")
    simulate.add_argument("--out", required=True, help="Output dataset directory.")
    simulate.add_argument("--size", type=int, default=128, help="Frame height and width.")
    simulate.add_argument("--coils", type=int, default=8, help="Number of receive coils.")
    simulate.add_argument("--records", type=int, default=20, help="Number of records.")
    simulate.add_argument("--noise", type=float, default=0.0, help="Complex noise standard deviation.")
    simulate.add_argument("--seed", type=int, default=0, help="Base random seed.")
    simulate.add_argument("--protocols", nargs="+", choices=sorted(PROTOCOLS), help="Protocols to cycle through.")
    simulate.add_argument("--af", type=float, default=4.0, help="Acceleration factor of the stored masks.")
    simulate.add_argument("--calib", type=int, default=24, help="Calibration lines of the stored masks.")
    simulate.add_argument("--overwrite", action="store_true", help="Replace an existing dataset directory.")
    simulate.set_defaults(handler=run_simulate)

    defaults = TrainConfig()
    model_defaults = ModelConfig.desk_scale()
    train_parser = subparsers.add_parser("train", help="Train a cascade network.")
    train_parser.add_argument("--data", required=True, help="Training dataset directory.")
    train_parser.add_argument("--variant", choices=VARIANTS, default=model_defaults.variant, help="Cascade variant.")
    train_parser.add_argument("--af", type=float, default=defaults.af, help="Acceleration factor of training masks.")
    train_parser.add_argument("--calib", type=int, default=defaults.calib, help="Calibration lines.")
    train_parser.add_argument("--nc", type=int, default=model_defaults.n_c, help="Number of cascades.")
    train_parser.add_argument("--nd", type=int, default=model_defaults.n_d, help="Convolution layers per cascade.")
    train_parser.add_argument("--filters", type=int, default=model_defaults.n_filters, help="Hidden channels.")
    train_parser.add_argument("--lambda-init", type=float, default=model_defaults.lambda_init,
                              help="Initial data-consistency weight.")
    train_parser.add_argument("--fixed-lambda", action="store_true", help="Keep lambda fixed instead of learning it.")
    train_parser.add_argument("--shared-lambda", action="store_true", help="Share one lambda across cascades.")
    train_parser.add_argument("--loss", choices=("recombined", "coilwise"), help="Loss (variant default if omitted).")
    train_parser.add_argument("--lr", type=float, default=defaults.lr, help="Adam learning rate.")
    train_parser.add_argument("--epochs", type=int, default=defaults.epochs, help="Training epochs.")
    train_parser.add_argument("--batch", type=int, default=defaults.batch_size, help="Batch size.")
    train_parser.add_argument("--seed", type=int, default=defaults.seed, help="Initialization and shuffle seed.")
    train_parser.add_argument("--out", required=True, help="Checkpoint file.")
    train_parser.add_argument("--checkpoint-every", type=int, default=defaults.checkpoint_every,
                              help="Epochs between checkpoints (0 writes only the final one).")
    train_parser.add_argument("--resample-masks", action="store_true", help="Draw new masks every epoch.")
    train_parser.add_argument("--precision", choices=("double", "single"), default=defaults.precision,
                              help="Floating point precision.")
    train_parser.set_defaults(handler=run_train)

    recon = subparsers.add_parser("recon", help="Reconstruct records with a checkpoint or a baseline.")
    source = recon.add_mutually_exclusive_group(required=True)
    source.add_argument("--model", help="Checkpoint file.")
    source.add_argument("--baseline", choices=BASELINES, help="Non-learned reconstruction.")
    recon.add_argument("--data", required=True, help="Dataset directory.")
    recon.add_argument("--out", required=True, help="Output directory.")
    recon.add_argument("--af", type=float, help="Regenerate masks at this acceleration (stored masks if omitted).")
    recon.add_argument("--calib", type=int, default=24, help="Calibration lines.")
    recon.add_argument("--iters", type=int, default=30, help="POCSENSE iterations.")
    recon.add_argument("--step", type=float, default=1.0, help="POCSENSE step size.")
    recon.set_defaults(handler=run_recon)

    evaluate = subparsers.add_parser("eval", help="Per-protocol PSNR/SSIM table.")
    evaluate.add_argument("--data", required=True, help="Evaluation dataset directory.")
    evaluate.add_argument("--model", action="append", help="Checkpoint file (repeatable).")
    evaluate.add_argument("--baseline", action="append", choices=BASELINES, help="Baseline (repeatable).")
    evaluate.add_argument("--af", type=float, action="append", help="Acceleration factor column (repeatable).")
    evaluate.add_argument("--calib", type=int, default=24, help="Calibration lines.")
    evaluate.add_argument("--iters", type=int, default=30, help="POCSENSE iterations.")
    evaluate.add_argument("--step", type=float, default=1.0, help="POCSENSE step size.")
    evaluate.add_argument("--json", help="Also write the table as JSON to this file.")
    evaluate.set_defaults(handler=run_eval)
    return parser


def run_cli(argv: List[str]) -> int:
    """
    Run the command line with the given tokens.

    Args:
        argv: Command line tokens, without the program name.
    Returns:
        int: Exit code.
    """
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as e:
        return EXIT_OK if e.code == 0 else EXIT_USAGE
    if args.command is None:
        parser.print_usage(sys.stderr)
        return EXIT_USAGE
    if args.command == "eval" and not (args.model or args.baseline):
        parser.print_usage(sys.stderr)
        print("eval: at least one --model or --baseline is required", file=sys.stderr)
        return EXIT_USAGE

    try:
        return args.handler(args)
    except (ReconToolkitError, OSError) as e:
        print(f"Error: {e}", file=sys.stderr)
        return EXIT_FAILURE


def main():
    """
    Main function for the MRDC reconstruction toolkit.
    """
    return run_cli(sys.argv[1:])


if __name__ == "__main__":
    sys.exit(main())
