"""
beamgan command-line interface.

    beamgan generate  [--config C] [--scale S] [--seed N] [--out DIR]
    beamgan train     --regime R [--los-checkpoint P] [--reset-critic-optimizer] ...
    beamgan evaluate  [--checkpoint P] [--conditional-checkpoint P] [--estimators ...]
                      [--snr ...] [--coherence] ...
    beamgan reproduce FIGURE_ID [--scale desk] ...

Exit codes: 0 success, 1 user error (bad config, missing prerequisites,
incompatible model), 2 internal error.
"""

import argparse
import logging
import sys
from pathlib import Path
from typing import List, Optional

from src.common.errors import BeamganError
from src.common.logging_config import configure_logging
from src.common.settings import get_settings
from src.estimation.schemas import ESTIMATOR_METHODS

from .commands import REGIMES, cmd_evaluate, cmd_generate, cmd_train
from .config import SCALES, load_experiment
from .reproduce import FIGURES, cmd_reproduce

logger = logging.getLogger(__name__)

EXIT_OK, EXIT_USER_ERROR, EXIT_INTERNAL_ERROR = 0, 1, 2


def _add_common(parser: argparse.ArgumentParser) -> None:
    parser.add_argument("--config", help="Experiment YAML path or preset name")
    parser.add_argument("--seed", type=int, help="Global seed override")
    parser.add_argument("--scale", choices=SCALES, help="Preset scale (default: paper)")
    parser.add_argument("--out", type=Path, help="Output directory (default: BEAMGAN_OUTPUT_ROOT)")
    parser.add_argument("--log-level", help="Logging level (default: BEAMGAN_LOG_LEVEL)")


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="beamgan",
        description="Generative beamspace channel estimation: data, training, evaluation",
        formatter_class=argparse.RawDescriptionHelpFormatter,
    )
    sub = parser.add_subparsers(dest="command", required=True)

    gen = sub.add_parser("generate", help="Generate channel and LS datasets")
    _add_common(gen)

    train = sub.add_parser("train", help="Train a GAN regime or the LOS predictor")
    _add_common(train)
    train.add_argument("--regime", required=True, choices=REGIMES)
    train.add_argument("--los-checkpoint", type=Path, help="LOS predictor checkpoint (pcgan)")
    train.add_argument(
        "--reset-critic-optimizer",
        action="store_true",
        default=None,
        help="Reset critic RMSprop state every outer iteration",
    )
    train.add_argument("--name", help="Run directory name (default: the regime)")

    ev = sub.add_parser("evaluate", help="Evaluate estimators on the test set")
    _add_common(ev)
    ev.add_argument("--checkpoint", type=Path, help="Generator checkpoint for GCE")
    ev.add_argument("--conditional-checkpoint", type=Path, help="Conditional generator checkpoint")
    ev.add_argument("--estimators", nargs="+", choices=ESTIMATOR_METHODS)
    ev.add_argument("--snr", nargs="+", type=float, help="Test SNRs in dB")
    ev.add_argument("--coherence", action="store_true", help="Also run the coherence/rank study")
    ev.add_argument("--name", default="default", help="Evaluation directory name")

    rep = sub.add_parser("reproduce", help="Reproduce one figure or table end to end")
    _add_common(rep)
    rep.add_argument("figure_id", choices=sorted(FIGURES))
    return parser


def run(args: argparse.Namespace) -> None:
    out = args.out or get_settings().output_root
    if args.command == "reproduce":
        manifest = cmd_reproduce(args.figure_id, out, args.scale or "desk", args.seed, args.config)
        print(f"Manifest: {manifest}")
        return

    cfg = load_experiment(args.config, args.scale, args.seed)
    if args.command == "generate":
        for name, path in cmd_generate(cfg, out).items():
            print(f"{name}: {path}")
    elif args.command == "train":
        result = cmd_train(
            cfg, args.regime, out, args.los_checkpoint, args.reset_critic_optimizer, args.name
        )
        print(f"Run directory: {result['run_dir']}")
    elif args.command == "evaluate":
        paths = cmd_evaluate(
            cfg, out, args.checkpoint, args.conditional_checkpoint, args.estimators, args.snr,
            args.name, args.coherence,
        )
        for name, path in paths.items():
            print(f"{name}: {path}")


def main(argv: Optional[List[str]] = None) -> int:
    """Entry point; returns the process exit code."""
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as e:
        # argparse exits 2 on bad usage; --help exits 0
        return EXIT_USER_ERROR if e.code else EXIT_OK
    configure_logging(args.log_level)

    try:
        run(args)
    except KeyboardInterrupt:
        print("\nOperation cancelled by user.", file=sys.stderr)
        return EXIT_USER_ERROR
    except (BeamganError, ValueError, FileNotFoundError) as e:
        print(f"Error: {e}", file=sys.stderr)
        return EXIT_USER_ERROR
    except Exception as e:
        logger.exception("Internal error")
        print(f"Internal error: {type(e).__name__}: {e}", file=sys.stderr)
        return EXIT_INTERNAL_ERROR
    return EXIT_OK


if __name__ == "__main__":
    sys.exit(main())
