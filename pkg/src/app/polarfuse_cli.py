"""
Command-line interface for polarfuse.

Every subcommand shares ``--seed``, ``--config``, ``--out``, ``--verbose``
and ``--log-file``. Settings resolve as CLI flag, then config-file key,
then the default in ``src.constants``.
"""

import argparse
import logging
import sys
from typing import Dict, List, Optional, Sequence

from src.app.command_handlers import CommandHandlers
from src.app.run_config import CONFIG_KEYS, RunConfig
from src.constants import (
    ABLATION_MODES,
    CLI_DESCRIPTION,
    CLI_PROG,
    CONFIG_ERROR,
    EVAL_SOURCES,
    EXIT_CONFIG_ERROR,
    EXIT_INPUT_ERROR,
    EXIT_INTERRUPTED,
    EXIT_NUMERIC_ERROR,
    EXIT_OK,
    INPUT_ERROR,
    INTERRUPTED,
    NUMERIC_ERROR,
)
from src.errors import ConfigError, NumericFailureError, PolarFuseError
from src.managers.config_manager import read_key_values


def _common_parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--seed", type=int, help="master random seed")
    common.add_argument("--config", help="key=value run configuration file")
    common.add_argument("--out", help="output directory or prefix")
    common.add_argument("--verbose", "-v", action="store_true", help="debug logging")
    common.add_argument("--log-file", help="also write the log to this file")
    return common


def _model_flags(parser: argparse.ArgumentParser) -> None:
    parser.add_argument("--ablation", help=f"one of {', '.join(ABLATION_MODES)}")
    parser.add_argument("--stages", type=int, help="number of encoder stages")
    parser.add_argument(
        "--channels", help="first-stage width (doubled per stage) or comma list"
    )


def _training_flags(parser: argparse.ArgumentParser) -> None:
    parser.add_argument("--data", help="dataset directory")
    parser.add_argument("--steps", type=int, help="gradient steps")
    parser.add_argument("--lr", type=float, help="learning rate")


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog=CLI_PROG, description=CLI_DESCRIPTION)
    common = _common_parser()
    commands = parser.add_subparsers(dest="command", required=True)

    decode = commands.add_parser(
        "decode", parents=[common], help="decode a DoFP capture into guidance"
    )
    decode.add_argument("--input", help="PFT1 capture [4, H, W]")
    decode.add_argument("--intrinsics", help="key=value camera intrinsics")

    simulate = commands.add_parser(
        "simulate", parents=[common], help="render a synthetic dataset"
    )
    simulate.add_argument("--scenes", type=int, help="number of samples")
    simulate.add_argument("--resolution", type=int, help="image height and width")
    simulate.add_argument("--degradation", help="comma list of degradation modes")
    simulate.add_argument("--noise", type=float, help="intensity noise sigma")

    pretrain = commands.add_parser(
        "pretrain", parents=[common], help="train the foundation backbone"
    )
    _model_flags(pretrain)
    _training_flags(pretrain)

    train = commands.add_parser(
        "train", parents=[common], help="train the enhancement network"
    )
    _model_flags(train)
    _training_flags(train)
    train.add_argument("--foundation", help="PWA1 foundation weights")

    evaluate = commands.add_parser(
        "eval", parents=[common], help="score depth against ground truth"
    )
    _model_flags(evaluate)
    evaluate.add_argument("--data", help="dataset directory")
    evaluate.add_argument("--checkpoint", help="PWA1 checkpoint")
    evaluate.add_argument("--source", choices=EVAL_SOURCES, help="what to score")
    evaluate.add_argument("--threshold-base", type=float, help="delta base")
    evaluate.add_argument(
        "--error-maps",
        action="store_const",
        const=True,
        help="dump per-pixel absolute error rasters",
    )

    pointcloud = commands.add_parser(
        "pointcloud", parents=[common], help="export PLY point clouds"
    )
    _model_flags(pointcloud)
    pointcloud.add_argument("--data", help="dataset directory")
    pointcloud.add_argument("--checkpoint", help="PWA1 checkpoint")
    pointcloud.add_argument("--index", type=int, help="sample index")

    compare = commands.add_parser(
        "compare", parents=[common], help="compare metric tables of several runs"
    )
    compare.add_argument("runs", nargs="+", help="metrics.csv files, baseline first")
    return parser


def resolve_config(args: argparse.Namespace) -> RunConfig:
    """Merge defaults, the config file and CLI flags (highest priority)."""
    values: Dict[str, object] = {}
    if args.config:
        for key, raw in read_key_values(args.config).items():
            if key not in CONFIG_KEYS:
                raise ConfigError(f"unknown key '{key}' in {args.config}")
            try:
                values[key] = CONFIG_KEYS[key](raw)
            except ValueError:
                raise ConfigError(f"bad value for '{key}': '{raw}'")
    for key in CONFIG_KEYS:
        flag = getattr(args, key, None)
        if flag is not None:
            values[key] = flag
    if getattr(args, "runs", None):
        values["runs"] = tuple(args.runs)
    return RunConfig(command=args.command, **values)


def configure_logging(verbose: bool = False, log_file: Optional[str] = None) -> None:
    handlers: List[logging.Handler] = [logging.StreamHandler(sys.stderr)]
    if log_file:
        handlers.append(logging.FileHandler(log_file))
    logging.basicConfig(
        level=logging.DEBUG if verbose else logging.WARNING,
        format="%(asctime)s %(levelname)s %(name)s: %(message)s",
        handlers=handlers,
        force=True,
    )


def main(argv: Optional[Sequence[str]] = None) -> int:
    """Parse ``argv``, run one subcommand and return its exit code."""
    try:
        args = build_parser().parse_args(argv)
    except SystemExit as e:
        # argparse has already printed usage or help
        return EXIT_OK if e.code == 0 else EXIT_CONFIG_ERROR
    configure_logging(args.verbose, args.log_file)
    try:
        config = resolve_config(args)
        CommandHandlers(config).run()
    except KeyboardInterrupt:
        print(INTERRUPTED)
        return EXIT_INTERRUPTED
    except ConfigError as e:
        print(CONFIG_ERROR.format(e))
        return EXIT_CONFIG_ERROR
    except NumericFailureError as e:
        print(NUMERIC_ERROR.format(e))
        return EXIT_NUMERIC_ERROR
    except (PolarFuseError, OSError) as e:
        print(INPUT_ERROR.format(e))
        return EXIT_INPUT_ERROR
    return EXIT_OK
