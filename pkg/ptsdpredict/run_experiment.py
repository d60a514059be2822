import argparse
import logging
import sys

from ptsdpredict.errors import PtsdError
from ptsdpredict.experiment.config import build_config
from ptsdpredict.experiment.exit_codes import ExitCodes
from ptsdpredict.experiment.runner import Experiment
from ptsdpredict.file_manager import DEFAULT_EXPERIMENT_CONFIG, add_arguments_from_config, load_config
from ptsdpredict.utils.logger import Logger

COMMANDS = {
    "run": "Preprocess, fit the ensemble (or --model), evaluate and write report.json",
    "compare": "Fit every model of the compare list on the same split and tabulate them",
    "tune": "Random search over network widths, dropout and learning rate",
    "generate": "Write the synthetic survey CSV and its rule sidecar",
}


def build_parser():
    _description = "PTSD prediction experiments on disaster survey data"
    _epilog = (
        "Settings come from the packaged experiment_config.yaml, then --config, "
        "then explicit flags."
    )
    config = load_config(DEFAULT_EXPERIMENT_CONFIG)

    # Flags shared by every command
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument(
        "--config",
        default=None,
        help="YAML file overriding the packaged configuration sections",
    )
    add_arguments_from_config(common, config)

    parser = argparse.ArgumentParser(description=_description, epilog=_epilog)
    subparsers = parser.add_subparsers(dest="command", required=True)
    for command, help_text in COMMANDS.items():
        subparsers.add_parser(command, parents=[common], help=help_text, description=help_text)
    return parser


def overrides_from_args(args) -> dict:
    values = vars(args).copy()
    values.pop("command", None)
    values.pop("config", None)
    return values


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    log = None
    try:
        config = build_config(args.config, overrides_from_args(args))
        log = Logger(mode=args.command.capitalize(), log_folder=config.log_folder, verbose=config.verbose)
        experiment = Experiment(config)
        getattr(experiment, args.command)()
    except PtsdError as error:
        code = ExitCodes.for_error(error)
        if log is None:
            log = Logger(mode=args.command.capitalize(), verbose=1, log_to_file=False)
        log.logger.error(f"{code}: {error}")
        return int(code)
    logging.getLogger(__name__).info(f"{args.command} finished, outputs in {config.out}")
    return int(ExitCodes.SUCCESS)


def run():
    sys.exit(main())


if __name__ == "__main__":
    run()
