from ptsdpredict.experiment.config import ExperimentConfig, SyntheticSpec, build_config
from ptsdpredict.experiment.exit_codes import ExitCodes
from ptsdpredict.experiment.runner import Experiment
from ptsdpredict.experiment.synthetic import generate_synthetic, generate_table
