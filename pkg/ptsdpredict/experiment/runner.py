"""
Experiment orchestration: one instance per CLI invocation.

Every artifact is a pure function of (dataset bytes, configuration, seed).
Log files are written by ``utils.logger.Logger`` outside the output
directory, so nothing time-dependent ends up next to the artifacts.
"""

import logging
from dataclasses import asdict
from pathlib import Path

from ptsdpredict.ensemble.voting import ensemble_history, fit_ensemble, member_configs, save_ensemble
from ptsdpredict.errors import ConfigError, PtsdError
from ptsdpredict.experiment.config import ENSEMBLE_ENTRY, ExperimentConfig
from ptsdpredict.experiment.synthetic import generate_synthetic
from ptsdpredict.file_manager import (
    DEFAULT_SCHEMA,
    atomic_write_text,
    format_csv,
    load_schema,
    resolve_config_path,
    write_csv_rows,
    write_json,
)
from ptsdpredict.learners.history import HISTORY_HEADER
from ptsdpredict.learners.mlp import MlpModel
from ptsdpredict.learners.registry import DISPLAY_NAMES, build_classifier, build_hyper
from ptsdpredict.metrics.comparison import compare_table
from ptsdpredict.metrics.evaluation import CONFUSION_HEADER, confusion_rows, evaluate, report_to_dict
from ptsdpredict.preprocess.pipeline import fit_transform_split
from ptsdpredict.tabular.csv_io import load_csv
from ptsdpredict.tabular.validation import validate
from ptsdpredict.training_control.callbacks import callbacks_from_config
from ptsdpredict.training_control.search import SearchSpace, mlp_trial_evaluator, random_search
from ptsdpredict.utils.seeding import derive_seed

logger = logging.getLogger(__name__)

REPORT_VERSION = 1
SYNTHETIC_FILE = "synthetic.csv"


class Experiment:
    """
    Runs one of the ``run``, ``compare``, ``tune`` or ``generate`` commands.

    Attributes:
        config (ExperimentConfig): validated configuration
        out (Path): output directory
        schema (Schema): survey column schema
    """

    def __init__(self, config: ExperimentConfig):
        self.config = config
        self.out = Path(config.out)
        self.schema = load_schema(resolve_config_path(config.schema, DEFAULT_SCHEMA))

    def callback_factory(self):
        return callbacks_from_config(self.config.callbacks)

    # ------------------------------------------------------------------
    # Data
    # ------------------------------------------------------------------
    def generate(self, out_path=None) -> Path:
        out_path = Path(out_path) if out_path else self.out / SYNTHETIC_FILE
        return generate_synthetic(self.config.synthetic, self.config.seed, out_path, self.schema)

    def data_path(self) -> Path:
        if self.config.data:
            return Path(self.config.data)
        logger.info("No dataset given; generating the synthetic benchmark")
        return self.generate()

    def prepare(self):
        """
        Load, validate and preprocess the dataset.

        Returns:
            tuple: (FittedPreprocessor, PreparedData, data summary dict)
        """
        path = self.data_path()
        table = load_csv(path, self.schema)
        n_dropped = 0
        if self.config.drop_missing_target:
            table, n_dropped = table.drop_missing_target()
            if n_dropped:
                logger.warning(f"Dropped {n_dropped} rows with a missing target")
        validation = validate(table)
        fitted, prepared = fit_transform_split(
            table,
            test_fraction=self.config.test_fraction,
            seed=self.config.seed,
            smote=self.config.smote,
            smote_k=self.config.smote_k,
            n_jobs=self.config.n_jobs,
        )
        write_json(self.out / "preprocessor.json", fitted.to_dict())
        summary = {
            "dataset": path.name,
            "dropped_missing_target": n_dropped,
            "validation": validation.to_dict(),
            "split": prepared.summary(),
        }
        return fitted, prepared, summary

    # ------------------------------------------------------------------
    # Commands
    # ------------------------------------------------------------------
    def run(self) -> dict:
        """Fit the configured ensemble (or single model), evaluate it and write the artifacts."""
        config = self.config
        _, data, summary = self.prepare()
        models_dir = self.out / "models"

        if config.model:
            name = config.model
            model = build_classifier(config.model, config.model_params(config.model))
            fit_kwargs = {"callbacks": self.callback_factory()} if isinstance(model, MlpModel) else {}
            model.fit(data.X_train, data.y_train, seed=derive_seed(config.seed, config.model), **fit_kwargs)
            write_json(models_dir / f"{config.model}.json", model.to_dict())
            history = model.history if isinstance(model, MlpModel) else None
            members = {}
        else:
            name = config.ensemble
            model = fit_ensemble(
                data.X_train,
                data.y_train,
                member_configs(config.ensemble, config.models),
                seed=config.seed,
                weights=config.weights,
                callback_factory=self.callback_factory,
                n_jobs=config.n_jobs,
            )
            save_ensemble(model, models_dir)
            history = ensemble_history(model)
            members = {
                member_name: report_to_dict(evaluate(member, data.X_test, data.y_test, config.threshold))
                for member_name, member in zip(model.names, model.members)
            }

        report = evaluate(model, data.X_test, data.y_test, config.threshold)
        write_csv_rows(self.out / "confusion.csv", CONFUSION_HEADER, confusion_rows(report.confusion))
        if history is not None and len(history):
            write_csv_rows(self.out / "history.csv", HISTORY_HEADER, history.to_rows())

        document = {
            "spec_version": REPORT_VERSION,
            "command": "run",
            "seed": config.seed,
            "model": name,
            "averaging": config.averaging,
            "threshold": config.threshold,
            "data": summary,
            "test": report_to_dict(report),
            "averaged": asdict(report.averaged(config.averaging)),
            "members": members,
            "history": "history.csv" if history is not None and len(history) else None,
            "history_source": "mlp member" if history is not None else None,
        }
        write_json(self.out / "report.json", document)
        logger.info(
            f"{name}: test accuracy {100 * report.accuracy:.2f}% on {data.n_test} rows "
            f"({config.averaging} F1 {100 * report.averaged(config.averaging).f1:.2f}%)"
        )
        return document

    def _fit_for_compare(self, kind, data):
        config = self.config
        if kind == ENSEMBLE_ENTRY:
            return fit_ensemble(
                data.X_train,
                data.y_train,
                member_configs(config.ensemble, config.models),
                seed=config.seed,
                weights=config.weights,
                callback_factory=self.callback_factory,
                n_jobs=config.n_jobs,
            )
        model = build_classifier(kind, config.model_params(kind))
        if isinstance(model, MlpModel):
            return model.fit(data.X_train, data.y_train, seed=derive_seed(config.seed, kind), callbacks=self.callback_factory())
        return model.fit(data.X_train, data.y_train, seed=derive_seed(config.seed, kind))

    def compare(self):
        """Train every listed model on the same split and write the comparison tables."""
        config = self.config
        kinds = config.compare_models
        if len(kinds) < 2:
            raise ConfigError(f"compare needs at least two models, got {len(kinds)}")
        _, data, summary = self.prepare()

        named_reports, statuses = [], []
        for kind in kinds:
            display = DISPLAY_NAMES.get(kind, kind)
            try:
                model = self._fit_for_compare(kind, data)
                report = evaluate(model, data.X_test, data.y_test, config.threshold)
            except PtsdError as error:
                logger.warning(f"{display} failed: {error}")
                named_reports.append((display, None))
                statuses.append(f"failed: {error}")
                continue
            named_reports.append((display, report))
            statuses.append("ok")
            write_csv_rows(
                self.out / f"confusion_{kind}.csv", CONFUSION_HEADER, confusion_rows(report.confusion)
            )
            logger.info(f"{display}: test accuracy {100 * report.accuracy:.2f}%")

        table = compare_table(named_reports, averaging=config.averaging, statuses=statuses)
        atomic_write_text(self.out / "comparison.csv", table.to_csv())
        atomic_write_text(self.out / "comparison.txt", table.to_text())
        atomic_write_text(self.out / "accuracy_bars.csv", table.bars_csv())
        atomic_write_text(self.out / "compare_status.csv", table.status_csv())
        write_json(
            self.out / "report.json",
            {
                "spec_version": REPORT_VERSION,
                "command": "compare",
                "seed": config.seed,
                "averaging": config.averaging,
                "data": summary,
                "models": [
                    {
                        "kind": kind,
                        "name": name,
                        "status": status,
                        "test": report_to_dict(report) if report else None,
                    }
                    for kind, (name, report), status in zip(kinds, named_reports, statuses)
                ],
            },
        )
        return table

    def tune(self):
        """Random search over network widths, dropout and learning rate on the training split."""
        config = self.config
        _, data, _ = self.prepare()
        space = SearchSpace.from_mapping(config.search_space)
        base_hyper = build_hyper("mlp", config.model_params("mlp"))
        evaluate_trial = mlp_trial_evaluator(
            data.X_train.values, data.y_train, base_hyper, config.seed, self.callback_factory
        )
        result = random_search(
            space, config.n_trials, derive_seed(config.seed, "search"), evaluate_trial, n_jobs=config.n_jobs
        )
        header, *rows = result.log_rows()
        atomic_write_text(self.out / "trials.csv", format_csv(header, rows))
        best = result.best
        write_json(
            self.out / "best_config.json",
            {
                "trial": best.index,
                "hidden_widths": list(best.config.widths),
                "dropout": best.config.dropout,
                "learning_rate": best.config.learning_rate,
                "val_score": best.score,
            },
        )
        return result
