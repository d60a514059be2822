"""The fixed preprocessing pipeline and its serialisable fitted state.

Order: labels from the target column, stratified split, then imputer and
label encoders fitted on the training rows, SMOTE on the encoded training
matrix, scaler fitted on the (post-SMOTE) training matrix, both splits scaled.
Test rows never reach a fitted state.
"""

import logging
from dataclasses import dataclass, field
from typing import Dict, Optional, Tuple

import numpy as np

from ptsdpredict.errors import ConfigError, DataError
from ptsdpredict.preprocess.encoder import LabelEncoder, encode, fit_encoder
from ptsdpredict.preprocess.imputer import ImputerState, apply_imputer, fit_imputer
from ptsdpredict.preprocess.scaler import ScalerParams, apply_scaler, fit_scaler
from ptsdpredict.preprocess.smote import DEFAULT_K, smote_oversample
from ptsdpredict.preprocess.split import SplitIndices, stratified_split
from ptsdpredict.tabular.table import FeatureMatrix, Schema, Table
from ptsdpredict.utils.seeding import derive_seed

logger = logging.getLogger(__name__)

FORMAT_VERSION = 1


def encode_features(imputer, encoders, feature_columns, table: Table) -> FeatureMatrix:
    """Impute and label-encode the feature columns of ``table``."""
    imputed = apply_imputer(imputer, table)
    columns = [encode(encoders[name], imputed.column(name)) for name in feature_columns]
    values = np.column_stack(columns).astype(np.float64)
    return FeatureMatrix(values, tuple(feature_columns))


@dataclass(frozen=True)
class FittedPreprocessor:
    schema: Schema
    imputer: ImputerState
    encoders: Dict[str, LabelEncoder]
    scaler: ScalerParams
    split: SplitIndices
    seed: int
    smote: bool = True
    smote_k: int = DEFAULT_K
    smote_seed: Optional[int] = None

    @property
    def feature_columns(self):
        return self.schema.feature_columns

    def encode_table(self, table: Table) -> FeatureMatrix:
        return encode_features(self.imputer, self.encoders, self.feature_columns, table)

    def transform(self, table: Table) -> FeatureMatrix:
        """Impute, encode and scale new rows with the fitted state."""
        return apply_scaler(self.scaler, self.encode_table(table))

    def to_dict(self) -> dict:
        return {
            "format": "ptsdpredict.preprocessor",
            "version": FORMAT_VERSION,
            "seed": self.seed,
            "schema": self.schema.to_mapping(),
            "imputer": self.imputer.to_dict(),
            "encoders": {name: enc.to_dict() for name, enc in self.encoders.items()},
            "scaler": self.scaler.to_dict(),
            "smote": {"enabled": self.smote, "k": self.smote_k, "seed": self.smote_seed},
            "split": self.split.to_dict(),
        }

    @classmethod
    def from_dict(cls, document) -> "FittedPreprocessor":
        if document.get("version") != FORMAT_VERSION:
            raise ConfigError(
                f"Unsupported preprocessor version {document.get('version')!r}"
            )
        smote = document["smote"]
        return cls(
            schema=Schema.from_mapping(document["schema"]),
            imputer=ImputerState.from_dict(document["imputer"]),
            encoders={name: LabelEncoder.from_dict(enc) for name, enc in document["encoders"].items()},
            scaler=ScalerParams.from_dict(document["scaler"]),
            split=SplitIndices.from_dict(document["split"]),
            seed=document["seed"],
            smote=smote["enabled"],
            smote_k=smote["k"],
            smote_seed=smote["seed"],
        )


@dataclass
class PreparedData:
    X_train: FeatureMatrix
    y_train: np.ndarray
    X_test: FeatureMatrix
    y_test: np.ndarray
    n_train_original: int
    n_synthetic: int = 0
    class_counts_before_smote: Tuple[int, int] = field(default=(0, 0))

    @property
    def n_test(self) -> int:
        return self.X_test.n_rows

    def summary(self) -> dict:
        return {
            "n_train_rows": self.n_train_original,
            "n_test_rows": self.n_test,
            "n_synthetic_rows": self.n_synthetic,
            "train_class_counts": list(self.class_counts_before_smote),
            "test_class_counts": np.bincount(self.y_test, minlength=2).tolist(),
        }


def fit_transform_split(
    table: Table,
    test_fraction: float = 0.2,
    seed: int = 0,
    smote: bool = True,
    smote_k: int = DEFAULT_K,
    n_jobs: int = 1,
) -> Tuple[FittedPreprocessor, PreparedData]:
    """
    Run the whole preprocessing pipeline on a validated table.

    Returns:
        tuple: the ``FittedPreprocessor`` and the ``PreparedData`` matrices.
    """
    labels = table.labels()
    split = stratified_split(labels, test_fraction, seed)
    train_table = table.take(split.train_rows)
    test_table = table.take(split.test_rows)

    imputer = fit_imputer(train_table)
    imputed_train = apply_imputer(imputer, train_table)
    encoders = {
        name: fit_encoder(imputed_train.column(name), name)
        for name in table.feature_columns
    }

    feature_columns = table.feature_columns
    X_train = encode_features(imputer, encoders, feature_columns, train_table)
    X_test = encode_features(imputer, encoders, feature_columns, test_table)
    y_train = labels[list(split.train_rows)]
    y_test = labels[list(split.test_rows)]
    counts_before = tuple(int(c) for c in np.bincount(y_train, minlength=2))

    smote_seed = derive_seed(seed, "smote") if smote else None
    n_original = X_train.n_rows
    if smote:
        X_train, y_train = smote_oversample(X_train, y_train, k=smote_k, seed=smote_seed, n_jobs=n_jobs)
    n_synthetic = X_train.n_rows - n_original

    scaler = fit_scaler(X_train)
    X_train = apply_scaler(scaler, X_train)
    X_test = apply_scaler(scaler, X_test)
    if not (X_train.is_finite() and X_test.is_finite()):
        raise DataError("Preprocessing produced non-finite feature values")

    fitted = FittedPreprocessor(
        schema=table.schema,
        imputer=imputer,
        encoders=encoders,
        scaler=scaler,
        split=split,
        seed=seed,
        smote=smote,
        smote_k=smote_k,
        smote_seed=smote_seed,
    )
    logger.info(
        f"Preprocessed {table.n_rows} rows: {n_original} train (+{n_synthetic} synthetic), "
        f"{X_test.n_rows} test"
    )
    return fitted, PreparedData(
        X_train=X_train,
        y_train=y_train,
        X_test=X_test,
        y_test=y_test,
        n_train_original=n_original,
        n_synthetic=n_synthetic,
        class_counts_before_smote=counts_before,
    )
