# SPDX-License-Identifier: MPL-2.0
# Copyright 2024, ASAM e.V.
# This Source Code Form is subject to the terms of the Mozilla
# Public License, v. 2.0. If a copy of the MPL was not distributed
# with this file, You can obtain one at https://mozilla.org/MPL/2.0/.

"""
Experiment configuration.

Values come from three layers, later ones winning: the TrainConfig defaults,
an optional qc_baselib configuration file (global parameters named like the
dataclass fields, e.g. ``batch_size``), and explicit command-line flags.
"""

import dataclasses
import logging
from dataclasses import dataclass
from typing import Any, Dict, Mapping, Optional, Tuple

from qc_baselib import Configuration

from categorical_gce import constants
from categorical_gce.base import errors, models, utils
from categorical_gce.data import synthetic
from categorical_gce.data.dataset import (
    EncodedDataset,
    infer_classes,
    load_csv,
    minmax_scale,
    split_train_test,
)
from categorical_gce.data.schema import load_layout, parse_task
from categorical_gce.model import spec as model_spec
from categorical_gce.model.spec import ModelSpec


@dataclass(frozen=True)
class SyntheticSpec:
    num_features: int = 1
    cardinalities: Tuple[int, ...] = (50,)
    distribution: models.SymbolDistribution = models.SymbolDistribution.ZIPF
    zipf_exponent: float = 1.5
    n: int = 2000
    noise_std: float = 0.1


@dataclass(frozen=True)
class TrainConfig:
    # data
    data: Optional[str] = None
    layout: Optional[str] = None
    test_data: Optional[str] = None
    synthetic: Optional[SyntheticSpec] = None
    test_fraction: float = constants.DEFAULT_TEST_FRACTION
    scale_covariates: bool = False
    data_seed: int = 0
    # model
    model: models.ModelKind = models.ModelKind.PRODUCT
    factors: Tuple[str, ...] = ()
    covariate: Optional[str] = None
    intercept: bool = False
    symbol_intercept: Optional[str] = None
    seasonal: Optional[str] = None
    period: Optional[str] = None
    num_periods: int = 52
    hidden_sizes: Tuple[int, ...] = (4, 8, 4)
    width: int = 8
    blocks: int = 2
    use_covariates: bool = False
    # optimization
    optimizer: models.OptimizerKind = models.OptimizerKind.ADAM
    lr: Optional[float] = None
    adam_step: models.AdamStepMode = models.AdamStepMode.PER_KEY
    estimator: models.EstimatorMode = models.EstimatorMode.GCE
    batch_size: int = 32
    epochs: int = 10
    seed: int = 0
    repeats: int = 1

    def validate(self) -> "TrainConfig":
        if self.batch_size < 1:
            raise errors.ConfigError(f"batch size must be at least 1, got {self.batch_size}")
        if self.epochs < 1:
            raise errors.ConfigError(f"epochs must be at least 1, got {self.epochs}")
        if self.repeats < 1:
            raise errors.ConfigError(f"repeats must be at least 1, got {self.repeats}")
        if self.lr is not None and not self.lr > 0.0:
            raise errors.ConfigError(f"learning rate must be positive, got {self.lr}")
        if self.data is None and self.synthetic is None:
            raise errors.ConfigError("either a data file or a synthetic dataset is required")
        if self.data is not None and self.layout is None:
            raise errors.ConfigError("a data file needs a layout file")
        return self

    def label(self) -> str:
        return f"{self.model.value}/{self.optimizer.value}/{self.estimator.value}/b{self.batch_size}"


@dataclass(frozen=True)
class PreparedData:
    """Train and test sets plus the model spec built for them."""

    train: EncodedDataset
    test: EncodedDataset
    spec: ModelSpec
    name: str = "synthetic"


_ENUM_FIELDS = {
    "model": models.ModelKind,
    "optimizer": models.OptimizerKind,
    "adam_step": models.AdamStepMode,
    "estimator": models.EstimatorMode,
}
_INT_FIELDS = {"num_periods", "width", "blocks", "batch_size", "epochs", "seed", "repeats", "data_seed"}
_FLOAT_FIELDS = {"test_fraction", "lr"}
_BOOL_FIELDS = {"scale_covariates", "intercept", "use_covariates"}
_LIST_FIELDS = {"factors": str, "hidden_sizes": int}
_SYNTHETIC_FIELDS = {
    "num_features": int,
    "cardinality": None,
    "distribution": models.SymbolDistribution,
    "zipf_exponent": float,
    "n_rows": int,
    "noise_std": float,
}


def _coerce(name: str, value: Any) -> Any:
    if name in _ENUM_FIELDS:
        try:
            return _ENUM_FIELDS[name](value)
        except ValueError as e:
            raise errors.ConfigError(f"invalid value '{value}' for {name}") from e
    if name in _INT_FIELDS:
        result = utils.to_int(value)
    elif name in _FLOAT_FIELDS:
        result = utils.to_float(value)
    elif name in _BOOL_FIELDS:
        result = utils.to_bool(value)
    elif name in _LIST_FIELDS:
        if isinstance(value, (list, tuple)):
            items = list(value)
        else:
            items = utils.split_items(value)
        try:
            return tuple(_LIST_FIELDS[name](item) for item in items)
        except ValueError as e:
            raise errors.ConfigError(f"invalid list '{value}' for {name}") from e
    else:
        return None if value is None else str(value)

    if result is None:
        raise errors.ConfigError(f"invalid value '{value}' for {name}")
    return result


def _synthetic_from(values: Mapping[str, Any], base: Optional[SyntheticSpec]) -> SyntheticSpec:
    spec = base or SyntheticSpec()
    changes = {}
    for name, value in values.items():
        if name == "cardinality":
            cardinalities = tuple(int(item) for item in utils.split_items(str(value)))
            changes["cardinalities"] = cardinalities
        elif name == "n_rows":
            changes["n"] = _coerce_number(int, name, value)
        elif name == "distribution":
            changes["distribution"] = models.SymbolDistribution(value)
        else:
            changes[name] = _coerce_number(_SYNTHETIC_FIELDS[name], name, value)

    spec = dataclasses.replace(spec, **changes)
    if len(spec.cardinalities) == 1 and spec.num_features > 1:
        spec = dataclasses.replace(spec, cardinalities=spec.cardinalities * spec.num_features)
    return spec


def _coerce_number(kind, name: str, value: Any):
    result = utils.to_int(value) if kind is int else utils.to_float(value)
    if result is None:
        raise errors.ConfigError(f"invalid value '{value}' for {name}")
    return result


def merge_config(
    base: TrainConfig, values: Mapping[str, Any], synthetic_requested: bool = False
) -> TrainConfig:
    """
    Apply `values` (already filtered of unset entries) on top of `base`.
    Keys are TrainConfig fields or synthetic dataset fields.
    """
    fields = {f.name for f in dataclasses.fields(TrainConfig)}
    changes: Dict[str, Any] = {}
    synthetic_values: Dict[str, Any] = {}

    for name, value in values.items():
        if value is None:
            continue
        if name == "synthetic":
            synthetic_requested = synthetic_requested or bool(utils.to_bool(value))
        elif name in _SYNTHETIC_FIELDS:
            synthetic_values[name] = value
        elif name in fields and name != "synthetic":
            changes[name] = _coerce(name, value)
        else:
            raise errors.ConfigError(f"unknown configuration parameter '{name}'")

    config = dataclasses.replace(base, **changes)
    if synthetic_requested or len(synthetic_values) > 0 or config.synthetic is not None:
        if config.data is None:
            config = dataclasses.replace(
                config, synthetic=_synthetic_from(synthetic_values, config.synthetic)
            )
    return config


def config_file_values(config_path: Optional[str]) -> Dict[str, Any]:
    """Global parameters of a qc_baselib configuration file that TrainConfig knows."""
    if config_path is None:
        return {}

    config = Configuration()
    try:
        config.load_from_file(xml_file_path=config_path)
    except Exception as e:
        raise errors.ConfigError(f"cannot read configuration file {config_path}: {e}") from e

    values = {}
    names = [f.name for f in dataclasses.fields(TrainConfig) if f.name != "synthetic"]
    for name in names + list(_SYNTHETIC_FIELDS) + ["synthetic"]:
        value = config.get_config_param(name)
        if value is not None:
            values[name] = value

    logging.info(f"Loaded {len(values)} parameters from {config_path}")
    return values


def build_model_spec(config: TrainConfig, dataset: EncodedDataset) -> ModelSpec:
    if config.model == models.ModelKind.MLP:
        return model_spec.mlp(
            hidden_sizes=config.hidden_sizes,
            task=dataset.task,
            use_covariates=config.use_covariates,
        )
    if config.model == models.ModelKind.TAB_RESNET:
        return model_spec.tab_resnet(
            width=config.width,
            num_blocks=config.blocks,
            task=dataset.task,
            use_covariates=config.use_covariates,
        )

    factors = config.factors
    if len(factors) == 0 and config.symbol_intercept is None:
        factors = dataset.schema.feature_names
    return model_spec.product_model(
        factor_features=factors,
        covariate_index=(
            dataset.covariate_index(config.covariate) if config.covariate else None
        ),
        shared_intercept=config.intercept,
        symbol_intercept_feature=config.symbol_intercept,
        seasonal_feature=config.seasonal,
        period_covariate_index=(dataset.covariate_index(config.period) if config.period else None),
        num_periods=config.num_periods,
    )


def load_data(config: TrainConfig) -> PreparedData:
    """Build the datasets once per configuration; seeds of repeats share them."""
    config.validate()

    if config.data is None:
        spec = config.synthetic
        dataset, _ = synthetic.generate_synthetic(
            num_features=spec.num_features,
            cardinalities=spec.cardinalities,
            distribution=spec.distribution,
            n=spec.n,
            noise_std=spec.noise_std,
            seed=config.data_seed,
            zipf_exponent=spec.zipf_exponent,
        )
        train, test = split_train_test(dataset, config.test_fraction, config.data_seed)
        name = "synthetic"
    else:
        layout = load_layout(config.layout)
        task = layout.task
        if task.kind == models.TaskKind.CLASSIFICATION and task.num_classes == 0:
            task = parse_task(task.kind.value, infer_classes(config.data, layout.target_column))

        schema = layout.schema_from(config.data)
        dataset = load_csv(
            config.data, schema, layout.target_column, layout.covariate_columns, task
        )
        if config.test_data is not None:
            train = dataset
            test = load_csv(
                config.test_data, schema, layout.target_column, layout.covariate_columns, task
            )
        else:
            train, test = split_train_test(dataset, config.test_fraction, config.data_seed)
        name = config.data

    if config.scale_covariates:
        train, test = minmax_scale(train, test)

    logging.info(f"Prepared {len(train)} train and {len(test)} test rows from {name}")
    return PreparedData(train=train, test=test, spec=build_model_spec(config, train), name=name)
