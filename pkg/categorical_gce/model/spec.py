# SPDX-License-Identifier: MPL-2.0
# Copyright 2024, ASAM e.V.
# This Source Code Form is subject to the terms of the Mozilla
# Public License, v. 2.0. If a copy of the MPL was not distributed
# with this file, You can obtain one at https://mozilla.org/MPL/2.0/.

from dataclasses import dataclass
from typing import Optional, Sequence, Tuple

from categorical_gce.base import errors, models
from categorical_gce.data.schema import FeatureSchema


@dataclass(frozen=True)
class ModelSpec:
    """
    productModel: prediction = product of the row's factor parameters
        (x seasonal profile entry) x covariate + shared intercept
        + per-symbol intercept. Every part is optional except that at least
        one symbol-keyed part is required.
    mlp: dense + ReLU stack over one-hot blocks (and covariates when
        use_covariates is set), linear head sized by the task.
    tabResNet: linear projection to `width`, `num_blocks` residual blocks
        (linear, ReLU, linear, skip), ReLU, linear head.
    """

    kind: models.ModelKind
    factor_features: Tuple[str, ...] = ()
    covariate_index: Optional[int] = None
    shared_intercept: bool = False
    symbol_intercept_feature: Optional[str] = None
    seasonal_feature: Optional[str] = None
    period_covariate_index: Optional[int] = None
    num_periods: int = 52
    hidden_sizes: Tuple[int, ...] = (4, 8, 4)
    width: int = 8
    num_blocks: int = 2
    use_covariates: bool = False
    task: models.Task = models.REGRESSION

    @property
    def is_network(self) -> bool:
        return self.kind in (models.ModelKind.MLP, models.ModelKind.TAB_RESNET)


def product_model(
    factor_features: Sequence[str],
    covariate_index: Optional[int] = None,
    shared_intercept: bool = False,
    symbol_intercept_feature: Optional[str] = None,
    seasonal_feature: Optional[str] = None,
    period_covariate_index: Optional[int] = None,
    num_periods: int = 52,
) -> ModelSpec:
    return ModelSpec(
        kind=models.ModelKind.PRODUCT,
        factor_features=tuple(factor_features),
        covariate_index=covariate_index,
        shared_intercept=shared_intercept,
        symbol_intercept_feature=symbol_intercept_feature,
        seasonal_feature=seasonal_feature,
        period_covariate_index=period_covariate_index,
        num_periods=num_periods,
    )


def mlp(
    hidden_sizes: Sequence[int] = (4, 8, 4),
    task: models.Task = models.REGRESSION,
    use_covariates: bool = False,
) -> ModelSpec:
    return ModelSpec(
        kind=models.ModelKind.MLP,
        hidden_sizes=tuple(hidden_sizes),
        task=task,
        use_covariates=use_covariates,
    )


def tab_resnet(
    width: int = 8,
    num_blocks: int = 2,
    task: models.Task = models.REGRESSION,
    use_covariates: bool = False,
) -> ModelSpec:
    return ModelSpec(
        kind=models.ModelKind.TAB_RESNET,
        width=width,
        num_blocks=num_blocks,
        task=task,
        use_covariates=use_covariates,
    )


def _check_covariate(index: Optional[int], num_covariates: int, what: str) -> None:
    if index is None:
        return
    if not 0 <= index < num_covariates:
        raise errors.ConfigError(
            f"{what} covariate index {index} is outside the {num_covariates} dataset covariates"
        )


def validate_spec(spec: ModelSpec, schema: FeatureSchema, num_covariates: int = 0) -> None:
    if spec.kind == models.ModelKind.PRODUCT:
        if spec.task.kind != models.TaskKind.REGRESSION:
            raise errors.ConfigError("product models only support regression")
        if len(set(spec.factor_features)) != len(spec.factor_features):
            raise errors.ConfigError(f"repeated factor features {spec.factor_features}")

        referenced = list(spec.factor_features)
        for optional_feature in (spec.symbol_intercept_feature, spec.seasonal_feature):
            if optional_feature is not None:
                referenced.append(optional_feature)
        if len(referenced) == 0:
            raise errors.ConfigError("a product model needs at least one categorical part")

        unknown = [name for name in referenced if name not in schema.feature_names]
        if len(unknown) > 0:
            raise errors.ConfigError(f"product model references unknown features {unknown}")

        _check_covariate(spec.covariate_index, num_covariates, "multiplier")
        if spec.seasonal_feature is not None:
            if spec.period_covariate_index is None:
                raise errors.ConfigError("a seasonal profile needs a period covariate")
            if spec.num_periods < 1:
                raise errors.ConfigError("a seasonal profile needs at least one period")
            _check_covariate(spec.period_covariate_index, num_covariates, "period")
        return

    if spec.kind == models.ModelKind.MLP:
        if len(spec.hidden_sizes) == 0 or any(size <= 0 for size in spec.hidden_sizes):
            raise errors.ConfigError(
                f"mlp layer sizes must be strictly positive, got {spec.hidden_sizes}"
            )
    elif spec.kind == models.ModelKind.TAB_RESNET:
        if spec.width <= 0 or spec.num_blocks < 0:
            raise errors.ConfigError(
                f"invalid resnet width {spec.width} or block count {spec.num_blocks}"
            )
    else:
        raise errors.ConfigError(f"unknown model kind {spec.kind}")

    if spec.task.output_size < 1:
        raise errors.ConfigError("the task head has no outputs")
