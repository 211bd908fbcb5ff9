# SPDX-License-Identifier: MPL-2.0
# Copyright 2024, ASAM e.V.
# This Source Code Form is subject to the terms of the Mozilla
# Public License, v. 2.0. If a copy of the MPL was not distributed
# with this file, You can obtain one at https://mozilla.org/MPL/2.0/.

from typing import Dict

import numpy as np

from categorical_gce.base import models, utils
from categorical_gce.data.dataset import EncodedDataset, Row
from categorical_gce.data.schema import FeatureSchema
from categorical_gce.model import losses, networks, product
from categorical_gce.model.params import ParamStore
from categorical_gce.model.spec import ModelSpec, validate_spec


def init_params(
    spec: ModelSpec, schema: FeatureSchema, seed: utils.SeedLike, num_covariates: int = 0
) -> ParamStore:
    validate_spec(spec, schema, num_covariates)
    if spec.kind == models.ModelKind.PRODUCT:
        return product.init_product(spec, schema)
    return networks.init_network(spec, schema, num_covariates, utils.make_rng(seed))


def forward(spec: ModelSpec, params: ParamStore, row: Row):
    """Scalar for regression, logits for classification."""
    if spec.kind == models.ModelKind.PRODUCT:
        return product.forward_product(spec, params, row)
    return networks.forward_network(spec, params, row)


def backward(
    spec: ModelSpec, params: ParamStore, row: Row, target, task: models.Task
) -> Dict[models.ParamGroupKey, np.ndarray]:
    """
    Gradient of the row loss for the groups the row touches: the Shared
    groups and the groups of the row's own symbols. Other symbols' groups are
    absent from the result, which is not the same as a zero gradient.
    """
    if spec.kind == models.ModelKind.PRODUCT:
        return product.backward_product(spec, params, row, target, task)
    return networks.backward_network(spec, params, row, target, task)


def row_loss(spec: ModelSpec, params: ParamStore, row: Row, target, task: models.Task) -> float:
    return losses.loss_value(forward(spec, params, row), target, task)


def row_losses(spec: ModelSpec, params: ParamStore, dataset: EncodedDataset) -> np.ndarray:
    return np.array(
        [row_loss(spec, params, row, row.target, dataset.task) for row in dataset.rows()]
    )


def mean_loss(spec: ModelSpec, params: ParamStore, dataset: EncodedDataset) -> float:
    return float(np.mean(row_losses(spec, params, dataset)))


def mean_metric(spec: ModelSpec, params: ParamStore, dataset: EncodedDataset) -> float:
    """MSE for regression, error rate for classification."""
    return float(
        np.mean(
            [
                losses.metric_value(forward(spec, params, row), row.target, dataset.task)
                for row in dataset.rows()
            ]
        )
    )
