# SPDX-License-Identifier: MPL-2.0
# Copyright 2024, ASAM e.V.
# This Source Code Form is subject to the terms of the Mozilla
# Public License, v. 2.0. If a copy of the MPL was not distributed
# with this file, You can obtain one at https://mozilla.org/MPL/2.0/.

"""
The categorical loss: every non-empty symbol group of every feature weighs
the same, whatever its size.

    F = (1/p) sum_k (1/|S_k|) sum_{i in S_k} f_i

Empty groups contribute nothing and p counts the non-empty groups only. The
loss is evaluated as a row-weighted sum, w_i = (1/p) sum_f 1/|S_{f, i}|,
and the weights of a dataset always add up to one.
"""

from typing import Dict

import numpy as np

from categorical_gce.base import models
from categorical_gce.data.dataset import EncodedDataset, symbol_groups
from categorical_gce.model import core
from categorical_gce.model.params import ParamStore
from categorical_gce.model.spec import ModelSpec


def row_weights(dataset: EncodedDataset) -> np.ndarray:
    groups = symbol_groups(dataset)
    non_empty = groups.non_empty()

    weights = np.zeros(len(dataset))
    for key in non_empty:
        rows = groups.rows(key)
        weights[rows] += 1.0 / rows.size
    return weights / len(non_empty)


def categorical_loss(params: ParamStore, dataset: EncodedDataset, spec: ModelSpec) -> float:
    return float(np.dot(row_weights(dataset), core.row_losses(spec, params, dataset)))


def full_categorical_gradient(
    params: ParamStore, dataset: EncodedDataset, spec: ModelSpec
) -> Dict[models.ParamGroupKey, np.ndarray]:
    """Exact gradient of categorical_loss, with zeros for untouched groups."""
    weights = row_weights(dataset)
    grads = {key: np.zeros_like(values) for key, values in params.items()}

    for weight, row in zip(weights, dataset.rows()):
        for key, grad in core.backward(spec, params, row, row.target, dataset.task).items():
            grads[key] += weight * grad

    return grads


def classic_full_gradient(
    params: ParamStore, dataset: EncodedDataset, spec: ModelSpec
) -> Dict[models.ParamGroupKey, np.ndarray]:
    """Gradient of the mean row loss, with zeros for untouched groups."""
    grads = {key: np.zeros_like(values) for key, values in params.items()}
    for row in dataset.rows():
        for key, grad in core.backward(spec, params, row, row.target, dataset.task).items():
            grads[key] += grad
    return {key: grad / len(dataset) for key, grad in grads.items()}
