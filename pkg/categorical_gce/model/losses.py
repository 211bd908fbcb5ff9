# SPDX-License-Identifier: MPL-2.0
# Copyright 2024, ASAM e.V.
# This Source Code Form is subject to the terms of the Mozilla
# Public License, v. 2.0. If a copy of the MPL was not distributed
# with this file, You can obtain one at https://mozilla.org/MPL/2.0/.

"""
Training losses and reported metrics.

Regression trains and reports the squared error. Classification trains on
softmax cross-entropy and reports the error rate (1 - accuracy).
"""

from typing import Union

import numpy as np
from scipy.special import log_softmax, softmax

from categorical_gce.base import errors, models

Prediction = Union[float, np.ndarray]


def _class_index(target, task: models.Task) -> int:
    index = int(target)
    if index != target or not 0 <= index < task.num_classes:
        raise errors.DataError(
            f"invalid class index {target} for {task.num_classes} classes"
        )
    return index


def loss_value(prediction: Prediction, target, task: models.Task) -> float:
    if task.kind == models.TaskKind.REGRESSION:
        residual = float(prediction) - float(target)
        return residual * residual

    logits = np.asarray(prediction, dtype=np.float64)
    if logits.shape != (task.num_classes,):
        raise errors.InternalError(
            f"expected {task.num_classes} logits, got shape {logits.shape}"
        )
    return float(-log_softmax(logits)[_class_index(target, task)])


def loss_gradient(prediction: Prediction, target, task: models.Task) -> np.ndarray:
    """Derivative of loss_value with respect to the prediction, as an array."""
    if task.kind == models.TaskKind.REGRESSION:
        return np.array([2.0 * (float(prediction) - float(target))])

    gradient = softmax(np.asarray(prediction, dtype=np.float64))
    gradient[_class_index(target, task)] -= 1.0
    return gradient


def metric_value(prediction: Prediction, target, task: models.Task) -> float:
    if task.kind == models.TaskKind.REGRESSION:
        return loss_value(prediction, target, task)
    return float(int(np.argmax(prediction)) != _class_index(target, task))


def metric_name(task: models.Task) -> str:
    if task.kind == models.TaskKind.REGRESSION:
        return "mse"
    return "error_rate"
