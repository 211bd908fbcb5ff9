# SPDX-License-Identifier: MPL-2.0
# Copyright 2024, ASAM e.V.
# This Source Code Form is subject to the terms of the Mozilla
# Public License, v. 2.0. If a copy of the MPL was not distributed
# with this file, You can obtain one at https://mozilla.org/MPL/2.0/.

from typing import Callable, Dict, Iterable, Optional

import numpy as np

from categorical_gce.base import errors, models, utils
from categorical_gce.data.dataset import Row
from categorical_gce.model import core
from categorical_gce.model.params import ParamStore
from categorical_gce.model.spec import ModelSpec

DEFAULT_STEP = 1e-5


def finite_difference(
    func: Callable[[ParamStore], float],
    params: ParamStore,
    step: float = DEFAULT_STEP,
    keys: Optional[Iterable[models.ParamGroupKey]] = None,
) -> Dict[models.ParamGroupKey, np.ndarray]:
    """
    Central differences (f(theta + h) - f(theta - h)) / 2h, one coordinate at
    a time, on a copy of params.
    """
    if not step > 0.0:
        raise errors.ConfigError(f"finite difference step must be positive, got {step}")

    work = params.copy()
    grads = {}
    for key in work.keys() if keys is None else keys:
        values = work[key]
        grad = np.zeros_like(values)
        for index in np.ndindex(values.shape):
            original = values[index]
            values[index] = original + step
            plus = func(work)
            values[index] = original - step
            minus = func(work)
            values[index] = original
            grad[index] = (plus - minus) / (2.0 * step)
        grads[key] = grad
    return grads


def finite_difference_gradient(
    spec: ModelSpec,
    params: ParamStore,
    row: Row,
    target,
    task: models.Task = models.REGRESSION,
    step: float = DEFAULT_STEP,
) -> Dict[models.ParamGroupKey, np.ndarray]:
    """Row-loss gradient for every group; groups the row does not touch are zero."""
    return finite_difference(
        lambda candidate: core.row_loss(spec, candidate, row, target, task), params, step
    )


def max_relative_error(
    analytic: Dict[models.ParamGroupKey, np.ndarray],
    numeric: Dict[models.ParamGroupKey, np.ndarray],
) -> float:
    """
    Worst relative error over the groups of `numeric`; a group missing from
    `analytic` counts as zero.
    """
    worst = 0.0
    for key, reference in numeric.items():
        computed = analytic.get(key, np.zeros_like(reference))
        worst = max(worst, utils.relative_error(computed, reference))
    return worst
