# SPDX-License-Identifier: MPL-2.0
# Copyright 2024, ASAM e.V.
# This Source Code Form is subject to the terms of the Mozilla
# Public License, v. 2.0. If a copy of the MPL was not distributed
# with this file, You can obtain one at https://mozilla.org/MPL/2.0/.

from typing import Dict

import numpy as np

from categorical_gce.optim.state import OptimizerHyper

SLOTS = ("exp_avg", "exp_avg_sq")


def update(
    values: np.ndarray,
    grad: np.ndarray,
    slots: Dict[str, np.ndarray],
    hyper: OptimizerHyper,
    step: int,
) -> None:
    """
    Adam with bias correction at `step`. A zero gradient still moves the
    parameter when the first moment is non-zero.
    """
    exp_avg = slots["exp_avg"]
    exp_avg_sq = slots["exp_avg_sq"]

    exp_avg *= hyper.beta1
    exp_avg += (1.0 - hyper.beta1) * grad
    exp_avg_sq *= hyper.beta2
    exp_avg_sq += (1.0 - hyper.beta2) * grad * grad

    bias_correction1 = 1.0 - hyper.beta1**step
    bias_correction2 = 1.0 - hyper.beta2**step

    denom = np.sqrt(exp_avg_sq / bias_correction2) + hyper.eps
    values -= hyper.lr * (exp_avg / bias_correction1) / denom
