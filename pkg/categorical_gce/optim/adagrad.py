# SPDX-License-Identifier: MPL-2.0
# Copyright 2024, ASAM e.V.
# This Source Code Form is subject to the terms of the Mozilla
# Public License, v. 2.0. If a copy of the MPL was not distributed
# with this file, You can obtain one at https://mozilla.org/MPL/2.0/.

from typing import Dict

import numpy as np

from categorical_gce.optim.state import OptimizerHyper

SLOTS = ("sum",)


def update(
    values: np.ndarray,
    grad: np.ndarray,
    slots: Dict[str, np.ndarray],
    hyper: OptimizerHyper,
    step: int,
) -> None:
    state_sum = slots["sum"]
    state_sum += grad * grad
    values -= hyper.lr * grad / (np.sqrt(state_sum) + hyper.eps)
