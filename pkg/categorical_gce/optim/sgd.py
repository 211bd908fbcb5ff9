# SPDX-License-Identifier: MPL-2.0
# Copyright 2024, ASAM e.V.
# This Source Code Form is subject to the terms of the Mozilla
# Public License, v. 2.0. If a copy of the MPL was not distributed
# with this file, You can obtain one at https://mozilla.org/MPL/2.0/.

from typing import Dict

import numpy as np

from categorical_gce.optim.state import OptimizerHyper

SLOTS = ()


def update(
    values: np.ndarray,
    grad: np.ndarray,
    slots: Dict[str, np.ndarray],
    hyper: OptimizerHyper,
    step: int,
) -> None:
    """Vanilla SGD, no momentum and no weight decay."""
    values -= hyper.lr * grad
