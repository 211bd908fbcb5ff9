# SPDX-License-Identifier: MPL-2.0
# Copyright 2024, ASAM e.V.
# This Source Code Form is subject to the terms of the Mozilla
# Public License, v. 2.0. If a copy of the MPL was not distributed
# with this file, You can obtain one at https://mozilla.org/MPL/2.0/.

from dataclasses import dataclass, field, replace
from typing import Dict, Optional

import numpy as np

from categorical_gce.base import errors, models


@dataclass(frozen=True)
class OptimizerHyper:
    lr: float
    beta1: float = 0.9
    beta2: float = 0.999
    eps: float = 1e-8


DEFAULT_HYPER = {
    models.OptimizerKind.SGD: OptimizerHyper(lr=1e-2),
    models.OptimizerKind.ADAGRAD: OptimizerHyper(lr=1e-2, eps=1e-10),
    models.OptimizerKind.ADAM: OptimizerHyper(lr=1e-3, beta1=0.9, beta2=0.999, eps=1e-8),
}


def default_hyper(kind: models.OptimizerKind, lr: Optional[float] = None) -> OptimizerHyper:
    hyper = DEFAULT_HYPER[models.OptimizerKind(kind)]
    if lr is not None:
        hyper = replace(hyper, lr=lr)
    return hyper


def validate_hyper(kind: models.OptimizerKind, hyper: OptimizerHyper) -> None:
    if not hyper.lr > 0.0:
        raise errors.ConfigError(f"learning rate must be positive, got {hyper.lr}")
    if hyper.eps < 0.0:
        raise errors.ConfigError(f"epsilon must be non-negative, got {hyper.eps}")
    if kind == models.OptimizerKind.ADAM:
        for name, beta in (("beta1", hyper.beta1), ("beta2", hyper.beta2)):
            if not 0.0 <= beta < 1.0:
                raise errors.ConfigError(f"{name} must be in [0, 1), got {beta}")


@dataclass
class OptimizerState:
    """
    Per-group optimizer state. `steps` counts the updates each group has
    received; `global_step` counts apply_update calls.
    """

    kind: models.OptimizerKind
    hyper: OptimizerHyper
    step_mode: models.AdamStepMode = models.AdamStepMode.PER_KEY
    slots: Dict[models.ParamGroupKey, Dict[str, np.ndarray]] = field(default_factory=dict)
    steps: Dict[models.ParamGroupKey, int] = field(default_factory=dict)
    global_step: int = 0

    def copy(self) -> "OptimizerState":
        return OptimizerState(
            kind=self.kind,
            hyper=self.hyper,
            step_mode=self.step_mode,
            slots={
                key: {name: values.copy() for name, values in slots.items()}
                for key, slots in self.slots.items()
            },
            steps=dict(self.steps),
            global_step=self.global_step,
        )

    def bitwise_equal(self, other: "OptimizerState", key: models.ParamGroupKey) -> bool:
        """Whether the state of one group is identical in both states."""
        if self.steps.get(key) != other.steps.get(key):
            return False
        mine, theirs = self.slots.get(key, {}), other.slots.get(key, {})
        if mine.keys() != theirs.keys():
            return False
        return all(mine[name].tobytes() == theirs[name].tobytes() for name in mine)
