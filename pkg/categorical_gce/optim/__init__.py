# SPDX-License-Identifier: MPL-2.0
# Copyright 2024, ASAM e.V.
# This Source Code Form is subject to the terms of the Mozilla
# Public License, v. 2.0. If a copy of the MPL was not distributed
# with this file, You can obtain one at https://mozilla.org/MPL/2.0/.

"""
Mask-respecting SGD, AdaGrad and Adam.

Only groups in the update mask are touched: a group outside the mask keeps
bit-identical parameters and optimizer state.
"""

import types
from typing import Optional, Tuple

import numpy as np

from categorical_gce.base import errors, models
from categorical_gce.estimator import ScaledGradient
from categorical_gce.model.params import ParamStore
from categorical_gce.optim import adagrad, adam, sgd
from categorical_gce.optim.state import (
    OptimizerHyper,
    OptimizerState,
    default_hyper,
    validate_hyper,
)

_RULES = {
    models.OptimizerKind.SGD: sgd,
    models.OptimizerKind.ADAGRAD: adagrad,
    models.OptimizerKind.ADAM: adam,
}


def _rule(kind: models.OptimizerKind) -> types.ModuleType:
    return _RULES[models.OptimizerKind(kind)]


def init_state(
    kind: models.OptimizerKind,
    hyper: Optional[OptimizerHyper],
    params: ParamStore,
    step_mode: models.AdamStepMode = models.AdamStepMode.PER_KEY,
) -> OptimizerState:
    kind = models.OptimizerKind(kind)
    hyper = default_hyper(kind) if hyper is None else hyper
    validate_hyper(kind, hyper)

    rule = _rule(kind)
    return OptimizerState(
        kind=kind,
        hyper=hyper,
        step_mode=models.AdamStepMode(step_mode),
        slots={
            key: {name: np.zeros_like(values) for name in rule.SLOTS}
            for key, values in params.items()
        },
        steps={key: 0 for key in params.keys()},
    )


def apply_update(
    state: OptimizerState, params: ParamStore, scaled: ScaledGradient
) -> Tuple[OptimizerState, ParamStore]:
    """Update params and state in place for the masked groups and return both."""
    unknown = [key for key in scaled.mask if key not in params]
    if len(unknown) > 0:
        raise errors.InternalError(f"update mask references unknown groups {unknown}")

    rule = _rule(state.kind)
    state.global_step += 1

    for key in params.keys():
        if key not in scaled.mask:
            continue
        grad = scaled.grads[key]
        if grad.shape != params[key].shape:
            raise errors.InternalError(
                f"gradient shape {grad.shape} does not match group {key} of shape {params[key].shape}"
            )
        state.steps[key] += 1
        step = (
            state.global_step
            if state.step_mode == models.AdamStepMode.GLOBAL
            else state.steps[key]
        )
        rule.update(params[key], grad, state.slots[key], state.hyper, step)

    return state, params
