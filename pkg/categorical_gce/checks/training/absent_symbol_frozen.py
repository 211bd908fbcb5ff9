# SPDX-License-Identifier: MPL-2.0
# Copyright 2024, ASAM e.V.
# This Source Code Form is subject to the terms of the Mozilla
# Public License, v. 2.0. If a copy of the MPL was not distributed
# with this file, You can obtain one at https://mozilla.org/MPL/2.0/.

"""
A symbol missing from the training data must keep its parameters and its
optimizer state under GCE. Under the classic estimator with Adam it moves
once its first moment is non-zero, so the contrast run first trains on data
that contains the symbol and then on data that does not.
"""

import logging
from typing import Tuple

import numpy as np

from categorical_gce import basic_preconditions, constants, optim
from categorical_gce.base import models, utils
from categorical_gce.checks import fixtures
from categorical_gce.data.dataset import EncodedDataset
from categorical_gce.harness.training import train_steps
from categorical_gce.model.params import ParamStore
from categorical_gce.optim.state import OptimizerState

CHECKER_ID = "check_gce_theory_absent_symbol_frozen"
CHECKER_DESCRIPTION = (
    "Parameters and optimizer state of a symbol absent from the batches must stay "
    "bit-identical under GCE."
)
CHECKER_PRECONDITIONS = basic_preconditions.CHECKER_PRECONDITIONS
RULE_UID = f"{constants.RULE_UID_PREFIX}:training.absent_symbol_frozen"

STEPS = 50
WARM_UP_STEPS = 10
BATCH_SIZE = 2
LEARNING_RATE = 1e-2
ABSENT = models.SymbolKey("color", "red")
RED_ROW = ("red", "Rome", 11.0)


def absent_symbol_data() -> Tuple[EncodedDataset, EncodedDataset]:
    """(sales rows under a schema that also knows red, the same rows plus a red one)"""
    schema = fixtures.sales_schema(colors=("blue", "pink", "red"))
    without_red = fixtures.sales_dataset(schema)
    with_red = fixtures.sales_dataset(schema, fixtures.SALES_ROWS + (RED_ROW,))
    return without_red, with_red


def _start(kind: models.OptimizerKind, schema) -> Tuple[ParamStore, OptimizerState]:
    params = fixtures.sales_params(schema)
    params[ABSENT] = [1.0]
    hyper = optim.default_hyper(kind, LEARNING_RATE)
    return params, optim.init_state(kind, hyper, params)


def frozen_after_training(
    kind: models.OptimizerKind,
    mode: models.EstimatorMode,
    seed: utils.SeedLike,
    warm_up: bool = False,
) -> Tuple[bool, float]:
    """
    Train STEPS batches on data without red, optionally after WARM_UP_STEPS
    batches with red. Returns whether red's parameters and state were left
    untouched by the red-free phase, and how far its parameter moved.
    """
    without_red, with_red = absent_symbol_data()
    params, state = _start(kind, without_red.schema)
    spec = fixtures.sales_model()

    if warm_up:
        train_steps(spec, params, state, with_red, BATCH_SIZE, mode, WARM_UP_STEPS, (seed, 0))

    params_before = params.copy()
    state_before = state.copy()
    train_steps(spec, params, state, without_red, BATCH_SIZE, mode, STEPS, (seed, 1))

    unchanged = params.bitwise_equal(params_before, keys=[ABSENT]) and state.bitwise_equal(
        state_before, ABSENT
    )
    moved = float(np.max(np.abs(params[ABSENT] - params_before[ABSENT])))
    return unchanged, moved


def check_rule(checker_data: models.CheckerData) -> None:
    logging.info("Executing absent_symbol_frozen check")

    for kind in models.OptimizerKind:
        for warm_up in (False, True):
            unchanged, moved = frozen_after_training(
                kind, models.EstimatorMode.GCE, checker_data.seed, warm_up
            )
            phase = "after a warm-up with red" if warm_up else "from initialization"
            utils.record_claim(
                checker_data,
                CHECKER_ID,
                RULE_UID,
                f"gce+{kind.value} keeps absent red frozen for {STEPS} steps {phase}",
                computed=moved,
                reference=0.0,
                tolerance=0.0,
                passed=unchanged,
            )

    unchanged, moved = frozen_after_training(
        models.OptimizerKind.ADAM, models.EstimatorMode.CLASSIC, checker_data.seed, warm_up=True
    )
    utils.record_claim(
        checker_data,
        CHECKER_ID,
        RULE_UID,
        f"classic+adam moves absent red within {STEPS} steps after a warm-up with red",
        computed=moved,
        reference=0.0,
        tolerance=0.0,
        passed=(not unchanged) and moved > 0.0,
    )

    utils.summarize_claims(checker_data, CHECKER_ID)
