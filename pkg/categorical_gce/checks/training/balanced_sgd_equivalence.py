# SPDX-License-Identifier: MPL-2.0
# Copyright 2024, ASAM e.V.
# This Source Code Form is subject to the terms of the Mozilla
# Public License, v. 2.0. If a copy of the MPL was not distributed
# with this file, You can obtain one at https://mozilla.org/MPL/2.0/.

import logging

import numpy as np

from categorical_gce import basic_preconditions, constants, optim
from categorical_gce.base import models, utils
from categorical_gce.checks import fixtures
from categorical_gce.harness.training import train_batch
from categorical_gce.model import core
from categorical_gce.model.spec import product_model

CHECKER_ID = "check_gce_theory_balanced_sgd_equivalence"
CHECKER_DESCRIPTION = (
    "On balanced single-feature data, full-batch SGD with GCE at rate a must follow "
    "classic SGD at rate q * a."
)
CHECKER_PRECONDITIONS = basic_preconditions.CHECKER_PRECONDITIONS
RULE_UID = f"{constants.RULE_UID_PREFIX}:training.balanced_sgd_equivalence"

NUM_SYMBOLS = 4
PER_SYMBOL = 3
STEPS = 10
LEARNING_RATE = 0.01
TOLERANCE = 1e-12


def trajectory_gap(seed: utils.SeedLike) -> float:
    """Largest relative parameter gap between the two runs over all steps."""
    rng = utils.make_rng(seed)
    dataset = fixtures.balanced_dataset(NUM_SYMBOLS, PER_SYMBOL, rng)
    spec = product_model(("symbol",))
    start = core.init_params(spec, dataset.schema, seed=0)
    everything = np.arange(len(dataset))

    runs = {}
    for mode, lr in (
        (models.EstimatorMode.GCE, LEARNING_RATE),
        (models.EstimatorMode.CLASSIC, NUM_SYMBOLS * LEARNING_RATE),
    ):
        params = start.copy()
        state = optim.init_state(
            models.OptimizerKind.SGD, optim.default_hyper(models.OptimizerKind.SGD, lr), params
        )
        runs[mode] = (params, state)

    worst = 0.0
    for _ in range(STEPS):
        for mode, (params, state) in runs.items():
            train_batch(spec, params, state, dataset, everything, mode)
        gce_params = runs[models.EstimatorMode.GCE][0]
        classic_params = runs[models.EstimatorMode.CLASSIC][0]
        for key in gce_params.keys():
            worst = max(worst, utils.relative_error(gce_params[key], classic_params[key]))
    return worst


def check_rule(checker_data: models.CheckerData) -> None:
    logging.info("Executing balanced_sgd_equivalence check")

    utils.record_claim(
        checker_data,
        CHECKER_ID,
        RULE_UID,
        f"gce(lr a) vs classic(lr {NUM_SYMBOLS}a) over {STEPS} full-batch SGD steps",
        computed=trajectory_gap(checker_data.seed),
        reference=0.0,
        tolerance=TOLERANCE,
    )

    utils.summarize_claims(checker_data, CHECKER_ID)
