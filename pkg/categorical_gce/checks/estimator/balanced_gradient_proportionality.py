# SPDX-License-Identifier: MPL-2.0
# Copyright 2024, ASAM e.V.
# This Source Code Form is subject to the terms of the Mozilla
# Public License, v. 2.0. If a copy of the MPL was not distributed
# with this file, You can obtain one at https://mozilla.org/MPL/2.0/.

import logging

import numpy as np

from categorical_gce import basic_preconditions, constants, estimator
from categorical_gce.base import models, utils
from categorical_gce.checks import fixtures
from categorical_gce.model.spec import product_model
from categorical_gce.theory.categorical_loss import classic_full_gradient, full_categorical_gradient

CHECKER_ID = "check_gce_theory_balanced_gradient_proportionality"
CHECKER_DESCRIPTION = (
    "On balanced single-feature data, full-batch GCE symbol gradients must be q times "
    "the classic ones."
)
CHECKER_PRECONDITIONS = basic_preconditions.CHECKER_PRECONDITIONS
RULE_UID = f"{constants.RULE_UID_PREFIX}:estimator.balanced_gradient_proportionality"

NUM_SYMBOLS = 4
PER_SYMBOL = 3
TOLERANCE = 1e-12


def check_rule(checker_data: models.CheckerData) -> None:
    logging.info("Executing balanced_gradient_proportionality check")

    rng = utils.make_rng(checker_data.seed)
    dataset = fixtures.balanced_dataset(NUM_SYMBOLS, PER_SYMBOL, rng)
    spec = product_model(("symbol",))
    params = fixtures.random_params(spec, dataset, rng)
    everything = np.arange(len(dataset))

    scaled = {}
    for mode in models.EstimatorMode:
        acc = estimator.accumulate_batch(
            estimator.GradAccumulator(params), spec, dataset, everything
        )
        scaled[mode] = estimator.finalize(acc, mode)

    worst = 0.0
    for key in params.symbol_keys():
        worst = max(
            worst,
            utils.relative_error(
                scaled[models.EstimatorMode.GCE].grads[key],
                NUM_SYMBOLS * scaled[models.EstimatorMode.CLASSIC].grads[key],
            ),
        )
    utils.record_claim(
        checker_data,
        CHECKER_ID,
        RULE_UID,
        f"full-batch gce vs {NUM_SYMBOLS} x classic symbol gradients, relative error",
        computed=worst,
        reference=0.0,
        tolerance=TOLERANCE,
    )

    # with a single feature p = q, so the categorical gradient is the classic one
    categorical = full_categorical_gradient(params, dataset, spec)
    classic = classic_full_gradient(params, dataset, spec)
    utils.record_claim(
        checker_data,
        CHECKER_ID,
        RULE_UID,
        "balanced categorical vs classic full gradient, relative error",
        computed=max(utils.relative_error(categorical[k], classic[k]) for k in params.keys()),
        reference=0.0,
        tolerance=TOLERANCE,
    )

    utils.summarize_claims(checker_data, CHECKER_ID)
