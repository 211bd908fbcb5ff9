# SPDX-License-Identifier: MPL-2.0
# Copyright 2024, ASAM e.V.
# This Source Code Form is subject to the terms of the Mozilla
# Public License, v. 2.0. If a copy of the MPL was not distributed
# with this file, You can obtain one at https://mozilla.org/MPL/2.0/.

import logging

from categorical_gce import basic_preconditions, constants
from categorical_gce.base import models, utils
from categorical_gce.checks import fixtures
from categorical_gce.model import core
from categorical_gce.model.spec import product_model
from categorical_gce.theory.categorical_loss import categorical_loss

CHECKER_ID = "check_gce_theory_balanced_loss_identity"
CHECKER_DESCRIPTION = (
    "On balanced single-feature data the categorical loss must equal the classic mean loss."
)
CHECKER_PRECONDITIONS = basic_preconditions.CHECKER_PRECONDITIONS
RULE_UID = f"{constants.RULE_UID_PREFIX}:loss.balanced_loss_identity"

TOLERANCE = 1e-12
SHAPES = ((2, 3), (4, 3), (5, 1), (7, 4))


def check_rule(checker_data: models.CheckerData) -> None:
    logging.info("Executing balanced_loss_identity check")

    spec = product_model(("symbol",))
    for index, (num_symbols, per_symbol) in enumerate(SHAPES):
        rng = utils.make_rng(checker_data.seed, index)
        dataset = fixtures.balanced_dataset(num_symbols, per_symbol, rng)
        params = fixtures.random_params(spec, dataset, rng)

        classic = core.mean_loss(spec, params, dataset)
        utils.record_claim(
            checker_data,
            CHECKER_ID,
            RULE_UID,
            f"categorical loss relative to classic loss, {num_symbols} symbols x {per_symbol} rows",
            computed=utils.relative_error(categorical_loss(params, dataset, spec), classic),
            reference=0.0,
            tolerance=TOLERANCE,
        )

    utils.summarize_claims(checker_data, CHECKER_ID)
