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
from categorical_gce.theory.categorical_loss import categorical_loss

CHECKER_ID = "check_gce_theory_categorical_loss_reference_values"
CHECKER_DESCRIPTION = "The categorical and classic losses of the sales table must equal their hand-derived values."
CHECKER_PRECONDITIONS = basic_preconditions.CHECKER_PRECONDITIONS
RULE_UID = f"{constants.RULE_UID_PREFIX}:loss.categorical_loss_reference_values"

TOLERANCE = 1e-9


def check_rule(checker_data: models.CheckerData) -> None:
    logging.info("Executing categorical_loss_reference_values check")

    dataset = fixtures.sales_dataset()
    spec = fixtures.sales_model()
    params = fixtures.sales_params()

    utils.record_claim(
        checker_data,
        CHECKER_ID,
        RULE_UID,
        "sales table categorical loss",
        computed=categorical_loss(params, dataset, spec),
        reference=fixtures.SALES_CATEGORICAL_LOSS,
        tolerance=TOLERANCE,
    )
    utils.record_claim(
        checker_data,
        CHECKER_ID,
        RULE_UID,
        "sales table classic mean loss",
        computed=core.mean_loss(spec, params, dataset),
        reference=fixtures.SALES_CLASSIC_LOSS,
        tolerance=TOLERANCE,
    )

    utils.summarize_claims(checker_data, CHECKER_ID)
