# SPDX-License-Identifier: MPL-2.0
# Copyright 2024, ASAM e.V.
# This Source Code Form is subject to the terms of the Mozilla
# Public License, v. 2.0. If a copy of the MPL was not distributed
# with this file, You can obtain one at https://mozilla.org/MPL/2.0/.

import logging

from categorical_gce import constants
from categorical_gce.base import models, utils
from categorical_gce.checks import fixtures
from categorical_gce.theory.categorical_loss import categorical_loss, full_categorical_gradient
from categorical_gce.theory.finite_difference import finite_difference, max_relative_error

CHECKER_ID = "check_gce_theory_categorical_loss_gradient_matches_finite_differences"
CHECKER_DESCRIPTION = (
    "The full gradient of the categorical loss must match its central finite differences."
)
CHECKER_PRECONDITIONS = set()
RULE_UID = (
    f"{constants.RULE_UID_PREFIX}:gradients.categorical_loss_gradient_matches_finite_differences"
)

TOLERANCE = 1e-8


def check_rule(checker_data: models.CheckerData) -> None:
    logging.info("Executing categorical_loss_gradient_matches_finite_differences check")

    dataset = fixtures.sales_dataset()
    spec = fixtures.sales_model()
    params = fixtures.sales_params()

    analytic = full_categorical_gradient(params, dataset, spec)
    numeric = finite_difference(lambda p: categorical_loss(p, dataset, spec), params)

    utils.record_claim(
        checker_data,
        CHECKER_ID,
        RULE_UID,
        "sales table categorical loss gradient max relative error",
        computed=max_relative_error(analytic, numeric),
        reference=0.0,
        tolerance=TOLERANCE,
    )

    utils.summarize_claims(checker_data, CHECKER_ID)
