# SPDX-License-Identifier: MPL-2.0
# Copyright 2024, ASAM e.V.
# This Source Code Form is subject to the terms of the Mozilla
# Public License, v. 2.0. If a copy of the MPL was not distributed
# with this file, You can obtain one at https://mozilla.org/MPL/2.0/.

import logging

from categorical_gce import constants
from categorical_gce.base import models, utils
from categorical_gce.checks.stopping_time import expected_first_batch
from categorical_gce.theory import stopping_time

CHECKER_ID = "check_gce_theory_without_replacement_not_slower"
CHECKER_DESCRIPTION = (
    "Batches drawn without replacement must hit a subset no later on average than "
    "batches drawn with replacement. The two draw modes are simulated on independent "
    "streams, so the comparison allows for Monte Carlo noise."
)
CHECKER_PRECONDITIONS = {expected_first_batch.CHECKER_ID}
RULE_UID = f"{constants.RULE_UID_PREFIX}:stopping_time.without_replacement_not_slower"

# both modes coincide for m = 1, where only noise separates the two means
RELATIVE_TOLERANCE = expected_first_batch.RELATIVE_TOLERANCE


def check_rule(checker_data: models.CheckerData) -> None:
    logging.info("Executing without_replacement_not_slower check")

    worst_excess = float("-inf")
    worst_p1_excess = float("-inf")
    for z_size, t_size, m in expected_first_batch.grid():
        cell_seed = (checker_data.seed, z_size, t_size, m)
        mean_with, _ = stopping_time.simulate_paired(
            z_size, t_size, m, expected_first_batch.TRIALS, (*cell_seed, 0)
        )
        mean_without = stopping_time.simulate_without_replacement(
            z_size, t_size, m, expected_first_batch.TRIALS, (*cell_seed, 1)
        )
        excess = (mean_without - mean_with) / mean_with
        if excess > RELATIVE_TOLERANCE:
            logging.warning(
                f"- Cell (|Z|, |T|, m) = {(z_size, t_size, m)}: "
                f"without {mean_without}, with {mean_with}"
            )
        worst_excess = max(worst_excess, excess)
        worst_p1_excess = max(
            worst_p1_excess,
            stopping_time.stopping_time_p1(z_size, t_size, m)
            - stopping_time.stopping_time_p1_without_replacement(z_size, t_size, m),
        )

    utils.record_claim(
        checker_data,
        CHECKER_ID,
        RULE_UID,
        "largest relative excess of mean K without over with replacement",
        computed=worst_excess,
        reference=0.0,
        tolerance=RELATIVE_TOLERANCE,
        passed=worst_excess <= RELATIVE_TOLERANCE,
    )
    utils.record_claim(
        checker_data,
        CHECKER_ID,
        RULE_UID,
        "largest excess of P1 with over without replacement",
        computed=worst_p1_excess,
        reference=0.0,
        tolerance=1e-15,
        passed=worst_p1_excess <= 1e-15,
    )

    utils.summarize_claims(checker_data, CHECKER_ID)
