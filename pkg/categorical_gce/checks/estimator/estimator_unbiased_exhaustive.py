# SPDX-License-Identifier: MPL-2.0
# Copyright 2024, ASAM e.V.
# This Source Code Form is subject to the terms of the Mozilla
# Public License, v. 2.0. If a copy of the MPL was not distributed
# with this file, You can obtain one at https://mozilla.org/MPL/2.0/.

import logging

from categorical_gce import basic_preconditions, constants
from categorical_gce.base import models, utils
from categorical_gce.checks import fixtures
from categorical_gce.data.dataset import symbol_groups
from categorical_gce.theory.expectation import estimator_expectation

CHECKER_ID = "check_gce_theory_estimator_unbiased_exhaustive"
CHECKER_DESCRIPTION = (
    "Conditioned on hitting a symbol group, the per-symbol estimator must average to "
    "the exact group gradient over all ordered draws."
)
CHECKER_PRECONDITIONS = basic_preconditions.CHECKER_PRECONDITIONS
RULE_UID = f"{constants.RULE_UID_PREFIX}:estimator.estimator_unbiased_exhaustive"

DRAW_SIZES = (1, 2, 3)
TOLERANCE = 1e-10
SALES_TOLERANCE = 1e-12


def check_rule(checker_data: models.CheckerData) -> None:
    logging.info("Executing estimator_unbiased_exhaustive check")

    worst = 0.0
    worst_case = "none"
    cases = 0
    for dataset, spec, params in fixtures.toy_instances(checker_data.seed):
        for key in symbol_groups(dataset).non_empty():
            for m in DRAW_SIZES:
                result = estimator_expectation(spec, params, dataset, key, m)
                cases += 1
                if result.max_abs_error >= worst:
                    worst = result.max_abs_error
                    worst_case = f"|Z|={len(dataset)}, group {key}, m={m}"

    logging.info(f"- Worst of {cases} enumerated cases: {worst_case}")
    utils.record_claim(
        checker_data,
        CHECKER_ID,
        RULE_UID,
        f"max abs error over {cases} toy cases with |Z| <= 6, m <= 3",
        computed=worst,
        reference=0.0,
        tolerance=TOLERANCE,
    )

    pink = models.SymbolKey("color", "pink")
    result = estimator_expectation(
        fixtures.sales_model(), fixtures.sales_params(), fixtures.sales_dataset(), pink, m=2
    )
    utils.record_claim(
        checker_data,
        CHECKER_ID,
        RULE_UID,
        "sales table pink group, m=2, max abs error",
        computed=result.max_abs_error,
        reference=0.0,
        tolerance=SALES_TOLERANCE,
    )

    utils.summarize_claims(checker_data, CHECKER_ID)
