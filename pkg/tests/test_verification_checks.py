# SPDX-License-Identifier: MPL-2.0
# Copyright 2024, ASAM e.V.
# This Source Code Form is subject to the terms of the Mozilla
# Public License, v. 2.0. If a copy of the MPL was not distributed
# with this file, You can obtain one at https://mozilla.org/MPL/2.0/.

import types

import pytest
from test_setup import *

from categorical_gce.base import utils
from categorical_gce.checks import (
    estimator,
    gradients,
    loss,
    stopping_time,
    training,
)


@pytest.mark.parametrize(
    "checker,count",
    [
        (gradients.model_gradients_match_finite_differences, 7),
        (gradients.categorical_loss_gradient_matches_finite_differences, None),
        (loss.categorical_loss_reference_values, None),
        (loss.balanced_loss_identity, None),
        (estimator.estimator_unbiased_exhaustive, None),
        (estimator.estimator_unbiased_monte_carlo, None),
        (estimator.balanced_gradient_proportionality, None),
        (stopping_time.expected_first_batch, 2),
        (stopping_time.without_replacement_not_slower, None),
        (training.absent_symbol_frozen, 7),
        (training.balanced_sgd_equivalence, None),
    ],
)
def test_check_claims_hold(checker: types.ModuleType, count) -> None:
    checker_data = run_check_rule(checker, seed=0)

    check_claims(checker_data, checker.CHECKER_ID, count)


def test_stopping_time_grid() -> None:
    cells = stopping_time.expected_first_batch.grid()

    assert (5, 1, 1) in cells
    assert (10, 2, 8) in cells
    assert (50, 25, 2) in cells
    # |Z| = 5 gives |T| in {1, 2}
    assert len([cell for cell in cells if cell[0] == 5]) == 2 * 3
    assert all(1 <= t_size < z_size for z_size, t_size, _ in cells)


def test_failing_claim_registers_an_issue() -> None:
    checker = loss.categorical_loss_reference_values
    checker_data = run_check_rule(checker)

    held = utils.record_claim(
        checker_data,
        checker.CHECKER_ID,
        checker.RULE_UID,
        "forced mismatch",
        computed=1.0,
        reference=2.0,
        tolerance=0.5,
    )

    assert not held
    assert checker_data.records[-1].passed is False
    assert len(checker_data.result.get_issues_by_rule_uid(checker.RULE_UID)) == 1
    assert "FAIL" in main.format_report(checker_data.records)


def _failing_checker(precondition_ids=frozenset()) -> types.SimpleNamespace:
    def check_rule(checker_data) -> None:
        raise RuntimeError("broken check")

    return types.SimpleNamespace(
        CHECKER_ID="check_gce_theory_broken",
        CHECKER_DESCRIPTION="Always raises.",
        CHECKER_PRECONDITIONS=set(precondition_ids),
        RULE_UID=f"{constants.RULE_UID_PREFIX}:test.broken",
        check_rule=check_rule,
    )


def test_execute_checker_error_status() -> None:
    checker_data = models.CheckerData(config=Configuration(), result=create_result(), seed=0)

    main.execute_checker(_failing_checker(), checker_data)

    assert checker_data.result.get_checker_status("check_gce_theory_broken") == StatusType.ERROR


def test_execute_checker_skips_on_failed_precondition() -> None:
    checker_data = models.CheckerData(config=Configuration(), result=create_result(), seed=0)
    reference = loss.categorical_loss_reference_values
    checker_data.result.register_checker(
        checker_bundle_name=constants.BUNDLE_NAME,
        checker_id=reference.CHECKER_ID,
        description=reference.CHECKER_DESCRIPTION,
    )
    checker_data.result.register_rule_by_uid(
        checker_bundle_name=constants.BUNDLE_NAME,
        checker_id=reference.CHECKER_ID,
        rule_uid=reference.RULE_UID,
    )
    utils.record_claim(
        checker_data,
        reference.CHECKER_ID,
        reference.RULE_UID,
        "forced mismatch",
        computed=1.0,
        reference=2.0,
        tolerance=0.5,
    )
    checker_data.result.set_checker_status(
        checker_bundle_name=constants.BUNDLE_NAME,
        checker_id=reference.CHECKER_ID,
        status=StatusType.COMPLETED,
    )

    main.execute_checker(_failing_checker({reference.CHECKER_ID}), checker_data)

    assert checker_data.result.get_checker_status("check_gce_theory_broken") == StatusType.SKIPPED
