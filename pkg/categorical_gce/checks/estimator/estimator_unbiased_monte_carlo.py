# SPDX-License-Identifier: MPL-2.0
# Copyright 2024, ASAM e.V.
# This Source Code Form is subject to the terms of the Mozilla
# Public License, v. 2.0. If a copy of the MPL was not distributed
# with this file, You can obtain one at https://mozilla.org/MPL/2.0/.

import logging

import numpy as np

from categorical_gce import basic_preconditions, constants
from categorical_gce.base import models, utils
from categorical_gce.checks import fixtures
from categorical_gce.data.dataset import symbol_groups
from categorical_gce.theory.expectation import group_scores, subset_estimator_expectation

CHECKER_ID = "check_gce_theory_estimator_unbiased_monte_carlo"
CHECKER_DESCRIPTION = (
    "Sampled per-symbol estimates must converge to the exact group gradient at the "
    "Monte Carlo rate."
)
CHECKER_PRECONDITIONS = basic_preconditions.CHECKER_PRECONDITIONS
RULE_UID = f"{constants.RULE_UID_PREFIX}:estimator.estimator_unbiased_monte_carlo"

DRAW_SIZES = (2, 4)
TRIALS = 100_000
RELATIVE_TOLERANCE = 0.02
# RMS error ratio between SHORT_TRIALS and TRIALS should be near sqrt(100) = 10
SHORT_TRIALS = 1_000
SHORT_REPLICATIONS = 500
LONG_REPLICATIONS = 50
RATIO_RANGE = (5.0, 20.0)


def _rms_error(scores, spec, trials, replications, seed) -> float:
    errors = [
        subset_estimator_expectation(
            scores, spec, models.ExpectationMethod.MONTE_CARLO, trials, (*seed, replication)
        ).max_abs_error
        for replication in range(replications)
    ]
    return float(np.sqrt(np.mean(np.square(errors))))


def check_rule(checker_data: models.CheckerData) -> None:
    logging.info("Executing estimator_unbiased_monte_carlo check")

    dataset = fixtures.sales_dataset()
    spec = fixtures.sales_model()
    params = fixtures.sales_params()
    groups = symbol_groups(dataset)

    worst_error = 0.0
    ratios = []
    for key_index, key in enumerate(groups.non_empty()):
        scores = group_scores(spec, params, dataset, key)
        rows = groups.rows(key)
        constant = bool(np.all(scores[rows] == scores[rows[0]]))

        for m in DRAW_SIZES:
            draws = models.DrawSpec(
                z_size=len(dataset), subset_rows=tuple(int(r) for r in rows), m=m
            )
            seed = (checker_data.seed, key_index, m)
            result = subset_estimator_expectation(
                scores, draws, models.ExpectationMethod.MONTE_CARLO, TRIALS, seed
            )
            worst_error = max(worst_error, result.relative_error)

            if constant:
                # every kept draw averages the same score, there is no error to shrink
                continue
            short = _rms_error(scores, draws, SHORT_TRIALS, SHORT_REPLICATIONS, (*seed, 1))
            long = _rms_error(scores, draws, TRIALS, LONG_REPLICATIONS, (*seed, 2))
            ratios.append(short / long)

    utils.record_claim(
        checker_data,
        CHECKER_ID,
        RULE_UID,
        f"sales table worst relative error at {TRIALS} trials, m in {DRAW_SIZES}",
        computed=worst_error,
        reference=0.0,
        tolerance=RELATIVE_TOLERANCE,
    )
    utils.record_claim(
        checker_data,
        CHECKER_ID,
        RULE_UID,
        f"smallest RMS error ratio {SHORT_TRIALS} vs {TRIALS} trials",
        computed=min(ratios),
        reference=RATIO_RANGE[0],
        tolerance=0.0,
        passed=min(ratios) >= RATIO_RANGE[0],
    )
    utils.record_claim(
        checker_data,
        CHECKER_ID,
        RULE_UID,
        f"largest RMS error ratio {SHORT_TRIALS} vs {TRIALS} trials",
        computed=max(ratios),
        reference=RATIO_RANGE[1],
        tolerance=0.0,
        passed=max(ratios) <= RATIO_RANGE[1],
    )

    utils.summarize_claims(checker_data, CHECKER_ID)
