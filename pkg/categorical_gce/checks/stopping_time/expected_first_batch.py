# SPDX-License-Identifier: MPL-2.0
# Copyright 2024, ASAM e.V.
# This Source Code Form is subject to the terms of the Mozilla
# Public License, v. 2.0. If a copy of the MPL was not distributed
# with this file, You can obtain one at https://mozilla.org/MPL/2.0/.

import itertools
import logging
from typing import List, Tuple

from categorical_gce import constants
from categorical_gce.base import models, utils
from categorical_gce.theory import stopping_time

CHECKER_ID = "check_gce_theory_expected_first_batch"
CHECKER_DESCRIPTION = (
    "The mean index of the first batch hitting a subset must be 1 / P1, with and "
    "without replacement."
)
CHECKER_PRECONDITIONS = set()
RULE_UID = f"{constants.RULE_UID_PREFIX}:stopping_time.expected_first_batch"

TRIALS = 100_000
RELATIVE_TOLERANCE = 0.02
Z_SIZES = (5, 10, 50)
DRAW_SIZES = (1, 2, 8)


def grid() -> List[Tuple[int, int, int]]:
    """(|Z|, |T|, m) with |T| in {1, |Z|/5, |Z|/2}, rounded down and at least 1."""
    cells = []
    for z_size, m in itertools.product(Z_SIZES, DRAW_SIZES):
        for t_size in sorted({1, max(1, z_size // 5), max(1, z_size // 2)}):
            cells.append((z_size, t_size, m))
    return cells


def simulate_grid(seed: utils.SeedLike, trials: int = TRIALS):
    """Per cell: (cell, mean with, mean without, 1/P1 with, 1/P1 without)."""
    rows = []
    for index, (z_size, t_size, m) in enumerate(grid()):
        mean_with, mean_without = stopping_time.simulate_paired(
            z_size, t_size, m, trials, (seed, index)
        )
        rows.append(
            (
                (z_size, t_size, m),
                mean_with,
                mean_without,
                1.0 / stopping_time.stopping_time_p1(z_size, t_size, m),
                1.0 / stopping_time.stopping_time_p1_without_replacement(z_size, t_size, m),
            )
        )
    return rows


def check_rule(checker_data: models.CheckerData) -> None:
    logging.info("Executing expected_first_batch check")

    worst_with = 0.0
    worst_without = 0.0
    for cell, mean_with, mean_without, expected_with, expected_without in simulate_grid(
        checker_data.seed
    ):
        error_with = abs(mean_with - expected_with) / expected_with
        error_without = abs(mean_without - expected_without) / expected_without
        if error_with > RELATIVE_TOLERANCE or error_without > RELATIVE_TOLERANCE:
            logging.warning(f"- Cell (|Z|, |T|, m) = {cell} is off: {mean_with}, {mean_without}")
        worst_with = max(worst_with, error_with)
        worst_without = max(worst_without, error_without)

    utils.record_claim(
        checker_data,
        CHECKER_ID,
        RULE_UID,
        f"worst relative error of E[K] with replacement over {len(grid())} cells",
        computed=worst_with,
        reference=0.0,
        tolerance=RELATIVE_TOLERANCE,
    )
    utils.record_claim(
        checker_data,
        CHECKER_ID,
        RULE_UID,
        f"worst relative error of E[K] without replacement over {len(grid())} cells",
        computed=worst_without,
        reference=0.0,
        tolerance=RELATIVE_TOLERANCE,
    )

    utils.summarize_claims(checker_data, CHECKER_ID)
