# SPDX-License-Identifier: MPL-2.0
# Copyright 2024, ASAM e.V.
# This Source Code Form is subject to the terms of the Mozilla
# Public License, v. 2.0. If a copy of the MPL was not distributed
# with this file, You can obtain one at https://mozilla.org/MPL/2.0/.

from categorical_gce.checks.gradients import (
    model_gradients_match_finite_differences,
    categorical_loss_gradient_matches_finite_differences,
)

CHECKER_PRECONDITIONS = {
    model_gradients_match_finite_differences.CHECKER_ID,
    categorical_loss_gradient_matches_finite_differences.CHECKER_ID,
}
