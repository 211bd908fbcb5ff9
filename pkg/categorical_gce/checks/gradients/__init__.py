# SPDX-License-Identifier: MPL-2.0
# Copyright 2024, ASAM e.V.
# This Source Code Form is subject to the terms of the Mozilla
# Public License, v. 2.0. If a copy of the MPL was not distributed
# with this file, You can obtain one at https://mozilla.org/MPL/2.0/.

from . import (
    model_gradients_match_finite_differences as model_gradients_match_finite_differences,
)
from . import (
    categorical_loss_gradient_matches_finite_differences as categorical_loss_gradient_matches_finite_differences,
)
