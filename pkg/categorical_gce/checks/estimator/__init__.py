# SPDX-License-Identifier: MPL-2.0
# Copyright 2024, ASAM e.V.
# This Source Code Form is subject to the terms of the Mozilla
# Public License, v. 2.0. If a copy of the MPL was not distributed
# with this file, You can obtain one at https://mozilla.org/MPL/2.0/.

from . import estimator_unbiased_exhaustive as estimator_unbiased_exhaustive
from . import estimator_unbiased_monte_carlo as estimator_unbiased_monte_carlo
from . import balanced_gradient_proportionality as balanced_gradient_proportionality
