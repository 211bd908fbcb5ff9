# SPDX-License-Identifier: MPL-2.0
# Copyright 2024, ASAM e.V.
# This Source Code Form is subject to the terms of the Mozilla
# Public License, v. 2.0. If a copy of the MPL was not distributed
# with this file, You can obtain one at https://mozilla.org/MPL/2.0/.

from . import categorical_loss as categorical_loss
from . import expectation as expectation
from . import stopping_time as stopping_time
from . import finite_difference as finite_difference
