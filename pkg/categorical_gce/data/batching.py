# SPDX-License-Identifier: MPL-2.0
# Copyright 2024, ASAM e.V.
# This Source Code Form is subject to the terms of the Mozilla
# Public License, v. 2.0. If a copy of the MPL was not distributed
# with this file, You can obtain one at https://mozilla.org/MPL/2.0/.

from typing import List, Optional, Union

import numpy as np

from categorical_gce.base import errors, models, utils
from categorical_gce.data.dataset import EncodedDataset


def make_batches(
    dataset: Union[EncodedDataset, int],
    batch_size: int,
    seed: utils.SeedLike,
    mode: models.BatchMode = models.BatchMode.PARTITION,
    num_batches: Optional[int] = None,
) -> List[np.ndarray]:
    """
    Split row indices into batches.

    partition: one shuffled epoch, ceil(n / batch_size) batches, the last one
        possibly shorter. Every row is visited exactly once.
    withReplacement: independent batches of exactly batch_size rows drawn
        uniformly with replacement.
    withoutReplacement: independent batches of min(batch_size, n) distinct
        rows.

    The sampling modes produce ceil(n / batch_size) batches unless
    num_batches is given.
    """
    n = dataset if isinstance(dataset, int) else len(dataset)
    if batch_size <= 0:
        raise errors.ConfigError(f"batch size must be at least 1, got {batch_size}")
    if n <= 0:
        raise errors.DataError("cannot batch an empty dataset")

    rng = utils.make_rng(seed)
    mode = models.BatchMode(mode)

    if mode == models.BatchMode.PARTITION:
        permutation = rng.permutation(n)
        return [permutation[start : start + batch_size] for start in range(0, n, batch_size)]

    if num_batches is None:
        num_batches = -(-n // batch_size)

    if mode == models.BatchMode.WITH_REPLACEMENT:
        draws = rng.integers(0, n, size=(num_batches, batch_size))
        return [draws[i] for i in range(num_batches)]

    size = min(batch_size, n)
    return [rng.choice(n, size=size, replace=False) for _ in range(num_batches)]
