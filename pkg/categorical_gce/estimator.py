# SPDX-License-Identifier: MPL-2.0
# Copyright 2024, ASAM e.V.
# This Source Code Form is subject to the terms of the Mozilla
# Public License, v. 2.0. If a copy of the MPL was not distributed
# with this file, You can obtain one at https://mozilla.org/MPL/2.0/.

"""
Batch gradient estimation with per-symbol counters.

classic: every group is divided by the batch size; groups of symbols absent
    from the batch get an explicit zero gradient and stay eligible for an
    update.
gce: a symbol group is divided by the number of batch rows carrying that
    symbol, and is left out of the update when that number is zero.
    Shared groups are divided by the batch size.
"""

from dataclasses import dataclass
from typing import Dict, FrozenSet, Mapping, Sequence

import numpy as np

from categorical_gce.base import errors, models
from categorical_gce.data.dataset import EncodedDataset
from categorical_gce.model import core
from categorical_gce.model.params import ParamStore
from categorical_gce.model.spec import ModelSpec


@dataclass
class ScaledGradient:
    grads: Dict[models.ParamGroupKey, np.ndarray]
    mask: FrozenSet[models.ParamGroupKey]


class GradAccumulator:
    """
    Gradient sums per parameter group and presence counters per
    (feature, symbol). Counters cover every schema symbol, including symbols
    of features the model has no parameters for, so that each feature's
    counters add up to the batch size.
    """

    def __init__(self, params: ParamStore):
        self.params = params
        self.sums: Dict[models.ParamGroupKey, np.ndarray] = {}
        self.counts: Dict[models.SymbolKey, int] = {
            key: 0 for key in params.schema.symbol_keys()
        }
        self.batch_size = 0

    def count(self, key: models.SymbolKey) -> int:
        return self.counts[key]


def accumulate(
    acc: GradAccumulator,
    row_grads: Mapping[models.ParamGroupKey, np.ndarray],
    row_symbols: Sequence[int],
) -> GradAccumulator:
    schema = acc.params.schema
    symbol_keys = schema.row_symbol_keys(row_symbols)

    for key, grad in row_grads.items():
        if key not in acc.params:
            raise errors.InternalError(f"gradient for {key} outside the parameter space")
        if isinstance(key, models.SymbolKey) and key not in symbol_keys:
            raise errors.InternalError(f"gradient for {key} from a row without that symbol")
        if np.shape(grad) != acc.params[key].shape:
            raise errors.InternalError(
                f"gradient shape {np.shape(grad)} does not match group {key}"
            )

    for key, grad in row_grads.items():
        if key in acc.sums:
            acc.sums[key] += grad
        else:
            acc.sums[key] = np.array(grad, dtype=np.float64)

    for key in symbol_keys:
        acc.counts[key] += 1
    acc.batch_size += 1

    return acc


def accumulate_batch(
    acc: GradAccumulator,
    spec: ModelSpec,
    dataset: EncodedDataset,
    indices: Sequence[int],
) -> GradAccumulator:
    """Accumulate the rows of a batch in the given order."""
    for index in indices:
        row = dataset.row(int(index))
        accumulate(acc, core.backward(spec, acc.params, row, row.target, dataset.task), row.symbols)
    return acc


def finalize(acc: GradAccumulator, mode: models.EstimatorMode) -> ScaledGradient:
    if acc.batch_size == 0:
        raise errors.EstimatorError("cannot finalize an empty batch")

    mode = models.EstimatorMode(mode)
    grads: Dict[models.ParamGroupKey, np.ndarray] = {}

    for key in acc.params.keys():
        summed = acc.sums.get(key)

        if isinstance(key, models.SharedKey) or mode == models.EstimatorMode.CLASSIC:
            if summed is None:
                summed = np.zeros_like(acc.params[key])
            grads[key] = summed / acc.batch_size
            continue

        count = acc.counts[key]
        if count > 0:
            grads[key] = summed / count

    if mode == models.EstimatorMode.CLASSIC:
        mask = frozenset(grads)
    else:
        mask = frozenset(
            key
            for key in grads
            if isinstance(key, models.SharedKey) or acc.counts[key] > 0
        )

    return ScaledGradient(grads=grads, mask=mask)


def reset(acc: GradAccumulator) -> GradAccumulator:
    acc.sums = {}
    for key in acc.counts:
        acc.counts[key] = 0
    acc.batch_size = 0
    return acc
