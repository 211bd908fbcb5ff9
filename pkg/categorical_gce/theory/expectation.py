# SPDX-License-Identifier: MPL-2.0
# Copyright 2024, ASAM e.V.
# This Source Code Form is subject to the terms of the Mozilla
# Public License, v. 2.0. If a copy of the MPL was not distributed
# with this file, You can obtain one at https://mozilla.org/MPL/2.0/.

"""
Expectation of the per-symbol gradient estimator.

A batch of m rows is drawn from Z. When it holds rows of T the estimate is
the average score over those rows (with multiplicity); otherwise the batch
is discarded, as the optimizer skips the group. The expectation over the
kept batches is compared against the exact group average of the scores.
"""

import itertools
from dataclasses import dataclass
from typing import Optional

import numpy as np

from categorical_gce.base import errors, models, utils
from categorical_gce.data.dataset import EncodedDataset, symbol_groups
from categorical_gce.model import core
from categorical_gce.model.params import ParamStore
from categorical_gce.model.spec import ModelSpec

MAX_ENUMERATED_DRAWS = 1_000_000
SHARD_SIZE = 20_000


@dataclass(frozen=True)
class ExpectationResult:
    expected: np.ndarray
    exact: np.ndarray
    max_abs_error: float
    kept_draws: int

    @property
    def relative_error(self) -> float:
        return utils.relative_error(self.expected, self.exact)


def _enumerate_draws(spec: models.DrawSpec) -> np.ndarray:
    z_size, m = spec.z_size, spec.batch_size
    if spec.replacement == models.BatchMode.WITHOUT_REPLACEMENT:
        count = 1
        for k in range(m):
            count *= z_size - k
        draws = itertools.permutations(range(z_size), m)
    else:
        count = z_size**m
        draws = itertools.product(range(z_size), repeat=m)

    if count > MAX_ENUMERATED_DRAWS:
        raise errors.SizeError(
            f"enumerating {count} draws exceeds the limit of {MAX_ENUMERATED_DRAWS}"
        )
    return np.array(list(draws), dtype=np.int64).reshape(count, m)


def _sample_draws(spec: models.DrawSpec, size: int, rng: np.random.Generator) -> np.ndarray:
    if spec.replacement == models.BatchMode.WITHOUT_REPLACEMENT:
        return np.argsort(rng.random((size, spec.z_size)), axis=1)[:, : spec.batch_size]
    return rng.integers(0, spec.z_size, size=(size, spec.m))


def _batch_estimates(
    scores: np.ndarray, in_subset: np.ndarray, draws: np.ndarray
) -> np.ndarray:
    """Per kept draw, the average score over the draw's rows in T."""
    hits = in_subset[draws]
    counts = hits.sum(axis=1)
    kept = counts > 0
    sums = np.einsum("dj,dj...->d...", hits[kept].astype(np.float64), scores[draws[kept]])
    return sums / counts[kept].reshape((-1,) + (1,) * (scores.ndim - 1))


def _check_draw_spec(scores: np.ndarray, spec: models.DrawSpec) -> np.ndarray:
    if scores.shape[0] != spec.z_size:
        raise errors.ConfigError(
            f"expected {spec.z_size} score rows, got {scores.shape[0]}"
        )
    if spec.t_size < 1 or spec.m < 1:
        raise errors.ConfigError("the subset and the draw size must be non-empty")
    in_subset = np.zeros(spec.z_size, dtype=bool)
    in_subset[list(spec.subset_rows)] = True
    return in_subset


def subset_estimator_expectation(
    scores: np.ndarray,
    spec: models.DrawSpec,
    method: models.ExpectationMethod = models.ExpectationMethod.EXHAUSTIVE,
    trials: int = 100_000,
    seed: Optional[utils.SeedLike] = 0,
) -> ExpectationResult:
    """
    scores: one score (scalar or vector) per row of Z.

    exhaustive enumerates every ordered draw, each equally likely.
    monteCarlo samples `trials` draws in fixed-size shards, shard i using the
    stream make_rng(seed, i).
    """
    scores = np.asarray(scores, dtype=np.float64)
    in_subset = _check_draw_spec(scores, spec)
    method = models.ExpectationMethod(method)

    if method == models.ExpectationMethod.EXHAUSTIVE:
        estimates = _batch_estimates(scores, in_subset, _enumerate_draws(spec))
        total = estimates.sum(axis=0)
        kept = estimates.shape[0]
    else:
        if trials < 1:
            raise errors.ConfigError(f"need at least one trial, got {trials}")
        total = np.zeros(scores.shape[1:])
        kept = 0
        for shard, start in enumerate(range(0, trials, SHARD_SIZE)):
            size = min(SHARD_SIZE, trials - start)
            draws = _sample_draws(spec, size, utils.make_rng(seed, shard))
            estimates = _batch_estimates(scores, in_subset, draws)
            total = total + estimates.sum(axis=0)
            kept += estimates.shape[0]

    if kept == 0:
        raise errors.EstimatorError("no draw intersected the subset")

    expected = np.asarray(total / kept)
    exact = np.asarray(scores[in_subset].mean(axis=0))
    return ExpectationResult(
        expected=expected,
        exact=exact,
        max_abs_error=float(np.max(np.abs(expected - exact))),
        kept_draws=int(kept),
    )


def group_scores(
    spec: ModelSpec, params: ParamStore, dataset: EncodedDataset, key: models.SymbolKey
) -> np.ndarray:
    """
    Per-row gradient of the group `key`; rows outside the symbol group
    score zero, they never reach the estimate.
    """
    scores = np.zeros((len(dataset),) + params[key].shape)
    for index in symbol_groups(dataset).rows(key):
        row = dataset.row(int(index))
        scores[index] = core.backward(spec, params, row, row.target, dataset.task)[key]
    return scores


def estimator_expectation(
    spec: ModelSpec,
    params: ParamStore,
    dataset: EncodedDataset,
    key: models.SymbolKey,
    m: int,
    method: models.ExpectationMethod = models.ExpectationMethod.EXHAUSTIVE,
    trials: int = 100_000,
    seed: Optional[utils.SeedLike] = 0,
    replacement: models.BatchMode = models.BatchMode.WITH_REPLACEMENT,
) -> ExpectationResult:
    if key not in params:
        raise errors.ConfigError(f"the model has no parameter group {key}")
    rows = symbol_groups(dataset).rows(key)
    if rows.size == 0:
        raise errors.ConfigError(f"symbol group {key} is empty")

    draws = models.DrawSpec(
        z_size=len(dataset),
        subset_rows=tuple(int(row) for row in rows),
        m=m,
        replacement=models.BatchMode(replacement),
    )
    return subset_estimator_expectation(
        group_scores(spec, params, dataset, key), draws, method, trials, seed
    )
