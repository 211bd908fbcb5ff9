# SPDX-License-Identifier: MPL-2.0
# Copyright 2024, ASAM e.V.
# This Source Code Form is subject to the terms of the Mozilla
# Public License, v. 2.0. If a copy of the MPL was not distributed
# with this file, You can obtain one at https://mozilla.org/MPL/2.0/.

"""
Stopping time K: the index of the first batch holding at least one row of T.

Batches are independent, so K is geometric and E[K] = 1 / P1 where P1 is the
probability that one batch hits T:

    with replacement     P1 = 1 - ((|Z| - |T|) / |Z|)^m
    without replacement  P1 = 1 - C(|Z| - |T|, m) / C(|Z|, m)
"""

import logging
from typing import Tuple

import numpy as np
from scipy.special import comb

from categorical_gce.base import errors, models, utils

# Trials simulated per vectorized shard.
SHARD_SIZE = 20_000


def validate_sizes(z_size: int, t_size: int, m: int) -> None:
    if not 1 <= t_size <= z_size:
        raise errors.ConfigError(f"need 1 <= |T| <= |Z|, got |T|={t_size}, |Z|={z_size}")
    if m < 1:
        raise errors.ConfigError(f"draw size must be at least 1, got {m}")


def draw_spec(
    z_size: int,
    t_size: int,
    m: int,
    replacement: models.BatchMode = models.BatchMode.WITH_REPLACEMENT,
) -> models.DrawSpec:
    validate_sizes(z_size, t_size, m)
    return models.DrawSpec(
        z_size=z_size,
        subset_rows=tuple(range(t_size)),
        m=m,
        replacement=models.BatchMode(replacement),
    )


def stopping_time_p1(z_size: int, t_size: int, m: int) -> float:
    validate_sizes(z_size, t_size, m)
    return 1.0 - ((z_size - t_size) / z_size) ** m


def stopping_time_p1_without_replacement(z_size: int, t_size: int, m: int) -> float:
    validate_sizes(z_size, t_size, m)
    batch_size = min(m, z_size)
    misses = comb(z_size - t_size, batch_size, exact=True)
    return 1.0 - misses / comb(z_size, batch_size, exact=True)


def expected_stopping_time(spec: models.DrawSpec) -> float:
    if spec.replacement == models.BatchMode.WITHOUT_REPLACEMENT:
        return 1.0 / stopping_time_p1_without_replacement(spec.z_size, spec.t_size, spec.m)
    return 1.0 / stopping_time_p1(spec.z_size, spec.t_size, spec.m)


def _distinct_counts(draws: np.ndarray) -> np.ndarray:
    ordered = np.sort(draws, axis=1)
    return 1 + np.count_nonzero(np.diff(ordered, axis=1), axis=1)


def _simulate_shard(
    z_size: int, t_size: int, m: int, trials: int, rng: np.random.Generator
) -> Tuple[np.ndarray, np.ndarray]:
    """
    Paired stopping times (with, without replacement) for `trials` runs.

    Rows 0..t_size-1 form T. Each round draws a with-replacement batch; the
    without-replacement batch of the same round keeps the distinct rows of
    that draw and tops them up with rows drawn uniformly from the rest, so it
    is a uniform subset of min(m, |Z|) rows that contains the with-replacement
    batch. A without-replacement hit therefore never comes later.
    """
    batch_size = min(m, z_size)
    k_with = np.zeros(trials, dtype=np.int64)
    k_without = np.zeros(trials, dtype=np.int64)
    active = np.arange(trials)

    round_index = 0
    while active.size > 0:
        round_index += 1
        draws = rng.integers(0, z_size, size=(active.size, m))
        hit_with = np.any(draws < t_size, axis=1)

        hit_without = hit_with.copy()
        missed = ~hit_with
        if np.any(missed):
            distinct = _distinct_counts(draws[missed])
            top_up = batch_size - distinct
            extra_hits = rng.hypergeometric(
                t_size, z_size - distinct - t_size, np.maximum(top_up, 1)
            )
            hit_without[missed] = (top_up > 0) & (extra_hits > 0)

        first_without = hit_without & (k_without[active] == 0)
        k_without[active[first_without]] = round_index
        k_with[active[hit_with]] = round_index

        active = active[~hit_with]

    return k_with, k_without


def simulate_paired(
    z_size: int, t_size: int, m: int, trials: int, seed: utils.SeedLike
) -> Tuple[float, float]:
    """Mean stopping times (with, without replacement) over paired trials."""
    validate_sizes(z_size, t_size, m)
    if trials < 1:
        raise errors.ConfigError(f"need at least one trial, got {trials}")

    total_with = 0
    total_without = 0
    for shard, start in enumerate(range(0, trials, SHARD_SIZE)):
        size = min(SHARD_SIZE, trials - start)
        k_with, k_without = _simulate_shard(
            z_size, t_size, m, size, utils.make_rng(seed, shard)
        )
        total_with += int(k_with.sum())
        total_without += int(k_without.sum())

    logging.debug(f"Simulated {trials} stopping times for |Z|={z_size}, |T|={t_size}, m={m}")
    return total_with / trials, total_without / trials


def simulate_without_replacement(
    z_size: int, t_size: int, m: int, trials: int, seed: utils.SeedLike
) -> float:
    """
    Mean stopping time when every round draws a fresh uniform subset of
    min(m, |Z|) rows, simulated on its own stream with no coupling to
    the with-replacement draws.
    """
    validate_sizes(z_size, t_size, m)
    if trials < 1:
        raise errors.ConfigError(f"need at least one trial, got {trials}")

    batch_size = min(m, z_size)
    total = 0
    for shard, start in enumerate(range(0, trials, SHARD_SIZE)):
        rng = utils.make_rng(seed, shard)
        active = min(SHARD_SIZE, trials - start)
        round_index = 0
        while active > 0:
            round_index += 1
            drawn_from_t = rng.hypergeometric(t_size, z_size - t_size, batch_size, size=active)
            hits = int(np.count_nonzero(drawn_from_t))
            total += hits * round_index
            active -= hits

    return total / trials


def stopping_time_simulate(spec: models.DrawSpec, trials: int, seed: utils.SeedLike) -> float:
    """Empirical mean of K under the draw mode of `spec`."""
    mean_with, mean_without = simulate_paired(spec.z_size, spec.t_size, spec.m, trials, seed)
    if spec.replacement == models.BatchMode.WITHOUT_REPLACEMENT:
        return mean_without
    return mean_with
