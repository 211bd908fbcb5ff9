# SPDX-License-Identifier: MPL-2.0
# Copyright 2024, ASAM e.V.
# This Source Code Form is subject to the terms of the Mozilla
# Public License, v. 2.0. If a copy of the MPL was not distributed
# with this file, You can obtain one at https://mozilla.org/MPL/2.0/.

import logging
import math
import time
from dataclasses import dataclass, field
from typing import List, Optional, Sequence

import numpy as np

from categorical_gce import estimator, optim
from categorical_gce.base import models, utils
from categorical_gce.data.batching import make_batches
from categorical_gce.data.dataset import EncodedDataset
from categorical_gce.harness.config import PreparedData, TrainConfig, load_data
from categorical_gce.model import core, losses
from categorical_gce.model.params import ParamStore
from categorical_gce.model.spec import ModelSpec
from categorical_gce.optim.state import OptimizerState, default_hyper


@dataclass(frozen=True)
class EpochMetrics:
    epoch: int
    train_loss: float
    test_metric: float


@dataclass
class RunResult:
    config: TrainConfig
    seed: int
    status: models.RunStatus
    metric: str
    epochs: List[EpochMetrics] = field(default_factory=list)
    wall_time: float = 0.0
    message: str = ""
    params: Optional[ParamStore] = None

    @property
    def final_test_metric(self) -> float:
        if self.status != models.RunStatus.COMPLETED or len(self.epochs) == 0:
            return math.nan
        return self.epochs[-1].test_metric


def train_batch(
    spec: ModelSpec,
    params: ParamStore,
    state: OptimizerState,
    dataset: EncodedDataset,
    indices: Sequence[int],
    mode: models.EstimatorMode,
    acc: Optional[estimator.GradAccumulator] = None,
) -> estimator.ScaledGradient:
    """One accumulate, finalize and update cycle; params and state change in place."""
    acc = estimator.GradAccumulator(params) if acc is None else estimator.reset(acc)
    estimator.accumulate_batch(acc, spec, dataset, indices)
    scaled = estimator.finalize(acc, mode)
    optim.apply_update(state, params, scaled)
    return scaled


def train_epoch(
    spec: ModelSpec,
    params: ParamStore,
    state: OptimizerState,
    dataset: EncodedDataset,
    batch_size: int,
    mode: models.EstimatorMode,
    seed: utils.SeedLike,
    max_steps: Optional[int] = None,
) -> int:
    """Shuffle, partition and train; returns the number of batches used."""
    acc = estimator.GradAccumulator(params)
    steps = 0
    for indices in make_batches(dataset, batch_size, seed):
        if max_steps is not None and steps >= max_steps:
            break
        train_batch(spec, params, state, dataset, indices, mode, acc)
        steps += 1
    return steps


def train_steps(
    spec: ModelSpec,
    params: ParamStore,
    state: OptimizerState,
    dataset: EncodedDataset,
    batch_size: int,
    mode: models.EstimatorMode,
    steps: int,
    seed: utils.SeedLike,
) -> None:
    """Run exactly `steps` batches, reshuffling per epoch."""
    epoch = 0
    done = 0
    while done < steps:
        epoch += 1
        done += train_epoch(
            spec, params, state, dataset, batch_size, mode, utils.make_rng(seed, epoch), steps - done
        )


def _init_run(config: TrainConfig, data: PreparedData, seed: int):
    params = core.init_params(
        data.spec, data.train.schema, seed=seed, num_covariates=data.train.num_covariates
    )
    state = optim.init_state(
        config.optimizer,
        default_hyper(config.optimizer, config.lr),
        params,
        config.adam_step,
    )
    return params, state


def run_training(
    config: TrainConfig,
    data: Optional[PreparedData] = None,
    seed: Optional[int] = None,
) -> RunResult:
    """
    Train one configuration. Epoch e shuffles with the stream
    make_rng(seed, e), so a run depends on nothing but its config and seed.
    A non-finite loss stops the run with status diverged.
    """
    config.validate()
    data = load_data(config) if data is None else data
    seed = config.seed if seed is None else seed

    started = time.perf_counter()
    params, state = _init_run(config, data, seed)
    result = RunResult(
        config=config,
        seed=seed,
        status=models.RunStatus.COMPLETED,
        metric=losses.metric_name(data.train.task),
    )

    with np.errstate(over="ignore", invalid="ignore"):
        for epoch in range(1, config.epochs + 1):
            train_epoch(
                data.spec,
                params,
                state,
                data.train,
                config.batch_size,
                config.estimator,
                utils.make_rng(seed, epoch),
            )
            train_loss = core.mean_loss(data.spec, params, data.train)
            test_metric = core.mean_metric(data.spec, params, data.test)

            if not (math.isfinite(train_loss) and math.isfinite(test_metric)):
                result.status = models.RunStatus.DIVERGED
                result.message = f"non-finite loss at epoch {epoch}"
                logging.warning(f"Run {config.label()} seed {seed} diverged at epoch {epoch}")
                break

            result.epochs.append(
                EpochMetrics(epoch=epoch, train_loss=train_loss, test_metric=test_metric)
            )
            logging.debug(
                f"{config.label()} seed {seed} epoch {epoch}: "
                f"train loss {train_loss:.6g}, test {result.metric} {test_metric:.6g}"
            )

    result.wall_time = time.perf_counter() - started
    result.params = params

    if result.status == models.RunStatus.COMPLETED:
        logging.info(
            f"Run {config.label()} seed {seed} finished: "
            f"test {result.metric} {result.final_test_metric:.6g}"
        )
    return result
