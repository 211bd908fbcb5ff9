# SPDX-License-Identifier: MPL-2.0
# Copyright 2024, ASAM e.V.
# This Source Code Form is subject to the terms of the Mozilla
# Public License, v. 2.0. If a copy of the MPL was not distributed
# with this file, You can obtain one at https://mozilla.org/MPL/2.0/.

import dataclasses
import logging
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field
from typing import Dict, List, Optional, Tuple

import numpy as np
import pandas as pd

from categorical_gce import constants
from categorical_gce.base import errors, models
from categorical_gce.harness.config import PreparedData, TrainConfig, load_data
from categorical_gce.harness.training import RunResult, run_training

_OPTIMIZER_TITLES = {
    models.OptimizerKind.SGD: "SGD",
    models.OptimizerKind.ADAGRAD: "Adagrad",
    models.OptimizerKind.ADAM: "Adam",
}

CellKey = Tuple[int, models.OptimizerKind, models.EstimatorMode]


def column_title(optimizer: models.OptimizerKind, mode: models.EstimatorMode) -> str:
    """SGD, SGD&GCE, Adagrad, ..."""
    title = _OPTIMIZER_TITLES[models.OptimizerKind(optimizer)]
    if models.EstimatorMode(mode) == models.EstimatorMode.GCE:
        return f"{title}&GCE"
    return title


@dataclass(frozen=True)
class SweepGrid:
    optimizers: Tuple[models.OptimizerKind, ...] = tuple(models.OptimizerKind)
    estimators: Tuple[models.EstimatorMode, ...] = tuple(models.EstimatorMode)
    batch_sizes: Tuple[int, ...] = (32,)

    def cells(self) -> List[CellKey]:
        if not (self.optimizers and self.estimators and self.batch_sizes):
            raise errors.ConfigError("the sweep grid is empty")
        return [
            (batch_size, optimizer, mode)
            for batch_size in self.batch_sizes
            for optimizer in self.optimizers
            for mode in self.estimators
        ]


@dataclass
class CellSummary:
    batch_size: int
    optimizer: models.OptimizerKind
    estimator: models.EstimatorMode
    mean: float
    std: float
    completed: int
    diverged: int
    failed: int

    def formatted(self) -> str:
        if self.completed == 0:
            return "diverged" if self.diverged > 0 else "failed"
        text = f"{self.mean:.4f} ± {self.std:.4f}"
        notes = []
        if self.diverged > 0:
            notes.append(f"{self.diverged} diverged")
        if self.failed > 0:
            notes.append(f"{self.failed} failed")
        if notes:
            text += f" ({', '.join(notes)})"
        return text


@dataclass
class SweepResult:
    base: TrainConfig
    dataset_name: str
    runs: List[RunResult] = field(default_factory=list)
    cells: Dict[CellKey, CellSummary] = field(default_factory=dict)


def _cell_config(base: TrainConfig, cell: CellKey) -> TrainConfig:
    batch_size, optimizer, mode = cell
    return dataclasses.replace(base, batch_size=batch_size, optimizer=optimizer, estimator=mode)


def _run_one(config: TrainConfig, data: PreparedData, seed: int) -> RunResult:
    try:
        result = run_training(config, data, seed)
    except errors.GceError as e:
        logging.exception(f"Run {config.label()} seed {seed} failed.")
        return RunResult(
            config=config, seed=seed, status=models.RunStatus.FAILED, metric="", message=str(e)
        )
    return result


def summarize(runs: List[RunResult], cell: CellKey) -> CellSummary:
    """Mean and population std of the final test metric over completed runs."""
    batch_size, optimizer, mode = cell
    finals = [run.final_test_metric for run in runs if run.status == models.RunStatus.COMPLETED]
    return CellSummary(
        batch_size=batch_size,
        optimizer=optimizer,
        estimator=mode,
        mean=float(np.mean(finals)) if finals else float("nan"),
        std=float(np.std(finals)) if finals else float("nan"),
        completed=len(finals),
        diverged=sum(run.status == models.RunStatus.DIVERGED for run in runs),
        failed=sum(run.status == models.RunStatus.FAILED for run in runs),
    )


def run_sweep(
    base: TrainConfig,
    grid: SweepGrid,
    repeats: Optional[int] = None,
    jobs: int = 1,
    data: Optional[PreparedData] = None,
) -> SweepResult:
    """
    Every grid cell runs with seeds base.seed, base.seed + 1, ... on the same
    prepared datasets. Runs are merged by (cell, seed), so the summary does
    not depend on the order in which parallel runs finish.
    """
    repeats = base.repeats if repeats is None else repeats
    if repeats < 1:
        raise errors.ConfigError(f"repeats must be at least 1, got {repeats}")
    cells = grid.cells()
    data = load_data(base) if data is None else data

    tasks = [
        (cell, _cell_config(base, cell), base.seed + repeat)
        for cell in cells
        for repeat in range(repeats)
    ]
    logging.info(f"Sweeping {len(cells)} cells x {repeats} repeats on {data.name}")

    finished: Dict[Tuple[CellKey, int], RunResult] = {}
    if jobs > 1:
        with ProcessPoolExecutor(max_workers=jobs) as pool:
            futures = {
                (cell, seed): pool.submit(_run_one, config, data, seed)
                for cell, config, seed in tasks
            }
            for key, future in futures.items():
                finished[key] = future.result()
    else:
        for cell, config, seed in tasks:
            finished[(cell, seed)] = _run_one(config, data, seed)

    result = SweepResult(base=base, dataset_name=data.name)
    for cell, _, seed in tasks:
        result.runs.append(finished[(cell, seed)])
    for cell in cells:
        cell_runs = [finished[(cell, base.seed + repeat)] for repeat in range(repeats)]
        result.cells[cell] = summarize(cell_runs, cell)

    return result


def summary_tables(sweep: SweepResult) -> Dict[int, pd.DataFrame]:
    """One table per batch size, one row per dataset, the six optimizer columns."""
    tables = {}
    for batch_size in sorted({cell[0] for cell in sweep.cells}):
        row = {"Dataset": sweep.dataset_name}
        for optimizer in models.OptimizerKind:
            for mode in models.EstimatorMode:
                summary = sweep.cells.get((batch_size, optimizer, mode))
                row[column_title(optimizer, mode)] = (
                    summary.formatted() if summary is not None else ""
                )
        tables[batch_size] = pd.DataFrame([row], columns=["Dataset", *constants.SUMMARY_COLUMNS])
    return tables


def loss_curves(sweep: SweepResult, batch_size: int) -> pd.DataFrame:
    """
    Mean training loss per epoch and cell over completed runs, one column per
    optimizer/estimator pair, indexed by epoch.
    """
    curves = {}
    for (cell_batch, optimizer, mode), summary in sweep.cells.items():
        if cell_batch != batch_size:
            continue
        runs = [
            run
            for run in sweep.runs
            if run.config.batch_size == cell_batch
            and run.config.optimizer == optimizer
            and run.config.estimator == mode
            and run.status == models.RunStatus.COMPLETED
        ]
        if len(runs) == 0:
            continue
        losses = np.array([[epoch.train_loss for epoch in run.epochs] for run in runs])
        curves[column_title(optimizer, mode)] = losses.mean(axis=0)

    frame = pd.DataFrame(curves)
    frame.index = pd.RangeIndex(1, len(frame) + 1, name="epoch")
    return frame
