# SPDX-License-Identifier: MPL-2.0
# Copyright 2024, ASAM e.V.
# This Source Code Form is subject to the terms of the Mozilla
# Public License, v. 2.0. If a copy of the MPL was not distributed
# with this file, You can obtain one at https://mozilla.org/MPL/2.0/.

"""
Result files of train and sweep runs:

    metrics.jsonl                one JSON object per (run, epoch)
    summary_<model>_b<batch>.csv mean ± std tables (sweeps)
    curves_<model>_b<batch>.csv  mean training loss per epoch and column
    curves_<model>_b<batch>.png  the same curves, with --plot

Wall-clock times are not written, so identical runs give identical files.
"""

import logging
import os
from typing import Dict, List, Optional, Sequence

import pandas as pd

from categorical_gce.base import errors
from categorical_gce.harness import plotting
from categorical_gce.harness.training import RunResult

METRICS_FILE = "metrics.jsonl"


def prepare_directory(out_dir: str, overwrite: bool = False) -> None:
    """Create out_dir; an existing non-empty directory needs overwrite."""
    if os.path.isdir(out_dir) and len(os.listdir(out_dir)) > 0 and not overwrite:
        raise errors.OutputExistsError(
            f"output directory {out_dir} is not empty, pass --overwrite to replace its files"
        )
    try:
        os.makedirs(out_dir, exist_ok=True)
    except OSError as e:
        raise errors.OutputExistsError(f"cannot create output directory {out_dir}: {e}") from e


def metric_records(results: Sequence[RunResult]) -> pd.DataFrame:
    records = []
    for run_index, result in enumerate(results):
        config = result.config
        for epoch in result.epochs:
            records.append(
                {
                    "run": run_index,
                    "dataset": config.data or "synthetic",
                    "model": config.model.value,
                    "optimizer": config.optimizer.value,
                    "estimator": config.estimator.value,
                    "batch_size": config.batch_size,
                    "seed": result.seed,
                    "status": result.status.value,
                    "epoch": epoch.epoch,
                    "train_loss": epoch.train_loss,
                    "test_metric": epoch.test_metric,
                    "metric": result.metric,
                }
            )
    return pd.DataFrame(records)


def _write(frame: pd.DataFrame, path: str, written: List[str], **kwargs) -> None:
    try:
        if path.endswith(".jsonl"):
            frame.to_json(path, orient="records", lines=True, double_precision=15)
        else:
            frame.to_csv(path, **kwargs)
    except OSError as e:
        raise OSError(f"cannot write {path}: {e}") from e
    written.append(path)


def write_outputs(
    results: Sequence[RunResult],
    out_dir: str,
    tables: Optional[Dict[str, pd.DataFrame]] = None,
    curves: Optional[Dict[str, pd.DataFrame]] = None,
    plot: bool = False,
    overwrite: bool = False,
) -> List[str]:
    """
    tables and curves are keyed by file stem, e.g. "mlp_b32". Returns the
    written paths.
    """
    prepare_directory(out_dir, overwrite)
    written: List[str] = []

    records = metric_records(results)
    if records.empty:
        # no run finished an epoch
        open(os.path.join(out_dir, METRICS_FILE), "w").close()
        written.append(os.path.join(out_dir, METRICS_FILE))
    else:
        _write(records, os.path.join(out_dir, METRICS_FILE), written)

    for stem, table in (tables or {}).items():
        _write(table, os.path.join(out_dir, f"summary_{stem}.csv"), written, index=False)

    for stem, frame in (curves or {}).items():
        _write(frame, os.path.join(out_dir, f"curves_{stem}.csv"), written)
        if plot and not frame.empty:
            path = os.path.join(out_dir, f"curves_{stem}.png")
            plotting.plot_loss_curves(frame, path, title=stem)
            written.append(path)

    logging.info(f"Wrote {len(written)} files to {out_dir}")
    return written
