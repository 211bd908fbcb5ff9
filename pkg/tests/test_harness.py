# SPDX-License-Identifier: MPL-2.0
# Copyright 2024, ASAM e.V.
# This Source Code Form is subject to the terms of the Mozilla
# Public License, v. 2.0. If a copy of the MPL was not distributed
# with this file, You can obtain one at https://mozilla.org/MPL/2.0/.

import dataclasses
import math
import os

import numpy as np
import pandas as pd
import pytest
from test_setup import *

from categorical_gce import constants
from categorical_gce.base import errors, models
from categorical_gce.checks import fixtures
from categorical_gce.harness import config, outputs, sweep, training
from categorical_gce.model import spec

TINY = config.SyntheticSpec(num_features=1, cardinalities=(5,), n=60, noise_std=0.1)


def _tiny_config(**changes) -> config.TrainConfig:
    base = config.TrainConfig(synthetic=TINY, batch_size=8, epochs=2)
    return dataclasses.replace(base, **changes)


def test_merge_config_coerces_values() -> None:
    merged = config.merge_config(
        config.TrainConfig(),
        {
            "batch_size": "16",
            "optimizer": "sgd",
            "lr": "0.5",
            "hidden_sizes": "8, 8",
            "intercept": "true",
            "data": None,
        },
    )

    assert merged.batch_size == 16
    assert merged.optimizer == models.OptimizerKind.SGD
    assert merged.lr == 0.5
    assert merged.hidden_sizes == (8, 8)
    assert merged.intercept is True
    assert merged.synthetic is None


def test_merge_config_synthetic() -> None:
    requested = config.merge_config(config.TrainConfig(), {}, synthetic_requested=True)
    from_flag = config.merge_config(config.TrainConfig(), {"synthetic": "true"})
    two_features = config.merge_config(
        config.TrainConfig(), {"num_features": 2, "cardinality": "10", "n_rows": "300"}
    )

    assert requested.synthetic == config.SyntheticSpec()
    assert from_flag.synthetic == config.SyntheticSpec()
    assert two_features.synthetic.cardinalities == (10, 10)
    assert two_features.synthetic.n == 300


@pytest.mark.parametrize(
    "values",
    [
        {"batch_sise": 4},
        {"optimizer": "rmsprop"},
        {"epochs": "ten"},
        {"hidden_sizes": "4, x"},
    ],
)
def test_merge_config_rejects(values: dict) -> None:
    with pytest.raises(errors.ConfigError):
        config.merge_config(config.TrainConfig(), values)


@pytest.mark.parametrize(
    "changes",
    [
        {"synthetic": None},
        {"synthetic": None, "data": "sales.csv"},
        {"batch_size": 0},
        {"epochs": 0},
        {"repeats": 0},
        {"lr": -1.0},
    ],
)
def test_validate_config(changes: dict) -> None:
    with pytest.raises(errors.ConfigError):
        _tiny_config(**changes).validate()


def test_config_file_values(tmp_path) -> None:
    path = str(tmp_path / "experiment.xml")
    file_config = Configuration()
    file_config.set_config_param(name="batch_size", value=4)
    file_config.set_config_param(name="optimizer", value="adagrad")
    file_config.write_to_file(path)

    values = config.config_file_values(path)
    merged = config.merge_config(config.TrainConfig(), values)

    assert merged.batch_size == 4
    assert merged.optimizer == models.OptimizerKind.ADAGRAD
    assert config.config_file_values(None) == {}
    with pytest.raises(errors.ConfigError):
        config.config_file_values(str(tmp_path / "missing.xml"))


def test_load_data_csv() -> None:
    data = config.load_data(
        config.TrainConfig(data=data_file("sales.csv"), layout=data_file("sales_red_layout.txt"))
    )

    assert len(data.train) == 4
    assert len(data.test) == 1
    assert data.train.schema.feature("color").alphabet == ("blue", "pink", "red")
    assert data.spec.factor_features == ("color", "store")
    assert data.name == data_file("sales.csv")


def test_load_data_test_file() -> None:
    data = config.load_data(
        config.TrainConfig(
            data=data_file("sales.csv"),
            layout=data_file("sales_layout.txt"),
            test_data=data_file("sales.csv"),
        )
    )

    assert len(data.train) == 5
    assert len(data.test) == 5

    with pytest.raises(errors.UnknownSymbolError):
        config.load_data(
            config.TrainConfig(
                data=data_file("sales.csv"),
                layout=data_file("sales_layout.txt"),
                test_data=data_file("sales_unknown_symbol.csv"),
            )
        )


def test_load_data_covariate_model() -> None:
    data = config.load_data(
        config.TrainConfig(
            data=data_file("taxi.csv"),
            layout=data_file("taxi_layout.txt"),
            covariate="distance",
            intercept=True,
            scale_covariates=True,
        )
    )

    assert data.spec.covariate_index == 0
    assert data.spec.shared_intercept
    assert data.train.covariates.min() == 0.0
    assert data.train.covariates.max() == 1.0


def test_load_data_classification() -> None:
    data = config.load_data(
        config.TrainConfig(
            data=data_file("income.csv"),
            layout=data_file("income_layout.txt"),
            model=models.ModelKind.TAB_RESNET,
        )
    )

    assert data.train.task.classes == ("<=50K", ">50K")
    assert data.spec.task.output_size == 2

    result = training.run_training(
        config.TrainConfig(
            data=data_file("income.csv"),
            layout=data_file("income_layout.txt"),
            model=models.ModelKind.TAB_RESNET,
            batch_size=2,
            epochs=3,
        ),
        data,
    )
    assert result.status == models.RunStatus.COMPLETED
    assert result.metric == "error_rate"
    assert 0.0 <= result.final_test_metric <= 1.0


def test_run_training_records_every_epoch() -> None:
    tiny = _tiny_config(epochs=3)

    result = training.run_training(tiny)

    assert result.status == models.RunStatus.COMPLETED
    assert [epoch.epoch for epoch in result.epochs] == [1, 2, 3]
    assert result.metric == "mse"
    assert result.params is not None
    assert math.isfinite(result.final_test_metric)


def test_run_training_is_deterministic() -> None:
    tiny = _tiny_config(model=models.ModelKind.MLP, optimizer=models.OptimizerKind.ADAM)
    data = config.load_data(tiny)

    first = training.run_training(tiny, data, seed=3)
    second = training.run_training(tiny, data, seed=3)
    other = training.run_training(tiny, data, seed=4)

    assert first.epochs == second.epochs
    assert first.params.bitwise_equal(second.params)
    assert not first.params.bitwise_equal(other.params)


def test_noiseless_synthetic_run_fits_exactly() -> None:
    noiseless = config.TrainConfig(
        synthetic=config.SyntheticSpec(
            num_features=1,
            cardinalities=(2,),
            distribution=models.SymbolDistribution.UNIFORM,
            noise_std=0.0,
        ),
        optimizer=models.OptimizerKind.SGD,
        estimator=models.EstimatorMode.GCE,
        lr=0.05,
        epochs=60,
    )

    result = training.run_training(noiseless)

    assert result.status == models.RunStatus.COMPLETED
    assert result.epochs[-1].train_loss <= 1e-6


def test_run_training_diverges() -> None:
    exploding = config.TrainConfig(
        data=data_file("sales.csv"),
        layout=data_file("sales_layout.txt"),
        optimizer=models.OptimizerKind.SGD,
        lr=1e3,
        batch_size=5,
        epochs=20,
    )

    result = training.run_training(exploding)

    assert result.status == models.RunStatus.DIVERGED
    assert math.isnan(result.final_test_metric)
    assert "non-finite" in result.message


def test_balanced_full_batch_sgd_equivalence() -> None:
    num_symbols = 4
    balanced = fixtures.balanced_dataset(num_symbols, 5, seed=0)
    data = config.PreparedData(
        train=balanced, test=balanced, spec=spec.product_model(("symbol",)), name="balanced"
    )
    base = _tiny_config(optimizer=models.OptimizerKind.SGD, batch_size=len(balanced), epochs=10)

    gce = training.run_training(
        dataclasses.replace(base, estimator=models.EstimatorMode.GCE, lr=0.01), data
    )
    classic = training.run_training(
        dataclasses.replace(base, estimator=models.EstimatorMode.CLASSIC, lr=0.01 * num_symbols),
        data,
    )

    for key in gce.params.keys():
        assert np.allclose(gce.params[key], classic.params[key], rtol=1e-9, atol=1e-12)
    for mine, theirs in zip(gce.epochs, classic.epochs):
        assert mine.train_loss == pytest.approx(theirs.train_loss, rel=1e-9)


def test_summarize_excludes_diverged_runs() -> None:
    tiny = _tiny_config()
    runs = [
        training.RunResult(
            config=tiny,
            seed=seed,
            status=models.RunStatus.COMPLETED,
            metric="mse",
            epochs=[training.EpochMetrics(epoch=1, train_loss=0.0, test_metric=value)],
        )
        for seed, value in enumerate([1.0, 3.0])
    ]
    runs.append(
        training.RunResult(config=tiny, seed=2, status=models.RunStatus.DIVERGED, metric="mse")
    )
    cell = (8, models.OptimizerKind.ADAM, models.EstimatorMode.GCE)

    summary = sweep.summarize(runs, cell)

    assert summary.mean == 2.0
    assert summary.std == 1.0
    assert summary.completed == 2
    assert summary.diverged == 1
    assert summary.formatted() == "2.0000 ± 1.0000 (1 diverged)"


def test_column_titles() -> None:
    titles = [
        sweep.column_title(optimizer, mode)
        for optimizer in models.OptimizerKind
        for mode in models.EstimatorMode
    ]

    assert tuple(titles) == constants.SUMMARY_COLUMNS


def test_empty_grid() -> None:
    with pytest.raises(errors.ConfigError):
        sweep.SweepGrid(optimizers=()).cells()


def test_run_sweep_tables_and_curves() -> None:
    grid = sweep.SweepGrid(
        optimizers=(models.OptimizerKind.SGD, models.OptimizerKind.ADAM),
        estimators=tuple(models.EstimatorMode),
        batch_sizes=(4, 8),
    )

    result = sweep.run_sweep(_tiny_config(), grid, repeats=2)
    tables = sweep.summary_tables(result)
    curves = sweep.loss_curves(result, 8)

    assert len(result.runs) == 16
    assert len(result.cells) == 8
    assert sorted(tables) == [4, 8]
    assert list(tables[8].columns) == ["Dataset", *constants.SUMMARY_COLUMNS]
    assert tables[8]["Dataset"].tolist() == ["synthetic"]
    assert "±" in tables[8]["SGD&GCE"].iloc[0]
    assert tables[8]["Adagrad"].iloc[0] == ""
    assert list(curves.columns) == ["SGD", "SGD&GCE", "Adam", "Adam&GCE"]
    assert curves.index.tolist() == [1, 2]
    assert curves.index.name == "epoch"


def test_run_sweep_is_order_independent() -> None:
    grid = sweep.SweepGrid(
        optimizers=(models.OptimizerKind.ADAGRAD,), estimators=tuple(models.EstimatorMode)
    )
    data = config.load_data(_tiny_config())

    serial = sweep.run_sweep(_tiny_config(), grid, repeats=2, data=data)
    parallel = sweep.run_sweep(_tiny_config(), grid, repeats=2, jobs=2, data=data)

    assert [run.epochs for run in serial.runs] == [run.epochs for run in parallel.runs]
    assert sweep.summary_tables(serial)[32].equals(sweep.summary_tables(parallel)[32])


def test_write_outputs(tmp_path) -> None:
    grid = sweep.SweepGrid(optimizers=(models.OptimizerKind.SGD,), batch_sizes=(8,))
    result = sweep.run_sweep(_tiny_config(), grid)
    out_dir = str(tmp_path / "out")

    written = outputs.write_outputs(
        result.runs,
        out_dir,
        tables={"product_b8": sweep.summary_tables(result)[8]},
        curves={"product_b8": sweep.loss_curves(result, 8)},
        plot=True,
    )

    assert sorted(os.path.basename(path) for path in written) == [
        "curves_product_b8.csv",
        "curves_product_b8.png",
        "metrics.jsonl",
        "summary_product_b8.csv",
    ]
    metrics = pd.read_json(os.path.join(out_dir, "metrics.jsonl"), lines=True)
    assert len(metrics) == 4
    assert set(metrics["estimator"]) == {"classic", "gce"}
    assert "wall_time" not in metrics.columns

    with pytest.raises(errors.OutputExistsError):
        outputs.write_outputs(result.runs, out_dir)
    outputs.write_outputs(result.runs, out_dir, overwrite=True)


def _median_final_mse(result: sweep.SweepResult, optimizer, mode) -> float:
    finals = [
        run.final_test_metric
        for run in result.runs
        if run.config.optimizer == optimizer and run.config.estimator == mode
    ]
    assert all(math.isfinite(value) for value in finals)
    return float(np.median(finals))


def test_gce_improves_imbalanced_benchmark() -> None:
    benchmark = config.TrainConfig(
        synthetic=config.SyntheticSpec(
            num_features=1,
            cardinalities=(50,),
            distribution=models.SymbolDistribution.ZIPF,
            zipf_exponent=1.5,
            n=2000,
            noise_std=0.1,
        ),
        model=models.ModelKind.MLP,
        batch_size=32,
        epochs=10,
    )
    grid = sweep.SweepGrid(
        optimizers=(models.OptimizerKind.SGD, models.OptimizerKind.ADAGRAD),
        estimators=tuple(models.EstimatorMode),
        batch_sizes=(32,),
    )

    result = sweep.run_sweep(benchmark, grid, repeats=10)

    sgd_gce = _median_final_mse(result, models.OptimizerKind.SGD, models.EstimatorMode.GCE)
    sgd_classic = _median_final_mse(result, models.OptimizerKind.SGD, models.EstimatorMode.CLASSIC)
    adagrad_gce = _median_final_mse(result, models.OptimizerKind.ADAGRAD, models.EstimatorMode.GCE)
    adagrad_classic = _median_final_mse(
        result, models.OptimizerKind.ADAGRAD, models.EstimatorMode.CLASSIC
    )

    assert sgd_gce < sgd_classic
    assert adagrad_gce < adagrad_classic
