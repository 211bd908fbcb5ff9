# SPDX-License-Identifier: MPL-2.0
# Copyright 2024, ASAM e.V.
# This Source Code Form is subject to the terms of the Mozilla
# Public License, v. 2.0. If a copy of the MPL was not distributed
# with this file, You can obtain one at https://mozilla.org/MPL/2.0/.

import os
import types

import pandas as pd
import pytest
from test_setup import *

from categorical_gce.data.schema import load_layout
from categorical_gce.model.params import load_params

TINY_SYNTHETIC = ["--synthetic", "--cardinality", "5", "--n-rows", "60"]


def test_synth_then_train(monkeypatch, tmp_path) -> None:
    synth_dir = str(tmp_path / "synth")
    run_dir = str(tmp_path / "run")
    params_path = str(tmp_path / "trained.params")

    assert (
        launch_main(
            monkeypatch, "synth", "--cardinality", "5", "--n-rows", "100", "--out", synth_dir
        )
        == main.EXIT_OK
    )
    assert sorted(os.listdir(synth_dir)) == ["data.csv", "layout.txt", "truth.params"]
    frame = pd.read_csv(os.path.join(synth_dir, "data.csv"))
    assert len(frame) == 100
    assert "y" in frame.columns

    exit_code = launch_main(
        monkeypatch,
        "train",
        "--data",
        os.path.join(synth_dir, "data.csv"),
        "--schema",
        os.path.join(synth_dir, "layout.txt"),
        "--epochs",
        "2",
        "--batch-size",
        "8",
        "--out",
        run_dir,
        "--dump-params",
        params_path,
    )

    assert exit_code == main.EXIT_OK
    assert os.path.isfile(os.path.join(run_dir, "metrics.jsonl"))
    assert os.path.isfile(os.path.join(run_dir, "summary_product_b8.csv"))
    schema = load_layout(os.path.join(synth_dir, "layout.txt")).schema_from(
        os.path.join(synth_dir, "data.csv")
    )
    trained = load_params(params_path, schema)
    assert len(trained.symbol_keys()) == schema.num_symbols


def test_sweep_writes_one_table_per_batch_size(monkeypatch, tmp_path) -> None:
    out_dir = str(tmp_path / "sweep")

    exit_code = launch_main(
        monkeypatch,
        "sweep",
        *TINY_SYNTHETIC,
        "--optimizers",
        "sgd,adagrad",
        "--batch-sizes",
        "8,16",
        "--epochs",
        "2",
        "--out",
        out_dir,
    )

    assert exit_code == main.EXIT_OK
    for batch_size in (8, 16):
        table = pd.read_csv(os.path.join(out_dir, f"summary_product_b{batch_size}.csv"))
        assert list(table.columns) == ["Dataset", *constants.SUMMARY_COLUMNS]
        assert table["Dataset"].tolist() == ["synthetic"]


@pytest.mark.parametrize(
    "args",
    [
        ["train"],
        ["train", "--data", "tests/data/sales.csv"],
        ["train", *TINY_SYNTHETIC, "--optimizer", "rmsprop"],
        ["sweep", *TINY_SYNTHETIC, "--optimizers", "rmsprop"],
        ["sweep", *TINY_SYNTHETIC, "--batch-sizes", "eight"],
        ["verify", "--seed", "zero"],
    ],
)
def test_usage_errors(monkeypatch, args) -> None:
    assert launch_main(monkeypatch, *args) == main.EXIT_USAGE


def test_unknown_symbol_fails_the_run(monkeypatch) -> None:
    exit_code = launch_main(
        monkeypatch,
        "train",
        "--data",
        data_file("sales_unknown_symbol.csv"),
        "--schema",
        data_file("sales_red_layout.txt"),
    )

    assert exit_code == main.EXIT_FAILURE


def test_non_empty_output_needs_overwrite(monkeypatch, tmp_path) -> None:
    out_dir = tmp_path / "run"
    out_dir.mkdir()
    (out_dir / "old.txt").write_text("keep me")
    args = ["train", *TINY_SYNTHETIC, "--epochs", "1", "--out", str(out_dir)]

    assert launch_main(monkeypatch, *args) == main.EXIT_FAILURE
    assert launch_main(monkeypatch, *args, "--overwrite") == main.EXIT_OK
    assert os.path.isfile(out_dir / "metrics.jsonl")


def test_synth_needs_overwrite(monkeypatch, tmp_path) -> None:
    out_dir = str(tmp_path / "synth")
    args = ["synth", "--cardinality", "3", "--n-rows", "20", "--out", out_dir]

    assert launch_main(monkeypatch, *args) == main.EXIT_OK
    assert launch_main(monkeypatch, *args) == main.EXIT_FAILURE
    assert launch_main(monkeypatch, *args, "--overwrite") == main.EXIT_OK


def test_verify_bundle(monkeypatch) -> None:
    create_test_config(seed=0)

    try:
        assert launch_verify(monkeypatch) == main.EXIT_OK

        for checker in main.CHECKERS:
            check_issues(
                rule_uid=checker.RULE_UID,
                issue_count=0,
                severity=IssueSeverity.ERROR,
                checker_id=checker.CHECKER_ID,
            )

        with open(TEXT_REPORT_PATH, encoding="utf-8") as report_file:
            lines = report_file.read().splitlines()
        assert len(lines) > 0
        assert all(line.startswith("PASS") for line in lines)
        assert os.path.isfile(MARKDOWN_DOC_PATH)
    finally:
        cleanup_files()


def _config_raising(error: Exception) -> types.SimpleNamespace:
    def get_checker_bundle_param(checker_bundle_name: str, param_name: str):
        raise error

    return types.SimpleNamespace(get_checker_bundle_param=get_checker_bundle_param)


def test_bundle_param_missing_bundle() -> None:
    missing = _config_raising(RuntimeError("Bundle not found"))

    assert main._bundle_param(missing, "resultFile") is None


def test_bundle_param_propagates_other_errors() -> None:
    broken = _config_raising(ValueError("malformed value"))

    with pytest.raises(ValueError):
        main._bundle_param(broken, "resultFile")
