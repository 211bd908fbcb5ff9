# SPDX-License-Identifier: MPL-2.0
# Copyright 2024, ASAM e.V.
# This Source Code Form is subject to the terms of the Mozilla
# Public License, v. 2.0. If a copy of the MPL was not distributed
# with this file, You can obtain one at https://mozilla.org/MPL/2.0/.

import argparse
import logging
import os
import sys
import types
from typing import Dict, List, Optional, Sequence

import pandas as pd
from qc_baselib import Configuration, Result, StatusType

from categorical_gce import constants
from categorical_gce.base import errors, models, utils
from categorical_gce.checks import estimator
from categorical_gce.checks import gradients
from categorical_gce.checks import loss
from categorical_gce.checks import stopping_time
from categorical_gce.checks import training
from categorical_gce.data import synthetic
from categorical_gce.data.schema import TableLayout, write_layout
from categorical_gce.harness import config as harness_config
from categorical_gce.harness.outputs import write_outputs
from categorical_gce.harness.sweep import SweepGrid, loss_curves, run_sweep, summary_tables
from categorical_gce.model.params import dump_params

logging.basicConfig(format="%(asctime)s - %(message)s", level=logging.INFO)

EXIT_OK = 0
EXIT_FAILURE = 1
EXIT_USAGE = 2

CHECKERS: List[types.ModuleType] = [
    gradients.model_gradients_match_finite_differences,
    gradients.categorical_loss_gradient_matches_finite_differences,
    loss.categorical_loss_reference_values,
    loss.balanced_loss_identity,
    estimator.estimator_unbiased_exhaustive,
    estimator.estimator_unbiased_monte_carlo,
    estimator.balanced_gradient_proportionality,
    stopping_time.expected_first_batch,
    stopping_time.without_replacement_not_slower,
    training.absent_symbol_frozen,
    training.balanced_sgd_equivalence,
]


def _add_data_arguments(parser: argparse.ArgumentParser) -> None:
    group = parser.add_argument_group("data")
    group.add_argument("--data", dest="data", help="training CSV file")
    group.add_argument("--schema", dest="layout", help="layout file of the CSV")
    group.add_argument("--test-data", dest="test_data", help="held-out CSV file")
    group.add_argument("--test-fraction", dest="test_fraction", type=float)
    group.add_argument("--scale-covariates", dest="scale_covariates", action="store_true", default=None)
    group.add_argument("--data-seed", dest="data_seed", type=int)
    _add_synthetic_arguments(group)


def _add_synthetic_arguments(group) -> None:
    group.add_argument("--synthetic", dest="synthetic", action="store_true", default=None)
    group.add_argument("--num-features", dest="num_features", type=int)
    group.add_argument("--cardinality", dest="cardinality", help="one value or one per feature")
    group.add_argument(
        "--distribution", dest="distribution", choices=[d.value for d in models.SymbolDistribution]
    )
    group.add_argument("--zipf-exponent", dest="zipf_exponent", type=float)
    group.add_argument("--n-rows", dest="n_rows", type=int)
    group.add_argument("--noise-std", dest="noise_std", type=float)


def _add_model_arguments(parser: argparse.ArgumentParser) -> None:
    group = parser.add_argument_group("model")
    group.add_argument("--model", dest="model", choices=[k.value for k in models.ModelKind])
    group.add_argument("--factors", dest="factors", help="factor features of a product model")
    group.add_argument("--covariate", dest="covariate", help="covariate multiplying the product")
    group.add_argument("--intercept", dest="intercept", action="store_true", default=None)
    group.add_argument("--symbol-intercept", dest="symbol_intercept")
    group.add_argument("--seasonal", dest="seasonal", help="feature grouping the seasonal profile")
    group.add_argument("--period", dest="period", help="1-based period covariate")
    group.add_argument("--num-periods", dest="num_periods", type=int)
    group.add_argument("--hidden-sizes", dest="hidden_sizes")
    group.add_argument("--width", dest="width", type=int)
    group.add_argument("--blocks", dest="blocks", type=int)
    group.add_argument("--use-covariates", dest="use_covariates", action="store_true", default=None)


def _add_run_arguments(parser: argparse.ArgumentParser) -> None:
    group = parser.add_argument_group("optimization")
    group.add_argument("--optimizer", dest="optimizer", choices=[k.value for k in models.OptimizerKind])
    group.add_argument("--estimator", dest="estimator", choices=[m.value for m in models.EstimatorMode])
    group.add_argument("--batch-size", dest="batch_size", type=int)
    group.add_argument("--epochs", dest="epochs", type=int)
    group.add_argument("--seed", dest="seed", type=int)
    group.add_argument("--repeats", dest="repeats", type=int)
    group.add_argument("--lr", dest="lr", type=float)
    group.add_argument("--adam-step", dest="adam_step", choices=[s.value for s in models.AdamStepMode])

    output = parser.add_argument_group("output")
    output.add_argument("-c", "--config_path", help="qc_baselib configuration file")
    output.add_argument("--out", dest="out", help="output directory")
    output.add_argument("--overwrite", action="store_true")
    output.add_argument("--plot", action="store_true")
    output.add_argument("--jobs", type=int, default=1)


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="categorical_gce",
        description="Train categorical models with the GCE gradient estimator and verify its theory.",
    )
    commands = parser.add_subparsers(dest="command", required=True)

    train = commands.add_parser("train", help="train one configuration")
    _add_data_arguments(train)
    _add_model_arguments(train)
    _add_run_arguments(train)
    train.add_argument("--dump-params", dest="dump_params", help="write the trained parameters")

    sweep = commands.add_parser("sweep", help="train a grid of configurations")
    _add_data_arguments(sweep)
    _add_model_arguments(sweep)
    _add_run_arguments(sweep)
    sweep.add_argument("--optimizers", default=",".join(k.value for k in models.OptimizerKind))
    sweep.add_argument("--estimators", default=",".join(m.value for m in models.EstimatorMode))
    sweep.add_argument("--batch-sizes", dest="batch_sizes", default="32")

    verify = commands.add_parser("verify", help="run the verification bundle")
    verify.add_argument("-c", "--config_path", help="qc_baselib configuration file")
    verify.add_argument("-g", "--generate_markdown", action="store_true")
    verify.add_argument("--seed", type=int)
    verify.add_argument("--report", help="plain-text report path")

    synth = commands.add_parser("synth", help="write a synthetic dataset")
    _add_synthetic_arguments(synth)
    synth.add_argument("--data-seed", dest="data_seed", type=int, default=0)
    synth.add_argument("--out", required=True, help="output directory")
    synth.add_argument("--overwrite", action="store_true")

    return parser


def check_preconditions(
    checker: types.ModuleType, checker_data: models.CheckerData
) -> bool:
    """
    Check preconditions. If not satisfied then set status as SKIPPED and return False
    """
    if checker_data.result.all_checkers_completed_without_issue(
        checker.CHECKER_PRECONDITIONS
    ):
        return True
    else:
        checker_data.result.set_checker_status(
            checker_bundle_name=constants.BUNDLE_NAME,
            checker_id=checker.CHECKER_ID,
            status=StatusType.SKIPPED,
        )

        checker_data.result.add_checker_summary(
            constants.BUNDLE_NAME,
            checker.CHECKER_ID,
            "Preconditions are not satisfied. Skip the check.",
        )

        return False


def execute_checker(
    checker: types.ModuleType,
    checker_data: models.CheckerData,
) -> None:
    # Register checker
    checker_data.result.register_checker(
        checker_bundle_name=constants.BUNDLE_NAME,
        checker_id=checker.CHECKER_ID,
        description=checker.CHECKER_DESCRIPTION,
    )

    # Register rule uid
    checker_data.result.register_rule_by_uid(
        checker_bundle_name=constants.BUNDLE_NAME,
        checker_id=checker.CHECKER_ID,
        rule_uid=checker.RULE_UID,
    )

    # Check preconditions. If not satisfied then set status as SKIPPED and return
    satisfied_preconditions = check_preconditions(checker, checker_data)
    if not satisfied_preconditions:
        return

    # Execute checker
    try:
        checker.check_rule(checker_data)

        # If checker is not explicitly set as SKIPPED, then set it as COMPLETED
        if (
            checker_data.result.get_checker_status(checker.CHECKER_ID)
            != StatusType.SKIPPED
        ):
            checker_data.result.set_checker_status(
                checker_bundle_name=constants.BUNDLE_NAME,
                checker_id=checker.CHECKER_ID,
                status=StatusType.COMPLETED,
            )
    except Exception as e:
        # If any exception occurs during the check, set the status as ERROR
        checker_data.result.set_checker_status(
            checker_bundle_name=constants.BUNDLE_NAME,
            checker_id=checker.CHECKER_ID,
            status=StatusType.ERROR,
        )

        checker_data.result.add_checker_summary(
            constants.BUNDLE_NAME, checker.CHECKER_ID, f"Error: {str(e)}."
        )

        logging.exception(f"An error occur in {checker.CHECKER_ID}.")


def run_checks(config: Configuration, result: Result) -> models.CheckerData:
    seed = utils.to_int(config.get_config_param("seed"))
    checker_data = models.CheckerData(
        config=config,
        result=result,
        seed=constants.DEFAULT_SEED if seed is None else seed,
    )

    # 1. Gradients, every other check relies on them
    execute_checker(gradients.model_gradients_match_finite_differences, checker_data)
    execute_checker(
        gradients.categorical_loss_gradient_matches_finite_differences, checker_data
    )

    # 2. Loss values
    execute_checker(loss.categorical_loss_reference_values, checker_data)
    execute_checker(loss.balanced_loss_identity, checker_data)

    # 3. Estimator
    execute_checker(estimator.estimator_unbiased_exhaustive, checker_data)
    execute_checker(estimator.estimator_unbiased_monte_carlo, checker_data)
    execute_checker(estimator.balanced_gradient_proportionality, checker_data)

    # 4. Stopping time
    execute_checker(stopping_time.expected_first_batch, checker_data)
    execute_checker(stopping_time.without_replacement_not_slower, checker_data)

    # 5. Training loop
    execute_checker(training.absent_symbol_frozen, checker_data)
    execute_checker(training.balanced_sgd_equivalence, checker_data)

    return checker_data


def format_report(records: Sequence[models.VerificationRecord]) -> str:
    lines = [
        f"{'PASS' if r.passed else 'FAIL'}  {r.checker_id}  {r.claim}  "
        f"computed={r.computed!r}  reference={r.reference!r}  tolerance={r.tolerance!r}"
        for r in records
    ]
    return "\n".join(lines) + "\n"


def _bundle_param(config: Configuration, name: str) -> Optional[str]:
    try:
        return config.get_checker_bundle_param(
            checker_bundle_name=constants.BUNDLE_NAME, param_name=name
        )
    except RuntimeError as e:
        # raised for an uninitialized configuration or a missing bundle
        logging.debug(f"No {name} for {constants.BUNDLE_NAME}: {e}")
        return None


def verify(args: argparse.Namespace) -> int:
    logging.info("Initializing checks")

    config = Configuration()
    if args.config_path is not None:
        config.load_from_file(xml_file_path=args.config_path)
    else:
        config.register_checker_bundle(checker_bundle_name=constants.BUNDLE_NAME)
        config.set_checker_bundle_param(
            checker_bundle_name=constants.BUNDLE_NAME,
            name="resultFile",
            value=constants.DEFAULT_RESULT_FILE,
        )
    if args.seed is not None:
        config.set_config_param(name="seed", value=args.seed)

    result = Result()
    result.register_checker_bundle(
        name=constants.BUNDLE_NAME,
        description="GCE theory verification bundle",
        version=constants.BUNDLE_VERSION,
        summary="",
    )
    result.set_result_version(version=constants.BUNDLE_VERSION)

    checker_data = run_checks(config, result)

    result.copy_param_from_config(config)

    result.write_to_file(
        _bundle_param(config, "resultFile") or constants.DEFAULT_RESULT_FILE,
        generate_summary=True,
    )

    if args.generate_markdown:
        result.write_markdown_doc("generated_checker_bundle_doc.md")

    report = format_report(checker_data.records)
    with open(args.report or constants.DEFAULT_REPORT_FILE, "w", encoding="utf-8") as report_file:
        report_file.write(report)
    sys.stdout.write(report)

    failed_claims = [r for r in checker_data.records if not r.passed]
    errored = [
        checker.CHECKER_ID
        for checker in CHECKERS
        if result.get_checker_status(checker.CHECKER_ID) != StatusType.COMPLETED
    ]
    logging.info(
        f"Done: {len(checker_data.records) - len(failed_claims)} of "
        f"{len(checker_data.records)} claims hold, {len(errored)} checks not completed"
    )
    return EXIT_FAILURE if failed_claims or errored else EXIT_OK


def _train_config(args: argparse.Namespace) -> harness_config.TrainConfig:
    values: Dict[str, object] = harness_config.config_file_values(args.config_path)
    cli_names = [
        "data", "layout", "test_data", "test_fraction", "scale_covariates", "data_seed",
        "num_features", "cardinality", "distribution", "zipf_exponent", "n_rows", "noise_std",
        "model", "factors", "covariate", "intercept", "symbol_intercept", "seasonal", "period",
        "num_periods", "hidden_sizes", "width", "blocks", "use_covariates", "optimizer",
        "estimator", "batch_size", "epochs", "seed", "repeats", "lr", "adam_step",
    ]  # fmt: skip
    for name in cli_names:
        value = getattr(args, name, None)
        if value is not None:
            values[name] = value

    return harness_config.merge_config(
        harness_config.TrainConfig(), values, synthetic_requested=bool(args.synthetic)
    )


def _grid(args: argparse.Namespace, config: harness_config.TrainConfig) -> SweepGrid:
    if args.command == "train":
        return SweepGrid(
            optimizers=(config.optimizer,),
            estimators=(config.estimator,),
            batch_sizes=(config.batch_size,),
        )
    try:
        return SweepGrid(
            optimizers=tuple(models.OptimizerKind(k) for k in utils.split_items(args.optimizers)),
            estimators=tuple(models.EstimatorMode(m) for m in utils.split_items(args.estimators)),
            batch_sizes=tuple(int(b) for b in utils.split_items(args.batch_sizes)),
        )
    except ValueError as e:
        raise errors.ConfigError(f"invalid sweep grid: {e}") from e


def train_or_sweep(args: argparse.Namespace, parser: argparse.ArgumentParser) -> int:
    config = _train_config(args)
    if config.data is None and config.synthetic is None:
        parser.error(f"{args.command} needs --data or --synthetic")
    if config.data is not None and config.layout is None:
        parser.error(f"{args.command} needs --schema with --data")

    grid = _grid(args, config)
    sweep = run_sweep(config, grid, jobs=args.jobs)

    tables = summary_tables(sweep)
    for batch_size, table in tables.items():
        logging.info(f"Batch size {batch_size}:\n{table.to_string(index=False)}")

    if args.out is not None:
        stem = config.model.value
        write_outputs(
            sweep.runs,
            args.out,
            tables={f"{stem}_b{b}": table for b, table in tables.items()},
            curves={f"{stem}_b{b}": loss_curves(sweep, b) for b in tables},
            plot=args.plot,
            overwrite=args.overwrite,
        )

    dump_path = getattr(args, "dump_params", None)
    if dump_path is not None and sweep.runs and sweep.runs[0].params is not None:
        dump_params(sweep.runs[0].params, dump_path)
        logging.info(f"Wrote parameters to {dump_path}")

    if any(run.status != models.RunStatus.COMPLETED for run in sweep.runs):
        return EXIT_FAILURE
    return EXIT_OK


def synth(args: argparse.Namespace) -> int:
    values = {
        name: getattr(args, name)
        for name in ("num_features", "cardinality", "distribution", "zipf_exponent", "n_rows", "noise_std")
        if getattr(args, name) is not None
    }
    config = harness_config.merge_config(
        harness_config.TrainConfig(), values, synthetic_requested=True
    )
    spec = config.synthetic

    dataset, truth = synthetic.generate_synthetic(
        num_features=spec.num_features,
        cardinalities=spec.cardinalities,
        distribution=spec.distribution,
        n=spec.n,
        noise_std=spec.noise_std,
        seed=args.data_seed,
        zipf_exponent=spec.zipf_exponent,
    )

    schema = dataset.schema
    frame = pd.DataFrame(
        {
            feature.name: [feature.alphabet[i] for i in dataset.symbols[:, index]]
            for index, feature in enumerate(schema.features)
        }
    )
    frame["y"] = dataset.targets

    if os.path.isdir(args.out) and os.listdir(args.out) and not args.overwrite:
        raise errors.OutputExistsError(
            f"output directory {args.out} is not empty, pass --overwrite to replace its files"
        )
    os.makedirs(args.out, exist_ok=True)

    frame.to_csv(os.path.join(args.out, "data.csv"), index=False)
    write_layout(
        TableLayout(
            feature_columns=schema.feature_names,
            target_column="y",
            alphabets={feature.name: feature.alphabet for feature in schema.features},
        ),
        os.path.join(args.out, "layout.txt"),
    )
    dump_params(truth, os.path.join(args.out, "truth.params"))

    logging.info(f"Wrote {len(dataset)} synthetic rows to {args.out}")
    return EXIT_OK


def cli_main(argv: Optional[Sequence[str]] = None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as e:
        return EXIT_OK if e.code in (0, None) else EXIT_USAGE

    try:
        if args.command == "verify":
            return verify(args)
        if args.command == "synth":
            return synth(args)
        return train_or_sweep(args, parser)
    except SystemExit as e:
        return EXIT_OK if e.code in (0, None) else EXIT_USAGE
    except errors.ConfigError as e:
        logging.error(f"Configuration error: {e}")
        parser.print_usage(sys.stderr)
        return EXIT_USAGE
    except (errors.GceError, OSError) as e:
        logging.error(f"Run failed: {e}")
        return EXIT_FAILURE


def main():
    sys.exit(cli_main())


if __name__ == "__main__":
    main()
