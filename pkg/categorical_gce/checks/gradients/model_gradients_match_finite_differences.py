# SPDX-License-Identifier: MPL-2.0
# Copyright 2024, ASAM e.V.
# This Source Code Form is subject to the terms of the Mozilla
# Public License, v. 2.0. If a copy of the MPL was not distributed
# with this file, You can obtain one at https://mozilla.org/MPL/2.0/.

import logging
from typing import Callable, List, Tuple

import numpy as np

from categorical_gce import constants
from categorical_gce.base import models, utils
from categorical_gce.data.dataset import EncodedDataset, Row
from categorical_gce.data.schema import build_schema
from categorical_gce.model import core, networks
from categorical_gce.model.params import ParamStore
from categorical_gce.model.spec import ModelSpec, mlp, product_model, tab_resnet
from categorical_gce.theory.finite_difference import (
    finite_difference_gradient,
    max_relative_error,
)

CHECKER_ID = "check_gce_theory_model_gradients_match_finite_differences"
CHECKER_DESCRIPTION = (
    "Analytic row gradients of every model family must match central finite differences."
)
CHECKER_PRECONDITIONS = set()
RULE_UID = f"{constants.RULE_UID_PREFIX}:gradients.model_gradients_match_finite_differences"

NUM_PAIRS = 100
PRODUCT_TOLERANCE = 1e-6
NETWORK_TOLERANCE = 1e-5
# ReLU inputs closer to zero than this are redrawn, a finite difference
# across the kink is meaningless
KINK_MARGIN = 1e-3

_SCHEMA = build_schema(
    [
        ("taxi", ["t0", "t1", "t2"]),
        ("payment", ["card", "cash", "mobile", "voucher"]),
        ("group", ["g0", "g1"]),
    ]
)
_NUM_PERIODS = 6
_CLASSES = models.Task(kind=models.TaskKind.CLASSIFICATION, classes=("c0", "c1", "c2"))

# name, spec, tolerance
_MODELS: List[Tuple[str, ModelSpec, float]] = [
    ("product", product_model(("taxi", "payment")), PRODUCT_TOLERANCE),
    (
        "product with covariate and intercept",
        product_model(("taxi", "payment"), covariate_index=0, shared_intercept=True),
        PRODUCT_TOLERANCE,
    ),
    (
        "product with symbol intercept",
        product_model(("taxi",), covariate_index=0, symbol_intercept_feature="taxi"),
        PRODUCT_TOLERANCE,
    ),
    (
        "product with seasonal profile",
        product_model(
            ("taxi", "payment"),
            seasonal_feature="group",
            period_covariate_index=1,
            num_periods=_NUM_PERIODS,
        ),
        PRODUCT_TOLERANCE,
    ),
    ("mlp", mlp(), NETWORK_TOLERANCE),
    ("mlp classifier", mlp(task=_CLASSES), NETWORK_TOLERANCE),
    ("resnet", tab_resnet(use_covariates=True), NETWORK_TOLERANCE),
]


def _random_row(spec: ModelSpec, rng: np.random.Generator) -> Tuple[Row, object]:
    symbols = tuple(int(rng.integers(0, c)) for c in _SCHEMA.cardinalities)
    covariates = np.array([rng.uniform(0.5, 2.0), float(rng.integers(1, _NUM_PERIODS + 1))])
    if spec.task.kind == models.TaskKind.CLASSIFICATION:
        target = int(rng.integers(0, spec.task.num_classes))
    else:
        target = float(rng.normal(1.0, 1.0))
    return Row(symbols=symbols, covariates=covariates, target=target), target


def _random_params(spec: ModelSpec, rng: np.random.Generator) -> ParamStore:
    params = core.init_params(spec, _SCHEMA, seed=rng, num_covariates=2)
    for key, values in params.items():
        if spec.is_network:
            params[key] = rng.normal(0.0, 0.5, size=values.shape)
        else:
            params[key] = rng.uniform(0.5, 1.5, size=values.shape)
    return params


def _near_kink(spec: ModelSpec, params: ParamStore, row: Row) -> bool:
    if not spec.is_network:
        return False
    return bool(np.min(np.abs(networks.preactivations(spec, params, row))) < KINK_MARGIN)


def worst_gradient_error(spec: ModelSpec, num_pairs: int, seed: utils.SeedLike) -> float:
    rng = utils.make_rng(seed)
    worst = 0.0
    pairs = 0
    while pairs < num_pairs:
        params = _random_params(spec, rng)
        row, target = _random_row(spec, rng)
        if _near_kink(spec, params, row):
            continue
        analytic = core.backward(spec, params, row, target, spec.task)
        numeric = finite_difference_gradient(spec, params, row, target, spec.task)
        worst = max(worst, max_relative_error(analytic, numeric))
        pairs += 1
    return worst


def check_rule(checker_data: models.CheckerData) -> None:
    logging.info("Executing model_gradients_match_finite_differences check")

    for index, (name, spec, tolerance) in enumerate(_MODELS):
        worst = worst_gradient_error(spec, NUM_PAIRS, (checker_data.seed, index))
        utils.record_claim(
            checker_data,
            CHECKER_ID,
            RULE_UID,
            f"{name} gradient max relative error over {NUM_PAIRS} rows",
            computed=worst,
            reference=0.0,
            tolerance=tolerance,
        )

    utils.summarize_claims(checker_data, CHECKER_ID)
