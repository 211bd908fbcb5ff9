# SPDX-License-Identifier: MPL-2.0
# Copyright 2024, ASAM e.V.
# This Source Code Form is subject to the terms of the Mozilla
# Public License, v. 2.0. If a copy of the MPL was not distributed
# with this file, You can obtain one at https://mozilla.org/MPL/2.0/.

import math

import numpy as np
import pytest
from test_setup import *

from categorical_gce.base import errors, models
from categorical_gce.checks import fixtures
from categorical_gce.checks.gradients import model_gradients_match_finite_differences
from categorical_gce.data.dataset import Row
from categorical_gce.data.schema import build_schema
from categorical_gce.model import core, losses, networks, params, product, spec
from categorical_gce.theory.finite_difference import (
    finite_difference_gradient,
    max_relative_error,
)

BLUE = models.SymbolKey("color", "blue")
PINK = models.SymbolKey("color", "pink")
PARIS = models.SymbolKey("store", "Paris")
ROME = models.SymbolKey("store", "Rome")
TAXI_SCHEMA = build_schema([("taxi", ["t1", "t2"]), ("payment", ["card", "cash"])])


def _row(symbols, covariates=(), target=0.0) -> Row:
    return Row(symbols=tuple(symbols), covariates=np.array(covariates, dtype=float), target=target)


def test_sales_forward_and_loss() -> None:
    sales_params = fixtures.sales_params()
    sales_spec = fixtures.sales_model()

    predictions = [
        core.forward(sales_spec, sales_params, row) for row in fixtures.sales_dataset().rows()
    ]

    assert predictions == [6.0, 4.0, 4.0, 10.0, 3.0]
    assert core.mean_loss(sales_spec, sales_params, fixtures.sales_dataset()) == pytest.approx(
        fixtures.SALES_CLASSIC_LOSS
    )


def test_sales_backward_touches_only_row_symbols() -> None:
    sales_params = fixtures.sales_params()
    row = fixtures.sales_dataset().row(0)

    grads = core.backward(fixtures.sales_model(), sales_params, row, row.target, models.REGRESSION)

    # d loss / d prediction = 2 * (6 - 14) = -16
    assert set(grads) == {BLUE, PARIS}
    assert grads[BLUE].tolist() == [-48.0]
    assert grads[PARIS].tolist() == [-32.0]


def test_init_product_values() -> None:
    taxi_spec = spec.product_model(
        ("taxi", "payment"), covariate_index=0, shared_intercept=True
    )

    taxi_params = core.init_params(taxi_spec, TAXI_SCHEMA, seed=0, num_covariates=1)

    assert taxi_params[models.SymbolKey("taxi", "t1")].tolist() == [1.0]
    assert taxi_params[product.INTERCEPT_KEY].tolist() == [0.0]
    assert core.forward(taxi_spec, taxi_params, _row((0, 1), [2.5])) == 2.5


def test_symbol_intercept_slots() -> None:
    tips_spec = spec.product_model(("taxi",), covariate_index=0, symbol_intercept_feature="taxi")
    tips_params = core.init_params(tips_spec, TAXI_SCHEMA, seed=0, num_covariates=1)
    t2 = models.SymbolKey("taxi", "t2")

    assert product.symbol_slots(tips_spec, "taxi") == product.SymbolSlots(
        factor=0, intercept=1, season=None, size=2
    )
    assert product.symbol_slots(tips_spec, "payment").size == 0
    assert tips_params[t2].tolist() == [1.0, 0.0]
    assert models.SymbolKey("payment", "card") not in tips_params

    tips_params[t2] = [2.0, 0.5]
    assert core.forward(tips_spec, tips_params, _row((1, 0), [3.0])) == 6.5

    grads = core.backward(tips_spec, tips_params, _row((1, 0), [3.0]), 6.0, models.REGRESSION)
    # d loss / d prediction = 1.0
    assert grads[t2].tolist() == [3.0, 1.0]


def test_seasonal_profile() -> None:
    seasonal_spec = spec.product_model(
        ("taxi",), seasonal_feature="payment", period_covariate_index=0, num_periods=4
    )
    seasonal_params = core.init_params(seasonal_spec, TAXI_SCHEMA, seed=0, num_covariates=1)
    card = models.SymbolKey("payment", "card")

    assert seasonal_params[card].shape == (4,)
    seasonal_params[card] = [1.0, 2.0, 3.0, 4.0]
    seasonal_params[models.SymbolKey("taxi", "t1")] = [0.5]

    assert core.forward(seasonal_spec, seasonal_params, _row((0, 0), [3.0])) == 1.5

    grads = core.backward(
        seasonal_spec, seasonal_params, _row((0, 0), [3.0]), 0.5, models.REGRESSION
    )
    # d loss / d prediction = 2.0, only the third period entry moves
    assert grads[card].tolist() == [0.0, 0.0, 1.0, 0.0]
    assert grads[models.SymbolKey("taxi", "t1")].tolist() == [6.0]

    with pytest.raises(errors.DataError):
        core.forward(seasonal_spec, seasonal_params, _row((0, 0), [5.0]))
    with pytest.raises(errors.DataError):
        core.forward(seasonal_spec, seasonal_params, _row((0, 0), [1.5]))


def test_mlp_is_invariant_to_alphabet_order() -> None:
    mlp_spec = spec.mlp()
    schema_a = fixtures.sales_schema(colors=("blue", "pink"))
    schema_b = fixtures.sales_schema(colors=("pink", "blue"))
    params_a = core.init_params(mlp_spec, schema_a, seed=2)
    params_b = params.ParamStore(schema_b)
    for key, values in params_a.items():
        params_b.add(key, values.copy())

    rows_a = fixtures.sales_dataset(schema_a).rows()
    rows_b = fixtures.sales_dataset(schema_b).rows()
    for row_a, row_b in zip(rows_a, rows_b):
        assert row_a.symbols[0] != row_b.symbols[0]
        assert core.forward(mlp_spec, params_a, row_a) == core.forward(mlp_spec, params_b, row_b)


@pytest.mark.parametrize(
    "model_spec",
    [
        spec.product_model(()),
        spec.product_model(("colour",)),
        spec.product_model(("taxi", "taxi")),
        spec.product_model(("taxi",), covariate_index=2),
        spec.product_model(("taxi",), seasonal_feature="payment"),
        spec.mlp(hidden_sizes=()),
        spec.mlp(hidden_sizes=(4, 0)),
        spec.tab_resnet(width=0),
    ],
)
def test_validate_spec_rejects(model_spec: spec.ModelSpec) -> None:
    with pytest.raises(errors.ConfigError):
        spec.validate_spec(model_spec, TAXI_SCHEMA, num_covariates=1)


def test_product_rejects_classification() -> None:
    classification = spec.ModelSpec(
        kind=models.ModelKind.PRODUCT,
        factor_features=("taxi",),
        task=models.Task(kind=models.TaskKind.CLASSIFICATION, classes=("a", "b")),
    )
    with pytest.raises(errors.ConfigError):
        spec.validate_spec(classification, TAXI_SCHEMA)


def test_mlp_parameter_groups() -> None:
    sales_schema = fixtures.sales_schema()
    mlp_params = core.init_params(spec.mlp((4, 8, 4)), sales_schema, seed=0)

    assert mlp_params[BLUE].shape == (4,)
    assert mlp_params[models.SharedKey("dense1.bias")].tolist() == [0.0] * 4
    assert mlp_params[models.SharedKey("dense2.weight")].shape == (8, 4)
    assert mlp_params[models.SharedKey("dense3.weight")].shape == (4, 8)
    assert mlp_params[networks.HEAD_WEIGHT].shape == (1, 4)
    assert len(mlp_params.symbol_keys()) == sales_schema.num_symbols


def test_resnet_parameter_groups() -> None:
    resnet_spec = spec.tab_resnet(width=6, num_blocks=3, use_covariates=True)
    resnet_params = core.init_params(resnet_spec, TAXI_SCHEMA, seed=0, num_covariates=2)

    assert resnet_params[models.SharedKey("input.covariate_weight")].shape == (6, 2)
    assert resnet_params[models.SharedKey("block3.linear2.weight")].shape == (6, 6)
    assert models.SharedKey("block4.linear1.weight") not in resnet_params


def test_network_init_is_seeded() -> None:
    first = core.init_params(spec.mlp(), TAXI_SCHEMA, seed=3)
    second = core.init_params(spec.mlp(), TAXI_SCHEMA, seed=3)
    other = core.init_params(spec.mlp(), TAXI_SCHEMA, seed=4)

    assert first.bitwise_equal(second)
    assert not first.bitwise_equal(other)


def test_network_backward_touches_only_row_symbols() -> None:
    mlp_spec = spec.mlp()
    mlp_params = core.init_params(mlp_spec, TAXI_SCHEMA, seed=0)

    grads = core.backward(mlp_spec, mlp_params, _row((1, 0)), 1.0, models.REGRESSION)

    symbol_keys = {key for key in grads if isinstance(key, models.SymbolKey)}
    assert symbol_keys == {models.SymbolKey("taxi", "t2"), models.SymbolKey("payment", "card")}
    assert set(mlp_params.shared_keys()) <= set(grads)


@pytest.mark.parametrize(
    "model_spec,tolerance",
    [
        (spec.product_model(("taxi", "payment")), 1e-6),
        (spec.product_model(("taxi",), covariate_index=0, shared_intercept=True), 1e-6),
        (spec.mlp(), 1e-5),
        (spec.tab_resnet(use_covariates=True), 1e-5),
    ],
)
def test_gradients_match_finite_differences(model_spec: spec.ModelSpec, tolerance: float) -> None:
    worst = model_gradients_match_finite_differences.worst_gradient_error(
        model_spec, num_pairs=10, seed=11
    )

    assert worst <= tolerance


def test_classifier_gradient_matches_finite_differences() -> None:
    task = models.Task(kind=models.TaskKind.CLASSIFICATION, classes=("a", "b", "c"))
    classifier = spec.mlp((5,), task=task)
    row = _row((0, 1), target=2)

    seed = 2
    classifier_params = core.init_params(classifier, TAXI_SCHEMA, seed=seed)
    while np.min(np.abs(networks.preactivations(classifier, classifier_params, row))) < 1e-3:
        seed += 1
        classifier_params = core.init_params(classifier, TAXI_SCHEMA, seed=seed)

    analytic = core.backward(classifier, classifier_params, row, 2, task)
    numeric = finite_difference_gradient(classifier, classifier_params, row, 2, task)

    assert max_relative_error(analytic, numeric) <= 1e-5


def test_classification_loss() -> None:
    task = models.Task(kind=models.TaskKind.CLASSIFICATION, classes=("a", "b"))

    assert losses.loss_value(np.array([0.0, 0.0]), 0, task) == pytest.approx(math.log(2.0))
    assert losses.loss_gradient(np.array([0.0, 0.0]), 0, task).tolist() == [-0.5, 0.5]
    assert losses.metric_value(np.array([0.1, 2.0]), 1, task) == 0.0
    assert losses.metric_value(np.array([0.1, 2.0]), 0, task) == 1.0
    assert losses.metric_name(task) == "error_rate"
    with pytest.raises(errors.DataError):
        losses.loss_value(np.array([0.0, 0.0]), 2, task)


def test_regression_loss() -> None:
    assert losses.loss_value(6.0, 14.0, models.REGRESSION) == 64.0
    assert losses.loss_gradient(6.0, 14.0, models.REGRESSION).tolist() == [-16.0]
    assert losses.metric_name(models.REGRESSION) == "mse"


def test_param_store_guards() -> None:
    store = params.ParamStore(fixtures.sales_schema())
    store.add(BLUE, [1.0])

    with pytest.raises(errors.InternalError):
        store.add(BLUE, [2.0])
    with pytest.raises(errors.InternalError):
        store[BLUE] = [1.0, 2.0]
    with pytest.raises(errors.InternalError):
        store[PINK] = [1.0]
    with pytest.raises(errors.SchemaError):
        store.add(models.SymbolKey("color", "red"), [1.0])


def test_param_store_copy_is_independent() -> None:
    store = fixtures.sales_params()
    copied = store.copy()

    copied[BLUE][0] = 7.0

    assert store[BLUE].tolist() == [2.0]
    assert not store.bitwise_equal(copied)
    assert store.bitwise_equal(copied, keys=[PINK, PARIS, ROME])


def test_dump_and_load_params(tmp_path) -> None:
    resnet_spec = spec.tab_resnet()
    resnet_params = core.init_params(resnet_spec, TAXI_SCHEMA, seed=5)
    path = str(tmp_path / "resnet.params")

    params.dump_params(resnet_params, path)
    loaded = params.load_params(path, TAXI_SCHEMA)

    assert loaded.keys() == resnet_params.keys()
    assert loaded.bitwise_equal(resnet_params)


def test_load_params_malformed(tmp_path) -> None:
    path = tmp_path / "bad.params"
    path.write_text("symbol\tcolor\tblue\t2\t1.0\n")

    with pytest.raises(errors.DataError):
        params.load_params(str(path), fixtures.sales_schema())
