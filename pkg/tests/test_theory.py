# SPDX-License-Identifier: MPL-2.0
# Copyright 2024, ASAM e.V.
# This Source Code Form is subject to the terms of the Mozilla
# Public License, v. 2.0. If a copy of the MPL was not distributed
# with this file, You can obtain one at https://mozilla.org/MPL/2.0/.

import numpy as np
import pytest
from test_setup import *

from categorical_gce.base import errors, models, utils
from categorical_gce.checks import fixtures
from categorical_gce.model import core, spec
from categorical_gce.theory import (
    categorical_loss,
    expectation,
    finite_difference,
    stopping_time,
)

PINK = models.SymbolKey("color", "pink")


def test_sales_loss_values() -> None:
    sales = fixtures.sales_dataset()
    sales_params = fixtures.sales_params()

    loss = categorical_loss.categorical_loss(sales_params, sales, fixtures.sales_model())

    assert abs(loss - 335.0 / 6.0) <= 1e-9
    assert abs(core.mean_loss(fixtures.sales_model(), sales_params, sales) - 56.6) <= 1e-9


def test_row_weights() -> None:
    weights = categorical_loss.row_weights(fixtures.sales_dataset())

    # groups: blue {0, 3}, pink {1, 2, 4}, Paris {0, 4}, Rome {1, 2}, Berlin {3}
    expected = np.array(
        [1 / 2 + 1 / 2, 1 / 3 + 1 / 2, 1 / 3 + 1 / 2, 1 / 2 + 1, 1 / 3 + 1 / 2]
    ) / 5
    assert np.allclose(weights, expected, rtol=0.0, atol=1e-15)
    assert weights.sum() == pytest.approx(1.0)


def test_row_weights_skip_empty_groups() -> None:
    red_schema = fixtures.sales_schema(colors=("blue", "pink", "red"))

    with_red_schema = categorical_loss.row_weights(fixtures.sales_dataset(red_schema))
    without = categorical_loss.row_weights(fixtures.sales_dataset())

    assert np.array_equal(with_red_schema, without)


@pytest.mark.parametrize("num_symbols,per_symbol", [(1, 4), (3, 5), (7, 2)])
def test_balanced_loss_equals_mean_loss(num_symbols: int, per_symbol: int) -> None:
    balanced = fixtures.balanced_dataset(num_symbols, per_symbol, seed=0)
    balanced_spec = spec.product_model(("symbol",))
    params = fixtures.random_params(balanced_spec, balanced, utils.make_rng(1))

    loss = categorical_loss.categorical_loss(params, balanced, balanced_spec)

    assert loss == pytest.approx(core.mean_loss(balanced_spec, params, balanced), abs=1e-12)


def test_categorical_gradient_matches_finite_differences() -> None:
    sales = fixtures.sales_dataset()
    sales_params = fixtures.sales_params()
    sales_spec = fixtures.sales_model()

    analytic = categorical_loss.full_categorical_gradient(sales_params, sales, sales_spec)
    numeric = finite_difference.finite_difference(
        lambda candidate: categorical_loss.categorical_loss(candidate, sales, sales_spec),
        sales_params,
    )

    assert finite_difference.max_relative_error(analytic, numeric) <= 1e-8


def test_balanced_gradients_are_proportional() -> None:
    balanced = fixtures.balanced_dataset(4, 3, seed=2)
    balanced_spec = spec.product_model(("symbol",))
    params = fixtures.random_params(balanced_spec, balanced, utils.make_rng(3))

    categorical = categorical_loss.full_categorical_gradient(params, balanced, balanced_spec)
    classic = categorical_loss.classic_full_gradient(params, balanced, balanced_spec)

    for key in params.symbol_keys():
        assert np.allclose(categorical[key], classic[key], rtol=1e-12, atol=1e-12)


def test_finite_difference_invalid_step() -> None:
    with pytest.raises(errors.ConfigError):
        finite_difference.finite_difference(lambda p: 0.0, fixtures.sales_params(), step=0.0)


def test_finite_difference_leaves_params_unchanged() -> None:
    sales_params = fixtures.sales_params()
    before = sales_params.copy()
    row = fixtures.sales_dataset().row(0)

    numeric = finite_difference.finite_difference_gradient(
        fixtures.sales_model(), sales_params, row, row.target
    )

    assert sales_params.bitwise_equal(before)
    assert numeric[PINK].tolist() == [0.0]


def test_relative_error_has_unit_floor() -> None:
    assert utils.relative_error(1e-3, 2e-3) == pytest.approx(1e-3)
    assert utils.relative_error(100.0, 101.0) == pytest.approx(1.0 / 101.0)
    assert utils.relative_error(np.array([]), np.array([])) == 0.0


def test_stopping_time_probabilities() -> None:
    assert stopping_time.stopping_time_p1(10, 2, 1) == pytest.approx(0.2)
    assert stopping_time.stopping_time_p1(10, 5, 2) == pytest.approx(0.75)
    assert stopping_time.stopping_time_p1_without_replacement(10, 2, 2) == pytest.approx(
        17.0 / 45.0
    )
    assert stopping_time.stopping_time_p1_without_replacement(5, 1, 8) == 1.0
    spec_ = stopping_time.draw_spec(10, 2, 1)
    assert stopping_time.expected_stopping_time(spec_) == pytest.approx(5.0)


@pytest.mark.parametrize("z_size,t_size,m", [(5, 0, 1), (5, 6, 1), (5, 1, 0)])
def test_stopping_time_invalid_sizes(z_size: int, t_size: int, m: int) -> None:
    with pytest.raises(errors.ConfigError):
        stopping_time.stopping_time_p1(z_size, t_size, m)


def test_stopping_time_simulation() -> None:
    mean_with, mean_without = stopping_time.simulate_paired(5, 1, 2, trials=20_000, seed=0)

    assert mean_with == pytest.approx(1.0 / 0.36, rel=0.03)
    assert mean_without == pytest.approx(2.5, rel=0.03)
    assert mean_without <= mean_with


def test_stopping_time_simulation_is_deterministic() -> None:
    spec_ = stopping_time.draw_spec(10, 2, 3, models.BatchMode.WITHOUT_REPLACEMENT)

    first = stopping_time.stopping_time_simulate(spec_, trials=30_000, seed=5)
    second = stopping_time.stopping_time_simulate(spec_, trials=30_000, seed=5)

    assert first == second


def test_stopping_time_draw_covers_everything() -> None:
    mean_with, mean_without = stopping_time.simulate_paired(3, 1, 3, trials=1000, seed=0)

    assert mean_without == 1.0
    assert mean_with > 1.0


def test_independent_without_replacement_simulation() -> None:
    mean = stopping_time.simulate_without_replacement(5, 1, 2, trials=40_000, seed=0)
    again = stopping_time.simulate_without_replacement(5, 1, 2, trials=40_000, seed=0)

    assert mean == pytest.approx(2.5, rel=0.03)
    assert mean == again
    assert stopping_time.simulate_without_replacement(3, 1, 3, trials=500, seed=0) == 1.0
    assert stopping_time.simulate_without_replacement(3, 1, 7, trials=500, seed=0) == 1.0

    with pytest.raises(errors.ConfigError):
        stopping_time.simulate_without_replacement(5, 1, 0, trials=10, seed=0)
    with pytest.raises(errors.ConfigError):
        stopping_time.simulate_without_replacement(5, 1, 2, trials=0, seed=0)


@pytest.mark.parametrize(
    "replacement", [models.BatchMode.WITH_REPLACEMENT, models.BatchMode.WITHOUT_REPLACEMENT]
)
def test_exhaustive_expectation_is_subset_mean(replacement: models.BatchMode) -> None:
    scores = np.array([[1.0, 0.0], [2.0, 1.0], [3.0, 5.0], [4.0, 9.0]])
    draws = models.DrawSpec(z_size=4, subset_rows=(0, 2), m=3, replacement=replacement)

    result = expectation.subset_estimator_expectation(scores, draws)

    assert np.allclose(result.expected, [2.0, 2.5], rtol=0.0, atol=1e-12)
    assert result.exact.tolist() == [2.0, 2.5]
    assert result.max_abs_error <= 1e-12


def test_exhaustive_draw_counts() -> None:
    scores = np.arange(4.0)

    with_replacement = expectation.subset_estimator_expectation(
        scores, models.DrawSpec(z_size=4, subset_rows=(1,), m=2)
    )
    without_replacement = expectation.subset_estimator_expectation(
        scores,
        models.DrawSpec(
            z_size=4, subset_rows=(1,), m=2, replacement=models.BatchMode.WITHOUT_REPLACEMENT
        ),
    )

    # 16 - 9 draws with row 1, 12 - 6 ordered pairs with row 1
    assert with_replacement.kept_draws == 7
    assert without_replacement.kept_draws == 6


def test_exhaustive_expectation_size_limit() -> None:
    with pytest.raises(errors.SizeError):
        expectation.subset_estimator_expectation(
            np.zeros(10), models.DrawSpec(z_size=10, subset_rows=(0,), m=7)
        )


def test_monte_carlo_expectation() -> None:
    scores = np.array([1.0, 5.0, 2.0, 8.0, 3.0])
    draws = models.DrawSpec(z_size=5, subset_rows=(1, 3), m=2)

    result = expectation.subset_estimator_expectation(
        scores, draws, models.ExpectationMethod.MONTE_CARLO, trials=50_000, seed=1
    )
    repeated = expectation.subset_estimator_expectation(
        scores, draws, models.ExpectationMethod.MONTE_CARLO, trials=50_000, seed=1
    )

    assert result.relative_error <= 0.02
    assert result.expected.tolist() == repeated.expected.tolist()
    assert result.kept_draws < 50_000


def test_sales_group_expectation() -> None:
    sales = fixtures.sales_dataset()

    result = expectation.estimator_expectation(
        fixtures.sales_model(), fixtures.sales_params(), sales, PINK, m=2
    )
    classic = categorical_loss.classic_full_gradient(
        fixtures.sales_params(), sales.subset([1, 2, 4]), fixtures.sales_model()
    )

    assert result.max_abs_error <= 1e-12
    assert np.allclose(result.exact, classic[PINK], rtol=0.0, atol=1e-12)


def test_group_expectation_invalid_groups() -> None:
    red_schema = fixtures.sales_schema(colors=("blue", "pink", "red"))
    sales = fixtures.sales_dataset(red_schema)
    red_params = fixtures.sales_params(red_schema)

    with pytest.raises(errors.ConfigError):
        expectation.estimator_expectation(
            fixtures.sales_model(), red_params, sales, models.SymbolKey("color", "red"), m=2
        )
    with pytest.raises(errors.ConfigError):
        expectation.estimator_expectation(
            fixtures.sales_model(), red_params, sales, models.SymbolKey("size", "XL"), m=2
        )
