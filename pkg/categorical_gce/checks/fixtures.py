# SPDX-License-Identifier: MPL-2.0
# Copyright 2024, ASAM e.V.
# This Source Code Form is subject to the terms of the Mozilla
# Public License, v. 2.0. If a copy of the MPL was not distributed
# with this file, You can obtain one at https://mozilla.org/MPL/2.0/.

"""
Small hand-checkable datasets the verification checks run on.

The sales table: sales = mu[color] * gamma[store] with
mu_blue=2, mu_pink=1, gamma_Paris=3, gamma_Rome=4, gamma_Berlin=5.
"""

from typing import List, Sequence, Tuple

import numpy as np

from categorical_gce.base import models, utils
from categorical_gce.data.dataset import EncodedDataset, from_symbols
from categorical_gce.data.schema import FeatureSchema, build_schema
from categorical_gce.model import core
from categorical_gce.model.params import ParamStore
from categorical_gce.model.spec import ModelSpec, product_model

SALES_ROWS = (
    ("blue", "Paris", 14.0),
    ("pink", "Rome", 12.0),
    ("pink", "Rome", 13.0),
    ("blue", "Berlin", 17.0),
    ("pink", "Paris", 8.0),
)
SALES_VALUES = {
    models.SymbolKey("color", "blue"): 2.0,
    models.SymbolKey("color", "pink"): 1.0,
    models.SymbolKey("store", "Paris"): 3.0,
    models.SymbolKey("store", "Rome"): 4.0,
    models.SymbolKey("store", "Berlin"): 5.0,
}
# per-row squared errors 64, 64, 81, 49, 25
SALES_CLASSIC_LOSS = 56.6
SALES_CATEGORICAL_LOSS = 335.0 / 6.0


def sales_schema(colors: Sequence[str] = ("blue", "pink")) -> FeatureSchema:
    return build_schema([("color", list(colors)), ("store", ["Paris", "Rome", "Berlin"])])


def sales_dataset(
    schema: FeatureSchema = None, rows: Sequence[Tuple[str, str, float]] = SALES_ROWS
) -> EncodedDataset:
    schema = sales_schema() if schema is None else schema
    return from_symbols(
        schema, [(color, store) for color, store, _ in rows], [sales for _, _, sales in rows]
    )


def sales_model() -> ModelSpec:
    return product_model(factor_features=("color", "store"))


def sales_params(schema: FeatureSchema = None) -> ParamStore:
    schema = sales_schema() if schema is None else schema
    params = core.init_params(sales_model(), schema, seed=0)
    for key, value in SALES_VALUES.items():
        params[key] = [value]
    return params


def balanced_dataset(num_symbols: int, per_symbol: int, seed: utils.SeedLike) -> EncodedDataset:
    """One feature, every symbol appearing exactly per_symbol times."""
    rng = utils.make_rng(seed)
    symbols = [f"s{k}" for k in range(num_symbols)]
    schema = build_schema([("symbol", symbols)])
    rows = [(symbol,) for symbol in symbols for _ in range(per_symbol)]
    return from_symbols(schema, rows, rng.uniform(1.0, 3.0, size=len(rows)))


def random_params(
    spec: ModelSpec, dataset: EncodedDataset, rng: np.random.Generator
) -> ParamStore:
    params = core.init_params(spec, dataset.schema, seed=rng, num_covariates=dataset.num_covariates)
    for key, values in params.items():
        params[key] = rng.uniform(0.5, 1.5, size=values.shape)
    return params


def toy_instances(seed: utils.SeedLike) -> List[Tuple[EncodedDataset, ModelSpec, ParamStore]]:
    """
    Product-model instances with |Z| = 1..6 rows over two features, plus the
    single-feature dataset [a, a, b].
    """
    rng = utils.make_rng(seed)
    schema = build_schema([("color", ["blue", "pink"]), ("store", ["Paris", "Rome", "Berlin"])])
    spec = sales_model()

    instances = []
    for z_size in range(1, 7):
        symbols = np.column_stack(
            [rng.integers(0, cardinality, size=z_size) for cardinality in schema.cardinalities]
        )
        dataset = EncodedDataset(
            schema=schema,
            symbols=symbols,
            covariates=np.zeros((z_size, 0)),
            targets=rng.uniform(5.0, 20.0, size=z_size),
        )
        instances.append((dataset, spec, random_params(spec, dataset, rng)))

    letters = build_schema([("letter", ["a", "b"])])
    dataset = from_symbols(letters, [("a",), ("a",), ("b",)], [1.0, 2.0, 4.0])
    letters_spec = product_model(factor_features=("letter",))
    instances.append((dataset, letters_spec, random_params(letters_spec, dataset, rng)))

    return instances
