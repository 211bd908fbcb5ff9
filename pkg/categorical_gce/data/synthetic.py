# SPDX-License-Identifier: MPL-2.0
# Copyright 2024, ASAM e.V.
# This Source Code Form is subject to the terms of the Mozilla
# Public License, v. 2.0. If a copy of the MPL was not distributed
# with this file, You can obtain one at https://mozilla.org/MPL/2.0/.

import logging
from typing import Sequence, Tuple, Union

import numpy as np

from categorical_gce.base import errors, models, utils
from categorical_gce.data.dataset import EncodedDataset
from categorical_gce.data.schema import FeatureSchema, build_schema
from categorical_gce.model import core
from categorical_gce.model.params import ParamStore
from categorical_gce.model.spec import ModelSpec, product_model

TRUTH_LOW = 0.5
TRUTH_HIGH = 2.0


def synthetic_schema(cardinalities: Sequence[int]) -> FeatureSchema:
    """
    Features f0, f1, ... with symbols s0, s1, ... zero padded so that the
    sorted alphabet order is the generation order.
    """
    alphabets = []
    for feature_index, cardinality in enumerate(cardinalities):
        width = len(str(cardinality - 1))
        alphabets.append(
            (f"f{feature_index}", [f"s{k:0{width}d}" for k in range(cardinality)])
        )
    return build_schema(alphabets)


def ground_truth_spec(schema: FeatureSchema) -> ModelSpec:
    return product_model(factor_features=schema.feature_names)


def symbol_probabilities(
    cardinality: int,
    distribution: models.SymbolDistribution,
    zipf_exponent: float = 1.5,
) -> np.ndarray:
    if distribution == models.SymbolDistribution.UNIFORM:
        return np.full(cardinality, 1.0 / cardinality)
    weights = np.arange(1, cardinality + 1, dtype=np.float64) ** (-zipf_exponent)
    return weights / weights.sum()


def generate_synthetic(
    num_features: int,
    cardinalities: Union[int, Sequence[int]],
    distribution: models.SymbolDistribution,
    n: int,
    noise_std: float,
    seed: utils.SeedLike,
    zipf_exponent: float = 1.5,
) -> Tuple[EncodedDataset, ParamStore]:
    """
    Rows drawn from the given symbol distribution (independently per
    feature), targets = product model of a random ground truth + Gaussian
    noise. Under zipf the first symbol of each alphabet is the most frequent.
    """
    if isinstance(cardinalities, int):
        cardinalities = [cardinalities] * num_features
    cardinalities = [int(c) for c in cardinalities]
    distribution = models.SymbolDistribution(distribution)

    if num_features < 1 or len(cardinalities) != num_features:
        raise errors.ConfigError(
            f"expected {num_features} cardinalities, got {len(cardinalities)}"
        )
    if any(c < 1 for c in cardinalities):
        raise errors.ConfigError(f"cardinalities must be at least 1, got {cardinalities}")
    if n < 1:
        raise errors.ConfigError(f"synthetic datasets need at least one row, got {n}")
    if noise_std < 0:
        raise errors.ConfigError(f"noise standard deviation must be >= 0, got {noise_std}")

    rng = utils.make_rng(seed)
    schema = synthetic_schema(cardinalities)
    spec = ground_truth_spec(schema)

    truth = core.init_params(spec, schema, seed=0)
    for key in truth.symbol_keys():
        truth[key] = rng.uniform(TRUTH_LOW, TRUTH_HIGH, size=truth[key].shape)

    symbols = np.column_stack(
        [
            rng.choice(
                cardinality,
                size=n,
                p=symbol_probabilities(cardinality, distribution, zipf_exponent),
            )
            for cardinality in cardinalities
        ]
    )
    noise = rng.normal(0.0, noise_std, size=n) if noise_std > 0 else np.zeros(n)

    dataset = EncodedDataset(
        schema=schema, symbols=symbols, covariates=np.zeros((n, 0)), targets=np.zeros(n)
    )
    clean = np.array([core.forward(spec, truth, row) for row in dataset.rows()])

    logging.info(
        f"Generated {n} synthetic rows, cardinalities {cardinalities}, {distribution.value} symbols"
    )

    return (
        EncodedDataset(
            schema=schema,
            symbols=symbols,
            covariates=np.zeros((n, 0)),
            targets=clean + noise,
        ),
        truth,
    )
