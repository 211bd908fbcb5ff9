# SPDX-License-Identifier: MPL-2.0
# Copyright 2024, ASAM e.V.
# This Source Code Form is subject to the terms of the Mozilla
# Public License, v. 2.0. If a copy of the MPL was not distributed
# with this file, You can obtain one at https://mozilla.org/MPL/2.0/.

"""
Categorical product models, e.g.

    sales = mu[color] * gamma[store]
    tips  = (gamma[taxi] * mu[payment]) * distance + b
    price = (gamma[manufacturer] * mu[region]) * year + b
    tips  = gamma[taxi] * distance + b[taxi]
    sales = theta[store] * theta[color] * Theta[group, week]

Each symbol owns one parameter group whose entries are laid out as
[factor][intercept][season x num_periods], keeping only the parts the
symbol's feature plays in the model.
"""

from dataclasses import dataclass
from typing import Dict, List, Optional, Tuple

import numpy as np

from categorical_gce.base import errors, models
from categorical_gce.data.dataset import Row
from categorical_gce.data.schema import FeatureSchema
from categorical_gce.model import losses
from categorical_gce.model.params import ParamStore
from categorical_gce.model.spec import ModelSpec

INTERCEPT_KEY = models.SharedKey("b")


@dataclass(frozen=True)
class SymbolSlots:
    factor: Optional[int] = None
    intercept: Optional[int] = None
    season: Optional[int] = None
    size: int = 0


def symbol_slots(spec: ModelSpec, feature_name: str) -> SymbolSlots:
    offset = 0
    factor = intercept = season = None
    if feature_name in spec.factor_features:
        factor = offset
        offset += 1
    if feature_name == spec.symbol_intercept_feature:
        intercept = offset
        offset += 1
    if feature_name == spec.seasonal_feature:
        season = offset
        offset += spec.num_periods
    return SymbolSlots(factor=factor, intercept=intercept, season=season, size=offset)


def init_product(spec: ModelSpec, schema: FeatureSchema) -> ParamStore:
    """Factors and seasonal entries start at 1.0, intercepts at 0.0."""
    params = ParamStore(schema)
    for feature in schema.features:
        slots = symbol_slots(spec, feature.name)
        if slots.size == 0:
            continue
        initial = np.ones(slots.size)
        if slots.intercept is not None:
            initial[slots.intercept] = 0.0
        for symbol in feature.alphabet:
            params.add(models.SymbolKey(feature.name, symbol), initial)

    if spec.shared_intercept:
        params.add(INTERCEPT_KEY, [0.0])

    return params


def _period_index(spec: ModelSpec, row: Row) -> int:
    period = float(row.covariates[spec.period_covariate_index])
    index = int(period) - 1
    if index + 1 != period or not 0 <= index < spec.num_periods:
        raise errors.DataError(
            f"period {period} is not an integer in [1, {spec.num_periods}]"
        )
    return index


def _terms(
    spec: ModelSpec, params: ParamStore, row: Row
) -> Tuple[List[Tuple[models.SymbolKey, int, float]], List[Tuple[models.SymbolKey, int]]]:
    """Multiplicative terms (key, slot, value) and additive symbol slots."""
    multiplicative = []
    additive = []
    schema = params.schema
    for feature_index, feature in enumerate(schema.features):
        slots = symbol_slots(spec, feature.name)
        if slots.size == 0:
            continue
        key = schema.symbol_key(feature_index, row.symbols[feature_index])
        values = params[key]
        if slots.factor is not None:
            multiplicative.append((key, slots.factor, float(values[slots.factor])))
        if slots.season is not None:
            slot = slots.season + _period_index(spec, row)
            multiplicative.append((key, slot, float(values[slot])))
        if slots.intercept is not None:
            additive.append((key, slots.intercept))
    return multiplicative, additive


def _scale(spec: ModelSpec, row: Row) -> float:
    if spec.covariate_index is None:
        return 1.0
    return float(row.covariates[spec.covariate_index])


def forward_product(spec: ModelSpec, params: ParamStore, row: Row) -> float:
    multiplicative, additive = _terms(spec, params, row)

    prediction = 0.0
    if len(multiplicative) > 0:
        prediction = float(np.prod([value for _, _, value in multiplicative])) * _scale(
            spec, row
        )
    for key, slot in additive:
        prediction += float(params[key][slot])
    if spec.shared_intercept:
        prediction += float(params[INTERCEPT_KEY][0])

    return prediction


def backward_product(
    spec: ModelSpec, params: ParamStore, row: Row, target, task: models.Task
) -> Dict[models.ParamGroupKey, np.ndarray]:
    multiplicative, additive = _terms(spec, params, row)
    prediction = forward_product(spec, params, row)
    upstream = float(losses.loss_gradient(prediction, target, task)[0])

    grads: Dict[models.ParamGroupKey, np.ndarray] = {}

    def _slot(key: models.SymbolKey, slot: int, value: float) -> None:
        if key not in grads:
            grads[key] = np.zeros_like(params[key])
        grads[key][slot] += value

    values = np.array([value for _, _, value in multiplicative])
    # product of all other terms, without dividing by the term itself
    prefix = np.concatenate(([1.0], np.cumprod(values)[:-1])) if values.size else values
    suffix = (
        np.concatenate((np.cumprod(values[::-1])[::-1][1:], [1.0])) if values.size else values
    )
    scale = _scale(spec, row)
    for term_index, (key, slot, _) in enumerate(multiplicative):
        _slot(key, slot, upstream * prefix[term_index] * suffix[term_index] * scale)

    for key, slot in additive:
        _slot(key, slot, upstream)

    if spec.shared_intercept:
        grads[INTERCEPT_KEY] = np.array([upstream])

    return grads
