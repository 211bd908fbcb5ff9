# SPDX-License-Identifier: MPL-2.0
# Copyright 2024, ASAM e.V.
# This Source Code Form is subject to the terms of the Mozilla
# Public License, v. 2.0. If a copy of the MPL was not distributed
# with this file, You can obtain one at https://mozilla.org/MPL/2.0/.

"""
Small dense networks over one-hot encoded rows, with hand-written backward
passes.

The first layer weight column of each one-hot position is stored under the
SymbolKey of that position, so a row only produces gradients for its own
symbols. Every other parameter is stored under a SharedKey.
"""

from dataclasses import dataclass, field
from typing import Dict, List, Tuple

import numpy as np

from categorical_gce.base import models
from categorical_gce.data.dataset import Row
from categorical_gce.data.schema import FeatureSchema
from categorical_gce.model import losses
from categorical_gce.model.params import ParamStore
from categorical_gce.model.spec import ModelSpec

HEAD_WEIGHT = models.SharedKey("head.weight")
HEAD_BIAS = models.SharedKey("head.bias")


def _input_keys(spec: ModelSpec) -> Tuple[models.SharedKey, models.SharedKey]:
    prefix = "dense1" if spec.kind == models.ModelKind.MLP else "input"
    return models.SharedKey(f"{prefix}.bias"), models.SharedKey(f"{prefix}.covariate_weight")


def _hidden_keys(layer: int) -> Tuple[models.SharedKey, models.SharedKey]:
    return models.SharedKey(f"dense{layer}.weight"), models.SharedKey(f"dense{layer}.bias")


def _block_keys(block: int) -> Tuple[models.SharedKey, ...]:
    return tuple(
        models.SharedKey(f"block{block}.{name}")
        for name in ("linear1.weight", "linear1.bias", "linear2.weight", "linear2.bias")
    )


def _uniform(rng: np.random.Generator, shape: Tuple[int, int]) -> np.ndarray:
    bound = 1.0 / np.sqrt(shape[1])
    return rng.uniform(-bound, bound, size=shape)


def _first_layer_width(spec: ModelSpec) -> int:
    if spec.kind == models.ModelKind.MLP:
        return spec.hidden_sizes[0]
    return spec.width


def init_network(
    spec: ModelSpec, schema: FeatureSchema, num_covariates: int, rng: np.random.Generator
) -> ParamStore:
    """Weights ~ U(-1/sqrt(fan_in), 1/sqrt(fan_in)), biases 0."""
    params = ParamStore(schema)
    used_covariates = num_covariates if spec.use_covariates else 0
    width = _first_layer_width(spec)

    first = _uniform(rng, (width, schema.num_symbols + used_covariates))
    for feature_index, feature in enumerate(schema.features):
        for symbol_index in range(feature.cardinality):
            position = schema.position(feature_index, symbol_index)
            params.add(schema.symbol_key(feature_index, symbol_index), first[:, position])

    bias_key, covariate_key = _input_keys(spec)
    params.add(bias_key, np.zeros(width))
    if used_covariates > 0:
        params.add(covariate_key, first[:, schema.num_symbols :])

    if spec.kind == models.ModelKind.MLP:
        for layer, (fan_in, fan_out) in enumerate(
            zip(spec.hidden_sizes[:-1], spec.hidden_sizes[1:]), start=2
        ):
            weight_key, layer_bias_key = _hidden_keys(layer)
            params.add(weight_key, _uniform(rng, (fan_out, fan_in)))
            params.add(layer_bias_key, np.zeros(fan_out))
        last = spec.hidden_sizes[-1]
    else:
        for block in range(1, spec.num_blocks + 1):
            w1, b1, w2, b2 = _block_keys(block)
            params.add(w1, _uniform(rng, (width, width)))
            params.add(b1, np.zeros(width))
            params.add(w2, _uniform(rng, (width, width)))
            params.add(b2, np.zeros(width))
        last = width

    params.add(HEAD_WEIGHT, _uniform(rng, (spec.task.output_size, last)))
    params.add(HEAD_BIAS, np.zeros(spec.task.output_size))

    return params


@dataclass
class _Trace:
    """Intermediate values kept by the forward pass for the backward pass."""

    first: np.ndarray = None
    layers: List[Tuple[np.ndarray, np.ndarray]] = field(default_factory=list)
    blocks: List[Tuple[np.ndarray, np.ndarray, np.ndarray]] = field(default_factory=list)
    last: np.ndarray = None
    output: np.ndarray = None


def _first_layer(spec: ModelSpec, params: ParamStore, row: Row) -> np.ndarray:
    schema = params.schema
    bias_key, covariate_key = _input_keys(spec)
    z = params[bias_key].copy()
    for key in schema.row_symbol_keys(row.symbols):
        z += params[key]
    if covariate_key in params:
        z += params[covariate_key] @ row.covariates
    return z


def _run(spec: ModelSpec, params: ParamStore, row: Row) -> _Trace:
    trace = _Trace()
    trace.first = _first_layer(spec, params, row)

    if spec.kind == models.ModelKind.MLP:
        h = np.maximum(trace.first, 0.0)
        for layer in range(2, len(spec.hidden_sizes) + 1):
            weight_key, bias_key = _hidden_keys(layer)
            z = params[weight_key] @ h + params[bias_key]
            trace.layers.append((h, z))
            h = np.maximum(z, 0.0)
        trace.last = h
    else:
        h = trace.first
        for block in range(1, spec.num_blocks + 1):
            w1, b1, w2, b2 = _block_keys(block)
            u = params[w1] @ h + params[b1]
            r = np.maximum(u, 0.0)
            trace.blocks.append((h, u, r))
            h = h + params[w2] @ r + params[b2]
        trace.blocks.append((h, None, None))
        trace.last = np.maximum(h, 0.0)

    trace.output = params[HEAD_WEIGHT] @ trace.last + params[HEAD_BIAS]
    return trace


def forward_network(spec: ModelSpec, params: ParamStore, row: Row):
    output = _run(spec, params, row).output
    if spec.task.kind == models.TaskKind.REGRESSION:
        return float(output[0])
    return output


def preactivations(spec: ModelSpec, params: ParamStore, row: Row) -> np.ndarray:
    """Every value entering a ReLU for this row, concatenated."""
    trace = _run(spec, params, row)
    if spec.kind == models.ModelKind.MLP:
        return np.concatenate([trace.first] + [z for _, z in trace.layers])
    return np.concatenate([u for _, u, _ in trace.blocks[:-1]] + [trace.blocks[-1][0]])


def backward_network(
    spec: ModelSpec, params: ParamStore, row: Row, target, task: models.Task
) -> Dict[models.ParamGroupKey, np.ndarray]:
    trace = _run(spec, params, row)
    prediction = (
        float(trace.output[0])
        if task.kind == models.TaskKind.REGRESSION
        else trace.output
    )
    d_output = losses.loss_gradient(prediction, target, task)

    grads: Dict[models.ParamGroupKey, np.ndarray] = {}
    grads[HEAD_WEIGHT] = np.outer(d_output, trace.last)
    grads[HEAD_BIAS] = d_output.copy()
    d_last = params[HEAD_WEIGHT].T @ d_output

    if spec.kind == models.ModelKind.MLP:
        d_h = d_last
        for layer in range(len(spec.hidden_sizes), 1, -1):
            h_in, z = trace.layers[layer - 2]
            d_z = d_h * (z > 0.0)
            weight_key, bias_key = _hidden_keys(layer)
            grads[weight_key] = np.outer(d_z, h_in)
            grads[bias_key] = d_z
            d_h = params[weight_key].T @ d_z
        d_first = d_h * (trace.first > 0.0)
    else:
        h_out = trace.blocks[-1][0]
        d_h = d_last * (h_out > 0.0)
        for block in range(spec.num_blocks, 0, -1):
            h_in, u, r = trace.blocks[block - 1]
            w1, b1, w2, b2 = _block_keys(block)
            grads[w2] = np.outer(d_h, r)
            grads[b2] = d_h.copy()
            d_u = (params[w2].T @ d_h) * (u > 0.0)
            grads[w1] = np.outer(d_u, h_in)
            grads[b1] = d_u
            d_h = d_h + params[w1].T @ d_u
        d_first = d_h

    bias_key, covariate_key = _input_keys(spec)
    grads[bias_key] = d_first.copy()
    if covariate_key in params:
        grads[covariate_key] = np.outer(d_first, row.covariates)
    for key in params.schema.row_symbol_keys(row.symbols):
        grads[key] = d_first.copy()

    return grads
