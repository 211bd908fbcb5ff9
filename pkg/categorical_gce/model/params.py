# SPDX-License-Identifier: MPL-2.0
# Copyright 2024, ASAM e.V.
# This Source Code Form is subject to the terms of the Mozilla
# Public License, v. 2.0. If a copy of the MPL was not distributed
# with this file, You can obtain one at https://mozilla.org/MPL/2.0/.

"""
Symbol-grouped parameter storage.

Parameter dump format, one group per line, tab separated:

    shared  <name>             <shape>  <value> <value> ...
    symbol  <feature> <symbol> <shape>  <value> <value> ...

``<shape>`` is the group shape joined by ``x`` (``1``, ``4``, ``8x4``) and
values are in C order, printed with full round-trip precision. Lines
starting with ``#`` are comments.
"""

from typing import Dict, Iterator, List, Optional, Tuple

import numpy as np

from categorical_gce.base import errors, models
from categorical_gce.data.schema import FeatureSchema


class ParamStore:
    """
    Parameter groups keyed by SharedKey or SymbolKey, in registration order.
    Group shapes are fixed once registered.
    """

    def __init__(
        self,
        schema: FeatureSchema,
        groups: Optional[Dict[models.ParamGroupKey, np.ndarray]] = None,
    ):
        self.schema = schema
        self._groups: Dict[models.ParamGroupKey, np.ndarray] = {}
        for key, values in (groups or {}).items():
            self.add(key, values)

    def add(self, key: models.ParamGroupKey, values) -> None:
        if key in self._groups:
            raise errors.InternalError(f"parameter group {key} is already registered")
        if isinstance(key, models.SymbolKey) and not self.schema.contains(key):
            raise errors.SchemaError(f"parameter group {key} is not in the schema")
        self._groups[key] = np.array(values, dtype=np.float64, ndmin=1)

    def __getitem__(self, key: models.ParamGroupKey) -> np.ndarray:
        return self._groups[key]

    def __setitem__(self, key: models.ParamGroupKey, values) -> None:
        current = self._groups.get(key)
        if current is None:
            raise errors.InternalError(f"parameter group {key} is not registered")
        values = np.asarray(values, dtype=np.float64)
        if values.shape != current.shape:
            raise errors.InternalError(
                f"shape {values.shape} does not match group {key} of shape {current.shape}"
            )
        self._groups[key] = values.copy()

    def __contains__(self, key) -> bool:
        return key in self._groups

    def __iter__(self) -> Iterator[models.ParamGroupKey]:
        return iter(self._groups)

    def __len__(self) -> int:
        return len(self._groups)

    def keys(self) -> List[models.ParamGroupKey]:
        return list(self._groups.keys())

    def items(self):
        return self._groups.items()

    @property
    def shapes(self) -> Dict[models.ParamGroupKey, Tuple[int, ...]]:
        return {key: values.shape for key, values in self._groups.items()}

    @property
    def num_parameters(self) -> int:
        return int(sum(values.size for values in self._groups.values()))

    def shared_keys(self) -> List[models.SharedKey]:
        return [key for key in self._groups if isinstance(key, models.SharedKey)]

    def symbol_keys(self) -> List[models.SymbolKey]:
        return [key for key in self._groups if isinstance(key, models.SymbolKey)]

    def copy(self) -> "ParamStore":
        return ParamStore(
            self.schema, {key: values.copy() for key, values in self._groups.items()}
        )

    def bitwise_equal(self, other: "ParamStore", keys=None) -> bool:
        keys = self.keys() if keys is None else keys
        return all(
            key in other
            and self[key].shape == other[key].shape
            and self[key].tobytes() == other[key].tobytes()
            for key in keys
        )


def _format_shape(shape: Tuple[int, ...]) -> str:
    return "x".join(str(dim) for dim in shape)


def format_params(params: ParamStore) -> str:
    lines = ["# categorical-gce parameters"]
    for key, values in params.items():
        if isinstance(key, models.SharedKey):
            head = ["shared", key.name]
        else:
            head = ["symbol", key.feature, key.symbol]
        numbers = " ".join(repr(float(v)) for v in values.reshape(-1))
        lines.append("\t".join(head + [_format_shape(values.shape), numbers]))
    return "\n".join(lines) + "\n"


def dump_params(params: ParamStore, path: str) -> None:
    with open(path, "w", encoding="utf-8") as dump_file:
        dump_file.write(format_params(params))


def load_params(path: str, schema: FeatureSchema) -> ParamStore:
    params = ParamStore(schema)
    with open(path, "r", encoding="utf-8") as dump_file:
        for line_number, line in enumerate(dump_file, start=1):
            line = line.rstrip("\n")
            if line.strip() == "" or line.startswith("#"):
                continue
            fields = line.split("\t")
            if fields[0] == "shared" and len(fields) == 4:
                key = models.SharedKey(fields[1])
                shape_field, values_field = fields[2], fields[3]
            elif fields[0] == "symbol" and len(fields) == 5:
                key = models.SymbolKey(fields[1], fields[2])
                shape_field, values_field = fields[3], fields[4]
            else:
                raise errors.DataError(f"{path}:{line_number}: malformed parameter line")

            shape = tuple(int(dim) for dim in shape_field.split("x"))
            values = np.array([float(v) for v in values_field.split()], dtype=np.float64)
            if values.size != int(np.prod(shape)):
                raise errors.DataError(
                    f"{path}:{line_number}: {values.size} values for shape {shape}"
                )
            params.add(key, values.reshape(shape))
    return params
