# SPDX-License-Identifier: MPL-2.0
# Copyright 2024, ASAM e.V.
# This Source Code Form is subject to the terms of the Mozilla
# Public License, v. 2.0. If a copy of the MPL was not distributed
# with this file, You can obtain one at https://mozilla.org/MPL/2.0/.

"""
Feature schemas and the dataset layout file.

The layout file is a plain-text key/value document, one ``key = value`` per
line, ``#`` starting a comment:

    features = color, store
    target = sales
    covariates = distance
    task = regression
    classes = <=50K, >50K          # classification only, optional
    alphabet.color = blue, pink, red

``alphabet.<feature>`` pins the alphabet of a feature instead of inferring it
from the data, which allows symbols that never occur in the file.
"""

import logging
from dataclasses import dataclass, field
from functools import cached_property
from typing import Dict, Iterable, List, Mapping, Optional, Sequence, Tuple

import numpy as np
import pandas as pd

from categorical_gce.base import errors, models, utils


@dataclass(frozen=True)
class CategoricalFeature:
    name: str
    alphabet: Tuple[str, ...]

    def __post_init__(self) -> None:
        object.__setattr__(self, "alphabet", tuple(str(s) for s in self.alphabet))
        if len(self.alphabet) == 0:
            raise errors.SchemaError(f"feature '{self.name}' has an empty alphabet")
        if len(set(self.alphabet)) != len(self.alphabet):
            raise errors.SchemaError(
                f"feature '{self.name}' has duplicated symbols in its alphabet"
            )

    @property
    def cardinality(self) -> int:
        return len(self.alphabet)

    @cached_property
    def _index(self) -> Dict[str, int]:
        return {symbol: i for i, symbol in enumerate(self.alphabet)}

    def has_symbol(self, symbol: str) -> bool:
        return symbol in self._index

    def index_of(self, symbol: str) -> int:
        index = self._index.get(symbol)
        if index is None:
            raise errors.UnknownSymbolError(self.name, symbol)
        return index


@dataclass(frozen=True)
class FeatureSchema:
    features: Tuple[CategoricalFeature, ...]

    def __post_init__(self) -> None:
        object.__setattr__(self, "features", tuple(self.features))
        if len(self.features) == 0:
            raise errors.SchemaError("a schema needs at least one feature")
        names = [feature.name for feature in self.features]
        if len(set(names)) != len(names):
            raise errors.SchemaError(f"duplicated feature names in {names}")

    @property
    def num_features(self) -> int:
        return len(self.features)

    @property
    def num_symbols(self) -> int:
        return int(sum(feature.cardinality for feature in self.features))

    @property
    def feature_names(self) -> Tuple[str, ...]:
        return tuple(feature.name for feature in self.features)

    @property
    def cardinalities(self) -> Tuple[int, ...]:
        return tuple(feature.cardinality for feature in self.features)

    @cached_property
    def offsets(self) -> Tuple[int, ...]:
        """Start position of each feature block in the one-hot vector."""
        return tuple(int(o) for o in np.cumsum((0,) + self.cardinalities[:-1]))

    @cached_property
    def _feature_index(self) -> Dict[str, int]:
        return {name: i for i, name in enumerate(self.feature_names)}

    @cached_property
    def _symbol_keys(self) -> Tuple[Tuple[models.SymbolKey, ...], ...]:
        return tuple(
            tuple(models.SymbolKey(feature.name, symbol) for symbol in feature.alphabet)
            for feature in self.features
        )

    def feature_index(self, name: str) -> int:
        index = self._feature_index.get(name)
        if index is None:
            raise errors.SchemaError(f"feature '{name}' is not in the schema")
        return index

    def feature(self, name: str) -> CategoricalFeature:
        return self.features[self.feature_index(name)]

    def symbol_key(self, feature_index: int, symbol_index: int) -> models.SymbolKey:
        return self._symbol_keys[feature_index][symbol_index]

    def feature_symbol_keys(self, feature_index: int) -> Tuple[models.SymbolKey, ...]:
        return self._symbol_keys[feature_index]

    def symbol_keys(self) -> List[models.SymbolKey]:
        return [key for keys in self._symbol_keys for key in keys]

    def row_symbol_keys(self, symbols: Sequence[int]) -> List[models.SymbolKey]:
        return [self._symbol_keys[f][s] for f, s in enumerate(symbols)]

    def position(self, feature_index: int, symbol_index: int) -> int:
        return self.offsets[feature_index] + symbol_index

    def contains(self, key: models.SymbolKey) -> bool:
        index = self._feature_index.get(key.feature)
        if index is None:
            return False
        return self.features[index].has_symbol(key.symbol)


def build_schema(alphabets: Iterable[Tuple[str, Sequence[str]]]) -> FeatureSchema:
    """Build a schema from (feature name, alphabet) pairs, keeping their order."""
    return FeatureSchema(
        features=tuple(
            CategoricalFeature(name=name, alphabet=tuple(alphabet))
            for name, alphabet in alphabets
        )
    )


def read_table(csv_path: str) -> pd.DataFrame:
    """
    Read a UTF-8, comma separated file with a header row. Every cell is kept
    as text; empty cells stay empty strings.
    """
    try:
        frame = pd.read_csv(
            csv_path, dtype=str, keep_default_na=False, encoding="utf-8"
        )
    except FileNotFoundError as e:
        raise errors.DataError(f"data file {csv_path} does not exist") from e
    except pd.errors.EmptyDataError as e:
        raise errors.DataError(f"data file {csv_path} is empty") from e
    except (pd.errors.ParserError, UnicodeDecodeError) as e:
        raise errors.DataError(f"data file {csv_path} cannot be parsed: {e}") from e

    if len(frame) == 0:
        raise errors.DataError(f"data file {csv_path} has no data rows")

    return frame


def check_columns(frame: pd.DataFrame, columns: Iterable[str], csv_path: str) -> None:
    missing = [column for column in columns if column not in frame.columns]
    if len(missing) > 0:
        raise errors.SchemaError(f"columns {missing} are missing from {csv_path}")


def infer_schema(csv_path: str, feature_columns: Sequence[str]) -> FeatureSchema:
    """
    Alphabets are the sorted distinct values of each feature column, which
    keeps parameter indexing identical across runs.
    """
    if len(feature_columns) == 0:
        raise errors.SchemaError("at least one feature column is required")

    frame = read_table(csv_path)
    check_columns(frame, feature_columns, csv_path)

    schema = build_schema(
        (column, sorted(set(frame[column].tolist()))) for column in feature_columns
    )

    logging.info(
        f"Inferred schema from {csv_path}: {schema.num_features} features, "
        f"{schema.num_symbols} symbols"
    )

    return schema


@dataclass(frozen=True)
class TableLayout:
    feature_columns: Tuple[str, ...]
    target_column: str
    covariate_columns: Tuple[str, ...] = ()
    task: models.Task = models.REGRESSION
    alphabets: Mapping[str, Tuple[str, ...]] = field(default_factory=dict)

    def schema_from(self, csv_path: str) -> FeatureSchema:
        """Pinned alphabets win, the remaining ones are inferred from the file."""
        missing = [c for c in self.feature_columns if c not in self.alphabets]
        inferred = infer_schema(csv_path, missing) if len(missing) > 0 else None

        return build_schema(
            (
                column,
                (
                    self.alphabets[column]
                    if column in self.alphabets
                    else inferred.feature(column).alphabet
                ),
            )
            for column in self.feature_columns
        )


_LAYOUT_KEYS = {"features", "target", "covariates", "task", "classes"}


def parse_task(kind: Optional[str], classes: Sequence[str] = ()) -> models.Task:
    try:
        task_kind = models.TaskKind(str(kind).strip().lower())
    except ValueError as e:
        raise errors.ConfigError(f"unknown task kind '{kind}'") from e

    if task_kind == models.TaskKind.REGRESSION:
        return models.REGRESSION

    return models.Task(kind=task_kind, classes=tuple(classes))


def load_layout(layout_path: str) -> TableLayout:
    values: Dict[str, str] = {}
    alphabets: Dict[str, Tuple[str, ...]] = {}

    try:
        with open(layout_path, "r", encoding="utf-8") as layout_file:
            lines = layout_file.readlines()
    except OSError as e:
        raise errors.ConfigError(f"cannot read layout file {layout_path}: {e}") from e

    for line_number, raw_line in enumerate(lines, start=1):
        line = raw_line.split("#", 1)[0].strip()
        if line == "":
            continue
        if "=" not in line:
            raise errors.ConfigError(
                f"{layout_path}:{line_number}: expected 'key = value', got '{line}'"
            )
        key, value = (part.strip() for part in line.split("=", 1))
        if key.startswith("alphabet."):
            alphabets[key[len("alphabet.") :]] = tuple(utils.split_items(value))
        elif key in _LAYOUT_KEYS:
            values[key] = value
        else:
            raise errors.ConfigError(f"{layout_path}:{line_number}: unknown key '{key}'")

    feature_columns = tuple(utils.split_items(values.get("features")))
    if len(feature_columns) == 0:
        raise errors.ConfigError(f"{layout_path}: 'features' is required")
    if values.get("target", "") == "":
        raise errors.ConfigError(f"{layout_path}: 'target' is required")

    unknown_alphabets = [name for name in alphabets if name not in feature_columns]
    if len(unknown_alphabets) > 0:
        raise errors.ConfigError(
            f"{layout_path}: alphabets given for non-feature columns {unknown_alphabets}"
        )

    return TableLayout(
        feature_columns=feature_columns,
        target_column=values["target"],
        covariate_columns=tuple(utils.split_items(values.get("covariates"))),
        task=parse_task(
            values.get("task", "regression"), utils.split_items(values.get("classes"))
        ),
        alphabets=alphabets,
    )


def write_layout(layout: TableLayout, layout_path: str) -> None:
    lines = [
        f"features = {', '.join(layout.feature_columns)}",
        f"target = {layout.target_column}",
        f"covariates = {', '.join(layout.covariate_columns)}",
        f"task = {layout.task.kind.value}",
    ]
    if layout.task.kind == models.TaskKind.CLASSIFICATION and layout.task.classes:
        lines.append(f"classes = {', '.join(layout.task.classes)}")
    for name, alphabet in layout.alphabets.items():
        lines.append(f"alphabet.{name} = {', '.join(alphabet)}")

    with open(layout_path, "w", encoding="utf-8") as layout_file:
        layout_file.write("\n".join(lines) + "\n")
