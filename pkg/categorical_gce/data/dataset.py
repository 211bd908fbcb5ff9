# SPDX-License-Identifier: MPL-2.0
# Copyright 2024, ASAM e.V.
# This Source Code Form is subject to the terms of the Mozilla
# Public License, v. 2.0. If a copy of the MPL was not distributed
# with this file, You can obtain one at https://mozilla.org/MPL/2.0/.

import logging
from dataclasses import dataclass
from typing import Dict, Iterator, List, Optional, Sequence, Tuple, Union

import numpy as np
import pandas as pd
from scipy import sparse

from categorical_gce.base import errors, models, utils
from categorical_gce.data.schema import FeatureSchema, check_columns, read_table


@dataclass(frozen=True)
class Row:
    symbols: Tuple[int, ...]
    covariates: np.ndarray
    target: Union[float, int]


def _read_only(array: np.ndarray) -> np.ndarray:
    array.setflags(write=False)
    return array


@dataclass(frozen=True)
class EncodedDataset:
    """
    Observations as per-feature symbol indices, numeric covariates and a
    target. Arrays are read-only once the dataset is built.
    """

    schema: FeatureSchema
    symbols: np.ndarray
    covariates: np.ndarray
    targets: np.ndarray
    task: models.Task = models.REGRESSION
    covariate_names: Tuple[str, ...] = ()

    def __post_init__(self) -> None:
        symbols = np.array(self.symbols, dtype=np.int64, ndmin=2)
        if symbols.size == 0:
            symbols = symbols.reshape(0, self.schema.num_features)
        n = symbols.shape[0]

        covariates = np.array(self.covariates, dtype=np.float64)
        if covariates.size == 0:
            covariates = covariates.reshape(n, 0)

        if self.task.kind == models.TaskKind.CLASSIFICATION:
            targets = np.array(self.targets, dtype=np.int64).reshape(-1)
        else:
            targets = np.array(self.targets, dtype=np.float64).reshape(-1)

        if symbols.shape[1] != self.schema.num_features:
            raise errors.DataError(
                f"expected {self.schema.num_features} symbol columns, got {symbols.shape[1]}"
            )
        if covariates.ndim != 2 or covariates.shape[0] != n:
            raise errors.DataError("every row needs the same number of covariates")
        if targets.shape[0] != n:
            raise errors.DataError(f"expected {n} targets, got {targets.shape[0]}")
        if len(self.covariate_names) not in (0, covariates.shape[1]):
            raise errors.DataError("covariate names do not match covariate columns")

        cardinalities = np.array(self.schema.cardinalities, dtype=np.int64)
        if n > 0 and (np.any(symbols < 0) or np.any(symbols >= cardinalities)):
            raise errors.DataError("symbol index outside its feature alphabet")

        if self.task.kind == models.TaskKind.CLASSIFICATION:
            if self.task.num_classes < 2:
                raise errors.ConfigError("classification needs at least two classes")
            if n > 0 and (np.any(targets < 0) or np.any(targets >= self.task.num_classes)):
                raise errors.DataError("class index outside the task classes")

        object.__setattr__(self, "symbols", _read_only(symbols))
        object.__setattr__(self, "covariates", _read_only(covariates))
        object.__setattr__(self, "targets", _read_only(targets))
        object.__setattr__(self, "covariate_names", tuple(self.covariate_names))

    def __len__(self) -> int:
        return int(self.symbols.shape[0])

    @property
    def num_covariates(self) -> int:
        return int(self.covariates.shape[1])

    def row(self, index: int) -> Row:
        target = self.targets[index]
        return Row(
            symbols=tuple(int(s) for s in self.symbols[index]),
            covariates=self.covariates[index],
            target=int(target) if self.task.kind == models.TaskKind.CLASSIFICATION else float(target),
        )

    def rows(self) -> Iterator[Row]:
        for index in range(len(self)):
            yield self.row(index)

    def subset(self, indices: Sequence[int]) -> "EncodedDataset":
        indices = np.asarray(indices, dtype=np.int64)
        return EncodedDataset(
            schema=self.schema,
            symbols=self.symbols[indices],
            covariates=self.covariates[indices],
            targets=self.targets[indices],
            task=self.task,
            covariate_names=self.covariate_names,
        )

    def covariate_index(self, name: str) -> int:
        if name not in self.covariate_names:
            raise errors.ConfigError(
                f"covariate '{name}' is not one of {list(self.covariate_names)}"
            )
        return self.covariate_names.index(name)


def from_symbols(
    schema: FeatureSchema,
    symbol_rows: Sequence[Sequence[str]],
    targets: Sequence,
    covariates: Optional[Sequence[Sequence[float]]] = None,
    task: models.Task = models.REGRESSION,
    covariate_names: Sequence[str] = (),
) -> EncodedDataset:
    """Encode rows given by symbol names, e.g. ``[("blue", "Paris"), ...]``."""
    encoded = []
    for row_index, symbol_row in enumerate(symbol_rows):
        if len(symbol_row) != schema.num_features:
            raise errors.DataError(
                f"row {row_index} has {len(symbol_row)} symbols, expected {schema.num_features}"
            )
        encoded_row = []
        for feature, symbol in zip(schema.features, symbol_row):
            if not feature.has_symbol(symbol):
                raise errors.UnknownSymbolError(feature.name, symbol, row_index)
            encoded_row.append(feature.index_of(symbol))
        encoded.append(encoded_row)

    n = len(encoded)
    return EncodedDataset(
        schema=schema,
        symbols=np.array(encoded, dtype=np.int64).reshape(n, schema.num_features),
        covariates=(
            np.zeros((n, 0)) if covariates is None else np.array(covariates, dtype=float)
        ),
        targets=targets,
        task=task,
        covariate_names=tuple(covariate_names),
    )


def _parse_numbers(frame: pd.DataFrame, column: str, csv_path: str) -> np.ndarray:
    values = pd.to_numeric(frame[column].str.strip(), errors="coerce").to_numpy(dtype=float)
    bad = np.flatnonzero(~np.isfinite(values))
    if bad.size > 0:
        first = int(bad[0])
        raise errors.DataError(
            f"{csv_path}: cannot parse '{frame[column].iloc[first]}' in column "
            f"'{column}' at data row {first} as a number"
        )
    return values


def _parse_classes(
    frame: pd.DataFrame, column: str, task: models.Task, csv_path: str
) -> np.ndarray:
    class_index = {label: i for i, label in enumerate(task.classes)}
    targets = np.empty(len(frame), dtype=np.int64)
    for row_index, label in enumerate(frame[column].tolist()):
        label = label.strip()
        if label not in class_index:
            raise errors.DataError(
                f"{csv_path}: invalid class '{label}' at data row {row_index}, "
                f"expected one of {list(task.classes)}"
            )
        targets[row_index] = class_index[label]
    return targets


def infer_classes(csv_path: str, target_column: str) -> Tuple[str, ...]:
    frame = read_table(csv_path)
    check_columns(frame, [target_column], csv_path)
    return tuple(sorted(set(label.strip() for label in frame[target_column].tolist())))


def load_csv(
    csv_path: str,
    schema: FeatureSchema,
    target_column: str,
    covariate_columns: Sequence[str] = (),
    task: models.Task = models.REGRESSION,
) -> EncodedDataset:
    """
    Every feature cell must be a symbol of the schema: one-hot encoding
    assumes all symbols are known up front, so unseen symbols are rejected
    instead of being encoded.
    """
    frame = read_table(csv_path)
    check_columns(
        frame, list(schema.feature_names) + [target_column] + list(covariate_columns), csv_path
    )

    symbols = np.empty((len(frame), schema.num_features), dtype=np.int64)
    for feature_index, feature in enumerate(schema.features):
        for row_index, symbol in enumerate(frame[feature.name].tolist()):
            if not feature.has_symbol(symbol):
                raise errors.UnknownSymbolError(feature.name, symbol, row_index)
            symbols[row_index, feature_index] = feature.index_of(symbol)

    covariates = np.zeros((len(frame), len(covariate_columns)), dtype=np.float64)
    for covariate_index, column in enumerate(covariate_columns):
        covariates[:, covariate_index] = _parse_numbers(frame, column, csv_path)

    if task.kind == models.TaskKind.CLASSIFICATION:
        targets = _parse_classes(frame, target_column, task, csv_path)
    else:
        targets = _parse_numbers(frame, target_column, csv_path)

    logging.info(f"Loaded {len(frame)} rows from {csv_path}")

    return EncodedDataset(
        schema=schema,
        symbols=symbols,
        covariates=covariates,
        targets=targets,
        task=task,
        covariate_names=tuple(covariate_columns),
    )


def one_hot(row: Union[Row, Sequence[int]], schema: FeatureSchema) -> np.ndarray:
    """Length-p binary vector with a single 1 in each feature block."""
    symbols = row.symbols if isinstance(row, Row) else row
    encoded = np.zeros(schema.num_symbols, dtype=np.float64)
    encoded[active_positions(symbols, schema)] = 1.0
    return encoded


def active_positions(symbols: Sequence[int], schema: FeatureSchema) -> np.ndarray:
    return np.asarray(schema.offsets, dtype=np.int64) + np.asarray(symbols, dtype=np.int64)


def one_hot_matrix(dataset: EncodedDataset) -> sparse.csr_matrix:
    n = len(dataset)
    columns = (dataset.symbols + np.asarray(dataset.schema.offsets)).reshape(-1)
    indptr = np.arange(0, n * dataset.schema.num_features + 1, dataset.schema.num_features)
    return sparse.csr_matrix(
        (np.ones(columns.size), columns, indptr),
        shape=(n, dataset.schema.num_symbols),
    )


@dataclass(frozen=True)
class SymbolGroups:
    """Rows of each (feature, symbol); per feature the groups partition the rows."""

    schema: FeatureSchema
    groups: Dict[models.SymbolKey, np.ndarray]

    def rows(self, key: models.SymbolKey) -> np.ndarray:
        return self.groups[key]

    def size(self, key: models.SymbolKey) -> int:
        return int(self.groups[key].size)

    def sizes(self) -> Dict[models.SymbolKey, int]:
        return {key: int(rows.size) for key, rows in self.groups.items()}

    def non_empty(self) -> List[models.SymbolKey]:
        return [key for key, rows in self.groups.items() if rows.size > 0]


def symbol_groups(dataset: EncodedDataset) -> SymbolGroups:
    if len(dataset) == 0:
        raise errors.DataError("symbol groups need a non-empty dataset")

    groups = {}
    for feature_index, feature in enumerate(dataset.schema.features):
        column = dataset.symbols[:, feature_index]
        for symbol_index in range(feature.cardinality):
            rows = np.flatnonzero(column == symbol_index)
            groups[dataset.schema.symbol_key(feature_index, symbol_index)] = _read_only(rows)

    return SymbolGroups(schema=dataset.schema, groups=groups)


def split_train_test(
    dataset: EncodedDataset, test_fraction: float, seed: utils.SeedLike
) -> Tuple[EncodedDataset, EncodedDataset]:
    """
    The test side gets round(n * test_fraction) rows, clamped so that both
    sides keep at least one row. Row order inside each side follows the
    original dataset.
    """
    n = len(dataset)
    if not 0.0 < test_fraction < 1.0:
        raise errors.ConfigError(f"test fraction must be in (0, 1), got {test_fraction}")
    if n < 2:
        raise errors.ConfigError(f"cannot split {n} rows into non-empty train and test sets")

    num_test = min(max(int(round(n * test_fraction)), 1), n - 1)
    permutation = utils.make_rng(seed).permutation(n)

    test_indices = np.sort(permutation[:num_test])
    train_indices = np.sort(permutation[num_test:])

    return dataset.subset(train_indices), dataset.subset(test_indices)


def minmax_scale(
    train: EncodedDataset, test: Optional[EncodedDataset] = None
) -> Tuple[EncodedDataset, Optional[EncodedDataset]]:
    """Scale covariates to [0, 1] with the training minima and maxima."""
    if train.num_covariates == 0:
        return train, test

    low = train.covariates.min(axis=0)
    span = train.covariates.max(axis=0) - low
    span[span == 0.0] = 1.0

    def _scaled(dataset: EncodedDataset) -> EncodedDataset:
        return EncodedDataset(
            schema=dataset.schema,
            symbols=dataset.symbols,
            covariates=(dataset.covariates - low) / span,
            targets=dataset.targets,
            task=dataset.task,
            covariate_names=dataset.covariate_names,
        )

    return _scaled(train), (_scaled(test) if test is not None else None)
