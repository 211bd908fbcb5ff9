# SPDX-License-Identifier: MPL-2.0
# Copyright 2024, ASAM e.V.
# This Source Code Form is subject to the terms of the Mozilla
# Public License, v. 2.0. If a copy of the MPL was not distributed
# with this file, You can obtain one at https://mozilla.org/MPL/2.0/.

from dataclasses import dataclass, field
from enum import Enum
from typing import List, Tuple, Union

from qc_baselib import Configuration, Result


class TaskKind(str, Enum):
    REGRESSION = "regression"
    CLASSIFICATION = "classification"


class BatchMode(str, Enum):
    PARTITION = "partition"
    WITH_REPLACEMENT = "withReplacement"
    WITHOUT_REPLACEMENT = "withoutReplacement"


class SymbolDistribution(str, Enum):
    UNIFORM = "uniform"
    ZIPF = "zipf"


class EstimatorMode(str, Enum):
    CLASSIC = "classic"
    GCE = "gce"


class OptimizerKind(str, Enum):
    SGD = "sgd"
    ADAGRAD = "adagrad"
    ADAM = "adam"


class AdamStepMode(str, Enum):
    PER_KEY = "per_key"
    GLOBAL = "global"


class ModelKind(str, Enum):
    PRODUCT = "product"
    MLP = "mlp"
    TAB_RESNET = "resnet"


class RunStatus(str, Enum):
    COMPLETED = "completed"
    DIVERGED = "diverged"
    FAILED = "failed"


@dataclass(frozen=True, order=True)
class SharedKey:
    name: str

    def __str__(self) -> str:
        return f"shared:{self.name}"


@dataclass(frozen=True, order=True)
class SymbolKey:
    feature: str
    symbol: str

    def __str__(self) -> str:
        return f"symbol:{self.feature}={self.symbol}"


ParamGroupKey = Union[SharedKey, SymbolKey]


@dataclass(frozen=True)
class Task:
    kind: TaskKind
    classes: Tuple[str, ...] = ()

    @property
    def num_classes(self) -> int:
        return len(self.classes)

    @property
    def output_size(self) -> int:
        if self.kind == TaskKind.REGRESSION:
            return 1
        return self.num_classes


REGRESSION = Task(kind=TaskKind.REGRESSION)


@dataclass
class VerificationRecord:
    checker_id: str
    claim: str
    computed: float
    reference: float
    tolerance: float
    passed: bool


@dataclass
class CheckerData:
    config: Configuration
    result: Result
    seed: int
    records: List[VerificationRecord] = field(default_factory=list)


class ExpectationMethod(str, Enum):
    EXHAUSTIVE = "exhaustive"
    MONTE_CARLO = "monteCarlo"


@dataclass(frozen=True)
class DrawSpec:
    """
    Batches of `m` rows drawn from Z = {0, ..., z_size - 1}, watched for rows
    of the subset T = subset_rows.
    """

    z_size: int
    subset_rows: Tuple[int, ...]
    m: int
    replacement: BatchMode = BatchMode.WITH_REPLACEMENT

    @property
    def t_size(self) -> int:
        return len(self.subset_rows)

    @property
    def batch_size(self) -> int:
        """Rows per batch; a batch without replacement holds at most z_size rows."""
        if self.replacement == BatchMode.WITHOUT_REPLACEMENT:
            return min(self.m, self.z_size)
        return self.m
