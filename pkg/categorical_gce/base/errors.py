# SPDX-License-Identifier: MPL-2.0
# Copyright 2024, ASAM e.V.
# This Source Code Form is subject to the terms of the Mozilla
# Public License, v. 2.0. If a copy of the MPL was not distributed
# with this file, You can obtain one at https://mozilla.org/MPL/2.0/.


class GceError(Exception):
    pass


class SchemaError(GceError, ValueError):
    pass


class DataError(GceError, ValueError):
    pass


class UnknownSymbolError(DataError):
    def __init__(self, feature: str, symbol: str, row: int = None):
        self.feature = feature
        self.symbol = symbol
        self.row = row
        location = f" at data row {row}" if row is not None else ""
        super().__init__(
            f"unknown symbol '{symbol}' for feature '{feature}'{location}"
        )


class ConfigError(GceError, ValueError):
    pass


class SizeError(GceError, ValueError):
    pass


class EstimatorError(GceError, RuntimeError):
    pass


class InternalError(GceError, RuntimeError):
    pass


class OutputExistsError(GceError, FileExistsError):
    pass
