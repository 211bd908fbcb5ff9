# SPDX-License-Identifier: MPL-2.0
# Copyright 2024, ASAM e.V.
# This Source Code Form is subject to the terms of the Mozilla
# Public License, v. 2.0. If a copy of the MPL was not distributed
# with this file, You can obtain one at https://mozilla.org/MPL/2.0/.

BUNDLE_NAME = "gceBundle"
BUNDLE_VERSION = "v1.0.0"
RULE_UID_PREFIX = "categorical.gce:theory:1.0.0"

DEFAULT_RESULT_FILE = "gce_bundle_report.xqar"
DEFAULT_REPORT_FILE = "gce_verification_report.txt"
DEFAULT_TEST_FRACTION = 0.2
DEFAULT_SEED = 0

SUMMARY_COLUMNS = ("SGD", "SGD&GCE", "Adagrad", "Adagrad&GCE", "Adam", "Adam&GCE")
