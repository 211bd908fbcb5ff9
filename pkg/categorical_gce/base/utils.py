# SPDX-License-Identifier: MPL-2.0
# Copyright 2024, ASAM e.V.
# This Source Code Form is subject to the terms of the Mozilla
# Public License, v. 2.0. If a copy of the MPL was not distributed
# with this file, You can obtain one at https://mozilla.org/MPL/2.0/.

import logging
import re
from typing import List, Optional, Sequence, Union

import numpy as np
from qc_baselib import IssueSeverity

from categorical_gce import constants
from categorical_gce.base import models

SeedLike = Union[int, Sequence[int], np.random.Generator, np.random.SeedSequence]

_re_split_items = re.compile(r"\s*,\s*")


def to_int(s) -> Optional[int]:
    try:
        return int(s)
    except (ValueError, TypeError):
        return None


def to_float(s) -> Optional[float]:
    try:
        return float(s)
    except (ValueError, TypeError):
        return None


def to_bool(s) -> Optional[bool]:
    if isinstance(s, bool):
        return s
    if s is None:
        return None
    return str(s).strip().lower() in ("true", "1", "yes", "on")


def split_items(value: Optional[str]) -> List[str]:
    """
    Split a comma separated list, dropping blanks.
    Example:
        "color, store," returns ["color", "store"]
    """
    if value is None:
        return []
    items = _re_split_items.split(str(value).strip())
    return [item for item in items if item != ""]


def make_rng(seed: SeedLike, *stream: int) -> np.random.Generator:
    """
    Return a generator for the given seed. Extra integers select an
    independent stream, e.g. make_rng(seed, epoch) for per-epoch shuffling.
    """
    if isinstance(seed, np.random.Generator):
        if stream:
            return np.random.default_rng(seed.integers(0, 2**63, size=1)[0])
        return seed
    if isinstance(seed, np.random.SeedSequence):
        seed = seed.entropy
    if isinstance(seed, (list, tuple, np.ndarray)):
        words = [int(word) for word in seed]
    else:
        words = [int(seed)]
    return np.random.default_rng(np.random.SeedSequence([*words, *stream]))


def relative_error(computed: np.ndarray, reference: np.ndarray) -> float:
    """
    Max elementwise |computed - reference| / max(|computed|, |reference|, 1).
    Below unit magnitude this degrades to the absolute error.
    """
    computed = np.asarray(computed, dtype=float)
    reference = np.asarray(reference, dtype=float)
    if computed.size == 0:
        return 0.0
    scale = np.maximum(np.maximum(np.abs(computed), np.abs(reference)), 1.0)
    return float(np.max(np.abs(computed - reference) / scale))


def record_claim(
    checker_data: models.CheckerData,
    checker_id: str,
    rule_uid: str,
    claim: str,
    computed: float,
    reference: float,
    tolerance: float,
    passed: Optional[bool] = None,
) -> bool:
    """
    Store a verification record and register an ERROR issue when the claim
    does not hold. Unless given, passed means |computed - reference| <= tolerance.
    """
    computed = float(computed)
    reference = float(reference)
    if passed is None:
        passed = bool(np.isfinite(computed) and abs(computed - reference) <= tolerance)

    checker_data.records.append(
        models.VerificationRecord(
            checker_id=checker_id,
            claim=claim,
            computed=computed,
            reference=reference,
            tolerance=tolerance,
            passed=passed,
        )
    )

    if passed:
        logging.info(f"- {claim}: computed {computed:.6g}, reference {reference:.6g}")
    else:
        logging.error(
            f"- {claim} does not hold: computed {computed:.6g}, "
            f"reference {reference:.6g}, tolerance {tolerance:.3g}"
        )
        checker_data.result.register_issue(
            checker_bundle_name=constants.BUNDLE_NAME,
            checker_id=checker_id,
            description=(
                f"{claim}: computed {computed!r}, reference {reference!r}, "
                f"tolerance {tolerance!r}."
            ),
            level=IssueSeverity.ERROR,
            rule_uid=rule_uid,
        )

    return passed


def summarize_claims(checker_data: models.CheckerData, checker_id: str) -> None:
    records = [r for r in checker_data.records if r.checker_id == checker_id]
    passed = sum(r.passed for r in records)
    checker_data.result.add_checker_summary(
        constants.BUNDLE_NAME, checker_id, f"{passed} of {len(records)} claims hold."
    )
