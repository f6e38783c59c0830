# Copyright 2026 The netshrink Authors
# SPDX-License-Identifier: Apache-2.0
"""Structured-pruning shrinker for convolutional network graphs."""

from ._core import (
    CollapseError,
    Error,
    ParseError,
    apply_hard_mask,
    canonicalize,
    count_macs,
    count_params,
    example,
    prune,
    rb1_mask,
    run,
    shrink,
)

__all__ = [
    "CollapseError",
    "Error",
    "ParseError",
    "apply_hard_mask",
    "canonicalize",
    "count_macs",
    "count_params",
    "example",
    "prune",
    "rb1_mask",
    "run",
    "shrink",
]
