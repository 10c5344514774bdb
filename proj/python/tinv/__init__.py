# Copyright 2026 The tinv Authors
# SPDX-License-Identifier: Apache-2.0
"""Infer training invariants from execution traces and check new traces."""

import json

from . import _core
from ._core import (
    DIGEST_HEX_LENGTH,
    ENGINE_VERSION,
    SCHEMA_VERSION,
    Error,
    InvalidConfig,
    MalformedRecord,
    SchemaVersionMismatch,
    generate,
    run_cli,
    tensor_digest,
    validate_trace,
)

__all__ = [
    "DIGEST_HEX_LENGTH",
    "ENGINE_VERSION",
    "SCHEMA_VERSION",
    "Error",
    "InvalidConfig",
    "MalformedRecord",
    "SchemaVersionMismatch",
    "check",
    "check_records",
    "faults",
    "generate",
    "infer",
    "required_descriptors",
    "run_cli",
    "tensor_digest",
    "validate_trace",
]


def _text(invariants):
    return invariants if isinstance(invariants, str) else json.dumps(invariants)


def infer(trace_dirs, relations=(), max_examples=10000, max_hypotheses=5000, budget=1000, jobs=1, cap=None):
    """Infers invariants from run directories and returns the invariant file as a dict."""
    text = _core.infer([str(d) for d in trace_dirs], list(relations), max_examples, max_hypotheses, budget, jobs, cap)
    return json.loads(text)


def check(invariants, trace_dir, mode="batch"):
    """Checks a run directory. Returns (reports, summary)."""
    reports, summary = _core.check(_text(invariants), str(trace_dir), mode)
    return [json.loads(r) for r in reports], json.loads(summary)["summary"]


def check_records(invariants, records):
    """Checks newline-delimited trace records. Returns (reports, summary)."""
    reports, summary = _core.check_records(_text(invariants), records)
    return [json.loads(r) for r in reports], json.loads(summary)["summary"]


def required_descriptors(invariants):
    """What a tracer must emit for these invariants."""
    return json.loads(_core.required_descriptors(_text(invariants)))


def faults():
    """The synthetic fault catalog."""
    return json.loads(_core.faults())
