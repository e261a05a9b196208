"""Forward and inverse Carson line-parameter calculations."""

from ._core import (
    BoundEntry,
    CandidateMismatch,
    Catalog,
    Error,
    FeasibilityResult,
    LineKind,
    SequenceComponents,
    SequenceReference,
    SlackResult,
    ValidationReport,
    Var,
    forward,
    recover,
    slack_analysis,
    tighten_bounds,
    validate,
    zdiff,
)

__all__ = [
    "BoundEntry",
    "CandidateMismatch",
    "Catalog",
    "Error",
    "FeasibilityResult",
    "LineKind",
    "SequenceComponents",
    "SequenceReference",
    "SlackResult",
    "ValidationReport",
    "Var",
    "forward",
    "recover",
    "slack_analysis",
    "tighten_bounds",
    "validate",
    "zdiff",
]
