"""Heuristic design-to-code mapping."""

from .engine import (
    Decision,
    EntryKind,
    EntryState,
    MappingEntry,
    MappingError,
    MappingState,
    decide,
    dfd_ref,
    discover_definitions,
    entry_id,
    extend_to_signatures,
    map_manually,
    match_names,
    run_iteration,
    score_and_filter,
)
from .names import levenshtein, names_correspond, split_name, words_equivalent
from .report import GroundTruth, compliance_report, evaluate_against_ground_truth

__all__ = [
    "Decision",
    "EntryKind",
    "EntryState",
    "GroundTruth",
    "MappingEntry",
    "MappingError",
    "MappingState",
    "compliance_report",
    "decide",
    "dfd_ref",
    "discover_definitions",
    "entry_id",
    "evaluate_against_ground_truth",
    "extend_to_signatures",
    "levenshtein",
    "map_manually",
    "match_names",
    "names_correspond",
    "run_iteration",
    "score_and_filter",
    "split_name",
    "words_equivalent",
]
