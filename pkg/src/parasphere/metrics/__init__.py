"""Lexical and syntactic diversity metrics with score bucketing and reports."""

from ._dispatch import backend_name
from .lexical import edit_distance, iou, wer
from .report import (FALLBACK_SOURCE, THRESHOLDS, DiversityReport, MeaningTable,
                     ScoreTable, SystemDiversity, bucket_subsets, diversity_report,
                     fallback_scores, load_scores, meaning_table, save_scores)
from .trees import (MetricsError, ParseTree, parse_bracketed, prune_for_pted,
                    read_parse_file, tree_edit_distance)

__all__ = [
    "FALLBACK_SOURCE",
    "THRESHOLDS",
    "DiversityReport",
    "MeaningTable",
    "MetricsError",
    "ParseTree",
    "ScoreTable",
    "SystemDiversity",
    "backend_name",
    "bucket_subsets",
    "diversity_report",
    "edit_distance",
    "fallback_scores",
    "iou",
    "load_scores",
    "meaning_table",
    "parse_bracketed",
    "prune_for_pted",
    "read_parse_file",
    "save_scores",
    "tree_edit_distance",
    "wer",
]
