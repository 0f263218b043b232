"""Human evaluation: A/B sessions, agreement statistics, summary tables."""

from ..metrics.report import MeaningTable, meaning_table
from .agreement import KappaReport, PairKappa, cohen_kappa, pairwise_kappa
from .api import build_app
from .report import AbReport, ab_report, resolved_votes
from .session import (CHOICES, AbItem, AbSession, DuplicateJudgment,
                      JudgmentRecord, JudgmentStore, SessionError,
                      create_session, next_unjudged, record_judgment)

__all__ = [
    "CHOICES",
    "AbItem",
    "AbReport",
    "AbSession",
    "DuplicateJudgment",
    "JudgmentRecord",
    "JudgmentStore",
    "KappaReport",
    "MeaningTable",
    "PairKappa",
    "SessionError",
    "ab_report",
    "build_app",
    "cohen_kappa",
    "create_session",
    "meaning_table",
    "next_unjudged",
    "pairwise_kappa",
    "record_judgment",
    "resolved_votes",
]
