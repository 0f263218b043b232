"""Token-level diversity metrics: IoU (Jaccard) and WER."""

from __future__ import annotations

import numpy as np

from ._dispatch import levenshtein
from .trees import MetricsError


def iou(tokens_a, tokens_b) -> float:
    """100 * |set(a) & set(b)| / |set(a) | set(b)|; two empty sets match fully."""
    sa, sb = set(tokens_a), set(tokens_b)
    if not sa and not sb:
        return 100.0
    return 100.0 * len(sa & sb) / len(sa | sb)


def edit_distance(tokens_a, tokens_b) -> int:
    """Word-level Levenshtein distance (unit insert/delete/substitute)."""
    intern: dict[str, int] = {}
    a = np.array([intern.setdefault(t, len(intern)) for t in tokens_a],
                 dtype=np.int64)
    b = np.array([intern.setdefault(t, len(intern)) for t in tokens_b],
                 dtype=np.int64)
    return int(levenshtein(a, b))


def wer(hypothesis, reference) -> float:
    """100 * edit_distance(hypothesis, reference) / len(reference)."""
    reference = list(reference)
    if not reference:
        raise MetricsError("WER needs a non-empty reference")
    return 100.0 * edit_distance(hypothesis, reference) / len(reference)
