"""Rule-based tokenizer and truecaser.

A deliberately small, deterministic stand-in for the usual Moses scripts:
punctuation is peeled off token edges, English contraction suffixes and
French elided articles are split, and a frequency truecaser handles the
sentence-initial position.  The rule tables below are frozen by golden
tests; changing them invalidates stored vocabularies.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from pathlib import Path

# Characters peeled one at a time from token edges.  Apostrophes stay glued
# when word-internal (contractions, elisions) and are handled by the clitic
# rules instead.  Non-ASCII symbols are escaped to keep the source 7-bit.
_PUNCT = set(".,;:!?\"()[]{}<>/\\|@#$%^&*+=~`") | {
    "-",
    "–",  # en dash
    "—",  # em dash
    "…",  # ellipsis
    "«",  # left guillemet
    "»",  # right guillemet
    "“",  # left curly double quote
    "”",  # right curly double quote
}

# English contraction suffixes, longest match first.
_EN_SUFFIXES = ("n't", "'re", "'ve", "'ll", "'s", "'d", "'m")

# French elided prefixes (surface keeps the apostrophe with the prefix).
_FR_PREFIXES = ("jusqu'", "lorsqu'", "puisqu'", "quoiqu'", "qu'",
                "l'", "d'", "c'", "j'", "m'", "n'", "s'", "t'")


def _split_core(core: str, lang: str) -> list[str]:
    low = core.lower()
    if lang.startswith("en"):
        for suf in _EN_SUFFIXES:
            if low.endswith(suf) and len(core) > len(suf):
                cut = len(core) - len(suf)
                return [core[:cut], core[cut:]]
    if lang.startswith("fr"):
        for pre in _FR_PREFIXES:
            if low.startswith(pre) and len(core) > len(pre):
                cut = len(pre)
                return [core[:cut], core[cut:]]
    return [core]


def tokenize(text: str, lang: str) -> list[str]:
    """Split one sentence into surface tokens; deterministic, never fails."""
    out: list[str] = []
    # normalize the curly apostrophe so one clitic table suffices
    for chunk in text.replace("’", "'").split():
        lead: list[str] = []
        trail: list[str] = []
        while chunk and chunk[0] in _PUNCT:
            lead.append(chunk[0])
            chunk = chunk[1:]
        while chunk and chunk[-1] in _PUNCT:
            trail.append(chunk[-1])
            chunk = chunk[:-1]
        trail.reverse()
        out.extend(lead)
        if chunk:
            out.extend(_split_core(chunk, lang))
        out.extend(trail)
    return out


@dataclass
class CaseModel:
    """Most frequent mid-sentence surface form per lowercased token."""

    best: dict[str, str] = field(default_factory=dict)

    def save(self, path) -> None:
        with open(path, "w", encoding="utf-8") as fh:
            for low, surface in self.best.items():
                fh.write(f"{low}\t{surface}\n")

    @classmethod
    def load(cls, path) -> "CaseModel":
        best = {}
        for line in Path(path).read_text(encoding="utf-8").splitlines():
            low, surface = line.split("\t")
            best[low] = surface
        return cls(best=best)


def train_truecaser(corpus: list[list[str]]) -> CaseModel:
    """Count surface casings in non-initial positions; ties keep the first seen."""
    counts: dict[str, dict[str, int]] = {}
    for tokens in corpus:
        for tok in tokens[1:]:
            forms = counts.setdefault(tok.lower(), {})
            forms[tok] = forms.get(tok, 0) + 1
    best = {}
    for low, forms in counts.items():
        top, top_n = None, -1
        for surface, n in forms.items():  # dict order = first occurrence
            if n > top_n:
                top, top_n = surface, n
        best[low] = top
    return CaseModel(best=best)


def apply_truecase(tokens: list[str], model: CaseModel) -> list[str]:
    """Rewrite only the sentence-initial token; unseen forms are lowercased."""
    if not tokens:
        return []
    head = model.best.get(tokens[0].lower(), tokens[0].lower())
    return [head, *tokens[1:]]
