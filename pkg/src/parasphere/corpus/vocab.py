"""Combined two-language vocabulary with reserved control tokens.

Id layout is fixed: PAD, UNK, EOS, <2L1>, <2L2>, then the L1 section, then
the L2 section.  Lookups are language-scoped, so the same surface form may
carry different ids in each language.
"""

from __future__ import annotations

from dataclasses import dataclass
from pathlib import Path


class CorpusError(ValueError):
    pass


PAD, UNK, EOS = "<pad>", "<unk>", "</s>"


def start_token(lang: str) -> str:
    return f"<2{lang}>"


def count_and_rank(corpus: list[list[str]], max_size: int) -> list[tuple[str, int]]:
    """Top `max_size` (token, freq) pairs; ties broken by first occurrence."""
    if max_size < 1:
        raise CorpusError(f"max_size must be >= 1, got {max_size}")
    counts: dict[str, int] = {}
    first: dict[str, int] = {}
    pos = 0
    for tokens in corpus:
        for tok in tokens:
            if tok not in counts:
                counts[tok] = 0
                first[tok] = pos
            counts[tok] += 1
            pos += 1
    ranked = sorted(counts, key=lambda t: (-counts[t], first[t]))
    return [(t, counts[t]) for t in ranked[:max_size]]


@dataclass
class Vocabulary:
    lang1: str
    lang2: str
    tokens: list[str]          # id -> surface form, specials first
    freqs: list[int]           # parallel to tokens; 0 for specials
    l1_start: int
    l1_size: int
    l2_start: int
    l2_size: int

    # -- construction ------------------------------------------------------

    @classmethod
    def build(cls, l1_entries: list[tuple[str, int]], l2_entries: list[tuple[str, int]],
              lang1: str, lang2: str) -> "Vocabulary":
        specials = [PAD, UNK, EOS, start_token(lang1), start_token(lang2)]
        tokens = list(specials)
        freqs = [0] * len(specials)
        for tok, freq in l1_entries:
            if tok in specials:
                raise CorpusError(f"corpus token collides with control token: {tok!r}")
            tokens.append(tok)
            freqs.append(freq)
        for tok, freq in l2_entries:
            if tok in specials:
                raise CorpusError(f"corpus token collides with control token: {tok!r}")
            tokens.append(tok)
            freqs.append(freq)
        return cls(lang1=lang1, lang2=lang2, tokens=tokens, freqs=freqs,
                   l1_start=len(specials), l1_size=len(l1_entries),
                   l2_start=len(specials) + len(l1_entries), l2_size=len(l2_entries))

    def __post_init__(self):
        self._index: dict[tuple[str, str], int] = {}
        for i in range(self.l1_start, self.l1_start + self.l1_size):
            self._index[(self.lang1, self.tokens[i])] = i
        for i in range(self.l2_start, self.l2_start + self.l2_size):
            self._index[(self.lang2, self.tokens[i])] = i

    # -- lookups -----------------------------------------------------------

    @property
    def size(self) -> int:
        return len(self.tokens)

    @property
    def pad_id(self) -> int:
        return 0

    @property
    def unk_id(self) -> int:
        return 1

    @property
    def eos_id(self) -> int:
        return 2

    def start_id(self, lang: str) -> int:
        if lang == self.lang1:
            return 3
        if lang == self.lang2:
            return 4
        raise CorpusError(f"unknown language {lang!r}")

    def id_of(self, token: str, lang: str) -> int:
        return self._index.get((lang, token), self.unk_id)

    def token_of(self, idx: int) -> str:
        return self.tokens[idx]

    def ids_of(self, tokens: list[str], lang: str) -> list[int]:
        return [self.id_of(t, lang) for t in tokens]

    def lang_range(self, lang: str) -> range:
        if lang == self.lang1:
            return range(self.l1_start, self.l1_start + self.l1_size)
        if lang == self.lang2:
            return range(self.l2_start, self.l2_start + self.l2_size)
        raise CorpusError(f"unknown language {lang!r}")

    def lang_of_id(self, idx: int) -> str | None:
        """Language section owning an id; None for control tokens."""
        if self.l1_start <= idx < self.l1_start + self.l1_size:
            return self.lang1
        if self.l2_start <= idx < self.l2_start + self.l2_size:
            return self.lang2
        return None

    # -- persistence -------------------------------------------------------

    def save(self, path) -> None:
        """TSV rows `token<TAB>id<TAB>freq`; section layout in '#' headers."""
        with open(path, "w", encoding="utf-8") as fh:
            fh.write(f"# lang1\t{self.lang1}\n# lang2\t{self.lang2}\n")
            fh.write(f"# l1\t{self.l1_start}\t{self.l1_size}\n")
            fh.write(f"# l2\t{self.l2_start}\t{self.l2_size}\n")
            for i, (tok, freq) in enumerate(zip(self.tokens, self.freqs)):
                fh.write(f"{tok}\t{i}\t{freq}\n")

    @classmethod
    def load(cls, path) -> "Vocabulary":
        meta: dict[str, list[str]] = {}
        tokens: list[str] = []
        freqs: list[int] = []
        for line in Path(path).read_text(encoding="utf-8").splitlines():
            if line.startswith("# "):
                key, *rest = line[2:].split("\t")
                meta[key] = rest
                continue
            tok, idx, freq = line.split("\t")
            if int(idx) != len(tokens):
                raise CorpusError(f"{path}: ids out of order at {tok!r}")
            tokens.append(tok)
            freqs.append(int(freq))
        try:
            return cls(lang1=meta["lang1"][0], lang2=meta["lang2"][0],
                       tokens=tokens, freqs=freqs,
                       l1_start=int(meta["l1"][0]), l1_size=int(meta["l1"][1]),
                       l2_start=int(meta["l2"][0]), l2_size=int(meta["l2"][1]))
        except KeyError as exc:
            raise CorpusError(f"{path}: missing vocabulary header {exc}") from exc
