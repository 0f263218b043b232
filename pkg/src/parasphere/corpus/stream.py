"""Three-task training stream and token-budget batching.

Every epoch interleaves translation in both directions with a small fixed
autoencoding subset of the source-side sentences, optionally corrupted by
word dropping and bounded local shuffling.
"""

from __future__ import annotations

import warnings
from dataclasses import dataclass
from pathlib import Path

import numpy as np

from ..compute.params import derive_rng
from .tokenizer import CaseModel, apply_truecase, tokenize
from .vocab import CorpusError, Vocabulary, start_token

KIND_S2T = "s2t"
KIND_T2S = "t2s"
KIND_AE = "ae"


@dataclass(frozen=True)
class Sentence:
    tokens: tuple[str, ...]
    lang: str

    def __post_init__(self):
        if any(not t for t in self.tokens):
            raise CorpusError("empty token in sentence")

    @property
    def length(self) -> int:
        return len(self.tokens)


@dataclass(frozen=True)
class TaskExample:
    source: Sentence
    target: Sentence
    kind: str


@dataclass(frozen=True)
class NoiseConfig:
    p_drop: float = 0.1
    k_window: int = 3

    def __post_init__(self):
        if not 0.0 <= self.p_drop < 1.0:
            raise CorpusError(f"p_drop must be in [0, 1), got {self.p_drop}")
        if self.k_window < 1:
            raise CorpusError(f"k_window must be >= 1, got {self.k_window}")


def add_noise(tokens, p_drop: float, k_window: int,
              rng: int | np.random.Generator) -> list[str]:
    """Drop tokens independently, then shuffle survivors within a bounded window.

    Sort keys i + U[0, k_window) guarantee no token moves more than
    k_window - 1 positions; with k_window == 1 the keys stay ordered and the
    permutation is the identity.
    """
    NoiseConfig(p_drop=p_drop, k_window=k_window)
    if isinstance(rng, (int, np.integer)):
        rng = np.random.default_rng(rng)
    tokens = list(tokens)
    if p_drop > 0.0:
        keep = rng.random(len(tokens)) >= p_drop
        tokens = [t for t, k in zip(tokens, keep) if k]
    keys = np.arange(len(tokens)) + rng.uniform(0.0, k_window, size=len(tokens))
    order = np.argsort(keys, kind="stable")
    return [tokens[i] for i in order]


def make_task_stream(pairs: list[tuple[Sentence, Sentence]],
                     ae_fraction: float | None = None,
                     noise: NoiseConfig | None = None,
                     seed: int = 0,
                     epoch: int = 0,
                     ae_count: int | None = None,
                     encoder_start: bool = True) -> list[TaskExample]:
    """One shuffled epoch of S2T + T2S + AE examples.

    The AE subset is drawn once per run (seed only); noise and shuffle order
    are redrawn per epoch.  Exactly one of ae_fraction / ae_count selects the
    subset size.
    """
    if (ae_fraction is None) == (ae_count is None):
        raise CorpusError("specify exactly one of ae_fraction / ae_count")
    n = len(pairs)
    if ae_count is None:
        if not 0.0 <= ae_fraction <= 1.0:
            raise CorpusError(f"ae_fraction must be in [0, 1], got {ae_fraction}")
        ae_count = int(ae_fraction * n + 0.5)  # round half up
        if ae_count == 0 and ae_fraction > 0.0:
            warnings.warn("ae_fraction selects < 1 sentence; emitting 1 AE example")
            ae_count = 1
    if ae_count > n:
        raise CorpusError(f"ae_count {ae_count} exceeds corpus size {n}")

    def with_start(tokens: tuple[str, ...], src_lang: str, tgt_lang: str) -> Sentence:
        if encoder_start:
            return Sentence(tokens=(start_token(tgt_lang), *tokens), lang=src_lang)
        return Sentence(tokens=tokens, lang=src_lang)

    stream: list[TaskExample] = []
    for s1, s2 in pairs:
        stream.append(TaskExample(source=with_start(s1.tokens, s1.lang, s2.lang),
                                  target=s2, kind=KIND_S2T))
        stream.append(TaskExample(source=with_start(s2.tokens, s2.lang, s1.lang),
                                  target=s1, kind=KIND_T2S))

    subset = derive_rng(seed, "ae-subset").choice(n, size=ae_count, replace=False)
    noise_rng = derive_rng(seed, "ae-noise", str(epoch))
    for idx in sorted(int(i) for i in subset):
        s1 = pairs[idx][0]
        tokens = s1.tokens
        if noise is not None:
            tokens = tuple(add_noise(tokens, noise.p_drop, noise.k_window, noise_rng))
        stream.append(TaskExample(source=with_start(tokens, s1.lang, s1.lang),
                                  target=s1, kind=KIND_AE))

    order = derive_rng(seed, "epoch-order", str(epoch)).permutation(len(stream))
    return [stream[i] for i in order]


@dataclass
class Batch:
    """Padded id arrays for one training step.

    Decoder input rows start with the target-language token (the neutral EOS
    row under the start-token ablation); decoder output rows end with EOS.
    Masks are 1.0 on real positions, 0.0 on padding, so padded positions
    never contribute to the loss.
    """

    examples: list[TaskExample]
    src_ids: np.ndarray      # [B, S] int64
    src_mask: np.ndarray     # [B, S] float64
    tgt_in_ids: np.ndarray   # [B, T] int64
    tgt_out_ids: np.ndarray  # [B, T] int64
    tgt_mask: np.ndarray     # [B, T] float64

    @property
    def n_target_tokens(self) -> int:
        return int(self.tgt_mask.sum())


def _encode_batch(group: list[TaskExample], vocab: Vocabulary,
                  lang_start: bool = True) -> Batch:
    b = len(group)
    src_rows = []
    for ex in group:
        # no EOS on the source side: encoder positions are exactly the
        # start token plus the m source tokens
        row = vocab.ids_of(list(ex.source.tokens), ex.source.lang)
        # the encoder-side start token is a control token, not a word
        if ex.source.tokens and ex.source.tokens[0] == start_token(ex.target.lang):
            row[0] = vocab.start_id(ex.target.lang)
        src_rows.append(row)
    tgt_rows = [vocab.ids_of(list(ex.target.tokens), ex.target.lang) for ex in group]

    s_max = max(len(r) for r in src_rows)
    t_max = max(len(r) for r in tgt_rows) + 1  # room for start / EOS
    src_ids = np.full((b, s_max), vocab.pad_id, dtype=np.int64)
    src_mask = np.zeros((b, s_max))
    tgt_in = np.full((b, t_max), vocab.pad_id, dtype=np.int64)
    tgt_out = np.full((b, t_max), vocab.pad_id, dtype=np.int64)
    tgt_mask = np.zeros((b, t_max))
    for i, (src, tgt) in enumerate(zip(src_rows, tgt_rows)):
        src_ids[i, :len(src)] = src
        src_mask[i, :len(src)] = 1.0
        tgt_in[i, 0] = (vocab.start_id(group[i].target.lang) if lang_start
                        else vocab.eos_id)
        tgt_in[i, 1:1 + len(tgt)] = tgt
        tgt_out[i, :len(tgt)] = tgt
        tgt_out[i, len(tgt)] = vocab.eos_id
        tgt_mask[i, :len(tgt) + 1] = 1.0
    return Batch(examples=group, src_ids=src_ids, src_mask=src_mask,
                 tgt_in_ids=tgt_in, tgt_out_ids=tgt_out, tgt_mask=tgt_mask)


def make_batches(stream: list[TaskExample], token_budget: int, vocab: Vocabulary,
                 rng: np.random.Generator | None = None,
                 lang_start: bool = True) -> list[Batch]:
    """Greedy length-sorted packing under a target-token budget.

    The budget counts raw target tokens (excluding EOS/start bookkeeping).
    Batch order is shuffled when an rng is supplied so length sorting does
    not impose a curriculum.  lang_start=False builds decoder inputs for the
    start-token ablation (neutral EOS start instead of the language token).
    """
    kept = []
    for ex in stream:
        if ex.target.length > token_budget:
            warnings.warn(f"example with {ex.target.length} target tokens exceeds "
                          f"budget {token_budget}; skipped")
            continue
        kept.append(ex)
    order = sorted(range(len(kept)), key=lambda i: (kept[i].target.length,
                                                    kept[i].source.length))
    batches: list[Batch] = []
    group: list[TaskExample] = []
    used = 0
    for i in order:
        cost = kept[i].target.length
        if group and used + cost > token_budget:
            batches.append(_encode_batch(group, vocab, lang_start))
            group, used = [], 0
        group.append(kept[i])
        used += cost
    if group:
        batches.append(_encode_batch(group, vocab, lang_start))
    if rng is not None and len(batches) > 1:
        batches = [batches[i] for i in rng.permutation(len(batches))]
    return batches


# -- corpus file loading ----------------------------------------------------

def read_sentences(path, lang: str, case: CaseModel | None = None) -> list[Sentence]:
    """One tokenized (and optionally truecased) Sentence per non-empty line."""
    out = []
    for line in Path(path).read_text(encoding="utf-8").splitlines():
        tokens = tokenize(line, lang)
        if not tokens:
            continue
        if case is not None:
            tokens = apply_truecase(tokens, case)
        out.append(Sentence(tokens=tuple(tokens), lang=lang))
    return out


def load_parallel(path1, path2, lang1: str, lang2: str,
                  case1: CaseModel | None = None,
                  case2: CaseModel | None = None) -> list[tuple[Sentence, Sentence]]:
    """Line-aligned pair files; both sides of a pair must be non-empty."""
    lines1 = Path(path1).read_text(encoding="utf-8").splitlines()
    lines2 = Path(path2).read_text(encoding="utf-8").splitlines()
    if len(lines1) != len(lines2):
        raise CorpusError(f"line count mismatch: {path1} has {len(lines1)}, "
                          f"{path2} has {len(lines2)}")
    pairs = []
    for raw1, raw2 in zip(lines1, lines2):
        t1 = tokenize(raw1, lang1)
        t2 = tokenize(raw2, lang2)
        if not t1 or not t2:
            continue
        if case1 is not None:
            t1 = apply_truecase(t1, case1)
        if case2 is not None:
            t2 = apply_truecase(t2, case2)
        pairs.append((Sentence(tokens=tuple(t1), lang=lang1),
                      Sentence(tokens=tuple(t2), lang=lang2)))
    return pairs
