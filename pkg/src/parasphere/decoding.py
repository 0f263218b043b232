"""Greedy decoding, bilingual pivoting, and lexicon postprocessing.

The continuous head emits a vector per step; the word is the cosine-nearest
row of the pre-trained table over a configurable vocabulary region, and the
chosen word's embedding (not the raw prediction) is fed back.  The CE head
takes the argmax token over the same region.
"""

from __future__ import annotations

import warnings
from dataclasses import dataclass, field

import numpy as np

from .corpus.stream import Sentence
from .corpus.vocab import Vocabulary
from .embeddings import BilingualLexicon
from .model import HEAD_CE, ModelError, Seq2SeqModel

REGION_COMBINED = "combined"
REGION_TARGET_ONLY = "target-only"


@dataclass(frozen=True)
class DecodeConfig:
    target_lang: str
    max_len: int = 50
    region: str = REGION_COMBINED

    def __post_init__(self):
        if self.max_len < 1:
            raise ModelError(f"max_len must be >= 1, got {self.max_len}")
        if self.region not in (REGION_COMBINED, REGION_TARGET_ONLY):
            raise ModelError(f"unknown region mode {self.region!r}")


@dataclass
class DecodeResult:
    sentence: Sentence
    scores: list[float] = field(default_factory=list)
    truncated: bool = False


def region_ids(vocab: Vocabulary, mode: str, target_lang: str) -> np.ndarray:
    """Candidate ids for generation: word rows plus EOS and UNK.

    PAD and the start tokens are control-plane only and never emitted.
    """
    ids = [vocab.unk_id, vocab.eos_id]
    if mode == REGION_COMBINED:
        ids += list(vocab.lang_range(vocab.lang1))
        ids += list(vocab.lang_range(vocab.lang2))
    else:
        ids += list(vocab.lang_range(target_lang))
    return np.array(sorted(ids))


def nearest_region_step(e_hat: np.ndarray, embed_matrix: np.ndarray,
                        ids: np.ndarray) -> tuple[int, float]:
    """Cosine argmax of one predicted vector over a region; ties to lowest id.

    Embedding rows are unit-norm, so the dot with the normalized prediction
    is the cosine.  A zero prediction has no direction; the lowest region id
    is returned with score 0 to keep decoding total and deterministic.
    """
    norm = np.linalg.norm(e_hat)
    if norm == 0.0:
        return int(ids[0]), 0.0
    scores = embed_matrix[ids] @ (e_hat / norm)
    j = int(np.argmax(scores))  # ids sorted ascending, argmax keeps lowest
    return int(ids[j]), float(scores[j])


def encode_source(sentence: Sentence, target_lang: str, vocab: Vocabulary,
                  encoder_start: bool = True) -> tuple[np.ndarray, np.ndarray]:
    """Source id row matching the training-time encoder layout."""
    ids = vocab.ids_of(list(sentence.tokens), sentence.lang)
    if encoder_start:
        ids = [vocab.start_id(target_lang), *ids]
    arr = np.array([ids], dtype=np.int64)
    return arr, np.ones_like(arr, dtype=np.float64)


def greedy_decode(model: Seq2SeqModel, sentence: Sentence, cfg: DecodeConfig,
                  encoder_start: bool = True) -> DecodeResult:
    """Greedy decode; encoder_start=False matches ablated training.

    Models trained without language start tokens see no target-language tag
    on the encoder side and a neutral EOS start on the decoder side, so the
    ablated decode must reproduce both or the inputs are out of distribution.
    """
    vocab = model.vocab
    src_ids, src_mask = encode_source(sentence, cfg.target_lang, vocab, encoder_start)
    enc = model.encode(src_ids, src_mask)
    ids = region_ids(vocab, cfg.region, cfg.target_lang)
    table = model.store["embed.table"].data

    prefix = [vocab.start_id(cfg.target_lang) if encoder_start else vocab.eos_id]
    tokens: list[str] = []
    scores: list[float] = []
    truncated = True
    for _ in range(cfg.max_len + 1):  # +1 so EOS after max_len words still lands
        out = model.decode(enc, np.array([prefix], dtype=np.int64))
        last = out.data[0, -1]
        if model.cfg.head == HEAD_CE:
            masked = np.full(last.shape, -np.inf)
            masked[ids] = last[ids]
            chosen = int(np.argmax(masked))
            shifted = last - last.max()
            prob = float(np.exp(shifted[chosen]) / np.exp(shifted).sum())
            score = prob
        else:
            chosen, score = nearest_region_step(last, table, ids)
        if chosen == vocab.eos_id:
            truncated = False
            break
        if len(tokens) == cfg.max_len:
            break
        tokens.append(vocab.token_of(chosen))
        scores.append(score)
        prefix.append(chosen)
    return DecodeResult(sentence=Sentence(tokens=tuple(tokens), lang=cfg.target_lang),
                        scores=scores, truncated=truncated)


def pivot_paraphrase(model_fwd: Seq2SeqModel, model_back: Seq2SeqModel,
                     sentence: Sentence, pivot_lang: str, cfg: DecodeConfig,
                     encoder_start: bool = True) -> DecodeResult:
    """Translate into the pivot language, discretize, translate back.

    The intermediate sentence exists only as tokens; no continuous state
    crosses the pivot boundary.
    """
    mid_cfg = DecodeConfig(target_lang=pivot_lang, max_len=cfg.max_len,
                           region=cfg.region)
    mid = greedy_decode(model_fwd, sentence, mid_cfg, encoder_start)
    if not mid.sentence.tokens:
        warnings.warn("empty intermediate translation; returning empty output")
        return DecodeResult(sentence=Sentence(tokens=(), lang=cfg.target_lang),
                            scores=[], truncated=mid.truncated)
    return greedy_decode(model_back, mid.sentence, cfg, encoder_start)


def postprocess_lexicon(tokens: list[str] | tuple[str, ...], vocab: Vocabulary,
                        lexicon: BilingualLexicon) -> list[str]:
    """Replace L2-only tokens by their lexicon image; everything else stays.

    Tokens spelled identically in both vocabularies are left untouched, which
    makes the operation idempotent: images are L1 words, so a second pass
    finds nothing to replace.
    """
    out = []
    for tok in tokens:
        in_l1 = vocab.id_of(tok, vocab.lang1) != vocab.unk_id
        in_l2 = vocab.id_of(tok, vocab.lang2) != vocab.unk_id
        if in_l2 and not in_l1 and tok in lexicon.entries:
            out.append(lexicon.entries[tok][0])
        else:
            out.append(tok)
    return out
