"""Text ingestion: tokenization, truecasing, vocabularies, task streams."""

from .stream import (
    KIND_AE,
    KIND_S2T,
    KIND_T2S,
    Batch,
    NoiseConfig,
    Sentence,
    TaskExample,
    add_noise,
    load_parallel,
    make_batches,
    make_task_stream,
    read_sentences,
)
from .tokenizer import CaseModel, apply_truecase, tokenize, train_truecaser
from .vocab import EOS, PAD, UNK, CorpusError, Vocabulary, count_and_rank, start_token

__all__ = [
    "Batch",
    "CaseModel",
    "CorpusError",
    "EOS",
    "KIND_AE",
    "KIND_S2T",
    "KIND_T2S",
    "NoiseConfig",
    "PAD",
    "Sentence",
    "TaskExample",
    "UNK",
    "Vocabulary",
    "add_noise",
    "apply_truecase",
    "count_and_rank",
    "load_parallel",
    "make_batches",
    "make_task_stream",
    "read_sentences",
    "start_token",
    "tokenize",
    "train_truecaser",
]
