"""Joint three-task training with AE-dev early stopping, plus the head benchmark.

One trainer owns the parameters.  Every epoch draws a freshly shuffled mixed
stream (translation both ways + the fixed autoencoding subset); the dev
criterion is the autoencoding loss on held-out source-language sentences.
Ablation switches reproduce the two degradation studies: dropping the
autoencoding task and dropping the encoder-side start token.
"""

from __future__ import annotations

import time
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from . import compute as C
from .corpus.stream import (KIND_AE, KIND_S2T, KIND_T2S, NoiseConfig, Sentence,
                            TaskExample, make_batches, make_task_stream)
from .corpus.vocab import CorpusError, Vocabulary, start_token
from .model import HEAD_CE, HEAD_VMF, ModelConfig, Seq2SeqModel, init_model


@dataclass(frozen=True)
class TrainConfig:
    head: str = HEAD_VMF
    ae_fraction: float | None = None
    ae_count: int | None = None
    noise: NoiseConfig | None = None
    max_epochs: int = 10
    max_steps: int | None = None
    eval_every: int = 500
    patience: int = 5
    seed: int = 0
    lr: float = 1e-3
    warmup_steps: int = 0          # 0 = constant learning rate
    token_budget: int = 4096
    no_encoder_start_token: bool = False
    no_autoencoding: bool = False

    def __post_init__(self):
        if self.patience < 1:
            raise CorpusError(f"patience must be >= 1, got {self.patience}")
        if not self.no_autoencoding and (self.ae_fraction is None) == (self.ae_count is None):
            raise CorpusError("specify exactly one of ae_fraction / ae_count")


@dataclass
class CorpusArtifacts:
    vocab: Vocabulary
    embed_matrix: np.ndarray                      # combined [V, d]
    train_pairs: list[tuple[Sentence, Sentence]]  # (L1, L2)
    dev_sentences: list[Sentence]                 # held-out L1 side


@dataclass
class TrainReport:
    head: str
    cadence_steps: list[int] = field(default_factory=list)
    dev_losses: list[float] = field(default_factory=list)
    kind_losses: dict[str, list[float]] = field(default_factory=dict)
    examples_by_kind: dict[str, int] = field(default_factory=dict)
    selected_step: int = -1
    selected_dev_loss: float = float("inf")
    mean_step_seconds: float = 0.0
    total_steps: int = 0
    diverged: bool = False

    def to_tsv(self, path) -> None:
        kinds = sorted(self.kind_losses)
        with open(path, "w", encoding="utf-8") as fh:
            fh.write(f"# head\t{self.head}\n")
            fh.write(f"# selected_step\t{self.selected_step}\n")
            fh.write(f"# selected_dev_loss\t{self.selected_dev_loss:.6f}\n")
            fh.write(f"# mean_step_seconds\t{self.mean_step_seconds:.6f}\n")
            fh.write(f"# total_steps\t{self.total_steps}\n")
            fh.write(f"# diverged\t{int(self.diverged)}\n")
            fh.write("step\tdev_ae\t" + "\t".join(kinds) + "\n")
            for i, step in enumerate(self.cadence_steps):
                cells = [f"{self.kind_losses[k][i]:.6f}" for k in kinds]
                fh.write(f"{step}\t{self.dev_losses[i]:.6f}\t" + "\t".join(cells) + "\n")


@dataclass
class TrainResult:
    store: C.ParameterStore     # parameters at the selected checkpoint
    model_cfg: ModelConfig
    report: TrainReport
    checkpoint_path: Path | None = None


def _snapshot(store: C.ParameterStore) -> dict[str, np.ndarray]:
    return {n: store[n].data.copy() for n in store.names()}


def _store_from(snapshot: dict[str, np.ndarray], like: C.ParameterStore) -> C.ParameterStore:
    out = C.ParameterStore()
    for name in like.names():
        out.add(name, snapshot[name].copy(), trainable=like.is_trainable(name))
    return out


def dev_ae_batches(artifacts: CorpusArtifacts, cfg: TrainConfig):
    """Clean (noise-free) autoencoding batches over the held-out L1 side."""
    stream = []
    for sent in artifacts.dev_sentences:
        tokens = sent.tokens
        if not cfg.no_encoder_start_token:
            tokens = (start_token(sent.lang), *tokens)
        stream.append(TaskExample(source=Sentence(tokens=tokens, lang=sent.lang),
                                  target=sent, kind=KIND_AE))
    return make_batches(stream, cfg.token_budget, artifacts.vocab,
                        lang_start=not cfg.no_encoder_start_token)


def _mean_loss(model: Seq2SeqModel, batches) -> float:
    """Token-weighted mean loss with dropout off."""
    total, tokens = 0.0, 0
    for batch in batches:
        n = batch.n_target_tokens
        total += float(model.sequence_loss(batch).data) * n
        tokens += n
    return total / tokens if tokens else float("nan")


def _probe_batches(stream, vocab, budget, per_kind=24, lang_start=True):
    probes = {}
    for kind in (KIND_S2T, KIND_T2S, KIND_AE):
        subset = [ex for ex in stream if ex.kind == kind][:per_kind]
        if subset:
            probes[kind] = make_batches(subset, budget, vocab, lang_start=lang_start)
    return probes


def train(model_cfg: ModelConfig, cfg: TrainConfig, artifacts: CorpusArtifacts,
          run_dir: Path | None = None) -> TrainResult:
    if not artifacts.dev_sentences:
        raise CorpusError("dev_sentences must be non-empty; the AE dev loss "
                          "drives checkpoint selection and early stopping")
    vocab = artifacts.vocab
    store = init_model(model_cfg, artifacts.embed_matrix, vocab, seed=cfg.seed)
    model = Seq2SeqModel(model_cfg, store, vocab)
    adam = C.adam_init(store, lr=cfg.lr)
    report = TrainReport(head=model_cfg.head)
    dev_batches = dev_ae_batches(artifacts, cfg)

    ae_fraction, ae_count = cfg.ae_fraction, cfg.ae_count
    if cfg.no_autoencoding:
        ae_fraction, ae_count = None, 0

    best = _snapshot(store)
    best_loss, best_step = float("inf"), 0
    evals_since_best = 0
    step = 0
    step_times: list[float] = []
    probes = None
    stop = False

    def evaluate():
        nonlocal best, best_loss, best_step, evals_since_best
        dev = _mean_loss(model, dev_batches)
        report.cadence_steps.append(step)
        report.dev_losses.append(dev)
        for kind, batches in probes.items():
            report.kind_losses.setdefault(kind, []).append(_mean_loss(model, batches))
        if dev < best_loss:
            best, best_loss, best_step = _snapshot(store), dev, step
            evals_since_best = 0
        else:
            evals_since_best += 1
        return evals_since_best >= cfg.patience

    for epoch in range(cfg.max_epochs):
        stream = make_task_stream(artifacts.train_pairs, ae_fraction=ae_fraction,
                                  noise=cfg.noise, seed=cfg.seed, epoch=epoch,
                                  ae_count=ae_count,
                                  encoder_start=not cfg.no_encoder_start_token)
        if probes is None:
            probes = _probe_batches(stream, vocab, cfg.token_budget,
                                    lang_start=not cfg.no_encoder_start_token)
        batches = make_batches(stream, cfg.token_budget, vocab,
                               rng=C.derive_rng(cfg.seed, "batch-order", str(epoch)),
                               lang_start=not cfg.no_encoder_start_token)
        for batch in batches:
            drop_rng = C.derive_rng(cfg.seed, "dropout", str(step))
            t0 = time.perf_counter()
            try:
                _, grads = C.forward_backward(
                    store, lambda: model.sequence_loss(batch, train=True, rng=drop_rng))
            except C.ComputeError:
                # divergence: keep the last good checkpoint and stop
                report.diverged = True
                stop = True
                break
            C.adam_step(store, grads, adam,
                        lr=C.warmup_inverse_sqrt(adam.step + 1, cfg.lr, cfg.warmup_steps)
                        if cfg.warmup_steps > 0 else None)
            step_times.append(time.perf_counter() - t0)
            step += 1
            for ex in batch.examples:
                report.examples_by_kind[ex.kind] = \
                    report.examples_by_kind.get(ex.kind, 0) + 1
            if step % cfg.eval_every == 0 and evaluate():
                stop = True
                break
            if cfg.max_steps is not None and step >= cfg.max_steps:
                stop = True
                break
        if stop:
            break

    if not report.diverged and (not report.cadence_steps or report.cadence_steps[-1] != step):
        evaluate()

    report.selected_step = best_step
    report.selected_dev_loss = best_loss
    report.total_steps = step
    report.mean_step_seconds = float(np.mean(step_times)) if step_times else 0.0

    best_store = _store_from(best, store)
    checkpoint_path = None
    if run_dir is not None:
        run_dir = Path(run_dir)
        run_dir.mkdir(parents=True, exist_ok=True)
        checkpoint_path = run_dir / "checkpoint.npz"
        C.save_checkpoint(checkpoint_path, best_store, model_cfg.to_dict())
        report.to_tsv(run_dir / "train_report.tsv")
    return TrainResult(store=best_store, model_cfg=model_cfg, report=report,
                       checkpoint_path=checkpoint_path)


# -- head cost benchmark -------------------------------------------------------

@dataclass
class HeadBenchmark:
    vocab_size: int
    embed_dim: int
    width: int
    steps: int
    vmf_step_seconds: list[float]
    ce_step_seconds: list[float]

    @property
    def vmf_mean(self) -> float:
        return float(np.mean(self.vmf_step_seconds))

    @property
    def ce_mean(self) -> float:
        return float(np.mean(self.ce_step_seconds))

    @property
    def ratio(self) -> float:
        return self.ce_mean / self.vmf_mean

    def lines(self) -> list[str]:
        return [
            f"vocab size\t{self.vocab_size}",
            f"embedding dim\t{self.embed_dim}",
            f"model width\t{self.width}",
            f"timed steps\t{self.steps}",
            f"vmf mean step (s)\t{self.vmf_mean:.4f}",
            f"ce mean step (s)\t{self.ce_mean:.4f}",
            f"ce/vmf ratio\t{self.ratio:.2f}",
        ]


def _dummy_vocab(n_per_lang: int) -> Vocabulary:
    l1 = [(f"a{i}", 1) for i in range(n_per_lang)]
    l2 = [(f"b{i}", 1) for i in range(n_per_lang)]
    return Vocabulary.build(l1, l2, "l1", "l2")


def benchmark_heads(vocab_size: int, embed_dim: int = 300, width: int = 512,
                    steps: int = 4, batch_sentences: int = 8, seq_len: int = 12,
                    num_layers: int = 2, seed: int = 0,
                    heads: tuple[str, ...] = (HEAD_VMF, HEAD_CE)) -> HeadBenchmark:
    """Identical trunk/batch/seed; only the output layer differs.

    The trunk is kept shallow so the measurement isolates head cost, which
    is the quantity the speed claim is about.  `heads` restricts the run;
    the softmax head at very large vocabularies costs gigabytes of
    optimizer state, which a vMF-only scaling probe does not need.
    """
    for head in heads:
        if head not in (HEAD_VMF, HEAD_CE):
            raise CorpusError(f"unknown head {head!r}")
    per_lang = max((vocab_size - 5) // 2, 1)
    vocab = _dummy_vocab(per_lang)
    rng = np.random.default_rng(seed)
    table = rng.standard_normal((vocab.size, embed_dim))
    table /= np.linalg.norm(table, axis=1, keepdims=True)

    l1_ids = list(vocab.lang_range("l1"))
    l2_ids = list(vocab.lang_range("l2"))
    stream = []
    for i in range(batch_sentences):
        src = [vocab.tokens[l1_ids[rng.integers(0, len(l1_ids))]] for _ in range(seq_len)]
        tgt = [vocab.tokens[l2_ids[rng.integers(0, len(l2_ids))]] for _ in range(seq_len)]
        stream.append(TaskExample(
            source=Sentence((start_token("l2"), *src), "l1"),
            target=Sentence(tuple(tgt), "l2"), kind=KIND_S2T))
    batch = make_batches(stream, token_budget=batch_sentences * seq_len, vocab=vocab)[0]

    timings: dict[str, list[float]] = {}
    for head in heads:
        cfg = ModelConfig.toy(head=head, num_layers=num_layers, num_heads=4,
                              width=width, ffn_width=2 * width, embed_dim=embed_dim,
                              max_len=seq_len + 2)
        store = init_model(cfg, table, vocab, seed=seed)
        model = Seq2SeqModel(cfg, store, vocab)
        adam = C.adam_init(store, lr=1e-3)
        times = []
        for _ in range(steps + 1):  # first step warms allocators; dropped
            t0 = time.perf_counter()
            _, grads = C.forward_backward(store, lambda: model.sequence_loss(batch))
            C.adam_step(store, grads, adam)
            times.append(time.perf_counter() - t0)
        timings[head] = times[1:]
    return HeadBenchmark(vocab_size=vocab.size, embed_dim=embed_dim, width=width,
                         steps=steps, vmf_step_seconds=timings.get(HEAD_VMF, []),
                         ce_step_seconds=timings.get(HEAD_CE, []))


# -- key=value config files ----------------------------------------------------

def write_config(path, values: dict) -> None:
    with open(path, "w", encoding="utf-8") as fh:
        for key in sorted(values):
            fh.write(f"{key} = {values[key]}\n")


def read_config(path) -> dict[str, str]:
    """Flat `key = value` lines; '#' comments and blank lines ignored."""
    out: dict[str, str] = {}
    for lineno, line in enumerate(Path(path).read_text(encoding="utf-8").splitlines(), 1):
        stripped = line.strip()
        if not stripped or stripped.startswith("#"):
            continue
        if "=" not in stripped:
            raise CorpusError(f"{path}:{lineno}: expected 'key = value'")
        key, _, value = stripped.partition("=")
        out[key.strip()] = value.strip()
    return out


#: every key a training config file may contain, with its parsed type
TRAIN_KEYS = {
    "profile": str,            # toy | paper (model size preset)
    "head": str,               # vmf | ce
    "ae_fraction": float,
    "ae_count": int,
    "noise.p_drop": float,
    "noise.k_window": int,
    "max_epochs": int,
    "max_steps": int,
    "eval_every": int,
    "patience": int,
    "seed": int,
    "lr": float,
    "warmup_steps": int,
    "token_budget": int,
    "no_encoder_start_token": bool,
    "no_autoencoding": bool,
}

_TRUE, _FALSE = {"true", "1", "yes"}, {"false", "0", "no"}


def _parse_value(key: str, raw: str):
    want = TRAIN_KEYS[key]
    if want is bool:
        low = raw.lower()
        if low in _TRUE:
            return True
        if low in _FALSE:
            return False
        raise CorpusError(f"{key}: expected a boolean, got {raw!r}")
    try:
        return want(raw)
    except ValueError:
        raise CorpusError(f"{key}: expected {want.__name__}, got {raw!r}") from None


def train_config_from_values(values: dict[str, str]) -> tuple[str, TrainConfig]:
    """Build (profile name, TrainConfig) from a parsed key=value mapping.

    Unknown keys are rejected so config typos fail loudly instead of
    silently training with defaults.
    """
    unknown = sorted(set(values) - set(TRAIN_KEYS))
    if unknown:
        raise CorpusError(f"unknown config keys: {', '.join(unknown)}")
    parsed = {k: _parse_value(k, v) for k, v in values.items()}
    profile = parsed.pop("profile", "toy")
    noise = None
    if "noise.p_drop" in parsed or "noise.k_window" in parsed:
        noise = NoiseConfig(p_drop=parsed.pop("noise.p_drop", 0.1),
                            k_window=parsed.pop("noise.k_window", 3))
    return profile, TrainConfig(noise=noise, **parsed)
