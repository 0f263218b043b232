"""Shared transformer encoder-decoder with two interchangeable output heads.

The trunk is a pre-norm transformer over the combined bilingual vocabulary
with a frozen pre-trained embedding table and a trainable input projection.
The head is either a linear map to the embedding space (continuous output,
spherical loss) or a linear map to vocabulary logits (cross-entropy).
Language identity enters only through start tokens and vocabulary rows;
there are no per-language parameter blocks.
"""

from __future__ import annotations

from dataclasses import asdict, dataclass

import numpy as np

from . import compute as C
from . import vmf
from .corpus.stream import Batch
from .corpus.vocab import Vocabulary

HEAD_VMF = "vmf"
HEAD_CE = "ce"


class ModelError(ValueError):
    pass


@dataclass(frozen=True)
class ModelConfig:
    num_layers: int
    num_heads: int
    width: int
    ffn_width: int
    embed_dim: int
    dropout: float
    head: str
    profile: str
    max_len: int = 256
    vmf_reg: float = 0.02

    def __post_init__(self):
        if self.head not in (HEAD_VMF, HEAD_CE):
            raise ModelError(f"unknown head {self.head!r}")
        if self.width % self.num_heads != 0:
            raise ModelError(f"width {self.width} not divisible by "
                             f"{self.num_heads} heads")
        if self.profile == "paper":
            pinned = (self.num_layers, self.num_heads, self.width,
                      self.ffn_width, self.embed_dim, self.dropout)
            if pinned != (6, 4, 512, 1024, 300, 0.3):
                raise ModelError(f"paper profile is pinned; got {pinned}")
        elif self.profile != "toy":
            raise ModelError(f"unknown profile {self.profile!r}")

    @classmethod
    def paper(cls, head: str = HEAD_VMF) -> "ModelConfig":
        return cls(num_layers=6, num_heads=4, width=512, ffn_width=1024,
                   embed_dim=300, dropout=0.3, head=head, profile="paper")

    @classmethod
    def toy(cls, head: str = HEAD_VMF, num_layers: int = 2, num_heads: int = 2,
            width: int = 32, ffn_width: int = 64, embed_dim: int = 16,
            dropout: float = 0.0, max_len: int = 64) -> "ModelConfig":
        return cls(num_layers=num_layers, num_heads=num_heads, width=width,
                   ffn_width=ffn_width, embed_dim=embed_dim, dropout=dropout,
                   head=head, profile="toy", max_len=max_len)

    def to_dict(self) -> dict:
        return asdict(self)

    @classmethod
    def from_dict(cls, d: dict) -> "ModelConfig":
        return cls(**d)


@dataclass
class EncoderStates:
    states: C.Tensor      # [B, S, width]
    mask: np.ndarray      # [B, S] 1.0 real / 0.0 pad


def sinusoidal_positions(max_len: int, width: int) -> np.ndarray:
    pos = np.arange(max_len)[:, None]
    idx = np.arange(width // 2)[None, :]
    angles = pos / np.power(10000.0, 2.0 * idx / width)
    table = np.zeros((max_len, width))
    table[:, 0::2] = np.sin(angles)
    table[:, 1::2] = np.cos(angles)
    return table


def _xavier(rng, fan_in, fan_out):
    scale = np.sqrt(2.0 / (fan_in + fan_out))
    return scale * rng.standard_normal((fan_in, fan_out))


def init_model(cfg: ModelConfig, embed_matrix: np.ndarray, vocab: Vocabulary,
               seed: int = 0) -> C.ParameterStore:
    """Fresh ParameterStore: frozen embeddings + seeded random trunk/head."""
    if embed_matrix.shape != (vocab.size, cfg.embed_dim):
        raise ModelError(f"embedding matrix {embed_matrix.shape} does not cover "
                         f"vocabulary {vocab.size} at dim {cfg.embed_dim}")
    store = C.ParameterStore()
    store.add("embed.table", embed_matrix, trainable=False)
    rng = C.derive_rng(seed, "embed.proj")
    store.add("embed.proj", _xavier(rng, cfg.embed_dim, cfg.width))
    store.add("embed.proj_b", np.zeros(cfg.width))

    def add_linear(name, fan_in, fan_out):
        store.add(name, _xavier(C.derive_rng(seed, name), fan_in, fan_out))

    def add_ln(name):
        store.add(name + ".g", np.ones(cfg.width))
        store.add(name + ".b", np.zeros(cfg.width))

    def add_attention(prefix):
        for part in ("wq", "wk", "wv", "wo"):
            add_linear(f"{prefix}.{part}", cfg.width, cfg.width)

    def add_ffn(prefix):
        add_linear(prefix + ".w1", cfg.width, cfg.ffn_width)
        store.add(prefix + ".b1", np.zeros(cfg.ffn_width))
        add_linear(prefix + ".w2", cfg.ffn_width, cfg.width)
        store.add(prefix + ".b2", np.zeros(cfg.width))

    for i in range(cfg.num_layers):
        add_ln(f"enc.{i}.ln1")
        add_attention(f"enc.{i}.att")
        add_ln(f"enc.{i}.ln2")
        add_ffn(f"enc.{i}.ffn")
    add_ln("enc.final_ln")
    for i in range(cfg.num_layers):
        add_ln(f"dec.{i}.ln1")
        add_attention(f"dec.{i}.self")
        add_ln(f"dec.{i}.ln2")
        add_attention(f"dec.{i}.cross")
        add_ln(f"dec.{i}.ln3")
        add_ffn(f"dec.{i}.ffn")
    add_ln("dec.final_ln")

    out_dim = cfg.embed_dim if cfg.head == HEAD_VMF else vocab.size
    add_linear("head.w", cfg.width, out_dim)
    store.add("head.b", np.zeros(out_dim))
    return store


class Seq2SeqModel:
    """Forward evaluation over a ParameterStore produced by init_model."""

    def __init__(self, cfg: ModelConfig, store: C.ParameterStore, vocab: Vocabulary):
        self.cfg = cfg
        self.store = store
        self.vocab = vocab
        self.positions = sinusoidal_positions(cfg.max_len, cfg.width)
        self.vmf_cfg = vmf.VmfConfig(dim=cfg.embed_dim, reg_weight=cfg.vmf_reg)

    # -- building blocks ----------------------------------------------------

    def _drop(self, x, train, rng):
        if not train or self.cfg.dropout <= 0.0:
            return x
        return C.dropout(x, self.cfg.dropout, rng)

    def _embed(self, ids: np.ndarray, train: bool, rng) -> C.Tensor:
        if ids.shape[1] > self.cfg.max_len:
            raise ModelError(f"sequence length {ids.shape[1]} exceeds "
                             f"max_len {self.cfg.max_len}")
        e = C.embedding(self.store["embed.table"], ids)
        z = C.add(C.matmul(e, self.store["embed.proj"]), self.store["embed.proj_b"])
        z = C.mul(z, float(np.sqrt(self.cfg.width)))
        z = C.add(z, self.positions[:ids.shape[1]])
        return self._drop(z, train, rng)

    def _ln(self, name, x):
        return C.layer_norm(x, self.store[name + ".g"], self.store[name + ".b"])

    def _attention(self, prefix, q_in, kv_in, add_mask, train, rng):
        """add_mask: additive [*, Tq, Tk] broadcastable block, 0 or -1e9."""
        cfg = self.cfg
        dk = cfg.width // cfg.num_heads
        b, tq = q_in.shape[0], q_in.shape[1]
        tk = kv_in.shape[1]

        def heads(x, t):
            x = C.reshape(x, (b, t, cfg.num_heads, dk))
            return C.transpose(x, (0, 2, 1, 3))  # [B, H, T, dk]

        q = heads(C.matmul(q_in, self.store[prefix + ".wq"]), tq)
        k = heads(C.matmul(kv_in, self.store[prefix + ".wk"]), tk)
        v = heads(C.matmul(kv_in, self.store[prefix + ".wv"]), tk)
        scores = C.mul(C.matmul(q, C.transpose(k, (0, 1, 3, 2))), dk ** -0.5)
        att = C.softmax(C.add(scores, add_mask))
        att = self._drop(att, train, rng)
        mixed = C.matmul(att, v)  # [B, H, Tq, dk]
        merged = C.reshape(C.transpose(mixed, (0, 2, 1, 3)), (b, tq, cfg.width))
        return C.matmul(merged, self.store[prefix + ".wo"])

    @staticmethod
    def _pad_mask(mask: np.ndarray) -> np.ndarray:
        # [B, S] -> additive [B, 1, 1, S]
        return ((1.0 - mask) * -1e9)[:, None, None, :]

    @staticmethod
    def _causal_mask(t: int) -> np.ndarray:
        return np.triu(np.full((t, t), -1e9), k=1)

    # -- public API ----------------------------------------------------------

    def encode(self, src_ids: np.ndarray, src_mask: np.ndarray,
               train: bool = False, rng=None) -> EncoderStates:
        if src_ids.shape[1] == 0:
            raise ModelError("empty source")
        x = self._embed(src_ids, train, rng)
        add_mask = self._pad_mask(src_mask)
        for i in range(self.cfg.num_layers):
            normed = self._ln(f"enc.{i}.ln1", x)
            att = self._attention(f"enc.{i}.att", normed, normed, add_mask, train, rng)
            x = C.add(x, self._drop(att, train, rng))
            h = self._ln(f"enc.{i}.ln2", x)
            h = C.add(C.matmul(C.relu(C.add(C.matmul(h, self.store[f"enc.{i}.ffn.w1"]),
                                            self.store[f"enc.{i}.ffn.b1"])),
                               self.store[f"enc.{i}.ffn.w2"]),
                      self.store[f"enc.{i}.ffn.b2"])
            x = C.add(x, self._drop(h, train, rng))
        return EncoderStates(states=self._ln("enc.final_ln", x), mask=src_mask)

    def decode(self, enc: EncoderStates, tgt_in_ids: np.ndarray,
               train: bool = False, rng=None) -> C.Tensor:
        """Head outputs for every prefix position: [B, T, d] or [B, T, |V|]."""
        if tgt_in_ids.shape[1] == 0:
            raise ModelError("empty target prefix")
        x = self._embed(tgt_in_ids, train, rng)
        causal = self._causal_mask(tgt_in_ids.shape[1])
        cross = self._pad_mask(enc.mask)
        for i in range(self.cfg.num_layers):
            normed = self._ln(f"dec.{i}.ln1", x)
            att = self._attention(f"dec.{i}.self", normed, normed, causal, train, rng)
            x = C.add(x, self._drop(att, train, rng))
            att = self._attention(f"dec.{i}.cross", self._ln(f"dec.{i}.ln2", x),
                                  enc.states, cross, train, rng)
            x = C.add(x, self._drop(att, train, rng))
            h = self._ln(f"dec.{i}.ln3", x)
            h = C.add(C.matmul(C.relu(C.add(C.matmul(h, self.store[f"dec.{i}.ffn.w1"]),
                                            self.store[f"dec.{i}.ffn.b1"])),
                               self.store[f"dec.{i}.ffn.w2"]),
                      self.store[f"dec.{i}.ffn.b2"])
            x = C.add(x, self._drop(h, train, rng))
        x = self._ln("dec.final_ln", x)
        return C.add(C.matmul(x, self.store["head.w"]), self.store["head.b"])

    def sequence_loss(self, batch: Batch, train: bool = False, rng=None) -> C.Tensor:
        """Mean per-token loss over non-pad target positions."""
        enc = self.encode(batch.src_ids, batch.src_mask, train, rng)
        out = self.decode(enc, batch.tgt_in_ids, train, rng)
        b, t = batch.tgt_out_ids.shape
        flat = C.reshape(out, (b * t, out.shape[-1]))
        weights = batch.tgt_mask.reshape(b * t)
        targets = batch.tgt_out_ids.reshape(b * t)
        if self.cfg.head == HEAD_CE:
            return C.cross_entropy(flat, targets, weights)
        target_vectors = self.store["embed.table"].data[targets]
        return C.vmf_loss(flat, target_vectors, weights, self.vmf_cfg)

    def head_parameter_count(self) -> int:
        return int(self.store["head.w"].data.size + self.store["head.b"].data.size)
