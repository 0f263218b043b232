"""Pre-trained word vectors: loading, alignment, lexicon induction, NN search.

Tables are unit-normalized row matrices indexed by global vocabulary id.
The two language spaces are aligned with an orthogonal map (L2 into L1)
solved in closed form from a seed lexicon; the induced bilingual lexicon is
the cosine-nearest L1 word for every L2 word.
"""

from __future__ import annotations

import hashlib
import warnings
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from .corpus.vocab import Vocabulary


class EmbeddingError(ValueError):
    pass


def fallback_vector(word: str, dim: int) -> np.ndarray:
    """Deterministic pseudo-random unit vector keyed by the word string."""
    digest = hashlib.sha256(word.encode("utf-8")).digest()
    rng = np.random.default_rng(int.from_bytes(digest[:8], "little"))
    v = rng.standard_normal(dim)
    return v / np.linalg.norm(v)


@dataclass
class EmbeddingTable:
    lang: str
    dim: int
    vectors: np.ndarray          # [vocab.size, dim], every row unit-norm
    unit_normalized: bool = True
    oov_count: int = 0
    oov_words: list[str] = field(default_factory=list)

    def row(self, idx: int) -> np.ndarray:
        return self.vectors[idx]


def _parse_vector_file(path):
    """Yield (word, vector) rows; header 'count dim' is optional."""
    dim = None
    with open(path, encoding="utf-8") as fh:
        for lineno, line in enumerate(fh, start=1):
            parts = line.rstrip("\n").split(" ")
            if lineno == 1 and len(parts) == 2:
                try:
                    declared = int(parts[1])
                except ValueError:
                    declared = None
                if declared is not None:
                    if declared <= 0:
                        raise EmbeddingError(f"{path}:1: dimension {declared} <= 0")
                    dim = declared
                    continue
            word, values = parts[0], parts[1:]
            if dim is None:
                dim = len(values)
                if dim <= 0:
                    raise EmbeddingError(f"{path}:{lineno}: no vector components")
            if len(values) != dim:
                raise EmbeddingError(
                    f"{path}:{lineno}: expected {dim} components, got {len(values)}")
            yield word, np.array(values, dtype=np.float64)


def load_embeddings(path, vocab: Vocabulary, lang: str) -> EmbeddingTable:
    """Unit-normalized table over the full vocabulary.

    Rows this table does not own (other language, control tokens) and owned
    words missing from the file get the deterministic fallback vector; only
    missing owned words count as OOV.
    """
    file_vectors: dict[str, np.ndarray] = {}
    dim = None
    for word, vec in _parse_vector_file(path):
        dim = vec.shape[0]
        if word not in file_vectors:  # first occurrence wins on duplicates
            norm = np.linalg.norm(vec)
            if norm > 0:
                file_vectors[word] = vec / norm
    if dim is None:
        raise EmbeddingError(f"{path}: no vectors found")

    vectors = np.empty((vocab.size, dim))
    oov_words = []
    owned = set(vocab.lang_range(lang))
    for idx, token in enumerate(vocab.tokens):
        if idx in owned and token in file_vectors:
            vectors[idx] = file_vectors[token]
        else:
            vectors[idx] = fallback_vector(token, dim)
            if idx in owned:
                oov_words.append(token)
    return EmbeddingTable(lang=lang, dim=dim, vectors=vectors,
                          oov_count=len(oov_words), oov_words=oov_words)


# -- alignment ----------------------------------------------------------------

@dataclass
class AlignmentMap:
    """Orthogonal map W applied to row vectors: e_l1 ~ e_l2 @ W."""

    matrix: np.ndarray

    def apply(self, rows: np.ndarray) -> np.ndarray:
        return rows @ self.matrix

    def orthogonality_error(self) -> float:
        d = self.matrix.shape[0]
        return float(np.max(np.abs(self.matrix.T @ self.matrix - np.eye(d))))

    def save(self, path) -> None:
        np.savetxt(path, self.matrix)

    @classmethod
    def load(cls, path) -> "AlignmentMap":
        return cls(matrix=np.loadtxt(path))


def _solve_procrustes(x: np.ndarray, y: np.ndarray) -> np.ndarray:
    """argmin_{W orthogonal} sum ||x_i W - y_i||^2 via SVD of X^T Y."""
    u, _, vt = np.linalg.svd(x.T @ y)
    return u @ vt


def identical_string_seed(vocab: Vocabulary) -> list[tuple[int, int]]:
    """Seed pairs (l2_id, l1_id) for identically spelled words."""
    l1_by_token = {vocab.tokens[i]: i for i in vocab.lang_range(vocab.lang1)}
    pairs = []
    for j in vocab.lang_range(vocab.lang2):
        i = l1_by_token.get(vocab.tokens[j])
        if i is not None:
            pairs.append((j, i))
    return pairs


def procrustes_align(table_l2: EmbeddingTable, table_l1: EmbeddingTable,
                     seed_pairs: list[tuple[int, int]],
                     self_learn_iters: int = 0,
                     vocab: Vocabulary | None = None) -> AlignmentMap:
    """Closed-form orthogonal alignment on seed pairs (l2_id, l1_id).

    With self_learn_iters > 0, re-induces a full lexicon under the current
    map and re-solves on it (vocab required to scope the word sections).
    """
    if not seed_pairs:
        raise EmbeddingError("seed lexicon is empty")
    if len(seed_pairs) < table_l2.dim:
        warnings.warn(f"only {len(seed_pairs)} seed pairs for dimension "
                      f"{table_l2.dim}; alignment is rank-deficient")
    l2_ids = np.array([p[0] for p in seed_pairs])
    l1_ids = np.array([p[1] for p in seed_pairs])
    w = _solve_procrustes(table_l2.vectors[l2_ids], table_l1.vectors[l1_ids])
    for _ in range(self_learn_iters):
        if vocab is None:
            raise EmbeddingError("self-learning needs the vocabulary")
        lex = induce_lexicon(table_l2, table_l1, AlignmentMap(w), vocab)
        l2_ids = np.array([vocab.id_of(a, vocab.lang2) for a in lex.entries])
        l1_ids = np.array([vocab.id_of(b, vocab.lang1) for b, _ in lex.entries.values()])
        w = _solve_procrustes(table_l2.vectors[l2_ids], table_l1.vectors[l1_ids])
    return AlignmentMap(matrix=w)


# -- nearest neighbors and lexicon --------------------------------------------

def nearest_rows(query: np.ndarray, matrix: np.ndarray, k: int,
                 assume_unit: bool = False) -> list[tuple[int, float]]:
    """Exact top-k rows by cosine; ties broken by lowest row index.

    assume_unit skips the per-row norm division (valid for loaded tables);
    it must produce the same ranking as the full computation.
    """
    if k < 1:
        raise EmbeddingError(f"k must be >= 1, got {k}")
    if matrix.shape[0] == 0:
        raise EmbeddingError("empty table")
    qnorm = np.linalg.norm(query)
    if qnorm == 0:
        raise EmbeddingError("zero query vector")
    scores = matrix @ (query / qnorm)
    if not assume_unit:
        scores = scores / np.linalg.norm(matrix, axis=1)
    k = min(k, matrix.shape[0])
    order = np.lexsort((np.arange(len(scores)), -scores))[:k]
    return [(int(i), float(scores[i])) for i in order]


def nearest_neighbor(query: np.ndarray, table: EmbeddingTable, k: int,
                     vocab: Vocabulary, ids: np.ndarray | None = None
                     ) -> list[tuple[str, float]]:
    """Top-k (word, cosine) over the whole table or an id subset."""
    if ids is None:
        hits = nearest_rows(query, table.vectors, k, assume_unit=table.unit_normalized)
        return [(vocab.token_of(i), s) for i, s in hits]
    ids = np.asarray(ids)
    hits = nearest_rows(query, table.vectors[ids], k, assume_unit=table.unit_normalized)
    return [(vocab.token_of(int(ids[i])), s) for i, s in hits]


@dataclass
class BilingualLexicon:
    lang2: str
    lang1: str
    entries: dict[str, tuple[str, float]]  # l2 word -> (l1 word, cosine)

    def save(self, path) -> None:
        with open(path, "w", encoding="utf-8") as fh:
            for l2_word, (l1_word, score) in self.entries.items():
                fh.write(f"{l2_word}\t{l1_word}\t{score:.6f}\n")

    @classmethod
    def load(cls, path, lang2: str, lang1: str) -> "BilingualLexicon":
        entries = {}
        for line in Path(path).read_text(encoding="utf-8").splitlines():
            l2_word, l1_word, score = line.split("\t")
            entries[l2_word] = (l1_word, float(score))
        return cls(lang2=lang2, lang1=lang1, entries=entries)


def combined_matrix(table_l1: EmbeddingTable, table_l2: EmbeddingTable,
                    vocab: Vocabulary, alignment: AlignmentMap | None = None
                    ) -> np.ndarray:
    """One [vocab.size, d] matrix: L1 rows from table_l1, L2 rows from
    table_l2 (mapped into L1 space when an alignment is given), control
    tokens from their deterministic fallbacks."""
    if table_l1.dim != table_l2.dim:
        raise EmbeddingError(f"dimension mismatch: {table_l1.dim} vs {table_l2.dim}")
    out = table_l1.vectors.copy()
    l2_ids = np.array(list(vocab.lang_range(vocab.lang2)))
    if len(l2_ids):
        rows = table_l2.vectors[l2_ids]
        if alignment is not None:
            rows = alignment.apply(rows)
        out[l2_ids] = rows
    return out


def induce_lexicon(table_l2: EmbeddingTable, table_l1: EmbeddingTable,
                   alignment: AlignmentMap, vocab: Vocabulary) -> BilingualLexicon:
    """Nearest aligned L1 word for every L2 word; ties go to the lowest id."""
    l1_ids = np.array(list(vocab.lang_range(vocab.lang1)))
    l2_ids = np.array(list(vocab.lang_range(vocab.lang2)))
    targets = table_l1.vectors[l1_ids]
    entries: dict[str, tuple[str, float]] = {}
    if len(l2_ids) == 0:
        return BilingualLexicon(lang2=vocab.lang2, lang1=vocab.lang1, entries=entries)
    mapped = alignment.apply(table_l2.vectors[l2_ids])
    # blocked scan keeps the [n2, n1] score matrix out of memory at 50K scale
    block = 2048
    for lo in range(0, len(l2_ids), block):
        scores = mapped[lo:lo + block] @ targets.T
        best = np.argmax(scores, axis=1)  # argmax breaks ties toward lower id
        for row, j in enumerate(best):
            l2_word = vocab.token_of(int(l2_ids[lo + row]))
            entries[l2_word] = (vocab.token_of(int(l1_ids[j])), float(scores[row, j]))
    return BilingualLexicon(lang2=vocab.lang2, lang1=vocab.lang1, entries=entries)
