"""Tests for embedding load/normalize, Procrustes alignment, lexicon, NN search."""

import numpy as np
import pytest

from parasphere import embeddings as emb
from parasphere.corpus import Vocabulary


def make_vocab(n, lang1="en", lang2="fr", prefix1="e", prefix2="f"):
    l1 = [(f"{prefix1}{i}", 1) for i in range(n)]
    l2 = [(f"{prefix2}{i}", 1) for i in range(n)]
    return Vocabulary.build(l1, l2, lang1, lang2)


def random_orthogonal(d, rng):
    a = rng.standard_normal((d, d))
    q, r = np.linalg.qr(a)
    return q * np.sign(np.diag(r))


def unit_rows(n, d, rng):
    x = rng.standard_normal((n, d))
    return x / np.linalg.norm(x, axis=1, keepdims=True)


def synthetic_tables(n, d, seed, noise=0.0):
    """L1 rows random unit; L2 rows are the same points under a known rotation."""
    rng = np.random.default_rng(seed)
    vocab = make_vocab(n)
    rot = random_orthogonal(d, rng)
    y = unit_rows(n, d, rng)
    x = y @ rot.T
    if noise > 0:
        x = x + noise * rng.standard_normal(x.shape)
        x /= np.linalg.norm(x, axis=1, keepdims=True)
    v1 = unit_rows(vocab.size, d, rng)
    v2 = unit_rows(vocab.size, d, rng)
    l1_ids = np.array(list(vocab.lang_range("en")))
    l2_ids = np.array(list(vocab.lang_range("fr")))
    v1[l1_ids] = y
    v2[l2_ids] = x
    t1 = emb.EmbeddingTable(lang="en", dim=d, vectors=v1)
    t2 = emb.EmbeddingTable(lang="fr", dim=d, vectors=v2)
    pairs = list(zip(l2_ids.tolist(), l1_ids.tolist()))
    return vocab, t1, t2, rot, pairs


class TestLoadEmbeddings:
    def _write(self, path, lines):
        path.write_text("\n".join(lines) + "\n", encoding="utf-8")

    def test_normalization(self, tmp_path):
        p = tmp_path / "vec.txt"
        self._write(p, ["e0 3 0 4", "e1 0 2 0"])
        vocab = make_vocab(2)
        table = emb.load_embeddings(p, vocab, "en")
        np.testing.assert_allclose(table.row(vocab.id_of("e0", "en")), [0.6, 0.0, 0.8])
        np.testing.assert_allclose(table.row(vocab.id_of("e1", "en")), [0.0, 1.0, 0.0])

    def test_header_line_accepted(self, tmp_path):
        p = tmp_path / "vec.txt"
        self._write(p, ["2 3", "e0 1 0 0", "e1 0 1 0"])
        table = emb.load_embeddings(p, make_vocab(2), "en")
        assert table.dim == 3 and table.oov_count == 0

    def test_dimension_mismatch_rejected(self, tmp_path):
        p = tmp_path / "vec.txt"
        self._write(p, ["e0 1 0 0", "e1 0 1"])
        with pytest.raises(emb.EmbeddingError, match="expected 3"):
            emb.load_embeddings(p, make_vocab(2), "en")

    def test_non_positive_dimension_rejected(self, tmp_path):
        p = tmp_path / "vec.txt"
        self._write(p, ["5 0", "e0"])
        with pytest.raises(emb.EmbeddingError):
            emb.load_embeddings(p, make_vocab(1), "en")

    def test_missing_word_gets_fallback_and_is_counted(self, tmp_path):
        p = tmp_path / "vec.txt"
        self._write(p, ["e0 1 0 0"])
        vocab = make_vocab(3)
        table = emb.load_embeddings(p, vocab, "en")
        assert table.oov_count == 2
        assert sorted(table.oov_words) == ["e1", "e2"]
        np.testing.assert_allclose(table.row(vocab.id_of("e1", "en")),
                                   emb.fallback_vector("e1", 3))

    def test_every_row_unit_norm(self, tmp_path):
        p = tmp_path / "vec.txt"
        self._write(p, ["e0 9 9 9", "e1 0.1 0 0"])
        table = emb.load_embeddings(p, make_vocab(4), "en")
        norms = np.linalg.norm(table.vectors, axis=1)
        assert np.max(np.abs(norms - 1.0)) < 1e-6

    def test_duplicate_word_first_wins(self, tmp_path):
        p = tmp_path / "vec.txt"
        self._write(p, ["e0 1 0 0", "e0 0 1 0"])
        table = emb.load_embeddings(p, make_vocab(1), "en")
        np.testing.assert_allclose(table.row(5), [1, 0, 0])

    def test_zero_vector_falls_back(self, tmp_path):
        p = tmp_path / "vec.txt"
        self._write(p, ["e0 0 0 0"])
        vocab = make_vocab(1)
        table = emb.load_embeddings(p, vocab, "en")
        assert table.oov_count == 1
        assert abs(np.linalg.norm(table.row(5)) - 1.0) < 1e-12

    def test_fallback_is_deterministic(self):
        a = emb.fallback_vector("chateau", 8)
        b = emb.fallback_vector("chateau", 8)
        c = emb.fallback_vector("chapeau", 8)
        np.testing.assert_array_equal(a, b)
        assert not np.allclose(a, c)


class TestProcrustes:
    def test_identity_case(self):
        vocab, t1, _, _, pairs = synthetic_tables(40, 8, seed=0)
        mirrored = t1.vectors.copy()
        for l2_id, l1_id in pairs:
            mirrored[l2_id] = t1.vectors[l1_id]
        t2 = emb.EmbeddingTable(lang="fr", dim=8, vectors=mirrored)
        w = emb.procrustes_align(t2, t1, pairs).matrix
        np.testing.assert_allclose(w, np.eye(8), atol=1e-6)

    def test_exact_rotation_recovered(self):
        _, t1, t2, rot, pairs = synthetic_tables(100, 10, seed=1)
        w = emb.procrustes_align(t2, t1, pairs).matrix
        assert np.linalg.norm(w - rot) < 1e-5

    def test_orthogonality(self):
        _, t1, t2, _, pairs = synthetic_tables(60, 12, seed=2, noise=0.05)
        a = emb.procrustes_align(t2, t1, pairs)
        assert a.orthogonality_error() < 1e-5

    def test_no_small_rotation_improves_fit(self):
        """Sampled perturbations W @ G must not lower the seed-pair loss."""
        _, t1, t2, _, pairs = synthetic_tables(80, 6, seed=3, noise=0.1)
        w = emb.procrustes_align(t2, t1, pairs).matrix
        l2_ids = np.array([p[0] for p in pairs])
        l1_ids = np.array([p[1] for p in pairs])
        x, y = t2.vectors[l2_ids], t1.vectors[l1_ids]

        def loss(m):
            return float(np.sum((x @ m - y) ** 2))

        base = loss(w)
        rng = np.random.default_rng(4)
        for _ in range(50):
            u = rng.standard_normal(6)
            u /= np.linalg.norm(u)
            v = rng.standard_normal(6)
            v -= (v @ u) * u
            v /= np.linalg.norm(v)
            theta = rng.uniform(0.001, 0.05)
            g = (np.eye(6)
                 + (np.cos(theta) - 1) * (np.outer(u, u) + np.outer(v, v))
                 + np.sin(theta) * (np.outer(u, v) - np.outer(v, u)))
            assert loss(w @ g) >= base - 1e-9

    def test_rank_deficient_seed_warns(self):
        _, t1, t2, _, pairs = synthetic_tables(30, 12, seed=5)
        with pytest.warns(UserWarning, match="rank-deficient"):
            emb.procrustes_align(t2, t1, pairs[:4])

    def test_empty_seed_rejected(self):
        _, t1, t2, _, _ = synthetic_tables(10, 4, seed=6)
        with pytest.raises(emb.EmbeddingError):
            emb.procrustes_align(t2, t1, [])

    def test_self_learning_keeps_exact_solution(self):
        vocab, t1, t2, rot, pairs = synthetic_tables(100, 8, seed=7)
        a = emb.procrustes_align(t2, t1, pairs[:30], self_learn_iters=2, vocab=vocab)
        assert np.linalg.norm(a.matrix - rot) < 1e-5

    def test_save_load_round_trip(self, tmp_path):
        _, t1, t2, _, pairs = synthetic_tables(30, 5, seed=8)
        a = emb.procrustes_align(t2, t1, pairs)
        path = tmp_path / "w.txt"
        a.save(path)
        b = emb.AlignmentMap.load(path)
        np.testing.assert_allclose(b.matrix, a.matrix, atol=1e-12)


class TestNearestNeighbor:
    def _table(self, n=40, d=7, seed=9):
        rng = np.random.default_rng(seed)
        vocab = make_vocab(n)
        vectors = unit_rows(vocab.size, d, rng)
        return vocab, emb.EmbeddingTable(lang="en", dim=d, vectors=vectors)

    def test_own_row_is_top_hit(self):
        vocab, table = self._table()
        word_id = vocab.id_of("e3", "en")
        hits = emb.nearest_neighbor(table.row(word_id), table, 1, vocab)
        assert hits[0][0] == "e3"
        assert hits[0][1] == pytest.approx(1.0)

    def test_matches_exhaustive_scan(self):
        vocab, table = self._table(n=60, d=5)
        rng = np.random.default_rng(10)
        for _ in range(200):
            q = rng.standard_normal(5)
            got = [i for i, _ in emb.nearest_rows(q, table.vectors, 8)]
            cos = [float(q @ row / (np.linalg.norm(q) * np.linalg.norm(row)))
                   for row in table.vectors]
            want = sorted(range(len(cos)), key=lambda i: (-cos[i], i))[:8]
            assert got == want

    def test_k_exceeding_table_returns_all_sorted(self):
        rng = np.random.default_rng(11)
        m = unit_rows(5, 4, rng)
        hits = emb.nearest_rows(rng.standard_normal(4), m, 50)
        assert len(hits) == 5
        scores = [s for _, s in hits]
        assert scores == sorted(scores, reverse=True)

    def test_fast_path_ranking_identical(self):
        vocab, table = self._table(n=80, d=6, seed=12)
        rng = np.random.default_rng(13)
        for _ in range(100):
            q = rng.standard_normal(6)
            fast = [i for i, _ in emb.nearest_rows(q, table.vectors, 10, assume_unit=True)]
            ref = [i for i, _ in emb.nearest_rows(q, table.vectors, 10, assume_unit=False)]
            assert fast == ref

    def test_duplicate_rows_tie_to_lower_index(self):
        m = np.array([[0.0, 1.0], [1.0, 0.0], [1.0, 0.0]])
        hits = emb.nearest_rows(np.array([2.0, 0.0]), m, 2)
        assert [i for i, _ in hits] == [1, 2]

    def test_id_subset_restricts_search(self):
        vocab, table = self._table(n=20, d=4, seed=14)
        ids = np.array(list(vocab.lang_range("fr")))
        hits = emb.nearest_neighbor(np.ones(4), table, 3, vocab, ids=ids)
        assert all(w.startswith("f") for w, _ in hits)

    def test_invalid_inputs(self):
        m = np.eye(3)
        with pytest.raises(emb.EmbeddingError):
            emb.nearest_rows(np.ones(3), m, 0)
        with pytest.raises(emb.EmbeddingError):
            emb.nearest_rows(np.zeros(3), m, 1)
        with pytest.raises(emb.EmbeddingError):
            emb.nearest_rows(np.ones(3), np.empty((0, 3)), 1)

    def test_scale_invariance(self):
        vocab, table = self._table(n=30, d=5, seed=15)
        rng = np.random.default_rng(16)
        q = rng.standard_normal(5)
        a = [i for i, _ in emb.nearest_rows(q, table.vectors, 5)]
        b = [i for i, _ in emb.nearest_rows(3.7 * q, table.vectors, 5)]
        assert a == b


class TestLexicon:
    def test_identity_lexicon(self):
        rng = np.random.default_rng(17)
        vocab = make_vocab(10, prefix1="w", prefix2="w")
        vectors = unit_rows(vocab.size, 6, rng)
        l1_ids = list(vocab.lang_range("en"))
        l2_ids = list(vocab.lang_range("fr"))
        vectors[l2_ids] = vectors[l1_ids]
        t1 = emb.EmbeddingTable(lang="en", dim=6, vectors=vectors)
        t2 = emb.EmbeddingTable(lang="fr", dim=6, vectors=vectors)
        lex = emb.induce_lexicon(t2, t1, emb.AlignmentMap(np.eye(6)), vocab)
        for w in (vocab.token_of(i) for i in l2_ids):
            assert lex.entries[w][0] == w
            assert lex.entries[w][1] == pytest.approx(1.0)

    def test_exact_rotation_recovers_gold_pairs(self):
        vocab, t1, t2, rot, pairs = synthetic_tables(50, 8, seed=18)
        a = emb.procrustes_align(t2, t1, pairs)
        lex = emb.induce_lexicon(t2, t1, a, vocab)
        for l2_id, l1_id in pairs:
            assert lex.entries[vocab.token_of(l2_id)][0] == vocab.token_of(l1_id)

    def test_tie_goes_to_lower_l1_id(self):
        vocab = make_vocab(2)
        d = 3
        vectors = unit_rows(vocab.size, d, np.random.default_rng(19))
        e = np.array([1.0, 0.0, 0.0])
        l1_ids = list(vocab.lang_range("en"))
        vectors[l1_ids[0]] = e
        vectors[l1_ids[1]] = e
        l2_ids = list(vocab.lang_range("fr"))
        vectors[l2_ids[0]] = e
        t1 = emb.EmbeddingTable(lang="en", dim=d, vectors=vectors)
        t2 = emb.EmbeddingTable(lang="fr", dim=d, vectors=vectors)
        lex = emb.induce_lexicon(t2, t1, emb.AlignmentMap(np.eye(d)), vocab)
        assert lex.entries["f0"][0] == "e0"

    def test_scores_within_cosine_range(self):
        vocab, t1, t2, _, pairs = synthetic_tables(30, 6, seed=20, noise=0.2)
        a = emb.procrustes_align(t2, t1, pairs)
        lex = emb.induce_lexicon(t2, t1, a, vocab)
        assert len(lex.entries) == 30
        for _, score in lex.entries.values():
            assert -1.0 - 1e-9 <= score <= 1.0 + 1e-9

    def test_save_load_round_trip(self, tmp_path):
        vocab, t1, t2, _, pairs = synthetic_tables(12, 4, seed=21)
        lex = emb.induce_lexicon(t2, t1, emb.procrustes_align(t2, t1, pairs), vocab)
        path = tmp_path / "lexicon.tsv"
        lex.save(path)
        loaded = emb.BilingualLexicon.load(path, "fr", "en")
        assert loaded.entries.keys() == lex.entries.keys()
        for k in lex.entries:
            assert loaded.entries[k][0] == lex.entries[k][0]
            assert loaded.entries[k][1] == pytest.approx(lex.entries[k][1], abs=1e-6)
