"""Training loop, early stopping, divergence handling, config files, benchmark."""

import numpy as np
import pytest

from parasphere import compute as C
from parasphere.corpus import (KIND_AE, KIND_S2T, KIND_T2S, CorpusError,
                               NoiseConfig, Sentence, Vocabulary)
from parasphere.model import HEAD_CE, HEAD_VMF, ModelConfig
from parasphere.training import (CorpusArtifacts, TrainConfig, TrainReport,
                                 benchmark_heads, dev_ae_batches, read_config,
                                 train, train_config_from_values, write_config)

N_TYPES = 12


def bijective_pairs(n, rng, lo=3, hi=6):
    """Parallel sentences under the exact token bijection w_i <-> v_i."""
    pairs = []
    for _ in range(n):
        idx = rng.integers(0, N_TYPES, size=int(rng.integers(lo, hi + 1)))
        pairs.append((Sentence(tuple(f"w{i}" for i in idx), "src"),
                      Sentence(tuple(f"v{i}" for i in idx), "tgt")))
    return pairs


def toy_artifacts(n_pairs=24, n_dev=6, seed=0, dim=8):
    rng = np.random.default_rng(seed)
    pairs = bijective_pairs(n_pairs + n_dev, rng)
    vocab = Vocabulary.build([(f"w{i}", 1) for i in range(N_TYPES)],
                             [(f"v{i}", 1) for i in range(N_TYPES)], "src", "tgt")
    table = np.random.default_rng(seed + 1).standard_normal((vocab.size, dim))
    table /= np.linalg.norm(table, axis=1, keepdims=True)
    return CorpusArtifacts(vocab=vocab, embed_matrix=table,
                           train_pairs=pairs[:n_pairs],
                           dev_sentences=[s for s, _ in pairs[n_pairs:]])


def tiny_model_cfg(head=HEAD_VMF):
    return ModelConfig.toy(head=head, num_layers=1, num_heads=2, width=16,
                           ffn_width=32, embed_dim=8, max_len=16)


def tiny_train_cfg(**kw):
    base = dict(head=HEAD_VMF, ae_fraction=0.25, eval_every=5, patience=3,
                max_epochs=2, seed=0, lr=1e-3, token_budget=64)
    base.update(kw)
    return TrainConfig(**base)


class TestTrainConfig:
    def test_patience_must_be_positive(self):
        with pytest.raises(CorpusError, match="patience"):
            TrainConfig(ae_fraction=0.1, patience=0)

    def test_exactly_one_ae_knob(self):
        with pytest.raises(CorpusError, match="exactly one"):
            TrainConfig(ae_fraction=0.1, ae_count=3)
        with pytest.raises(CorpusError, match="exactly one"):
            TrainConfig()

    def test_no_autoencoding_needs_neither(self):
        cfg = TrainConfig(no_autoencoding=True)
        assert cfg.ae_fraction is None and cfg.ae_count is None


class TestTrainLoop:
    def test_loss_trajectory_reproducible(self):
        results = [train(tiny_model_cfg(), tiny_train_cfg(), toy_artifacts())
                   for _ in range(2)]
        a, b = results[0].report, results[1].report
        assert a.dev_losses == b.dev_losses
        assert a.kind_losses == b.kind_losses
        assert a.cadence_steps == b.cadence_steps
        assert a.selected_step == b.selected_step

    def test_seed_changes_trajectory(self):
        a = train(tiny_model_cfg(), tiny_train_cfg(seed=0), toy_artifacts()).report
        b = train(tiny_model_cfg(), tiny_train_cfg(seed=1), toy_artifacts()).report
        assert a.dev_losses != b.dev_losses

    def test_selected_checkpoint_is_min_dev_loss(self):
        report = train(tiny_model_cfg(), tiny_train_cfg(max_epochs=4),
                       toy_artifacts()).report
        assert report.selected_dev_loss == min(report.dev_losses)
        first_min = report.dev_losses.index(min(report.dev_losses))
        assert report.selected_step == report.cadence_steps[first_min]

    def test_training_reduces_dev_loss(self):
        report = train(tiny_model_cfg(), tiny_train_cfg(max_epochs=12, lr=3e-3,
                                                        eval_every=10, patience=8),
                       toy_artifacts()).report
        assert report.selected_dev_loss < report.dev_losses[0]

    def test_early_stopping_with_constant_loss(self):
        # lr=0 freezes the parameters, so the second evaluation cannot improve
        # and patience=1 must stop the run after exactly two cadences.
        report = train(tiny_model_cfg(),
                       tiny_train_cfg(lr=0.0, eval_every=2, patience=1,
                                      max_epochs=50),
                       toy_artifacts()).report
        assert report.total_steps == 4
        assert len(report.dev_losses) == 2
        assert report.dev_losses[0] == report.dev_losses[1]

    def test_max_steps_cap(self):
        report = train(tiny_model_cfg(), tiny_train_cfg(max_steps=3, max_epochs=50),
                       toy_artifacts()).report
        assert report.total_steps == 3

    def test_task_mixing_matches_stream(self):
        # ae_fraction 0.25 of 24 pairs -> 6 AE examples/epoch, 24 each way.
        report = train(tiny_model_cfg(),
                       tiny_train_cfg(max_epochs=2, eval_every=10 ** 6),
                       toy_artifacts()).report
        assert report.examples_by_kind == {KIND_S2T: 48, KIND_T2S: 48, KIND_AE: 12}

    def test_no_autoencoding_removes_ae_examples(self):
        report = train(tiny_model_cfg(),
                       tiny_train_cfg(ae_fraction=None, no_autoencoding=True,
                                      max_epochs=1),
                       toy_artifacts()).report
        assert KIND_AE not in report.examples_by_kind
        assert KIND_AE not in report.kind_losses
        assert KIND_S2T in report.kind_losses

    def test_divergence_keeps_last_good_checkpoint(self):
        # an absurd step size overflows the attention scores on the second
        # step; the run must flag divergence and hand back finite parameters
        with np.errstate(over="ignore", invalid="ignore"):
            result = train(tiny_model_cfg(),
                           tiny_train_cfg(lr=1e154, eval_every=10 ** 6,
                                          max_epochs=2),
                           toy_artifacts())
        assert result.report.diverged
        for name in result.store.names():
            assert np.isfinite(result.store[name].data).all(), name

    def test_empty_dev_set_rejected(self):
        artifacts = toy_artifacts()
        artifacts.dev_sentences = []
        with pytest.raises(CorpusError, match="dev_sentences"):
            train(tiny_model_cfg(), tiny_train_cfg(), artifacts)

    def test_run_dir_artifacts(self, tmp_path):
        model_cfg = tiny_model_cfg()
        result = train(model_cfg, tiny_train_cfg(max_steps=4), toy_artifacts(),
                       run_dir=tmp_path)
        assert result.checkpoint_path == tmp_path / "checkpoint.npz"
        store, config, _ = C.load_checkpoint(result.checkpoint_path)
        assert ModelConfig.from_dict(config) == model_cfg
        for name in result.store.names():
            assert np.array_equal(store[name].data, result.store[name].data)
        lines = (tmp_path / "train_report.tsv").read_text().splitlines()
        assert lines[0].startswith("# head\t")
        header = next(l for l in lines if not l.startswith("#"))
        assert header.split("\t")[:2] == ["step", "dev_ae"]


class TestDevBatches:
    def test_start_token_present_by_default(self):
        artifacts = toy_artifacts()
        cfg = tiny_train_cfg()
        batch = dev_ae_batches(artifacts, cfg)[0]
        assert np.all(batch.src_ids[:, 0] == artifacts.vocab.start_id("src"))

    def test_start_token_ablated(self):
        artifacts = toy_artifacts()
        cfg = tiny_train_cfg(no_encoder_start_token=True)
        batch = dev_ae_batches(artifacts, cfg)[0]
        assert not np.any(batch.src_ids[:, 0] == artifacts.vocab.start_id("src"))
        # the ablation also neutralizes the decoder start: EOS row, no language
        assert np.all(batch.tgt_in_ids[:, 0] == artifacts.vocab.eos_id)

    def test_decoder_start_is_language_token_by_default(self):
        artifacts = toy_artifacts()
        batch = dev_ae_batches(artifacts, tiny_train_cfg())[0]
        assert np.all(batch.tgt_in_ids[:, 0] == artifacts.vocab.start_id("src"))

    def test_dev_side_is_noise_free(self):
        artifacts = toy_artifacts(n_dev=3)
        cfg = tiny_train_cfg(noise=NoiseConfig(p_drop=0.9, k_window=5))
        batches = dev_ae_batches(artifacts, cfg)
        seen = {}
        for batch in batches:
            for i, ex in enumerate(batch.examples):
                ids = [v for v in batch.src_ids[i, 1:] if v != 0]
                seen[ex.target.tokens] = ids
        for sent in artifacts.dev_sentences:
            want = artifacts.vocab.ids_of(list(sent.tokens), sent.lang)
            assert seen[sent.tokens] == want


class TestBenchmark:
    def test_tiny_benchmark_shape(self):
        bench = benchmark_heads(vocab_size=20, embed_dim=8, width=16, steps=2,
                                batch_sentences=2, seq_len=4, num_layers=1)
        assert bench.vocab_size == 19  # 2 * ((20 - 5) // 2) + 5 specials
        assert len(bench.vmf_step_seconds) == 2
        assert len(bench.ce_step_seconds) == 2
        assert bench.vmf_mean > 0 and bench.ce_mean > 0
        assert bench.ratio > 0
        assert all("\t" in line for line in bench.lines())


class TestConfigIO:
    def test_round_trip(self, tmp_path):
        values = {"head": "vmf", "ae_fraction": "0.1", "seed": "3",
                  "noise.p_drop": "0.2"}
        path = tmp_path / "train.cfg"
        write_config(path, values)
        assert read_config(path) == values

    def test_comments_and_blank_lines_ignored(self, tmp_path):
        path = tmp_path / "c.cfg"
        path.write_text("# a comment\n\nseed = 4\n")
        assert read_config(path) == {"seed": "4"}

    def test_missing_equals_rejected(self, tmp_path):
        path = tmp_path / "c.cfg"
        path.write_text("seed 4\n")
        with pytest.raises(CorpusError, match="key = value"):
            read_config(path)

    def test_values_to_train_config(self):
        profile, cfg = train_config_from_values({
            "profile": "paper", "head": "ce", "ae_fraction": "0.1",
            "noise.p_drop": "0.2", "noise.k_window": "4", "seed": "7",
            "patience": "2", "no_autoencoding": "false",
            "no_encoder_start_token": "true", "lr": "0.0002",
        })
        assert profile == "paper"
        assert cfg.head == HEAD_CE
        assert cfg.ae_fraction == 0.1 and cfg.ae_count is None
        assert cfg.noise == NoiseConfig(p_drop=0.2, k_window=4)
        assert cfg.seed == 7 and cfg.patience == 2 and cfg.lr == 2e-4
        assert cfg.no_encoder_start_token and not cfg.no_autoencoding

    def test_noise_defaults_fill_in(self):
        _, cfg = train_config_from_values({"ae_count": "5", "noise.p_drop": "0.3"})
        assert cfg.noise == NoiseConfig(p_drop=0.3, k_window=3)

    def test_unknown_key_rejected(self):
        with pytest.raises(CorpusError, match="ae_fractoin"):
            train_config_from_values({"ae_fractoin": "0.1"})

    def test_bad_types_rejected(self):
        with pytest.raises(CorpusError, match="seed"):
            train_config_from_values({"ae_fraction": "0.1", "seed": "many"})
        with pytest.raises(CorpusError, match="boolean"):
            train_config_from_values({"ae_fraction": "0.1",
                                      "no_autoencoding": "maybe"})

    def test_empty_config_lacks_ae_choice(self):
        with pytest.raises(CorpusError, match="exactly one"):
            train_config_from_values({})


class TestReportTsv:
    def test_tsv_layout(self, tmp_path):
        report = TrainReport(head=HEAD_VMF, cadence_steps=[5, 10],
                             dev_losses=[2.5, 2.0],
                             kind_losses={"s2t": [3.0, 2.5], "ae": [1.5, 1.25]},
                             selected_step=10, selected_dev_loss=2.0,
                             mean_step_seconds=0.01, total_steps=10)
        path = tmp_path / "r.tsv"
        report.to_tsv(path)
        lines = path.read_text().splitlines()
        meta = [l for l in lines if l.startswith("#")]
        assert "# selected_step\t10" in meta
        body = [l for l in lines if not l.startswith("#")]
        assert body[0] == "step\tdev_ae\tae\ts2t"
        assert body[1] == "5\t2.500000\t1.500000\t3.000000"
        assert body[2] == "10\t2.000000\t1.250000\t2.500000"
