"""Command-line entry point wiring the toolkit into reproducible runs.

Every artifact-producing subcommand writes into a run directory that holds
the fully resolved configuration (`resolved.cfg`), a deterministic log
(`log.txt`), and the outputs themselves.  Identical resolved config plus
seed reproduces identical artifacts byte for byte.  Run directories are
never clobbered unless `--overwrite` is passed.

Exit codes: 0 on success, 1 on runtime failure, 2 on usage errors (unknown
flags, missing files, config conflicts).  Failures print one machine
parseable line to stderr: `error: ...` or `usage error: ...`.
"""

from __future__ import annotations

import argparse
import dataclasses
import shutil
import sys
from pathlib import Path

import numpy as np

import parasphere.compute as C
import parasphere.decoding as D
import parasphere.embeddings as E
import parasphere.evalreport as R
import parasphere.model as M
import parasphere.training as T
from parasphere.corpus.stream import Sentence, load_parallel, read_sentences
from parasphere.corpus.tokenizer import (CaseModel, apply_truecase, tokenize,
                                         train_truecaser)
from parasphere.corpus.vocab import CorpusError, Vocabulary, count_and_rank
from parasphere.metrics import (MetricsError, diversity_report, iou,
                                load_scores, meaning_table, read_parse_file,
                                tree_edit_distance, prune_for_pted, wer)


class UsageError(ValueError):
    """Bad invocation detected after argparse: missing inputs, conflicts."""


def _help_formatter(prog):
    # fixed width and help column so --help output is golden-file stable
    return argparse.ArgumentDefaultsHelpFormatter(prog, max_help_position=30,
                                                  width=96)


# ---------------------------------------------------------------------------
# run-directory plumbing

def _prepare_run_dir(path, overwrite: bool) -> Path:
    run = Path(path)
    if run.exists() and any(run.iterdir()) and not overwrite:
        raise UsageError(f"run directory {run} is not empty "
                         f"(pass --overwrite to reuse it)")
    run.mkdir(parents=True, exist_ok=True)
    return run


def _finish_run(run: Path, resolved: dict, log_lines: list[str]) -> None:
    """Write the provenance pair every run directory must contain."""
    T.write_config(run / "resolved.cfg", resolved)
    with open(run / "log.txt", "w", encoding="utf-8") as fh:
        for line in log_lines:
            fh.write(line + "\n")


def _resolved(args, keys: list[str]) -> dict:
    out = {"subcommand": args.command}
    for key in keys:
        out[key] = getattr(args, key.replace("-", "_"))
    return out


def _named_paths(pairs: list[str], flag: str) -> dict[str, str]:
    """Parse repeated NAME=PATH flags into an ordered mapping."""
    out: dict[str, str] = {}
    for item in pairs or []:
        name, sep, path = item.partition("=")
        if not sep or not name or not path:
            raise UsageError(f"{flag} expects NAME=PATH, got {item!r}")
        if name in out:
            raise UsageError(f"{flag} given twice for {name!r}")
        out[name] = path
    return out


def _token_lines(path) -> list[list[str]]:
    """Whitespace-tokenized lines of an already tokenized text file."""
    return [line.split() for line in
            Path(path).read_text(encoding="utf-8").splitlines()]


def _unit_rows(matrix: np.ndarray) -> np.ndarray:
    norms = np.linalg.norm(matrix, axis=1, keepdims=True)
    return matrix / np.maximum(norms, 1e-12)


def _fallback_matrix(vocab: Vocabulary, dim: int) -> np.ndarray:
    rows = [E.fallback_vector(tok, dim) for tok in vocab.tokens]
    return _unit_rows(np.stack(rows))


def _load_embed_matrix(path) -> np.ndarray:
    with np.load(path) as blobs:
        if "matrix" not in blobs:
            raise UsageError(f"{path}: expected an npz with a 'matrix' array")
        return blobs["matrix"].astype(np.float64)


def _load_model(checkpoint, vocab_path):
    vocab = Vocabulary.load(vocab_path)
    store, config, _ = C.load_checkpoint(checkpoint)
    cfg = M.ModelConfig.from_dict(config)
    return vocab, cfg, M.Seq2SeqModel(cfg, store, vocab)


# ---------------------------------------------------------------------------
# subcommands

def _cmd_build_vocab(args) -> int:
    log: list[str] = []
    run = _prepare_run_dir(args.run_dir, args.overwrite)
    sides = []
    for path, lang in ((args.l1, args.lang1), (args.l2, args.lang2)):
        corpus = [tokenize(line, lang) for line in
                  Path(path).read_text(encoding="utf-8").splitlines()]
        corpus = [toks for toks in corpus if toks]
        if not corpus:
            raise UsageError(f"{path}: no usable sentences")
        case = None
        if args.truecase:
            case = train_truecaser(corpus)
            corpus = [apply_truecase(toks, case) for toks in corpus]
        sides.append((corpus, case))
        log.append(f"{lang}: {len(corpus)} sentences from {path}")
    l1_entries = count_and_rank(sides[0][0], args.max_size)
    l2_entries = count_and_rank(sides[1][0], args.max_size)
    vocab = Vocabulary.build(l1_entries, l2_entries, args.lang1, args.lang2)
    vocab.save(run / "vocab.tsv")
    log.append(f"vocabulary: {vocab.size} entries "
               f"({len(l1_entries)} {args.lang1}, {len(l2_entries)} {args.lang2})")
    if args.truecase:
        sides[0][1].save(run / f"case_{args.lang1}.tsv")
        sides[1][1].save(run / f"case_{args.lang2}.tsv")
        log.append("truecase models written")
    _finish_run(run, _resolved(args, ["l1", "l2", "lang1", "lang2", "max-size",
                                      "truecase", "run-dir"]), log)
    print(f"vocab.tsv: {vocab.size} entries")
    return 0


def _cmd_align_embeddings(args) -> int:
    log: list[str] = []
    run = _prepare_run_dir(args.run_dir, args.overwrite)
    vocab = Vocabulary.load(args.vocab)
    table_l1 = E.load_embeddings(args.l1_vectors, vocab, vocab.lang1)
    table_l2 = E.load_embeddings(args.l2_vectors, vocab, vocab.lang2)
    log.append(f"{vocab.lang1}: {table_l1.oov_count} fallback rows")
    log.append(f"{vocab.lang2}: {table_l2.oov_count} fallback rows")
    seed_pairs = E.identical_string_seed(vocab)
    if not seed_pairs:
        raise UsageError("no identically spelled seed pairs between languages")
    alignment = E.procrustes_align(table_l2, table_l1, seed_pairs,
                                   self_learn_iters=args.self_learn,
                                   vocab=vocab)
    alignment.save(run / "alignment.txt")
    combined = E.combined_matrix(table_l1, table_l2, vocab, alignment)
    with open(run / "embeddings.npz", "wb") as fh:
        np.savez(fh, matrix=combined)
    log.append(f"seed pairs: {len(seed_pairs)}")
    log.append(f"orthogonality error: {alignment.orthogonality_error():.2e}")
    _finish_run(run, _resolved(args, ["vocab", "l1-vectors", "l2-vectors",
                                      "self-learn", "run-dir"]), log)
    print(f"alignment over {len(seed_pairs)} seed pairs; "
          f"embeddings.npz shape {combined.shape}")
    return 0


def _cmd_induce_lexicon(args) -> int:
    log: list[str] = []
    run = _prepare_run_dir(args.run_dir, args.overwrite)
    vocab = Vocabulary.load(args.vocab)
    table_l1 = E.load_embeddings(args.l1_vectors, vocab, vocab.lang1)
    table_l2 = E.load_embeddings(args.l2_vectors, vocab, vocab.lang2)
    alignment = E.AlignmentMap.load(args.alignment)
    lexicon = E.induce_lexicon(table_l2, table_l1, alignment, vocab)
    lexicon.save(run / "lexicon.tsv")
    log.append(f"lexicon: {len(lexicon.entries)} entries")
    _finish_run(run, _resolved(args, ["vocab", "l1-vectors", "l2-vectors",
                                      "alignment", "run-dir"]), log)
    print(f"lexicon.tsv: {len(lexicon.entries)} entries")
    return 0


def _cmd_train(args) -> int:
    log: list[str] = []
    run = _prepare_run_dir(args.run_dir, args.overwrite)
    try:
        values = T.read_config(args.config)
        profile, tcfg = T.train_config_from_values(values)
    except CorpusError as exc:  # bad keys or conflicting knobs are usage bugs
        raise UsageError(str(exc)) from None
    if args.seed is not None:
        tcfg = dataclasses.replace(tcfg, seed=args.seed)

    vocab = Vocabulary.load(args.vocab)
    case1 = CaseModel.load(args.case_l1) if args.case_l1 else None
    case2 = CaseModel.load(args.case_l2) if args.case_l2 else None
    pairs = load_parallel(args.l1, args.l2, vocab.lang1, vocab.lang2,
                          case1, case2)
    if args.dev_count < 1 or args.dev_count >= len(pairs):
        raise UsageError(f"--dev-count must leave at least one training pair "
                         f"(got {args.dev_count} of {len(pairs)})")
    train_pairs = pairs[:-args.dev_count]
    dev_sentences = [l1 for l1, _ in pairs[-args.dev_count:]]
    log.append(f"pairs: {len(train_pairs)} train, {len(dev_sentences)} dev")

    if args.embeddings:
        matrix = _load_embed_matrix(args.embeddings)
        if matrix.shape[0] != vocab.size:
            raise UsageError(f"embedding rows {matrix.shape[0]} != vocabulary "
                             f"size {vocab.size}")
    else:
        matrix = _fallback_matrix(vocab, args.fallback_dim)
        log.append(f"hashed fallback embeddings, dim {args.fallback_dim}")
    dim = matrix.shape[1]
    if profile == "paper":
        if dim != 300:
            raise UsageError(f"paper profile needs 300-dim embeddings, got {dim}")
        model_cfg = M.ModelConfig.paper(head=tcfg.head)
    else:
        model_cfg = M.ModelConfig.toy(head=tcfg.head, embed_dim=dim)

    artifacts = T.CorpusArtifacts(vocab=vocab, embed_matrix=matrix,
                                  train_pairs=train_pairs,
                                  dev_sentences=dev_sentences)
    result = T.train(model_cfg, tcfg, artifacts, run_dir=run)
    rep = result.report
    log.append(f"steps: {rep.total_steps}, selected {rep.selected_step} "
               f"(dev {rep.selected_dev_loss:.6f})")
    if rep.diverged:
        log.append("training diverged; kept the best evaluated snapshot")
    _finish_run(run, _resolved(args, ["config", "l1", "l2", "vocab",
                                      "embeddings", "case-l1", "case-l2",
                                      "dev-count", "fallback-dim", "seed",
                                      "run-dir"]), log)
    print(f"checkpoint.npz at step {rep.selected_step}, "
          f"dev loss {rep.selected_dev_loss:.6f}"
          + (" (diverged)" if rep.diverged else ""))
    return 0


def _decode_lines(args, pivot: bool) -> int:
    log: list[str] = []
    run = _prepare_run_dir(args.run_dir, args.overwrite)
    vocab, cfg, model = _load_model(args.checkpoint, args.vocab)
    sentences = read_sentences(args.input, args.input_lang)
    target = args.input_lang if pivot else args.target_lang
    dcfg = D.DecodeConfig(target_lang=target, max_len=args.max_len,
                          region=args.region)
    lexicon = None
    if args.lexicon:
        lexicon = E.BilingualLexicon.load(args.lexicon, lang2=vocab.lang2,
                                          lang1=vocab.lang1)
    encoder_start = not args.no_encoder_start
    truncated = 0
    out_lines = []
    for sent in sentences:
        if pivot:
            res = D.pivot_paraphrase(model, model, sent, args.pivot_lang,
                                     dcfg, encoder_start)
        else:
            res = D.greedy_decode(model, sent, dcfg, encoder_start)
        tokens = list(res.sentence.tokens)
        if lexicon is not None:
            tokens = D.postprocess_lexicon(tokens, vocab, lexicon)
        truncated += res.truncated
        out_lines.append(" ".join(tokens))
    (run / "output.txt").write_text("\n".join(out_lines) + "\n",
                                    encoding="utf-8")
    log.append(f"decoded {len(out_lines)} lines ({truncated} truncated)")
    keys = ["checkpoint", "vocab", "input", "input-lang", "max-len", "region",
            "lexicon", "no-encoder-start", "run-dir"]
    keys.insert(4, "pivot-lang" if pivot else "target-lang")
    _finish_run(run, _resolved(args, keys), log)
    print(f"output.txt: {len(out_lines)} lines ({truncated} truncated)")
    return 0


def _cmd_paraphrase(args) -> int:
    return _decode_lines(args, pivot=False)


def _cmd_pivot(args) -> int:
    return _decode_lines(args, pivot=True)


def _parse_metric_list(raw: str) -> list[str]:
    metrics = [m.strip() for m in raw.split(",") if m.strip()]
    unknown = sorted(set(metrics) - {"iou", "wer", "pted"})
    if unknown or not metrics:
        raise UsageError(f"--metrics must pick from iou,wer,pted "
                         f"(got {raw!r})")
    return metrics


def _cmd_score(args) -> int:
    log: list[str] = []
    run = _prepare_run_dir(args.run_dir, args.overwrite)
    inputs = _token_lines(args.inputs)
    outputs = _token_lines(args.outputs)
    if len(inputs) != len(outputs):
        raise UsageError(f"line counts differ: {len(inputs)} inputs vs "
                         f"{len(outputs)} outputs")
    metrics = _parse_metric_list(args.metrics)
    in_parses = out_parses = None
    if "pted" in metrics:
        if not (args.input_parses and args.output_parses):
            raise UsageError("pted needs --input-parses and --output-parses")
        in_parses = read_parse_file(args.input_parses)
        out_parses = read_parse_file(args.output_parses)
        if len(in_parses) != len(inputs) or len(out_parses) != len(inputs):
            raise UsageError("parse files must be line-aligned with --inputs")

    rows = []
    sums = {m: 0.0 for m in metrics}
    counts = {m: 0 for m in metrics}
    for i, (src, hyp) in enumerate(zip(inputs, outputs)):
        cells = []
        for metric in metrics:
            if metric == "iou":
                value = iou(src, hyp)
            elif metric == "wer":
                value = wer(hyp, src)
            else:
                a, b = in_parses[i], out_parses[i]
                if a is None or b is None:
                    cells.append("-")
                    continue
                value = float(tree_edit_distance(prune_for_pted(a),
                                                 prune_for_pted(b)))
            cells.append(f"{value:.4f}")
            sums[metric] += value
            counts[metric] += 1
        rows.append(f"{i}\t" + "\t".join(cells))
    with open(run / "scores.tsv", "w", encoding="utf-8") as fh:
        fh.write("idx\t" + "\t".join(metrics) + "\n")
        for row in rows:
            fh.write(row + "\n")
    summary = "  ".join(
        f"mean {m} " + (f"{sums[m] / counts[m]:.4f}" if counts[m] else "-")
        for m in metrics)
    log.append(f"scored {len(inputs)} lines")
    log.append(summary)
    _finish_run(run, _resolved(args, ["inputs", "outputs", "metrics",
                                      "input-parses", "output-parses",
                                      "run-dir"]), log)
    print(summary)
    return 0


def _parse_thresholds(raw: str) -> tuple[float, ...]:
    try:
        taus = tuple(float(t) for t in raw.split(",") if t.strip())
    except ValueError:
        raise UsageError(f"--thresholds expects comma-separated floats, "
                         f"got {raw!r}") from None
    if not taus:
        raise UsageError("--thresholds is empty")
    return taus


def _cmd_report(args) -> int:
    log: list[str] = []
    run = _prepare_run_dir(args.run_dir, args.overwrite)
    if args.mode == "diversity":
        if not (args.inputs and args.system and args.scores and args.bucket):
            raise UsageError("diversity mode needs --inputs, --system, "
                             "--scores, and --bucket")
        inputs = _token_lines(args.inputs)
        outputs = {name: _token_lines(path) for name, path in
                   _named_paths(args.system, "--system").items()}
        scores = {name: load_scores(path, expected_lines=len(inputs),
                                    source=Path(path).name)
                  for name, path in
                  _named_paths(args.scores, "--scores").items()}
        pair = tuple(p.strip() for p in args.bucket.split(","))
        if len(pair) != 2 or not all(p in scores for p in pair):
            raise UsageError(f"--bucket expects two scored system names, "
                             f"got {args.bucket!r}")
        in_parses = read_parse_file(args.input_parses) \
            if args.input_parses else None
        out_parses = {name: read_parse_file(path) for name, path in
                      _named_paths(args.output_parses,
                                   "--output-parses").items()} or None
        report = diversity_report(inputs, outputs, scores, pair,
                                  input_parses=in_parses,
                                  output_parses=out_parses,
                                  thresholds=_parse_thresholds(args.thresholds))
        report.to_tsv(run / "diversity.tsv")
        rendered = report.render()
        log.append(f"diversity over {report.total} lines, "
                   f"{len(report.systems)} systems")
    else:
        if not args.scores:
            raise UsageError("meaning mode needs --scores NAME:COL=PATH")
        tables: dict[str, dict[str, "object"]] = {}
        for spec, path in _named_paths(args.scores, "--scores").items():
            system, sep, column = spec.partition(":")
            if not sep or not system or not column:
                raise UsageError(f"--scores expects NAME:COL=PATH in meaning "
                                 f"mode, got {spec}={path}")
            tables.setdefault(system, {})[column] = \
                load_scores(path, source=Path(path).name)
        table = meaning_table(tables)
        table.to_tsv(run / "meaning.tsv")
        rendered = table.render()
        log.append(f"meaning table over {table.n} lines, "
                   f"{len(table.systems)} systems")
    _finish_run(run, _resolved(args, ["mode", "inputs", "system", "scores",
                                      "bucket", "thresholds", "input-parses",
                                      "output-parses", "run-dir"]), log)
    print(rendered)
    return 0


def _cmd_abtest(args) -> int:
    root = Path(args.root)
    if args.action == "new":
        if args.overwrite:
            shutil.rmtree(root / args.session_id, ignore_errors=True)
        inputs = Path(args.inputs).read_text(encoding="utf-8").splitlines()
        out_a = Path(args.a).read_text(encoding="utf-8").splitlines()
        out_b = Path(args.b).read_text(encoding="utf-8").splitlines()
        annotators = [a.strip() for a in args.annotators.split(",") if a.strip()]
        session = R.create_session(args.session_id, inputs, out_a, out_b,
                                   annotators, n_items=args.n_items,
                                   seed=args.seed, root=root)
        print(f"session {session.session_id}: {len(session.items)} items, "
              f"{len(session.annotators)} annotators")
        return 0
    if args.action == "serve":
        import uvicorn  # heavy import, only the server path pays for it

        app = R.build_app(root)
        uvicorn.run(app, host=args.host, port=args.port, log_level="warning")
        return 0
    # action == "report"
    session = R.AbSession.load(root / args.session_id / "session.json")
    store = R.JudgmentStore(root / args.session_id / "judgments.tsv")
    names = None
    if args.names:
        parsed = _named_paths(args.names.split(","), "--names")
        if set(parsed) != {"A", "B"}:
            raise UsageError(f"--names expects A=name,B=name, got {args.names!r}")
        names = (parsed["A"], parsed["B"])
    report = R.ab_report(session, store, require_majority=args.majority,
                         force=args.force, names=names)
    print(report.render())
    return 0


def _cmd_gradcheck(args) -> int:
    if args.profile != "toy":
        raise UsageError("gradcheck runs on the toy profile only")
    l1 = [(f"a{i}", 8 - i) for i in range(6)]
    l2 = [(f"b{i}", 8 - i) for i in range(6)]
    vocab = Vocabulary.build(l1, l2, "l1", "l2")
    matrix = _fallback_matrix(vocab, 8)
    cfg = M.ModelConfig.toy(head=args.head, num_layers=1, num_heads=2,
                            width=16, ffn_width=32, embed_dim=8, max_len=16)
    store = M.init_model(cfg, matrix, vocab, seed=args.seed)
    model = M.Seq2SeqModel(cfg, store, vocab)
    pairs = [(Sentence(("a0", "a1", "a2"), "l1"), Sentence(("b0", "b1"), "l2")),
             (Sentence(("a3", "a4"), "l1"), Sentence(("b2", "b3", "b4"), "l2"))]
    stream = T.make_task_stream(pairs, ae_count=0, seed=args.seed)
    batch = T.make_batches(stream, 64, vocab)[0]

    report = C.gradient_check(store, lambda: model.sequence_loss(batch),
                              epsilon=args.epsilon,
                              coords_per_param=args.coords,
                              rng=np.random.default_rng(args.seed))
    for line in report.lines():
        print(line)
    if report.max_rel_error >= args.tol:
        print(f"error: gradient check failed "
              f"(max rel {report.max_rel_error:.2e} >= {args.tol:g})",
              file=sys.stderr)
        return 1
    print(f"ok: max rel {report.max_rel_error:.2e} < {args.tol:g}")
    return 0


def _cmd_bench_heads(args) -> int:
    bench = T.benchmark_heads(args.vocab_size, embed_dim=args.embed_dim,
                              width=args.width, steps=args.steps,
                              batch_sentences=args.batch_sentences,
                              seq_len=args.seq_len, seed=args.seed)
    for line in bench.lines():
        print(line)
    if args.min_ratio is not None and bench.ratio < args.min_ratio:
        print(f"error: ce/vmf step-time ratio {bench.ratio:.2f} below "
              f"{args.min_ratio:g}", file=sys.stderr)
        return 1
    return 0


# ---------------------------------------------------------------------------
# parser assembly

def _add_run_dir(p) -> None:
    p.add_argument("--run-dir", metavar="PATH", required=True,
                   help="directory for this run's artifacts")
    p.add_argument("--overwrite", action="store_true",
                   help="reuse a non-empty run directory")


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="parasphere",
        description="Zero-shot paraphrasing via round-trip translation: "
                    "corpus prep, embedding alignment, training, decoding, "
                    "scoring, and human evaluation.",
        formatter_class=_help_formatter)
    sub = parser.add_subparsers(dest="command", required=True,
                                metavar="SUBCOMMAND")

    p = sub.add_parser("build-vocab", formatter_class=_help_formatter,
                       help="tokenize two corpora and build the joint vocabulary",
                       description="Tokenize both corpora, optionally train "
                                   "truecasers, and write vocab.tsv.")
    p.add_argument("--l1", metavar="PATH", required=True,
                   help="first-language corpus, one sentence per line")
    p.add_argument("--l2", metavar="PATH", required=True,
                   help="second-language corpus, one sentence per line")
    p.add_argument("--lang1", metavar="NAME", required=True,
                   help="first language name")
    p.add_argument("--lang2", metavar="NAME", required=True,
                   help="second language name")
    p.add_argument("--max-size", metavar="INT", type=int, default=50000,
                   help="per-language vocabulary cap")
    p.add_argument("--truecase", action="store_true",
                   help="train and apply frequency truecasers")
    _add_run_dir(p)
    p.set_defaults(func=_cmd_build_vocab)

    p = sub.add_parser("align-embeddings", formatter_class=_help_formatter,
                       help="map L2 vectors into L1 space and build the "
                            "combined embedding matrix",
                       description="Orthogonal alignment on identically "
                                   "spelled seed pairs; writes alignment.txt "
                                   "and embeddings.npz.")
    p.add_argument("--vocab", metavar="PATH", required=True,
                   help="vocab.tsv from build-vocab")
    p.add_argument("--l1-vectors", metavar="PATH", required=True,
                   help="first-language word vectors (text format)")
    p.add_argument("--l2-vectors", metavar="PATH", required=True,
                   help="second-language word vectors (text format)")
    p.add_argument("--self-learn", metavar="INT", type=int, default=0,
                   help="self-learning refinement iterations")
    _add_run_dir(p)
    p.set_defaults(func=_cmd_align_embeddings)

    p = sub.add_parser("induce-lexicon", formatter_class=_help_formatter,
                       help="induce a bilingual lexicon from aligned vectors",
                       description="Nearest aligned L1 word per L2 word; "
                                   "writes lexicon.tsv.")
    p.add_argument("--vocab", metavar="PATH", required=True,
                   help="vocab.tsv from build-vocab")
    p.add_argument("--l1-vectors", metavar="PATH", required=True,
                   help="first-language word vectors (text format)")
    p.add_argument("--l2-vectors", metavar="PATH", required=True,
                   help="second-language word vectors (text format)")
    p.add_argument("--alignment", metavar="PATH", required=True,
                   help="alignment.txt from align-embeddings")
    _add_run_dir(p)
    p.set_defaults(func=_cmd_induce_lexicon)

    p = sub.add_parser("train", formatter_class=_help_formatter,
                       help="train a paraphrasing model from a config file",
                       description="Joint translation plus denoising "
                                   "autoencoding; writes checkpoint.npz and "
                                   "train_report.tsv. Identical config and "
                                   "seed give byte-identical checkpoints. "
                                   "The last --dev-count pairs are held out "
                                   "as the dev set.")
    p.add_argument("--config", metavar="PATH", required=True,
                   help="key = value training config")
    p.add_argument("--l1", metavar="PATH", required=True,
                   help="first-language side of the parallel corpus")
    p.add_argument("--l2", metavar="PATH", required=True,
                   help="second-language side of the parallel corpus")
    p.add_argument("--vocab", metavar="PATH", required=True,
                   help="vocab.tsv from build-vocab")
    p.add_argument("--embeddings", metavar="PATH", default=None,
                   help="embeddings.npz from align-embeddings")
    p.add_argument("--case-l1", metavar="PATH", default=None,
                   help="truecase model for the first language")
    p.add_argument("--case-l2", metavar="PATH", default=None,
                   help="truecase model for the second language")
    p.add_argument("--dev-count", metavar="INT", type=int, default=100,
                   help="pairs held out for early stopping")
    p.add_argument("--fallback-dim", metavar="INT", type=int, default=16,
                   help="hashed-vector dimension when --embeddings is omitted")
    p.add_argument("--seed", metavar="INT", type=int, default=None,
                   help="overrides the seed key in --config")
    _add_run_dir(p)
    p.set_defaults(func=_cmd_train)

    p = sub.add_parser("paraphrase", formatter_class=_help_formatter,
                       help="greedy-decode each input line into the target "
                            "language",
                       description="Writes output.txt with one decoded line "
                                   "per non-empty input line.")
    p.add_argument("--checkpoint", metavar="PATH", required=True,
                   help="checkpoint.npz from train")
    p.add_argument("--vocab", metavar="PATH", required=True,
                   help="vocab.tsv matching the checkpoint")
    p.add_argument("--input", metavar="PATH", required=True,
                   help="sentences to decode, one per line")
    p.add_argument("--input-lang", metavar="NAME", required=True,
                   help="language of the input lines")
    p.add_argument("--target-lang", metavar="NAME", required=True,
                   help="language to decode into")
    p.add_argument("--max-len", metavar="INT", type=int, default=50,
                   help="maximum output words per line")
    p.add_argument("--region", metavar="NAME", default="combined",
                   choices=["combined", "target-only"],
                   help="candidate region for generation")
    p.add_argument("--lexicon", metavar="PATH", default=None,
                   help="lexicon.tsv for output-side word substitution")
    p.add_argument("--no-encoder-start", action="store_true",
                   help="drop the target-language start token on the encoder")
    _add_run_dir(p)
    p.set_defaults(func=_cmd_paraphrase)

    p = sub.add_parser("pivot", formatter_class=_help_formatter,
                       help="paraphrase by translating through a pivot "
                            "language and back",
                       description="Round-trip decode: input language to "
                                   "pivot to input language, discretizing at "
                                   "the pivot. Writes output.txt.")
    p.add_argument("--checkpoint", metavar="PATH", required=True,
                   help="checkpoint.npz from train")
    p.add_argument("--vocab", metavar="PATH", required=True,
                   help="vocab.tsv matching the checkpoint")
    p.add_argument("--input", metavar="PATH", required=True,
                   help="sentences to paraphrase, one per line")
    p.add_argument("--input-lang", metavar="NAME", required=True,
                   help="language of the input lines (also the output language)")
    p.add_argument("--pivot-lang", metavar="NAME", required=True,
                   help="intermediate language for the round trip")
    p.add_argument("--max-len", metavar="INT", type=int, default=50,
                   help="maximum output words per line")
    p.add_argument("--region", metavar="NAME", default="combined",
                   choices=["combined", "target-only"],
                   help="candidate region for generation")
    p.add_argument("--lexicon", metavar="PATH", default=None,
                   help="lexicon.tsv for output-side word substitution")
    p.add_argument("--no-encoder-start", action="store_true",
                   help="drop the target-language start token on the encoder")
    _add_run_dir(p)
    p.set_defaults(func=_cmd_pivot)

    p = sub.add_parser("score", formatter_class=_help_formatter,
                       help="score line-aligned outputs against inputs",
                       description="Per-line diversity metrics over "
                                   "whitespace-tokenized files; writes "
                                   "scores.tsv and prints the means.")
    p.add_argument("--inputs", metavar="PATH", required=True,
                   help="reference side, one tokenized sentence per line")
    p.add_argument("--outputs", metavar="PATH", required=True,
                   help="system side, line-aligned with --inputs")
    p.add_argument("--metrics", metavar="CSV", default="iou,wer",
                   help="comma list from: iou, wer, pted")
    p.add_argument("--input-parses", metavar="PATH", default=None,
                   help="bracketed parses for --inputs ('-' lines skip)")
    p.add_argument("--output-parses", metavar="PATH", default=None,
                   help="bracketed parses for --outputs ('-' lines skip)")
    _add_run_dir(p)
    p.set_defaults(func=_cmd_score)

    p = sub.add_parser("report", formatter_class=_help_formatter,
                       help="render a diversity or meaning-preservation table",
                       description="diversity mode buckets lines where both "
                                   "--bucket systems clear each threshold and "
                                   "prints the per-system table; meaning mode "
                                   "averages score files per system and "
                                   "column.")
    p.add_argument("--mode", metavar="NAME", required=True,
                   choices=["diversity", "meaning"],
                   help="diversity or meaning")
    p.add_argument("--inputs", metavar="PATH", default=None,
                   help="reference side (diversity mode)")
    p.add_argument("--system", metavar="NAME=PATH", action="append",
                   default=None, help="system outputs (repeatable)")
    p.add_argument("--scores", metavar="NAME=PATH", action="append",
                   default=None,
                   help="score tables; NAME:COL=PATH in meaning mode "
                        "(repeatable)")
    p.add_argument("--bucket", metavar="A,B", default=None,
                   help="two scored systems whose agreement defines buckets")
    p.add_argument("--thresholds", metavar="CSV", default="0.85,0.90,0.95",
                   help="bucket thresholds (diversity mode)")
    p.add_argument("--input-parses", metavar="PATH", default=None,
                   help="bracketed parses for --inputs")
    p.add_argument("--output-parses", metavar="NAME=PATH", action="append",
                   default=None,
                   help="bracketed parses per system (repeatable)")
    _add_run_dir(p)
    p.set_defaults(func=_cmd_report)

    p = sub.add_parser("abtest", formatter_class=_help_formatter,
                       help="blind A/B sessions: create, serve, report",
                       description="Manage blind A/B evaluation sessions "
                                   "under a sessions root directory.")
    actions = p.add_subparsers(dest="action", required=True, metavar="ACTION")

    a = actions.add_parser("new", formatter_class=_help_formatter,
                           help="sample items and persist a new session",
                           description="Sample up to --n-items line indices, "
                                       "shuffle presentation per item, and "
                                       "write session.json.")
    a.add_argument("--session-id", metavar="NAME", required=True,
                   help="session identifier")
    a.add_argument("--inputs", metavar="PATH", required=True,
                   help="input sentences, one per line")
    a.add_argument("--a", metavar="PATH", required=True,
                   help="system A outputs, line-aligned with --inputs")
    a.add_argument("--b", metavar="PATH", required=True,
                   help="system B outputs, line-aligned with --inputs")
    a.add_argument("--annotators", metavar="CSV", required=True,
                   help="comma list of annotator names")
    a.add_argument("--n-items", metavar="INT", type=int, default=200,
                   help="items to sample")
    a.add_argument("--seed", metavar="INT", type=int, default=0,
                   help="sampling seed")
    a.add_argument("--root", metavar="PATH", required=True,
                   help="sessions root directory")
    a.add_argument("--overwrite", action="store_true",
                   help="replace an existing session of the same id")
    a.set_defaults(func=_cmd_abtest)

    a = actions.add_parser("serve", formatter_class=_help_formatter,
                           help="serve the annotation HTTP API",
                           description="Blind annotation API over the "
                                       "sessions root; runs until killed.")
    a.add_argument("--root", metavar="PATH", required=True,
                   help="sessions root directory")
    a.add_argument("--host", metavar="ADDR", default="127.0.0.1",
                   help="bind address")
    a.add_argument("--port", metavar="INT", type=int, default=8000,
                   help="bind port")
    a.set_defaults(func=_cmd_abtest)

    a = actions.add_parser("report", formatter_class=_help_formatter,
                           help="print preference counts and agreement",
                           description="Majority-vote preference shares and "
                                       "pairwise agreement for one session.")
    a.add_argument("--session-id", metavar="NAME", required=True,
                   help="session identifier")
    a.add_argument("--root", metavar="PATH", required=True,
                   help="sessions root directory")
    a.add_argument("--names", metavar="A=x,B=y", default=None,
                   help="display names for the two systems")
    a.add_argument("--no-majority", dest="majority", action="store_false",
                   help="report raw ballots instead of majority votes")
    a.add_argument("--force", action="store_true",
                   help="report an incomplete session")
    a.set_defaults(func=_cmd_abtest)

    p = sub.add_parser("gradcheck", formatter_class=_help_formatter,
                       help="verify model gradients against finite differences",
                       description="Builds a tiny synthetic model and checks "
                                   "analytic gradients coordinate-wise; fails "
                                   "when any relative error reaches --tol.")
    p.add_argument("--profile", metavar="NAME", default="toy",
                   help="model size preset (toy only)")
    p.add_argument("--head", metavar="NAME", default="vmf",
                   choices=["vmf", "ce"], help="output head to check")
    p.add_argument("--coords", metavar="INT", type=int, default=8,
                   help="coordinates sampled per parameter")
    p.add_argument("--epsilon", metavar="FLOAT", type=float, default=1e-5,
                   help="finite-difference step")
    p.add_argument("--tol", metavar="FLOAT", type=float, default=1e-3,
                   help="maximum allowed relative error")
    p.add_argument("--seed", metavar="INT", type=int, default=0,
                   help="sampling seed")
    p.set_defaults(func=_cmd_gradcheck)

    p = sub.add_parser("bench-heads", formatter_class=_help_formatter,
                       help="compare training step time of the two output heads",
                       description="Times identical training steps with the "
                                   "continuous and softmax heads and prints "
                                   "the ratio.")
    p.add_argument("--vocab-size", metavar="INT", type=int, default=50000,
                   help="total vocabulary rows")
    p.add_argument("--embed-dim", metavar="INT", type=int, default=300,
                   help="embedding dimension")
    p.add_argument("--width", metavar="INT", type=int, default=512,
                   help="model width")
    p.add_argument("--steps", metavar="INT", type=int, default=4,
                   help="timed steps per head")
    p.add_argument("--batch-sentences", metavar="INT", type=int, default=8,
                   help="sentences per synthetic batch")
    p.add_argument("--seq-len", metavar="INT", type=int, default=12,
                   help="tokens per synthetic sentence")
    p.add_argument("--seed", metavar="INT", type=int, default=0,
                   help="synthetic data seed")
    p.add_argument("--min-ratio", metavar="FLOAT", type=float, default=None,
                   help="fail when ce/vmf ratio falls below this")
    p.set_defaults(func=_cmd_bench_heads)

    return parser


def main(argv=None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:  # argparse already printed usage or help
        return int(exc.code or 0)
    try:
        return args.func(args)
    except UsageError as exc:
        print(f"usage error: {exc}", file=sys.stderr)
        return 2
    except FileNotFoundError as exc:
        print(f"usage error: missing file: {exc.filename or exc}",
              file=sys.stderr)
        return 2
    except (CorpusError, E.EmbeddingError, M.ModelError, C.ComputeError,
            MetricsError, R.SessionError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1


if __name__ == "__main__":
    sys.exit(main())
