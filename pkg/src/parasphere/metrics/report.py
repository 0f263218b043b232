"""Semantic-score ingestion, threshold bucketing, and diversity/meaning tables.

Scores are per-line similarities in [0, 1], normally ingested from an
external scorer's TSV.  The built-in fallback (mean static word vector
cosine) exists so the pipeline runs self-contained; it is labeled as such
and is not a contextual-encoder score.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from .lexical import iou, wer
from .trees import MetricsError, ParseTree, prune_for_pted, tree_edit_distance

THRESHOLDS = (0.85, 0.90, 0.95)
FALLBACK_SOURCE = "static-embedding fallback (not BERTScore)"


@dataclass
class ScoreTable:
    scores: list[float]
    source: str = "ingested"

    def __post_init__(self):
        for i, s in enumerate(self.scores):
            if not (math.isfinite(s) and 0.0 <= s <= 1.0):
                raise MetricsError(f"score {i}: {s!r} not a finite value in [0, 1]")

    def __len__(self) -> int:
        return len(self.scores)


def load_scores(path, expected_lines: int | None = None,
                source: str = "ingested") -> ScoreTable:
    """TSV `line_index<TAB>score`; indices must be exactly 0..n-1."""
    entries: dict[int, float] = {}
    for lineno, line in enumerate(Path(path).read_text(encoding="utf-8").splitlines(), 1):
        stripped = line.strip()
        if not stripped or stripped.startswith("#"):
            continue
        parts = stripped.split("\t")
        if len(parts) != 2:
            raise MetricsError(f"{path}:{lineno}: expected index<TAB>score")
        try:
            idx, score = int(parts[0]), float(parts[1])
        except ValueError:
            raise MetricsError(f"{path}:{lineno}: bad index or score") from None
        if idx in entries:
            raise MetricsError(f"{path}:{lineno}: duplicate index {idx}")
        entries[idx] = score
    n = len(entries)
    if sorted(entries) != list(range(n)):
        raise MetricsError(f"{path}: indices must cover 0..{n - 1} exactly")
    if expected_lines is not None and n != expected_lines:
        raise MetricsError(f"{path}: {n} scores for {expected_lines} lines")
    return ScoreTable([entries[i] for i in range(n)], source=source)


def save_scores(path, table: ScoreTable) -> None:
    with open(path, "w", encoding="utf-8") as fh:
        for i, s in enumerate(table.scores):
            fh.write(f"{i}\t{s:.6f}\n")


def fallback_scores(inputs, outputs, word_vectors: dict[str, np.ndarray]) -> ScoreTable:
    """Cosine of mean word vectors, affinely mapped to [0, 1].

    A stand-in for ingested contextual scores; lines where either side has
    no known word score 0.
    """
    if len(inputs) != len(outputs):
        raise MetricsError(f"line mismatch: {len(inputs)} inputs, {len(outputs)} outputs")

    def mean_vec(tokens):
        rows = [word_vectors[t] for t in tokens if t in word_vectors]
        if not rows:
            return None
        v = np.mean(rows, axis=0)
        norm = np.linalg.norm(v)
        return v / norm if norm > 0 else None

    scores = []
    for src, hyp in zip(inputs, outputs):
        u, v = mean_vec(src), mean_vec(hyp)
        if u is None or v is None:
            scores.append(0.0)
        else:
            cos = float(np.clip(u @ v, -1.0, 1.0))
            scores.append((cos + 1.0) / 2.0)
    return ScoreTable(scores, source=FALLBACK_SOURCE)


def bucket_subsets(scores_a: ScoreTable, scores_b: ScoreTable,
                   thresholds=THRESHOLDS) -> dict[float, list[int]]:
    """Indices where BOTH systems clear the threshold; nested by construction."""
    if len(scores_a) != len(scores_b):
        raise MetricsError(f"score tables differ in length: "
                           f"{len(scores_a)} vs {len(scores_b)}")
    return {tau: [i for i, (a, b) in enumerate(zip(scores_a.scores, scores_b.scores))
                  if a >= tau and b >= tau]
            for tau in thresholds}


def _fmt(value: float, places: int) -> str:
    return "-" if math.isnan(value) else f"{value:.{places}f}"


@dataclass
class SystemDiversity:
    iou: float
    wer: float
    pted: float
    pted_missing: int = 0


@dataclass
class DiversityReport:
    total: int
    thresholds: tuple[float, ...]
    systems: list[str]
    subset_sizes: dict[float, int]
    cells: dict[tuple[float, str], SystemDiversity]
    score_source: str = "ingested"

    def render(self) -> str:
        lines = [f"diversity of meaning-preserving paraphrases "
                 f"(n = {self.total}; scores: {self.score_source})",
                 f"{'threshold':>9}  {'n':>5}  {'system':<12}  "
                 f"{'IoU':>6}  {'WER':>6}  {'PTED':>6}"]
        excluded = []
        for tau in self.thresholds:
            for system in self.systems:
                cell = self.cells[(tau, system)]
                lines.append(f"{tau:>9.2f}  {self.subset_sizes[tau]:>5}  "
                             f"{system:<12}  {_fmt(cell.iou, 1):>6}  "
                             f"{_fmt(cell.wer, 1):>6}  {_fmt(cell.pted, 2):>6}")
                if cell.pted_missing:
                    excluded.append(f"# pted: {system} at {tau:.2f} excluded "
                                    f"{cell.pted_missing} unparsed line(s)")
        return "\n".join(lines + excluded) + "\n"

    def to_tsv(self, path) -> None:
        with open(path, "w", encoding="utf-8") as fh:
            fh.write(f"# n\t{self.total}\n")
            fh.write(f"# scores\t{self.score_source}\n")
            fh.write("threshold\tn\tsystem\tiou\twer\tpted\tpted_excluded\n")
            for tau in self.thresholds:
                for system in self.systems:
                    cell = self.cells[(tau, system)]
                    fh.write(f"{tau:.2f}\t{self.subset_sizes[tau]}\t{system}\t"
                             f"{_fmt(cell.iou, 4)}\t{_fmt(cell.wer, 4)}\t"
                             f"{_fmt(cell.pted, 4)}\t{cell.pted_missing}\n")


def diversity_report(inputs: list[list[str]],
                     outputs: dict[str, list[list[str]]],
                     scores: dict[str, ScoreTable],
                     bucket_pair: tuple[str, str],
                     input_parses: list[ParseTree | None] | None = None,
                     output_parses: dict[str, list[ParseTree | None]] | None = None,
                     thresholds=THRESHOLDS) -> DiversityReport:
    """Mean IoU/WER/PTED per (threshold, system) over the bucketed subsets."""
    n = len(inputs)
    systems = sorted(outputs)
    for system in systems:
        if len(outputs[system]) != n:
            raise MetricsError(f"{system}: {len(outputs[system])} outputs for {n} inputs")
        if system in scores and len(scores[system]) != n:
            raise MetricsError(f"{system}: {len(scores[system])} scores for {n} inputs")
    for name in bucket_pair:
        if name not in scores:
            raise MetricsError(f"bucket system {name!r} has no score table")
    if input_parses is not None and len(input_parses) != n:
        raise MetricsError(f"{len(input_parses)} input parses for {n} inputs")

    subsets = bucket_subsets(scores[bucket_pair[0]], scores[bucket_pair[1]], thresholds)
    pruned_in = ([prune_for_pted(t) if t is not None else None for t in input_parses]
                 if input_parses is not None else None)
    pruned_out = {}
    for system in systems:
        parses = (output_parses or {}).get(system)
        if parses is not None:
            if len(parses) != n:
                raise MetricsError(f"{system}: {len(parses)} parses for {n} outputs")
            pruned_out[system] = [prune_for_pted(t) if t is not None else None
                                  for t in parses]

    cells = {}
    for tau, subset in subsets.items():
        for system in systems:
            ious = [iou(inputs[i], outputs[system][i]) for i in subset]
            wers = [wer(outputs[system][i], inputs[i]) for i in subset]
            pteds, missing = [], 0
            for i in subset:
                src = pruned_in[i] if pruned_in is not None else None
                hyp = pruned_out.get(system)[i] if system in pruned_out else None
                if src is None or hyp is None:
                    missing += 1
                else:
                    pteds.append(tree_edit_distance(src, hyp))
            cells[(tau, system)] = SystemDiversity(
                iou=float(np.mean(ious)) if ious else float("nan"),
                wer=float(np.mean(wers)) if wers else float("nan"),
                pted=float(np.mean(pteds)) if pteds else float("nan"),
                pted_missing=missing)

    sources = {scores[name].source for name in bucket_pair}
    return DiversityReport(total=n, thresholds=tuple(thresholds), systems=systems,
                           subset_sizes={tau: len(s) for tau, s in subsets.items()},
                           cells=cells,
                           score_source=" / ".join(sorted(sources)))


@dataclass
class MeaningTable:
    n: int
    systems: list[str]
    columns: list[str]
    cells: dict[tuple[str, str], float] = field(default_factory=dict)

    def render(self) -> str:
        widths = [max(len(c), 6) for c in self.columns]
        header = "system        " + "  ".join(
            f"{c:>{w}}" for c, w in zip(self.columns, widths))
        lines = [f"meaning preservation (mean score x 100, n = {self.n})", header]
        for system in self.systems:
            row = [f"{system:<12}"]
            for col, w in zip(self.columns, widths):
                value = self.cells.get((system, col))
                row.append(f"{'-':>{w}}" if value is None else f"{value:>{w}.1f}")
            lines.append("  ".join(row))
        return "\n".join(lines) + "\n"

    def to_tsv(self, path) -> None:
        with open(path, "w", encoding="utf-8") as fh:
            fh.write("system\t" + "\t".join(self.columns) + "\n")
            for system in self.systems:
                cells = [self.cells.get((system, col)) for col in self.columns]
                fh.write(system + "\t" +
                         "\t".join("-" if v is None else f"{v:.4f}" for v in cells)
                         + "\n")


def meaning_table(tables: dict[str, dict[str, ScoreTable]],
                  systems: list[str] | None = None,
                  columns: list[str] | None = None) -> MeaningTable:
    """Mean score x 100 per (system, metric column); all tables line-aligned."""
    if systems is None:
        systems = sorted(tables)
    if columns is None:
        columns = sorted({col for cols in tables.values() for col in cols})
    lengths = {len(t) for cols in tables.values() for t in cols.values()}
    if len(lengths) > 1:
        raise MetricsError(f"score tables differ in length: {sorted(lengths)}")
    n = lengths.pop() if lengths else 0
    out = MeaningTable(n=n, systems=list(systems), columns=list(columns))
    for system in systems:
        for col, table in tables.get(system, {}).items():
            if col in out.columns and len(table):
                out.cells[(system, col)] = 100.0 * float(np.mean(table.scores))
    return out
