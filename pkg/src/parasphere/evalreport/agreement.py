"""Cohen's kappa and pairwise-average agreement over resolved votes."""

from __future__ import annotations

from collections import Counter
from dataclasses import dataclass, field


@dataclass
class PairKappa:
    p_o: float
    p_e: float
    kappa: float | None      # None when marginals are degenerate (p_e = 1)
    n_items: int


def cohen_kappa(ratings_1, ratings_2) -> PairKappa:
    """Chance-corrected agreement; p_e from each rater's own marginals.

    Computed in integer counts, kappa = (n*a - s) / (n*n - s) with a the
    agreement count and s the dot product of the marginal count vectors, so
    the worked rational cases come out exact.
    """
    if len(ratings_1) != len(ratings_2):
        raise ValueError(f"raters judged different item counts: "
                         f"{len(ratings_1)} vs {len(ratings_2)}")
    n = len(ratings_1)
    if n == 0:
        return PairKappa(p_o=0.0, p_e=1.0, kappa=None, n_items=0)
    agree = sum(a == b for a, b in zip(ratings_1, ratings_2))
    m1, m2 = Counter(ratings_1), Counter(ratings_2)
    s = sum(m1[c] * m2[c] for c in set(m1) | set(m2))
    p_o, p_e = agree / n, s / (n * n)
    if s == n * n:
        # both raters sat on one identical category: chance explains all
        return PairKappa(p_o=p_o, p_e=p_e, kappa=None, n_items=n)
    return PairKappa(p_o=p_o, p_e=p_e, kappa=(n * agree - s) / (n * n - s),
                     n_items=n)


@dataclass
class KappaReport:
    pairs: dict[tuple[str, str], PairKappa] = field(default_factory=dict)
    average: float | None = None
    no_majority: int = 0

    def lines(self) -> list[str]:
        out = []
        for (a, b), pair in sorted(self.pairs.items()):
            shown = "undefined" if pair.kappa is None else f"{pair.kappa:.4f}"
            out.append(f"kappa({a}, {b}) = {shown}  "
                       f"[p_o {pair.p_o:.4f}, p_e {pair.p_e:.4f}, n {pair.n_items}]")
        shown = "undefined" if self.average is None else f"{self.average:.4f}"
        out.append(f"pairwise-average kappa = {shown}")
        out.append(f"no-majority items discarded = {self.no_majority}")
        return out


def pairwise_kappa(votes_by_annotator: dict[str, dict[int, str]],
                   no_majority: int = 0) -> KappaReport:
    """All annotator pairs, each restricted to the items both actually rated."""
    report = KappaReport(no_majority=no_majority)
    names = sorted(votes_by_annotator)
    defined = []
    for i, a in enumerate(names):
        for b in names[i + 1:]:
            shared = sorted(set(votes_by_annotator[a]) & set(votes_by_annotator[b]))
            pair = cohen_kappa([votes_by_annotator[a][k] for k in shared],
                               [votes_by_annotator[b][k] for k in shared])
            report.pairs[(a, b)] = pair
            if pair.kappa is not None:
                defined.append(pair.kappa)
    if defined:
        report.average = sum(defined) / len(defined)
    return report
