"""Vote resolution and the human-evaluation report table."""

from __future__ import annotations

import warnings
from collections import Counter
from dataclasses import dataclass, field

from .agreement import KappaReport, pairwise_kappa
from .session import AbSession, JudgmentStore, SessionError


@dataclass
class AbReport:
    session_id: str
    n_items: int
    status: str
    votes: dict[str, int] = field(default_factory=dict)        # A / B / neither
    percentages: dict[str, float] = field(default_factory=dict)  # over A+B votes
    agreed_items: int = 0
    discarded_no_majority: int = 0
    kappa: KappaReport = field(default_factory=KappaReport)
    names: dict[str, str] = field(default_factory=dict)        # display labels

    def label(self, system: str) -> str:
        return self.names.get(system, system)

    def render(self) -> str:
        lines = [f"human evaluation: session {self.session_id} "
                 f"({self.n_items} items, {self.status})",
                 f"majority votes over {self.agreed_items} agreed items:"]
        for system in ("A", "B"):
            count = self.votes.get(system, 0)
            if system in self.percentages:
                lines.append(f"  {self.label(system):<12} {count:>5} "
                             f"({self.percentages[system]:.1f}%)")
            else:
                lines.append(f"  {self.label(system):<12} {count:>5}")
        lines.append(f"  {'neither':<12} {self.votes.get('neither', 0):>5}")
        lines.extend("  " + line for line in self.kappa.lines())
        return "\n".join(lines) + "\n"


def resolved_votes(session: AbSession,
                   store: JudgmentStore) -> dict[str, dict[int, str]]:
    """Per annotator: item_id -> system vote, via each item's stored shuffle."""
    votes: dict[str, dict[int, str]] = {}
    for record in store.judgments(session.session_id):
        item = session.item(record.item_id)
        votes.setdefault(record.annotator, {})[item.item_id] = \
            item.resolve(record.choice)
    return votes


def ab_report(session: AbSession, store: JudgmentStore,
              require_majority: bool = True, force: bool = False,
              names: dict[str, str] | None = None) -> AbReport:
    """Majority-vote tally with agreement statistics.

    Majority mode keeps items where a strict majority of their judges picked
    one option; ties and splits are discarded and counted.  With
    require_majority=False every individual ballot is tallied instead.
    """
    status = session.status(store)
    if status != "complete" and not force:
        raise SessionError(f"session {session.session_id!r} is not complete; "
                           f"pass force to report anyway")
    by_annotator = resolved_votes(session, store)

    tally: Counter[str] = Counter()
    discarded = 0
    agreed = 0
    if require_majority:
        per_item: dict[int, list[str]] = {}
        for votes in by_annotator.values():
            for item_id, vote in votes.items():
                per_item.setdefault(item_id, []).append(vote)
        for item_id, votes in per_item.items():
            winner, top = Counter(votes).most_common(1)[0]
            if top * 2 > len(votes):
                tally[winner] += 1
                agreed += 1
            else:
                discarded += 1
    else:
        for votes in by_annotator.values():
            tally.update(votes.values())
        agreed = sum(tally.values())

    head_to_head = tally["A"] + tally["B"]
    percentages = {}
    if head_to_head:
        percentages = {s: 100.0 * tally[s] / head_to_head for s in ("A", "B")}
    elif agreed == 0:
        warnings.warn(f"session {session.session_id!r}: no agreed items; "
                      f"percentages are empty")

    return AbReport(session_id=session.session_id, n_items=len(session.items),
                    status=status, votes=dict(tally), percentages=percentages,
                    agreed_items=agreed, discarded_no_majority=discarded,
                    kappa=pairwise_kappa(by_annotator, no_majority=discarded),
                    names=names or {})
