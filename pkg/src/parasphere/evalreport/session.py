"""A/B evaluation sessions: subsampling, blinded presentation, judgment store.

Judgments are stored in presented-space ("first"/"second"/"neither") and only
resolved to systems through the per-item shuffle recorded in the session, so
the on-disk trail never names a system.
"""

from __future__ import annotations

import json
import threading
import time
from dataclasses import asdict, dataclass, field
from pathlib import Path

from ..compute import derive_rng

CHOICES = ("first", "second", "neither")


class SessionError(ValueError):
    pass


class DuplicateJudgment(SessionError):
    pass


@dataclass
class AbItem:
    item_id: int
    source_index: int        # line in the original corpus
    input_text: str
    cand_a: str
    cand_b: str
    flipped: bool            # True: candidate B is presented first
    shuffle_seed: int

    def presented(self) -> tuple[str, str]:
        return (self.cand_b, self.cand_a) if self.flipped else (self.cand_a, self.cand_b)

    def resolve(self, choice: str) -> str:
        """Presented-space choice -> system vote in {A, B, neither}."""
        if choice == "neither":
            return "neither"
        if choice == "first":
            return "B" if self.flipped else "A"
        if choice == "second":
            return "A" if self.flipped else "B"
        raise SessionError(f"unknown choice {choice!r}")


@dataclass
class AbSession:
    session_id: str
    seed: int
    items: list[AbItem] = field(default_factory=list)
    annotators: list[str] = field(default_factory=list)

    def item(self, item_id: int) -> AbItem:
        if not 0 <= item_id < len(self.items):
            raise SessionError(f"unknown item {item_id}")
        return self.items[item_id]

    def status(self, store: "JudgmentStore") -> str:
        judged = {(r.item_id, r.annotator) for r in store.judgments(self.session_id)}
        want = {(i.item_id, a) for i in self.items for a in self.annotators}
        return "complete" if want <= judged else "open"

    def save(self, path) -> None:
        payload = {"session_id": self.session_id, "seed": self.seed,
                   "annotators": self.annotators,
                   "items": [asdict(i) for i in self.items]}
        Path(path).write_text(json.dumps(payload, indent=1, ensure_ascii=False),
                              encoding="utf-8")

    @classmethod
    def load(cls, path) -> "AbSession":
        payload = json.loads(Path(path).read_text(encoding="utf-8"))
        return cls(session_id=payload["session_id"], seed=payload["seed"],
                   annotators=list(payload["annotators"]),
                   items=[AbItem(**i) for i in payload["items"]])


def create_session(session_id: str, inputs: list[str], outputs_a: list[str],
                   outputs_b: list[str], annotators: list[str],
                   n_items: int = 200, seed: int = 0,
                   root: Path | None = None) -> AbSession:
    """Uniform subsample without replacement, with per-item recorded shuffles."""
    n = len(inputs)
    if len(outputs_a) != n or len(outputs_b) != n:
        raise SessionError(f"line mismatch: {n} inputs, {len(outputs_a)}/"
                           f"{len(outputs_b)} candidates")
    if not 1 <= n_items <= n:
        raise SessionError(f"n_items must be in [1, {n}], got {n_items}")
    if not annotators:
        raise SessionError("need at least one annotator")
    if len(set(annotators)) != len(annotators):
        raise SessionError("duplicate annotator names")

    rng = derive_rng(seed, "absession", session_id)
    chosen = sorted(rng.choice(n, size=n_items, replace=False).tolist())
    items = []
    for item_id, src in enumerate(chosen):
        shuffle_seed = int(rng.integers(0, 2 ** 31 - 1))
        flipped = bool(derive_rng(shuffle_seed, "present").integers(0, 2))
        items.append(AbItem(item_id=item_id, source_index=src,
                            input_text=inputs[src], cand_a=outputs_a[src],
                            cand_b=outputs_b[src], flipped=flipped,
                            shuffle_seed=shuffle_seed))
    session = AbSession(session_id=session_id, seed=seed, items=items,
                        annotators=list(annotators))
    if root is not None:
        root = Path(root) / session_id
        root.mkdir(parents=True, exist_ok=True)
        path = root / "session.json"
        if path.exists():
            raise SessionError(f"session {session_id!r} already exists at {path}")
        session.save(path)
    return session


@dataclass(frozen=True)
class JudgmentRecord:
    session_id: str
    item_id: int
    annotator: str
    choice: str              # presented-space: first / second / neither
    timestamp: float

    def line(self) -> str:
        return (f"{self.session_id}\t{self.item_id}\t{self.annotator}\t"
                f"{self.choice}\t{self.timestamp:.3f}\n")


class JudgmentStore:
    """Append-only TSV `session<TAB>item<TAB>annotator<TAB>choice<TAB>timestamp`.

    Uniqueness of (session, item, annotator) is enforced under a lock so
    concurrent submissions cannot both be accepted.
    """

    def __init__(self, path):
        self.path = Path(path)
        self._lock = threading.Lock()
        self._records: list[JudgmentRecord] = []
        self._seen: set[tuple[str, int, str]] = set()
        if self.path.exists():
            for lineno, line in enumerate(
                    self.path.read_text(encoding="utf-8").splitlines(), 1):
                if not line.strip():
                    continue
                parts = line.split("\t")
                if len(parts) != 5:
                    raise SessionError(f"{path}:{lineno}: malformed judgment line")
                record = JudgmentRecord(parts[0], int(parts[1]), parts[2],
                                        parts[3], float(parts[4]))
                self._records.append(record)
                self._seen.add((record.session_id, record.item_id, record.annotator))

    def judgments(self, session_id: str) -> list[JudgmentRecord]:
        with self._lock:
            return [r for r in self._records if r.session_id == session_id]

    def has(self, session_id: str, item_id: int, annotator: str) -> bool:
        with self._lock:
            return (session_id, item_id, annotator) in self._seen

    def append(self, record: JudgmentRecord) -> None:
        key = (record.session_id, record.item_id, record.annotator)
        with self._lock:
            if key in self._seen:
                raise DuplicateJudgment(
                    f"annotator {record.annotator!r} already judged item "
                    f"{record.item_id} in session {record.session_id!r}")
            with open(self.path, "a", encoding="utf-8") as fh:
                fh.write(record.line())
            self._records.append(record)
            self._seen.add(key)


def record_judgment(session: AbSession, store: JudgmentStore, item_id: int,
                    annotator: str, choice: str,
                    timestamp: float | None = None) -> JudgmentRecord:
    """Validate and durably append one judgment."""
    session.item(item_id)  # raises on unknown id
    if annotator not in session.annotators:
        raise SessionError(f"unknown annotator {annotator!r}")
    if choice not in CHOICES:
        raise SessionError(f"choice must be one of {CHOICES}, got {choice!r}")
    record = JudgmentRecord(session.session_id, item_id, annotator, choice,
                            time.time() if timestamp is None else timestamp)
    store.append(record)
    return record


def next_unjudged(session: AbSession, store: JudgmentStore,
                  annotator: str) -> AbItem | None:
    if annotator not in session.annotators:
        raise SessionError(f"unknown annotator {annotator!r}")
    for item in session.items:
        if not store.has(session.session_id, item.item_id, annotator):
            return item
    return None
