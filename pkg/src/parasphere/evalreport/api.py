"""HTTP surface for annotation sessions (served by the CLI's serve mode).

Annotator-facing payloads are blind: candidates appear only in presentation
order, never with system identifiers; resolution data (shuffle seed, flip
flag) stays server-side.
"""

from __future__ import annotations

import threading
from pathlib import Path
from typing import Literal

from fastapi import FastAPI, HTTPException
from pydantic import BaseModel

from .report import ab_report
from .session import (AbSession, DuplicateJudgment, JudgmentStore, SessionError,
                      next_unjudged, record_judgment)


class JudgmentIn(BaseModel):
    item_id: int
    annotator: str
    choice: Literal["first", "second", "neither"]


def build_app(root) -> FastAPI:
    root = Path(root)
    app = FastAPI(title="paraphrase A/B annotation")
    cache: dict[str, tuple[AbSession, JudgmentStore]] = {}
    lock = threading.Lock()

    def get_session(session_id: str) -> tuple[AbSession, JudgmentStore]:
        with lock:
            if session_id not in cache:
                path = root / session_id / "session.json"
                if not path.exists():
                    raise HTTPException(404, f"unknown session {session_id!r}")
                cache[session_id] = (AbSession.load(path),
                                     JudgmentStore(root / session_id / "judgments.tsv"))
            return cache[session_id]

    @app.get("/api/session/{session_id}/next")
    def next_item(session_id: str, annotator: str):
        session, store = get_session(session_id)
        try:
            item = next_unjudged(session, store, annotator)
        except SessionError as exc:
            raise HTTPException(400, str(exc)) from None
        judged = sum(store.has(session_id, i.item_id, annotator)
                     for i in session.items)
        if item is None:
            return {"session": session_id, "done": True,
                    "judged": judged, "total": len(session.items)}
        first, second = item.presented()
        return {"session": session_id, "done": False, "item_id": item.item_id,
                "input": item.input_text, "first": first, "second": second,
                "judged": judged, "total": len(session.items)}

    @app.post("/api/session/{session_id}/judgment")
    def submit_judgment(session_id: str, body: JudgmentIn):
        session, store = get_session(session_id)
        try:
            record_judgment(session, store, body.item_id, body.annotator,
                            body.choice)
        except DuplicateJudgment as exc:
            raise HTTPException(409, str(exc)) from None
        except SessionError as exc:
            raise HTTPException(404, str(exc)) from None
        judged = len({(r.item_id, r.annotator)
                      for r in store.judgments(session_id)})
        return {"accepted": True, "session": session_id,
                "item_id": body.item_id, "judged": judged}

    @app.get("/api/session/{session_id}/report")
    def session_report(session_id: str, majority: bool = True):
        session, store = get_session(session_id)
        report = ab_report(session, store, require_majority=majority, force=True)
        return {
            "session": session_id,
            "status": report.status,
            "n_items": report.n_items,
            "votes": report.votes,
            "percentages": report.percentages,
            "agreed_items": report.agreed_items,
            "discarded_no_majority": report.discarded_no_majority,
            "kappa": {
                "pairs": [{"annotators": list(pair_key), "kappa": pair.kappa,
                           "p_o": pair.p_o, "p_e": pair.p_e, "n": pair.n_items}
                          for pair_key, pair in sorted(report.kappa.pairs.items())],
                "average": report.kappa.average,
                "no_majority": report.kappa.no_majority,
            },
        }

    return app
