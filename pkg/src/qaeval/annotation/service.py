"""HTTP service exposing the judgment store to the annotation client.

Blind by design: task payloads carry only the question, reference, and
candidate text. No machine scores and no other annotators' verdicts ever
leave the store through this API.
"""

from __future__ import annotations

import time
from typing import Optional

from fastapi import Body, FastAPI, HTTPException, Query, Response
from fastapi.staticfiles import StaticFiles

from qaeval.annotation.agreement import iaa_report
from qaeval.annotation.store import (
    AssignmentViolationError,
    Judgment,
    JudgmentStore,
    UnknownEvaluatorError,
    UnknownPairError,
)


def create_app(store: JudgmentStore, static_dir: Optional[str] = None) -> FastAPI:
    """Build the annotation API, optionally serving the UI's static build."""
    app = FastAPI(title="qaeval annotation service")

    @app.get("/api/tasks/next")
    def next_task(evaluator: str = Query(...)):
        try:
            pair = store.next_task(evaluator)
            done, total = store.evaluator_progress(evaluator)
        except UnknownEvaluatorError as exc:
            raise HTTPException(status_code=404, detail=str(exc))
        if pair is None:
            return Response(status_code=204)
        return {
            "pair_id": pair.pair_id,
            "question": pair.question,
            "reference_answer": pair.reference_answer,
            "candidate_answer": pair.candidate_answer,
            "progress": {"done": done, "total": total},
        }

    @app.post("/api/judgments")
    def post_judgment(payload: dict = Body(...)):
        evaluator_id = payload.get("evaluator_id")
        pair_id = payload.get("pair_id")
        verdict = payload.get("verdict")
        if not isinstance(evaluator_id, str) or not evaluator_id:
            raise HTTPException(status_code=400, detail="evaluator_id must be a nonempty string")
        if not isinstance(pair_id, str) or not pair_id:
            raise HTTPException(status_code=400, detail="pair_id must be a nonempty string")
        if isinstance(verdict, bool) or verdict not in (0, 1):
            raise HTTPException(status_code=400, detail="verdict must be 0 or 1")
        judgment = Judgment(
            evaluator_id=evaluator_id,
            pair_id=pair_id,
            verdict=verdict,
            submitted_at=time.time(),
        )
        try:
            store.record(judgment)
        except UnknownPairError as exc:
            raise HTTPException(status_code=404, detail=str(exc))
        except AssignmentViolationError as exc:
            raise HTTPException(status_code=409, detail=str(exc))
        return {"accepted": True}

    @app.get("/api/progress")
    def progress():
        return store.progress()

    @app.get("/api/agreement")
    def agreement():
        return iaa_report(store)

    @app.get("/api/gold")
    def gold():
        return {
            pair_id: label.verdict for pair_id, label in sorted(store.gold_labels().items())
        }

    if static_dir is not None:
        app.mount("/", StaticFiles(directory=static_dir, html=True), name="ui")
    return app
