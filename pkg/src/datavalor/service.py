"""HTTP service exposing screening, weighting, and valuation.

Error contract: every failure body is {"code", "message", "path"}.
Validation problems map to 400, unknown entities to 404, out-of-order
screening answers to 409, math-domain failures to 422.

Configuration precedence is flag > environment > default, with
DATAVALOR_ADDR, DATAVALOR_STORE_DIR, and DATAVALOR_CATALOG honoured.
"""

from __future__ import annotations

import os
import threading
import uuid
from dataclasses import dataclass, replace

from fastapi import Body, FastAPI, Query, Request
from fastapi.exceptions import RequestValidationError
from fastapi.responses import JSONResponse

from .anp import PairwiseMatrix, consistency_ratio, geometric_mean_priorities, principal_priorities
from .catalog import default_catalog, find_metrics, load_catalog
from .errors import (DataValorError, MathError, NotFoundError, OrderError,
                     ValidationError)
from .scenario import (ScenarioStore, compare, run_valuation,
                       scenario_from_dict, scenario_to_dict, what_if)
from .screening import (DecisionTree, Stage, answer, classify_purpose,
                        default_step1_tree, default_step2_tree,
                        recommendations, start_session, tree_from_dict)

DEFAULT_STORE_DIR = "datavalor_store"

_STATUS = {
    ValidationError: (400, "validation_error"),
    NotFoundError: (404, "not_found"),
    OrderError: (409, "out_of_order"),
    MathError: (422, "math_error"),
}


@dataclass
class _SessionState:
    tree: DecisionTree
    session: object


class _Sessions:
    """In-memory screening sessions, keyed by opaque ids."""

    def __init__(self):
        self._states: dict[str, _SessionState] = {}
        self._lock = threading.Lock()

    def create(self, tree: DecisionTree) -> str:
        session_id = uuid.uuid4().hex
        with self._lock:
            self._states[session_id] = _SessionState(tree=tree,
                                                     session=start_session(tree))
        return session_id

    def get(self, session_id: str) -> _SessionState:
        with self._lock:
            state = self._states.get(session_id)
        if state is None:
            raise NotFoundError(f"unknown session {session_id!r}")
        return state

    def update(self, session_id: str, session) -> None:
        with self._lock:
            self._states[session_id] = replace(self._states[session_id],
                                               session=session)


def _question_doc(tree: DecisionTree, session) -> dict | None:
    if session.complete:
        return None
    question = tree.question(session.current_question_id)
    return {"id": question.id, "text": question.text,
            "answers": [a.label for a in question.answers]}


def _session_doc(session_id: str, state: _SessionState) -> dict:
    doc = state.session.to_dict()
    doc["session_id"] = session_id
    doc["question"] = _question_doc(state.tree, state.session)
    return doc


def _matrix_from_body(payload: dict) -> PairwiseMatrix:
    if not isinstance(payload, dict):
        raise ValidationError("body must be an object")
    if "items" not in payload or "matrix" not in payload:
        raise ValidationError("body needs 'items' and 'matrix'")
    try:
        return PairwiseMatrix.from_rows(tuple(payload["items"]), payload["matrix"])
    except (TypeError, ValueError) as exc:
        raise ValidationError(f"malformed matrix: {exc}", "/matrix")


def create_app(store_dir: str | None = None,
               catalog_path: str | None = None) -> FastAPI:
    store_dir = store_dir or os.environ.get("DATAVALOR_STORE_DIR",
                                            DEFAULT_STORE_DIR)
    catalog_path = catalog_path or os.environ.get("DATAVALOR_CATALOG")

    app = FastAPI(title="datavalor", version="0.1.0")
    store = ScenarioStore(store_dir)
    catalog = load_catalog(catalog_path) if catalog_path else default_catalog()
    sessions = _Sessions()

    @app.exception_handler(DataValorError)
    async def _domain_error(request: Request, exc: DataValorError):
        status, code = 400, "validation_error"
        for cls, (cls_status, cls_code) in _STATUS.items():
            if isinstance(exc, cls):
                status, code = cls_status, cls_code
                break
        message = getattr(exc, "message", str(exc))
        path = getattr(exc, "path", "")
        return JSONResponse(status_code=status,
                            content={"code": code, "message": message,
                                     "path": path})

    @app.exception_handler(RequestValidationError)
    async def _body_error(request: Request, exc: RequestValidationError):
        first = exc.errors()[0] if exc.errors() else {}
        loc = "/".join(str(part) for part in first.get("loc", ()))
        return JSONResponse(status_code=400,
                            content={"code": "validation_error",
                                     "message": first.get("msg", "invalid request"),
                                     "path": f"/{loc}" if loc else ""})

    # ----------------------------------------------------------- screening

    @app.post("/sessions/screening", status_code=201)
    def create_session(payload: dict = Body(default={})):
        tree_ref = payload.get("tree", "step1")
        if tree_ref == "step1":
            tree = default_step1_tree()
        elif tree_ref == "step2":
            tree = default_step2_tree()
        elif isinstance(tree_ref, dict):
            tree = tree_from_dict(tree_ref)
        else:
            raise ValidationError(
                f"tree must be 'step1', 'step2', or an inline document, "
                f"got {tree_ref!r}", "/tree")
        session_id = sessions.create(tree)
        return _session_doc(session_id, sessions.get(session_id))

    @app.get("/sessions/{session_id}")
    def get_session(session_id: str):
        return _session_doc(session_id, sessions.get(session_id))

    @app.get("/sessions/{session_id}/question")
    def get_question(session_id: str):
        state = sessions.get(session_id)
        question = _question_doc(state.tree, state.session)
        return {"session_id": session_id, "status": state.session.status,
                "question": question}

    @app.post("/sessions/{session_id}/answers")
    def post_answer(session_id: str, payload: dict = Body(...)):
        state = sessions.get(session_id)
        if "question_id" not in payload or "answer" not in payload:
            raise ValidationError("body needs 'question_id' and 'answer'")
        updated = answer(state.session, payload["question_id"],
                         payload["answer"], state.tree)
        sessions.update(session_id, updated)
        return _session_doc(session_id, sessions.get(session_id))

    @app.get("/sessions/{session_id}/recommendations")
    def get_recommendations(session_id: str):
        state = sessions.get(session_id)
        if state.tree.stage is Stage.STEP_II:
            doc = classify_purpose(state.session, state.tree).to_dict()
        else:
            doc = recommendations(state.session, state.tree).to_dict()
        doc["session_id"] = session_id
        doc["accumulated_codes"] = sorted(state.session.accumulated_codes)
        return doc

    # ------------------------------------------------------------- catalog

    @app.get("/catalog")
    def get_catalog(perspective: str | None = None,
                    cluster: str | None = None,
                    keyword: str | None = None):
        metrics = find_metrics(catalog, perspective=perspective,
                               cluster=cluster, keyword=keyword)
        return {"version": catalog.version,
                "metrics": [m.to_dict() for m in metrics]}

    # ----------------------------------------------------------------- anp

    @app.post("/anp/priorities")
    def post_priorities(payload: dict = Body(...)):
        matrix = _matrix_from_body(payload)
        method = payload.get("method", "eigenvector")
        if method == "eigenvector":
            vector = principal_priorities(matrix)
        elif method == "geometric_mean":
            vector = geometric_mean_priorities(matrix)
        else:
            raise ValidationError(f"unknown method {method!r}", "/method")
        doc = vector.to_dict()
        doc["consistency"] = consistency_ratio(matrix).to_dict()
        return doc

    @app.post("/anp/consistency")
    def post_consistency(payload: dict = Body(...)):
        matrix = _matrix_from_body(payload)
        threshold = payload.get("cr_threshold", 0.10)
        return consistency_ratio(matrix, threshold=float(threshold)).to_dict()

    # ------------------------------------------------------------ scenarios

    @app.get("/scenarios")
    def list_scenarios():
        return {"scenarios": store.list()}

    @app.post("/scenarios", status_code=201)
    def create_scenario(payload: dict = Body(...)):
        scenario = scenario_from_dict(payload)
        store.save(scenario)
        return {"id": scenario.id}

    @app.get("/scenarios/{scenario_id}")
    def get_scenario(scenario_id: str):
        return scenario_to_dict(store.load(scenario_id))

    @app.put("/scenarios/{scenario_id}")
    def put_scenario(scenario_id: str, payload: dict = Body(...)):
        scenario = scenario_from_dict(payload)
        if scenario.id != scenario_id:
            raise ValidationError(
                f"document id {scenario.id!r} does not match the URL id "
                f"{scenario_id!r}", "/id")
        store.save(scenario)
        return {"id": scenario.id}

    @app.post("/scenarios/{scenario_id}/valuations")
    def post_valuation(scenario_id: str,
                       candidate: str = Query(...),
                       paper_compat: bool | None = Query(default=None)):
        scenario = store.load(scenario_id)
        return run_valuation(scenario, candidate, paper_compat=paper_compat).to_dict()

    @app.post("/scenarios/{scenario_id}/comparison")
    def post_comparison(scenario_id: str,
                        paper_compat: bool | None = Query(default=None)):
        scenario = store.load(scenario_id)
        return compare(scenario, paper_compat=paper_compat).to_dict()

    @app.post("/scenarios/{scenario_id}/what-if")
    def post_what_if(scenario_id: str, payload: dict = Body(...)):
        scenario = store.load(scenario_id)
        if "candidate_id" not in payload or "overrides" not in payload:
            raise ValidationError("body needs 'candidate_id' and 'overrides'")
        report = what_if(scenario, payload["candidate_id"], payload["overrides"],
                         paper_compat=payload.get("paper_compat"))
        return report.to_dict()

    return app
