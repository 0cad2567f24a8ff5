"""Diagnostic screening: data-driven decision trees for Steps I and II.

Trees are pure data loaded from JSON. Walking a tree accumulates integer
connector codes; each code maps to a recommendation whose machine-readable
effects (driver choice, cost inclusion flags, ICF rule, strategy, metric
suggestions) are merged with a fixed precedence when codes conflict.
"""

from __future__ import annotations

import enum
import json
from dataclasses import dataclass, field, replace
from importlib import resources

from .errors import NotFoundError, OrderError, ValidationError

DRIVERS = ("quality", "relevance", "utility")
# Merge precedence: a broader driver supersedes a narrower one.
DRIVER_RANK = {"quality": 1, "relevance": 2, "utility": 3}
ICF_RULES = ("one_time", "per_application", "fractional")
ICF_RANK = {"one_time": 3, "per_application": 2, "fractional": 1}
STRATEGIES = ("daas", "iaas_aaas")


class Stage(enum.Enum):
    STEP_I = "step_i"
    STEP_II = "step_ii"


class DataPurpose(enum.Enum):
    OPERATIONAL = "operational"
    ONE_TIME_DECISION = "one_time_decision"
    LEGAL_AND_SAFETY = "legal_and_safety"
    RESEARCH_AND_INNOVATION = "research_and_innovation"


# Purpose priority when several purpose answers were affirmed.
PURPOSE_ORDER = (DataPurpose.OPERATIONAL, DataPurpose.ONE_TIME_DECISION,
                 DataPurpose.LEGAL_AND_SAFETY, DataPurpose.RESEARCH_AND_INNOVATION)


@dataclass(frozen=True)
class RecommendationEffects:
    main_driver: str | None = None
    cost_only: bool = False
    include_capex: bool = False
    include_opex: bool = False
    include_governance_costs: bool = False
    icf_rule: str | None = None
    icf_value: float | None = None
    demand_required: bool = False
    demand_zero: bool = False
    distributed: bool = False
    strategy: str | None = None
    recommended_metric_ids: tuple[str, ...] = ()

    def __post_init__(self):
        if self.main_driver is not None and self.main_driver not in DRIVERS:
            raise ValidationError(f"unknown driver {self.main_driver!r}")
        if self.icf_rule is not None and self.icf_rule not in ICF_RULES:
            raise ValidationError(f"unknown icf rule {self.icf_rule!r}")
        if self.strategy is not None and self.strategy not in STRATEGIES:
            raise ValidationError(f"unknown strategy {self.strategy!r}")

    def to_dict(self) -> dict:
        return {
            "main_driver": self.main_driver,
            "cost_only": self.cost_only,
            "include_capex": self.include_capex,
            "include_opex": self.include_opex,
            "include_governance_costs": self.include_governance_costs,
            "icf_rule": self.icf_rule,
            "icf_value": self.icf_value,
            "demand_required": self.demand_required,
            "demand_zero": self.demand_zero,
            "distributed": self.distributed,
            "strategy": self.strategy,
            "recommended_metric_ids": list(self.recommended_metric_ids),
        }


_EFFECT_FIELDS = {"main_driver", "cost_only", "include_capex", "include_opex",
                  "include_governance_costs", "icf_rule", "icf_value",
                  "demand_required", "demand_zero", "distributed", "strategy",
                  "recommended_metric_ids"}


def effects_from_dict(doc: dict, path: str = "") -> RecommendationEffects:
    unknown = doc.keys() - _EFFECT_FIELDS
    if unknown:
        raise ValidationError(f"unknown effect fields: {sorted(unknown)}", path)
    kwargs = dict(doc)
    if "recommended_metric_ids" in kwargs:
        kwargs["recommended_metric_ids"] = tuple(kwargs["recommended_metric_ids"])
    return RecommendationEffects(**kwargs)


@dataclass(frozen=True)
class Recommendation:
    code: int
    text: str
    effects: RecommendationEffects

    def to_dict(self) -> dict:
        return {"code": self.code, "text": self.text, "effects": self.effects.to_dict()}


@dataclass(frozen=True)
class Answer:
    label: str
    codes: tuple[int, ...] = ()
    next: str | None = None
    icf_count: int | None = None
    purpose: DataPurpose | None = None


@dataclass(frozen=True)
class Question:
    id: str
    text: str
    answers: tuple[Answer, ...]

    def answer(self, label: str) -> Answer:
        for a in self.answers:
            if a.label == label:
                return a
        raise ValidationError(
            f"question {self.id!r} has no answer {label!r}; "
            f"declared: {[a.label for a in self.answers]}")


@dataclass(frozen=True)
class DiscrepancyNote:
    note: str
    when_codes_include: tuple[int, ...] = ()
    when_answered: tuple[str, str] | None = None  # (question_id, label)

    def applies(self, codes: frozenset[int], answered) -> bool:
        if self.when_codes_include and not set(self.when_codes_include) <= codes:
            return False
        if self.when_answered is not None and tuple(self.when_answered) not in set(answered):
            return False
        return True


@dataclass(frozen=True)
class DecisionTree:
    id: str
    stage: Stage
    entry_question_id: str
    questions: tuple[Question, ...]
    code_recommendations: dict = field(default_factory=dict)
    notes: tuple[DiscrepancyNote, ...] = ()

    def __post_init__(self):
        by_id = {}
        for q in self.questions:
            if q.id in by_id:
                raise ValidationError(f"duplicate question id {q.id!r}")
            by_id[q.id] = q
        object.__setattr__(self, "_by_id", by_id)
        if self.entry_question_id not in by_id:
            raise ValidationError(
                f"entry question {self.entry_question_id!r} not in tree")
        for q in self.questions:
            for a in q.answers:
                if a.next is not None and a.next not in by_id:
                    raise ValidationError(
                        f"question {q.id!r} answer {a.label!r} routes to "
                        f"unknown question {a.next!r}")
        self._check_acyclic()
        missing = sorted(self.reachable_codes() - set(self.code_recommendations))
        if missing:
            raise ValidationError(f"codes {missing} have no recommendation")

    def _check_acyclic(self):
        # Routing must not loop; DFS with a path stack.
        WHITE, GREY, BLACK = 0, 1, 2
        color = {q.id: WHITE for q in self.questions}

        def visit(qid: str):
            color[qid] = GREY
            for a in self.question(qid).answers:
                if a.next is None:
                    continue
                if color[a.next] == GREY:
                    raise ValidationError(f"routing cycle through question {a.next!r}")
                if color[a.next] == WHITE:
                    visit(a.next)
            color[qid] = BLACK

        for q in self.questions:
            if color[q.id] == WHITE:
                visit(q.id)

    def question(self, qid: str) -> Question:
        try:
            return self._by_id[qid]
        except KeyError:
            raise NotFoundError(f"unknown question {qid!r}")

    def reachable_codes(self) -> set[int]:
        codes: set[int] = set()
        seen: set[str] = set()
        stack = [self.entry_question_id]
        while stack:
            qid = stack.pop()
            if qid in seen:
                continue
            seen.add(qid)
            for a in self.question(qid).answers:
                codes.update(a.codes)
                if a.next is not None:
                    stack.append(a.next)
        return codes

    def recommendation(self, code: int) -> Recommendation:
        try:
            return self.code_recommendations[code]
        except KeyError:
            raise NotFoundError(f"no recommendation for code {code}")


@dataclass(frozen=True)
class ScreeningSession:
    tree_id: str
    answered: tuple[tuple[str, str], ...] = ()
    accumulated_codes: frozenset = frozenset()
    current_question_id: str | None = None
    icf_counts: tuple[int, ...] = ()
    purposes: tuple[DataPurpose, ...] = ()

    @property
    def complete(self) -> bool:
        return self.current_question_id is None

    @property
    def status(self) -> str:
        return "complete" if self.complete else "in_progress"

    def to_dict(self) -> dict:
        return {
            "tree_id": self.tree_id,
            "answered": [list(pair) for pair in self.answered],
            "accumulated_codes": sorted(self.accumulated_codes),
            "current_question_id": self.current_question_id,
            "status": self.status,
        }


def start_session(tree: DecisionTree) -> ScreeningSession:
    return ScreeningSession(tree_id=tree.id,
                            current_question_id=tree.entry_question_id)


def answer(session: ScreeningSession, question_id: str, answer_label: str,
           tree: DecisionTree) -> ScreeningSession:
    """Apply one answer; sessions are immutable, a new state is returned."""
    if session.tree_id != tree.id:
        raise ValidationError(
            f"session belongs to tree {session.tree_id!r}, not {tree.id!r}")
    if session.complete:
        raise OrderError("session is already complete")
    if question_id != session.current_question_id:
        raise OrderError(
            f"expected an answer to {session.current_question_id!r}, "
            f"got {question_id!r}")
    q = tree.question(question_id)
    a = q.answer(answer_label)
    icf_counts = session.icf_counts + ((a.icf_count,) if a.icf_count else ())
    purposes = session.purposes + ((a.purpose,) if a.purpose else ())
    return replace(
        session,
        answered=session.answered + ((question_id, answer_label),),
        accumulated_codes=session.accumulated_codes | set(a.codes),
        current_question_id=a.next,
        icf_counts=icf_counts,
        purposes=purposes,
    )


def replay(tree: DecisionTree, labels: list[str]) -> ScreeningSession:
    """Answer the current question with each label in turn."""
    session = start_session(tree)
    for label in labels:
        if session.complete:
            raise OrderError(f"tree completed before label {label!r} was consumed")
        session = answer(session, session.current_question_id, label, tree)
    return session


def merge_effects(recommendations: list[Recommendation],
                  icf_counts: tuple[int, ...] = ()) -> RecommendationEffects:
    """Resolve conflicting effects across codes.

    Driver: utility > relevance > quality. Cost flags: OR. ICF rule:
    one_time > per_application > fractional; one_time pins icf_value 1,
    per_application takes the largest declared application count.
    """
    driver = None
    icf_rule = None
    strategies: list[str] = []
    cost_only = capex = opex = governance = demand_req = demand_zero = distributed = False
    metric_ids: list[str] = []
    for rec in recommendations:
        e = rec.effects
        if e.main_driver is not None:
            if driver is None or DRIVER_RANK[e.main_driver] > DRIVER_RANK[driver]:
                driver = e.main_driver
        if e.icf_rule is not None:
            if icf_rule is None or ICF_RANK[e.icf_rule] > ICF_RANK[icf_rule]:
                icf_rule = e.icf_rule
        if e.strategy is not None and e.strategy not in strategies:
            strategies.append(e.strategy)
        cost_only = cost_only or e.cost_only
        capex = capex or e.include_capex
        opex = opex or e.include_opex
        governance = governance or e.include_governance_costs
        demand_req = demand_req or e.demand_required
        demand_zero = demand_zero or e.demand_zero
        distributed = distributed or e.distributed
        for mid in e.recommended_metric_ids:
            if mid not in metric_ids:
                metric_ids.append(mid)

    icf_value = None
    if icf_rule == "one_time":
        icf_value = 1.0
    elif icf_rule == "per_application" and icf_counts:
        icf_value = float(max(icf_counts))

    # An explicit direct-sale strategy wins over service models.
    strategy = "daas" if "daas" in strategies else (strategies[0] if strategies else None)
    return RecommendationEffects(
        main_driver=driver, cost_only=cost_only, include_capex=capex,
        include_opex=opex, include_governance_costs=governance,
        icf_rule=icf_rule, icf_value=icf_value, demand_required=demand_req,
        demand_zero=demand_zero, distributed=distributed, strategy=strategy,
        recommended_metric_ids=tuple(metric_ids))


@dataclass(frozen=True)
class ScreeningOutcome:
    recommendations: tuple[Recommendation, ...]
    effects: RecommendationEffects
    discrepancy_notes: tuple[str, ...] = ()

    def to_dict(self) -> dict:
        return {
            "recommendations": [r.to_dict() for r in self.recommendations],
            "effects": self.effects.to_dict(),
            "discrepancy_notes": list(self.discrepancy_notes),
        }


def recommendations(session: ScreeningSession, tree: DecisionTree) -> ScreeningOutcome:
    """Recommendations per accumulated code (deduplicated, code-ascending)."""
    if not session.complete:
        raise ValidationError("session is not complete")
    recs = [tree.recommendation(code) for code in sorted(session.accumulated_codes)]
    effects = merge_effects(recs, session.icf_counts)
    notes = tuple(n.note for n in tree.notes
                  if n.applies(session.accumulated_codes, session.answered))
    return ScreeningOutcome(recommendations=tuple(recs), effects=effects,
                            discrepancy_notes=notes)


@dataclass(frozen=True)
class PurposeOutcome:
    purpose: DataPurpose | None
    recommendations: tuple[Recommendation, ...]
    effects: RecommendationEffects
    discrepancy_notes: tuple[str, ...] = ()

    def to_dict(self) -> dict:
        return {
            "purpose": self.purpose.value if self.purpose else None,
            "recommendations": [r.to_dict() for r in self.recommendations],
            "effects": self.effects.to_dict(),
            "discrepancy_notes": list(self.discrepancy_notes),
        }


def classify_purpose(session: ScreeningSession, tree: DecisionTree) -> PurposeOutcome:
    """Primary data purpose plus the recommendations of a complete session.

    When several purpose answers were affirmed the highest-priority purpose
    wins (operational first); None when no purpose question was affirmed.
    """
    if tree.stage is not Stage.STEP_II:
        raise ValidationError("purpose classification applies to step_ii trees")
    outcome = recommendations(session, tree)
    purpose = None
    affirmed = set(session.purposes)
    for candidate in PURPOSE_ORDER:
        if candidate in affirmed:
            purpose = candidate
            break
    return PurposeOutcome(purpose=purpose,
                          recommendations=outcome.recommendations,
                          effects=outcome.effects,
                          discrepancy_notes=outcome.discrepancy_notes)


# ------------------------------------------------------------------ loading

def _answer_from_dict(doc: dict, path: str) -> Answer:
    allowed = {"label", "codes", "next", "icf_count", "purpose"}
    unknown = doc.keys() - allowed
    if unknown:
        raise ValidationError(f"unknown answer fields: {sorted(unknown)}", path)
    if "label" not in doc:
        raise ValidationError("answer needs a label", path)
    purpose = None
    if doc.get("purpose") is not None:
        try:
            purpose = DataPurpose(doc["purpose"])
        except ValueError:
            raise ValidationError(f"unknown purpose {doc['purpose']!r}", path)
    return Answer(label=doc["label"],
                  codes=tuple(int(c) for c in doc.get("codes", [])),
                  next=doc.get("next"),
                  icf_count=doc.get("icf_count"),
                  purpose=purpose)


def tree_from_dict(doc: dict) -> DecisionTree:
    required = {"id", "stage", "entry_question_id", "questions", "code_recommendations"}
    allowed = required | {"notes"}
    missing = required - doc.keys()
    if missing:
        raise ValidationError(f"tree document missing: {sorted(missing)}")
    unknown = doc.keys() - allowed
    if unknown:
        raise ValidationError(f"unknown tree fields: {sorted(unknown)}")
    try:
        stage = Stage(doc["stage"])
    except ValueError:
        raise ValidationError(f"unknown stage {doc['stage']!r}", "/stage")
    questions = []
    for i, qdoc in enumerate(doc["questions"]):
        path = f"/questions/{i}"
        if "id" not in qdoc or "text" not in qdoc or "answers" not in qdoc:
            raise ValidationError("question needs id, text, answers", path)
        unknown = qdoc.keys() - {"id", "text", "answers"}
        if unknown:
            raise ValidationError(f"unknown question fields: {sorted(unknown)}", path)
        answers = tuple(_answer_from_dict(a, f"{path}/answers/{j}")
                        for j, a in enumerate(qdoc["answers"]))
        questions.append(Question(id=qdoc["id"], text=qdoc["text"], answers=answers))
    recs = {}
    for code_str, rdoc in doc["code_recommendations"].items():
        code = int(code_str)
        rpath = f"/code_recommendations/{code_str}"
        unknown = rdoc.keys() - {"text", "effects"}
        if unknown:
            raise ValidationError(f"unknown recommendation fields: {sorted(unknown)}",
                                  rpath)
        recs[code] = Recommendation(
            code=code, text=rdoc["text"],
            effects=effects_from_dict(rdoc.get("effects", {}), f"{rpath}/effects"))
    notes = []
    for i, ndoc in enumerate(doc.get("notes", [])):
        npath = f"/notes/{i}"
        unknown = ndoc.keys() - {"note", "when_codes_include", "when_answered"}
        if unknown:
            raise ValidationError(f"unknown note fields: {sorted(unknown)}", npath)
        notes.append(DiscrepancyNote(
            note=ndoc["note"],
            when_codes_include=tuple(ndoc.get("when_codes_include", [])),
            when_answered=(tuple(ndoc["when_answered"])
                           if ndoc.get("when_answered") else None)))
    notes = tuple(notes)
    return DecisionTree(id=doc["id"], stage=stage,
                        entry_question_id=doc["entry_question_id"],
                        questions=tuple(questions),
                        code_recommendations=recs, notes=notes)


def load_tree(source) -> DecisionTree:
    if isinstance(source, dict):
        return tree_from_dict(source)
    if hasattr(source, "read"):
        return tree_from_dict(json.load(source))
    with open(source, "r", encoding="utf-8") as fh:
        return tree_from_dict(json.load(fh))


_TREES: dict[str, DecisionTree] = {}


def _packaged_tree(name: str) -> DecisionTree:
    if name not in _TREES:
        with resources.files("datavalor.data").joinpath(name).open("r") as fh:
            _TREES[name] = load_tree(fh)
    return _TREES[name]


def default_step1_tree() -> DecisionTree:
    return _packaged_tree("tree_step1.json")


def default_step2_tree() -> DecisionTree:
    return _packaged_tree("tree_step2.json")
