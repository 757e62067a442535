"""Compile specifications into session plans and run live sessions.

The plan's defining property: the set of complete utterance sequences a
session accepts equals the specification's episode set exactly, with no
excess and no deficit.  A single all-atomic complete mixed-initiative
expression runs unrestricted (any in-domain utterance over unanswered
questions is fine, nothing to consult); everything else is guarded by
prefix membership in the live candidates' episode sets.

Sessions are immutable snapshots; step/undo/redo return new states, and
a rejected step returns the state unchanged.
"""

from __future__ import annotations

from dataclasses import dataclass, field

from .core import (
    DialogExpr,
    DialogType,
    DlgError,
    EnumeratedSpec,
    InvalidSpec,
    SpecUnion,
)
from .enumeration import enumerate_union, episode_set
from .rewrite import normalize_union
from .script import Completion, MixError, Script, make_script, mix

UNRESTRICTED = "unrestricted"
GUARDED = "guarded"

REJECT_OUT_OF_DOMAIN = "out-of-domain"
REJECT_ALREADY_ANSWERED = "already-answered"
REJECT_ORDER = "order-violation"
REJECT_COMBINATION = "combination-violation"


class HistoryError(DlgError):
    """Undo or redo on an empty stack."""


class SessionCompleted(DlgError):
    """The session has already reached its completion."""


def _is_unrestricted(expr: DialogExpr, questions: frozenset) -> bool:
    return (
        expr.numerator is DialogType.PE_STAR
        and all(not isinstance(t, DialogExpr) for t in expr.terms)
        and expr.questions == questions
    )


@dataclass(frozen=True)
class StagerPlan:
    spec: SpecUnion  # normalized
    domains: tuple  # (question, ResponseDomain) pairs, sorted
    action: str
    modes: tuple  # one mode per spec expression
    script_template: Script
    _enum_cache: dict = field(default_factory=dict, compare=False, repr=False)

    @property
    def questions(self) -> frozenset:
        return self.spec.questions

    def domain_table(self) -> dict:
        return dict(self.domains)

    def enumeration(self, idx: int) -> frozenset:
        """Episode set of one union member, memoized per plan."""
        if idx not in self._enum_cache:
            self._enum_cache[idx] = episode_set(self.spec.exprs[idx])
        return self._enum_cache[idx]


def compile_stager(union: SpecUnion, domains: dict, action: str = "complete") -> StagerPlan:
    missing = union.questions - set(domains)
    if missing:
        raise InvalidSpec(f"no response domain declared for: {sorted(missing)}")
    spec = normalize_union(union)
    modes = tuple(
        UNRESTRICTED if _is_unrestricted(e, spec.questions) else GUARDED for e in spec.exprs
    )
    template = make_script(sorted(spec.questions), domains, action)
    table = tuple(sorted((q, domains[q]) for q in spec.questions))
    return StagerPlan(
        spec=spec, domains=table, action=action, modes=modes, script_template=template
    )


@dataclass(frozen=True)
class SessionState:
    plan: StagerPlan
    script: Script | None  # None once completed
    completion: Completion | None
    history: tuple  # accepted utterances: tuples of sorted (q, v) pairs
    candidates: tuple  # indices of spec expressions still live
    undo_stack: tuple = ()
    redo_stack: tuple = ()

    @property
    def completed(self) -> bool:
        return self.completion is not None

    @property
    def history_keys(self) -> tuple:
        return tuple(frozenset(q for q, _ in utt) for utt in self.history)

    @property
    def history_bindings(self) -> list:
        return [dict(utt) for utt in self.history]

    def _core(self) -> tuple:
        return (self.script, self.completion, self.history, self.candidates)

    def fingerprint(self) -> tuple:
        """Hashable digest of everything that determines future behavior."""
        return self._core()


@dataclass(frozen=True)
class StepResult:
    outcome: str  # "accepted" | "rejected" | "completed"
    prompt: frozenset  # questions now askable
    reason: str | None = None
    completion: Completion | None = None


def start_session(plan: StagerPlan) -> SessionState:
    return SessionState(
        plan=plan,
        script=plan.script_template,
        completion=None,
        history=(),
        candidates=tuple(range(len(plan.spec.exprs))),
        undo_stack=(),
        redo_stack=(),
    )


def _continuation_suffixes(state: SessionState, idx: int):
    prefix = state.history_keys
    k = len(prefix)
    for ep in state.plan.enumeration(idx):
        if ep[:k] == prefix:
            yield ep[k:]


def askable(state: SessionState) -> frozenset:
    """Questions that begin at least one accepting continuation."""
    if state.completed:
        return frozenset()
    answered = frozenset(q for q, _ in state.script.bound)
    out = set()
    for idx in state.candidates:
        if state.plan.modes[idx] == UNRESTRICTED:
            out |= state.plan.questions - answered
        else:
            for suffix in _continuation_suffixes(state, idx):
                if suffix:
                    out |= suffix[0]
    return frozenset(out)


def _classify_rejection(state: SessionState, keys: frozenset) -> str:
    """The keys were in-domain and unanswered, but no candidate accepts
    them next: posed too early (order) or grouped wrongly (combination)."""
    for idx in state.candidates:
        for suffix in _continuation_suffixes(state, idx):
            if keys in suffix:
                return REJECT_ORDER
    return REJECT_COMBINATION


def step(state: SessionState, utterance: dict):
    """Feed one utterance; returns (new state, result).

    Rejection is a value, not an error: the returned state is the input
    state, untouched.
    """
    if state.completed:
        raise SessionCompleted("the session has already completed")
    if not utterance:
        return state, StepResult("rejected", askable(state), reason=REJECT_COMBINATION)

    domains = state.plan.domain_table()
    answered = frozenset(q for q, _ in state.script.bound)
    for q, v in utterance.items():
        if q in answered:
            return state, StepResult("rejected", askable(state), reason=REJECT_ALREADY_ANSWERED)
        if q not in domains or v not in domains[q]:
            return state, StepResult("rejected", askable(state), reason=REJECT_OUT_OF_DOMAIN)

    keys = frozenset(utterance)
    new_prefix = state.history_keys + (keys,)
    live = []
    for idx in state.candidates:
        if state.plan.modes[idx] == UNRESTRICTED:
            live.append(idx)
            continue
        k = len(new_prefix)
        if any(ep[:k] == new_prefix for ep in state.plan.enumeration(idx)):
            live.append(idx)
    if not live:
        return state, StepResult("rejected", askable(state), reason=_classify_rejection(state, keys))

    specialized = mix(state.script, utterance)
    new_history = state.history + (tuple(sorted(utterance.items())),)
    snapshot = state._core()
    if isinstance(specialized, Completion):
        new_state = SessionState(
            plan=state.plan,
            script=None,
            completion=specialized,
            history=new_history,
            candidates=tuple(live),
            undo_stack=state.undo_stack + (snapshot,),
            redo_stack=(),
        )
        return new_state, StepResult("completed", frozenset(), completion=specialized)
    new_state = SessionState(
        plan=state.plan,
        script=specialized,
        completion=None,
        history=new_history,
        candidates=tuple(live),
        undo_stack=state.undo_stack + (snapshot,),
        redo_stack=(),
    )
    return new_state, StepResult("accepted", askable(new_state))


def undo(state: SessionState) -> SessionState:
    if not state.undo_stack:
        raise HistoryError("nothing to undo")
    script, completion, history, candidates = state.undo_stack[-1]
    return SessionState(
        plan=state.plan,
        script=script,
        completion=completion,
        history=history,
        candidates=candidates,
        undo_stack=state.undo_stack[:-1],
        redo_stack=state.redo_stack + (state._core(),),
    )


def redo(state: SessionState) -> SessionState:
    if not state.redo_stack:
        raise HistoryError("nothing to redo")
    script, completion, history, candidates = state.redo_stack[-1]
    return SessionState(
        plan=state.plan,
        script=script,
        completion=completion,
        history=history,
        candidates=candidates,
        undo_stack=state.undo_stack + (state._core(),),
        redo_stack=state.redo_stack[:-1],
    )


def analyze_excess_deficit(candidate: SpecUnion, target: EnumeratedSpec):
    """Episode sets the candidate stages beyond the target, and the target
    episodes the candidate misses."""
    if candidate.questions != target.questions:
        raise InvalidSpec(
            f"question sets differ: {sorted(candidate.questions)} "
            f"vs {sorted(target.questions)}"
        )
    staged = enumerate_union(candidate).episode_set
    return staged - target.episode_set, target.episode_set - staged
