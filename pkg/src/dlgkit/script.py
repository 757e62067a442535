"""Residual scripts and the specialization step that consumes them.

A script is a data object: the ordered list of still-open question
slots (each with its response domain), the bindings accumulated so far,
and the action to run at completion.  ``mix`` specializes a script by a
static assignment to some of its open slots, yielding a smaller residual
script, or the completion once nothing is open.  Scripts are immutable;
every specialization returns a fresh value, which is what makes the
session history stack trivially correct.
"""

from __future__ import annotations

from dataclasses import dataclass

from .core import DlgError, InvalidSpec, ResponseDomain, check_ident


class MixError(DlgError):
    """A rejected specialization; the script is unchanged and attached.

    reason is "unknown-slot" (already answered or foreign question) or
    "domain-violation" (response outside the slot's domain).
    """

    def __init__(self, reason: str, question: str, script: "Script"):
        super().__init__(f"{reason}: {question}")
        self.reason = reason
        self.question = question
        self.script = script


@dataclass(frozen=True)
class Completion:
    """The finished dialog: its action token and the full bindings."""

    action: str
    bound: tuple  # sorted (question, response) pairs

    @property
    def bindings(self) -> dict:
        return dict(self.bound)


@dataclass(frozen=True)
class Script:
    slots: tuple  # open ResponseDomain slots, in order
    action: str
    bound: tuple = ()  # sorted (question, response) pairs

    @property
    def open_questions(self) -> tuple:
        return tuple(s.question for s in self.slots)

    @property
    def bindings(self) -> dict:
        return dict(self.bound)

    def domain_of(self, question: str) -> ResponseDomain | None:
        for s in self.slots:
            if s.question == question:
                return s
        return None


def make_script(questions, domains: dict, action: str) -> Script:
    """A pristine script with one open slot per question, in order."""
    check_ident(action, what="action")
    qs = list(questions)
    seen = set()
    slots = []
    for q in qs:
        if q in seen:
            raise InvalidSpec(f"duplicate slot: {q}")
        seen.add(q)
        if q not in domains:
            raise InvalidSpec(f"no response domain declared for question {q}")
        slots.append(domains[q])
    if not slots:
        raise InvalidSpec("a script needs at least one slot")
    return Script(slots=tuple(slots), action=action)


def mix(script: Script, static: dict):
    """Specialize a script by a static assignment of open slots.

    Returns the residual Script, or a Completion when every slot is
    answered.  The assignment must bind open slots only, with in-domain
    values; otherwise MixError carries the untouched script.
    """
    if not static:
        raise InvalidSpec("static assignment must be non-empty")
    open_qs = set(script.open_questions)
    for q, v in static.items():
        if q not in open_qs:
            raise MixError("unknown-slot", q, script)
        if v not in script.domain_of(q):
            raise MixError("domain-violation", q, script)
    residual_slots = tuple(s for s in script.slots if s.question not in static)
    bound = tuple(sorted((dict(script.bound) | dict(static)).items()))
    if residual_slots:
        return Script(slots=residual_slots, action=script.action, bound=bound)
    return Completion(action=script.action, bound=bound)


def apply_script(script: Script, full: dict) -> Completion:
    """Complete evaluation: one assignment covering every open slot."""
    if not script.slots:
        raise InvalidSpec("nothing to apply: the script has no open slots")
    missing = set(script.open_questions) - set(full)
    if missing:
        raise InvalidSpec(f"incomplete assignment, missing: {sorted(missing)}")
    result = mix(script, full)
    assert isinstance(result, Completion)
    return result
