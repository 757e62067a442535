"""Semantics-preserving rewrites over dialog expressions.

Every rewrite here keeps the enumerated episode set identical; that is
the defining property of the rule set (and what the property tests pin
down).  Reduction to the primitive I/C forms and residual re-layering
after answered utterances both live here.
"""

from __future__ import annotations

from .core import (
    DialogExpr,
    DialogType,
    EnumeratedSpec,
    InvalidSpec,
    SpecUnion,
    render_episode,
)
from .enumeration import enumerate_union, episode_set

T = DialogType

_NORMALIZE_GUARD = 10  # sub-term enumeration is exponential; skip huge terms


def _singles_run(expr: DialogExpr):
    """The question run if expr enumerates to exactly one all-singles episode."""
    if len(expr.questions) > _NORMALIZE_GUARD:
        return None
    eps = episode_set(expr)
    if len(eps) != 1:
        return None
    (ep,) = eps
    if any(len(u) != 1 for u in ep):
        return None
    return tuple(next(iter(u)) for u in ep)


def _plain_c_run(expr) -> bool:
    return (
        isinstance(expr, DialogExpr)
        and expr.numerator is T.C
        and all(not isinstance(t, DialogExpr) for t in expr.terms)
    )


def _normalize_once(expr: DialogExpr) -> DialogExpr:
    tag = expr.numerator
    terms = tuple(normalize(t) if isinstance(t, DialogExpr) else t for t in expr.terms)

    # Unwrap single-term expressions; a lone question canonicalizes to C.
    if len(terms) == 1:
        t = terms[0]
        if isinstance(t, DialogExpr):
            return t
        if tag is T.C:
            return DialogExpr(tag, terms)
        return DialogExpr(T.C, terms)

    new_terms = []
    for t in terms:
        if isinstance(t, DialogExpr):
            # Same-type splicing: C directly inside C (and I inside I)
            # concatenates, so the nesting carries no information.
            if t.numerator is tag and tag in (T.C, T.I):
                new_terms.extend(t.terms)
                continue
            run = _singles_run(t)
            if run is not None:
                if tag is T.C:
                    new_terms.extend(run)
                    continue
                if len(run) == 1:
                    new_terms.append(run[0])
                    continue
                if not _plain_c_run(t):
                    new_terms.append(DialogExpr(T.C, run))
                    continue
        new_terms.append(t)
    out = DialogExpr(tag, tuple(new_terms))

    # A whole expression denoting one all-singles episode is a plain C run.
    if not _plain_c_run(out):
        run = _singles_run(out)
        if run is not None:
            return DialogExpr(T.C, run)
    return out


def normalize(expr: DialogExpr) -> DialogExpr:
    """Apply the rewrite rules to fixpoint; enumeration is unchanged."""
    while True:
        nxt = _normalize_once(expr)
        if nxt == expr:
            return nxt
        expr = nxt


def normalize_union(union: SpecUnion) -> SpecUnion:
    return SpecUnion(tuple(normalize(e) for e in union.exprs))


def episode_to_primitive(ep) -> DialogExpr:
    """Render one episode as a primitive expression: C over questions,
    with multi-response utterances as nested I terms."""
    terms = []
    for u in ep:
        if len(u) == 1:
            terms.append(next(iter(u)))
        else:
            terms.append(DialogExpr(T.I, tuple(sorted(u))))
    if len(terms) == 1 and isinstance(terms[0], DialogExpr):
        return terms[0]
    return DialogExpr(T.C, tuple(terms))


def reduce_to_primitives(expr: DialogExpr) -> SpecUnion:
    """An equivalent union that uses only the I and C numerators."""
    eps = sorted(episode_set(expr), key=render_episode)
    return SpecUnion(tuple(episode_to_primitive(ep) for ep in eps))


_EQUIV_GUARD = 10


def equivalent(a: SpecUnion, b: SpecUnion) -> bool:
    """True iff both unions enumerate to the same episode set (exact)."""
    if a.questions != b.questions:
        raise InvalidSpec(
            f"question sets differ: {sorted(a.questions)} vs {sorted(b.questions)}"
        )
    if len(a.questions) > _EQUIV_GUARD:
        raise InvalidSpec(f"size guard: at most {_EQUIV_GUARD} questions")
    return enumerate_union(a).episode_set == enumerate_union(b).episode_set


def continuations(union: SpecUnion, answered) -> frozenset:
    """Episode suffixes that can still follow the answered utterances."""
    prefix = tuple(frozenset(u) for u in answered)
    k = len(prefix)
    out = set()
    for ep in enumerate_union(union).episode_set:
        if ep[:k] == prefix:
            out.add(ep[k:])
    if not out:
        raise InvalidSpec(
            "history is not a valid prefix of the specification: "
            + " ".join(render_episode((u,))[1:-1] for u in prefix)
        )
    return frozenset(out)


def residual_union(union: SpecUnion, answered) -> SpecUnion:
    """The specification of what remains after the answered utterances.

    Enumerates to exactly the valid continuations; re-layered so that a
    continuation set matching a single type comes back as one expression.
    """
    suffixes = continuations(union, answered)
    if suffixes == {()}:
        raise InvalidSpec("history already completes the dialog")
    from .mining import mine  # deferred: mining builds on this module

    spec = EnumeratedSpec.from_episodes(sorted(suffixes, key=render_episode))
    return mine(spec).union
