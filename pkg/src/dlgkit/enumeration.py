"""Episode-set semantics of dialog expressions, plus counting formulas.

``enumerate_expr`` expands an expression into the exact set of episodes
it denotes.  The closed-form counts (``episode_count``) and the class /
space sizes are kept separate from the expansion so either side can
check the other.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from functools import lru_cache
from itertools import combinations, permutations

from .core import (
    ATOMIC_ONLY,
    DialogExpr,
    DialogType,
    DlgError,
    EnumeratedSpec,
    InvalidSpec,
    SpecUnion,
    render_episode,
)

T = DialogType


class CollapseError(DlgError):
    """A sub-dialog term admits no single-utterance episode."""


def _compositions(items: tuple):
    """Every split of an ordered tuple into consecutive non-empty blocks."""
    n = len(items)
    if n == 0:
        yield ()
        return
    for first in range(1, n + 1):
        head = (frozenset(items[:first]),)
        for rest in _compositions(items[first:]):
            yield head + rest


def _set_partitions(items: list):
    """All unordered partitions of a list into non-empty blocks."""
    if not items:
        yield []
        return
    head, rest = items[0], items[1:]
    for part in _set_partitions(rest):
        for i in range(len(part)):
            yield part[:i] + [[head] + part[i]] + part[i + 1 :]
        yield [[head]] + part


def _atomic_episodes(tag: DialogType, terms: tuple) -> frozenset:
    qs = frozenset(terms)
    q = len(terms)
    if tag is T.I:
        return frozenset({(qs,)})
    if tag is T.C:
        return frozenset({tuple(frozenset({t}) for t in terms)})
    if tag is T.PFA:
        rest = frozenset(terms[1:])
        ep = (frozenset({terms[0]}),) + ((rest,) if rest else ())
        return frozenset({ep})
    if tag is T.PFA_N:
        out = set()
        for n in range(1, q + 1):
            head, tail = frozenset(terms[:n]), frozenset(terms[n:])
            out.add((head,) + ((tail,) if tail else ()))
        return frozenset(out)
    if tag is T.PFA_N_STAR:
        return frozenset(_compositions(terms))
    if tag is T.SPE:
        out = set()
        for t in terms:
            rest = qs - {t}
            out.add((frozenset({t}),) + ((rest,) if rest else ()))
        return frozenset(out)
    if tag is T.SPE_PRIME:
        return frozenset(tuple(frozenset({t}) for t in perm) for perm in permutations(terms))
    if tag is T.PE:
        out = set()
        for r in range(1, q + 1):
            for combo in combinations(terms, r):
                first = frozenset(combo)
                rest = qs - first
                out.add((first,) + ((rest,) if rest else ()))
        return frozenset(out)
    if tag is T.PE_STAR:
        out = set()
        for part in _set_partitions(list(terms)):
            blocks = [frozenset(b) for b in part]
            for order in permutations(blocks):
                out.add(tuple(order))
        return frozenset(out)
    raise AssertionError(tag)


def _term_episodes(term) -> frozenset:
    if isinstance(term, DialogExpr):
        return _episodes(term)
    return frozenset({(frozenset({term}),)})


def _term_leaves(term) -> frozenset:
    if isinstance(term, DialogExpr):
        return term.questions
    return frozenset({term})


def _collapse(term):
    """The all-in-one-utterance episode of a term, if the term admits it."""
    ep = (_term_leaves(term),)
    if ep not in _term_episodes(term):
        raise CollapseError(
            f"term {term} admits no single-utterance episode, so it cannot "
            "close a PFA/SPE expression"
        )
    return ep


def _concat_product(term_episode_sets) -> frozenset:
    out = {()}
    for eps in term_episode_sets:
        out = {acc + ep for acc in out for ep in eps}
    return frozenset(out)


def _episodes(expr: DialogExpr) -> frozenset:
    tag = expr.numerator
    if all(not isinstance(t, DialogExpr) for t in expr.terms):
        return _atomic_episodes(tag, expr.terms)
    if tag is T.C:
        return _concat_product(_term_episodes(t) for t in expr.terms)
    if tag is T.SPE_PRIME:
        out = set()
        for order in permutations(expr.terms):
            out |= _concat_product(_term_episodes(t) for t in order)
        return frozenset(out)
    if tag is T.PFA:
        first, second = expr.terms
        tail = _collapse(second)
        return frozenset(ep + tail for ep in _term_episodes(first))
    if tag is T.SPE:
        first, second = expr.terms
        out = set()
        for a, b in ((first, second), (second, first)):
            tail = _collapse(b)
            out |= {ep + tail for ep in _term_episodes(a)}
        return frozenset(out)
    # Construction-time validation keeps sub-dialogs out of the other types.
    raise InvalidSpec(f"type {tag} cannot carry sub-dialogs")


def _canonical(questions: frozenset, episodes) -> EnumeratedSpec:
    ordered = sorted(episodes, key=render_episode)
    return EnumeratedSpec(questions=questions, episodes=tuple(ordered))


def enumerate_expr(expr: DialogExpr) -> EnumeratedSpec:
    """Expand one expression into the episode set it denotes."""
    return _canonical(expr.questions, _episodes(expr))


def enumerate_union(union: SpecUnion) -> EnumeratedSpec:
    """Expand a union of expressions: the set union of their episode sets."""
    out = set()
    for e in union.exprs:
        out |= _episodes(e)
    return _canonical(union.questions, out)


def episode_set(source) -> frozenset:
    """Episode set of an expression, union, or enumerated spec."""
    if isinstance(source, DialogExpr):
        return _episodes(source)
    if isinstance(source, SpecUnion):
        return enumerate_union(source).episode_set
    if isinstance(source, EnumeratedSpec):
        return source.episode_set
    raise TypeError(f"cannot enumerate {type(source).__name__}")


# ---------------------------------------------------------------------------
# Counting.


@lru_cache(maxsize=None)
def stirling2(m: int, n: int) -> int:
    """Number of partitions of an m-set into exactly n non-empty blocks."""
    if not 1 <= n <= m:
        raise ValueError(f"stirling2 needs 1 <= n <= m, got m={m} n={n}")
    if n == 1 or n == m:
        return 1
    return n * stirling2(m - 1, n) + stirling2(m - 1, n - 1)


def bell(m: int) -> int:
    """Number of partitions of an m-set."""
    if m < 1:
        raise ValueError(f"bell needs m >= 1, got {m}")
    return sum(stirling2(m, n) for n in range(1, m + 1))


def ordered_bell(q: int) -> int:
    """Number of ordered set partitions of a q-set."""
    if q == 0:
        return 1
    if q < 0:
        raise ValueError(f"ordered_bell needs q >= 0, got {q}")
    return sum(math.factorial(p) * stirling2(q, p) for p in range(1, q + 1))


def episode_count(tag: DialogType, q: int) -> int:
    """Closed-form episode count of a single-type dialog over q questions."""
    if q < 1:
        raise ValueError(f"episode_count needs q >= 1, got {q}")
    if tag in (T.I, T.C, T.PFA):
        return 1
    if tag in (T.PFA_N, T.SPE):
        return q
    if tag is T.PFA_N_STAR:
        return 2 ** (q - 1)
    if tag is T.SPE_PRIME:
        return math.factorial(q)
    if tag is T.PE:
        return 2**q - 1
    if tag is T.PE_STAR:
        return ordered_bell(q)
    raise AssertionError(tag)


@dataclass(frozen=True)
class CountTable:
    q: int
    counts: dict

    @classmethod
    def for_questions(cls, q: int) -> "CountTable":
        return cls(q=q, counts={t: episode_count(t, q) for t in DialogType})


def class_size(tag: DialogType, q: int) -> int:
    """Number of distinct specifications of one type over q questions."""
    if q < 3:
        raise InvalidSpec(
            f"class sizes are multi-classified for q={q}; they are only "
            "disjoint from q >= 3"
        )
    if tag in (T.I, T.SPE, T.SPE_PRIME, T.PE, T.PE_STAR):
        return 1
    if tag is T.PFA:
        return q
    return math.factorial(q)  # C, PFA_n, PFA_n*


@dataclass(frozen=True)
class SpaceSizes:
    """Exact sizes of the dialog space over q questions."""

    q: int
    d_cmi: int  # episodes of the complete mixed-initiative dialog
    universe: int  # all non-empty episode subsets: 2**d_cmi - 1
    single_type: int  # dialogs specifiable with a single type: 4*q! + q + 6
    delta_paper: int  # 2**d_cmi - 4*q! - q - 6; one above universe - single_type


def space_sizes(q: int) -> SpaceSizes:
    if q < 3:
        raise InvalidSpec(f"space sizes need q >= 3, got {q}")
    d = ordered_bell(q)
    single = 4 * math.factorial(q) + q + 6
    return SpaceSizes(
        q=q,
        d_cmi=d,
        universe=2**d - 1,
        single_type=single,
        delta_paper=2**d - single,
    )


def brute_force_ordered_partitions(questions) -> EnumeratedSpec:
    """Independent oracle: all ordered set partitions, by direct recursion.

    Picks every non-empty subset as the first utterance and recurses on
    the remainder, sharing nothing with enumerate_expr's expansion path.
    """
    qs = frozenset(questions)
    if not qs:
        raise InvalidSpec("need at least one question")
    if len(qs) > 8:
        raise InvalidSpec(f"size guard: at most 8 questions, got {len(qs)}")

    def walk(remaining: frozenset):
        if not remaining:
            yield ()
            return
        items = sorted(remaining)
        n = len(items)
        for mask in range(1, 2**n):
            first = frozenset(items[i] for i in range(n) if mask >> i & 1)
            for rest in walk(remaining - first):
                yield (first,) + rest

    return _canonical(qs, set(walk(qs)))
