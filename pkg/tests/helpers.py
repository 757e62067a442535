"""Shared test machinery: independent oracles, corpus generators, and an
exhaustive session-trace driver."""

from __future__ import annotations

import random
from itertools import combinations, permutations

from dlgkit.core import DialogExpr, DialogType, ResponseDomain, SpecUnion
from dlgkit.staging import start_session, step

T = DialogType

ALL_TYPES = tuple(DialogType)
COLLAPSIBLE = (T.I, T.PFA_N, T.PFA_N_STAR, T.PE, T.PE_STAR)


# ---------------------------------------------------------------------------
# Independent oracles (itertools-based, sharing nothing with the package's
# enumeration path).


def oracle_ordered_partitions(questions):
    """Ordered set partitions via permutations + composition splits."""
    qs = sorted(questions)
    out = set()
    for perm in permutations(qs):
        for cuts in _cut_masks(len(perm)):
            ep, start = [], 0
            for cut in cuts:
                ep.append(frozenset(perm[start:cut]))
                start = cut
            out.add(tuple(ep))
    return out


def _cut_masks(n):
    for mask in range(2 ** (n - 1)):
        cuts = [i + 1 for i in range(n - 1) if mask >> i & 1]
        yield cuts + [n]


def oracle_pe_episodes(questions):
    """All (first-subset, remainder) splits, the two-utterance family."""
    qs = sorted(questions)
    out = set()
    for r in range(1, len(qs) + 1):
        for combo in combinations(qs, r):
            first = frozenset(combo)
            rest = frozenset(qs) - first
            out.add((first,) + ((rest,) if rest else ()))
    return out


def oracle_partitions_into(items, blocks):
    """All unordered partitions of items into exactly `blocks` non-empty
    blocks, by direct recursion."""
    items = list(items)

    def walk(rest, acc):
        if not rest:
            if len(acc) == blocks:
                yield frozenset(frozenset(b) for b in acc)
            return
        head, tail = rest[0], rest[1:]
        for i in range(len(acc)):
            yield from walk(tail, acc[:i] + [acc[i] + [head]] + acc[i + 1 :])
        if len(acc) < blocks:
            yield from walk(tail, acc + [[head]])

    return set(walk(items, []))


# ---------------------------------------------------------------------------
# Corpus builders.

QUESTIONS = ("alpha", "beta", "gamma", "delta", "epsilon", "zeta")


def trivial_domains(questions, values=("v1", "v2")):
    return {q: ResponseDomain(q, tuple(values)) for q in questions}


def single_type_corpus(max_q=4):
    """One canonical expression per type per question count."""
    out = []
    for q in range(1, max_q + 1):
        for tag in ALL_TYPES:
            out.append(SpecUnion((DialogExpr(tag, QUESTIONS[:q]),)))
    return out


def table_example_dialogs():
    """The six worked dialogs: gas, ATM, lunch, breakfast, coffee, and the
    three-expression coffee union."""
    C, SPEp, SPE, PEs = T.C, T.SPE_PRIME, T.SPE, T.PE_STAR
    return [
        SpecUnion((DialogExpr(C, ("credit-card", "grade", "receipt")),)),
        SpecUnion(
            (DialogExpr(C, ("PIN", DialogExpr(SPEp, ("transaction", "account")), "amount")),)
        ),
        SpecUnion(
            (
                DialogExpr(C, ("receipt", "sandwich", "drink", "dine-in/take-out")),
                DialogExpr(C, ("dine-in/take-out", "sandwich", "drink", "receipt")),
            )
        ),
        SpecUnion(
            (
                DialogExpr(
                    SPEp,
                    (DialogExpr(PEs, ("cream", "sugar")), DialogExpr(PEs, ("eggs", "toast"))),
                ),
            )
        ),
        SpecUnion((DialogExpr(PEs, ("size", "blend", "cream")),)),
        SpecUnion(
            (
                DialogExpr(C, ("size", DialogExpr(SPE, ("blend", "cream")))),
                DialogExpr(C, ("blend", DialogExpr(SPE, ("cream", "size")))),
                DialogExpr(C, ("cream", "blend", "size")),
            )
        ),
    ]


def random_expr(rng: random.Random, questions, depth=0) -> DialogExpr:
    """A random expression over the given questions, valid by construction
    and always enumerable."""
    qs = list(questions)
    rng.shuffle(qs)
    if len(qs) == 1:
        return DialogExpr(T.C, tuple(qs))
    if depth >= 2 or rng.random() < 0.5:
        return DialogExpr(rng.choice(ALL_TYPES), tuple(qs))
    tag = rng.choice((T.C, T.SPE_PRIME, T.PFA, T.SPE))
    if tag in (T.PFA, T.SPE):
        cut = rng.randint(1, len(qs) - 1)
        first, second = qs[:cut], qs[cut:]
        t2 = second[0] if len(second) == 1 else DialogExpr(rng.choice(COLLAPSIBLE), tuple(second))
        if tag is T.SPE:
            t1 = first[0] if len(first) == 1 else DialogExpr(rng.choice(COLLAPSIBLE), tuple(first))
        else:
            t1 = first[0] if len(first) == 1 else random_expr(rng, first, depth + 1)
        return DialogExpr(tag, (t1, t2))
    blocks = _random_blocks(rng, qs)
    terms = tuple(
        b[0] if len(b) == 1 else random_expr(rng, b, depth + 1) for b in blocks
    )
    if len(terms) == 1:
        return DialogExpr(rng.choice(ALL_TYPES), tuple(qs))
    return DialogExpr(tag, terms)


def _random_blocks(rng, qs):
    blocks = [[qs[0]]]
    for q in qs[1:]:
        if rng.random() < 0.5:
            blocks[rng.randrange(len(blocks))].append(q)
        else:
            blocks.append([q])
    return blocks


def random_union(rng: random.Random, max_q=4) -> SpecUnion:
    q = rng.randint(1, max_q)
    qs = QUESTIONS[:q]
    exprs = tuple(random_expr(rng, qs) for _ in range(rng.randint(1, 4)))
    return SpecUnion(exprs)


def seeded_random_unions(n=50, seed=20110815, max_q=4):
    rng = random.Random(seed)
    return [random_union(rng, max_q=max_q) for _ in range(n)]


# ---------------------------------------------------------------------------
# Exhaustive session driving.


def accepted_traces(plan):
    """Every complete utterance key-set sequence the plan accepts, found by
    trying every subset of unanswered questions at every state."""
    traces = set()

    def walk(state, trace):
        if state.completed:
            traces.add(tuple(trace))
            return
        domains = state.plan.domain_table()
        unanswered = sorted(state.plan.questions - {q for q, _ in state.script.bound})
        for r in range(1, len(unanswered) + 1):
            for combo in combinations(unanswered, r):
                utt = {q: domains[q].allowed[0] for q in combo}
                new_state, result = step(state, utt)
                if result.outcome in ("accepted", "completed"):
                    walk(new_state, trace + [frozenset(combo)])

    walk(start_session(plan), [])
    return traces
