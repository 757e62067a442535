"""Compress an enumerated specification back into typed expressions.

The heuristic is recursive:

1. single-type recognition: try each type over candidate term orderings
   and accept on exact episode-set equality;
2. block factoring: split the questions into blocks that stay contiguous
   in every episode, mine each block, and recognize the combinator over
   the blocks (coarser block partitions are tried when the finest one
   carries no recognizable structure);
3. union splitting: greedily peel recognized sub-specifications;
4. fallback: one primitive expression per remaining episode.

Results are always sound (they enumerate back to the input exactly);
minimality is claimed only for single-expression recognitions.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from itertools import chain, permutations, product

from .core import (
    ORDER_SENSITIVE,
    DialogExpr,
    DialogType,
    EnumeratedSpec,
    InvalidSpec,
    SpecUnion,
    render_episode,
    render_expr,
)
from .enumeration import CollapseError, episode_count, episode_set
from .rewrite import episode_to_primitive, normalize

T = DialogType

# Widest types first, so re-layering prefers the most utterance-flexible
# reading of a continuation set.
RECOGNITION_ORDER = (
    T.PE_STAR,
    T.SPE_PRIME,
    T.PFA_N_STAR,
    T.I,
    T.C,
    T.PFA,
    T.PFA_N,
    T.SPE,
    T.PE,
)

_MAX_ORDER_PROPOSALS = 512
_MAX_COARSEN_BLOCKS = 6
_MAX_FACTOR_DEPTH = 6


@dataclass(frozen=True)
class MineResult:
    union: SpecUnion
    minimal_claimed: bool


def _first_seen(ep) -> tuple:
    return tuple(chain.from_iterable(sorted(u) for u in ep))


def _order_proposals(eps_ordered) -> list:
    """Candidate term orderings for order-sensitive types.

    All-singles episodes propose their own order; failing that, the
    block order of multi-response episodes does, permuting inside each
    utterance (capped).
    """
    singles = [ep for ep in eps_ordered if all(len(u) == 1 for u in ep)]
    source = singles or eps_ordered
    out, seen = [], set()
    for ep in source:
        within = [math.factorial(len(u)) for u in ep]
        if math.prod(within) > 64:
            cands = [_first_seen(ep)]
        else:
            cands = [
                tuple(chain.from_iterable(combo))
                for combo in product(*(permutations(sorted(u)) for u in ep))
            ]
        for c in cands:
            if c not in seen:
                seen.add(c)
                out.append(c)
        if len(out) >= _MAX_ORDER_PROPOSALS:
            break
    return out


def _single_type(episodes: frozenset, eps_ordered, questions) -> DialogExpr | None:
    q = len(questions)
    n = len(episodes)
    for tag in RECOGNITION_ORDER:
        if episode_count(tag, q) != n:
            continue
        if tag in ORDER_SENSITIVE:
            orders = _order_proposals(eps_ordered)
        else:
            orders = [_first_seen(eps_ordered[0])]
        for terms in orders:
            cand = DialogExpr(tag, terms)
            if episode_set(cand) == episodes:
                return cand
    return None


# ---------------------------------------------------------------------------
# Block factoring.


class _UnionFind:
    def __init__(self, items):
        self.parent = {x: x for x in items}

    def find(self, x):
        while self.parent[x] != x:
            self.parent[x] = self.parent[self.parent[x]]
            x = self.parent[x]
        return x

    def union(self, a, b) -> bool:
        ra, rb = self.find(a), self.find(b)
        if ra == rb:
            return False
        self.parent[ra] = rb
        return True


def _finest_blocks(eps_ordered, questions) -> list:
    """Finest partition of the questions into blocks such that every
    utterance stays inside one block and every block is contiguous in
    every episode."""
    uf = _UnionFind(questions)
    for ep in eps_ordered:
        for u in ep:
            qs = sorted(u)
            for other in qs[1:]:
                uf.union(qs[0], other)
    changed = True
    while changed:
        changed = False
        for ep in eps_ordered:
            seq = [uf.find(next(iter(u))) for u in ep]
            first, last = {}, {}
            for i, b in enumerate(seq):
                first.setdefault(b, i)
                last[b] = i
            for b in first:
                for i in range(first[b], last[b] + 1):
                    if uf.find(seq[i]) != uf.find(b):
                        uf.union(seq[i], b)
                        changed = True
    blocks = {}
    for q in sorted(questions):
        blocks.setdefault(uf.find(q), []).append(q)
    return sorted((frozenset(b) for b in blocks.values()), key=sorted)


def _groupings(blocks: list):
    """Partitions of the block list, finest first, coarsest (trivial) last
    excluded."""
    def parts(items):
        if not items:
            yield []
            return
        head, rest = items[0], items[1:]
        for p in parts(rest):
            for i in range(len(p)):
                yield p[:i] + [[head] + p[i]] + p[i + 1 :]
            yield [[head]] + p

    all_parts = [p for p in parts(list(range(len(blocks)))) if 1 < len(p)]
    all_parts.sort(key=lambda p: (-len(p), sorted(map(sorted, p))))
    for p in all_parts:
        yield [frozenset().union(*(blocks[i] for i in group)) for group in p]


def _try_blocks(episodes, eps_ordered, blocks, depth) -> DialogExpr | None:
    qblock = {q: i for i, b in enumerate(blocks) for q in b}
    block_eps = [dict() for _ in blocks]  # dict keys keep first-seen order
    orders = []
    seen_orders = set()
    for ep in eps_ordered:
        runs = []  # (block index, utterance run)
        for u in ep:
            bs = {qblock[q] for q in u}
            if len(bs) != 1:
                return None  # utterance spans blocks under this grouping
            b = bs.pop()
            if runs and runs[-1][0] == b:
                runs[-1][1].append(u)
            else:
                runs.append((b, [u]))
        border = tuple(b for b, _ in runs)
        if len(set(border)) != len(border):
            return None  # a block is interrupted by another
        for b, run in runs:
            block_eps[b].setdefault(tuple(run))
        if border not in seen_orders:
            seen_orders.add(border)
            orders.append(border)

    terms = []
    for i, b in enumerate(blocks):
        runs = list(block_eps[i])
        if len(b) == 1:
            terms.append(next(iter(b)))
            continue
        sub = _mine_single(frozenset(runs), runs, b, depth + 1)
        if sub is None:
            return None
        terms.append(sub)

    k = len(blocks)
    candidates = []
    if len(orders) == 1:
        candidates.append((T.C, tuple(terms[b] for b in orders[0])))
    else:
        if len(orders) == math.factorial(k):
            candidates.append((T.SPE_PRIME, tuple(terms[b] for b in orders[0])))
        if k == 2:
            candidates.append((T.PFA, (terms[0], terms[1])))
            candidates.append((T.PFA, (terms[1], terms[0])))
            candidates.append((T.SPE, (terms[0], terms[1])))
    for tag, ts in candidates:
        try:
            cand = DialogExpr(tag, ts)
            if episode_set(cand) == episodes:
                return cand
        except (InvalidSpec, CollapseError):
            continue
    return None


def _factor(episodes, eps_ordered, questions, depth) -> DialogExpr | None:
    finest = _finest_blocks(eps_ordered, questions)
    if len(finest) == 1:
        return None
    if len(finest) > _MAX_COARSEN_BLOCKS:
        return _try_blocks(episodes, eps_ordered, finest, depth)
    for blocks in _groupings(finest):
        expr = _try_blocks(episodes, eps_ordered, blocks, depth)
        if expr is not None:
            return expr
    return None


def _mine_single(episodes, eps_ordered, questions, depth) -> DialogExpr | None:
    expr = _single_type(episodes, eps_ordered, questions)
    if expr is None and depth < _MAX_FACTOR_DEPTH:
        expr = _factor(episodes, eps_ordered, questions, depth)
    return expr


# ---------------------------------------------------------------------------
# Union splitting.


def _utterance_term(u):
    if len(u) == 1:
        return next(iter(u))
    return DialogExpr(T.I, tuple(sorted(u)))


def _group_candidates(remaining_ordered, questions, take_first: bool):
    groups = {}
    for ep in remaining_ordered:
        if len(ep) < 2:
            continue
        key = ep[0] if take_first else ep[-1]
        groups.setdefault(key, []).append(ep)
    for u, grp in groups.items():
        parts = [ep[1:] if take_first else ep[:-1] for ep in grp]
        deduped = list(dict.fromkeys(parts))
        inner = _mine_single(frozenset(deduped), deduped, questions - u, 0)
        if inner is None:
            continue
        terms = (_utterance_term(u), inner) if take_first else (inner, _utterance_term(u))
        try:
            yield DialogExpr(T.C, terms)
        except InvalidSpec:
            continue


def _peel_candidates(remaining: frozenset, remaining_ordered, questions):
    whole = _mine_single(remaining, remaining_ordered, questions, 0)
    if whole is not None:
        yield remaining, whole
        return
    for take_first in (True, False):
        for cand in _group_candidates(remaining_ordered, questions, take_first):
            covered = episode_set(cand)
            if covered <= remaining:
                yield covered, cand
    q = len(questions)
    for tag in RECOGNITION_ORDER:
        cnt = episode_count(tag, q)
        if cnt < 2 or cnt > len(remaining):
            continue
        if tag in ORDER_SENSITIVE:
            orders = _order_proposals(remaining_ordered)
        else:
            orders = [_first_seen(remaining_ordered[0])]
        for terms in orders:
            cand = DialogExpr(tag, terms)
            covered = episode_set(cand)
            if covered <= remaining:
                yield covered, cand
    for ep in remaining_ordered:
        yield frozenset({ep}), episode_to_primitive(ep)


def mine(spec: EnumeratedSpec) -> MineResult:
    """Compress an enumerated specification; sound always, one normalized
    expression whenever recognition succeeds."""
    eps_set = spec.episode_set
    eps_ordered = list(spec.episodes)
    expr = _mine_single(eps_set, eps_ordered, spec.questions, 0)
    if expr is not None:
        return MineResult(SpecUnion((normalize(expr),)), minimal_claimed=True)

    parts = []
    remaining, remaining_ordered = eps_set, eps_ordered
    while remaining:
        best = best_cov = best_key = None
        for covered, cand in _peel_candidates(remaining, remaining_ordered, spec.questions):
            key = (-len(covered), render_expr(cand))
            if best_key is None or key < best_key:
                best, best_cov, best_key = cand, covered, key
        parts.append(best)
        remaining = remaining - best_cov
        remaining_ordered = [ep for ep in remaining_ordered if ep in remaining]
    union = SpecUnion(tuple(normalize(e) for e in parts))
    return MineResult(union, minimal_claimed=False)


# ---------------------------------------------------------------------------
# Bounded minimality check.

_REPORT_MAX_QUESTIONS = 4
_REPORT_MAX_EPISODES = 25


@dataclass(frozen=True)
class MinimalityReport:
    minimal: bool | None  # None when the budget ran out before a verdict
    union_size: int
    witness: SpecUnion | None  # a strictly smaller sound union, if one exists
    explored: int
    budget_exhausted: bool


def _ordered_block_seqs(items: list):
    if not items:
        yield ()
        return
    def parts(rest):
        if not rest:
            yield []
            return
        head, tail = rest[0], rest[1:]
        for p in parts(tail):
            for i in range(len(p)):
                yield p[:i] + [[head] + p[i]] + p[i + 1 :]
            yield [[head]] + p

    for p in parts(items):
        blocks = [frozenset(b) for b in p]
        for order in permutations(blocks):
            yield order


def minimality_report(
    spec: EnumeratedSpec, result: MineResult, budget: int = 200_000
) -> MinimalityReport:
    """Exhaustively look for a sound union with fewer expressions.

    Only feasible for small inputs; the search walks every valid
    expression shape over the question set (deduplicated by episode
    set), then covers the specification with as few of them as possible.
    """
    if len(spec.questions) > _REPORT_MAX_QUESTIONS or len(spec.episode_set) > _REPORT_MAX_EPISODES:
        raise InvalidSpec(
            f"size guard: minimality reports need <= {_REPORT_MAX_QUESTIONS} questions "
            f"and <= {_REPORT_MAX_EPISODES} episodes"
        )
    n = len(result.union.exprs)
    if n == 1:
        return MinimalityReport(True, 1, None, 0, False)

    state = {"explored": 0, "exhausted": False}
    memo = {}

    def gen(subset: frozenset) -> dict:
        if subset in memo:
            return memo[subset]
        found = {}
        items = sorted(subset)
        if len(items) == 1:
            e = DialogExpr(T.C, (items[0],))
            found[episode_set(e)] = e
        else:
            for seq in _ordered_block_seqs(items):
                if len(seq) == 1:
                    continue  # a single-term wrapper adds no new episode set
                options = []
                for b in seq:
                    if len(b) == 1:
                        options.append([next(iter(b))])
                    else:
                        options.append(list(gen(b).values()))
                for combo in product(*options):
                    for tag in DialogType:
                        if state["exhausted"]:
                            break
                        try:
                            expr = DialogExpr(tag, tuple(combo))
                            es = episode_set(expr)
                        except (InvalidSpec, CollapseError):
                            continue
                        state["explored"] += 1
                        if state["explored"] >= budget:
                            state["exhausted"] = True
                        found.setdefault(es, expr)
        memo[subset] = found
        return found

    target = spec.episode_set
    usable = {es: e for es, e in gen(spec.questions).items() if es <= target}

    def cover(uncovered: frozenset, chosen: tuple, limit: int):
        if not uncovered:
            return chosen
        if limit == 0:
            return None
        pick = min(uncovered, key=render_episode)
        for es, expr in usable.items():
            if pick in es:
                got = cover(uncovered - es, chosen + (expr,), limit - 1)
                if got is not None:
                    return got
        return None

    for size in range(1, n):
        got = cover(target, (), size)
        if got is not None:
            witness = SpecUnion(tuple(normalize(e) for e in got))
            return MinimalityReport(False, n, witness, state["explored"], state["exhausted"])
    verdict = None if state["exhausted"] else True
    return MinimalityReport(verdict, n, None, state["explored"], state["exhausted"])
