"""DOT export of the answer-order structure of a specification.

Nodes are the utterance elements observed across episodes; an edge says
the source must be answered before the target.  When the whole
enumeration is losslessly reconstructible from one such order (element
sequences that partition the questions and respect the order yield
exactly the episode set), a single graph is emitted with covering edges
only; otherwise one clustered subgraph per union member.
"""

from __future__ import annotations

from .core import SpecUnion, render_expr, render_utterance
from .enumeration import enumerate_union, episode_set


def _order_pairs(episodes):
    """Pairs (u, v) with u before v in some episode and never the
    reverse; a pair seen in both orders is unordered."""
    before = set()
    for ep in episodes:
        for i, u in enumerate(ep):
            for v in ep[i + 1 :]:
                before.add((u, v))
    return {(u, v) for (u, v) in before if (v, u) not in before}


def _transitive_closure(pairs, nodes):
    closure = set(pairs)
    changed = True
    while changed:
        changed = False
        for a, b in list(closure):
            for c in nodes:
                if (b, c) in closure and (a, c) not in closure:
                    closure.add((a, c))
                    changed = True
    return closure


def _covering_edges(pairs, nodes):
    closure = _transitive_closure(pairs, nodes)
    cover = set()
    for a, b in closure:
        if not any((a, c) in closure and (c, b) in closure for c in nodes):
            cover.add((a, b))
    return cover, closure


def _reconstruct(nodes, closure, questions):
    """All node sequences that partition the questions and respect the
    order; the lossless-compression check compares this to the episodes."""
    out = set()

    def walk(remaining, chosen):
        if not remaining:
            out.add(tuple(chosen))
            return
        for node in nodes:
            if node <= remaining and not any((node, prev) in closure for prev in chosen):
                chosen.append(node)
                walk(remaining - node, chosen)
                chosen.pop()

    walk(frozenset(questions), [])
    return out


def _poset_for(episodes, questions):
    """(nodes, covering edges) when one order losslessly captures the
    episode set, else None."""
    nodes = sorted({u for ep in episodes for u in ep}, key=render_utterance)
    pairs = _order_pairs(episodes)
    cover, closure = _covering_edges(pairs, nodes)
    if any((a, a) in closure for a in nodes):
        return None  # contradictory order constraints formed a cycle
    if _reconstruct(nodes, closure, questions) != set(episodes):
        return None
    return nodes, cover


def _emit_nodes_edges(lines, nodes, edges, prefix=""):
    def nid(u):
        return f'"{prefix}{render_utterance(u)}"'

    for u in nodes:
        label = f' [label="{render_utterance(u)}"]' if prefix else ""
        lines.append(f"  {nid(u)}{label};")
    for a, b in sorted(edges, key=lambda e: (render_utterance(e[0]), render_utterance(e[1]))):
        lines.append(f"  {nid(a)} -> {nid(b)};")


def hasse_dot(union: SpecUnion) -> str:
    """Render the specification as Graphviz DOT text, read bottom-up."""
    questions = union.questions
    episodes = enumerate_union(union).episode_set
    lines = ["digraph dialog {", "  rankdir=BT;"]
    single = _poset_for(episodes, questions)
    if single is not None:
        nodes, cover = single
        _emit_nodes_edges(lines, nodes, cover)
    else:
        for i, expr in enumerate(union.exprs):
            eps = episode_set(expr)
            sub = _poset_for(eps, questions)
            if sub is None:
                # Best effort: show the derived order even when lossy.
                ns = sorted({u for ep in eps for u in ep}, key=render_utterance)
                cover, _ = _covering_edges(_order_pairs(eps), ns)
                sub = (ns, cover)
            nodes, cover = sub
            label = render_expr(expr).replace('"', '\\"')
            lines.append(f"  subgraph cluster_{i} {{")
            lines.append(f'    label="{label}";')
            inner = []
            _emit_nodes_edges(inner, nodes, cover, prefix=f"{i}:")
            lines.extend("  " + l for l in inner)
            lines.append("  }")
    lines.append("}")
    return "\n".join(lines) + "\n"
