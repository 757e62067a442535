"""Core data model for dialog specifications and their text formats.

A dialog is described either *extensionally*, as an enumerated set of
episodes (every permitted way to walk through the questions), or
*intensionally*, as a union of typed expressions whose numerator names a
combinator and whose denominator lists questions or nested sub-dialogs.
This module defines both representations plus the parsers and the
canonical printers for the three on-disk formats (spec, episodes,
domains).
"""

from __future__ import annotations

import re
from dataclasses import dataclass
from enum import Enum
from functools import cached_property


class DlgError(Exception):
    """Base class for every error raised by this package."""


class ParseError(DlgError):
    """Malformed input text; carries the 1-based line/column when known."""

    def __init__(self, message: str, line: int | None = None, col: int | None = None):
        if line is not None:
            message = f"{line}:{col}: {message}"
        super().__init__(message)
        self.line = line
        self.col = col


class InvalidSpec(DlgError):
    """Structurally invalid expression, episode set, or domain table."""


_IDENT_RE = re.compile(r"[A-Za-z0-9_/-]+")

# An utterance (abstract) is the set of questions answered in one turn;
# an episode is the ordered sequence of utterances of one complete run.
AbstractUtterance = frozenset
Episode = tuple


def check_ident(name: str, what: str = "question") -> str:
    if not isinstance(name, str) or not _IDENT_RE.fullmatch(name):
        raise InvalidSpec(f"invalid {what} token: {name!r}")
    return name


class DialogType(Enum):
    """The nine expression numerators, spelled as they appear in files."""

    I = "I"
    C = "C"
    PFA = "PFA"
    PFA_N = "PFA_n"
    PFA_N_STAR = "PFA_n*"
    SPE = "SPE"
    SPE_PRIME = "SPE'"
    PE = "PE"
    PE_STAR = "PE*"

    def __str__(self) -> str:
        return self.value


TYPE_TAGS = {t.value: t for t in DialogType}

# Numerators that imply multiple responses per utterance can never carry
# sub-dialog terms (a single utterance cannot complete more than one
# sub-dialog), so they require all-atomic denominators.
ATOMIC_ONLY = frozenset(
    {DialogType.I, DialogType.PFA_N, DialogType.PFA_N_STAR, DialogType.PE, DialogType.PE_STAR}
)
# PFA and SPE admit sub-dialogs only in the two-term form.
BINARY_WITH_SUBS = frozenset({DialogType.PFA, DialogType.SPE})
# Types whose episode set depends on the order of the denominator.
ORDER_SENSITIVE = frozenset(
    {DialogType.C, DialogType.PFA, DialogType.PFA_N, DialogType.PFA_N_STAR}
)


@dataclass(frozen=True)
class DialogExpr:
    """One typed expression: a numerator over an ordered list of terms.

    Terms are question names (str) or nested DialogExpr sub-dialogs.
    """

    numerator: DialogType
    terms: tuple

    def __post_init__(self):
        if not isinstance(self.numerator, DialogType):
            raise InvalidSpec(f"unknown type tag: {self.numerator!r}")
        if not isinstance(self.terms, tuple) or not self.terms:
            raise InvalidSpec("expression needs at least one term")
        subs = 0
        for t in self.terms:
            if isinstance(t, DialogExpr):
                subs += 1
            else:
                check_ident(t)
        if subs and self.numerator in ATOMIC_ONLY:
            raise InvalidSpec(
                f"type {self.numerator} requires atomic terms, got a sub-dialog"
            )
        if subs and self.numerator in BINARY_WITH_SUBS and len(self.terms) != 2:
            raise InvalidSpec(
                f"type {self.numerator} admits sub-dialogs only with exactly two terms"
            )
        seen = set()
        for q in self.leaves():
            if q in seen:
                raise InvalidSpec(f"duplicate question: {q}")
            seen.add(q)

    def leaves(self):
        """Yield every question name in denominator order, depth first."""
        for t in self.terms:
            if isinstance(t, DialogExpr):
                yield from t.leaves()
            else:
                yield t

    @cached_property
    def questions(self) -> frozenset:
        return frozenset(self.leaves())

    def __str__(self) -> str:
        return render_expr(self)


@dataclass(frozen=True, eq=False)
class SpecUnion:
    """A non-empty union of expressions over one shared question set.

    Member order is kept for printing; equality uses set semantics.
    """

    exprs: tuple

    def __post_init__(self):
        if not self.exprs:
            raise InvalidSpec("a specification needs at least one expression")
        deduped = []
        for e in self.exprs:
            if not isinstance(e, DialogExpr):
                raise InvalidSpec(f"not an expression: {e!r}")
            if e not in deduped:
                deduped.append(e)
        qs = deduped[0].questions
        for e in deduped[1:]:
            if e.questions != qs:
                raise InvalidSpec(
                    "union members must cover the same questions: "
                    f"{sorted(qs)} vs {sorted(e.questions)}"
                )
        object.__setattr__(self, "exprs", tuple(deduped))

    @property
    def questions(self) -> frozenset:
        return self.exprs[0].questions

    @cached_property
    def expr_set(self) -> frozenset:
        return frozenset(self.exprs)

    def __eq__(self, other):
        if not isinstance(other, SpecUnion):
            return NotImplemented
        return self.expr_set == other.expr_set

    def __hash__(self):
        return hash(self.expr_set)

    def __str__(self) -> str:
        return render_spec(self)


def make_episode(utterances) -> Episode:
    """Build and validate one episode from an iterable of question sets."""
    eps = tuple(frozenset(u) for u in utterances)
    if not eps:
        raise InvalidSpec("empty episode")
    seen = set()
    for u in eps:
        if not u:
            raise InvalidSpec("empty utterance in episode")
        for q in u:
            check_ident(q)
            if q in seen:
                raise InvalidSpec(f"question {q} answered twice in one episode")
            seen.add(q)
    return eps


@dataclass(frozen=True, eq=False)
class EnumeratedSpec:
    """A set of episodes, all covering the same question set.

    Episode order is kept for printing and for order-derived heuristics;
    equality uses set semantics.
    """

    questions: frozenset
    episodes: tuple

    def __post_init__(self):
        deduped = []
        seen = set()
        for ep in self.episodes:
            if ep not in seen:
                seen.add(ep)
                deduped.append(ep)
        object.__setattr__(self, "episodes", tuple(deduped))

    @classmethod
    def from_episodes(cls, episodes) -> "EnumeratedSpec":
        eps = [make_episode(ep) for ep in episodes]
        if not eps:
            raise InvalidSpec("a specification needs at least one episode")
        questions = frozenset().union(*eps[0])
        for ep in eps:
            covered = frozenset().union(*ep)
            if covered != questions:
                raise InvalidSpec(
                    "inconsistent coverage: episode "
                    f"{render_episode(ep)} covers {sorted(covered)}, "
                    f"expected {sorted(questions)}"
                )
        return cls(questions=questions, episodes=tuple(eps))

    @cached_property
    def episode_set(self) -> frozenset:
        return frozenset(self.episodes)

    def __eq__(self, other):
        if not isinstance(other, EnumeratedSpec):
            return NotImplemented
        return self.questions == other.questions and self.episode_set == other.episode_set

    def __hash__(self):
        return hash((self.questions, self.episode_set))

    def __len__(self) -> int:
        return len(self.episodes)


@dataclass(frozen=True)
class ResponseDomain:
    """The finite set of valid response tokens for one question."""

    question: str
    allowed: tuple

    def __post_init__(self):
        check_ident(self.question)
        if not self.allowed:
            raise InvalidSpec(f"empty domain for question {self.question}")
        seen = set()
        for v in self.allowed:
            check_ident(v, what="response")
            if v in seen:
                raise InvalidSpec(f"duplicate response {v!r} in domain of {self.question}")
            seen.add(v)

    def __contains__(self, value) -> bool:
        return value in self.allowed


# ---------------------------------------------------------------------------
# Tokenizer shared by the three file formats.

_TOK_RE = re.compile(r"[()\"]|[A-Za-z0-9_/-]+")


@dataclass(frozen=True)
class _Tok:
    kind: str  # '(' | ')' | 'ident' | 'string' | 'eof'
    text: str
    line: int
    col: int


def _tokenize(text: str):
    toks = []
    line, col = 1, 1
    i, n = 0, len(text)
    while i < n:
        c = text[i]
        if c == "\n":
            line += 1
            col = 1
            i += 1
            continue
        if c in " \t\r":
            col += 1
            i += 1
            continue
        if c in "()":
            toks.append(_Tok(c, c, line, col))
            col += 1
            i += 1
            continue
        if c == '"':
            j = text.find('"', i + 1)
            nl = text.find("\n", i + 1)
            if j == -1 or (nl != -1 and nl < j):
                raise ParseError("unterminated string", line, col)
            toks.append(_Tok("string", text[i + 1 : j], line, col))
            col += j - i + 1
            i = j + 1
            continue
        m = _IDENT_RE.match(text, i)
        if m:
            toks.append(_Tok("ident", m.group(), line, col))
            col += len(m.group())
            i = m.end()
            continue
        raise ParseError(f"unexpected character {c!r}", line, col)
    toks.append(_Tok("eof", "", line, col))
    return toks


class _Parser:
    def __init__(self, text: str):
        self.toks = _tokenize(text)
        self.pos = 0

    def peek(self) -> _Tok:
        return self.toks[self.pos]

    def next(self) -> _Tok:
        tok = self.toks[self.pos]
        self.pos += 1
        return tok

    def expect(self, kind: str) -> _Tok:
        tok = self.next()
        if tok.kind != kind:
            raise ParseError(
                f"expected {kind!r}, got {tok.text or 'end of input'!r}", tok.line, tok.col
            )
        return tok

    def fail(self, message: str):
        tok = self.peek()
        raise ParseError(message, tok.line, tok.col)


# ---------------------------------------------------------------------------
# Spec format: one or more expressions, their union being the dialog.
#   ("C" PIN ("SPE'" account transaction) amount)


def _parse_expr(p: _Parser) -> DialogExpr:
    p.expect("(")
    tag = p.expect("string")
    if tag.text not in TYPE_TAGS:
        raise ParseError(f"unknown type tag {tag.text!r}", tag.line, tag.col)
    terms = []
    while True:
        tok = p.peek()
        if tok.kind == ")":
            p.next()
            break
        if tok.kind == "(":
            terms.append(_parse_expr(p))
        elif tok.kind == "ident":
            terms.append(p.next().text)
        else:
            p.fail("expected a question, a sub-expression, or ')'")
    if not terms:
        raise ParseError("expression needs at least one term", tag.line, tag.col)
    return DialogExpr(TYPE_TAGS[tag.text], tuple(terms))


def parse_spec(text: str) -> SpecUnion:
    """Parse the spec file format: whitespace-separated expressions."""
    p = _Parser(text)
    exprs = []
    while p.peek().kind != "eof":
        if p.peek().kind != "(":
            p.fail("expected '('")
        exprs.append(_parse_expr(p))
    if not exprs:
        p.fail("expected at least one expression")
    return SpecUnion(tuple(exprs))


def render_expr(expr: DialogExpr) -> str:
    parts = [f'"{expr.numerator.value}"']
    for t in expr.terms:
        parts.append(render_expr(t) if isinstance(t, DialogExpr) else t)
    return "(" + " ".join(parts) + ")"


def render_spec(union: SpecUnion) -> str:
    """Canonical printer: one expression per line, newline-terminated."""
    return "".join(render_expr(e) + "\n" for e in union.exprs)


# ---------------------------------------------------------------------------
# Episodes format: a parenthesized list of episodes, where an episode item
# is either a bare question or a parenthesized multi-response utterance.
#   ((size blend cream) ((size blend) cream))


def _parse_episode(p: _Parser) -> Episode:
    p.expect("(")
    items = []
    while True:
        tok = p.peek()
        if tok.kind == ")":
            p.next()
            break
        if tok.kind == "ident":
            items.append(frozenset({p.next().text}))
        elif tok.kind == "(":
            p.next()
            group = []
            while p.peek().kind == "ident":
                group.append(p.next().text)
            p.expect(")")
            if len(group) < 2:
                raise ParseError(
                    "a parenthesized utterance needs at least two questions",
                    tok.line,
                    tok.col,
                )
            if len(set(group)) != len(group):
                raise InvalidSpec(f"duplicate question in utterance {group}")
            items.append(group)
        else:
            p.fail("expected a question, '(' or ')'")
    if not items:
        p.fail("empty episode")
    return make_episode(items)


def parse_episodes(text: str) -> EnumeratedSpec:
    """Parse the episodes file format into an enumerated specification."""
    p = _Parser(text)
    p.expect("(")
    episodes = []
    while p.peek().kind != ")":
        if p.peek().kind == "eof":
            p.fail("unterminated episode list")
        episodes.append(_parse_episode(p))
    p.next()
    p.expect("eof")
    if not episodes:
        raise ParseError("expected at least one episode")
    return EnumeratedSpec.from_episodes(episodes)


def render_utterance(u) -> str:
    qs = sorted(u)
    return qs[0] if len(qs) == 1 else "(" + " ".join(qs) + ")"


def render_episode(ep) -> str:
    return "(" + " ".join(render_utterance(u) for u in ep) + ")"


def render_episodes(spec: EnumeratedSpec) -> str:
    """Printer for the episodes file format, one episode per line."""
    lines = [render_episode(ep) for ep in spec.episodes]
    return "(" + "\n ".join(lines) + ")\n"


# ---------------------------------------------------------------------------
# Domains format: one (domain <question> (<responses...>)) form per question.


def parse_domains(text: str) -> dict:
    """Parse the domains file format into {question: ResponseDomain}."""
    p = _Parser(text)
    domains = {}
    while p.peek().kind != "eof":
        p.expect("(")
        kw = p.expect("ident")
        if kw.text != "domain":
            raise ParseError(f"expected 'domain', got {kw.text!r}", kw.line, kw.col)
        q = p.expect("ident")
        p.expect("(")
        allowed = []
        while p.peek().kind == "ident":
            allowed.append(p.next().text)
        p.expect(")")
        p.expect(")")
        if not allowed:
            raise ParseError(f"empty domain for question {q.text}", q.line, q.col)
        if q.text in domains:
            raise InvalidSpec(f"duplicate domain for question {q.text}")
        domains[q.text] = ResponseDomain(q.text, tuple(allowed))
    if not domains:
        p.fail("expected at least one domain declaration")
    return domains


def render_domains(domains: dict) -> str:
    lines = [
        f"(domain {d.question} ({' '.join(d.allowed)}))"
        for d in (domains[q] for q in sorted(domains))
    ]
    return "\n".join(lines) + "\n"
