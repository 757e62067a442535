"""Command-line front end.

Exit codes: 0 success (or empty diff), 1 semantic diff, 2 input error.
All output is deterministic and newline-terminated.
"""

from __future__ import annotations

import argparse
import sys
from pathlib import Path

from .core import (
    DialogType,
    DlgError,
    TYPE_TAGS,
    parse_domains,
    parse_episodes,
    parse_spec,
    render_episode,
    render_spec,
)
from .enumeration import CountTable, enumerate_union, space_sizes
from .hasse import hasse_dot
from .mining import mine
from .rewrite import residual_union
from .staging import (
    HistoryError,
    askable,
    compile_stager,
    redo,
    start_session,
    step,
    undo,
)

DEFAULT_ACTION = "complete"


def _read(path: str) -> str:
    return Path(path).read_text(encoding="utf-8")


def cmd_enumerate(args) -> int:
    spec = parse_spec(_read(args.spec))
    enum = enumerate_union(spec)
    lines = sorted(render_episode(ep) for ep in enum.episodes)
    for line in lines:
        print(line)
    print(f"# episodes: {len(lines)}")
    return 0


def cmd_mine(args) -> int:
    spec = parse_episodes(_read(args.episodes))
    result = mine(spec)
    sys.stdout.write(render_spec(result.union))
    print(f"minimal: {'yes' if result.minimal_claimed else 'unknown'}")
    return 0


def cmd_check(args) -> int:
    spec = parse_spec(_read(args.spec))
    target = parse_episodes(_read(args.episodes))
    if spec.questions != target.questions:
        raise DlgError(
            f"question sets differ: {sorted(spec.questions)} vs {sorted(target.questions)}"
        )
    staged = enumerate_union(spec).episode_set
    excess = staged - target.episode_set
    deficit = target.episode_set - staged
    print(f"excess: {len(excess)}")
    for ep in sorted(excess, key=render_episode):
        print(render_episode(ep))
    print(f"deficit: {len(deficit)}")
    for ep in sorted(deficit, key=render_episode):
        print(render_episode(ep))
    return 0 if not excess and not deficit else 1


def cmd_count(args) -> int:
    q = args.q
    if not 1 <= q <= 20:
        raise DlgError(f"q must be between 1 and 20, got {q}")
    print(f"q: {q}")
    table = CountTable.for_questions(q)
    types = [TYPE_TAGS[args.type]] if args.type else list(DialogType)
    for t in types:
        print(f"{t.value}: {table.counts[t]}")
    if q >= 3 and not args.type:
        sizes = space_sizes(q)
        print(f"d_cmi: {sizes.d_cmi}")
        print(f"universe: {sizes.universe}")
        print(f"single_type: {sizes.single_type}")
        print(f"delta_paper: {sizes.delta_paper}")
    return 0


def cmd_hasse(args) -> int:
    spec = parse_spec(_read(args.spec))
    sys.stdout.write(hasse_dot(spec))
    return 0


def _parse_utterance_line(line: str) -> dict | None:
    from .core import _IDENT_RE

    bindings = {}
    for part in line.split():
        q, eq, v = part.partition("=")
        if not eq or q in bindings:
            return None
        if not _IDENT_RE.fullmatch(q) or not _IDENT_RE.fullmatch(v):
            return None
        bindings[q] = v
    return bindings or None


def _print_prompt(state, domains) -> None:
    open_qs = sorted(askable(state))
    print("askable:")
    for q in open_qs:
        print(f"  {q}: {' '.join(domains[q].allowed)}")


def cmd_run(args, stdin=None) -> int:
    spec = parse_spec(_read(args.spec))
    domains = parse_domains(_read(args.domains))
    plan = compile_stager(spec, domains, action=args.action)
    state = start_session(plan)
    stdin = stdin if stdin is not None else sys.stdin
    _print_prompt(state, domains)
    for raw in stdin:
        line = raw.strip()
        if not line:
            continue
        if line == ":quit":
            break
        if line == ":undo":
            try:
                state = undo(state)
                print("undone")
                _print_prompt(state, domains)
            except HistoryError:
                print("nothing to undo")
            continue
        if line == ":redo":
            try:
                state = redo(state)
                print("redone")
                _print_prompt(state, domains)
            except HistoryError:
                print("nothing to redo")
            continue
        utt = _parse_utterance_line(line)
        if utt is None:
            print("rejected: parse")
            continue
        state, result = step(state, utt)
        if result.outcome == "rejected":
            print(f"rejected: {result.reason}")
        elif result.outcome == "accepted":
            print("accepted")
            residual = residual_union(plan.spec, state.history_keys)
            sys.stdout.write("residual:\n" + render_spec(residual))
            _print_prompt(state, domains)
        else:
            print("completed:")
            for q, v in result.completion.bound:
                print(f"  {q}={v}")
            print(f"action: {result.completion.action}")
            break
    return 0


def cmd_serve(args) -> int:
    import uvicorn

    from .service import create_app

    app = create_app(state_dir=args.state)
    uvicorn.run(app, host=args.host, port=args.port, log_level="warning")
    return 0


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="dlg", description="Specify, compress, verify, and stage dialogs."
    )
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("enumerate", help="expand a spec file into its episodes")
    p.add_argument("spec")
    p.set_defaults(fn=cmd_enumerate)

    p = sub.add_parser("mine", help="compress an episodes file into a spec")
    p.add_argument("episodes")
    p.set_defaults(fn=cmd_mine)

    p = sub.add_parser("check", help="diff a spec against an episodes file")
    p.add_argument("spec")
    p.add_argument("episodes")
    p.set_defaults(fn=cmd_check)

    p = sub.add_parser("count", help="episode counts and space sizes for q questions")
    p.add_argument("q", type=int)
    p.add_argument("--type", choices=sorted(TYPE_TAGS))
    p.set_defaults(fn=cmd_count)

    p = sub.add_parser("run", help="drive a dialog session in the terminal")
    p.add_argument("spec")
    p.add_argument("domains")
    p.add_argument("--action", default=DEFAULT_ACTION)
    p.set_defaults(fn=cmd_run)

    p = sub.add_parser("hasse", help="emit the answer-order graph as DOT")
    p.add_argument("spec")
    p.set_defaults(fn=cmd_hasse)

    p = sub.add_parser("serve", help="run the HTTP session service")
    p.add_argument("--port", type=int, default=8080)
    p.add_argument("--host", default="127.0.0.1")
    p.add_argument("--state", default=None, help="directory for session event logs")
    p.set_defaults(fn=cmd_serve)

    return parser


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return args.fn(args)
    except (DlgError, OSError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2


def console_main() -> None:
    sys.exit(main())


if __name__ == "__main__":
    console_main()
