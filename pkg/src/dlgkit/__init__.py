"""Toolkit for specifying, compressing, verifying, and staging
unsolicited-reporting mixed-initiative dialogs."""

from .core import (
    DialogExpr,
    DialogType,
    DlgError,
    EnumeratedSpec,
    InvalidSpec,
    ParseError,
    ResponseDomain,
    SpecUnion,
    parse_domains,
    parse_episodes,
    parse_spec,
    render_episode,
    render_episodes,
    render_expr,
    render_spec,
)
from .enumeration import (
    brute_force_ordered_partitions,
    bell,
    class_size,
    enumerate_expr,
    enumerate_union,
    episode_count,
    ordered_bell,
    space_sizes,
    stirling2,
)
from .mining import MineResult, mine, minimality_report
from .rewrite import equivalent, normalize, reduce_to_primitives, residual_union
from .script import Completion, MixError, Script, apply_script, make_script, mix
from .staging import (
    HistoryError,
    SessionState,
    StagerPlan,
    StepResult,
    analyze_excess_deficit,
    askable,
    compile_stager,
    redo,
    start_session,
    step,
    undo,
)

__all__ = [name for name in dir() if not name.startswith("_")]
