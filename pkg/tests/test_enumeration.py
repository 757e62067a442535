"""Expansion semantics and the counting formulas, checked against each
other and against independent oracles."""

from __future__ import annotations

import math

import pytest

from dlgkit.core import DialogExpr, DialogType, InvalidSpec, SpecUnion, parse_episodes, parse_spec
from dlgkit.enumeration import (
    CollapseError,
    bell,
    brute_force_ordered_partitions,
    class_size,
    enumerate_expr,
    enumerate_union,
    episode_count,
    episode_set,
    ordered_bell,
    space_sizes,
    stirling2,
)
from helpers import (
    QUESTIONS,
    oracle_ordered_partitions,
    oracle_partitions_into,
    oracle_pe_episodes,
)

T = DialogType


def eps(text: str) -> frozenset:
    """Episode set from episodes-file text, for readable expectations."""
    return parse_episodes(text).episode_set


COFFEE = ("size", "blend", "cream")

# The nine coffee rows: each type over (size blend cream).
GOLDEN_ROWS = {
    T.I: "(((size blend cream)))",
    T.C: "((size blend cream))",
    T.PFA: "((size (blend cream)))",
    T.PFA_N: "(((size blend cream)) (size (blend cream)) ((size blend) cream))",
    T.PFA_N_STAR: """(((size blend cream)) (size (blend cream))
                      ((size blend) cream) (size blend cream))""",
    T.SPE: "((size (blend cream)) (blend (size cream)) (cream (size blend)))",
    T.SPE_PRIME: """((size blend cream) (size cream blend) (blend size cream)
                     (blend cream size) (cream blend size) (cream size blend))""",
    T.PE: """(((size blend cream)) (size (blend cream)) (blend (size cream))
              (cream (size blend)) ((size blend) cream) ((size cream) blend)
              ((blend cream) size))""",
    T.PE_STAR: """(((size blend cream)) ((size blend) cream) (cream (size blend))
                   ((blend cream) size) (size (blend cream)) ((size cream) blend)
                   (blend (size cream)) (size blend cream) (size cream blend)
                   (blend size cream) (blend cream size) (cream blend size)
                   (cream size blend))""",
}


class TestGoldenRows:
    @pytest.mark.parametrize("tag", list(GOLDEN_ROWS))
    def test_row(self, tag):
        expr = DialogExpr(tag, COFFEE)
        assert enumerate_expr(expr).episode_set == eps(GOLDEN_ROWS[tag])

    def test_pe_and_pe_star_sizes(self):
        assert len(enumerate_expr(DialogExpr(T.PE, COFFEE))) == 7
        assert len(enumerate_expr(DialogExpr(T.PE_STAR, COFFEE))) == 13


class TestSubDialogSemantics:
    def test_c_concatenates_block_episodes(self):
        expr = parse_spec("(\"C\" PIN (\"SPE'\" account transaction) amount)").exprs[0]
        assert enumerate_expr(expr).episode_set == eps(
            "((PIN account transaction amount) (PIN transaction account amount))"
        )

    def test_spe_prime_permutes_blocks_without_mixing(self):
        expr = parse_spec("(\"SPE'\" (\"PE*\" cream sugar) (\"PE*\" eggs toast))").exprs[0]
        enum = enumerate_expr(expr)
        assert len(enum) == 18  # 2 block orders x 3 x 3 block episodes
        mixing = (
            frozenset({"cream"}),
            frozenset({"eggs"}),
            frozenset({"sugar"}),
            frozenset({"toast"}),
        )
        assert mixing not in enum.episode_set

    def test_pfa_completes_first_term_then_collapses_second(self):
        expr = parse_spec('("PFA" ("PE*" a b) ("PE*" c d))').exprs[0]
        assert enumerate_expr(expr).episode_set == eps(
            "(((a b) (c d)) (a b (c d)) (b a (c d)))"
        )

    def test_spe_is_pfa_both_ways(self):
        expr = parse_spec('("SPE" ("PE*" a b) ("PE*" c d))').exprs[0]
        assert len(enumerate_expr(expr)) == 6

    def test_collapse_undefined_is_reported(self):
        expr = parse_spec('("PFA" x ("C" a b))').exprs[0]
        with pytest.raises(CollapseError, match="C"):
            enumerate_expr(expr)

    def test_single_term_types_coincide(self):
        want = frozenset({(frozenset({"x"}),)})
        for tag in DialogType:
            assert episode_set(DialogExpr(tag, ("x",))) == want


class TestUnions:
    def test_rotation_union(self):
        union = parse_spec('("C" x y z)\n("C" y z x)\n("C" z x y)')
        assert enumerate_union(union).episode_set == eps("((x y z) (y z x) (z x y))")

    def test_i_pfa_union(self):
        union = parse_spec('("I" x y z)\n("PFA" x y z)')
        assert enumerate_union(union).episode_set == eps("(((x y z)) (x (y z)))")

    def test_singleton_union(self):
        union = parse_spec('("PE" a b)')
        assert enumerate_union(union) == enumerate_expr(union.exprs[0])


class TestCounts:
    @pytest.mark.parametrize("q", range(1, 7))
    @pytest.mark.parametrize("tag", list(DialogType))
    def test_closed_forms_match_enumeration(self, tag, q):
        expr = DialogExpr(tag, QUESTIONS[:q])
        assert len(episode_set(expr)) == episode_count(tag, q)

    def test_known_counts(self):
        assert episode_count(T.PE_STAR, 3) == 13
        assert episode_count(T.PFA_N_STAR, 3) == 4
        # brute-force count of (subset, remainder) splits over a 5-set
        assert episode_count(T.PE, 5) == len(oracle_pe_episodes(QUESTIONS[:5])) == 31

    def test_stirling_bell_against_enumeration_oracles(self):
        assert stirling2(3, 2) == len(oracle_partitions_into("abc", 2)) == 3
        assert bell(3) == sum(len(oracle_partitions_into("abc", n)) for n in (1, 2, 3)) == 5
        for m in range(1, 7):
            for n in range(1, m + 1):
                assert stirling2(m, n) == len(oracle_partitions_into(QUESTIONS[:m], n))

    def test_ordered_bell_sequence(self):
        assert [ordered_bell(q) for q in range(1, 7)] == [1, 3, 13, 75, 541, 4683]
        assert ordered_bell(0) == 1

    def test_pe_star_equals_both_oracles(self):
        for q in range(1, 7):
            qs = QUESTIONS[:q]
            mine = episode_set(DialogExpr(T.PE_STAR, qs))
            assert mine == oracle_ordered_partitions(qs)
            if q <= 6:
                assert mine == brute_force_ordered_partitions(qs).episode_set

    def test_brute_force_oracle_values(self):
        assert brute_force_ordered_partitions(("a",)).episode_set == {
            (frozenset({"a"}),)
        }
        assert brute_force_ordered_partitions(("a", "b")).episode_set == eps(
            "((a b) (b a) ((a b)))"
        )
        assert len(brute_force_ordered_partitions(QUESTIONS[:5])) == 541 == ordered_bell(5)

    def test_brute_force_size_guard(self):
        with pytest.raises(InvalidSpec, match="size guard"):
            brute_force_ordered_partitions(tuple("abcdefghi"))


class TestClassAndSpaceSizes:
    def test_class_sizes(self):
        assert class_size(T.C, 3) == 6
        assert class_size(T.PFA, 4) == 4
        assert class_size(T.PE_STAR, 5) == 1
        for tag in (T.I, T.SPE, T.SPE_PRIME, T.PE, T.PE_STAR):
            assert class_size(tag, 4) == 1
        for tag in (T.C, T.PFA_N, T.PFA_N_STAR):
            assert class_size(tag, 4) == 24

    def test_class_size_multi_classified_below_three(self):
        with pytest.raises(InvalidSpec, match="multi-classified"):
            class_size(T.C, 2)

    def test_space_sizes_q3(self):
        s = space_sizes(3)
        assert s.d_cmi == 13
        assert s.universe == 8191
        assert s.single_type == 33
        assert s.delta_paper == 8159
        # the published delta formula sits one above universe - single_type
        assert s.delta_paper == (s.universe - s.single_type) + 1

    def test_space_sizes_exact_big_integers(self):
        s = space_sizes(4)
        assert s.d_cmi == 75
        assert s.universe == 2**75 - 1
        assert s.single_type == 4 * 24 + 4 + 6


class TestRelations:
    """Inclusions between the episode sets of the types, over one shared
    question ordering."""

    @pytest.mark.parametrize("q", [3, 4, 5])
    def test_subset_relations(self, q):
        qs = QUESTIONS[:q]
        sets = {tag: episode_set(DialogExpr(tag, qs)) for tag in DialogType}
        assert sets[T.SPE] < sets[T.PE]
        assert sets[T.PFA] < sets[T.PFA_N]
        # The four single-application types jointly give only the prefix
        # compositions, so they equal PFA_n* at q=3 and fall short after
        # (q=4 already has mixed compositions such as one-one-two).
        four = sets[T.I] | sets[T.C] | sets[T.PFA] | sets[T.PFA_N]
        assert four <= sets[T.PFA_N_STAR]
        if q == 3:
            assert four == sets[T.PFA_N_STAR]
        else:
            assert four < sets[T.PFA_N_STAR]
        assert sets[T.PFA_N_STAR] < sets[T.PE_STAR]
        assert sets[T.SPE_PRIME] < sets[T.PE_STAR]
        everything = frozenset().union(
            *(sets[t] for t in DialogType if t is not T.PE_STAR)
        )
        # At q=3 the eight types jointly cover every ordered partition, so
        # the inclusion is an equality there; it is strict from q=4 on.
        assert everything <= sets[T.PE_STAR]
        if q >= 4:
            assert everything < sets[T.PE_STAR]

    def test_order_sensitivity(self):
        a = episode_set(DialogExpr(T.C, ("a", "b", "c")))
        b = episode_set(DialogExpr(T.C, ("b", "a", "c")))
        assert a != b

    def test_two_question_coincidences(self):
        """With two questions PFA and C coincide; I stays the one-utterance
        episode and differs from both."""
        c = episode_set(DialogExpr(T.C, ("a", "b")))
        pfa = episode_set(DialogExpr(T.PFA, ("a", "b")))
        i = episode_set(DialogExpr(T.I, ("a", "b")))
        assert pfa == c == {(frozenset({"a"}), frozenset({"b"}))}
        assert i == {(frozenset({"a", "b"}),)}
        assert i != c
