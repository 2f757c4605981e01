"""Decorations, their conditions and the falsification search."""

import unittest
from dataclasses import replace

import pytest

from dataltl_toolkit.services.decoration import (
    Color,
    Label,
    build_s_decoration,
    check_all_groups,
    check_conditions,
    conditions_imply_truth,
    decorate,
    falsification_search,
    marked_by_characterization,
)
from dataltl_toolkit.services.herd_analysis import HerdInputs, Mode, build_report
from dataltl_toolkit.services.parsing import parse
from dataltl_toolkit.services.validity import build_valid_extension
from dataltl_toolkit.services.words import HERD_EXAMPLE_PSI, data_word, herd_example_word
from dataltl_toolkit.utils.errors import FragmentError, ValidityError
from dataltl_toolkit.utils.splitmix import SplitMix64

# Intermediates whose rho_neq part is contained in their rho_eq part.
SWEEP_SHAPES = (
    "(p | (@a & q)) U!{{a}}[{shift}] (!=@a & !p)",
    "(p | (@a & q)) U!{{a}}[{shift}] (!=@a & r)",
    "((@a & q) | (!=@a & p)) U!{{a}}[{shift}] (!=@a & r)",
)


# --- Helpers -------------------------------------------------------------------------


def _with_root_marks(ext, marks):
    return replace(ext, marks={**ext.marks, (): frozenset(marks)})


def _example_decoration():
    ext = build_valid_extension(herd_example_word(), parse(HERD_EXAMPLE_PSI), bound=2)
    return build_s_decoration(_with_root_marks(ext, {3, 4, 6, 7}), ())


def _closed_example_word():
    """The herd example word with every rho_neq position also carrying rho_eq."""

    values = [1, 2, 1, 1, 2, 1, 2, 2, 2, 3]
    props = []
    for i in range(1, 11):
        label = set()
        if i in {1, 3, 4, 5, 6, 7, 8, 9}:
            label.add("rho_eq")
        if i in {5, 7, 8, 9}:
            label.add("rho_neq")
        if i in {4, 10}:
            label.add("tau")
        props.append(label)
    return data_word(values, props, props_alphabet={"rho_eq", "rho_neq", "tau"})


def _small_decoration():
    w = data_word([0, 1], [{"p"}, {"q"}], props_alphabet={"p", "q"})
    ext = build_valid_extension(w, parse("p U!{a}[1] (!=@a & q)"), bound=1)
    assert ext.marked(()) == {1}
    return build_s_decoration(ext, ())


def _sweep_case(rng):
    shift = rng.below(4)
    formula = parse(rng.choice(SWEEP_SHAPES).format(shift=shift))
    length = 1 + rng.below(9)
    values = [rng.below(3) for _ in range(length)]
    props = []
    for _ in range(length):
        label = {name for name in ("p", "q", "r") if rng.chance(1, 2)}
        if "p" in label:
            label.add("q")
        props.append(label)
    w = data_word(values, props, props_alphabet={"p", "q", "r"})
    return build_valid_extension(w, formula, bound=shift)


def _sweep(testcase, words, trials_per_word, seed):
    rng = SplitMix64(seed)
    for index in range(words):
        ext = _sweep_case(rng)
        dec = build_s_decoration(ext, ())
        context = {"case": index, "word": ext.base, "formula": ext.formula}
        with testcase.subTest(**context):
            failed = [report.first_failure() for report in check_all_groups(dec) if not report.passed]
            testcase.assertEqual(failed, [])
            testcase.assertTrue(conditions_imply_truth(dec))
            union = frozenset().union(*(dec.psi[s] for s in dec.groups()))
            testcase.assertEqual(union, ext.marked(()))
            if trials_per_word:
                testcase.assertFalse(falsification_search(dec, trials_per_word, seed + index).found)


# --- Construction --------------------------------------------------------------------


class TestDecorationConstruction(unittest.TestCase):
    def test_example_marks_are_grouped_labelled_and_colored(self):
        dec = _example_decoration()

        self.assertEqual(list(dec.groups()), [0, 1, 2])
        self.assertEqual(dec.group_of, {4: 0, 10: 1})
        self.assertEqual(dec.tau[0], {4})
        self.assertEqual(dec.tau[1], {10})
        self.assertEqual(dec.tau[2], frozenset())
        self.assertEqual(dec.psi[0], frozenset())
        self.assertEqual(dec.psi[1], {3, 4, 6, 7})
        self.assertEqual(dec.labels[0], {})
        self.assertEqual(dec.labels[1], {3: Label.START, 4: Label.MID, 6: Label.END})
        self.assertEqual(dec.colors[0], {4: {Color.C_LEFT}})
        self.assertEqual(
            dec.colors[1],
            {
                2: {Color.A_RIGHT},
                3: {Color.A_LEFT, Color.C_RIGHT},
                4: {Color.C_RIGHT},
                6: {Color.C_RIGHT},
                7: {Color.C_RIGHT},
                10: {Color.C_LEFT},
            },
        )

    def test_targets_are_numbered_round_robin(self):
        inputs = HerdInputs(
            values=(0, 1, 0, 1),
            shift=1,
            tau=frozenset({2, 4}),
            rho_eq=frozenset({1, 3}),
            rho_neq=frozenset(),
        )
        dec = decorate(build_report(inputs, [], Mode.MARKS))

        self.assertEqual(dec.group_of, {2: 0, 4: 1})
        self.assertEqual(dec.labels[0], {1: Label.BOTH})
        self.assertEqual(dec.labels[1], {3: Label.BOTH})
        self.assertEqual(dec.e_plus, {0: {1}, 1: {3}})
        self.assertTrue(check_conditions(dec, 0).result("Spec1").passed)

    def test_overlapping_intervals_open_a_new_group(self):
        inputs = HerdInputs(
            values=(0, 1, 0, 2),
            shift=0,
            tau=frozenset({3, 4}),
            rho_eq=frozenset(),
            rho_neq=frozenset(),
        )
        report = build_report(inputs, [1, 2], Mode.MARKS)
        dec = decorate(report)

        self.assertEqual(report.interval(3), (2, 2))
        self.assertEqual(report.interval(4), (1, 3))
        self.assertEqual(dec.group_of, {3: 0, 4: 1})
        self.assertEqual(list(dec.groups()), [0, 1])
        self.assertEqual(dec.labels[0], {2: Label.BOTH})
        self.assertEqual(dec.labels[1], {1: Label.START, 3: Label.END})

    def test_targets_that_would_close_a_color_cycle_move_on(self):
        inputs = HerdInputs(
            values=(0, 1, 0, 0, 1),
            shift=1,
            tau=frozenset({3, 4, 5}),
            rho_eq=frozenset(range(1, 6)),
            rho_neq=frozenset(range(1, 6)),
        )
        dec = decorate(build_report(inputs, [1, 2], Mode.MARKS))

        # 5 waits on 3 through position 2, and 3 waits on 5 through position 1
        self.assertEqual(dec.group_of, {3: 0, 4: 1, 5: 1})
        self.assertIn(Color.C_RIGHT, dec.colors[1][1])
        for s in dec.groups():
            self.assertTrue(check_conditions(dec, s).result("Col1").passed)

    def test_decoration_preconditions(self):
        ext = build_valid_extension(herd_example_word(), parse(HERD_EXAMPLE_PSI), bound=2)

        with self.assertRaises(FragmentError):
            build_s_decoration(ext, (0,))
        with self.assertRaises(ValidityError):
            build_s_decoration(ext.flip((1,), (4, 1)), ())
        with self.assertRaises(ValidityError):
            check_conditions(_example_decoration(), 3)


# --- Conditions ----------------------------------------------------------------------


class TestDecorationConditions(unittest.TestCase):
    def test_example_marks_fail_the_start_condition(self):
        dec = _example_decoration()
        report = check_conditions(dec, 1)

        for name in ("Col1", "Col2", "Spec1", "Spec2", "Spec3", "Log1", "Log2"):
            self.assertTrue(report.result(name).passed, name)
        self.assertEqual(report.first_failure().name, "Spec4")
        self.assertEqual(report.result("Spec4").position, 3)
        self.assertTrue(check_conditions(dec, 0).passed)
        self.assertFalse(conditions_imply_truth(dec))
        self.assertIn(1, marked_by_characterization(dec, 1))
        self.assertEqual(marked_by_characterization(dec, 0), {2})

    def test_truth_marks_on_the_example_pass_everything(self):
        ext = build_valid_extension(_closed_example_word(), parse(HERD_EXAMPLE_PSI), bound=2)
        dec = build_s_decoration(ext, ())

        self.assertEqual(ext.marked(()), {1, 2, 3, 4, 5, 6, 7, 8})
        self.assertEqual(dec.group_of, {4: 0, 10: 1})
        self.assertEqual(dec.psi[0], {2})
        self.assertEqual(dec.psi[1], {1, 3, 4, 5, 6, 7, 8})
        self.assertEqual(dec.labels[1], {1: Label.START, 3: Label.MID, 4: Label.MID, 6: Label.END})
        self.assertTrue(all(report.passed for report in check_all_groups(dec)))
        self.assertTrue(conditions_imply_truth(dec))
        self.assertFalse(falsification_search(dec, trials=200, seed=11).found)

    def test_small_valid_decoration_passes_everything(self):
        dec = _small_decoration()

        self.assertEqual(dec.tau[0], {2})
        self.assertEqual(dec.psi[0], {1})
        self.assertEqual(dec.colors[0], {1: {Color.C_RIGHT}, 2: {Color.C_LEFT}})
        self.assertTrue(all(report.passed for report in check_all_groups(dec)))
        self.assertTrue(conditions_imply_truth(dec))

    def test_end_labels_need_a_target_of_another_value(self):
        w = data_word([0, 0, 0, 1], [{"p"}, {"q"}, {"p", "q"}, set()], props_alphabet={"p", "q"})
        ext = build_valid_extension(w, parse("(p | (@a & q)) U!{a}[0] (!=@a & !p)"), bound=0)
        dec = build_s_decoration(ext, ())

        self.assertEqual(dec.psi[0], {1, 2, 3})
        self.assertEqual(dec.labels[0], {1: Label.START, 2: Label.END})
        self.assertTrue(check_conditions(dec, 0).passed)
        self.assertTrue(conditions_imply_truth(dec))

    def test_group_colors_follow_their_dependencies(self):
        w = data_word(
            [1, 2, 2, 1, 2, 0, 0, 0],
            [{"p", "q"}, set(), set(), {"p", "q"}, {"q"}, {"p", "q"}, {"p", "q"}, set()],
            props_alphabet={"p", "q"},
        )
        ext = build_valid_extension(w, parse("(p | (@a & q)) U!{a}[2] (!=@a & !p)"), bound=2)
        dec = build_s_decoration(ext, ())

        self.assertTrue(all(report.passed for report in check_all_groups(dec)))
        self.assertTrue(conditions_imply_truth(dec))

    def test_flipping_a_mark_breaks_the_marking_conditions(self):
        dec = _small_decoration()
        for i in (1, 2):
            report = check_conditions(dec.with_psi_flipped(0, i), 0)
            self.assertFalse(report.result("Log1").passed)

    def test_flipping_a_color_breaks_the_coloring(self):
        report = check_conditions(_small_decoration().with_color_flipped(0, 2, Color.C_LEFT), 0)

        self.assertFalse(report.result("Col1").passed)


# --- Falsification and sweeps -------------------------------------------------------


class TestFalsificationSearch(unittest.TestCase):
    def test_falsification_finds_no_accepted_flip(self):
        dec = _small_decoration()
        result = falsification_search(dec, trials=50, seed=3)

        self.assertEqual(result.trials, 50)
        self.assertFalse(result.found)
        self.assertEqual(falsification_search(dec, trials=50, seed=3).as_dict(), result.as_dict())


class TestDecorationSweep(unittest.TestCase):
    def test_canonical_decorations_of_random_words(self):
        _sweep(self, words=150, trials_per_word=20, seed=7)

    @pytest.mark.slow
    def test_canonical_decorations_at_full_size(self):
        _sweep(self, words=1000, trials_per_word=100, seed=2024)
