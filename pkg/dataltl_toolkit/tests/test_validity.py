"""Valid extensions and their local consistency rules."""

import unittest

import pytest

from dataltl_toolkit.services.formula import Layer
from dataltl_toolkit.services.fragments import Fragment, random_formula
from dataltl_toolkit.services.parsing import parse
from dataltl_toolkit.services.validity import (
    build_valid_extension,
    check_all,
    check_valid_wrt,
    descendants,
    eqr_violations,
    equality_marks,
    violations,
)
from dataltl_toolkit.services.words import (
    HERD_EXAMPLE_PSI,
    data_word,
    herd_example_word,
    make_word,
    random_word,
)
from dataltl_toolkit.utils.errors import ValidityError
from dataltl_toolkit.utils.splitmix import SplitMix64


def _word():
    return data_word([1, 2, 1, 1, 3], [{"p"}, {"q"}, {"p", "q"}, set(), {"q"}], props_alphabet={"p", "q"})


FORMULAS = [
    HERD_EXAMPLE_PSI,
    "p U (q & X !p)",
    "Y p S q",
    "C{a} (p U= (@a & q))",
    "C[1]{a} Y= !@a",
    "C{a} (!q S= @a)",
    "(p | (@a & q)) U!{a}[1] (!=@a & q)",
    "P!{a}[0] q",
    "N F p",
    "Nbar P q",
]


def _mutation_sweep(testcase, pairs, seed):
    rng = SplitMix64(seed)
    caught = total = 0
    for index in range(pairs):
        fragment = rng.choice((Fragment.BASIC, Fragment.EXTENDED))
        phi = random_formula(rng, fragment, depth=3, max_shift=2)
        w = random_word(rng, 1 + rng.below(6), max_values=3)
        ext = build_valid_extension(w, phi, bound=2)
        with testcase.subTest(case=index, formula=phi):
            testcase.assertTrue(check_all(ext).valid)
            for path in ext.marks:
                for item in ext.items(path):
                    total += 1
                    if not check_all(ext.flip(path, item), [path]).valid:
                        caught += 1
                    elif ext.layers[path] is Layer.POSITION:
                        testcase.fail(f"position mark flip not caught: {path} {item}")
    testcase.assertGreaterEqual(caught, 0.99 * total)


@pytest.mark.parametrize("text", FORMULAS)
def test_built_extension_is_valid(text):
    w = herd_example_word() if text == HERD_EXAMPLE_PSI else _word()
    ext = build_valid_extension(w, parse(text), bound=2)

    assert check_all(ext).valid
    assert eqr_violations(ext) == []


@pytest.mark.parametrize("text", FORMULAS[1:8])
def test_every_single_flip_is_caught(text):
    ext = build_valid_extension(_word(), parse(text), bound=2)

    for path in ext.marks:
        for item in ext.items(path):
            assert not check_all(ext.flip(path, item)).valid, (path, item)


class TestExtensionMarks(unittest.TestCase):
    def test_value_layer_items_pair_positions_with_values(self):
        ext = build_valid_extension(_word(), parse("C{a} X= @a"), bound=1)

        self.assertIs(ext.layers[()], Layer.POSITION)
        self.assertIs(ext.layers[(0,)], Layer.CLASS)
        self.assertEqual(ext.items((0,))[:3], [(1, 1), (1, 2), (1, 3)])
        self.assertEqual(len(ext.items((0,))), 5 * 3)
        self.assertEqual(ext.marked(()), {1, 3})

    def test_equality_marks(self):
        marks = equality_marks(_word(), 2)

        self.assertEqual(marks[1], {2})
        self.assertEqual(marks[3], {-2, 1})
        self.assertEqual(marks[4], {-1})
        self.assertEqual(marks[5], frozenset())

    def test_descendants_of_the_root(self):
        self.assertEqual(set(descendants(parse("p U C{a} X= @a"), (1,))), {(1, 0), (1, 0, 0)})

    def test_extension_preconditions(self):
        two = make_word([(set(), {"a": 1, "b": 1})], attrs_alphabet=["a", "b"])

        with self.assertRaises(ValidityError):
            build_valid_extension(two, parse("true"), bound=1)
        with self.assertRaises(ValidityError):
            build_valid_extension(data_word([1, None]), parse("true"), bound=1)
        with self.assertRaises(ValidityError):
            build_valid_extension(_word(), parse("C[3]{a} @a"), bound=2)
        with self.assertRaises(ValidityError):
            build_valid_extension(_word(), parse("p"), bound=1).marked((0,))


class TestLocalRules(unittest.TestCase):
    def test_flipped_equality_mark_is_reported(self):
        ext = build_valid_extension(_word(), parse("p"), bound=2).flip_eqr(2, 1)
        report = check_all(ext)

        self.assertFalse(report.valid)
        self.assertEqual(report.eqr, [(2, 1)])
        self.assertEqual(report.as_dict()["eqr"], [[2, 1]])

    def test_shifted_class_reads_its_anchor_through_equality_marks(self):
        ext = build_valid_extension(_word(), parse("C[1]{a} @a"), bound=2)
        self.assertEqual(ext.marked(()), {3})
        self.assertTrue(check_valid_wrt(ext, ()))

        # 1 and 2 carry different values; claiming =1 at 1 reads position 2 for its own value
        broken = ext.flip_eqr(1, 1)

        self.assertEqual(violations(broken, ()), [1])
        self.assertEqual(check_all(broken).failing(), [()])
        self.assertTrue(check_valid_wrt(ext.flip_eqr(1, 2), ()))

    def test_violations_point_at_the_offending_item(self):
        ext = build_valid_extension(_word(), parse("p U q"), bound=1)
        broken = ext.flip((), 4)

        self.assertEqual(violations(broken, ()), [4])
        self.assertTrue(check_valid_wrt(broken, (0,)))
        self.assertEqual(check_all(broken).failing(), [()])


class TestMutationSweep(unittest.TestCase):
    def test_random_extensions_are_valid_and_mutation_sensitive(self):
        _mutation_sweep(self, pairs=40, seed=13)

    @pytest.mark.slow
    def test_random_extensions_at_full_size(self):
        _mutation_sweep(self, pairs=1000, seed=2024)
