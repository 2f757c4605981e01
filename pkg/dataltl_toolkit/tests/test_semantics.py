"""Reference evaluator and the shepherd evaluation path of the extended Until."""

import unittest

import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from dataltl_toolkit.services.formula import TRUE, AttrIs, Or, Prop, XEq
from dataltl_toolkit.services.fragments import extended_shape, shape_formula
from dataltl_toolkit.services.parsing import parse
from dataltl_toolkit.services.semantics import (
    CltlAtom,
    UneqShape,
    eval_class,
    eval_cltl_atom,
    eval_position,
    satisfies,
    truth_vector,
    uneq_until_by_shepherd,
)
from dataltl_toolkit.services.words import HERD_EXAMPLE_PSI, data_word, herd_example_word, make_word
from dataltl_toolkit.utils.errors import FragmentError, PositionOutOfRangeError, WordFormatError
from dataltl_toolkit.utils.splitmix import SplitMix64

PARTS = (TRUE, Prop("p"), Prop("q"), Prop("r"), Or(Prop("p"), Prop("q")))


def _word():
    return data_word([1, 2, 1, 3], [{"p"}, {"q"}, {"p"}, set()], props_alphabet={"p", "q"})


def _random_shape(rng):
    rho_neq = rng.choice(PARTS)
    return UneqShape(
        attr="a",
        test_attr="a",
        shift=rng.below(4),
        rho=rng.choice(PARTS),
        rho_eq=Or(rng.choice(PARTS), rho_neq),
        rho_neq=rho_neq,
        tau=rng.choice(PARTS),
    )


def _dual_path_sweep(testcase, words, seed):
    rng = SplitMix64(seed)
    for index in range(words):
        shape = _random_shape(rng)
        length = 1 + rng.below(10)
        values = [rng.below(3) for _ in range(length)]
        labels = [{name for name in ("p", "q", "r") if rng.chance(1, 2)} for _ in range(length)]
        w = data_word(values, labels, props_alphabet={"p", "q", "r"})
        direct = truth_vector(w, shape_formula(shape))
        with testcase.subTest(case=index, values=values, labels=labels, shape=shape):
            by_shepherd = {i for i in range(1, length + 1) if uneq_until_by_shepherd(w, i, shape)}
            testcase.assertEqual(by_shepherd, direct)


@pytest.mark.parametrize(
    "text, expected",
    [
        ("p U q", {1, 2}),
        ("X q", {1}),
        ("Y p", {2, 4}),
        ("F q", {1, 2}),
        ("G !q", {3, 4}),
        ("q S p", {1, 2, 3}),
        ("C{a} X= @a", {1}),
        ("C{a} Y= true", {3}),
        ("@a=X^2@a", {1}),
        ("C[1]{a} @a", set()),
        ("C{a} F= (@a & q)", {2}),
        ("C{a} G= !q", {1, 3, 4}),
    ],
)
def test_truth_sets(text, expected):
    assert truth_vector(_word(), parse(text)) == expected


class TestEvaluator(unittest.TestCase):
    def test_class_quantifier_and_extended_until_need_a_value(self):
        w = data_word([1, None, 2])

        self.assertEqual(truth_vector(w, parse("C{a} true")), {1, 3})
        self.assertEqual(truth_vector(w, parse("F!{a}[0] true")), {1})

    def test_example_word_truth_set(self):
        self.assertEqual(truth_vector(herd_example_word(), parse(HERD_EXAMPLE_PSI)), {1, 2, 3, 4, 6, 8})

    def test_from_now_and_up_to_now_slice_the_word(self):
        w = data_word([0, 0, 0], [{"p"}, set(), {"q"}], props_alphabet={"p", "q"})

        self.assertEqual(truth_vector(w, parse("Y true")), {2, 3})
        self.assertEqual(truth_vector(w, parse("N Y true")), set())
        self.assertEqual(truth_vector(w, parse("F q")), {1, 2, 3})
        self.assertEqual(truth_vector(w, parse("Nbar F q")), {3})

    def test_pair_navigation(self):
        w = make_word(
            [({"p"}, {"a": 1, "b": 1}), (set(), {"a": 1, "b": 2}), ({"q"}, {"a": 1, "b": 1})],
            {"p", "q"},
            ["a", "b"],
        )

        self.assertEqual(truth_vector(w, parse("XX{a,b} q")), {1})
        self.assertEqual(truth_vector(w, parse("YY{a,b} p")), {3})

    def test_class_layer_entry_point(self):
        w = data_word([1, 2, 1])

        self.assertTrue(eval_class(w, 1, 1, XEq(AttrIs("a"))))
        self.assertFalse(eval_class(w, 3, 1, XEq(AttrIs("a"))))

    def test_position_checks(self):
        w = _word()

        with self.assertRaises(PositionOutOfRangeError):
            eval_position(w, 5, Prop("p"))
        with self.assertRaises(WordFormatError):
            satisfies(data_word([]), TRUE)
        self.assertTrue(satisfies(w, parse("p U q")))

    def test_constraint_atoms(self):
        w = make_word(
            [(set(), {"a": 1, "b": 2}), (set(), {"a": 3, "b": 1}), (set(), {"a": 2, "b": 2})],
            attrs_alphabet=["a", "b"],
        )

        self.assertTrue(eval_cltl_atom(w, 1, CltlAtom("a", "b", 1)))
        self.assertFalse(eval_cltl_atom(w, 2, CltlAtom("a", "b", 1)))
        self.assertTrue(eval_cltl_atom(w, 1, CltlAtom("a", "b")))
        self.assertFalse(eval_cltl_atom(w, 2, CltlAtom("a", "b")))
        with self.assertRaises(WordFormatError):
            eval_cltl_atom(data_word([1, None]), 1, CltlAtom("a", "a", 1))


# --- Dual evaluation of the extended Until -------------------------------------------------------


@st.composite
def one_attribute_words(draw, max_len=10, max_values=3):
    values = draw(st.lists(st.integers(0, max_values - 1), min_size=1, max_size=max_len))
    labels = draw(
        st.lists(st.sets(st.sampled_from(["p", "q", "r"])), min_size=len(values), max_size=len(values))
    )
    return data_word(values, labels, props_alphabet={"p", "q", "r"})


@st.composite
def extended_shapes(draw):
    parts = st.sampled_from(PARTS)
    rho_neq = draw(parts)
    return UneqShape(
        attr="a",
        test_attr="a",
        shift=draw(st.integers(0, 3)),
        rho=draw(parts),
        rho_eq=Or(draw(parts), rho_neq),
        rho_neq=rho_neq,
        tau=draw(parts),
    )


@settings(max_examples=200, deadline=None)
@given(w=one_attribute_words(), shape=extended_shapes())
def test_direct_and_shepherd_semantics_agree(w, shape):
    phi = shape_formula(shape)
    direct = truth_vector(w, phi)

    for i in range(1, len(w) + 1):
        assert (i in direct) == uneq_until_by_shepherd(w, i, shape)


class TestShepherdPath(unittest.TestCase):
    def test_shepherd_path_rejects_foreign_test_attribute(self):
        phi = parse("(@b & p) U!{a}[0] (!=@b & q)")

        with self.assertRaises(FragmentError):
            uneq_until_by_shepherd(data_word([1, 2], [{"p"}, {"q"}]), 1, extended_shape(phi))

    def test_seeded_words_agree_on_both_paths(self):
        _dual_path_sweep(self, words=500, seed=17)

    @pytest.mark.slow
    def test_seeded_words_at_full_size(self):
        _dual_path_sweep(self, words=10_000, seed=2024)
