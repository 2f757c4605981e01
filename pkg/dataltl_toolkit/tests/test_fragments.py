"""Fragment tags, the implication side condition and negative-shift lowering."""

import unittest
from itertools import product

import pytest

from dataltl_toolkit.config import get_config
from dataltl_toolkit.services.formula import FALSE, And, AttrIs, AttrNeq, Lift, Or, Prop, UneqSince, UneqUntil
from dataltl_toolkit.services.fragments import (
    REASON_FROM_NOW,
    REASON_POSITIVE_TARGET,
    REASON_TUPLE,
    Fragment,
    ImplicationStatus,
    classify,
    extended_shape,
    implication_status,
    lower_shift,
    random_formula,
    shape_formula,
)
from dataltl_toolkit.services.parsing import parse
from dataltl_toolkit.services.semantics import truth_vector
from dataltl_toolkit.services.words import HERD_EXAMPLE_PSI, data_word
from dataltl_toolkit.utils.errors import FragmentError

p, q = Prop("p"), Prop("q")
SMALL = get_config({"implication_max_len": 2, "implication_max_values": 2}, env={})


def _small_words(max_len=3, values=(0, 1, 2)):
    for n in range(1, max_len + 1):
        for vals in product(values, repeat=n):
            for labels in product([set(), {"p"}, {"q"}, {"p", "q"}], repeat=n):
                yield data_word(list(vals), list(labels), props_alphabet={"p", "q"})


def _assert_lowering_agrees(ctor, shift, words):
    inter = Or(Lift(p), And(AttrIs("a"), Lift(q)))
    target = And(AttrNeq("a"), Lift(q))
    node = ctor("a", shift, inter, target)
    lowered = lower_shift(node)

    for w in words:
        assert truth_vector(w, lowered) == truth_vector(w, node), w


@pytest.mark.parametrize("text", ["p U q", "C{a} X= @a", "@a=X^2@b", "C[-1]{a} (p U= @a)"])
def test_basic_formulas(text):
    tag = classify(parse(text), config=SMALL)

    assert tag.fragment is Fragment.BASIC
    assert tag.reason is None
    assert tag.implications == ()


@pytest.mark.parametrize(
    "text, reason",
    [
        ("p U!{a}[0] (@a & q)", REASON_POSITIVE_TARGET),
        ("N p", REASON_FROM_NOW),
        ("Nbar F p", REASON_FROM_NOW),
        ("XX{a,b} p", REASON_TUPLE),
        ("((@a & p) | (!=@b & q)) U!{a}[0] (!=@a & q)", "mixed test attributes"),
    ],
)
def test_beyond_the_decidable_fragments(text, reason):
    tag = classify(parse(text), config=SMALL)

    assert tag.fragment is Fragment.BEYOND
    assert tag.reason == reason


@pytest.mark.parametrize(
    "rho_neq, rho_eq, expected",
    [
        (FALSE, q, ImplicationStatus.VERIFIED),
        (p, p, ImplicationStatus.VERIFIED),
        (p, Or(q, p), ImplicationStatus.VERIFIED),
        (p, q, ImplicationStatus.FALSIFIED),
        (And(p, q), p, ImplicationStatus.UNKNOWN),
    ],
)
def test_implication_status(rho_neq, rho_eq, expected):
    assert implication_status(rho_neq, rho_eq, SMALL) is expected


@pytest.mark.parametrize("ctor", [UneqUntil, UneqSince])
@pytest.mark.parametrize("shift", [-1, -2])
def test_lowered_shift_agrees_with_the_direct_semantics(ctor, shift):
    _assert_lowering_agrees(ctor, shift, _small_words())


@pytest.mark.slow
@pytest.mark.parametrize("ctor", [UneqUntil, UneqSince])
@pytest.mark.parametrize("shift", [-1, -2])
def test_lowered_shift_on_every_two_valued_word(ctor, shift):
    _assert_lowering_agrees(ctor, shift, _small_words(max_len=6, values=(0, 1)))


@pytest.mark.parametrize("seed", range(20))
def test_random_formulas_land_in_their_fragment(seed):
    basic = random_formula(seed, Fragment.BASIC, depth=3)
    extended = random_formula(seed, Fragment.EXTENDED, depth=3)

    assert classify(basic, check_implication=False).fragment is Fragment.BASIC
    assert classify(extended, check_implication=False).fragment in (Fragment.BASIC, Fragment.EXTENDED)
    assert random_formula(seed, Fragment.EXTENDED, depth=3) == extended
    with pytest.raises(FragmentError):
        random_formula(seed, Fragment.BEYOND)


class TestClassification(unittest.TestCase):
    def test_example_formula_is_extended_and_its_side_condition_fails(self):
        tag = classify(parse(HERD_EXAMPLE_PSI), config=SMALL)

        self.assertIs(tag.fragment, Fragment.EXTENDED)
        self.assertEqual(tag.implications, (ImplicationStatus.FALSIFIED,))
        self.assertEqual(tag.as_dict()["fragment"], "ExtendedDataLTL")

    def test_extended_without_implication_check(self):
        tag = classify(parse("(p | (@a & q) | (!=@a & q)) U!{a}[1] (!=@a & q)"), check_implication=False)

        self.assertIs(tag.fragment, Fragment.EXTENDED)
        self.assertEqual(tag.implications, ())


class TestExtendedShapes(unittest.TestCase):
    def test_shape_split_and_rebuild(self):
        phi = parse("(p | (@a & q) | (!=@a & p)) U!{a}[1] (!=@a & q)")
        shape = extended_shape(phi)

        self.assertEqual(shape.rho, p)
        self.assertEqual(shape.rho_eq, q)
        self.assertEqual(shape.rho_neq, p)
        self.assertEqual(shape.tau, q)
        self.assertEqual(shape.shift, 1)
        self.assertFalse(shape.since)
        self.assertEqual(extended_shape(shape_formula(shape)), shape)
        with self.assertRaises(FragmentError):
            extended_shape(p)

    def test_lower_shift_needs_a_negative_shift(self):
        with self.assertRaises(FragmentError):
            lower_shift(UneqUntil("a", 0, Lift(p), And(AttrNeq("a"), Lift(q))))
