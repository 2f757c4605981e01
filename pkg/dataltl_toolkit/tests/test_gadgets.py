"""PCP and counter machine gadgets."""

import unittest
from dataclasses import replace

import pytest

from dataltl_toolkit.services.fragments import Fragment, classify
from dataltl_toolkit.services.gadgets import (
    ACTIONS,
    BLOCK,
    MinskyMachine,
    PCPInstance,
    bar,
    minsky_conditions,
    minsky_formula,
    minsky_run_word,
    pcp_conditions,
    pcp_formula,
    pcp_witness,
    run_minsky,
    undU_conditions,
    undU_formula,
)
from dataltl_toolkit.services.semantics import satisfies
from dataltl_toolkit.services.words import AttributedWord, Position
from dataltl_toolkit.utils.errors import GadgetError

EXAMPLE = PCPInstance.of([("ab", "a"), ("b", "bb")])

MACHINE = MinskyMachine(
    states=("s0", "s1", "s2"),
    initial="s0",
    accepting=frozenset({"s2"}),
    transitions=(("s0", "inc1", "s1"), ("s1", "ifzero1", "s1"), ("s1", "dec1", "s2")),
)


def _machine(transitions, accepting):
    states = tuple(sorted({s for s, _, t in transitions} | {t for _, _, t in transitions}))
    return MinskyMachine(states, "s0", frozenset(accepting), tuple(transitions))


# Solutions of odd length.
PCP_CORPUS = [
    (PCPInstance.of([("a", "a")]), [1]),
    (PCPInstance.of([("a", "a")]), [1, 1, 1]),
    (EXAMPLE, [1, 2]),
    (EXAMPLE, [1, 2, 1, 2, 1, 2]),
    (PCPInstance.of([("abc", "abc")]), [1]),
    (PCPInstance.of([("abcde", "abcde")]), [1]),
    (PCPInstance.of([("a", "ab"), ("ba", "a")]), [1, 2]),
    (PCPInstance.of([("a", "a"), ("b", "b")]), [1, 2, 1]),
    (PCPInstance.of([("aa", "a"), ("a", "aa")]), [1, 2]),
    (PCPInstance.of([("b", "ba"), ("aa", "a")]), [1, 2]),
    (PCPInstance.of([("ab", "a"), ("c", "bc")]), [1, 2]),
    (PCPInstance.of([("x", "x"), ("yz", "yz")]), [2, 1]),
]

# Deterministic per (state, action), and no two states joined by both zero tests.
MINSKY_CORPUS = [
    (MACHINE, ["inc1", "dec1"]),
    (_machine([("s0", "inc2", "s1"), ("s1", "dec2", "s2")], {"s2"}), ["inc2", "dec2"]),
    (
        _machine(
            [("s0", "inc1", "s0"), ("s0", "dec1", "s1"), ("s1", "dec1", "s1"), ("s1", "ifzero1", "s2")], {"s2"}
        ),
        ["inc1", "inc1", "dec1", "dec1", "ifzero1"],
    ),
    (
        _machine(
            [("s0", "inc1", "s1"), ("s1", "inc2", "s2"), ("s2", "dec1", "s3"), ("s3", "dec2", "s4")], {"s4"}
        ),
        ["inc1", "inc2", "dec1", "dec2"],
    ),
    (
        _machine(
            [("s0", "ifzero2", "s1"), ("s1", "inc2", "s2"), ("s2", "dec2", "s3"), ("s3", "ifzero2", "s4")], {"s4"}
        ),
        ["ifzero2", "inc2", "dec2", "ifzero2"],
    ),
    (
        _machine(
            [
                ("s0", "inc1", "s1"),
                ("s1", "inc1", "s2"),
                ("s2", "dec1", "s3"),
                ("s3", "ifzero2", "s4"),
                ("s4", "dec1", "s5"),
                ("s5", "ifzero1", "s6"),
            ],
            {"s6"},
        ),
        ["inc1", "inc1", "dec1", "ifzero2", "dec1", "ifzero1"],
    ),
    (
        _machine(
            [
                ("s0", "inc1", "s0"),
                ("s0", "ifzero2", "s1"),
                ("s1", "dec1", "s2"),
                ("s2", "inc2", "s1"),
                ("s1", "ifzero1", "s3"),
                ("s3", "dec2", "s3"),
                ("s3", "ifzero2", "s4"),
            ],
            {"s4"},
        ),
        ["inc1", "inc1", "ifzero2", "dec1", "inc2", "dec1", "inc2", "ifzero1", "dec2", "dec2", "ifzero2"],
    ),
    (
        _machine([("s0", "inc1", "s1"), ("s1", "dec1", "s0"), ("s0", "ifzero1", "s2")], {"s2"}),
        ["inc1", "dec1", "inc1", "dec1", "ifzero1"],
    ),
    (
        _machine(
            [("s0", "inc2", "s0"), ("s0", "dec2", "s1"), ("s1", "dec2", "s1"), ("s1", "ifzero2", "s2")], {"s2"}
        ),
        ["inc2", "inc2", "inc2", "dec2", "dec2", "dec2", "ifzero2"],
    ),
    (_machine([("s0", "ifzero1", "s1"), ("s1", "ifzero2", "s2")], {"s2"}), ["ifzero1", "ifzero2"]),
]


def _failing(gadget, w):
    return sorted(name for name, part in gadget.conditions.items() if not satisfies(w, part))


def _relabel(w, i, props):
    positions = list(w.positions)
    positions[i - 1] = replace(positions[i - 1], props=frozenset(props))
    return AttributedWord(tuple(positions), w.props_alphabet, w.attrs_alphabet)


def _revalue(w, i, attr, value):
    positions = list(w.positions)
    pos = positions[i - 1]
    positions[i - 1] = Position.of(pos.props, {**pos.attr_map(), attr: value})
    return AttributedWord(tuple(positions), w.props_alphabet, w.attrs_alphabet)


def _pcp_mutations(instance, w):
    letters = [*instance.alphabet, *(bar(s) for s in instance.alphabet)]
    fresh = max(w.values()) + 1
    for i in range(1, len(w) + 1):
        props = w.props_at(i)
        (letter,) = props - {BLOCK}
        for other in letters:
            if other != letter:
                yield f"{i}: {letter} -> {other}", _relabel(w, i, (props - {letter}) | {other})
        yield f"{i}: toggle {BLOCK}", _relabel(w, i, props ^ {BLOCK})
        for attr in ("a", "b"):
            yield f"{i}: fresh {attr}", _revalue(w, i, attr, fresh)


def _minsky_mutations(machine, w):
    state_props = {machine.state_prop(s) for s in machine.states}
    fresh = max(w.values()) + 1
    for i in range(1, len(w) + 1):
        props = w.props_at(i)
        (state,) = props & state_props
        (action,) = props - state_props
        for other in sorted(state_props - {state}):
            yield f"{i}: {state} -> {other}", _relabel(w, i, {other, action})
        for other in ACTIONS:
            if other != action:
                yield f"{i}: {action} -> {other}", _relabel(w, i, {state, other})
        # zero tests carry an arbitrary fresh value
        if not action.startswith("ifzero"):
            yield f"{i}: fresh value", _revalue(w, i, "a", fresh)


def _mutation_sweep(testcase, pcp_corpus, minsky_corpus):
    for instance, solution in pcp_corpus:
        gadget = pcp_conditions(instance)
        for name, mutant in _pcp_mutations(instance, pcp_witness(instance, solution)):
            with testcase.subTest(instance=instance.pairs, mutation=name):
                testcase.assertNotEqual(_failing(gadget, mutant), [])
    for machine, steps in minsky_corpus:
        gadgets = (minsky_conditions(machine), undU_conditions(machine))
        for name, mutant in _minsky_mutations(machine, run_minsky(machine, steps).word):
            with testcase.subTest(steps=steps, mutation=name):
                for gadget in gadgets:
                    testcase.assertNotEqual(_failing(gadget, mutant), [])


@pytest.mark.parametrize(
    "pairs, solution",
    [
        ([("ab", "a"), ("b", "bb")], [1]),
        ([("ab", "ab")], [1]),
        ([("ab", "a"), ("b", "bb")], []),
        ([("ab", "a"), ("b", "bb")], [3]),
    ],
)
def test_pcp_witness_rejects_bad_solutions(pairs, solution):
    with pytest.raises(GadgetError):
        pcp_witness(PCPInstance.of(pairs), solution)


@pytest.mark.parametrize("pairs", [[], [("", "a")], [("a1", "a")]])
def test_pcp_instance_validation(pairs):
    with pytest.raises(GadgetError):
        PCPInstance.of(pairs)


class TestPCPGadget(unittest.TestCase):
    def test_pcp_witness_layout(self):
        w = pcp_witness(EXAMPLE, [1, 2])
        labels = [w.props_at(i) for i in range(1, len(w) + 1)]

        self.assertEqual(
            labels,
            [{"a", BLOCK}, {"b"}, {bar("a")}, {"b", BLOCK}, {bar("b")}, {bar("b")}],
        )
        self.assertEqual(EXAMPLE.concatenations([1, 2]), ("abb", "abb"))

    def test_pcp_witness_satisfies_every_condition(self):
        w = pcp_witness(EXAMPLE, [1, 2])

        self.assertEqual(_failing(pcp_conditions(EXAMPLE), w), [])
        self.assertTrue(satisfies(w, pcp_formula(EXAMPLE)))

    def test_single_letter_instance(self):
        instance = PCPInstance.of([("a", "a")])
        w = pcp_witness(instance, [1])

        self.assertEqual(len(w), 2)
        self.assertTrue(satisfies(w, pcp_formula(instance)))

    def test_pcp_formula_lies_beyond_the_decidable_fragments(self):
        self.assertIs(classify(pcp_formula(EXAMPLE), check_implication=False).fragment, Fragment.BEYOND)


class TestMinskyGadget(unittest.TestCase):
    def test_accepting_run_satisfies_both_reductions(self):
        run = run_minsky(MACHINE, ["inc1", "dec1"])

        self.assertEqual(run.states, ("s1", "s2"))
        self.assertEqual(run.counters, ((1, 0), (0, 0)))
        self.assertEqual(run.final_state, "s2")
        self.assertEqual([run.word.value("a", i) for i in (1, 2)], [0, 0])
        self.assertEqual(_failing(minsky_conditions(MACHINE), run.word), [])
        self.assertTrue(satisfies(run.word, minsky_formula(MACHINE)))
        self.assertTrue(satisfies(run.word, undU_formula(MACHINE)))

    def test_premature_zero_test_is_caught(self):
        w = minsky_run_word(MACHINE, ["inc1", "ifzero1", "dec1"])

        self.assertEqual([w.value("a", i) for i in (1, 2, 3)], [0, 1, 0])
        self.assertEqual(_failing(minsky_conditions(MACHINE), w), ["zero_test1"])
        self.assertEqual(_failing(undU_conditions(MACHINE), w), ["zero_test1"])
        with self.assertRaises(GadgetError):
            run_minsky(MACHINE, ["inc1", "ifzero1", "dec1"])

    def test_blocked_and_unfinished_runs(self):
        for steps in ([], ["dec1"], ["inc1"], [("inc1", "s2")]):
            with self.subTest(steps=steps), self.assertRaises(GadgetError):
                run_minsky(MACHINE, steps)

    def test_machine_validation(self):
        with self.assertRaises(GadgetError):
            MinskyMachine(("s0",), "s1", frozenset(), ())
        with self.assertRaises(GadgetError):
            MinskyMachine(("s0",), "s0", frozenset(), (("s0", "jump", "s0"),))


class TestGadgetCorpus(unittest.TestCase):
    def test_every_witness_satisfies_its_reduction(self):
        for instance, solution in PCP_CORPUS:
            with self.subTest(instance=instance.pairs, solution=solution):
                w = pcp_witness(instance, solution)
                self.assertEqual(_failing(pcp_conditions(instance), w), [])
        for machine, steps in MINSKY_CORPUS:
            with self.subTest(steps=steps):
                w = run_minsky(machine, steps).word
                self.assertEqual(_failing(minsky_conditions(machine), w), [])
                self.assertEqual(_failing(undU_conditions(machine), w), [])

    def test_single_faults_break_a_condition(self):
        _mutation_sweep(self, PCP_CORPUS[:3], MINSKY_CORPUS[:3])

    @pytest.mark.slow
    def test_single_faults_across_the_corpus(self):
        _mutation_sweep(self, PCP_CORPUS, MINSKY_CORPUS)
