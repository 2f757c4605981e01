"""Formula and word generators for the PCP and two-counter machine reductions.

PCP words spell ``u_1 bar(v_1) u_2 bar(v_2) ...`` with the first position of
every pair block carrying ``pcp_block``; attributes ``a`` and ``b`` chain the
unbarred and the barred positions, and the tuple operators match each
unbarred position with the barred position carrying the same pair.

Counter machine runs carry the state reached and the action taken at every
position, and one value per position: fresh for a zero test, shared by an
increment and the decrement that undoes it.
"""

from __future__ import annotations

import logging
from collections.abc import Iterable, Sequence
from dataclasses import dataclass, field

from dataltl_toolkit.services.formula import (
    LIFT_TRUE,
    TRUE,
    And,
    AttrIs,
    Class,
    Formula,
    Lift,
    Next,
    Not,
    Prev,
    Prop,
    UEq,
    UneqUntil,
    UpToNow,
    XEq,
    XPair,
    YEq,
    YPair,
    always,
    conj,
    disj,
    eventually,
    historically,
    implies,
    lifted_and,
    lifted_not,
    next_n,
    once,
)
from dataltl_toolkit.services.words import AttributedWord, make_word
from dataltl_toolkit.utils.errors import GadgetError


def _build_logger() -> logging.Logger:
    return logging.getLogger("dataltl.gadgets")


LOGGER = _build_logger()

BLOCK = "pcp_block"
ACTIONS = ("inc1", "inc2", "dec1", "dec2", "ifzero1", "ifzero2")


def _exactly_one(props: Sequence[str]) -> Formula:
    return disj(*(conj(Prop(p), *(Not(Prop(q)) for q in props if q != p)) for p in props))


@dataclass(frozen=True, slots=True)
class GadgetFormula:
    """Named conjuncts plus their conjunction."""

    conditions: dict[str, Formula] = field(default_factory=dict)

    @property
    def formula(self) -> Formula:
        return conj(*self.conditions.values())


# --- PCP -----------------------------------------------------------------------------------


def bar(symbol: str) -> str:
    return f"{symbol}_bar"


@dataclass(frozen=True, slots=True)
class PCPInstance:
    pairs: tuple[tuple[str, str], ...]

    def __post_init__(self) -> None:
        if not self.pairs:
            raise GadgetError("a PCP instance needs at least one pair")
        for index, (u, v) in enumerate(self.pairs, start=1):
            if not u or not v:
                raise GadgetError(f"pair {index} has an empty side", {"pair": index})
            bad = [s for s in u + v if not s.isalpha()]
            if bad:
                raise GadgetError(f"pair {index} uses symbols that are not letters", {"symbols": bad})

    @classmethod
    def of(cls, pairs: Iterable[tuple[str, str]]) -> PCPInstance:
        return cls(tuple((u, v) for u, v in pairs))

    @property
    def alphabet(self) -> tuple[str, ...]:
        return tuple(sorted({s for u, v in self.pairs for s in u + v}))

    @property
    def props(self) -> tuple[str, ...]:
        return (*self.alphabet, *(bar(s) for s in self.alphabet), BLOCK)

    def concatenations(self, solution: Sequence[int]) -> tuple[str, str]:
        for index in solution:
            if not 1 <= index <= len(self.pairs):
                raise GadgetError(f"pair index {index} outside [1, {len(self.pairs)}]", {"index": index})
        return (
            "".join(self.pairs[i - 1][0] for i in solution),
            "".join(self.pairs[i - 1][1] for i in solution),
        )


def _block(u: str, v: str) -> Formula:
    letters = [*u, *(bar(s) for s in v)]
    parts = [
        next_n(offset, And(Prop(letter), Prop(BLOCK) if offset == 0 else Not(Prop(BLOCK))))
        for offset, letter in enumerate(letters)
    ]
    closing = next_n(len(letters) - 1, disj(Not(Next(TRUE)), Next(Prop(BLOCK))))
    return conj(*parts, closing)


def _at_next(side: Formula, other: Formula, bound: int, body: Formula) -> Formula:
    """``body`` at the nearest later ``side`` position, looking at most ``bound`` ahead across ``other``."""

    options = []
    for offset in range(1, bound + 1):
        gap = [next_n(k, other) for k in range(1, offset)]
        options.append(conj(*gap, next_n(offset, conj(side, body))))
    return disj(*options)


def _chain(side: Formula, other: Formula, bound: int) -> dict[str, Formula]:
    def shares(attr: str) -> Formula:
        found = []
        for offset in range(1, bound + 1):
            gap = [next_n(k, other) for k in range(1, offset)]
            found.append(conj(*gap, next_n(offset, side), Class(offset, attr, AttrIs(attr))))
        return disj(*found)

    has_next = _at_next(side, other, bound, TRUE)
    a_step = conj(shares("a"), Not(shares("b")))
    b_step = conj(shares("b"), Not(shares("a")))
    first = conj(side, Not(Prev(once(side))))

    def at_most_twice(attr: str) -> Formula:
        same = lifted_and(AttrIs(attr), Lift(side))
        return Class(0, attr, lifted_not(XEq(UEq(LIFT_TRUE, lifted_and(same, XEq(UEq(LIFT_TRUE, same)))))))

    return {
        "start": always(implies(first, implies(has_next, a_step))),
        "after_a": always(implies(conj(side, a_step), _at_next(side, other, bound, implies(has_next, b_step)))),
        "after_b": always(implies(conj(side, b_step), _at_next(side, other, bound, implies(has_next, a_step)))),
        "twice_a": always(implies(side, at_most_twice("a"))),
        "twice_b": always(implies(side, at_most_twice("b"))),
    }


def pcp_conditions(instance: PCPInstance) -> GadgetFormula:
    sigma = instance.alphabet
    unbarred = disj(*(Prop(s) for s in sigma))
    barred = disj(*(Prop(bar(s)) for s in sigma))
    letters = [*sigma, *(bar(s) for s in sigma)]
    u_bound = max(len(u) for u, _ in instance.pairs) + 1
    v_bound = max(len(v) for _, v in instance.pairs) + 1

    conditions = {
        "blocks": conj(
            Prop(BLOCK),
            always(implies(Prop(BLOCK), disj(*(_block(u, v) for u, v in instance.pairs)))),
            always(_exactly_one(letters)),
        )
    }
    for name, part in _chain(unbarred, barred, v_bound).items():
        conditions[f"u_{name}"] = part
    for name, part in _chain(barred, unbarred, u_bound).items():
        conditions[f"v_{name}"] = part

    def matched(here: str, there: str) -> Formula:
        forward = conj(XPair("a", "b", Prop(there)), Not(XPair("a", "b", XPair("a", "b", TRUE))), Not(YPair("a", "b", TRUE)))
        backward = conj(YPair("a", "b", Prop(there)), Not(YPair("a", "b", YPair("a", "b", TRUE))), Not(XPair("a", "b", TRUE)))
        return implies(Prop(here), disj(forward, backward))

    conditions["pairing"] = conj(
        always(conj(*(matched(s, bar(s)) for s in sigma))),
        always(conj(*(matched(bar(s), s) for s in sigma))),
    )
    return GadgetFormula(conditions)


def pcp_formula(instance: PCPInstance) -> Formula:
    return pcp_conditions(instance).formula


def _chain_values(count: int, a_offset: int, b_offset: int) -> list[dict[str, int]]:
    return [{"a": a_offset + (k + 1) // 2 - 1, "b": b_offset + k // 2} for k in range(1, count + 1)]


def pcp_witness(instance: PCPInstance, solution: Sequence[int]) -> AttributedWord:
    """The word of a solution whose concatenation has odd length."""

    if not solution:
        raise GadgetError("a PCP solution is a non-empty index sequence")
    u, v = instance.concatenations(solution)
    if u != v:
        raise GadgetError("the index sequence is not a solution", {"u": u, "v": v})
    if len(u) % 2 == 0:
        raise GadgetError("the witness needs a solution of odd length", {"length": len(u)})

    a_values = (len(u) + 1) // 2
    chain = _chain_values(len(u), 0, a_values)
    upper = iter(chain)
    lower = iter(chain)
    rows = []
    for index in solution:
        left, right = instance.pairs[index - 1]
        letters = [(s, upper) for s in left] + [(bar(s), lower) for s in right]
        for offset, (letter, source) in enumerate(letters):
            label = {letter, BLOCK} if offset == 0 else {letter}
            rows.append((label, next(source)))
    LOGGER.debug({"event": "pcp_witness", "positions": len(rows), "pairs": len(solution)})
    return make_word(rows, instance.props, ["a", "b"])


# --- Two-counter machines ------------------------------------------------------------------


@dataclass(frozen=True, slots=True)
class MinskyMachine:
    states: tuple[str, ...]
    initial: str
    accepting: frozenset[str]
    transitions: tuple[tuple[str, str, str], ...]

    def __post_init__(self) -> None:
        declared = set(self.states)
        if self.initial not in declared or not self.accepting <= declared:
            raise GadgetError("initial and accepting states must be declared")
        for source, action, target in self.transitions:
            if source not in declared or target not in declared:
                raise GadgetError("transition between undeclared states", {"transition": [source, action, target]})
            if action not in ACTIONS:
                raise GadgetError(f"unknown counter action {action!r}", {"action": action})

    @staticmethod
    def state_prop(state: str) -> str:
        return f"q_{state}"

    @property
    def props(self) -> tuple[str, ...]:
        return (*(self.state_prop(s) for s in self.states), *ACTIONS)

    def successors(self, state: str, action: str) -> list[str]:
        return [t for s, a, t in self.transitions if s == state and a == action]


Step = str | tuple[str, str]


def _resolve(machine: MinskyMachine, steps: Sequence[Step]) -> list[tuple[str, str]]:
    if not steps:
        raise GadgetError("runs need at least one step")
    state = machine.initial
    resolved = []
    for index, step in enumerate(steps, start=1):
        action, target = (step, None) if isinstance(step, str) else step
        options = machine.successors(state, action)
        if target is None:
            if len(options) != 1:
                raise GadgetError(
                    f"step {index}: {len(options)} transitions for {action} from {state}", {"step": index}
                )
            target = options[0]
        elif target not in options:
            raise GadgetError(f"step {index}: no transition {state} -{action}-> {target}", {"step": index})
        resolved.append((action, target))
        state = target
    return resolved


def minsky_run_word(machine: MinskyMachine, steps: Sequence[Step]) -> AttributedWord:
    """Run word for ``steps`` following the transitions; counters are not checked.

    Each decrement takes the value of the latest unmatched increment of its
    counter; unmatched decrements and zero tests get fresh values.
    """

    resolved = _resolve(machine, steps)
    pending: dict[str, list[int]] = {"1": [], "2": []}
    fresh = 0
    rows = []
    for action, target in resolved:
        counter = action[-1]
        if action.startswith("dec") and pending[counter]:
            value = pending[counter].pop()
        else:
            value = fresh
            fresh += 1
            if action.startswith("inc"):
                pending[counter].append(value)
        rows.append(({machine.state_prop(target), action}, {"a": value}))
    return make_word(rows, machine.props, ["a"])


@dataclass(frozen=True, slots=True)
class MinskyRun:
    word: AttributedWord
    states: tuple[str, ...]
    counters: tuple[tuple[int, int], ...]

    @property
    def final_state(self) -> str:
        return self.states[-1]

    @property
    def final_counters(self) -> tuple[int, int]:
        return self.counters[-1]


def run_minsky(machine: MinskyMachine, steps: Sequence[Step]) -> MinskyRun:
    """Simulate ``steps``; raises ``GadgetError`` on a blocked step or a non-accepting end."""

    resolved = _resolve(machine, steps)
    counts = {"1": 0, "2": 0}
    trace = []
    for index, (action, _) in enumerate(resolved, start=1):
        counter = action[-1]
        if action.startswith("inc"):
            counts[counter] += 1
        elif action.startswith("dec"):
            if counts[counter] == 0:
                raise GadgetError(f"step {index}: counter {counter} is zero", {"step": index})
            counts[counter] -= 1
        elif counts[counter] != 0:
            raise GadgetError(f"step {index}: counter {counter} is not zero", {"step": index})
        trace.append((counts["1"], counts["2"]))
    final = resolved[-1][1]
    if final not in machine.accepting or trace[-1] != (0, 0):
        raise GadgetError("run does not end accepting with empty counters", {"state": final, "counters": list(trace[-1])})
    return MinskyRun(minsky_run_word(machine, steps), tuple(t for _, t in resolved), tuple(trace))


def _run_shape(machine: MinskyMachine) -> dict[str, Formula]:
    def q(state: str) -> Formula:
        return Prop(machine.state_prop(state))

    first = disj(*(conj(Prop(a), q(t)) for s, a, t in machine.transitions if s == machine.initial))
    steps = disj(*(conj(q(s), Next(conj(Prop(a), q(t)))) for s, a, t in machine.transitions))
    return {
        "labels": always(conj(_exactly_one([machine.state_prop(s) for s in machine.states]), _exactly_one(ACTIONS))),
        "first": first,
        "steps": always(implies(Next(TRUE), steps)),
        "last": eventually(conj(Not(Next(TRUE)), disj(*(q(s) for s in sorted(machine.accepting))))),
    }


def _multiplicity() -> dict[str, Formula]:
    alone = lifted_and(lifted_not(XEq(LIFT_TRUE)), lifted_not(YEq(LIFT_TRUE)))
    parts = {}
    for counter in "12":
        inc, dec, zero = Lift(Prop(f"inc{counter}")), Lift(Prop(f"dec{counter}")), f"ifzero{counter}"
        parts[f"zero{counter}"] = always(implies(Prop(zero), Class(0, "a", alone)))
        parts[f"inc{counter}"] = always(
            implies(
                Prop(f"inc{counter}"),
                Class(0, "a", lifted_and(lifted_not(YEq(LIFT_TRUE)), XEq(lifted_and(dec, lifted_not(XEq(LIFT_TRUE)))))),
            )
        )
        parts[f"dec{counter}"] = always(
            implies(
                Prop(f"dec{counter}"),
                Class(0, "a", lifted_and(lifted_not(XEq(LIFT_TRUE)), YEq(lifted_and(inc, lifted_not(YEq(LIFT_TRUE)))))),
            )
        )
    return parts


def minsky_conditions(machine: MinskyMachine) -> GadgetFormula:
    conditions = {**_run_shape(machine), **_multiplicity()}
    for counter in "12":
        settled = historically(implies(Prop(f"inc{counter}"), Class(0, "a", UEq(LIFT_TRUE, Lift(Prop(f"dec{counter}"))))))
        conditions[f"zero_test{counter}"] = always(implies(Prop(f"ifzero{counter}"), UpToNow(settled)))
    return GadgetFormula(conditions)


def minsky_formula(machine: MinskyMachine) -> Formula:
    return minsky_conditions(machine).formula


def undU_conditions(machine: MinskyMachine) -> GadgetFormula:
    conditions = {**_run_shape(machine), **_multiplicity()}
    for counter in "12":
        matched = UneqUntil(
            "a",
            0,
            Lift(Not(Prop(f"ifzero{counter}"))),
            lifted_and(AttrIs("a"), Lift(Prop(f"dec{counter}"))),
        )
        conditions[f"zero_test{counter}"] = always(implies(Prop(f"inc{counter}"), matched))
    return GadgetFormula(conditions)


def undU_formula(machine: MinskyMachine) -> Formula:
    return undU_conditions(machine).formula
