"""Register automata and data automata over 1-attributed words.

Only membership is decided. A register automaton reads a proposition set
and a value per step: a compare transition needs the value in the named
register; a store transition needs a value held by no register and writes
it. A data automaton runs a letter-to-letter transducer over the proposition
sets and then its class automaton over the outputs of every class.

States and output symbols are any hashable values; products pair them into
tuples. JSON uses lists for tuples.
"""

from __future__ import annotations

import logging
from collections.abc import Hashable, Iterable, Mapping
from dataclasses import dataclass
from typing import Any

from dataltl_toolkit.services.words import AttributedWord, DataValue, is_complete
from dataltl_toolkit.utils.errors import AutomatonError, WordFormatError


def _build_logger() -> logging.Logger:
    return logging.getLogger("dataltl.automata")


LOGGER = _build_logger()

State = Hashable
Symbol = Hashable
Letter = frozenset[str]


def _letter(props: Iterable[str]) -> Letter:
    return frozenset(props)


def _values_of(w: AttributedWord) -> list[DataValue]:
    if len(w.attrs_alphabet) != 1 or not is_complete(w, w.attrs_alphabet):
        raise WordFormatError("automata read words complete for exactly one attribute")
    attr = w.attrs_alphabet[0]
    return [pos.value(attr) for pos in w.positions]


# --- Register automata ------------------------------------------------------------------


@dataclass(frozen=True, slots=True)
class Compare:
    source: State
    register: int
    letter: Letter
    target: State


@dataclass(frozen=True, slots=True)
class Store:
    source: State
    letter: Letter
    target: State
    register: int


@dataclass(frozen=True, slots=True)
class RegisterAutomaton:
    alphabet: frozenset[Letter]
    states: frozenset[State]
    initial: State
    registers: int
    compares: tuple[Compare, ...]
    stores: tuple[Store, ...]
    accepting: frozenset[State]

    def __post_init__(self) -> None:
        if self.registers < 0:
            raise AutomatonError("register count must be non-negative")
        if self.initial not in self.states or not self.accepting <= self.states:
            raise AutomatonError("initial and accepting states must be declared")
        for move in (*self.compares, *self.stores):
            if move.source not in self.states or move.target not in self.states:
                raise AutomatonError("transition between undeclared states", {"transition": repr(move)})
            if not 1 <= move.register <= self.registers:
                raise AutomatonError(f"register {move.register} outside [1, {self.registers}]")
            if move.letter not in self.alphabet:
                raise AutomatonError("transition letter outside the alphabet", {"letter": sorted(move.letter)})


Registers = tuple[DataValue | None, ...]


def ra_accepts(automaton: RegisterAutomaton, w: AttributedWord) -> bool:
    values = _values_of(w)
    frontier: set[tuple[State, Registers]] = {(automaton.initial, (None,) * automaton.registers)}
    for pos, value in zip(w.positions, values):
        letter = pos.props
        following: set[tuple[State, Registers]] = set()
        for state, regs in frontier:
            for move in automaton.compares:
                if move.source == state and move.letter == letter and regs[move.register - 1] == value:
                    following.add((move.target, regs))
            if value in regs:
                continue
            for move in automaton.stores:
                if move.source == state and move.letter == letter:
                    slot = move.register - 1
                    following.add((move.target, (*regs[:slot], value, *regs[slot + 1 :])))
        frontier = following
        LOGGER.debug({"event": "ra_step", "configurations": len(frontier)})
        if not frontier:
            return False
    return any(state in automaton.accepting for state, _ in frontier)


# --- Finite automata and transducers ------------------------------------------------------


@dataclass(frozen=True, slots=True)
class Nfa:
    alphabet: frozenset[Symbol]
    states: frozenset[State]
    initial: frozenset[State]
    transitions: frozenset[tuple[State, Symbol, State]]
    accepting: frozenset[State]

    def __post_init__(self) -> None:
        if not self.initial <= self.states or not self.accepting <= self.states:
            raise AutomatonError("class automaton uses undeclared states")
        for source, symbol, target in self.transitions:
            if source not in self.states or target not in self.states or symbol not in self.alphabet:
                raise AutomatonError("malformed class automaton transition", {"transition": repr((source, symbol, target))})

    def step(self, current: frozenset[State], symbol: Symbol) -> frozenset[State]:
        return frozenset(t for s, x, t in self.transitions if s in current and x == symbol)

    def accepts(self, symbols: Iterable[Symbol]) -> bool:
        current = self.initial
        for symbol in symbols:
            current = self.step(current, symbol)
        return bool(current & self.accepting)


@dataclass(frozen=True, slots=True)
class Transducer:
    input_alphabet: frozenset[Letter]
    output_alphabet: frozenset[Symbol]
    states: frozenset[State]
    initial: State
    transitions: frozenset[tuple[State, Letter, Symbol, State]]
    accepting: frozenset[State]

    def __post_init__(self) -> None:
        if self.initial not in self.states or not self.accepting <= self.states:
            raise AutomatonError("base automaton uses undeclared states")
        for source, letter, output, target in self.transitions:
            if (
                source not in self.states
                or target not in self.states
                or letter not in self.input_alphabet
                or output not in self.output_alphabet
            ):
                raise AutomatonError("malformed base automaton transition", {"transition": repr((source, sorted(letter), output, target))})


@dataclass(frozen=True, slots=True)
class DataAutomaton:
    base: Transducer
    klass: Nfa

    def __post_init__(self) -> None:
        if self.base.output_alphabet != self.klass.alphabet:
            raise AutomatonError("base output alphabet differs from the class automaton's alphabet")


def da_search(automaton: DataAutomaton, w: AttributedWord) -> tuple[bool, int]:
    """``(accepted, explored)``: depth-first over base runs with per-class state sets.

    A search node is a position, a base state and the class automaton's state
    set for every value met so far; nodes are never expanded twice.
    """

    values = _values_of(w)
    letters = [pos.props for pos in w.positions]
    base, klass = automaton.base, automaton.klass
    n = len(values)
    outgoing: dict[tuple[State, Letter], list[tuple[Symbol, State]]] = {}
    for source, letter, output, target in base.transitions:
        outgoing.setdefault((source, letter), []).append((output, target))

    start = (0, base.initial, ())
    stack = [start]
    seen = {start}
    while stack:
        index, state, signature = stack.pop()
        if index == n:
            if state in base.accepting and all(current & klass.accepting for _, current in signature):
                LOGGER.debug({"event": "da_search_done", "accepted": True, "explored": len(seen)})
                return True, len(seen)
            continue
        value = values[index]
        sets = dict(signature)
        before = sets.get(value, klass.initial)
        for output, target in outgoing.get((state, letters[index]), ()):
            after = klass.step(before, output)
            if not after:
                continue
            node = (index + 1, target, tuple(sorted({**sets, value: after}.items(), key=lambda kv: kv[0])))
            if node not in seen:
                seen.add(node)
                stack.append(node)
    LOGGER.debug({"event": "da_search_done", "accepted": False, "explored": len(seen)})
    return False, len(seen)


def da_accepts(automaton: DataAutomaton, w: AttributedWord) -> bool:
    return da_search(automaton, w)[0]


def da_product(left: DataAutomaton, right: DataAutomaton) -> DataAutomaton:
    """Pairs base states, outputs and class states; accepts the intersection."""

    if left.base.input_alphabet != right.base.input_alphabet:
        raise AutomatonError("data automata over different input alphabets")
    lb, rb = left.base, right.base
    base = Transducer(
        input_alphabet=lb.input_alphabet,
        output_alphabet=frozenset((x, y) for x in lb.output_alphabet for y in rb.output_alphabet),
        states=frozenset((p, q) for p in lb.states for q in rb.states),
        initial=(lb.initial, rb.initial),
        transitions=frozenset(
            ((p, q), letter, (x, y), (p2, q2))
            for p, letter, x, p2 in lb.transitions
            for q, other, y, q2 in rb.transitions
            if letter == other
        ),
        accepting=frozenset((p, q) for p in lb.accepting for q in rb.accepting),
    )
    lc, rc = left.klass, right.klass
    klass = Nfa(
        alphabet=base.output_alphabet,
        states=frozenset((s, t) for s in lc.states for t in rc.states),
        initial=frozenset((s, t) for s in lc.initial for t in rc.initial),
        transitions=frozenset(
            ((s, t), (x, y), (s2, t2)) for s, x, s2 in lc.transitions for t, y, t2 in rc.transitions
        ),
        accepting=frozenset((s, t) for s in lc.accepting for t in rc.accepting),
    )
    LOGGER.debug({"event": "da_product", "base_states": len(base.states), "class_states": len(klass.states)})
    return DataAutomaton(base, klass)


def universal_automaton(input_alphabet: Iterable[Iterable[str]]) -> DataAutomaton:
    letters = frozenset(_letter(letter) for letter in input_alphabet)
    base = Transducer(
        letters, frozenset({"*"}), frozenset({"u"}), "u", frozenset(("u", letter, "*", "u") for letter in letters), frozenset({"u"})
    )
    klass = Nfa(frozenset({"*"}), frozenset({"c"}), frozenset({"c"}), frozenset({("c", "*", "c")}), frozenset({"c"}))
    return DataAutomaton(base, klass)


def letters_over(props: Iterable[str]) -> frozenset[Letter]:
    """Every subset of ``props``, the usual input alphabet."""

    items = sorted(props)
    found = {frozenset()}
    for prop in items:
        found |= {letter | {prop} for letter in found}
    return frozenset(found)


# --- JSON ---------------------------------------------------------------------------------


def _to_json(item: Any) -> Any:
    if isinstance(item, tuple):
        return [_to_json(part) for part in item]
    return item


def _from_json(item: Any) -> Any:
    if isinstance(item, list):
        return tuple(_from_json(part) for part in item)
    return item


def _sorted(items: Iterable[Any]) -> list[Any]:
    return sorted((_to_json(item) for item in items), key=repr)


def dump_automaton(automaton: RegisterAutomaton | DataAutomaton) -> dict:
    if isinstance(automaton, RegisterAutomaton):
        return {
            "kind": "register",
            "alphabet": sorted(sorted(letter) for letter in automaton.alphabet),
            "states": _sorted(automaton.states),
            "initial": _to_json(automaton.initial),
            "registers": automaton.registers,
            "compare": [
                {"from": _to_json(m.source), "register": m.register, "letter": sorted(m.letter), "to": _to_json(m.target)}
                for m in automaton.compares
            ],
            "store": [
                {"from": _to_json(m.source), "letter": sorted(m.letter), "to": _to_json(m.target), "register": m.register}
                for m in automaton.stores
            ],
            "accepting": _sorted(automaton.accepting),
        }
    base, klass = automaton.base, automaton.klass
    return {
        "kind": "data",
        "base": {
            "input_alphabet": sorted(sorted(letter) for letter in base.input_alphabet),
            "output_alphabet": _sorted(base.output_alphabet),
            "states": _sorted(base.states),
            "initial": _to_json(base.initial),
            "transitions": sorted(
                (
                    {"from": _to_json(s), "letter": sorted(letter), "output": _to_json(x), "to": _to_json(t)}
                    for s, letter, x, t in base.transitions
                ),
                key=repr,
            ),
            "accepting": _sorted(base.accepting),
        },
        "class": {
            "alphabet": _sorted(klass.alphabet),
            "states": _sorted(klass.states),
            "initial": _sorted(klass.initial),
            "transitions": sorted(
                ({"from": _to_json(s), "symbol": _to_json(x), "to": _to_json(t)} for s, x, t in klass.transitions),
                key=repr,
            ),
            "accepting": _sorted(klass.accepting),
        },
    }


def load_automaton(data: Mapping[str, Any]) -> RegisterAutomaton | DataAutomaton:
    try:
        kind = data["kind"]
        if kind == "register":
            return RegisterAutomaton(
                alphabet=frozenset(_letter(letter) for letter in data["alphabet"]),
                states=frozenset(_from_json(s) for s in data["states"]),
                initial=_from_json(data["initial"]),
                registers=int(data["registers"]),
                compares=tuple(
                    Compare(_from_json(m["from"]), int(m["register"]), _letter(m["letter"]), _from_json(m["to"]))
                    for m in data.get("compare", ())
                ),
                stores=tuple(
                    Store(_from_json(m["from"]), _letter(m["letter"]), _from_json(m["to"]), int(m["register"]))
                    for m in data.get("store", ())
                ),
                accepting=frozenset(_from_json(s) for s in data["accepting"]),
            )
        if kind == "data":
            base, klass = data["base"], data["class"]
            return DataAutomaton(
                Transducer(
                    input_alphabet=frozenset(_letter(letter) for letter in base["input_alphabet"]),
                    output_alphabet=frozenset(_from_json(x) for x in base["output_alphabet"]),
                    states=frozenset(_from_json(s) for s in base["states"]),
                    initial=_from_json(base["initial"]),
                    transitions=frozenset(
                        (_from_json(m["from"]), _letter(m["letter"]), _from_json(m["output"]), _from_json(m["to"]))
                        for m in base["transitions"]
                    ),
                    accepting=frozenset(_from_json(s) for s in base["accepting"]),
                ),
                Nfa(
                    alphabet=frozenset(_from_json(x) for x in klass["alphabet"]),
                    states=frozenset(_from_json(s) for s in klass["states"]),
                    initial=frozenset(_from_json(s) for s in klass["initial"]),
                    transitions=frozenset(
                        (_from_json(m["from"]), _from_json(m["symbol"]), _from_json(m["to"])) for m in klass["transitions"]
                    ),
                    accepting=frozenset(_from_json(s) for s in klass["accepting"]),
                ),
            )
    except (KeyError, TypeError, ValueError) as exc:
        raise AutomatonError(f"malformed automaton JSON: {exc}") from exc
    raise AutomatonError(f"unknown automaton kind {data.get('kind')!r}")
