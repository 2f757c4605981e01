"""Attributed words, class views and projections.

Positions are 1-based in every public function. A missing attribute models the
absent value, so there is no sentinel data value that could collide with a real
one. Data values are non-negative integer tokens compared only for equality.
"""

from __future__ import annotations

from collections.abc import Iterable, Mapping, Sequence
from dataclasses import dataclass, field

from dataltl_toolkit.utils.errors import PositionOutOfRangeError, WordFormatError
from dataltl_toolkit.utils.splitmix import SplitMix64

DataValue = int


@dataclass(frozen=True, slots=True)
class Position:
    props: frozenset[str]
    attrs: tuple[tuple[str, DataValue], ...] = ()

    @classmethod
    def of(cls, props: Iterable[str] = (), attrs: Mapping[str, DataValue] | None = None) -> Position:
        return cls(frozenset(props), tuple(sorted((attrs or {}).items())))

    def value(self, attr: str) -> DataValue | None:
        for name, value in self.attrs:
            if name == attr:
                return value
        return None

    def attr_map(self) -> dict[str, DataValue]:
        return dict(self.attrs)


@dataclass(frozen=True, slots=True)
class AttributedWord:
    positions: tuple[Position, ...]
    props_alphabet: frozenset[str]
    attrs_alphabet: tuple[str, ...]

    def __post_init__(self) -> None:
        if len(set(self.attrs_alphabet)) != len(self.attrs_alphabet):
            raise WordFormatError("attribute alphabet contains duplicates")
        declared = set(self.attrs_alphabet)
        for index, pos in enumerate(self.positions, start=1):
            stray_props = pos.props - self.props_alphabet
            if stray_props:
                raise WordFormatError(
                    f"undeclared propositions at position {index}",
                    {"position": index, "props": sorted(stray_props)},
                )
            for name, value in pos.attrs:
                if name not in declared:
                    raise WordFormatError(
                        f"undeclared attribute {name!r} at position {index}",
                        {"position": index, "attr": name},
                    )
                if not isinstance(value, int) or isinstance(value, bool) or value < 0:
                    raise WordFormatError(
                        f"data value at position {index} is not a non-negative integer token",
                        {"position": index, "attr": name, "value": value},
                    )

    def __len__(self) -> int:
        return len(self.positions)

    def at(self, i: int) -> Position:
        if not 1 <= i <= len(self.positions):
            raise PositionOutOfRangeError(i, len(self.positions))
        return self.positions[i - 1]

    def value(self, attr: str, i: int) -> DataValue | None:
        return self.at(i).value(attr)

    def props_at(self, i: int) -> frozenset[str]:
        return self.at(i).props

    def values(self) -> frozenset[DataValue]:
        return frozenset(value for pos in self.positions for _, value in pos.attrs)

    def slice(self, start: int, stop: int) -> AttributedWord:
        """Positions ``start..stop`` (1-based, inclusive) over the same alphabets."""

        return AttributedWord(self.positions[start - 1 : stop], self.props_alphabet, self.attrs_alphabet)

    def suffix(self, i: int) -> AttributedWord:
        return self.slice(i, len(self))

    def prefix(self, i: int) -> AttributedWord:
        return self.slice(1, i)


@dataclass(frozen=True, slots=True)
class ClassView:
    owner: AttributedWord = field(repr=False)
    value: DataValue
    positions: tuple[int, ...]

    def class_word(self) -> AttributedWord:
        return AttributedWord(
            tuple(self.owner.positions[i - 1] for i in self.positions),
            self.owner.props_alphabet,
            self.owner.attrs_alphabet,
        )


def make_word(
    rows: Sequence[tuple[Iterable[str], Mapping[str, DataValue]]],
    props_alphabet: Iterable[str] | None = None,
    attrs_alphabet: Sequence[str] | None = None,
) -> AttributedWord:
    """Build a word from ``(props, attrs)`` rows; alphabets default to what the rows use."""

    positions = tuple(Position.of(props, attrs) for props, attrs in rows)
    if props_alphabet is None:
        props_alphabet = {p for pos in positions for p in pos.props}
    if attrs_alphabet is None:
        attrs_alphabet = sorted({name for pos in positions for name, _ in pos.attrs})
    return AttributedWord(positions, frozenset(props_alphabet), tuple(attrs_alphabet))


def data_word(
    values: Sequence[DataValue | None],
    props: Sequence[Iterable[str]] | None = None,
    attr: str = "a",
    props_alphabet: Iterable[str] | None = None,
) -> AttributedWord:
    """A word over a single attribute; ``None`` leaves the attribute absent."""

    labels = props if props is not None else [()] * len(values)
    if len(labels) != len(values):
        raise WordFormatError("props and values differ in length")
    rows = [(label, {} if value is None else {attr: value}) for label, value in zip(labels, values)]
    return make_word(rows, props_alphabet, [attr])


# --- Operations ----------------------------------------------------------------


def class_positions(w: AttributedWord, d: DataValue) -> ClassView:
    found = tuple(
        index
        for index, pos in enumerate(w.positions, start=1)
        if any(value == d for _, value in pos.attrs)
    )
    return ClassView(w, d, found)


def string_projection(w: AttributedWord) -> tuple[frozenset[str], ...]:
    return tuple(pos.props for pos in w.positions)


def is_complete(w: AttributedWord, attrs: Iterable[str]) -> bool:
    wanted = frozenset(attrs)
    return all(frozenset(name for name, _ in pos.attrs) == wanted for pos in w.positions)


def canonicalize_values(w: AttributedWord) -> AttributedWord:
    """Rename values to 0, 1, 2, ... in order of first occurrence.

    Positions are scanned left to right and, inside a position, attributes in
    declared-alphabet order.
    """

    renaming: dict[DataValue, DataValue] = {}
    positions = []
    for pos in w.positions:
        current = pos.attr_map()
        renamed = {}
        for name in w.attrs_alphabet:
            if name in current:
                renamed[name] = renaming.setdefault(current[name], len(renaming))
        positions.append(Position(pos.props, tuple(sorted(renamed.items()))))
    return AttributedWord(tuple(positions), w.props_alphabet, w.attrs_alphabet)


def rename_values(w: AttributedWord, renaming: Mapping[DataValue, DataValue]) -> AttributedWord:
    """Apply an injective renaming; values missing from ``renaming`` are kept."""

    positions = tuple(
        Position(pos.props, tuple((name, renaming.get(value, value)) for name, value in pos.attrs))
        for pos in w.positions
    )
    return AttributedWord(positions, w.props_alphabet, w.attrs_alphabet)


def equality_pattern(w: AttributedWord) -> frozenset[tuple[int, str, int, str]]:
    slots = [(index, name, value) for index, pos in enumerate(w.positions, start=1) for name, value in pos.attrs]
    return frozenset(
        (i, a, j, b) for i, a, left in slots for j, b, right in slots if left == right
    )


def random_word(
    seed: int | SplitMix64,
    length: int,
    props: Sequence[str] = ("p", "q"),
    attrs: Sequence[str] = ("a",),
    max_values: int = 3,
    presence: tuple[int, int] = (1, 1),
) -> AttributedWord:
    """Reproducible random word.

    Per position, in this order: one ``chance(1, 2)`` draw per proposition, then
    per attribute a ``chance(*presence)`` draw and, if present, ``below(max_values)``
    for its value.
    """

    rng = seed if isinstance(seed, SplitMix64) else SplitMix64(seed)
    rows = []
    for _ in range(length):
        label = [p for p in props if rng.chance(1, 2)]
        values = {}
        for name in attrs:
            if rng.chance(*presence):
                values[name] = rng.below(max_values)
        rows.append((label, values))
    return make_word(rows, props, attrs)


# --- Worked examples -----------------------------------------------------------


def herd_example_word() -> AttributedWord:
    """Ten positions over attribute ``a`` with the rho/tau propositions of the herd example."""

    rho_eq = {1, 3, 4, 6}
    rho_neq = {5, 7, 8, 9}
    tau = {4, 10}
    values = [1, 2, 1, 1, 2, 1, 2, 2, 2, 3]
    rows = []
    for i, value in enumerate(values, start=1):
        label = set()
        if i in rho_eq:
            label.add("rho_eq")
        if i in rho_neq:
            label.add("rho_neq")
        if i in tau:
            label.add("tau")
        rows.append((label, {"a": value}))
    return make_word(rows, {"rho_eq", "rho_neq", "tau"}, ["a"])


HERD_EXAMPLE_PSI = "((@a & rho_eq) | (!=@a & rho_neq)) U!{a}[2] (!=@a & tau)"
HERD_EXAMPLE_MARKS = frozenset({3, 4, 6, 7})


def block_example_word() -> AttributedWord:
    """Three positions over attributes ``att1``/``att2`` (d1..d4 are tokens 1..4)."""

    return make_word(
        [({"p"}, {"att1": 1}), ({"q"}, {"att2": 2}), ({"p", "q"}, {"att1": 3, "att2": 4})],
        {"p", "q"},
        ["att1", "att2"],
    )


def client_server_word() -> AttributedWord:
    """The three-server run (servers A, B, C) with client numbers as values."""

    rows = [
        ({"q_A", "q_B", "i_C"}, {"A": 1, "B": 2}),
        ({"q_A", "q_B", "q_C"}, {"A": 2, "B": 3, "C": 1}),
        ({"s_A", "q_B", "s_C"}, {"A": 2, "B": 4, "C": 1}),
        ({"s_A", "s_B", "i_C"}, {"A": 1, "B": 2}),
        ({"i_A", "s_B", "q_C"}, {"B": 3, "C": 2}),
        ({"i_A", "s_B", "s_C"}, {"B": 4, "C": 2}),
    ]
    alphabet = {f"{action}_{server}" for action in "qsi" for server in "ABC"}
    return make_word(rows, alphabet, ["A", "B", "C"])


def block_example_encoded_word() -> AttributedWord:
    """``block_example_word`` as a 1-attributed block word; absent slots are padded with a nearby value."""

    rows = [
        ({"p", "att1", "R"}, 1),
        ({"p", "att2"}, 2),
        ({"q", "att1"}, 3),
        ({"q", "att2", "R"}, 2),
        ({"p", "q", "att1", "R"}, 3),
        ({"p", "q", "att2", "R"}, 4),
    ]
    return make_word([(label, {"a": value}) for label, value in rows], {"p", "q", "att1", "att2", "R"}, ["a"])
