"""Encoding of attributed words as 1-attributed words, and the matching translation.

Position ``i`` of a word over attributes ``a_1..a_m`` becomes a block of ``m``
positions. Block position ``k`` carries the propositions of ``i``, the marker
``att_k``, the presence marker ``R`` when ``a_k`` has a value at ``i``, and that
value on the single target attribute (a padding value otherwise).

Translated position formulas are block invariant: ``translate(chi)`` holds at
every position of block ``i`` iff ``chi`` holds at position ``i``. Class
formulas are translated relative to an anchor, a position of the block that
carries ``R`` and the frozen value.
"""

from __future__ import annotations

import logging
from dataclasses import dataclass

from dataltl_toolkit.config import DataLTLConfig, get_config
from dataltl_toolkit.services.formula import (
    LIFT_TRUE,
    TRUE,
    And,
    AttrIs,
    AttrNeq,
    Bottom,
    Class,
    Formula,
    Lift,
    Next,
    Not,
    Or,
    Prev,
    Prop,
    SEq,
    Since,
    Top,
    UEq,
    UneqSince,
    UneqUntil,
    Until,
    XEq,
    YEq,
    always,
    conj,
    disj,
    iff,
    implies,
    lifted_and,
    lifted_implies,
    lifted_not,
    lifted_or,
    next_n,
    prev_n,
)
from dataltl_toolkit.services.fragments import Fragment, classify, extended_shape
from dataltl_toolkit.services.semantics import CltlAtom
from dataltl_toolkit.services.words import AttributedWord, Position
from dataltl_toolkit.utils.errors import EncodingError, FragmentError, TranslationError


def _build_logger() -> logging.Logger:
    return logging.getLogger("dataltl.encoder")


LOGGER = _build_logger()


@dataclass(frozen=True, slots=True)
class EncodingScheme:
    attributes: tuple[str, ...]
    propositions: tuple[str, ...] = ()
    target: str = "a"
    present: str = "R"
    marker_prefix: str = "att"

    def __post_init__(self) -> None:
        if not self.attributes:
            raise EncodingError("an encoding scheme needs at least one attribute")
        if len(set(self.attributes)) != len(self.attributes):
            raise EncodingError("duplicate attributes in encoding scheme", {"attributes": list(self.attributes)})
        clash = set(self.reserved) & set(self.propositions)
        if clash:
            raise EncodingError("propositions clash with reserved names", {"names": sorted(clash)})

    @classmethod
    def for_word(cls, w: AttributedWord, **kwargs) -> EncodingScheme:
        return cls(tuple(w.attrs_alphabet), tuple(sorted(w.props_alphabet)), **kwargs)

    @property
    def width(self) -> int:
        return len(self.attributes)

    @property
    def markers(self) -> tuple[str, ...]:
        return tuple(f"{self.marker_prefix}{k}" for k in range(1, self.width + 1))

    @property
    def reserved(self) -> tuple[str, ...]:
        return (*self.markers, self.present)

    def marker(self, k: int) -> Prop:
        return Prop(f"{self.marker_prefix}{k}")

    def index(self, attr: str) -> int:
        """1-based slot of ``attr`` inside a block."""

        try:
            return self.attributes.index(attr) + 1
        except ValueError:
            raise EncodingError(f"attribute {attr!r} is not part of the encoding scheme", {"attr": attr})


# --- Words -------------------------------------------------------------------------


def _padding(w: AttributedWord, attr: str, i: int, mode: str, fresh: list[int]) -> int:
    if mode == "neighbour":
        for j in [*range(i + 1, len(w) + 1), *range(i - 1, 0, -1)]:
            value = w.value(attr, j)
            if value is not None:
                return value
    fresh[0] += 1
    return fresh[0]


def encode_word(w: AttributedWord, scheme: EncodingScheme, padding: str | None = None) -> AttributedWord:
    """Block encoding of ``w``; ``padding`` is ``fresh`` or ``neighbour``.

    ``fresh`` gives every absent slot its own new value. ``neighbour`` reuses the
    value of the same attribute at the next position carrying it (else the
    previous one, else a new value).
    """

    mode = padding or get_config().padding_mode
    stray = set(w.attrs_alphabet) - set(scheme.attributes)
    if stray:
        raise EncodingError("word uses attributes outside the scheme", {"attrs": sorted(stray)})
    clash = w.props_alphabet & set(scheme.reserved)
    if clash:
        raise EncodingError("word propositions clash with reserved names", {"names": sorted(clash)})

    fresh = [max(w.values(), default=-1)]
    positions = []
    for i, pos in enumerate(w.positions, start=1):
        for k, attr in enumerate(scheme.attributes, start=1):
            value = pos.value(attr)
            props = set(pos.props) | {scheme.markers[k - 1]}
            if value is None:
                value = _padding(w, attr, i, mode, fresh)
            else:
                props.add(scheme.present)
            positions.append(Position.of(props, {scheme.target: value}))

    alphabet = w.props_alphabet | set(scheme.propositions) | set(scheme.reserved)
    LOGGER.debug({"event": "word_encoded", "length": len(w), "width": scheme.width, "padding": mode})
    return AttributedWord(tuple(positions), frozenset(alphabet), (scheme.target,))


def decode_word(encoded: AttributedWord, scheme: EncodingScheme) -> AttributedWord:
    m = scheme.width
    if len(encoded) % m:
        raise EncodingError(f"length {len(encoded)} is not a multiple of the block width {m}")
    reserved = set(scheme.reserved)
    positions = []
    for start in range(0, len(encoded), m):
        block = encoded.positions[start : start + m]
        props = block[0].props - reserved
        values = {}
        for k, pos in enumerate(block, start=1):
            where = start + k
            markers = pos.props & set(scheme.markers)
            if markers != {scheme.markers[k - 1]}:
                raise EncodingError(f"position {where} must carry exactly {scheme.markers[k - 1]}", {"position": where})
            if pos.props - reserved != props:
                raise EncodingError(f"block starting at {start + 1} disagrees on propositions", {"position": where})
            value = pos.value(scheme.target)
            if value is None:
                raise EncodingError(f"position {where} carries no value", {"position": where})
            if scheme.present in pos.props:
                values[scheme.attributes[k - 1]] = value
        positions.append(Position.of(props, values))
    alphabet = encoded.props_alphabet - reserved
    return AttributedWord(tuple(positions), frozenset(alphabet), scheme.attributes)


def structure_formula(scheme: EncodingScheme) -> Formula:
    """Holds on exactly the words that are concatenations of well-formed blocks."""

    m = scheme.width
    att = [scheme.marker(k) for k in range(1, m + 1)]
    exactly_one = conj(
        disj(*att), *(Not(And(att[k], att[l])) for k in range(m) for l in range(k + 1, m))
    )
    last = Not(Next(TRUE))
    steps = [implies(att[k], Next(att[k + 1])) for k in range(m - 1)]
    agree = [
        implies(att[k], conj(*(iff(Prop(p), Next(Prop(p))) for p in scheme.propositions)))
        for k in range(m - 1)
    ]
    return conj(
        att[0],
        always(exactly_one),
        *(always(step) for step in steps),
        always(implies(att[m - 1], Or(last, Next(att[0])))),
        always(implies(last, att[m - 1])),
        *(always(rule) for rule in agree),
    )


# --- Navigation inside a block -------------------------------------------------------


def _move(offset: int, phi: Formula) -> Formula:
    return next_n(offset, phi) if offset >= 0 else prev_n(-offset, phi)


def to_slot(scheme: EncodingScheme, i: int, phi: Formula) -> Formula:
    """``t_i``: evaluate ``phi`` at slot ``i`` of the current block."""

    return conj(*(implies(scheme.marker(k), _move(i - k, phi)) for k in range(1, scheme.width + 1)))


def _holds_here(scheme: EncodingScheme, offset: int) -> Formula:
    """At ``offset`` from here: a present value equal to the value here."""

    return Class(offset, scheme.target, And(Lift(Prop(scheme.present)), AttrIs(scheme.target)))


def to_last(scheme: EncodingScheme, body: Formula) -> Formula:
    """``t_max``: evaluate the class formula ``body`` at the last position of this block carrying the frozen value."""

    m = scheme.width
    clauses = []
    for k in range(1, m + 1):
        options = []
        for step in range(0, m - k + 1):
            later = [Not(_holds_here(scheme, other)) for other in range(step + 1, m - k + 1)]
            options.append(conj(_holds_here(scheme, step), *later, Class(step, scheme.target, body)))
        clauses.append(implies(scheme.marker(k), disj(*options)))
    return conj(*clauses)


def to_first(scheme: EncodingScheme, body: Formula) -> Formula:
    """``t_min``: mirror of ``to_last``."""

    m = scheme.width
    clauses = []
    for k in range(1, m + 1):
        options = []
        for step in range(0, k):
            earlier = [Not(_holds_here(scheme, -other)) for other in range(step + 1, k)]
            options.append(conj(_holds_here(scheme, -step), *earlier, Class(-step, scheme.target, body)))
        clauses.append(implies(scheme.marker(k), disj(*options)))
    return conj(*clauses)


# --- Translation ---------------------------------------------------------------------


class _Translator:
    def __init__(self, scheme: EncodingScheme):
        self.scheme = scheme
        self.m = scheme.width
        self.a = scheme.target
        self.R = Prop(scheme.present)
        self.lift_R = Lift(self.R)

    def position(self, chi: Formula) -> Formula:
        m = self.m
        match chi:
            case Top() | Bottom() | Prop():
                return chi
            case Not(sub):
                return Not(self.position(sub))
            case And(left, right):
                return And(self.position(left), self.position(right))
            case Or(left, right):
                return Or(self.position(left), self.position(right))
            case Next(sub):
                return next_n(m, self.position(sub))
            case Prev(sub):
                return prev_n(m, self.position(sub))
            case Until(left, right):
                return Until(self.position(left), self.position(right))
            case Since(left, right):
                return Since(self.position(left), self.position(right))
            case Class(shift, attr, body):
                i = self.scheme.index(attr)
                return to_slot(self.scheme, i, And(self.R, self.pushed(body, shift * m, i)))
            case UneqUntil() | UneqSince():
                return self.extended(chi)
        raise TranslationError(f"{type(chi).__name__} has no translation to one attribute")

    def pushed(self, psi: Formula, shift: int, i: int) -> Formula:
        """Position formula at slot ``i`` for ``psi`` evaluated ``shift`` positions away."""

        m, a = self.m, self.a
        match psi:
            case Lift(sub):
                inner = self.position(sub)
                return inner if shift == 0 else Class(shift, a, Lift(inner))
            case AttrIs(attr):
                j = self.scheme.index(attr)
                return Class(shift + j - i, a, And(self.lift_R, AttrIs(a)))
            case Not(sub):
                return And(Class(shift, a, LIFT_TRUE), Not(self.pushed(sub, shift, i)))
            case And(left, right):
                return And(self.pushed(left, shift, i), self.pushed(right, shift, i))
            case Or(left, right):
                return Or(self.pushed(left, shift, i), self.pushed(right, shift, i))
            case XEq(sub):
                return Class(shift + m - i, a, self.next_class(sub))
            case YEq(sub):
                return Class(shift + 1 - i, a, self.prev_class(sub))
            case UEq(left, right):
                return Class(shift + 1 - i, a, self.class_until(left, right, UEq))
            case SEq(left, right):
                return Class(shift + m - i, a, self.class_until(left, right, SEq))
        raise FragmentError(f"{type(psi).__name__} is not a class formula")

    def anchored(self, psi: Formula) -> Formula:
        """Class formula at a position carrying ``R`` and the frozen value."""

        a = self.a
        match psi:
            case Lift(sub):
                return Lift(self.position(sub))
            case AttrIs(attr):
                j = self.scheme.index(attr)
                clauses = [
                    implies(self.scheme.marker(k), _holds_here(self.scheme, j - k))
                    for k in range(1, self.m + 1)
                ]
                return Lift(conj(*clauses))
            case Not(sub):
                return lifted_not(self.anchored(sub))
            case And(left, right):
                return lifted_and(self.anchored(left), self.anchored(right))
            case Or(left, right):
                return lifted_or(self.anchored(left), self.anchored(right))
            case XEq(sub):
                return Lift(to_last(self.scheme, self.next_class(sub)))
            case YEq(sub):
                return Lift(to_first(self.scheme, self.prev_class(sub)))
            case UEq(left, right):
                return self.class_until(left, right, UEq)
            case SEq(left, right):
                return self.class_until(left, right, SEq)
        raise FragmentError(f"{type(psi).__name__} is not a class formula")

    def next_class(self, sub: Formula) -> Formula:
        return XEq(UEq(lifted_not(self.lift_R), lifted_and(self.lift_R, self.anchored(sub))))

    def prev_class(self, sub: Formula) -> Formula:
        return YEq(SEq(lifted_not(self.lift_R), lifted_and(self.lift_R, self.anchored(sub))))

    def class_until(self, left: Formula, right: Formula, ctor) -> Formula:
        return ctor(lifted_implies(self.lift_R, self.anchored(left)), lifted_and(self.lift_R, self.anchored(right)))

    def extended(self, chi: UneqUntil | UneqSince) -> Formula:
        # one test attribute per operator, so the intermediate slot never lies past the target slot
        shape = extended_shape(chi)
        m, a, R = self.m, self.a, self.R
        j = self.scheme.index(shape.attr)
        k = self.scheme.index(shape.test_attr)

        free = Lift(Or(self.position(shape.rho), Not(self.scheme.marker(k))))
        same = And(AttrIs(a), Lift(And(R, self.position(shape.rho_eq))))
        other = And(AttrNeq(a), Lift(And(R, self.position(shape.rho_neq))))
        target = And(AttrNeq(a), Lift(conj(R, self.scheme.marker(k), self.position(shape.tau))))
        inter = Or(free, Or(same, other))
        if shape.since:
            body: Formula = UneqSince(a, shape.shift * m + j - m, inter, target)
        else:
            body = UneqUntil(a, shape.shift * m + 1 - j, inter, target)
        return to_slot(self.scheme, j, And(R, body))


def translate(chi: Formula, scheme: EncodingScheme, config: DataLTLConfig | None = None) -> Formula:
    """One-attribute formula that holds on ``encode_word(w)`` iff ``chi`` holds on ``w``."""

    tag = classify(chi, config=config, check_implication=False)
    if tag.fragment is Fragment.BEYOND:
        raise TranslationError(f"cannot translate a formula beyond the decidable fragments ({tag.reason})")
    return _Translator(scheme).position(chi)


def translate_cltl(atom: CltlAtom) -> Formula:
    if atom.shift is None:
        return Class(0, atom.left, XEq(UEq(LIFT_TRUE, AttrIs(atom.right))))
    return Class(atom.shift, atom.left, AttrIs(atom.right))
