"""Formula AST for Basic Data LTL and its extensions.

Three layers share the Boolean nodes ``Not``/``And``/``Or``:

* position formulas (evaluated at a position),
* class formulas (evaluated at a position relative to a frozen value), found
  under ``Class`` and inside ``XEq``/``YEq``/``UEq``/``SEq``,
* U-subformulas (positive combinations of ``Lift``, ``AttrIs`` and
  ``AttrNeq``), found as the operands of ``UneqUntil``/``UneqSince``.

The layer of a node is fixed by its context. ``Lift`` embeds a position formula
into one of the value layers. A formula is *canonical* when no Boolean node of a
value layer has only ``Lift`` children; the parser and the ``lifted_*``
constructors only build canonical formulas, and ``parse(to_text(f)) == f`` holds
for canonical ``f``.
"""

from __future__ import annotations

from collections.abc import Iterator
from dataclasses import dataclass
from enum import Enum


class Layer(str, Enum):
    POSITION = "position"
    CLASS = "class"
    USUB = "usub"


class Formula:
    __slots__ = ()

    def __str__(self) -> str:
        return to_text(self)


# --- Shared -----------------------------------------------------------------


@dataclass(frozen=True, slots=True)
class Top(Formula):
    pass


@dataclass(frozen=True, slots=True)
class Bottom(Formula):
    pass


@dataclass(frozen=True, slots=True)
class Not(Formula):
    sub: Formula


@dataclass(frozen=True, slots=True)
class And(Formula):
    left: Formula
    right: Formula


@dataclass(frozen=True, slots=True)
class Or(Formula):
    left: Formula
    right: Formula


# --- Position layer ---------------------------------------------------------


@dataclass(frozen=True, slots=True)
class Prop(Formula):
    name: str


@dataclass(frozen=True, slots=True)
class Next(Formula):
    sub: Formula


@dataclass(frozen=True, slots=True)
class Prev(Formula):
    sub: Formula


@dataclass(frozen=True, slots=True)
class Until(Formula):
    left: Formula
    right: Formula


@dataclass(frozen=True, slots=True)
class Since(Formula):
    left: Formula
    right: Formula


@dataclass(frozen=True, slots=True)
class Class(Formula):
    """Freeze ``attr``, move by ``shift`` and evaluate a class formula."""

    shift: int
    attr: str
    body: Formula


@dataclass(frozen=True, slots=True)
class UneqUntil(Formula):
    attr: str
    shift: int
    inter: Formula
    target: Formula


@dataclass(frozen=True, slots=True)
class UneqSince(Formula):
    attr: str
    shift: int
    inter: Formula
    target: Formula


@dataclass(frozen=True, slots=True)
class FromNow(Formula):
    """Evaluate on the suffix starting here, at its first position."""

    sub: Formula


@dataclass(frozen=True, slots=True)
class UpToNow(Formula):
    """Evaluate on the prefix ending here, at its last position."""

    sub: Formula


@dataclass(frozen=True, slots=True)
class XPair(Formula):
    first: str
    second: str
    sub: Formula


@dataclass(frozen=True, slots=True)
class YPair(Formula):
    first: str
    second: str
    sub: Formula


# --- Value layers -------------------------------------------------------------


@dataclass(frozen=True, slots=True)
class Lift(Formula):
    sub: Formula


@dataclass(frozen=True, slots=True)
class AttrIs(Formula):
    """``@a``: the attribute carries the frozen value."""

    attr: str


@dataclass(frozen=True, slots=True)
class AttrNeq(Formula):
    """``!=@a``: the attribute is present and differs from the frozen value."""

    attr: str


@dataclass(frozen=True, slots=True)
class XEq(Formula):
    sub: Formula


@dataclass(frozen=True, slots=True)
class YEq(Formula):
    sub: Formula


@dataclass(frozen=True, slots=True)
class UEq(Formula):
    left: Formula
    right: Formula


@dataclass(frozen=True, slots=True)
class SEq(Formula):
    left: Formula
    right: Formula


# U-subformula tests are the class-layer ``@a`` plus ``!=@a``.
AttrEq = AttrIs

TRUE = Top()
FALSE = Bottom()
LIFT_TRUE = Lift(TRUE)

EXTENDED_NODES = (UneqUntil, UneqSince, FromNow, UpToNow, XPair, YPair)


# --- Builders ---------------------------------------------------------------


def implies(left: Formula, right: Formula) -> Formula:
    return Or(Not(left), right)


def iff(left: Formula, right: Formula) -> Formula:
    return And(implies(left, right), implies(right, left))


def conj(*parts: Formula) -> Formula:
    if not parts:
        return TRUE
    result = parts[-1]
    for part in reversed(parts[:-1]):
        result = And(part, result)
    return result


def disj(*parts: Formula) -> Formula:
    if not parts:
        return FALSE
    result = parts[-1]
    for part in reversed(parts[:-1]):
        result = Or(part, result)
    return result


def next_n(k: int, sub: Formula) -> Formula:
    for _ in range(k):
        sub = Next(sub)
    return sub


def prev_n(k: int, sub: Formula) -> Formula:
    for _ in range(k):
        sub = Prev(sub)
    return sub


def eventually(sub: Formula) -> Formula:
    return Until(TRUE, sub)


def always(sub: Formula) -> Formula:
    return Not(Until(TRUE, Not(sub)))


def once(sub: Formula) -> Formula:
    return Since(TRUE, sub)


def historically(sub: Formula) -> Formula:
    return Not(Since(TRUE, Not(sub)))


def lifted_not(sub: Formula) -> Formula:
    if isinstance(sub, Lift):
        return Lift(Not(sub.sub))
    return Not(sub)


def lifted_and(left: Formula, right: Formula) -> Formula:
    if isinstance(left, Lift) and isinstance(right, Lift):
        return Lift(And(left.sub, right.sub))
    return And(left, right)


def lifted_or(left: Formula, right: Formula) -> Formula:
    if isinstance(left, Lift) and isinstance(right, Lift):
        return Lift(Or(left.sub, right.sub))
    return Or(left, right)


def lifted_conj(*parts: Formula) -> Formula:
    if not parts:
        return LIFT_TRUE
    result = parts[-1]
    for part in reversed(parts[:-1]):
        result = lifted_and(part, result)
    return result


def lifted_disj(*parts: Formula) -> Formula:
    if not parts:
        return Lift(FALSE)
    result = parts[-1]
    for part in reversed(parts[:-1]):
        result = lifted_or(part, result)
    return result


def lifted_implies(left: Formula, right: Formula) -> Formula:
    return lifted_or(lifted_not(left), right)


def class_eventually(sub: Formula) -> Formula:
    return UEq(LIFT_TRUE, sub)


def class_always(sub: Formula) -> Formula:
    return lifted_not(UEq(LIFT_TRUE, lifted_not(sub)))


def class_once(sub: Formula) -> Formula:
    return SEq(LIFT_TRUE, sub)


def class_historically(sub: Formula) -> Formula:
    return lifted_not(SEq(LIFT_TRUE, lifted_not(sub)))


def freeze_compare(attr: str, shift: int, other: str) -> Formula:
    """``@a=X^k@b``: the value of ``a`` here reappears on ``b`` ``k`` positions away."""

    return Class(shift, attr, AttrIs(other))


# --- Traversal ----------------------------------------------------------------


def children(node: Formula) -> tuple[Formula, ...]:
    match node:
        case Not(sub) | Next(sub) | Prev(sub) | FromNow(sub) | UpToNow(sub) | Lift(sub) | XEq(sub) | YEq(sub):
            return (sub,)
        case And(left, right) | Or(left, right) | Until(left, right) | Since(left, right):
            return (left, right)
        case UEq(left, right) | SEq(left, right):
            return (left, right)
        case Class(_, _, body):
            return (body,)
        case UneqUntil(_, _, inter, target) | UneqSince(_, _, inter, target):
            return (inter, target)
        case XPair(_, _, sub) | YPair(_, _, sub):
            return (sub,)
    return ()


def child_layer(node: Formula, layer: Layer) -> Layer:
    """Layer of the children of ``node`` when ``node`` sits in ``layer``."""

    if isinstance(node, Class):
        return Layer.CLASS
    if isinstance(node, (UneqUntil, UneqSince)):
        return Layer.USUB
    if isinstance(node, Lift):
        return Layer.POSITION
    if isinstance(node, (Next, Prev, Until, Since, FromNow, UpToNow, XPair, YPair)):
        return Layer.POSITION
    return layer


Path = tuple[int, ...]


def walk(node: Formula, layer: Layer = Layer.POSITION, path: Path = ()) -> Iterator[tuple[Path, Formula, Layer]]:
    """Pre-order ``(path, node, layer)`` triples; ``path`` lists child indices from the root."""

    yield path, node, layer
    inner = child_layer(node, layer)
    for index, child in enumerate(children(node)):
        yield from walk(child, inner, (*path, index))


def subformulas(node: Formula) -> list[tuple[Path, Formula, Layer]]:
    return list(walk(node))


def node_at(root: Formula, path: Path) -> Formula:
    node = root
    for index in path:
        node = children(node)[index]
    return node


def propositions(node: Formula) -> frozenset[str]:
    return frozenset(sub.name for _, sub, _ in walk(node) if isinstance(sub, Prop))


def attributes(node: Formula) -> frozenset[str]:
    found = set()
    for _, sub, _ in walk(node):
        match sub:
            case Class(_, attr, _) | UneqUntil(attr, _, _, _) | UneqSince(attr, _, _, _):
                found.add(attr)
            case AttrIs(attr) | AttrNeq(attr):
                found.add(attr)
            case XPair(first, second, _) | YPair(first, second, _):
                found.update((first, second))
    return frozenset(found)


def max_shift(node: Formula) -> int:
    shifts = [
        abs(sub.shift) for _, sub, _ in walk(node) if isinstance(sub, (Class, UneqUntil, UneqSince))
    ]
    return max(shifts, default=0)


def size(node: Formula) -> int:
    return sum(1 for _ in walk(node))


def has_extended(node: Formula) -> bool:
    return any(isinstance(sub, EXTENDED_NODES) for _, sub, _ in walk(node))


# --- Printer ------------------------------------------------------------------


def to_text(node: Formula) -> str:
    """Concrete syntax; every binary node is parenthesized."""

    match node:
        case Top():
            return "true"
        case Bottom():
            return "false"
        case Prop(name):
            return name
        case Lift(sub):
            return to_text(sub)
        case AttrIs(attr):
            return f"@{attr}"
        case AttrNeq(attr):
            return f"!=@{attr}"
        case Not(sub):
            return f"!{to_text(sub)}"
        case And(left, right):
            return f"({to_text(left)} & {to_text(right)})"
        case Or(left, right):
            return f"({to_text(left)} | {to_text(right)})"
        case Until(left, right):
            return f"({to_text(left)} U {to_text(right)})"
        case Since(left, right):
            return f"({to_text(left)} S {to_text(right)})"
        case UEq(left, right):
            return f"({to_text(left)} U= {to_text(right)})"
        case SEq(left, right):
            return f"({to_text(left)} S= {to_text(right)})"
        case UneqUntil(attr, shift, inter, target):
            return f"({to_text(inter)} U!{{{attr}}}[{shift}] {to_text(target)})"
        case UneqSince(attr, shift, inter, target):
            return f"({to_text(inter)} S!{{{attr}}}[{shift}] {to_text(target)})"
        case Next(sub):
            return f"X {to_text(sub)}"
        case Prev(sub):
            return f"Y {to_text(sub)}"
        case XEq(sub):
            return f"X= {to_text(sub)}"
        case YEq(sub):
            return f"Y= {to_text(sub)}"
        case FromNow(sub):
            return f"N {to_text(sub)}"
        case UpToNow(sub):
            return f"Nbar {to_text(sub)}"
        case Class(shift, attr, body):
            return f"C[{shift}]{{{attr}}} {to_text(body)}"
        case XPair(first, second, sub):
            return f"XX{{{first},{second}}} {to_text(sub)}"
        case YPair(first, second, sub):
            return f"YY{{{first},{second}}} {to_text(sub)}"
    raise TypeError(f"not a formula node: {node!r}")


