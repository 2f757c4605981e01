"""Valid extensions of 1-attributed words and their local consistency checks.

An extended word marks every subformula occurrence of a formula with the
positions where it holds. Occurrences are addressed by their path from the
root (see ``formula.walk``). Position formulas are marked with 1-based
positions; class formulas and U-subformulas with ``(position, value)`` pairs,
one per value occurring in the word. On top of the marks, ``=r`` holds at
``i`` when ``i + r`` is a position carrying the same value as ``i``.

``check_valid_wrt`` re-derives the marks of one occurrence from the marks of
its children with the connective's local rule. A shifted class quantifier
reads its anchor through ``=r``: when ``=shift`` holds at ``i`` the anchor is
read for its own value, otherwise for the value of ``i``. ``N`` and ``Nbar``
have no local rule and are re-evaluated on the suffix or prefix.
"""

from __future__ import annotations

import logging
from collections.abc import Iterable, Mapping
from dataclasses import dataclass, field, replace
from typing import Any

from dataltl_toolkit.services.formula import (
    And,
    AttrIs,
    AttrNeq,
    Bottom,
    Class,
    Formula,
    FromNow,
    Layer,
    Lift,
    Next,
    Not,
    Or,
    Path,
    Prev,
    Prop,
    SEq,
    Since,
    Top,
    UEq,
    UneqSince,
    UneqUntil,
    Until,
    UpToNow,
    XEq,
    XPair,
    YEq,
    YPair,
    children,
    max_shift,
    node_at,
    walk,
)
from dataltl_toolkit.services.semantics import Evaluator
from dataltl_toolkit.services.words import AttributedWord, DataValue, class_positions, is_complete
from dataltl_toolkit.utils.errors import FragmentError, ValidityError


def _build_logger() -> logging.Logger:
    return logging.getLogger("dataltl.validity")


LOGGER = _build_logger()

Item = Any  # int for position marks, (int, DataValue) for value-layer marks


@dataclass(frozen=True, slots=True)
class ExtendedWord:
    base: AttributedWord
    formula: Formula
    bound: int
    marks: Mapping[Path, frozenset]
    layers: Mapping[Path, Layer]
    eqr: Mapping[int, frozenset[int]] = field(default_factory=dict)

    @property
    def attr(self) -> str:
        return self.base.attrs_alphabet[0]

    def val(self, i: int) -> DataValue | None:
        return self.base.value(self.attr, i)

    def node(self, path: Path) -> Formula:
        return node_at(self.formula, path)

    def marked(self, path: Path) -> frozenset:
        try:
            return self.marks[path]
        except KeyError:
            raise ValidityError("missing required marks", {"path": list(path)}) from None

    def items(self, path: Path) -> list[Item]:
        """Every markable item of the occurrence at ``path``."""

        n = len(self.base)
        if self.layers[path] is Layer.POSITION:
            return list(range(1, n + 1))
        return [(i, d) for i in range(1, n + 1) for d in sorted(self.base.values())]

    def flip(self, path: Path, item: Item) -> ExtendedWord:
        current = self.marked(path)
        updated = current - {item} if item in current else current | {item}
        return replace(self, marks={**self.marks, path: frozenset(updated)})

    def flip_eqr(self, i: int, r: int) -> ExtendedWord:
        current = self.eqr.get(i, frozenset())
        updated = current - {r} if r in current else current | {r}
        return replace(self, eqr={**self.eqr, i: frozenset(updated)})

    def as_dict(self) -> dict:
        def render(item: Item) -> Any:
            return list(item) if isinstance(item, tuple) else item

        return {
            "bound": self.bound,
            "marks": {
                ".".join(map(str, path)) or "root": sorted(render(item) for item in items)
                for path, items in sorted(self.marks.items())
            },
            "eqr": {str(i): sorted(rs) for i, rs in sorted(self.eqr.items()) if rs},
        }


# --- Building ----------------------------------------------------------------------


def _require_one_attribute(w: AttributedWord) -> None:
    if len(w.attrs_alphabet) != 1 or not is_complete(w, w.attrs_alphabet):
        raise ValidityError("extended words need a word complete for exactly one attribute")


def equality_marks(w: AttributedWord, bound: int) -> dict[int, frozenset[int]]:
    """``=r`` for ``r`` in ``[-bound, -1] + [1, bound]`` at every position."""

    attr = w.attrs_alphabet[0]
    n = len(w)
    found = {}
    for i in range(1, n + 1):
        here = w.value(attr, i)
        found[i] = frozenset(
            r for r in range(-bound, bound + 1) if r and 1 <= i + r <= n and w.value(attr, i + r) == here
        )
    return found


def build_valid_extension(w: AttributedWord, phi: Formula, bound: int) -> ExtendedWord:
    _require_one_attribute(w)
    needed = max_shift(phi)
    if bound < needed:
        raise ValidityError(f"shift bound {bound} is below the formula's largest shift {needed}", {"bound": bound})

    ev = Evaluator(w)
    values = sorted(w.values())
    marks: dict[Path, frozenset] = {}
    layers: dict[Path, Layer] = {}
    for path, node, layer in walk(phi):
        layers[path] = layer
        if layer is Layer.POSITION:
            marks[path] = frozenset(k + 1 for k, holds in enumerate(ev.position(node)) if holds)
            continue
        lookup = ev.klass if layer is Layer.CLASS else ev.usub
        marks[path] = frozenset(
            (k + 1, d) for d in values for k, holds in enumerate(lookup(node, d)) if holds
        )
    ext = ExtendedWord(w, phi, bound, marks, layers, equality_marks(w, bound))
    LOGGER.debug({"event": "extension_built", "occurrences": len(marks), "length": len(w)})
    return ext


# --- Local rules ---------------------------------------------------------------------


def _anchor_value(ext: ExtendedWord, i: int, shift: int, d: DataValue) -> DataValue:
    """Value the class word is read for at ``i + shift``, resolved through ``=r`` at ``i``."""

    if shift and shift in ext.eqr.get(i, frozenset()):
        return ext.val(i + shift)
    return d


def _position_rule(ext: ExtendedWord, path: Path, node: Formula) -> frozenset[int]:
    w = ext.base
    n = len(w)
    everywhere = range(1, n + 1)
    sub = [ext.marked((*path, index)) for index in range(len(children(node)))]

    match node:
        case Top():
            return frozenset(everywhere)
        case Bottom():
            return frozenset()
        case Prop(name):
            return frozenset(i for i in everywhere if name in w.props_at(i))
        case Not():
            return frozenset(everywhere) - sub[0]
        case And():
            return sub[0] & sub[1]
        case Or():
            return sub[0] | sub[1]
        case Next():
            return frozenset(i for i in everywhere if i + 1 in sub[0])
        case Prev():
            return frozenset(i for i in everywhere if i - 1 in sub[0])
        case Until():
            own = ext.marked(path)
            return frozenset(i for i in everywhere if i in sub[1] or (i in sub[0] and i + 1 in own))
        case Since():
            own = ext.marked(path)
            return frozenset(i for i in everywhere if i in sub[1] or (i in sub[0] and i - 1 in own))
        case Class(shift, attr, _):
            found = set()
            for i in everywhere:
                d = w.value(attr, i)
                if d is None or not 1 <= i + shift <= n:
                    continue
                if (i + shift, _anchor_value(ext, i, shift, d)) in sub[0]:
                    found.add(i)
            return frozenset(found)
        case UneqUntil(attr, shift, _, _) | UneqSince(attr, shift, _, _):
            forward = isinstance(node, UneqUntil)
            found = set()
            for i in everywhere:
                d = w.value(attr, i)
                anchor = i + shift if forward else i - shift
                if d is None or not 1 <= anchor <= n:
                    continue
                scan = range(anchor, n + 1) if forward else range(anchor, 0, -1)
                for j in scan:
                    if (j, d) in sub[1]:
                        found.add(i)
                        break
                    if (j, d) not in sub[0]:
                        break
            return frozenset(found)
        case FromNow(inner):
            return frozenset(i for i in everywhere if Evaluator(w.suffix(i)).position(inner)[0])
        case UpToNow(inner):
            return frozenset(i for i in everywhere if Evaluator(w.prefix(i)).position(inner)[i - 1])
        case XPair(first, second, _) | YPair(first, second, _):
            forward = isinstance(node, XPair)
            found = set()
            for i in everywhere:
                pair = (w.value(first, i), w.value(second, i))
                if None in pair:
                    continue
                scan = range(i + 1, n + 1) if forward else range(i - 1, 0, -1)
                for j in scan:
                    if (w.value(first, j), w.value(second, j)) == pair:
                        if j in sub[0]:
                            found.add(i)
                        break
            return frozenset(found)
    raise FragmentError(f"no local rule for {type(node).__name__}")


def _value_rule(ext: ExtendedWord, path: Path, node: Formula) -> frozenset:
    w = ext.base
    n = len(w)
    values = sorted(w.values())
    domain = [(i, d) for i in range(1, n + 1) for d in values]
    sub = [ext.marked((*path, index)) for index in range(len(children(node)))]

    def members(d: DataValue) -> tuple[int, ...]:
        return class_positions(w, d).positions

    match node:
        case Lift():
            return frozenset((i, d) for i, d in domain if i in sub[0])
        case AttrIs(attr):
            return frozenset((i, d) for i, d in domain if w.value(attr, i) == d)
        case AttrNeq(attr):
            return frozenset(
                (i, d) for i, d in domain if w.value(attr, i) is not None and w.value(attr, i) != d
            )
        case Not():
            return frozenset(domain) - sub[0]
        case And():
            return sub[0] & sub[1]
        case Or():
            return sub[0] | sub[1]
        case XEq() | YEq():
            forward = isinstance(node, XEq)
            found = set()
            for i, d in domain:
                near = [j for j in members(d) if (j > i if forward else j < i)]
                if near:
                    j = near[0] if forward else near[-1]
                    if (j, d) in sub[0]:
                        found.add((i, d))
            return frozenset(found)
        case UEq() | SEq():
            forward = isinstance(node, UEq)
            own = ext.marked(path)
            found = set()
            for i, d in domain:
                ours = members(d)
                if i in ours:
                    if (i, d) in sub[1]:
                        found.add((i, d))
                        continue
                    if (i, d) not in sub[0]:
                        continue
                near = [j for j in ours if (j > i if forward else j < i)]
                if near and ((near[0] if forward else near[-1]), d) in own:
                    found.add((i, d))
            return frozenset(found)
    raise FragmentError(f"no local rule for {type(node).__name__} in a value layer")


def violations(ext: ExtendedWord, path: Path) -> list[Item]:
    """Items whose mark at ``path`` disagrees with the local rule."""

    node = ext.node(path)
    layer = ext.layers[path]
    expected = _position_rule(ext, path, node) if layer is Layer.POSITION else _value_rule(ext, path, node)
    actual = ext.marked(path)
    return sorted(expected ^ actual, key=lambda item: item if isinstance(item, tuple) else (item,))


def check_valid_wrt(ext: ExtendedWord, path: Path) -> bool:
    wrong = violations(ext, path)
    if wrong:
        LOGGER.debug({"event": "validity_violation", "path": list(path), "first": wrong[0]})
    return not wrong


def eqr_violations(ext: ExtendedWord) -> list[tuple[int, int]]:
    expected = equality_marks(ext.base, ext.bound)
    return [
        (i, r)
        for i in range(1, len(ext.base) + 1)
        for r in sorted(expected.get(i, frozenset()) ^ ext.eqr.get(i, frozenset()))
    ]


@dataclass(slots=True)
class ValidityReport:
    occurrences: dict[Path, list[Item]]
    eqr: list[tuple[int, int]]

    @property
    def valid(self) -> bool:
        return not self.eqr and not any(self.occurrences.values())

    def failing(self) -> list[Path]:
        return [path for path, wrong in self.occurrences.items() if wrong]

    def as_dict(self) -> dict:
        return {
            "valid": self.valid,
            "failing": [".".join(map(str, path)) or "root" for path in self.failing()],
            "eqr": [list(pair) for pair in self.eqr],
        }


def check_all(ext: ExtendedWord, paths: Iterable[Path] | None = None) -> ValidityReport:
    chosen = list(paths) if paths is not None else [path for path, _, _ in walk(ext.formula)]
    report = ValidityReport({path: violations(ext, path) for path in chosen}, eqr_violations(ext))
    LOGGER.info({"event": "validity_checked", "valid": report.valid, "failing": len(report.failing())})
    return report


def descendants(root: Formula, path: Path) -> list[Path]:
    """Strict descendant occurrences of the occurrence at ``path``."""

    return [sub_path for sub_path, _, _ in walk(node_at(root, path), path=path) if sub_path != path]
