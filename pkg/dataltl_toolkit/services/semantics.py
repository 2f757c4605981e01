"""Reference evaluator.

Evaluation labels the formula bottom up: a position formula gets a truth
vector over the positions of the word, a class formula or U-subformula gets
one truth vector per frozen value (computed on demand). Vectors are 0-based
internally; every public function takes 1-based positions.

Every other module treats this evaluator as ground truth.
"""

from __future__ import annotations

import logging
from collections.abc import Sequence
from dataclasses import dataclass

from dataltl_toolkit.services.formula import (
    And,
    AttrIs,
    AttrNeq,
    Bottom,
    Class,
    Formula,
    FromNow,
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
    UpToNow,
    XEq,
    XPair,
    YEq,
    YPair,
)
from dataltl_toolkit.services.words import AttributedWord, DataValue, class_positions, is_complete
from dataltl_toolkit.utils.errors import FragmentError, PositionOutOfRangeError, WordFormatError


def _build_logger() -> logging.Logger:
    return logging.getLogger("dataltl.semantics")


LOGGER = _build_logger()

Vector = list[bool]


class Evaluator:
    """Memoizing evaluator bound to one word.

    Memo tables are keyed by node identity, so one evaluator can serve any
    number of formulas while they stay alive.
    """

    def __init__(self, word: AttributedWord):
        self.word = word
        self.n = len(word)
        self._attrs = [pos.attr_map() for pos in word.positions]
        self._props = [pos.props for pos in word.positions]
        self._class_members: dict[DataValue, set[int]] = {}
        self._pos_memo: dict[int, Vector] = {}
        self._value_memo: dict[tuple[int, DataValue, str], Vector] = {}
        self._keep: list[Formula] = []

    # --- word access (0-based) -----------------------------------------------

    def val(self, attr: str, k: int) -> DataValue | None:
        return self._attrs[k].get(attr)

    def members(self, d: DataValue) -> set[int]:
        found = self._class_members.get(d)
        if found is None:
            found = {i - 1 for i in class_positions(self.word, d).positions}
            self._class_members[d] = found
        return found

    # --- position layer --------------------------------------------------------

    def position(self, node: Formula) -> Vector:
        key = id(node)
        cached = self._pos_memo.get(key)
        if cached is None:
            cached = self._position(node)
            self._pos_memo[key] = cached
            self._keep.append(node)
        return cached

    def _position(self, node: Formula) -> Vector:
        n = self.n
        match node:
            case Top():
                return [True] * n
            case Bottom():
                return [False] * n
            case Prop(name):
                return [name in props for props in self._props]
            case Not(sub):
                return [not v for v in self.position(sub)]
            case And(left, right):
                return [a and b for a, b in zip(self.position(left), self.position(right))]
            case Or(left, right):
                return [a or b for a, b in zip(self.position(left), self.position(right))]
            case Next(sub):
                inner = self.position(sub)
                return [k + 1 < n and inner[k + 1] for k in range(n)]
            case Prev(sub):
                inner = self.position(sub)
                return [k >= 1 and inner[k - 1] for k in range(n)]
            case Until(left, right):
                return _until(self.position(left), self.position(right))
            case Since(left, right):
                return _since(self.position(left), self.position(right))
            case Class(shift, attr, body):
                out = [False] * n
                for k in range(n):
                    d = self.val(attr, k)
                    target = k + shift
                    if d is not None and 0 <= target < n:
                        out[k] = self.klass(body, d)[target]
                return out
            case UneqUntil(attr, shift, inter, target):
                return self._uneq(attr, shift, inter, target, forward=True)
            case UneqSince(attr, shift, inter, target):
                return self._uneq(attr, shift, inter, target, forward=False)
            case FromNow(sub):
                return [Evaluator(self.word.suffix(k + 1)).position(sub)[0] for k in range(n)]
            case UpToNow(sub):
                return [Evaluator(self.word.prefix(k + 1)).position(sub)[k] for k in range(n)]
            case XPair(first, second, sub):
                return self._pair(first, second, sub, forward=True)
            case YPair(first, second, sub):
                return self._pair(first, second, sub, forward=False)
        raise FragmentError(f"not a position formula: {type(node).__name__}")

    def _uneq(self, attr: str, shift: int, inter: Formula, target: Formula, forward: bool) -> Vector:
        n = self.n
        out = [False] * n
        runs: dict[DataValue, Vector] = {}
        for k in range(n):
            d = self.val(attr, k)
            anchor = k + shift if forward else k - shift
            if d is None or not 0 <= anchor < n:
                continue
            run = runs.get(d)
            if run is None:
                step = _until if forward else _since
                run = step(self.usub(inter, d), self.usub(target, d))
                runs[d] = run
            out[k] = run[anchor]
        return out

    def _pair(self, first: str, second: str, sub: Formula, forward: bool) -> Vector:
        n = self.n
        inner = self.position(sub)
        out = [False] * n
        for k in range(n):
            a, b = self.val(first, k), self.val(second, k)
            if a is None or b is None:
                continue
            scan = range(k + 1, n) if forward else range(k - 1, -1, -1)
            for j in scan:
                if self.val(first, j) == a and self.val(second, j) == b:
                    out[k] = inner[j]
                    break
        return out

    # --- value layers ----------------------------------------------------------

    def klass(self, node: Formula, d: DataValue) -> Vector:
        return self._value(node, d, "class")

    def usub(self, node: Formula, d: DataValue) -> Vector:
        return self._value(node, d, "usub")

    def _value(self, node: Formula, d: DataValue, layer: str) -> Vector:
        key = (id(node), d, layer)
        cached = self._value_memo.get(key)
        if cached is None:
            cached = self._compute_value(node, d, layer)
            self._value_memo[key] = cached
            self._keep.append(node)
        return cached

    def _compute_value(self, node: Formula, d: DataValue, layer: str) -> Vector:
        n = self.n
        match node:
            case Lift(sub):
                return list(self.position(sub))
            case AttrIs(attr):
                return [self.val(attr, k) == d for k in range(n)]
            case AttrNeq(attr) if layer == "usub":
                return [self.val(attr, k) is not None and self.val(attr, k) != d for k in range(n)]
            case Not(sub) if layer == "class":
                return [not v for v in self._value(sub, d, layer)]
            case And(left, right):
                return [a and b for a, b in zip(self._value(left, d, layer), self._value(right, d, layer))]
            case Or(left, right):
                return [a or b for a, b in zip(self._value(left, d, layer), self._value(right, d, layer))]
            case XEq(sub) if layer == "class":
                return self._class_step(self.klass(sub, d), d, forward=True)
            case YEq(sub) if layer == "class":
                return self._class_step(self.klass(sub, d), d, forward=False)
            case UEq(left, right) if layer == "class":
                return self._class_until(self.klass(left, d), self.klass(right, d), d, forward=True)
            case SEq(left, right) if layer == "class":
                return self._class_until(self.klass(left, d), self.klass(right, d), d, forward=False)
        raise FragmentError(f"{type(node).__name__} is not allowed in a {layer} formula")

    def _class_step(self, inner: Vector, d: DataValue, forward: bool) -> Vector:
        n = self.n
        members = self.members(d)
        out = [False] * n
        nearest: int | None = None
        order = range(n - 1, -1, -1) if forward else range(n)
        for k in order:
            out[k] = nearest is not None and inner[nearest]
            if k in members:
                nearest = k
        return out

    def _class_until(self, left: Vector, right: Vector, d: DataValue, forward: bool) -> Vector:
        n = self.n
        members = self.members(d)
        out = [False] * n
        acc = False
        order = range(n - 1, -1, -1) if forward else range(n)
        for k in order:
            if k in members:
                acc = right[k] or (left[k] and acc)
            out[k] = acc
        return out


def _until(left: Sequence[bool], right: Sequence[bool]) -> Vector:
    n = len(left)
    out = [False] * n
    acc = False
    for k in range(n - 1, -1, -1):
        acc = right[k] or (left[k] and acc)
        out[k] = acc
    return out


def _since(left: Sequence[bool], right: Sequence[bool]) -> Vector:
    n = len(left)
    out = [False] * n
    acc = False
    for k in range(n):
        acc = right[k] or (left[k] and acc)
        out[k] = acc
    return out


# --- Public API -----------------------------------------------------------------


def _check_position(w: AttributedWord, i: int) -> None:
    if not 1 <= i <= len(w):
        raise PositionOutOfRangeError(i, len(w))


def eval_position(w: AttributedWord, i: int, phi: Formula) -> bool:
    _check_position(w, i)
    return Evaluator(w).position(phi)[i - 1]


def eval_class(w: AttributedWord, i: int, d: DataValue, psi: Formula) -> bool:
    _check_position(w, i)
    return Evaluator(w).klass(psi, d)[i - 1]


def eval_usub(w: AttributedWord, i: int, d: DataValue, chi: Formula) -> bool:
    _check_position(w, i)
    return Evaluator(w).usub(chi, d)[i - 1]


def truth_vector(w: AttributedWord, phi: Formula) -> frozenset[int]:
    """1-based positions where ``phi`` holds."""

    vector = Evaluator(w).position(phi)
    return frozenset(k + 1 for k, value in enumerate(vector) if value)


def satisfies(w: AttributedWord, phi: Formula) -> bool:
    """``w |= phi``: evaluation at the first position; undefined on the empty word."""

    if len(w) == 0:
        raise WordFormatError("satisfaction is undefined on the empty word")
    return Evaluator(w).position(phi)[0]


# --- Second evaluation path for the extended Until ---------------------------------


@dataclass(frozen=True, slots=True)
class UneqShape:
    """``(rho | (@b & rho_eq) | (!=@b & rho_neq)) U!{a}[k] (!=@b & tau)`` split into parts."""

    attr: str
    test_attr: str
    shift: int
    rho: Formula
    rho_eq: Formula
    rho_neq: Formula
    tau: Formula
    since: bool = False


def shepherd_for(w: AttributedWord, i: int, shape: UneqShape, ev: Evaluator | None = None) -> int | None:
    """Minimal ``j >= i + shift`` carrying ``tau`` and a value different from position ``i``.

    Returns ``None`` when no such position exists or ``i`` carries no value.
    Mirrored (maximal ``j <= i - shift``) for the Since shape.
    """

    ev = ev or Evaluator(w)
    k = i - 1
    d = ev.val(shape.attr, k)
    if d is None:
        return None
    tau = ev.position(shape.tau)
    anchor = k - shape.shift if shape.since else k + shape.shift
    scan = range(anchor, -1, -1) if shape.since else range(anchor, ev.n)
    for j in scan:
        if not 0 <= j < ev.n:
            break
        other = ev.val(shape.test_attr, j)
        if tau[j] and other is not None and other != d:
            return j + 1
    return None


def uneq_until_by_shepherd(w: AttributedWord, i: int, shape: UneqShape) -> bool:
    """Evaluate the extended Until through the shepherd characterization.

    ``i`` holds iff its shepherd ``j`` exists and every position between the
    anchor and ``j`` carries ``rho`` or ``rho_neq``, or carries the frozen
    value together with ``rho`` or ``rho_eq``. Agrees with the direct
    semantics on words complete for the attribute whenever ``rho_neq``
    implies ``rho_eq``.
    """

    if shape.attr != shape.test_attr:
        raise FragmentError("the shepherd characterization needs the test attribute to be the frozen one")
    if any(pos.value(shape.attr) is None for pos in w.positions):
        raise WordFormatError("the shepherd characterization needs a word complete for the frozen attribute")
    _check_position(w, i)
    ev = Evaluator(w)
    j = shepherd_for(w, i, shape, ev)
    if j is None:
        return False
    d = ev.val(shape.attr, i - 1)
    rho = ev.position(shape.rho)
    rho_eq = ev.position(shape.rho_eq)
    rho_neq = ev.position(shape.rho_neq)
    anchor = i - 1 - shape.shift if shape.since else i - 1 + shape.shift
    between = range(j, anchor + 1) if shape.since else range(anchor, j - 1)
    for k in between:
        free = rho[k] or rho_neq[k]
        same = ev.val(shape.attr, k) == d and (rho[k] or rho_eq[k])
        if not (free or same):
            return False
    return True


@dataclass(frozen=True, slots=True)
class CltlAtom:
    """``x = X^k y`` (``shift`` set) or ``x = <> y`` (``shift`` is ``None``)."""

    left: str
    right: str
    shift: int | None = None

    def __str__(self) -> str:
        if self.shift is None:
            return f"{self.left}=<>{self.right}"
        return f"{self.left}=X^{self.shift}{self.right}"


def eval_cltl_atom(w: AttributedWord, i: int, atom: CltlAtom) -> bool:
    if not is_complete(w, w.attrs_alphabet) or not {atom.left, atom.right} <= set(w.attrs_alphabet):
        raise WordFormatError("constraint atoms are only defined on complete words")
    _check_position(w, i)
    here = w.value(atom.left, i)
    if atom.shift is None:
        return any(w.value(atom.right, j) == here for j in range(i + 1, len(w) + 1))
    other = i + atom.shift
    return 1 <= other <= len(w) and w.value(atom.right, other) == here
