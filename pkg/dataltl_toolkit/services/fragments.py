"""Fragment classification, negative-shift rewriting and random formulas.

A formula is *basic* when it has no extended operator. It is *extended* when
every extended Until/Since has the shape

    (rho | (@b & rho_eq) | (!=@b & rho_neq)) U!{a}[k] (!=@b & tau)

with position formulas rho, rho_eq, rho_neq, tau. Everything else with an
extended operator is reported beyond the decidable fragments, together with
the construct that puts it there.
"""

from __future__ import annotations

import logging
from dataclasses import dataclass
from enum import Enum

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
    attributes,
    conj,
    disj,
    eventually,
    lifted_and,
    lifted_not,
    lifted_or,
    next_n,
    prev_n,
    propositions,
    walk,
)
from dataltl_toolkit.services.semantics import UneqShape
from dataltl_toolkit.utils.errors import FragmentError, SearchBudgetExceeded
from dataltl_toolkit.utils.splitmix import SplitMix64


def _build_logger() -> logging.Logger:
    return logging.getLogger("dataltl.fragments")


LOGGER = _build_logger()


class Fragment(str, Enum):
    BASIC = "BasicDataLTL"
    EXTENDED = "ExtendedDataLTL"
    BEYOND = "BeyondDecidable"


class ImplicationStatus(str, Enum):
    VERIFIED = "verified"
    FALSIFIED = "falsified"
    UNKNOWN = "unknown"


REASON_POSITIVE_TARGET = "positive target test"
REASON_FROM_NOW = "from-now-on operator"
REASON_TUPLE = "tuple navigation"


@dataclass(frozen=True, slots=True)
class FragmentTag:
    fragment: Fragment
    reason: str | None = None
    implications: tuple[ImplicationStatus, ...] = ()

    def as_dict(self) -> dict:
        return {
            "fragment": self.fragment.value,
            "reason": self.reason,
            "implications": [status.value for status in self.implications],
        }


class ShapeError(FragmentError):
    """An extended Until/Since operand outside the decidable shape."""

    def __init__(self, message: str, reason: str):
        super().__init__(message, {"reason": reason})
        self.reason = reason


# --- Shape analysis --------------------------------------------------------------


def _disjuncts(node: Formula) -> list[Formula]:
    if isinstance(node, Or):
        return _disjuncts(node.left) + _disjuncts(node.right)
    return [node]


def _conjuncts(node: Formula) -> list[Formula]:
    if isinstance(node, And):
        return _conjuncts(node.left) + _conjuncts(node.right)
    return [node]


def _split_test(node: Formula) -> tuple[Formula | None, Formula]:
    """``(test, body)`` for a conjunction of at most one attribute test and lifted formulas."""

    test = None
    bodies = []
    for part in _conjuncts(node):
        if isinstance(part, Lift):
            bodies.append(part.sub)
        elif isinstance(part, (AttrIs, AttrNeq)) and test is None:
            test = part
        else:
            raise ShapeError(f"unsupported conjunct {part}", "intermediate shape")
    return test, conj(*bodies)


def extended_shape(node: UneqUntil | UneqSince) -> UneqShape:
    """Split an extended Until/Since into ``rho``, ``rho_eq``, ``rho_neq`` and ``tau``.

    Raises ``ShapeError`` naming the offending construct.
    """

    if not isinstance(node, (UneqUntil, UneqSince)):
        raise FragmentError(f"not an extended Until/Since: {node}")

    target_test, tau = _split_test_target(node.target)
    test_attr = target_test.attr

    rho: list[Formula] = []
    rho_eq: list[Formula] = []
    rho_neq: list[Formula] = []
    for part in _disjuncts(node.inter):
        test, body = _split_test(part)
        if test is None:
            rho.append(body)
            continue
        if test.attr != test_attr:
            raise ShapeError(
                f"attribute tests on {test.attr} and {test_attr} in one extended operator", "mixed test attributes"
            )
        (rho_eq if isinstance(test, AttrIs) else rho_neq).append(body)

    return UneqShape(
        attr=node.attr,
        test_attr=test_attr,
        shift=node.shift,
        rho=disj(*rho),
        rho_eq=disj(*rho_eq),
        rho_neq=disj(*rho_neq),
        tau=tau,
        since=isinstance(node, UneqSince),
    )


def _split_test_target(target: Formula) -> tuple[AttrNeq, Formula]:
    try:
        test, tau = _split_test(target)
    except ShapeError:
        if any(isinstance(part, AttrIs) for part in _conjuncts(target)):
            raise ShapeError(f"target {target} tests @ positively", REASON_POSITIVE_TARGET)
        raise ShapeError(f"target {target} is not a conjunction !=@b & tau", "target shape")
    if isinstance(test, AttrIs):
        raise ShapeError(f"target {target} tests @{test.attr} positively", REASON_POSITIVE_TARGET)
    if test is None:
        raise ShapeError(f"target {target} has no !=@b test", "target shape")
    return test, tau


def shape_formula(shape: UneqShape) -> UneqUntil | UneqSince:
    """Rebuild the operator from its parts."""

    b = shape.test_attr
    inter = lifted_or(
        Lift(shape.rho),
        Or(And(AttrIs(b), Lift(shape.rho_eq)), And(AttrNeq(b), Lift(shape.rho_neq))),
    )
    target = And(AttrNeq(b), Lift(shape.tau))
    ctor = UneqSince if shape.since else UneqUntil
    return ctor(shape.attr, shape.shift, inter, target)


# --- Implication side condition ------------------------------------------------------


def _syntactic_implication(rho_neq: Formula, rho_eq: Formula) -> bool:
    if isinstance(rho_neq, Bottom) or isinstance(rho_eq, Top) or rho_neq == rho_eq:
        return True
    return rho_neq in _disjuncts(rho_eq)


def implication_status(rho_neq: Formula, rho_eq: Formula, config: DataLTLConfig | None = None) -> ImplicationStatus:
    """Check ``rho_neq -> rho_eq`` on every position of every small word.

    A counterexample within the configured bounds falsifies; exhausting the
    bounds leaves the status unknown.
    """

    if _syntactic_implication(rho_neq, rho_eq):
        return ImplicationStatus.VERIFIED

    # satsearch imports this module
    from dataltl_toolkit.services.satsearch import SearchBounds, find_model

    config = config or get_config()
    violation = eventually(And(rho_neq, Not(rho_eq)))

    bounds = SearchBounds(
        max_len=config.implication_max_len,
        props=tuple(sorted(propositions(violation))),
        attrs=tuple(sorted(attributes(violation))),
        max_values=config.implication_max_values,
    )
    try:
        result = find_model(violation, bounds, config=config)
    except SearchBudgetExceeded:
        LOGGER.warning({"event": "implication_budget_exceeded", "max_len": bounds.max_len})
        return ImplicationStatus.UNKNOWN
    if result.model is not None:
        return ImplicationStatus.FALSIFIED
    LOGGER.info({"event": "implication_unknown", "max_len": bounds.max_len, "max_values": bounds.max_values})
    return ImplicationStatus.UNKNOWN


# --- Classification ----------------------------------------------------------------


def classify(phi: Formula, config: DataLTLConfig | None = None, check_implication: bool = True) -> FragmentTag:
    """Tag ``phi`` with its fragment; extended formulas carry one implication status per operator."""

    shapes = []
    for _, node, _ in walk(phi):
        if isinstance(node, (FromNow, UpToNow)):
            return FragmentTag(Fragment.BEYOND, REASON_FROM_NOW)
        if isinstance(node, (XPair, YPair)):
            return FragmentTag(Fragment.BEYOND, REASON_TUPLE)
        if isinstance(node, (UneqUntil, UneqSince)):
            try:
                shapes.append(extended_shape(node))
            except ShapeError as exc:
                return FragmentTag(Fragment.BEYOND, exc.reason)
    if not shapes:
        return FragmentTag(Fragment.BASIC)
    if not check_implication:
        return FragmentTag(Fragment.EXTENDED)
    statuses = tuple(implication_status(shape.rho_neq, shape.rho_eq, config) for shape in shapes)
    if ImplicationStatus.FALSIFIED in statuses:
        LOGGER.warning({"event": "implication_falsified", "formula": str(phi)})
    return FragmentTag(Fragment.EXTENDED, implications=statuses)


# --- Negative shifts ----------------------------------------------------------------


def _relocate(chi: Formula, attr: str, offset: int) -> Formula:
    """Position formula that holds at ``i`` iff ``chi`` holds at ``(i + offset, val(attr, i))``."""

    match chi:
        case Lift(sub):
            return prev_n(-offset, sub) if offset < 0 else next_n(offset, sub)
        case AttrIs(b):
            return Class(offset, attr, AttrIs(b))
        case AttrNeq(b):
            present = Class(0, b, LIFT_TRUE)
            moved = prev_n(-offset, present) if offset < 0 else next_n(offset, present)
            return And(Not(Class(offset, attr, AttrIs(b))), moved)
        case And(left, right):
            return And(_relocate(left, attr, offset), _relocate(right, attr, offset))
        case Or(left, right):
            return Or(_relocate(left, attr, offset), _relocate(right, attr, offset))
    raise FragmentError(f"not a U-subformula: {chi}")


def lower_shift(node: UneqUntil | UneqSince) -> Formula:
    """Rewrite an extended Until/Since with a negative shift into shift-0 operators.

    For ``rho U!{a}[-n] tau``: either the witness lies at or after the current
    position and ``rho`` holds on the ``n`` positions before it, or the
    witness is ``m <= n`` steps back and ``rho`` covers the positions between
    the anchor and the witness. Since is mirrored.
    """

    if not isinstance(node, (UneqUntil, UneqSince)):
        raise FragmentError(f"lower_shift expects an extended Until/Since, got {type(node).__name__}")
    if node.shift >= 0:
        raise FragmentError(f"lower_shift needs a negative shift, got {node.shift}", {"shift": node.shift})

    depth = -node.shift
    sign = -1 if isinstance(node, UneqUntil) else 1
    ctor = type(node)

    def rho_at(k: int) -> Formula:
        return _relocate(node.inter, node.attr, sign * k)

    def tau_at(k: int) -> Formula:
        return _relocate(node.target, node.attr, sign * k)

    here = conj(ctor(node.attr, 0, node.inter, node.target), *(rho_at(k) for k in range(1, depth + 1)))
    behind = [conj(tau_at(m), *(rho_at(k) for k in range(m + 1, depth + 1))) for m in range(1, depth + 1)]
    return And(Class(0, node.attr, LIFT_TRUE), disj(here, *behind))


# --- Random formulas ---------------------------------------------------------------


class _Generator:
    def __init__(self, rng: SplitMix64, props, attrs, max_shift: int, extended: bool):
        self.rng = rng
        self.props = tuple(props)
        self.attrs = tuple(attrs)
        self.max_shift = max_shift
        self.extended = extended

    def leaf(self) -> Formula:
        choice = self.rng.below(len(self.props) + 1)
        return TRUE if choice == len(self.props) else Prop(self.props[choice])

    def position(self, depth: int) -> Formula:
        if depth <= 0:
            return self.leaf()
        ops = ["leaf", "not", "and", "or", "next", "prev", "until", "since", "class"]
        if self.extended:
            ops += ["uneq_until", "uneq_since"]
        op = self.rng.choice(ops)
        sub = depth - 1
        match op:
            case "leaf":
                return self.leaf()
            case "not":
                return Not(self.position(sub))
            case "and":
                return And(self.position(sub), self.position(sub))
            case "or":
                return Or(self.position(sub), self.position(sub))
            case "next":
                return Next(self.position(sub))
            case "prev":
                return Prev(self.position(sub))
            case "until":
                return Until(self.position(sub), self.position(sub))
            case "since":
                return Since(self.position(sub), self.position(sub))
            case "class":
                shift = self.rng.below(2 * self.max_shift + 1) - self.max_shift
                return Class(shift, self.rng.choice(self.attrs), self.klass(sub))
        return self.uneq(sub, since=op == "uneq_since")

    def klass(self, depth: int) -> Formula:
        if depth <= 0:
            if self.rng.chance(1, 2):
                return AttrIs(self.rng.choice(self.attrs))
            return Lift(self.leaf())
        op = self.rng.choice(["test", "lift", "not", "and", "or", "xeq", "yeq", "ueq", "seq"])
        sub = depth - 1
        match op:
            case "test":
                return AttrIs(self.rng.choice(self.attrs))
            case "lift":
                return Lift(self.position(sub))
            case "not":
                return lifted_not(self.klass(sub))
            case "and":
                return lifted_and(self.klass(sub), self.klass(sub))
            case "or":
                return lifted_or(self.klass(sub), self.klass(sub))
            case "xeq":
                return XEq(self.klass(sub))
            case "yeq":
                return YEq(self.klass(sub))
            case "ueq":
                return UEq(self.klass(sub), self.klass(sub))
        return SEq(self.klass(sub), self.klass(sub))

    def uneq(self, depth: int, since: bool) -> Formula:
        rho_neq = self.position(depth)
        shape = UneqShape(
            attr=self.rng.choice(self.attrs),
            test_attr=self.rng.choice(self.attrs),
            shift=self.rng.below(self.max_shift + 1),
            rho=self.position(depth),
            rho_eq=Or(self.position(depth), rho_neq),
            rho_neq=rho_neq,
            tau=self.position(depth),
            since=since,
        )
        return shape_formula(shape)


def random_formula(
    seed: int | SplitMix64,
    fragment: Fragment = Fragment.BASIC,
    depth: int = 3,
    props=("p", "q"),
    attrs=("a",),
    max_shift: int = 2,
) -> Formula:
    """Reproducible random formula in ``fragment`` (basic or extended).

    Extended formulas always satisfy the ``rho_neq -> rho_eq`` side condition
    syntactically.
    """

    if fragment is Fragment.BEYOND:
        raise FragmentError("no generator for formulas beyond the decidable fragments")
    rng = seed if isinstance(seed, SplitMix64) else SplitMix64(seed)
    return _Generator(rng, props, attrs, max_shift, fragment is Fragment.EXTENDED).position(depth)

