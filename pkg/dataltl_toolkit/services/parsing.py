"""Concrete syntax for DataLTL formulas (LALR grammar on lark).

Derived operators are expanded while building the AST::

    F f   = true U f          G f   = !F !f
    P f   = true S f          H f   = !P !f
    F= g  = true U= g         G= g  = !F= !g      (P=, H= likewise)
    @a=X^k@b        = C[k]{a} @b
    F!{a}[k] f      = true U!{a}[k] (!=@a & f)
    P!{a}[k] f      = true S!{a}[k] (!=@a & f)

Extended Until/Since with a negative shift are rewritten at parse time by
``lower_shift`` so that stored shifts are never negative.
"""

from __future__ import annotations

import re
from collections.abc import Iterable

from lark import Lark, Token, Tree
from lark.exceptions import LarkError, UnexpectedCharacters, UnexpectedEOF, UnexpectedInput, UnexpectedToken

from dataltl_toolkit.config import DataLTLConfig, get_config
from dataltl_toolkit.services.formula import (
    FALSE,
    LIFT_TRUE,
    TRUE,
    And,
    AttrIs,
    AttrNeq,
    Class,
    Formula,
    FromNow,
    Layer,
    Lift,
    Next,
    Not,
    Or,
    Prev,
    Prop,
    SEq,
    Since,
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
    class_always,
    class_historically,
    lifted_and,
    lifted_not,
    lifted_or,
    propositions,
)
from dataltl_toolkit.utils.errors import FormulaSyntaxError, UnknownSymbolError

_NAME = r"[A-Za-z_][A-Za-z0-9_]*"
_SHIFT = r"(?:\[\s*-?\d+\s*\])?"

GRAMMAR = rf"""
    start: expr

    ?expr: disj
         | disj "->" expr           -> implies

    ?disj: conj
         | disj "|" conj            -> or_

    ?conj: temp
         | conj "&" temp            -> and_

    ?temp: unary
         | unary BINOP temp         -> binary

    ?unary: atom
          | "!" unary               -> not_
          | PREFIX unary            -> prefix

    ?atom: "true"                   -> true
         | "false"                  -> false
         | NAME                     -> prop
         | ATTR                     -> attr
         | NEQ                      -> neq
         | CMP                      -> cmp
         | "(" expr ")"

    PREFIX.2: /Nbar(?![A-Za-z0-9_])|(?:XX|YY)\{{\s*{_NAME}\s*,\s*{_NAME}\s*\}}|C{_SHIFT}\{{\s*{_NAME}\s*\}}|[FP]!\{{\s*{_NAME}\s*\}}{_SHIFT}|[XYFGPH]=|[XYNFGPH](?![A-Za-z0-9_])/
    BINOP.2: /[US](?:=|!\{{\s*{_NAME}\s*\}}{_SHIFT}|(?![A-Za-z0-9_]))/
    CMP.3: /@{_NAME}=X\^-?\d+@{_NAME}/
    NEQ.3: /!=@{_NAME}/
    ATTR: /@{_NAME}/
    NAME: /{_NAME}/

    %import common.WS
    %ignore WS
"""

_PARSER = Lark(GRAMMAR, parser="lalr", propagate_positions=True, maybe_placeholders=False)

_BRACED = re.compile(r"\{\s*(?P<names>[^}]*)\}")
_BRACKET = re.compile(r"\[\s*(?P<shift>-?\d+)\s*\]")
_CMP = re.compile(rf"@(?P<left>{_NAME})=X\^(?P<shift>-?\d+)@(?P<right>{_NAME})")

_CLASS_ONLY_PREFIXES = ("X=", "Y=", "F=", "G=", "P=", "H=")


class _Builder:
    def __init__(self, text: str, config: DataLTLConfig):
        self.text = text
        self.config = config

    # --- helpers ------------------------------------------------------------

    def error(self, message: str, node: Tree | Token | None = None) -> FormulaSyntaxError:
        line = column = None
        if isinstance(node, Token):
            line, column = node.line, node.column
        elif isinstance(node, Tree) and node.meta and not node.meta.empty:
            line, column = node.meta.line, node.meta.column
        return FormulaSyntaxError(message, self.text, line, column)

    def shift_of(self, token: Token, default: int = 0) -> int:
        match = _BRACKET.search(str(token))
        if not match:
            return default
        shift = int(match.group("shift"))
        if abs(shift) > self.config.max_shift:
            raise self.error(f"shift {shift} exceeds the bound {self.config.max_shift}", token)
        return shift

    def names_of(self, token: Token) -> list[str]:
        match = _BRACED.search(str(token))
        return [name.strip() for name in match.group("names").split(",")] if match else []

    def is_pure(self, node: Tree | Token) -> bool:
        """True when the subtree denotes a position formula."""

        if isinstance(node, Token):
            return True
        kind = node.data
        if kind in ("attr", "neq"):
            return False
        if kind in ("true", "false", "prop", "cmp"):
            return True
        if kind == "prefix":
            op = str(node.children[0])
            if op.startswith(_CLASS_ONLY_PREFIXES):
                return False
            if op.startswith(("C", "F!", "P!")):
                return True
            return self.is_pure(node.children[1])
        if kind == "binary":
            op = str(node.children[1])
            if op in ("U=", "S="):
                return False
            if "!" in op:
                return True
            return self.is_pure(node.children[0]) and self.is_pure(node.children[2])
        return all(self.is_pure(child) for child in node.children)

    # --- layers -------------------------------------------------------------

    def build(self, node: Tree, layer: Layer) -> Formula:
        if layer is Layer.POSITION:
            return self.position(node)
        if self.is_pure(node):
            return Lift(self.position(node))
        if layer is Layer.CLASS:
            return self.klass(node)
        return self.usub(node)

    def position(self, node: Tree) -> Formula:
        kind = node.data
        if kind == "true":
            return TRUE
        if kind == "false":
            return FALSE
        if kind == "prop":
            return Prop(str(node.children[0]))
        if kind == "cmp":
            match = _CMP.fullmatch(str(node.children[0]))
            shift = int(match.group("shift"))
            if abs(shift) > self.config.max_shift:
                raise self.error(f"shift {shift} exceeds the bound {self.config.max_shift}", node)
            return Class(shift, match.group("left"), AttrIs(match.group("right")))
        if kind in ("attr", "neq"):
            raise self.error(f"attribute test {node.children[0]} outside a class or extended-Until context", node)
        if kind == "not_":
            return Not(self.position(node.children[0]))
        if kind == "and_":
            return And(self.position(node.children[0]), self.position(node.children[1]))
        if kind == "or_":
            return Or(self.position(node.children[0]), self.position(node.children[1]))
        if kind == "implies":
            return Or(Not(self.position(node.children[0])), self.position(node.children[1]))
        if kind == "prefix":
            return self.position_prefix(node)
        if kind == "binary":
            return self.position_binary(node)
        raise self.error(f"unexpected construct {kind}", node)

    def position_prefix(self, node: Tree) -> Formula:
        token, operand = node.children
        op = str(token)
        if op.startswith("C"):
            return Class(self.shift_of(token), self.names_of(token)[0], self.build(operand, Layer.CLASS))
        if op.startswith(("XX", "YY")):
            first, second = self.names_of(token)
            ctor = XPair if op.startswith("XX") else YPair
            return ctor(first, second, self.position(operand))
        if op.startswith(("F!", "P!")):
            attr = self.names_of(token)[0]
            target = And(AttrNeq(attr), Lift(self.position(operand)))
            ctor = UneqUntil if op.startswith("F") else UneqSince
            return self.extended(ctor, attr, self.shift_of(token), LIFT_TRUE, target, token)
        if op.startswith(_CLASS_ONLY_PREFIXES):
            raise self.error(f"class operator {op} outside a class quantifier", token)
        sub = self.position(operand)
        match op:
            case "X":
                return Next(sub)
            case "Y":
                return Prev(sub)
            case "N":
                return FromNow(sub)
            case "Nbar":
                return UpToNow(sub)
            case "F":
                return Until(TRUE, sub)
            case "G":
                return Not(Until(TRUE, Not(sub)))
            case "P":
                return Since(TRUE, sub)
            case "H":
                return Not(Since(TRUE, Not(sub)))
        raise self.error(f"unknown operator {op}", token)

    def position_binary(self, node: Tree) -> Formula:
        left, token, right = node.children
        op = str(token)
        if op == "U":
            return Until(self.position(left), self.position(right))
        if op == "S":
            return Since(self.position(left), self.position(right))
        if op in ("U=", "S="):
            raise self.error(f"class operator {op} outside a class quantifier", token)
        attr = self.names_of(token)[0]
        ctor = UneqUntil if op.startswith("U") else UneqSince
        return self.extended(
            ctor, attr, self.shift_of(token), self.build(left, Layer.USUB), self.build(right, Layer.USUB), token
        )

    def extended(self, ctor, attr: str, shift: int, inter: Formula, target: Formula, token: Token) -> Formula:
        node = ctor(attr, shift, inter, target)
        if shift < 0:
            from dataltl_toolkit.services.fragments import lower_shift

            return lower_shift(node)
        return node

    def klass(self, node: Tree) -> Formula:
        kind = node.data
        if kind == "attr":
            return AttrIs(str(node.children[0])[1:])
        if kind == "neq":
            raise self.error("!=@ is only allowed inside extended Until/Since operands", node)
        if kind == "not_":
            return lifted_not(self.build(node.children[0], Layer.CLASS))
        if kind == "and_":
            return lifted_and(self.build(node.children[0], Layer.CLASS), self.build(node.children[1], Layer.CLASS))
        if kind == "or_":
            return lifted_or(self.build(node.children[0], Layer.CLASS), self.build(node.children[1], Layer.CLASS))
        if kind == "implies":
            left = self.build(node.children[0], Layer.CLASS)
            return lifted_or(lifted_not(left), self.build(node.children[1], Layer.CLASS))
        if kind == "prefix":
            token, operand = node.children
            op = str(token)
            if not op.startswith(_CLASS_ONLY_PREFIXES):
                raise self.error(f"position operator {op} applied to a class formula", token)
            sub = self.build(operand, Layer.CLASS)
            match op:
                case "X=":
                    return XEq(sub)
                case "Y=":
                    return YEq(sub)
                case "F=":
                    return UEq(LIFT_TRUE, sub)
                case "G=":
                    return class_always(sub)
                case "P=":
                    return SEq(LIFT_TRUE, sub)
                case "H=":
                    return class_historically(sub)
        if kind == "binary":
            left, token, right = node.children
            op = str(token)
            if op not in ("U=", "S="):
                raise self.error(f"position operator {op} applied to a class formula", token)
            ctor = UEq if op == "U=" else SEq
            return ctor(self.build(left, Layer.CLASS), self.build(right, Layer.CLASS))
        raise self.error(f"unexpected construct {kind} in a class formula", node)

    def usub(self, node: Tree) -> Formula:
        kind = node.data
        if kind == "attr":
            return AttrIs(str(node.children[0])[1:])
        if kind == "neq":
            return AttrNeq(str(node.children[0])[3:])
        if kind == "and_":
            return lifted_and(self.build(node.children[0], Layer.USUB), self.build(node.children[1], Layer.USUB))
        if kind == "or_":
            return lifted_or(self.build(node.children[0], Layer.USUB), self.build(node.children[1], Layer.USUB))
        if kind in ("not_", "implies"):
            raise self.error("negation over attribute tests is not allowed in extended Until operands", node)
        raise self.error(f"unexpected construct {kind} in an extended Until operand", node)


def parse(
    text: str,
    props_alphabet: Iterable[str] | None = None,
    attrs_alphabet: Iterable[str] | None = None,
    config: DataLTLConfig | None = None,
) -> Formula:
    """Parse a position formula.

    With alphabets supplied, unknown propositions or attributes raise
    ``UnknownSymbolError``.
    """

    config = config or get_config()
    try:
        tree = _PARSER.parse(text)
    except UnexpectedEOF as exc:
        raise FormulaSyntaxError("unexpected end of formula", text, getattr(exc, "line", None), getattr(exc, "column", None))
    except (UnexpectedCharacters, UnexpectedToken) as exc:
        raise FormulaSyntaxError(f"syntax error: {_describe(exc)}", text, exc.line, exc.column)
    except UnexpectedInput as exc:
        raise FormulaSyntaxError("syntax error", text, getattr(exc, "line", None), getattr(exc, "column", None))
    except LarkError as exc:
        raise FormulaSyntaxError(f"syntax error: {exc}", text)

    builder = _Builder(text, config)
    root = tree.children[0]
    formula = builder.position(root) if isinstance(root, Tree) else Prop(str(root))

    if props_alphabet is not None:
        unknown = propositions(formula) - set(props_alphabet)
        if unknown:
            raise UnknownSymbolError(f"unknown propositions: {', '.join(sorted(unknown))}", text)
    if attrs_alphabet is not None:
        unknown = attributes(formula) - set(attrs_alphabet)
        if unknown:
            raise UnknownSymbolError(f"unknown attributes: {', '.join(sorted(unknown))}", text)
    return formula


def _describe(exc: UnexpectedInput) -> str:
    if isinstance(exc, UnexpectedToken):
        return f"unexpected {exc.token!r}"
    if isinstance(exc, UnexpectedCharacters):
        return f"unexpected character {exc.char!r}"
    return type(exc).__name__
