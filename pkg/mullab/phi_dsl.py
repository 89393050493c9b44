"""
Expression language for symbols φ.

Each diagonal entry of φ(x) is written as a closed-form complex expression
in the point variable `x`:

    expr    := term (("+" | "-") term)*
    term    := unary (("*" | "/") unary)*
    unary   := "-" unary | power
    power   := primary ("^" INTEGER)?
    primary := NUMBER | "i" | "x" | FUNC "(" expr ")" | "(" expr ")"

with FUNC one of exp, sin, cos, log, abs. Parsing is recursive descent
with a single token of lookahead.
"""

import logging
import re
from typing import Any, Iterator, List, Literal, NamedTuple, Optional, Sequence, Tuple, Union

import numpy as np
from pydantic import BaseModel, ConfigDict, Field, PrivateAttr, field_validator

from .base_space import Section, SpaceModel
from .errors import (
    DivisionByZeroError,
    EvaluationError,
    ExpressionSyntaxError,
    LogOfZeroError,
)
from .lattice_core import NormSpec

logger = logging.getLogger(__name__)

FUNCTIONS = ("exp", "sin", "cos", "log", "abs")
MAX_DEPTH = 100


# =========
# AST nodes
# =========


class _Node(BaseModel):
    model_config = ConfigDict(frozen=True)


class Number(_Node):
    kind: Literal["number"] = "number"
    text: str

    @property
    def value(self) -> float:
        return float(self.text)


class ImaginaryUnit(_Node):
    kind: Literal["i"] = "i"


class Variable(_Node):
    kind: Literal["x"] = "x"


class Negate(_Node):
    kind: Literal["neg"] = "neg"
    operand: "Expr"


class BinaryOp(_Node):
    kind: Literal["binary"] = "binary"
    op: Literal["+", "-", "*", "/"]
    left: "Expr"
    right: "Expr"


class Power(_Node):
    kind: Literal["power"] = "power"
    base: "Expr"
    exponent: int = Field(..., ge=0)


class Call(_Node):
    kind: Literal["call"] = "call"
    func: Literal["exp", "sin", "cos", "log", "abs"]
    arg: "Expr"


Expr = Union[Number, ImaginaryUnit, Variable, Negate, BinaryOp, Power, Call]

for _model in (Negate, BinaryOp, Power, Call):
    _model.model_rebuild()


# =========
# Tokenizer
# =========


class Token(NamedTuple):
    kind: str
    text: str
    position: int


_TOKEN_PATTERN = re.compile(
    r"\s*(?:(?P<number>\d+(?:\.\d*)?|\.\d+)|(?P<name>[A-Za-z_]\w*)|(?P<op>[-+*/^()]))"
)


def tokenize(text: str) -> Iterator[Token]:
    position = 0
    length = len(text)
    while position < length:
        if text[position:].isspace():
            break
        match = _TOKEN_PATTERN.match(text, position)
        if match is None:
            offending = position + len(text[position:]) - len(text[position:].lstrip())
            raise ExpressionSyntaxError(
                f"Unexpected character '{text[offending]}'", offending, text
            )
        kind = match.lastgroup or ""
        token_text = match.group(kind)
        yield Token(kind, token_text, match.start(kind))
        position = match.end()
    yield Token("end", "", length)


# ======
# Parser
# ======


class _Parser:
    """Recursive-descent parser over a token stream with one token of lookahead."""

    def __init__(self, text: str):
        self.text = text
        self._tokens = tokenize(text)
        self.current = next(self._tokens)
        self.depth = 0

    def _advance(self) -> Token:
        token = self.current
        self.current = next(self._tokens)
        return token

    def _error(self, message: str, token: Optional[Token] = None) -> ExpressionSyntaxError:
        token = token or self.current
        found = "end of input" if token.kind == "end" else f"'{token.text}'"
        return ExpressionSyntaxError(f"{message}, found {found}", token.position, self.text)

    def _descend(self, token: Token) -> None:
        self.depth += 1
        if self.depth > MAX_DEPTH:
            raise ExpressionSyntaxError(
                f"Expression nested deeper than {MAX_DEPTH} levels", token.position, self.text
            )

    def _expect_op(self, symbol: str) -> Token:
        if self.current.kind == "op" and self.current.text == symbol:
            return self._advance()
        raise self._error(f"Expected '{symbol}'")

    def parse(self) -> Expr:
        expr = self._expression()
        if self.current.kind != "end":
            raise self._error("Unexpected trailing input")
        return expr

    def _expression(self) -> Expr:
        start = self.depth
        try:
            left = self._term()
            while self.current.kind == "op" and self.current.text in "+-":
                token = self._advance()
                self._descend(token)
                left = BinaryOp(op=token.text, left=left, right=self._term())
            return left
        finally:
            self.depth = start

    def _term(self) -> Expr:
        start = self.depth
        try:
            left = self._unary()
            while self.current.kind == "op" and self.current.text in "*/":
                token = self._advance()
                self._descend(token)
                left = BinaryOp(op=token.text, left=left, right=self._unary())
            return left
        finally:
            self.depth = start

    def _unary(self) -> Expr:
        if self.current.kind == "op" and self.current.text == "-":
            self._descend(self._advance())
            try:
                return Negate(operand=self._unary())
            finally:
                self.depth -= 1
        return self._power()

    def _power(self) -> Expr:
        base = self._primary()
        if self.current.kind == "op" and self.current.text == "^":
            self._advance()
            token = self.current
            if token.kind != "number" or not token.text.isdigit():
                raise self._error("Exponent must be a nonnegative integer literal")
            self._advance()
            if self.current.kind == "op" and self.current.text == "^":
                raise self._error("Chained exponents need parentheses")
            return Power(base=base, exponent=int(token.text))
        return base

    def _primary(self) -> Expr:
        token = self.current
        if token.kind == "number":
            self._advance()
            return Number(text=token.text)
        if token.kind == "name":
            if token.text == "i":
                self._advance()
                return ImaginaryUnit()
            if token.text == "x":
                self._advance()
                return Variable()
            if token.text in FUNCTIONS:
                self._advance()
                self._expect_op("(")
                self._descend(token)
                try:
                    arg = self._expression()
                finally:
                    self.depth -= 1
                self._expect_op(")")
                return Call(func=token.text, arg=arg)
            raise self._error(f"Unknown name '{token.text}'")
        if token.kind == "op" and token.text == "(":
            self._descend(self._advance())
            try:
                inner = self._expression()
            finally:
                self.depth -= 1
            self._expect_op(")")
            return inner
        raise self._error("Expected a number, 'i', 'x', a function or '('")


def parse(text: str) -> Expr:
    """
    Parse an expression string into an AST.

    Raises:
        ExpressionSyntaxError: On malformed input, with the character position
    """
    if not text.isascii():
        offending = next(index for index, char in enumerate(text) if not char.isascii())
        raise ExpressionSyntaxError("Non-ASCII character", offending, text)
    return _Parser(text).parse()


# =======
# Printer
# =======

_PRECEDENCE = {"+": 1, "-": 1, "*": 2, "/": 2}
_NEGATE_PRECEDENCE = 3
_POWER_PRECEDENCE = 4
_ATOM_PRECEDENCE = 5


def _precedence(expr: Expr) -> int:
    if isinstance(expr, BinaryOp):
        return _PRECEDENCE[expr.op]
    if isinstance(expr, Negate):
        return _NEGATE_PRECEDENCE
    if isinstance(expr, Power):
        return _POWER_PRECEDENCE
    return _ATOM_PRECEDENCE


def _wrap(expr: Expr, parenthesize: bool) -> str:
    text = to_text(expr)
    return f"({text})" if parenthesize else text


def to_text(expr: Expr) -> str:
    """Print an AST with the fewest parentheses that reparse to the same tree."""
    if isinstance(expr, Number):
        return expr.text
    if isinstance(expr, ImaginaryUnit):
        return "i"
    if isinstance(expr, Variable):
        return "x"
    if isinstance(expr, Negate):
        return "-" + _wrap(expr.operand, _precedence(expr.operand) < _NEGATE_PRECEDENCE)
    if isinstance(expr, Power):
        return _wrap(expr.base, _precedence(expr.base) < _ATOM_PRECEDENCE) + f"^{expr.exponent}"
    if isinstance(expr, Call):
        return f"{expr.func}({to_text(expr.arg)})"
    level = _PRECEDENCE[expr.op]
    left = _wrap(expr.left, _precedence(expr.left) < level)
    # binary operators associate to the left
    right = _wrap(expr.right, _precedence(expr.right) <= level)
    return f"{left}{expr.op}{right}"


def uses_variable(expr: Expr) -> bool:
    """Whether `x` occurs in the expression."""
    if isinstance(expr, Variable):
        return True
    if isinstance(expr, Negate):
        return uses_variable(expr.operand)
    if isinstance(expr, Power):
        return uses_variable(expr.base)
    if isinstance(expr, Call):
        return uses_variable(expr.arg)
    if isinstance(expr, BinaryOp):
        return uses_variable(expr.left) or uses_variable(expr.right)
    return False


# ==========
# Evaluation
# ==========


def _first_index(mask: np.ndarray) -> Optional[int]:
    if mask.ndim == 0:
        return None
    return int(np.flatnonzero(mask)[0])


def _evaluate(expr: Expr, x: np.ndarray) -> np.ndarray:
    if isinstance(expr, Number):
        return np.full_like(x, expr.value)
    if isinstance(expr, ImaginaryUnit):
        return np.full_like(x, 1j)
    if isinstance(expr, Variable):
        return x
    if isinstance(expr, Negate):
        # 0 - v, not -v: real operands keep Im = +0 for the principal log branch
        return 0 - _evaluate(expr.operand, x)
    if isinstance(expr, Power):
        base = _evaluate(expr.base, x)
        result = np.ones_like(base)
        exponent = expr.exponent
        # square-and-multiply
        while exponent:
            if exponent & 1:
                result = result * base
            exponent >>= 1
            if exponent:
                base = base * base
        return result
    if isinstance(expr, Call):
        arg = _evaluate(expr.arg, x)
        if expr.func == "log":
            zero = arg == 0
            if np.any(zero):
                raise LogOfZeroError("Logarithm of zero", point=_first_index(zero))
            return np.log(arg)
        if expr.func == "abs":
            return np.abs(arg).astype(np.complex128)
        return getattr(np, expr.func)(arg)

    left = _evaluate(expr.left, x)
    right = _evaluate(expr.right, x)
    if expr.op == "+":
        return left + right
    if expr.op == "-":
        return left - right
    if expr.op == "*":
        return left * right
    zero = right == 0
    if np.any(zero):
        raise DivisionByZeroError("Division by zero", point=_first_index(zero))
    return left / right


def evaluate(expr: Expr, x: Union[complex, Sequence[complex], np.ndarray]) -> Any:
    """
    Evaluate with principal-branch complex arithmetic.

    `x` may be a single number (returns a complex) or an array of point
    coordinates (returns an array, one value per point).

    Raises:
        DivisionByZeroError: If a divisor vanishes
        LogOfZeroError: If log is applied to 0
    """
    points = np.asarray(x, dtype=np.complex128)
    with np.errstate(all="ignore"):
        result = _evaluate(expr, points)
    if points.ndim == 0:
        return complex(result)
    return result


# ===========================
# Symbol and section building
# ===========================


class PhiSpec(BaseModel):
    """Defining data of a symbol φ: one expression per diagonal slot."""

    model_config = ConfigDict(frozen=True)

    entries: Tuple[str, ...] = Field(..., min_length=1, description="Diagonal entry expressions")
    _parsed: List[Expr] = PrivateAttr(default_factory=list)

    @field_validator("entries")
    @classmethod
    def _entries_parse(cls, value: Tuple[str, ...]) -> Tuple[str, ...]:
        for text in value:
            parse(text)
        return value

    def model_post_init(self, __context: Any) -> None:
        self._parsed = [parse(text) for text in self.entries]

    @property
    def dimension(self) -> int:
        return len(self.entries)

    @property
    def expressions(self) -> List[Expr]:
        return list(self._parsed)


def evaluate_entries(
    entries: Sequence[Expr], space: SpaceModel, label: str = "entry"
) -> np.ndarray:
    """Evaluate expressions at every point; result has shape (points, len(entries))."""
    coordinates = space.coordinates
    columns = []
    for slot, expr in enumerate(entries):
        try:
            column = evaluate(expr, coordinates)
        except EvaluationError as e:
            point = e.point
            where = f"point {point} (x = {coordinates[point]:g})" if point is not None else "a point"
            logger.error(f"Failed to evaluate {label} {slot} '{to_text(expr)}' at {where}: {e}")
            raise type(e)(f"{e} in {label} {slot} at {where}", point=point) from e
        columns.append(np.broadcast_to(column, coordinates.shape))
    return np.stack(columns, axis=1)


def build_phi(spec: PhiSpec, space: SpaceModel) -> "PhiField":
    """Evaluate φ at every point of `space` into a field of central operators."""
    from .mulop import PhiField

    diag = evaluate_entries(spec.expressions, space, label="phi entry")
    logger.info(f"Built symbol {spec.entries} on {space.kind.value} with {space.num_points} points")
    return PhiField(space=space, diag=diag, source=spec)


def build_section(
    entries: Sequence[str],
    space: SpaceModel,
    norm_spec: Optional[NormSpec] = None,
    support: Optional[Tuple[int, int]] = None,
) -> Section:
    """Section with coordinates given by expressions; zeroed outside `support`."""
    values = evaluate_entries([parse(text) for text in entries], space, label="section entry")
    if support is not None:
        first, last = support
        mask = np.ones(space.num_points, dtype=bool)
        mask[first : last + 1] = False
        values[mask] = 0
    return Section(space=space, values=values, norm_spec=norm_spec or NormSpec.sup(), support=support)
