"""Expression language for half-plane functions of one complex variable z.

Grammar::

    expr   := term (('+' | '-') term)*
    term   := factor (('*' | '/') factor)*
    factor := '-' factor | base ('^' ['-'] int)?
    base   := 'z' | number | '(' expr ')' | 'exp' '(' expr ')'
    number := digits ['.' digits] [('e' | 'E') ['+' | '-'] digits] ['i']

``to_text`` prints the canonical form, and ``parse(to_text(tree)) == tree``
for every tree ``parse`` produces.
"""
import re
from dataclasses import dataclass

import numpy as np

from semigroup_calculus.errors import ExpressionSyntaxError, UnknownIdentifierError

_NUMBER = re.compile(r"\d+(\.\d*)?([eE][-+]?\d+)?i?")
_IDENT = re.compile(r"[A-Za-z_][A-Za-z_0-9]*")
_INT = re.compile(r"\d+")
_OPERATORS = "+-*/^()"


@dataclass(frozen=True)
class Var:
    pass


@dataclass(frozen=True)
class Num:
    value: complex


@dataclass(frozen=True)
class Neg:
    operand: object


@dataclass(frozen=True)
class Add:
    left: object
    right: object


@dataclass(frozen=True)
class Sub:
    left: object
    right: object


@dataclass(frozen=True)
class Mul:
    left: object
    right: object


@dataclass(frozen=True)
class Div:
    left: object
    right: object


@dataclass(frozen=True)
class Pow:
    base: object
    exponent: int


@dataclass(frozen=True)
class Exp:
    argument: object


BINARY = {"+": Add, "-": Sub, "*": Mul, "/": Div}
SYMBOLS = {Add: "+", Sub: "-", Mul: "*", Div: "/"}


def _tokenize(src):
    tokens = []
    pos = 0
    while pos < len(src):
        ch = src[pos]
        if ch.isspace():
            pos += 1
            continue
        if ch in _OPERATORS:
            tokens.append(("op", ch, pos))
            pos += 1
            continue
        m = _NUMBER.match(src, pos)
        if m:
            tokens.append(("num", m.group(0), pos))
            pos = m.end()
            continue
        m = _IDENT.match(src, pos)
        if m:
            name = m.group(0)
            if name not in ("z", "exp"):
                raise UnknownIdentifierError(f"unknown identifier {name!r}", pos)
            tokens.append(("name", name, pos))
            pos = m.end()
            continue
        raise ExpressionSyntaxError(f"unexpected character {ch!r}", pos)
    tokens.append(("end", "", len(src)))
    return tokens


def _number(text):
    if text.endswith("i"):
        return Num(complex(0.0, float(text[:-1])))
    return Num(complex(float(text), 0.0))


def _negate(node):
    if isinstance(node, Num):
        return Num(-node.value)
    return Neg(node)


class _Parser:
    def __init__(self, src):
        self.tokens = _tokenize(src)
        self.index = 0

    @property
    def current(self):
        return self.tokens[self.index]

    def _advance(self):
        token = self.tokens[self.index]
        self.index += 1
        return token

    def _accept(self, op):
        kind, text, _ = self.current
        if kind == "op" and text == op:
            self.index += 1
            return True
        return False

    def _expect(self, op):
        if not self._accept(op):
            kind, text, pos = self.current
            found = "end of input" if kind == "end" else repr(text)
            raise ExpressionSyntaxError(f"expected {op!r}, found {found}", pos)

    def parse(self):
        node = self.expr()
        kind, text, pos = self.current
        if kind != "end":
            raise ExpressionSyntaxError(f"unexpected {text!r}", pos)
        return node

    def expr(self):
        node = self.term()
        while self.current[0] == "op" and self.current[1] in "+-":
            op = self._advance()[1]
            node = BINARY[op](node, self.term())
        return node

    def term(self):
        node = self.factor()
        while self.current[0] == "op" and self.current[1] in "*/":
            op = self._advance()[1]
            node = BINARY[op](node, self.factor())
        return node

    def factor(self):
        if self._accept("-"):
            return _negate(self.factor())
        node = self.base()
        if self._accept("^"):
            sign = -1 if self._accept("-") else 1
            kind, text, pos = self.current
            if kind != "num" or not _INT.fullmatch(text):
                raise ExpressionSyntaxError("exponent must be an integer", pos)
            self.index += 1
            node = Pow(node, sign * int(text))
        return node

    def base(self):
        kind, text, pos = self.current
        if kind == "num":
            self.index += 1
            return _number(text)
        if kind == "name" and text == "z":
            self.index += 1
            return Var()
        if kind == "name" and text == "exp":
            self.index += 1
            self._expect("(")
            node = self.expr()
            self._expect(")")
            return Exp(node)
        if self._accept("("):
            node = self.expr()
            self._expect(")")
            return node
        found = "end of input" if kind == "end" else repr(text)
        raise ExpressionSyntaxError(f"expected an operand, found {found}", pos)


def parse(src):
    """Parse expression text into a tree of Var/Num/Neg/Add/Sub/Mul/Div/Pow/Exp nodes."""
    return _Parser(src).parse()


def _real_text(x):
    if x == int(x) and abs(x) < 1e15:
        return str(int(x))
    return repr(float(x))


def _num_text(value):
    if value.imag == 0:
        return ("-" if value.real < 0 else "") + _real_text(abs(value.real))
    if value.real == 0:
        return ("-" if value.imag < 0 else "") + _real_text(abs(value.imag)) + "i"
    sign = "-" if value.imag < 0 else "+"
    return f"({_num_text(complex(value.real))}{sign}{_real_text(abs(value.imag))}i)"


def _is_negative(node):
    return isinstance(node, Neg) or (isinstance(node, Num) and _num_text(node.value).startswith("-"))


def _is_atom(node):
    return isinstance(node, (Var, Exp)) or (isinstance(node, Num) and not _is_negative(node))


def _wrap(text, needed):
    return f"({text})" if needed else text


def to_text(node):
    """Canonical text of a tree, parenthesized only where the grammar needs it."""
    if isinstance(node, Var):
        return "z"
    if isinstance(node, Num):
        return _num_text(node.value)
    if isinstance(node, Exp):
        return f"exp({to_text(node.argument)})"
    if isinstance(node, Neg):
        inner = node.operand
        return "-" + _wrap(to_text(inner), isinstance(inner, (Add, Sub, Mul, Div)))
    if isinstance(node, Pow):
        return _wrap(to_text(node.base), not _is_atom(node.base)) + f"^{node.exponent}"
    left, right = node.left, node.right
    if isinstance(node, (Add, Sub)):
        left_text = to_text(left)
        right_text = _wrap(to_text(right), isinstance(right, (Add, Sub)) or _is_negative(right))
    else:
        left_text = _wrap(to_text(left), isinstance(left, (Add, Sub)))
        if isinstance(node, Div):
            needs = not _is_atom(right)
        else:
            needs = isinstance(right, (Add, Sub, Mul, Div)) or _is_negative(right)
        right_text = _wrap(to_text(right), needs)
    return f"{left_text}{SYMBOLS[type(node)]}{right_text}"


def evaluate(node, z):
    """Evaluate a tree at a scalar or an array of complex points."""
    z = np.asarray(z, dtype=complex)
    with np.errstate(divide="ignore", invalid="ignore", over="ignore"):
        return _evaluate(node, z)


def _evaluate(node, z):
    if isinstance(node, Var):
        return z
    if isinstance(node, Num):
        return np.full(z.shape, node.value, dtype=complex)
    if isinstance(node, Neg):
        return -_evaluate(node.operand, z)
    if isinstance(node, Exp):
        return np.exp(_evaluate(node.argument, z))
    if isinstance(node, Pow):
        base = _evaluate(node.base, z)
        if node.exponent < 0:
            return 1.0 / base ** (-node.exponent)
        return base ** node.exponent
    left = _evaluate(node.left, z)
    right = _evaluate(node.right, z)
    if isinstance(node, Add):
        return left + right
    if isinstance(node, Sub):
        return left - right
    if isinstance(node, Mul):
        return left * right
    return left / right


def constants(node):
    """Every numeric constant in the tree."""
    if isinstance(node, Num):
        return [node.value]
    if isinstance(node, Var):
        return []
    if isinstance(node, (Neg, Exp)):
        return constants(node.operand if isinstance(node, Neg) else node.argument)
    if isinstance(node, Pow):
        return constants(node.base)
    return constants(node.left) + constants(node.right)


def is_conjugate_symmetric(node):
    """True when every constant is real, so F(conj z) = conj F(z)."""
    return all(c.imag == 0 for c in constants(node))
