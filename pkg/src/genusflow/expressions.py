"""Symbolic expressions in the variables x, y, t.

Small fixed grammar: constants, the three variables, sin/cos/exp, the four
arithmetic operators and integer powers.  Enough to write curve functions,
damping terms and forcing; deliberately not a CAS.  Simplification is limited
to constant folding and 0/1 identities so printed output stays predictable.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

__all__ = [
    "Expr",
    "Const",
    "Var",
    "Neg",
    "Fun",
    "Add",
    "Sub",
    "Mul",
    "Div",
    "Pow",
    "ExprError",
    "ExprSyntaxError",
    "UnknownIdentifierError",
    "EvaluationError",
    "parse_expr",
    "diff",
    "eval_expr",
    "expr_to_str",
    "compile_expr",
    "variables_of",
]

VARIABLES = ("x", "y", "t")
FUNCTIONS = ("sin", "cos", "exp")


class ExprError(Exception):
    pass


class ExprSyntaxError(ExprError):
    """Malformed input; `offset` is the byte position of the problem."""

    def __init__(self, message, offset):
        super().__init__(f"{message} (at offset {offset})")
        self.offset = offset


class UnknownIdentifierError(ExprError):
    def __init__(self, name, offset):
        super().__init__(f"unknown identifier '{name}' (at offset {offset})")
        self.name = name
        self.offset = offset


class EvaluationError(ExprError):
    pass


class Expr:
    """Base node.  Nodes are immutable and compared structurally."""

    __slots__ = ()

    def __add__(self, other):
        return add(self, _coerce(other))

    def __radd__(self, other):
        return add(_coerce(other), self)

    def __sub__(self, other):
        return sub(self, _coerce(other))

    def __rsub__(self, other):
        return sub(_coerce(other), self)

    def __mul__(self, other):
        return mul(self, _coerce(other))

    def __rmul__(self, other):
        return mul(_coerce(other), self)

    def __truediv__(self, other):
        return div(self, _coerce(other))

    def __rtruediv__(self, other):
        return div(_coerce(other), self)

    def __pow__(self, n):
        return pow_(self, n)

    def __neg__(self):
        return neg(self)

    def __str__(self):
        return expr_to_str(self)


def _coerce(v):
    if isinstance(v, Expr):
        return v
    if isinstance(v, (int, float)):
        return Const(float(v))
    raise TypeError(f"cannot use {type(v).__name__} in an expression")


@dataclass(frozen=True, slots=True)
class Const(Expr):
    value: float

    def __post_init__(self):
        object.__setattr__(self, "value", float(self.value))


@dataclass(frozen=True, slots=True)
class Var(Expr):
    name: str

    def __post_init__(self):
        if self.name not in VARIABLES:
            raise ValueError(f"variable must be one of {VARIABLES}, got {self.name!r}")


@dataclass(frozen=True, slots=True)
class Neg(Expr):
    arg: Expr


@dataclass(frozen=True, slots=True)
class Fun(Expr):
    name: str
    arg: Expr

    def __post_init__(self):
        if self.name not in FUNCTIONS:
            raise ValueError(f"function must be one of {FUNCTIONS}, got {self.name!r}")


@dataclass(frozen=True, slots=True)
class Add(Expr):
    left: Expr
    right: Expr


@dataclass(frozen=True, slots=True)
class Sub(Expr):
    left: Expr
    right: Expr


@dataclass(frozen=True, slots=True)
class Mul(Expr):
    left: Expr
    right: Expr


@dataclass(frozen=True, slots=True)
class Div(Expr):
    left: Expr
    right: Expr


@dataclass(frozen=True, slots=True)
class Pow(Expr):
    base: Expr
    exponent: int

    def __post_init__(self):
        if not isinstance(self.exponent, int) or self.exponent < 0:
            raise ValueError("powers take a constant integer exponent >= 0")


X = Var("x")
Y = Var("y")
T = Var("t")
ZERO = Const(0.0)
ONE = Const(1.0)


def _is_const(e, value=None):
    return isinstance(e, Const) and (value is None or e.value == value)


# Smart constructors: constant folding plus 0/1 identities, nothing fancier.

def add(a, b):
    if _is_const(a) and _is_const(b):
        return Const(a.value + b.value)
    if _is_const(a, 0.0):
        return b
    if _is_const(b, 0.0):
        return a
    return Add(a, b)


def sub(a, b):
    if _is_const(a) and _is_const(b):
        return Const(a.value - b.value)
    if _is_const(b, 0.0):
        return a
    if _is_const(a, 0.0):
        return neg(b)
    return Sub(a, b)


def mul(a, b):
    if _is_const(a) and _is_const(b):
        return Const(a.value * b.value)
    if _is_const(a, 0.0) or _is_const(b, 0.0):
        return ZERO
    if _is_const(a, 1.0):
        return b
    if _is_const(b, 1.0):
        return a
    return Mul(a, b)


def div(a, b):
    if _is_const(b) and b.value != 0.0 and _is_const(a):
        return Const(a.value / b.value)
    if _is_const(b, 1.0):
        return a
    if _is_const(a, 0.0) and _is_const(b) and b.value != 0.0:
        return ZERO
    return Div(a, b)


def pow_(a, n):
    if isinstance(n, Const):
        if n.value != int(n.value):
            raise ValueError("powers take integer exponents")
        n = int(n.value)
    if not isinstance(n, int) or n < 0:
        raise ValueError("powers take a constant integer exponent >= 0")
    if n == 0:
        return ONE
    if n == 1:
        return a
    if _is_const(a):
        return Const(a.value**n)
    return Pow(a, n)


def neg(a):
    if _is_const(a):
        return Const(-a.value)
    if isinstance(a, Neg):
        return a.arg
    return Neg(a)


def fun(name, a):
    if _is_const(a):
        return Const(getattr(math, name)(a.value))
    return Fun(name, a)


def sin(a):
    return fun("sin", _coerce(a))


def cos(a):
    return fun("cos", _coerce(a))


def exp(a):
    return fun("exp", _coerce(a))


# ----------------------------------------------------------------------
# Parsing

_TOK_NUM = "num"
_TOK_IDENT = "ident"
_TOK_OP = "op"
_TOK_LPAREN = "("
_TOK_RPAREN = ")"
_TOK_END = "end"

_OPS = set("+-*/^")


def _tokenize(text):
    tokens = []
    i, n = 0, len(text)
    while i < n:
        ch = text[i]
        if ch.isspace():
            i += 1
            continue
        if ch in _OPS:
            tokens.append((_TOK_OP, ch, i))
            i += 1
        elif ch == "(":
            tokens.append((_TOK_LPAREN, ch, i))
            i += 1
        elif ch == ")":
            tokens.append((_TOK_RPAREN, ch, i))
            i += 1
        elif ch.isdigit() or ch == ".":
            j = i
            while j < n and (text[j].isdigit() or text[j] == "."):
                j += 1
            # exponent notation: 1e-3, 2.5E+10
            if j < n and text[j] in "eE":
                k = j + 1
                if k < n and text[k] in "+-":
                    k += 1
                if k < n and text[k].isdigit():
                    while k < n and text[k].isdigit():
                        k += 1
                    j = k
            lit = text[i:j]
            try:
                value = float(lit)
            except ValueError:
                raise ExprSyntaxError(f"bad number literal '{lit}'", i) from None
            tokens.append((_TOK_NUM, value, i))
            i = j
        elif ch.isalpha() or ch == "_":
            j = i
            while j < n and (text[j].isalnum() or text[j] == "_"):
                j += 1
            tokens.append((_TOK_IDENT, text[i:j], i))
            i = j
        else:
            raise ExprSyntaxError(f"unexpected character {ch!r}", i)
    tokens.append((_TOK_END, "", n))
    return tokens


class _Parser:
    def __init__(self, text):
        self.text = text
        self.tokens = _tokenize(text)
        self.pos = 0

    def peek(self):
        return self.tokens[self.pos]

    def advance(self):
        tok = self.tokens[self.pos]
        self.pos += 1
        return tok

    def expect(self, kind, what):
        tok = self.advance()
        if tok[0] != kind:
            raise ExprSyntaxError(f"expected {what}", tok[2])
        return tok

    def parse(self):
        e = self.sum_()
        tok = self.peek()
        if tok[0] != _TOK_END:
            raise ExprSyntaxError("unexpected trailing input", tok[2])
        return e

    def sum_(self):
        e = self.term()
        while True:
            kind, val, _ = self.peek()
            if kind == _TOK_OP and val in "+-":
                self.advance()
                rhs = self.term()
                e = add(e, rhs) if val == "+" else sub(e, rhs)
            else:
                return e

    def term(self):
        e = self.unary()
        while True:
            kind, val, _ = self.peek()
            if kind == _TOK_OP and val in "*/":
                self.advance()
                rhs = self.unary()
                e = mul(e, rhs) if val == "*" else div(e, rhs)
            else:
                return e

    def unary(self):
        kind, val, _ = self.peek()
        if kind == _TOK_OP and val == "-":
            self.advance()
            return neg(self.unary())
        if kind == _TOK_OP and val == "+":
            self.advance()
            return self.unary()
        return self.power()

    def power(self):
        e = self.atom()
        while True:
            kind, val, off = self.peek()
            if kind == _TOK_OP and val == "^":
                self.advance()
                e = pow_(e, self.exponent())
            else:
                return e

    def exponent(self):
        kind, val, off = self.advance()
        if kind == _TOK_LPAREN:
            inner = self.exponent()
            self.expect(_TOK_RPAREN, "')'")
            return inner
        if kind != _TOK_NUM:
            raise ExprSyntaxError("exponent must be a nonnegative integer", off)
        if val != int(val) or val < 0:
            raise ExprSyntaxError("exponent must be a nonnegative integer", off)
        return int(val)

    def atom(self):
        kind, val, off = self.advance()
        if kind == _TOK_NUM:
            return Const(val)
        if kind == _TOK_LPAREN:
            e = self.sum_()
            self.expect(_TOK_RPAREN, "')'")
            return e
        if kind == _TOK_IDENT:
            if val in VARIABLES:
                return Var(val)
            if val in FUNCTIONS:
                self.expect(_TOK_LPAREN, "'(' after function name")
                arg = self.sum_()
                self.expect(_TOK_RPAREN, "')'")
                return fun(val, arg)
            raise UnknownIdentifierError(val, off)
        raise ExprSyntaxError("expected a value", off)


def parse_expr(text):
    """Parse infix text into an expression tree.

    Raises ExprSyntaxError or UnknownIdentifierError with the byte offset of
    the offending token.
    """
    return _Parser(text).parse()


# ----------------------------------------------------------------------
# Differentiation

def diff(e, var):
    """Exact symbolic derivative of e with respect to 'x', 'y' or 't'."""
    if var not in VARIABLES:
        raise ValueError(f"differentiation variable must be one of {VARIABLES}")
    return _diff(e, var)


def _diff(e, v):
    if isinstance(e, Const):
        return ZERO
    if isinstance(e, Var):
        return ONE if e.name == v else ZERO
    if isinstance(e, Neg):
        return neg(_diff(e.arg, v))
    if isinstance(e, Fun):
        da = _diff(e.arg, v)
        if e.name == "sin":
            return mul(fun("cos", e.arg), da)
        if e.name == "cos":
            return mul(neg(fun("sin", e.arg)), da)
        return mul(fun("exp", e.arg), da)
    if isinstance(e, Add):
        return add(_diff(e.left, v), _diff(e.right, v))
    if isinstance(e, Sub):
        return sub(_diff(e.left, v), _diff(e.right, v))
    if isinstance(e, Mul):
        return add(mul(_diff(e.left, v), e.right), mul(e.left, _diff(e.right, v)))
    if isinstance(e, Div):
        num = sub(mul(_diff(e.left, v), e.right), mul(e.left, _diff(e.right, v)))
        return div(num, pow_(e.right, 2))
    if isinstance(e, Pow):
        inner = mul(Const(e.exponent), pow_(e.base, e.exponent - 1))
        return mul(inner, _diff(e.base, v))
    raise TypeError(f"not an expression node: {e!r}")


# ----------------------------------------------------------------------
# Evaluation

def eval_expr(e, x=0.0, y=0.0, t=0.0):
    """Evaluate at a point; raises EvaluationError on a non-finite result."""
    try:
        value = _eval(e, x, y, t)
    except (ZeroDivisionError, OverflowError) as err:
        raise EvaluationError(f"evaluation failed: {err}") from None
    if not math.isfinite(value):
        raise EvaluationError(f"non-finite result {value}")
    return value


def _eval(e, x, y, t):
    if isinstance(e, Const):
        return e.value
    if isinstance(e, Var):
        return x if e.name == "x" else (y if e.name == "y" else t)
    if isinstance(e, Neg):
        return -_eval(e.arg, x, y, t)
    if isinstance(e, Fun):
        return getattr(math, e.name)(_eval(e.arg, x, y, t))
    if isinstance(e, Add):
        return _eval(e.left, x, y, t) + _eval(e.right, x, y, t)
    if isinstance(e, Sub):
        return _eval(e.left, x, y, t) - _eval(e.right, x, y, t)
    if isinstance(e, Mul):
        return _eval(e.left, x, y, t) * _eval(e.right, x, y, t)
    if isinstance(e, Div):
        return _eval(e.left, x, y, t) / _eval(e.right, x, y, t)
    if isinstance(e, Pow):
        return _eval(e.base, x, y, t) ** e.exponent
    raise TypeError(f"not an expression node: {e!r}")


def variables_of(e):
    """Set of variable names appearing in e."""
    out = set()

    def walk(node):
        if isinstance(node, Var):
            out.add(node.name)
        elif isinstance(node, Neg):
            walk(node.arg)
        elif isinstance(node, Fun):
            walk(node.arg)
        elif isinstance(node, (Add, Sub, Mul, Div)):
            walk(node.left)
            walk(node.right)
        elif isinstance(node, Pow):
            walk(node.base)

    walk(e)
    return out


# ----------------------------------------------------------------------
# Printing and code generation

_PREC_ADD = 1
_PREC_MUL = 2
_PREC_UNARY = 3
_PREC_POW = 4
_PREC_ATOM = 5


def _fmt_const(v):
    if v == int(v) and abs(v) < 1e16:
        return str(int(v))
    return repr(v)


def _render(e):
    """Return (text, precedence)."""
    if isinstance(e, Const):
        if e.value < 0:
            return f"-{_fmt_const(-e.value)}", _PREC_UNARY
        return _fmt_const(e.value), _PREC_ATOM
    if isinstance(e, Var):
        return e.name, _PREC_ATOM
    if isinstance(e, Neg):
        s, p = _render(e.arg)
        if p < _PREC_UNARY:
            s = f"({s})"
        return f"-{s}", _PREC_UNARY
    if isinstance(e, Fun):
        s, _ = _render(e.arg)
        return f"{e.name}({s})", _PREC_ATOM
    if isinstance(e, (Add, Sub)):
        op = "+" if isinstance(e, Add) else "-"
        ls, lp = _render(e.left)
        rs, rp = _render(e.right)
        if lp < _PREC_ADD:
            ls = f"({ls})"
        # +,- are left-associative, so a nested sum on the right needs parens
        # to reparse to the same tree
        if rp <= _PREC_ADD:
            rs = f"({rs})"
        return f"{ls} {op} {rs}", _PREC_ADD
    if isinstance(e, (Mul, Div)):
        op = "*" if isinstance(e, Mul) else "/"
        ls, lp = _render(e.left)
        rs, rp = _render(e.right)
        if lp < _PREC_MUL:
            ls = f"({ls})"
        if rp <= _PREC_MUL:
            rs = f"({rs})"
        return f"{ls}{op}{rs}", _PREC_MUL
    if isinstance(e, Pow):
        bs, bp = _render(e.base)
        if bp < _PREC_ATOM:
            bs = f"({bs})"
        return f"{bs}^{e.exponent}", _PREC_POW
    raise TypeError(f"not an expression node: {e!r}")


def expr_to_str(e):
    """Infix text that reparses to a structurally equal tree."""
    return _render(e)[0]


def to_py_source(e):
    """Python source fragment over names x, y, t (math.* for functions)."""
    if isinstance(e, Const):
        return repr(e.value)
    if isinstance(e, Var):
        return e.name
    if isinstance(e, Neg):
        return f"(-{to_py_source(e.arg)})"
    if isinstance(e, Fun):
        return f"math.{e.name}({to_py_source(e.arg)})"
    if isinstance(e, Add):
        return f"({to_py_source(e.left)} + {to_py_source(e.right)})"
    if isinstance(e, Sub):
        return f"({to_py_source(e.left)} - {to_py_source(e.right)})"
    if isinstance(e, Mul):
        return f"({to_py_source(e.left)} * {to_py_source(e.right)})"
    if isinstance(e, Div):
        return f"({to_py_source(e.left)} / {to_py_source(e.right)})"
    if isinstance(e, Pow):
        return f"({to_py_source(e.base)} ** {e.exponent})"
    raise TypeError(f"not an expression node: {e!r}")


def compile_expr(e):
    """Compile to a plain python callable f(x, y, t) -> float.

    Same semantics as eval_expr on finite inputs but much faster; used by the
    integrators.  Non-finite results are the caller's problem here.
    """
    src = f"def _f(x, y, t):\n    return {to_py_source(e)}\n"
    ns = {"math": math}
    exec(src, ns)
    return ns["_f"]
