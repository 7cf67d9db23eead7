"""Expression language for time-dependent Hamiltonians H(t, x1..x2n).

The grammar, lowest to highest precedence:

    additive        a + b | a - b
    multiplicative  a * b | a / b
    unary           -a
    power           a ^ k          (k a literal integer, possibly negative)
    atom            number | t | x1..x2n | call | ( expr )

Calls: ``sin cos exp sqrt abs`` take one argument.  ``bump(e1,..,em; c1,..,cm,R)``
is the smooth compactly supported window exp(1 - 1/(1 - r^2)) of the scaled
radius r = |(e1,..,em) - c| / R, equal to 1 at the center and exactly 0 for
r >= 1.  ``cutexp(e, k)`` is the smooth one-sided kernel exp(-1/w)/w^k for
w > 0 and 0 for w <= 0; it exists so that derivatives of ``bump`` stay inside
the language and is mainly produced by :func:`grad`.

ASTs are immutable and compare structurally.  Canonical trees never carry a
negative numeric literal (a leading minus parses as a ``neg`` node), so
printing with :func:`to_source` and re-parsing reproduces the tree exactly.
"""

from __future__ import annotations

import math
import re
from dataclasses import dataclass

from .errors import DslParseError, EvalError, UnsupportedNodeError

__all__ = [
    "Expr", "Num", "Var", "Unary", "Bin", "Pow", "Bump", "CutExp",
    "parse", "to_source", "evaluate", "grad", "simplify", "max_x_index",
    "cutexp_value", "plateau_window",
]

UNARY_OPS = ("neg", "sin", "cos", "exp", "sqrt", "abs")
BIN_OPS = ("+", "-", "*", "/")

T_INDEX = -1  # Var index standing for the time variable


class Expr:
    """Base class for AST nodes."""

    __slots__ = ()


@dataclass(frozen=True)
class Num(Expr):
    value: float

    def __post_init__(self):
        object.__setattr__(self, "value", float(self.value))


@dataclass(frozen=True)
class Var(Expr):
    index: int  # T_INDEX for t, else 0-based coordinate (x1 -> 0)


@dataclass(frozen=True)
class Unary(Expr):
    op: str
    arg: Expr


@dataclass(frozen=True)
class Bin(Expr):
    op: str
    left: Expr
    right: Expr


@dataclass(frozen=True)
class Pow(Expr):
    base: Expr
    exponent: int


@dataclass(frozen=True)
class Bump(Expr):
    args: tuple
    center: tuple
    radius: float

    def __post_init__(self):
        if self.radius <= 0:
            raise ValueError("bump radius must be positive")
        if len(self.args) != len(self.center):
            raise ValueError("bump needs one center component per argument")


@dataclass(frozen=True)
class CutExp(Expr):
    arg: Expr
    k: int

    def __post_init__(self):
        if self.k < 0:
            raise ValueError("cutexp order must be non-negative")


# ---------------------------------------------------------------------------
# Tokenizer / parser

_TOKEN_RE = re.compile(
    r"\s*(?:(?P<num>(?:\d+\.?\d*|\.\d+)(?:[eE][+-]?\d+)?)"
    r"|(?P<ident>[A-Za-z_][A-Za-z_0-9]*)"
    r"|(?P<op>[-+*/^(),;]))"
)

_FUNCTIONS_1 = ("sin", "cos", "exp", "sqrt", "abs")


class _Parser:
    def __init__(self, src):
        self.src = src
        self.pos = 0
        self.tok = None
        self.tok_pos = 0
        self._advance()

    def _fail(self, expected):
        raise DslParseError(self.tok_pos, expected, self.src)

    def _advance(self):
        src, pos = self.src, self.pos
        while pos < len(src) and src[pos].isspace():
            pos += 1
        if pos >= len(src):
            self.tok = ("eof", "")
            self.tok_pos = len(src)
            self.pos = pos
            return
        m = _TOKEN_RE.match(src, pos)
        if m is None or m.start() != pos:
            self.tok_pos = pos
            self._fail("a number, name or operator")
        self.tok_pos = m.start(m.lastgroup)
        self.tok = (m.lastgroup, m.group(m.lastgroup))
        self.pos = m.end()

    def _accept_op(self, *ops):
        if self.tok[0] == "op" and self.tok[1] in ops:
            op = self.tok[1]
            self._advance()
            return op
        return None

    def _expect_op(self, op):
        if self._accept_op(op) is None:
            self._fail(f"'{op}'")

    def parse(self):
        e = self.additive()
        if self.tok[0] != "eof":
            self._fail("end of expression")
        return e

    def additive(self):
        e = self.multiplicative()
        while True:
            op = self._accept_op("+", "-")
            if op is None:
                return e
            e = Bin(op, e, self.multiplicative())

    def multiplicative(self):
        e = self.unary()
        while True:
            op = self._accept_op("*", "/")
            if op is None:
                return e
            e = Bin(op, e, self.unary())

    def unary(self):
        if self._accept_op("-"):
            return Unary("neg", self.unary())
        return self.power()

    def power(self):
        e = self.atom()
        if self._accept_op("^"):
            e = Pow(e, self._int_literal())
        return e

    def _int_literal(self):
        sign = -1 if self._accept_op("-") else 1
        kind, text = self.tok
        if kind != "num" or not re.fullmatch(r"\d+", text):
            self._fail("an integer exponent")
        self._advance()
        return sign * int(text)

    def _number_literal(self):
        sign = -1.0 if self._accept_op("-") else 1.0
        kind, text = self.tok
        if kind != "num":
            self._fail("a number")
        self._advance()
        return sign * float(text)

    def atom(self):
        kind, text = self.tok
        if kind == "num":
            self._advance()
            return Num(float(text))
        if kind == "ident":
            return self._ident_atom(text)
        if self._accept_op("("):
            e = self.additive()
            self._expect_op(")")
            return e
        self._fail("a number, variable, call or '('")

    def _ident_atom(self, name):
        self._advance()
        if name == "t":
            return Var(T_INDEX)
        m = re.fullmatch(r"x(\d+)", name)
        if m is not None:
            idx = int(m.group(1))
            if idx < 1:
                self._fail("a coordinate index >= 1")
            return Var(idx - 1)
        if name in _FUNCTIONS_1:
            self._expect_op("(")
            arg = self.additive()
            self._expect_op(")")
            return Unary(name, arg)
        if name == "bump":
            return self._bump_call()
        if name == "cutexp":
            self._expect_op("(")
            arg = self.additive()
            self._expect_op(",")
            k = self._int_literal()
            if k < 0:
                self._fail("a non-negative cutexp order")
            self._expect_op(")")
            return CutExp(arg, k)
        self._fail("a known function or variable name")

    def _bump_call(self):
        self._expect_op("(")
        args = [self.additive()]
        while self._accept_op(","):
            args.append(self.additive())
        self._expect_op(";")
        params = [self._number_literal()]
        while self._accept_op(","):
            params.append(self._number_literal())
        self._expect_op(")")
        if len(params) != len(args) + 1:
            self._fail(f"{len(args)} center components and a radius")
        radius = params[-1]
        if radius <= 0:
            self._fail("a positive bump radius")
        return Bump(tuple(args), tuple(params[:-1]), radius)


def parse(src: str) -> Expr:
    """Parse an expression string into an AST.

    Raises DslParseError (with byte offset, expected-token description and
    the source excerpt) on malformed input; trailing garbage is rejected.
    """
    return _Parser(src).parse()


# ---------------------------------------------------------------------------
# Printing

_PREC = {"add": 1, "mul": 2, "unary": 3, "power": 4, "atom": 5}


def _prec(e):
    if isinstance(e, Bin):
        return _PREC["add"] if e.op in "+-" else _PREC["mul"]
    if isinstance(e, Unary) and e.op == "neg":
        return _PREC["unary"]
    if isinstance(e, Pow):
        return _PREC["power"]
    return _PREC["atom"]


def _num_repr(v):
    return repr(int(v)) if float(v).is_integer() and abs(v) < 1e16 else repr(v)


def to_source(e: Expr) -> str:
    """Render an AST back to source; parse(to_source(e)) == e for canonical
    trees (those whose numeric literals are non-negative)."""
    return _print(e)


def _wrap(child, parent_prec, strict=False):
    text = _print(child)
    cp = _prec(child)
    if cp < parent_prec or (strict and cp == parent_prec):
        return f"({text})"
    return text


def _print(e):
    if isinstance(e, Num):
        return _num_repr(e.value)
    if isinstance(e, Var):
        return "t" if e.index == T_INDEX else f"x{e.index + 1}"
    if isinstance(e, Unary):
        if e.op == "neg":
            return "-" + _wrap(e.arg, _PREC["unary"])
        return f"{e.op}({_print(e.arg)})"
    if isinstance(e, Bin):
        if e.op in "+-":
            # right operand of - needs parens at equal precedence
            return (_wrap(e.left, _PREC["add"])
                    + f" {e.op} "
                    + _wrap(e.right, _PREC["add"], strict=e.op == "-"))
        return (_wrap(e.left, _PREC["mul"])
                + f"{e.op}"
                + _wrap(e.right, _PREC["mul"], strict=e.op == "/"))
    if isinstance(e, Pow):
        return f"{_wrap(e.base, _PREC['power'], strict=True)}^{e.exponent}"
    if isinstance(e, Bump):
        args = ",".join(_print(a) for a in e.args)
        params = ",".join(_num_repr(c) for c in e.center + (e.radius,))
        return f"bump({args}; {params})"
    if isinstance(e, CutExp):
        return f"cutexp({_print(e.arg)}, {e.k})"
    raise TypeError(f"not an Expr: {e!r}")


# ---------------------------------------------------------------------------
# Evaluation

def cutexp_value(w: float, k: int) -> float:
    """exp(-1/w)/w^k for w > 0, else 0; smooth across w = 0.

    The denominator is built by repeated multiplication so that every
    evaluator in the package produces bit-identical values (k >= 0).
    """
    if w <= 0.0:
        return 0.0
    g = math.exp(-1.0 / w)
    if g == 0.0:
        return 0.0
    p = 1.0
    for _ in range(k):
        p *= w
    return g / p


def evaluate(e: Expr, t: float, x) -> float:
    """Reference tree-walking evaluator.

    Raises EvalError (carrying the node path) on division by zero or a
    negative sqrt argument.  Hot paths use the compiled program form in
    heislab._kernels instead; both produce identical values.
    """
    return _eval(e, float(t), x, ())


def _eval(e, t, x, path):
    if isinstance(e, Num):
        return e.value
    if isinstance(e, Var):
        if e.index == T_INDEX:
            return t
        if e.index >= len(x):
            raise EvalError(f"coordinate x{e.index + 1} beyond dimension {len(x)}", path)
        return float(x[e.index])
    if isinstance(e, Unary):
        v = _eval(e.arg, t, x, path + (e.op,))
        if e.op == "neg":
            return -v
        if e.op == "sin":
            return math.sin(v)
        if e.op == "cos":
            return math.cos(v)
        if e.op == "exp":
            return math.exp(v)
        if e.op == "sqrt":
            if v < 0.0:
                raise EvalError("sqrt of negative value", path + (e.op,))
            return math.sqrt(v)
        if e.op == "abs":
            return abs(v)
    if isinstance(e, Bin):
        a = _eval(e.left, t, x, path + (e.op, "left"))
        b = _eval(e.right, t, x, path + (e.op, "right"))
        if e.op == "+":
            return a + b
        if e.op == "-":
            return a - b
        if e.op == "*":
            return a * b
        if b == 0.0:
            raise EvalError("division by zero", path + (e.op,))
        return a / b
    if isinstance(e, Pow):
        v = _eval(e.base, t, x, path + ("pow",))
        if e.exponent < 0 and v == 0.0:
            raise EvalError("zero raised to a negative power", path + ("pow",))
        return _powi(v, e.exponent)
    if isinstance(e, Bump):
        # mirror the compiled-program evaluation order exactly
        u = 0.0
        for a, c in zip(e.args, e.center):
            d = _eval(a, t, x, path + ("bump",)) - c
            u += d * d
        w = 1.0 - u / (e.radius * e.radius)
        return math.e * cutexp_value(w, 0)
    if isinstance(e, CutExp):
        return cutexp_value(_eval(e.arg, t, x, path + ("cutexp",)), e.k)
    raise TypeError(f"not an Expr: {e!r}")


def _powi(v, k):
    if k < 0:
        return 1.0 / _powi(v, -k)
    out = 1.0
    for _ in range(k):
        out *= v
    return out


def max_x_index(e: Expr) -> int:
    """Largest 1-based coordinate index used, 0 if none."""
    if isinstance(e, Var):
        return 0 if e.index == T_INDEX else e.index + 1
    if isinstance(e, Unary):
        return max_x_index(e.arg)
    if isinstance(e, Bin):
        return max(max_x_index(e.left), max_x_index(e.right))
    if isinstance(e, Pow):
        return max_x_index(e.base)
    if isinstance(e, Bump):
        return max((max_x_index(a) for a in e.args), default=0)
    if isinstance(e, CutExp):
        return max_x_index(e.arg)
    return 0


def uses_time(e: Expr) -> bool:
    if isinstance(e, Var):
        return e.index == T_INDEX
    if isinstance(e, Unary):
        return uses_time(e.arg)
    if isinstance(e, Bin):
        return uses_time(e.left) or uses_time(e.right)
    if isinstance(e, Pow):
        return uses_time(e.base)
    if isinstance(e, Bump):
        return any(uses_time(a) for a in e.args)
    if isinstance(e, CutExp):
        return uses_time(e.arg)
    return False


# ---------------------------------------------------------------------------
# Simplification (constant folding and unit/zero elimination)

def _canon_num(v):
    if v < 0.0:
        return Unary("neg", Num(-v))
    return Num(v)


def _num_of(e):
    """Value of a constant node, honoring the canonical neg(Num) form."""
    if isinstance(e, Num):
        return e.value
    if isinstance(e, Unary) and e.op == "neg" and isinstance(e.arg, Num):
        return -e.arg.value
    return None


_UNARY_FOLD = {"neg": lambda v: -v, "sin": math.sin, "cos": math.cos,
               "exp": math.exp, "abs": abs}


def simplify(e: Expr) -> Expr:
    """Structural simplification; keeps numeric literals non-negative."""
    if isinstance(e, Unary):
        a = simplify(e.arg)
        va = _num_of(a)
        if va is not None and e.op in _UNARY_FOLD:
            return _canon_num(_UNARY_FOLD[e.op](va))
        if va is not None and e.op == "sqrt" and va >= 0:
            return _canon_num(math.sqrt(va))
        if e.op == "neg" and isinstance(a, Unary) and a.op == "neg":
            return a.arg
        return Unary(e.op, a)
    if isinstance(e, Bin):
        a, b = simplify(e.left), simplify(e.right)
        va, vb = _num_of(a), _num_of(b)
        if va is not None and vb is not None:
            if e.op == "+":
                return _canon_num(va + vb)
            if e.op == "-":
                return _canon_num(va - vb)
            if e.op == "*":
                return _canon_num(va * vb)
            if vb != 0.0:
                return _canon_num(va / vb)
        if e.op == "+":
            if va == 0.0:
                return b
            if vb == 0.0:
                return a
        elif e.op == "-":
            if vb == 0.0:
                return a
            if va == 0.0:
                return simplify(Unary("neg", b))
        elif e.op == "*":
            if va == 0.0 or vb == 0.0:
                return Num(0.0)
            if va == 1.0:
                return b
            if vb == 1.0:
                return a
            if va == -1.0:
                return simplify(Unary("neg", b))
            if vb == -1.0:
                return simplify(Unary("neg", a))
        elif e.op == "/":
            if va == 0.0:
                return Num(0.0)
            if vb == 1.0:
                return a
        return Bin(e.op, a, b)
    if isinstance(e, Pow):
        base = simplify(e.base)
        if e.exponent == 0:
            return Num(1.0)
        if e.exponent == 1:
            return base
        vb = _num_of(base)
        if vb is not None and (vb != 0.0 or e.exponent > 0):
            return _canon_num(_powi(vb, e.exponent))
        return Pow(base, e.exponent)
    if isinstance(e, Bump):
        return Bump(tuple(simplify(a) for a in e.args), e.center, e.radius)
    if isinstance(e, CutExp):
        return CutExp(simplify(e.arg), e.k)
    return e


# ---------------------------------------------------------------------------
# Symbolic differentiation

def grad(e: Expr, n: int) -> list:
    """Spatial gradient: the 2n partials d(e)/dx_i as simplified ASTs.

    ``abs`` is rejected (UnsupportedNodeError): it is allowed in reporting
    expressions but never inside Hamiltonians fed to the integrator.
    """
    return [simplify(_diff(e, i)) for i in range(2 * n)]


def _diff(e, i):
    if isinstance(e, (Num,)):
        return Num(0.0)
    if isinstance(e, Var):
        return Num(1.0) if e.index == i else Num(0.0)
    if isinstance(e, Unary):
        da = _diff(e.arg, i)
        if e.op == "neg":
            return Unary("neg", da)
        if e.op == "sin":
            return Bin("*", Unary("cos", e.arg), da)
        if e.op == "cos":
            return Unary("neg", Bin("*", Unary("sin", e.arg), da))
        if e.op == "exp":
            return Bin("*", Unary("exp", e.arg), da)
        if e.op == "sqrt":
            return Bin("/", da, Bin("*", Num(2.0), Unary("sqrt", e.arg)))
        raise UnsupportedNodeError("abs is not differentiable; rewrite the expression")
    if isinstance(e, Bin):
        da, db = _diff(e.left, i), _diff(e.right, i)
        if e.op in "+-":
            return Bin(e.op, da, db)
        if e.op == "*":
            return Bin("+", Bin("*", da, e.right), Bin("*", e.left, db))
        num = Bin("-", Bin("*", da, e.right), Bin("*", e.left, db))
        return Bin("/", num, Pow(e.right, 2))
    if isinstance(e, Pow):
        da = _diff(e.base, i)
        return Bin("*", Bin("*", Num(float(e.exponent)), Pow(e.base, e.exponent - 1)), da)
    if isinstance(e, Bump):
        return _diff_bump(e, i)
    if isinstance(e, CutExp):
        outer = Bin("-", CutExp(e.arg, e.k + 2),
                    Bin("*", Num(float(e.k)), CutExp(e.arg, e.k + 1)))
        return Bin("*", outer, _diff(e.arg, i))
    raise TypeError(f"not an Expr: {e!r}")


def _bump_w(e):
    """The smooth window argument w = 1 - |args - c|^2 / R^2 of a bump."""
    u = None
    for a, c in zip(e.args, e.center):
        term = Pow(Bin("-", a, Num(c)) if c >= 0 else Bin("+", a, Num(-c)), 2)
        u = term if u is None else Bin("+", u, term)
    return Bin("-", Num(1.0), Bin("/", u, Num(e.radius * e.radius)))


def _diff_bump(e, i):
    # d(bump)/dx_i = e * cutexp(w, 2) * dw/dx_i, with the derivative of the
    # one-sided kernel kept inside CutExp so it vanishes identically outside
    # the support instead of dividing by (1 - r^2).
    w = _bump_w(e)
    r2 = e.radius * e.radius
    dw = None
    for a, c in zip(e.args, e.center):
        da = _diff(a, i)
        centered = Bin("-", a, Num(c)) if c >= 0 else Bin("+", a, Num(-c))
        term = Bin("*", centered, da)
        dw = term if dw is None else Bin("+", dw, term)
    dw = Unary("neg", Bin("/", Bin("*", Num(2.0), dw), Num(r2)))
    return Bin("*", Num(math.e), Bin("*", CutExp(w, 2), dw))


# ---------------------------------------------------------------------------
# Smooth plateau window (1 on an inner ball, 0 outside an outer ball)

def plateau_window(center, inner_radius: float, outer_radius: float) -> Expr:
    """Smooth radial window: exactly 1 for |x - c| <= inner_radius and exactly
    0 for |x - c| >= outer_radius, built from cutexp partitions of unity.

    Used to cut a Hamiltonian off outside a support region without altering
    it on the inner ball.
    """
    if not 0 < inner_radius < outer_radius:
        raise ValueError("need 0 < inner_radius < outer_radius")
    u = None
    for i, c in enumerate(center):
        xi = Var(i)
        term = Pow(Bin("-", xi, Num(c)) if c >= 0 else Bin("+", xi, Num(-c)), 2)
        u = term if u is None else Bin("+", u, term)
    r2o, r2i = outer_radius ** 2, inner_radius ** 2
    # w runs 1 -> 0 as |x-c|^2 runs inner^2 -> outer^2
    w = Bin("/", Bin("-", Num(r2o), u), Num(r2o - r2i))
    one_minus_w = Bin("-", Num(1.0), w)
    g, g1 = CutExp(w, 0), CutExp(one_minus_w, 0)
    return simplify(Bin("/", g, Bin("+", g, g1)))
