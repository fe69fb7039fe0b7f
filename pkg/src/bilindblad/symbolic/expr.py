"""Exact scalar expressions over named coordinates and formal parameters.

Expressions are plain sympy objects built only from rationals, symbols, sums,
products, integer powers, ``exp`` and ``sqrt``.  This module owns the text
grammar, exact differentiation, substitution and the zero test that backs
every symbolic verification in the package.
"""

from __future__ import annotations

import random
from dataclasses import dataclass
from typing import Iterable, Mapping, Sequence

import mpmath
import sympy as sp

Expression = sp.Expr

# Formal parameters that may appear next to chart coordinates.
PARAMETERS = ("lam", "hbar", "gamma", "omega")

_FUNCTIONS = {"exp": sp.exp, "sqrt": sp.sqrt}


class ExpressionSyntaxError(ValueError):
    """Raised for malformed expression text; carries a 1-based position."""

    def __init__(self, message: str, text: str, pos: int):
        line = text.count("\n", 0, pos) + 1
        col = pos - (text.rfind("\n", 0, pos) + 1) + 1
        super().__init__(f"{message} at line {line}, column {col}: {text!r}")
        self.line = line
        self.column = col


class InconclusiveZeroTest(ArithmeticError):
    """No sample point landed inside the domain of every sqrt."""


def symbol(name: str) -> sp.Symbol:
    return sp.Symbol(name)


def symbols(names: Iterable[str]) -> tuple[sp.Symbol, ...]:
    return tuple(sp.Symbol(n) for n in names)


# ---------------------------------------------------------------------------
# Parsing
# ---------------------------------------------------------------------------

class _Parser:
    # expr   := term (('+'|'-') term)*
    # term   := unary (('*'|'/') unary)*
    # unary  := '-' unary | power
    # power  := atom ('^' unary)?
    # atom   := INT | IDENT | IDENT '(' expr ')' | '(' expr ')'

    def __init__(self, text: str):
        self.text = text
        self.pos = 0

    def error(self, msg: str, pos: int | None = None):
        raise ExpressionSyntaxError(msg, self.text, self.pos if pos is None else pos)

    def skip(self) -> None:
        while self.pos < len(self.text) and self.text[self.pos].isspace():
            self.pos += 1

    def peek(self) -> str:
        self.skip()
        return self.text[self.pos] if self.pos < len(self.text) else ""

    def parse(self) -> sp.Expr:
        if not self.text.strip():
            self.error("empty expression")
        e = self.expr()
        if self.peek():
            self.error(f"unexpected character {self.peek()!r}")
        return e

    def expr(self) -> sp.Expr:
        e = self.term()
        while self.peek() in ("+", "-"):
            op = self.text[self.pos]
            self.pos += 1
            rhs = self.term()
            e = e + rhs if op == "+" else e - rhs
        return e

    def term(self) -> sp.Expr:
        e = self.unary()
        while self.peek() in ("*", "/"):
            op = self.text[self.pos]
            self.pos += 1
            rhs = self.unary()
            if op == "*":
                e = e * rhs
            else:
                if rhs == 0:
                    self.error("division by zero")
                e = e / rhs
        return e

    def unary(self) -> sp.Expr:
        if self.peek() == "-":
            self.pos += 1
            return -self.unary()
        if self.peek() == "+":
            self.pos += 1
            return self.unary()
        return self.power()

    def power(self) -> sp.Expr:
        base = self.atom()
        if self.peek() == "^":
            self.pos += 1
            start = self.pos
            exponent = self.unary()
            if not exponent.is_Integer:
                self.error("exponent must be an integer", start)
            return base ** exponent
        return base

    def atom(self) -> sp.Expr:
        c = self.peek()
        start = self.pos
        if not c:
            self.error("unexpected end of expression")
        if c.isdigit():
            while self.pos < len(self.text) and self.text[self.pos].isdigit():
                self.pos += 1
            return sp.Integer(int(self.text[start:self.pos]))
        if c.isalpha() or c == "_":
            while self.pos < len(self.text) and (self.text[self.pos].isalnum() or self.text[self.pos] == "_"):
                self.pos += 1
            name = self.text[start:self.pos]
            if self.peek() == "(":
                if name not in _FUNCTIONS:
                    self.error(f"unknown function {name!r}", start)
                self.pos += 1
                arg = self.expr()
                if self.peek() != ")":
                    self.error("expected ')'")
                self.pos += 1
                return _FUNCTIONS[name](arg)
            if name in _FUNCTIONS:
                self.error(f"function {name!r} needs an argument", start)
            return sp.Symbol(name)
        if c == "(":
            self.pos += 1
            e = self.expr()
            if self.peek() != ")":
                self.error("expected ')'")
            self.pos += 1
            return e
        self.error(f"unexpected character {c!r}")


def parse(text: str, allowed: Iterable[str] | None = None) -> sp.Expr:
    """Parse expression text.  ``allowed`` restricts the free identifiers."""
    e = _Parser(text).parse()
    if allowed is not None:
        allowed = set(allowed)
        unknown = sorted(s.name for s in e.free_symbols if s.name not in allowed)
        if unknown:
            raise ValueError(f"unknown identifier(s) {', '.join(unknown)} in {text!r}")
    return e


def to_text(e: sp.Expr) -> str:
    """Render an expression in the parse grammar (``^`` for powers)."""
    return sp.sstr(e, order="lex").replace("**", "^")


# ---------------------------------------------------------------------------
# Calculus and simplification
# ---------------------------------------------------------------------------

def differentiate(e: sp.Expr, v: str | sp.Symbol) -> sp.Expr:
    v = sp.Symbol(v) if isinstance(v, str) else v
    return sp.diff(sp.sympify(e), v)


def restrict(e: sp.Expr, bindings: Mapping[str, sp.Expr | str | int]) -> sp.Expr:
    """Substitute bindings in insertion order, then simplify.

    Sequential order lets a later binding act on symbols introduced by an
    earlier one, e.g. ``p1 -> -r*p`` followed by ``r -> 1``.
    """
    out = sp.sympify(e)
    for name, value in bindings.items():
        if isinstance(value, str):
            value = parse(value)
        out = out.subs(sp.Symbol(name), sp.sympify(value))
    return simplify(out)


def _has_transcendental(e: sp.Expr) -> bool:
    return any(
        isinstance(a, sp.exp) or (isinstance(a, sp.Pow) and not a.exp.is_Integer)
        for a in sp.preorder_traversal(e)
    )


def simplify(e: sp.Expr) -> sp.Expr:
    """Expand; exp/sqrt composites additionally get their factors regrouped."""
    out = sp.expand(sp.sympify(e))
    if _has_transcendental(out):
        out = sp.expand(sp.powsimp(sp.together(out), combine="exp"))
        num, den = sp.fraction(out)
        if sp.expand(num) == 0:
            return sp.Integer(0)
    return out


@dataclass(frozen=True)
class ZeroTest:
    is_zero: bool
    method: str  # "structural" or "probabilistic"


def _random_point(rng: random.Random, names: Sequence[sp.Symbol]) -> dict[sp.Symbol, sp.Rational]:
    point = {}
    for s in names:
        num = rng.randint(-40, 40)
        den = rng.randint(1, 16)
        point[s] = sp.Rational(num, den)
    return point


def zero_test(e: sp.Expr, samples: int = 16, seed: int = 0, rtol: float = 1e-12) -> ZeroTest:
    """Decide whether ``e`` is identically zero.

    Structural expansion first.  When that leaves something behind (typical
    for exp/sqrt composites), evaluate at ``samples`` random rational points
    with 50-digit arithmetic.  A nonzero value is a witness; all-zero samples
    give a probabilistic ``True``.
    """
    e = sp.sympify(e)
    if e == 0:
        return ZeroTest(True, "structural")
    ex = sp.expand(e)
    if ex == 0:
        return ZeroTest(True, "structural")
    ex = simplify(ex)
    if ex == 0:
        return ZeroTest(True, "structural")
    if not ex.free_symbols:
        val = complex(ex.evalf(50))
        return ZeroTest(abs(val) < rtol, "structural")

    names = sorted(ex.free_symbols, key=lambda s: s.name)
    fn = sp.lambdify(names, ex, modules="mpmath")
    scale_terms = [sp.lambdify(names, a, modules="mpmath") for a in sp.Add.make_args(ex)]
    rng = random.Random(seed)
    hits = 0
    attempts = 0
    with mpmath.workdps(50):
        while hits < samples and attempts < 40 * samples:
            attempts += 1
            point = _random_point(rng, names)
            args = [mpmath.mpf(int(v.p)) / int(v.q) for v in point.values()]
            try:
                val = fn(*args)
                scale = max((abs(t(*args)) for t in scale_terms), default=1)
            except (ZeroDivisionError, ValueError):
                continue
            if isinstance(val, mpmath.mpc) and _has_sqrt_of_negative(ex, point):
                continue
            hits += 1
            if abs(val) > rtol * max(1, scale):
                return ZeroTest(False, "probabilistic")
    if hits == 0:
        raise InconclusiveZeroTest(f"no admissible sample point for {ex}")
    return ZeroTest(True, "probabilistic")


def _has_sqrt_of_negative(e: sp.Expr, point: Mapping[sp.Symbol, sp.Rational]) -> bool:
    for node in sp.preorder_traversal(e):
        if isinstance(node, sp.Pow) and not node.exp.is_Integer:
            if sp.N(node.base.subs(point), 30) < 0:
                return True
    return False


def is_zero(e: sp.Expr, samples: int = 16, seed: int = 0) -> bool:
    return zero_test(e, samples=samples, seed=seed).is_zero


def evaluate(e: sp.Expr, point: Mapping[str, float]) -> float:
    """Numerical value at a point given by name; complex results are rejected."""
    subs = {sp.Symbol(k): sp.nsimplify(v) if isinstance(v, int) else v for k, v in point.items()}
    val = complex(sp.sympify(e).evalf(30, subs=subs))
    if abs(val.imag) > 1e-12 * max(1.0, abs(val.real)):
        raise ValueError(f"expression leaves the real domain at {dict(point)}")
    return val.real


def random_polynomial(rng: random.Random, names: Sequence[str], degree: int = 3, terms: int = 4) -> sp.Expr:
    """Random polynomial with small integer coefficients, for property checks."""
    syms = symbols(names)
    out = sp.Integer(0)
    for _ in range(terms):
        mono = sp.Integer(rng.randint(-5, 5))
        for _ in range(rng.randint(0, degree)):
            mono *= rng.choice(syms)
        out += mono
    return sp.expand(out)
