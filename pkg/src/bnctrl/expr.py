"""Boolean expression trees over gene identifiers.

Expressions are immutable and hashable.  They evaluate either on a mapping
``gene -> bool`` or, vectorised, on a mapping ``gene -> numpy bool array``.
"""
from __future__ import annotations

import re
from dataclasses import dataclass
from typing import Mapping

import numpy as np


class ExprSyntaxError(ValueError):
    def __init__(self, message: str, line: int | None = None):
        self.line = line
        if line is not None:
            message = f"line {line}: {message}"
        super().__init__(message)


class BoolExpr:
    """Base class; see Const, Var, Not, And, Or."""

    __slots__ = ()

    def variables(self) -> frozenset[str]:
        raise NotImplementedError

    def evaluate(self, env: Mapping[str, bool]) -> bool:
        raise NotImplementedError

    def evaluate_array(self, env: Mapping[str, np.ndarray], size: int) -> np.ndarray:
        raise NotImplementedError

    def substitute(self, values: Mapping[str, bool]) -> "BoolExpr":
        raise NotImplementedError

    def __invert__(self) -> "BoolExpr":
        return Not(self)

    def __and__(self, other: "BoolExpr") -> "BoolExpr":
        return And((self, other))

    def __or__(self, other: "BoolExpr") -> "BoolExpr":
        return Or((self, other))


@dataclass(frozen=True)
class Const(BoolExpr):
    value: bool

    def variables(self):
        return frozenset()

    def evaluate(self, env):
        return self.value

    def evaluate_array(self, env, size):
        return np.full(size, self.value, dtype=bool)

    def substitute(self, values):
        return self

    def __str__(self):
        return "1" if self.value else "0"


TRUE = Const(True)
FALSE = Const(False)


@dataclass(frozen=True)
class Var(BoolExpr):
    name: str

    def variables(self):
        return frozenset((self.name,))

    def evaluate(self, env):
        return bool(env[self.name])

    def evaluate_array(self, env, size):
        return env[self.name]

    def substitute(self, values):
        if self.name in values:
            return Const(bool(values[self.name]))
        return self

    def __str__(self):
        return self.name


@dataclass(frozen=True)
class Not(BoolExpr):
    arg: BoolExpr

    def variables(self):
        return self.arg.variables()

    def evaluate(self, env):
        return not self.arg.evaluate(env)

    def evaluate_array(self, env, size):
        return ~self.arg.evaluate_array(env, size)

    def substitute(self, values):
        inner = self.arg.substitute(values)
        if isinstance(inner, Const):
            return Const(not inner.value)
        return Not(inner)

    def __str__(self):
        if isinstance(self.arg, (Var, Const, Not)):
            return f"!{self.arg}"
        return f"!({self.arg})"


@dataclass(frozen=True)
class And(BoolExpr):
    args: tuple[BoolExpr, ...]

    def variables(self):
        return frozenset().union(*(a.variables() for a in self.args))

    def evaluate(self, env):
        return all(a.evaluate(env) for a in self.args)

    def evaluate_array(self, env, size):
        out = np.ones(size, dtype=bool)
        for a in self.args:
            out &= a.evaluate_array(env, size)
        return out

    def substitute(self, values):
        parts = []
        for a in self.args:
            s = a.substitute(values)
            if isinstance(s, Const):
                if not s.value:
                    return FALSE
                continue
            parts.append(s)
        if not parts:
            return TRUE
        return parts[0] if len(parts) == 1 else And(tuple(parts))

    def __str__(self):
        return " & ".join(_wrap(a, Or) for a in self.args)


@dataclass(frozen=True)
class Or(BoolExpr):
    args: tuple[BoolExpr, ...]

    def variables(self):
        return frozenset().union(*(a.variables() for a in self.args))

    def evaluate(self, env):
        return any(a.evaluate(env) for a in self.args)

    def evaluate_array(self, env, size):
        out = np.zeros(size, dtype=bool)
        for a in self.args:
            out |= a.evaluate_array(env, size)
        return out

    def substitute(self, values):
        parts = []
        for a in self.args:
            s = a.substitute(values)
            if isinstance(s, Const):
                if s.value:
                    return TRUE
                continue
            parts.append(s)
        if not parts:
            return FALSE
        return parts[0] if len(parts) == 1 else Or(tuple(parts))

    def __str__(self):
        return " | ".join(_wrap(a, And) for a in self.args)


def _wrap(e: BoolExpr, other: type) -> str:
    return f"({e})" if isinstance(e, other) else str(e)


# --- parsing ---------------------------------------------------------------

_TOKEN = re.compile(r"\s*(?:(?P<id>[A-Za-z_][A-Za-z0-9_.:]*)|(?P<const>[01])|(?P<op>[!~&|()]))")


def _tokenize(text: str, line: int | None) -> list[str]:
    tokens = []
    pos = 0
    text = text.rstrip()
    while pos < len(text):
        m = _TOKEN.match(text, pos)
        if m is None or m.end() == pos:
            raise ExprSyntaxError(f"unexpected character {text[pos:].strip()[:1]!r}", line)
        tokens.append(m.group(m.lastgroup))
        pos = m.end()
    return tokens


class _Parser:
    # precedence: ! binds tighter than &, which binds tighter than |
    def __init__(self, tokens: list[str], line: int | None):
        self.tokens = tokens
        self.i = 0
        self.line = line

    def peek(self):
        return self.tokens[self.i] if self.i < len(self.tokens) else None

    def take(self):
        tok = self.peek()
        if tok is None:
            raise ExprSyntaxError("unexpected end of expression", self.line)
        self.i += 1
        return tok

    def parse(self) -> BoolExpr:
        if not self.tokens:
            raise ExprSyntaxError("empty expression", self.line)
        e = self.parse_or()
        if self.peek() is not None:
            raise ExprSyntaxError(f"unexpected token {self.peek()!r}", self.line)
        return e

    def parse_or(self):
        parts = [self.parse_and()]
        while self.peek() == "|":
            self.take()
            parts.append(self.parse_and())
        return parts[0] if len(parts) == 1 else Or(tuple(parts))

    def parse_and(self):
        parts = [self.parse_not()]
        while self.peek() == "&":
            self.take()
            parts.append(self.parse_not())
        return parts[0] if len(parts) == 1 else And(tuple(parts))

    def parse_not(self):
        if self.peek() in ("!", "~"):
            self.take()
            return Not(self.parse_not())
        return self.parse_atom()

    def parse_atom(self):
        tok = self.take()
        if tok == "(":
            e = self.parse_or()
            if self.take() != ")":
                raise ExprSyntaxError("expected ')'", self.line)
            return e
        if tok in ("0", "1"):
            return Const(tok == "1")
        if tok in ("&", "|", ")", "!", "~"):
            raise ExprSyntaxError(f"unexpected token {tok!r}", self.line)
        return Var(tok)


def parse_expr(text: str, line: int | None = None) -> BoolExpr:
    """Parse ``!``, ``&``, ``|``, parentheses and constants ``0``/``1``."""
    return _Parser(_tokenize(text, line), line).parse()


def truth_table(expr: BoolExpr, inputs: tuple[str, ...]) -> np.ndarray:
    """Values of ``expr`` on all assignments of ``inputs``.

    Row ``r`` assigns input ``inputs[k]`` the bit ``(r >> (m-1-k)) & 1``, so
    row order is lexicographic in the input tuple.
    """
    m = len(inputs)
    rows = np.arange(1 << m, dtype=np.int64)
    env = {name: ((rows >> (m - 1 - k)) & 1).astype(bool) for k, name in enumerate(inputs)}
    return np.asarray(expr.evaluate_array(env, 1 << m), dtype=bool)
