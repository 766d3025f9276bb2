"""Text grammar for observables.

::

    expr   := term (('+' | '-') term)*
    term   := unary ('*' unary)*
    unary  := ('+' | '-') unary | atom
    atom   := NUMBER | 'x1' | 'x2' | 'x3'
            | ('c' | 's') '(' INT ',' INT ')'
            | '(' expr ')'

``x1 x2 x3`` are the sphere embedding coordinates; ``c(a,b)`` and ``s(a,b)``
are cos and sin of 2*pi*(a*u + b*v) on the torus.  Whitespace is ignored.
"""
from __future__ import annotations

import re

from .manifold import KahlerModel, Observable, constant, fourier_atom, sphere_atom

_TOKEN = re.compile(r"\s*(?:(\d+\.?\d*(?:[eE][-+]?\d+)?|\.\d+(?:[eE][-+]?\d+)?)|(x[123]|[cs])|(.))")


class ParseError(ValueError):
    def __init__(self, msg, text, pos):
        super().__init__(f"{msg} at position {pos}: {text!r}")
        self.pos = pos


def _tokenize(text):
    tokens = []
    pos = 0
    while pos < len(text):
        if text[pos:].strip() == "":
            break
        mo = _TOKEN.match(text, pos)
        num, ident, other = mo.groups()
        start = mo.start(mo.lastindex)
        if num is not None:
            tokens.append(("num", num, start))
        elif ident is not None:
            tokens.append(("id", ident, start))
        elif other in "+-*(),":
            tokens.append(("op", other, start))
        else:
            raise ParseError(f"unexpected character {other!r}", text, start)
        pos = mo.end()
    tokens.append(("end", "", len(text)))
    return tokens


class _Parser:
    def __init__(self, model, text):
        self.model = model
        self.text = text
        self.tokens = _tokenize(text)
        self.i = 0

    def peek(self):
        return self.tokens[self.i]

    def take(self, value=None):
        tok = self.tokens[self.i]
        if value is not None and tok[1] != value:
            got = "end of input" if tok[0] == "end" else repr(tok[1])
            raise ParseError(f"expected {value!r}, got {got}", self.text, tok[2])
        self.i += 1
        return tok

    def expr(self):
        node = self.term()
        while self.peek()[1] in ("+", "-") and self.peek()[0] == "op":
            op = self.take()[1]
            rhs = self.term()
            node = node + rhs if op == "+" else node - rhs
        return node

    def term(self):
        node = self.unary()
        while self.peek() == ("op", "*", self.peek()[2]):
            self.take()
            node = node * self.unary()
        return node

    def unary(self):
        kind, val, _ = self.peek()
        if kind == "op" and val in "+-":
            self.take()
            node = self.unary()
            return -node if val == "-" else node
        return self.atom()

    def integer(self):
        sign = 1
        if self.peek()[1] == "-":
            self.take()
            sign = -1
        kind, val, pos = self.take()
        if kind != "num" or not val.isdigit():
            raise ParseError("expected an integer", self.text, pos)
        return sign * int(val)

    def atom(self):
        kind, val, pos = self.take()
        try:
            if kind == "num":
                return constant(self.model, float(val) if any(ch in val for ch in ".eE") else int(val))
            if kind == "id" and val.startswith("x"):
                return sphere_atom(self.model, int(val[1]))
            if kind == "id":
                self.take("(")
                a = self.integer()
                self.take(",")
                b = self.integer()
                self.take(")")
                return fourier_atom(self.model, val, a, b)
        except ParseError:
            raise
        except ValueError as exc:
            raise ParseError(str(exc), self.text, pos) from None
        if (kind, val) == ("op", "("):
            node = self.expr()
            self.take(")")
            return node
        what = "end of input" if kind == "end" else repr(val)
        raise ParseError(f"unexpected {what}", self.text, pos)


def parse_observable(model: KahlerModel, text: str) -> Observable:
    """Parse ``text`` into an :class:`Observable` on ``model``.

    Raises :class:`ParseError` (a ``ValueError``) carrying the offending position.
    """
    p = _Parser(model, text)
    obs = p.expr()
    kind, val, pos = p.peek()
    if kind != "end":
        raise ParseError(f"unexpected {val!r}", text, pos)
    return Observable(obs.model, obs.expr, obs.is_real, obs.degree, " ".join(text.split()))


def random_observable(model: KahlerModel, rng, terms: int = 3, max_degree: int = 2) -> Observable:
    """A random real observable built through the text grammar.

    Sphere: random polynomial in x1, x2, x3 of degree <= ``max_degree``.
    Torus: random trigonometric polynomial with |a|, |b| <= ``max_degree``.
    """
    parts = []
    for _ in range(terms):
        coeff = round(float(rng.uniform(-2, 2)), 3)
        if model.kind == "sphere":
            deg = int(rng.integers(1, max_degree + 1))
            factors = [f"x{int(rng.integers(1, 4))}" for _ in range(deg)]
        else:
            a, b = (int(x) for x in rng.integers(-max_degree, max_degree + 1, size=2))
            factors = [f"{'cs'[int(rng.integers(2))]}({a},{b})"]
        parts.append(f"{coeff} * " + " * ".join(factors))
    const = round(float(rng.uniform(-1, 1)), 3)
    return parse_observable(model, " + ".join(parts) + f" + {const}")
