"""Small expression language naming lattices on the command line.

Grammar:  expr := name | 'I1'..'I4' | 'B1'..'B4' | 'chain(k)'
               | 'dual(expr)' | 'prod(expr, expr)' | 'sum(expr, expr)'
               | 'interval(expr, a, b)' | 'downsets(@poset.json)'
               | '@lattice.json'
File references load the JSON formats documented in the README.
"""

from __future__ import annotations

import json
import re

from .errors import MuchnikLabError
from .lattices import (
    DistLattice,
    chain,
    downset_lattice,
    dual,
    interval,
    lattice_from_json,
    product,
    stack_sum,
)
from .posets import poset_from_json
from .tower import jaskowski_algebra


class ExpressionError(MuchnikLabError):
    """Malformed lattice expression."""


_TOKEN = re.compile(r"\s*([A-Za-z_][A-Za-z0-9_]*|@[^\s(),]+|\d+|[(),])")


def _tokenize(text: str) -> list[str]:
    out = []
    pos = 0
    while pos < len(text):
        m = _TOKEN.match(text, pos)
        if m is None:
            if text[pos:].strip():
                raise ExpressionError(f"bad expression near {text[pos:]!r}")
            break
        out.append(m.group(1))
        pos = m.end()
    return out


class _ExprParser:
    def __init__(self, text: str):
        self.tokens = _tokenize(text)
        self.pos = 0

    def next(self) -> str:
        if self.pos >= len(self.tokens):
            raise ExpressionError("unexpected end of expression")
        tok = self.tokens[self.pos]
        self.pos += 1
        return tok

    def expect(self, tok: str) -> None:
        got = self.next()
        if got != tok:
            raise ExpressionError(f"expected {tok!r}, got {got!r}")

    def parse(self) -> DistLattice:
        lat = self.expr()
        if self.pos != len(self.tokens):
            raise ExpressionError(f"trailing tokens {self.tokens[self.pos:]!r}")
        return lat

    def expr(self) -> DistLattice:
        tok = self.next()
        if tok.startswith("@"):
            return _load_lattice(tok[1:])
        m = re.fullmatch(r"[IB](\d+)", tok)
        if m:
            level = jaskowski_algebra(int(m.group(1)))
            return level.algebra if tok[0] == "I" else level.dual_algebra
        if tok == "chain":
            self.expect("(")
            k = int(self.next())
            self.expect(")")
            return chain(k)
        if tok == "dual":
            self.expect("(")
            inner = self.expr()
            self.expect(")")
            return dual(inner)
        if tok in ("prod", "sum"):
            self.expect("(")
            a = self.expr()
            self.expect(",")
            b = self.expr()
            self.expect(")")
            return product(a, b) if tok == "prod" else stack_sum(a, b)
        if tok == "interval":
            self.expect("(")
            lat = self.expr()
            self.expect(",")
            a = int(self.next())
            self.expect(",")
            b = int(self.next())
            self.expect(")")
            return interval(lat, a, b)
        if tok == "downsets":
            self.expect("(")
            ref = self.next()
            self.expect(")")
            if not ref.startswith("@"):
                raise ExpressionError("downsets() takes a @poset.json reference")
            with open(ref[1:], "r", encoding="utf-8") as fh:
                p = poset_from_json(json.load(fh))
            return downset_lattice(p)
        raise ExpressionError(f"unknown lattice expression {tok!r}")


def _load_lattice(path: str) -> DistLattice:
    with open(path, "r", encoding="utf-8") as fh:
        obj = json.load(fh)
    if "points" in obj:
        return downset_lattice(poset_from_json(obj))
    return lattice_from_json(obj)


def parse_lattice_expression(text: str) -> DistLattice:
    return _ExprParser(text).parse()
