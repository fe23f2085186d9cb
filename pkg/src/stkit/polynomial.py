"""Sparse multivariate polynomials with integer coefficients over interned symbols.

A monomial is a tuple of ``(symbol_id, exponent)`` pairs sorted by id.  Terms
are kept in graded-lex order on ids, so two equal polynomials always print
and compare identically.
"""

from __future__ import annotations

import re
import threading
from dataclasses import dataclass
from fractions import Fraction
from typing import Iterable, Mapping

Monomial = tuple[tuple[int, int], ...]

# symbol name: identifier, optional [..] context, optional ^(..) superscript
SYMBOL_RE = r"[A-Za-z][A-Za-z0-9_]*(?:\[[^\]\s]*\])?(?:\^\([^)\s]*\))?"
_TOKEN_RE = re.compile(rf"\s*(?:(?P<num>\d+)|(?P<sym>{SYMBOL_RE})(?:\^(?P<exp>\d+))?|(?P<op>[+\-*]))")


class PolynomialError(ValueError):
    pass


@dataclass(frozen=True)
class Symbol:
    id: int
    display: str
    table: "SymbolTable"

    def __repr__(self) -> str:
        return self.display

    def __hash__(self) -> int:
        return hash((id(self.table), self.id))

    def __eq__(self, other) -> bool:
        return isinstance(other, Symbol) and other.table is self.table and other.id == self.id


class SymbolTable:
    """Injective name -> id interning.  Reads are lock-free, inserts serialized."""

    def __init__(self, names: Iterable[str] = ()):
        self._ids: dict[str, int] = {}
        self._names: list[str] = []
        self._lock = threading.Lock()
        for nm in names:
            self.intern(nm)

    def intern(self, name: str) -> Symbol:
        sid = self._ids.get(name)
        if sid is None:
            if not re.fullmatch(SYMBOL_RE, name):
                raise PolynomialError(f"invalid symbol name {name!r}")
            with self._lock:
                sid = self._ids.get(name)
                if sid is None:
                    sid = len(self._names)
                    self._names.append(name)
                    self._ids[name] = sid
        return Symbol(sid, name, self)

    def lookup(self, name: str) -> Symbol:
        try:
            return Symbol(self._ids[name], name, self)
        except KeyError:
            raise PolynomialError(f"unknown symbol {name!r}") from None

    def __contains__(self, name: str) -> bool:
        return name in self._ids

    def name(self, sid: int) -> str:
        return self._names[sid]

    @property
    def names(self) -> tuple[str, ...]:
        return tuple(self._names)

    def __len__(self) -> int:
        return len(self._names)

    # convenience constructors
    def var(self, name: str) -> "Polynomial":
        s = self.intern(name)
        return Polynomial(self, {((s.id, 1),): 1})

    def const(self, c: int) -> "Polynomial":
        return Polynomial(self, {(): int(c)} if c else {})

    def zero(self) -> "Polynomial":
        return Polynomial(self, {})

    def one(self) -> "Polynomial":
        return self.const(1)

    def monomial(self, names: Iterable[str], coeff: int = 1) -> "Polynomial":
        exps: dict[int, int] = {}
        for nm in names:
            sid = self.intern(nm).id
            exps[sid] = exps.get(sid, 0) + 1
        return Polynomial(self, {tuple(sorted(exps.items())): coeff} if coeff else {})

    def parse(self, text: str) -> "Polynomial":
        return parse(text, self)


def _mono_mul(a: Monomial, b: Monomial) -> Monomial:
    if not a:
        return b
    if not b:
        return a
    d = dict(a)
    for k, e in b:
        d[k] = d.get(k, 0) + e
    return tuple(sorted(d.items()))


def _mono_key(m: Monomial):
    # descending graded-lex: higher degree first, then larger exponent on smaller id
    return (-sum(e for _, e in m), tuple((k, -e) for k, e in m))


class Polynomial:
    __slots__ = ("table", "_terms", "_hash")

    def __init__(self, table: SymbolTable, terms: Mapping[Monomial, int]):
        self.table = table
        items = [(m, int(c)) for m, c in terms.items() if c]
        items.sort(key=lambda t: _mono_key(t[0]))
        self._terms: tuple[tuple[Monomial, int], ...] = tuple(items)
        self._hash = None

    @property
    def terms(self) -> tuple[tuple[Monomial, int], ...]:
        return self._terms

    def term_map(self) -> dict[Monomial, int]:
        return dict(self._terms)

    def __len__(self) -> int:
        return len(self._terms)

    def is_zero(self) -> bool:
        return not self._terms

    def degree(self) -> int:
        return max((sum(e for _, e in m) for m, _ in self._terms), default=0)

    def symbols(self) -> frozenset[str]:
        return frozenset(self.table.name(k) for m, _ in self._terms for k, _ in m)

    def _same(self, other: "Polynomial") -> None:
        if not isinstance(other, Polynomial):
            raise TypeError("expected a Polynomial")
        if other.table is not self.table:
            raise PolynomialError("operands use different symbol tables")

    def _coerce(self, other) -> "Polynomial":
        if isinstance(other, int):
            return self.table.const(other)
        self._same(other)
        return other

    def __add__(self, other) -> "Polynomial":
        other = self._coerce(other)
        d = dict(self._terms)
        for m, c in other._terms:
            d[m] = d.get(m, 0) + c
        return Polynomial(self.table, d)

    __radd__ = __add__

    def __neg__(self) -> "Polynomial":
        return Polynomial(self.table, {m: -c for m, c in self._terms})

    def __sub__(self, other) -> "Polynomial":
        return self + (-self._coerce(other))

    def __rsub__(self, other) -> "Polynomial":
        return self._coerce(other) - self

    def __mul__(self, other) -> "Polynomial":
        other = self._coerce(other)
        d: dict[Monomial, int] = {}
        for ma, ca in self._terms:
            for mb, cb in other._terms:
                m = _mono_mul(ma, mb)
                d[m] = d.get(m, 0) + ca * cb
        return Polynomial(self.table, d)

    __rmul__ = __mul__

    def __pow__(self, k: int) -> "Polynomial":
        out = self.table.one()
        for _ in range(k):
            out = out * self
        return out

    def __eq__(self, other) -> bool:
        if isinstance(other, int):
            other = self.table.const(other)
        if not isinstance(other, Polynomial):
            return NotImplemented
        return other.table is self.table and other._terms == self._terms

    def __hash__(self) -> int:
        if self._hash is None:
            self._hash = hash(self._terms)
        return self._hash

    def leading_coefficient(self) -> int:
        return self._terms[0][1] if self._terms else 0

    def normalized(self) -> "Polynomial":
        """Sign-normalized copy: leading coefficient positive."""
        return -self if self.leading_coefficient() < 0 else self

    def evaluate(self, assignment: Mapping) -> Fraction:
        vals: dict[int, Fraction] = {}
        for m, _ in self._terms:
            for k, _e in m:
                if k in vals:
                    continue
                nm = self.table.name(k)
                if nm in assignment:
                    vals[k] = Fraction(assignment[nm])
                else:
                    sym = Symbol(k, nm, self.table)
                    if sym in assignment:
                        vals[k] = Fraction(assignment[sym])
                    else:
                        raise PolynomialError(f"no value assigned to {nm}")
        total = Fraction(0)
        for m, c in self._terms:
            v = Fraction(c)
            for k, e in m:
                v *= vals[k] ** e
            total += v
        return total

    def substitute(self, images: Mapping[str, "Polynomial"], target: SymbolTable) -> "Polynomial":
        """Ring map sending each symbol name to a polynomial over ``target``."""
        out = target.zero()
        for m, c in self._terms:
            t = target.const(c)
            for k, e in m:
                nm = self.table.name(k)
                if nm not in images:
                    raise PolynomialError(f"no image for {nm}")
                t = t * images[nm] ** e
            out = out + t
        return out

    def to_text(self) -> str:
        if not self._terms:
            return "0"
        parts = []
        for idx, (m, c) in enumerate(self._terms):
            mono = "*".join(
                self.table.name(k) + (f"^{e}" if e > 1 else "") for k, e in m
            )
            a = abs(c)
            body = mono if (a == 1 and mono) else (f"{a}*{mono}" if mono else str(a))
            if idx == 0:
                parts.append(("-" if c < 0 else "") + body)
            else:
                parts.append((" - " if c < 0 else " + ") + body)
        return "".join(parts)

    __str__ = to_text

    def __repr__(self) -> str:
        return f"Polynomial({self.to_text()!r})"


def parse(text: str, table: SymbolTable) -> Polynomial:
    """Parse the text form produced by :meth:`Polynomial.to_text`."""
    pos = 0
    toks = []
    text = text.strip()
    while pos < len(text):
        mt = _TOKEN_RE.match(text, pos)
        if not mt or mt.end() == pos:
            raise PolynomialError(f"cannot parse polynomial near {text[pos:pos + 12]!r}")
        pos = mt.end()
        if mt.group("num"):
            toks.append(("num", int(mt.group("num"))))
        elif mt.group("sym"):
            toks.append(("sym", (mt.group("sym"), int(mt.group("exp") or 1))))
        else:
            toks.append(("op", mt.group("op")))
    out = table.zero()
    i = 0
    sign = 1
    if toks and toks[0] == ("op", "-"):
        sign, i = -1, 1
    if not toks:
        raise PolynomialError("empty polynomial text")
    while True:
        coeff, names = 1, []
        expect_factor = True
        while expect_factor:
            if i >= len(toks):
                raise PolynomialError("dangling operator")
            kind, val = toks[i]
            if kind == "num":
                coeff *= val
            elif kind == "sym":
                names.extend([val[0]] * val[1])
            else:
                raise PolynomialError(f"unexpected {val!r}")
            i += 1
            expect_factor = i < len(toks) and toks[i] == ("op", "*")
            if expect_factor:
                i += 1
        out = out + table.monomial(names, sign * coeff)
        if i >= len(toks):
            break
        if toks[i] not in (("op", "+"), ("op", "-")):
            raise PolynomialError("expected + or -")
        sign = 1 if toks[i][1] == "+" else -1
        i += 1
    return out


def poly_eq(a: Polynomial, b: Polynomial) -> bool:
    if a.table is not b.table:
        raise PolynomialError("operands use different symbol tables")
    return a == b


def evaluate(p: Polynomial, assignment: Mapping) -> Fraction:
    return p.evaluate(assignment)
