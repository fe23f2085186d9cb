"""Small recognizers for the Macaulay2 and Singular scripts this package emits.

They accept exactly the statement forms produced by :func:`stkit.ideals.export_cas`
and check that every polynomial only uses indeterminates of the ring in scope.
"""

from __future__ import annotations

import re
from dataclasses import dataclass, field

from .polynomial import PolynomialError, SymbolTable, parse

ID = r"[A-Za-z][A-Za-z0-9]*"


class CasSyntaxError(ValueError):
    pass


@dataclass
class CasScript:
    dialect: str
    rings: dict[str, tuple[str, ...]] = field(default_factory=dict)
    ideals: dict[str, int] = field(default_factory=dict)
    maps: dict[str, tuple[str, str, int]] = field(default_factory=dict)
    kernels: list[str] = field(default_factory=list)
    saturations: list[str] = field(default_factory=list)


def _statements(text: str, comment: str) -> list[str]:
    body = "\n".join(line.split(comment, 1)[0] for line in text.splitlines())
    parts = [p.strip() for p in body.split(";")]
    if parts and parts[-1]:
        raise CasSyntaxError(f"unterminated statement: {parts[-1][:40]!r}")
    return [" ".join(p.split()) for p in parts[:-1] if p]


def _split_top(s: str) -> list[str]:
    out, depth, cur = [], 0, []
    for ch in s:
        if ch in "({[":
            depth += 1
        elif ch in ")}]":
            depth -= 1
            if depth < 0:
                raise CasSyntaxError("unbalanced brackets")
        if ch == "," and depth == 0:
            out.append("".join(cur).strip())
            cur = []
        else:
            cur.append(ch)
    if depth:
        raise CasSyntaxError("unbalanced brackets")
    out.append("".join(cur).strip())
    return out


def _idlist(s: str) -> tuple[str, ...]:
    names = tuple(x.strip() for x in s.split(","))
    for nm in names:
        if not re.fullmatch(ID, nm):
            raise CasSyntaxError(f"bad identifier {nm!r}")
    if len(set(names)) != len(names):
        raise CasSyntaxError("repeated ring variable")
    return names


def _polys(s: str, ring: tuple[str, ...]) -> int:
    items = _split_top(s)
    for it in items:
        if not it:
            raise CasSyntaxError("empty polynomial in list")
        table = SymbolTable(ring)
        try:
            parse(it, table)
        except PolynomialError as exc:
            raise CasSyntaxError(f"bad polynomial {it[:40]!r}: {exc}") from exc
        if len(table) != len(ring):
            extra = sorted(set(table.names) - set(ring))
            raise CasSyntaxError(f"polynomial uses undeclared variables {extra}")
    return len(items)


def parse_m2(text: str) -> CasScript:
    sc = CasScript("m2")
    current = None
    for st in _statements(text, "--"):
        m = re.fullmatch(rf"({ID}) = (.*)", st)
        if not m:
            raise CasSyntaxError(f"expected an assignment: {st[:40]!r}")
        lhs, rhs = m.groups()
        if mm := re.fullmatch(r"QQ\[(.*)\]", rhs):
            sc.rings[lhs] = _idlist(mm.group(1))
            current = lhs
        elif mm := re.fullmatch(r"ideal\((.*)\)", rhs):
            if current is None:
                raise CasSyntaxError("ideal before any ring")
            inner = mm.group(1).strip()
            if inner == f"0_{current}":
                sc.ideals[lhs] = 0
            else:
                sc.ideals[lhs] = _polys(inner, sc.rings[current])
        elif mm := re.fullmatch(rf"map\(({ID}), ({ID}), \{{(.*)\}}\)", rhs):
            tgt, src, body = mm.groups()
            if tgt not in sc.rings or src not in sc.rings:
                raise CasSyntaxError("map between undeclared rings")
            k = _polys(body, sc.rings[tgt])
            if k != len(sc.rings[src]):
                raise CasSyntaxError(f"map lists {k} images for {len(sc.rings[src])} variables")
            sc.maps[lhs] = (tgt, src, k)
        elif mm := re.fullmatch(rf"ker ({ID})", rhs):
            if mm.group(1) not in sc.maps:
                raise CasSyntaxError("kernel of an undeclared map")
            sc.kernels.append(lhs)
        elif mm := re.fullmatch(rf"saturate\(({ID}), product gens ({ID})\)", rhs):
            if mm.group(1) not in sc.ideals or mm.group(2) not in sc.rings:
                raise CasSyntaxError("saturation of an undeclared ideal")
            sc.saturations.append(lhs)
        else:
            raise CasSyntaxError(f"unsupported statement: {st[:40]!r}")
    return sc


def parse_singular(text: str) -> CasScript:
    sc = CasScript("singular")
    current = None
    polys: dict[str, str] = {}
    for st in _statements(text, "//"):
        if mm := re.fullmatch(rf"ring ({ID}) = 0, \((.*)\), dp", st):
            sc.rings[mm.group(1)] = _idlist(mm.group(2))
            current = mm.group(1)
        elif mm := re.fullmatch(rf"setring ({ID})", st):
            if mm.group(1) not in sc.rings:
                raise CasSyntaxError("setring to an undeclared ring")
            current = mm.group(1)
        elif re.fullmatch(r'LIB "[a-z]+\.lib"', st):
            pass
        elif mm := re.fullmatch(rf"ideal ({ID}) = preimage\(({ID}), ({ID}), ({ID})\)", st):
            lhs, ring, mp, ideal = mm.groups()
            if ring not in sc.rings or mp not in sc.maps or ideal not in sc.ideals:
                raise CasSyntaxError("preimage with undeclared arguments")
            sc.kernels.append(lhs)
        elif mm := re.fullmatch(rf"ideal ({ID}) = (.*)", st):
            if current is None:
                raise CasSyntaxError("ideal before any ring")
            body = mm.group(2)
            sc.ideals[mm.group(1)] = 0 if body == "0" else _polys(body, sc.rings[current])
        elif mm := re.fullmatch(rf"poly ({ID}) = (.*)", st):
            if current is None or _polys(mm.group(2), sc.rings[current]) != 1:
                raise CasSyntaxError("bad poly declaration")
            polys[mm.group(1)] = current
        elif mm := re.fullmatch(rf"map ({ID}) = ({ID}), (.*)", st):
            lhs, src, body = mm.groups()
            if src not in sc.rings or current is None:
                raise CasSyntaxError("map from an undeclared ring")
            k = _polys(body, sc.rings[current])
            if k != len(sc.rings[src]):
                raise CasSyntaxError(f"map lists {k} images for {len(sc.rings[src])} variables")
            sc.maps[lhs] = (current, src, k)
        elif mm := re.fullmatch(rf"def ({ID}) = sat\(({ID}), ({ID})\)", st):
            if mm.group(2) not in sc.ideals or mm.group(3) not in polys:
                raise CasSyntaxError("saturation with undeclared arguments")
            sc.saturations.append(mm.group(1))
        else:
            raise CasSyntaxError(f"unsupported statement: {st[:40]!r}")
    return sc


def check_script(text: str, dialect: str) -> CasScript:
    if dialect == "m2":
        return parse_m2(text)
    if dialect == "singular":
        return parse_singular(text)
    raise ValueError(f"unknown dialect {dialect!r}")
