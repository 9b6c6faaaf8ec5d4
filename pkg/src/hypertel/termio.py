"""Plain-text formats for terms, decompositions, and operators.

Everything is line oriented: a file is a sequence of ``key: value`` lines,
blank lines are ignored, whitespace inside a value is insignificant, and CRLF
line endings are tolerated.  Values are polynomial expressions over ``n`` and
``k`` built from integer and rational literals (``a/b``), ``+ - * ^``, and
parentheses.

Term files carry the five keys ``poly``, ``x``, ``y``, ``num``, ``den``; the
last two hold comma-separated ``Gamma(<linear expression>)`` lists (possibly
empty).  A Gamma factor's family is determined by where it appears and by the
sign of its ``k`` coefficient: numerator factors with nonnegative ``k``
coefficient are A-type, with negative B-type; denominator factors likewise
split into U and V.  The ``n`` coefficient must be a nonnegative integer and
both linear coefficients must be integers; violations raise
:class:`~hypertel.errors.StructuralError` rather than a syntax error because
the text is well formed but names a term outside the supported class.

Decomposition files carry a ``u`` line followed by one block per part, each
block introduced by a bare ``part:`` line and holding a coefficient list
``V: [...]`` (one polynomial per power of the shift operator) and a pole
descriptor ``f: (a, ap, app, e)``.  Operator files are a single
``L: [...]`` line; pair files add a certificate line ``C: (num) / (den)``.

Syntax errors raise :class:`~hypertel.errors.ParseError` carrying 1-based
line and column numbers.  Every serializer round-trips: parsing its output
reproduces the original object exactly.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Iterable, Sequence

from gmpy2 import mpq, mpz

from .errors import ParseError, StructuralError
from .exactmath import PolyNK, Rat, RatFuncNK, rat
from .hyperterm import GammaArg, ProperTerm
from .ratcase import DecomposedInput, RationalSummand, RecOperator
from .telescope import Certificate, Telescoper

__all__ = [
    "parse_term",
    "serialize_term",
    "parse_decomp",
    "serialize_decomp",
    "parse_telescoper",
    "serialize_telescoper",
    "parse_pair",
    "serialize_pair",
    "parse_poly",
    "parse_ratio",
    "serialize_ratio",
    "format_number",
    "emit_csv",
    "curve_csv",
    "region_csv",
    "cost_csv",
]


# ---------------------------------------------------------------------------
# tokenizer
# ---------------------------------------------------------------------------

_OPERATOR_CHARS = "+-*^(),[]/:"


@dataclass(frozen=True)
class _Token:
    kind: str  # "num" | "name" | "op" | "end"
    text: str
    line: int
    col: int


def _tokenize(value: str, line: int, col_offset: int) -> list[_Token]:
    """Tokens of one value string; columns are 1-based in the original line."""
    tokens: list[_Token] = []
    i = 0
    while i < len(value):
        ch = value[i]
        col = col_offset + i
        if ch.isspace():
            i += 1
        elif ch.isdigit():
            j = i
            while j < len(value) and value[j].isdigit():
                j += 1
            tokens.append(_Token("num", value[i:j], line, col))
            i = j
        elif ch.isalpha():
            j = i
            while j < len(value) and value[j].isalnum():
                j += 1
            tokens.append(_Token("name", value[i:j], line, col))
            i = j
        elif ch in _OPERATOR_CHARS:
            tokens.append(_Token("op", ch, line, col))
            i += 1
        else:
            raise ParseError(f"unexpected character {ch!r}", line, col)
    tokens.append(_Token("end", "", line, col_offset + len(value)))
    return tokens


class _ValueParser:
    """Recursive-descent parser over one value's token stream."""

    def __init__(self, tokens: list[_Token]):
        self.tokens = tokens
        self.pos = 0

    # -- stream helpers ---------------------------------------------------

    def peek(self) -> _Token:
        return self.tokens[self.pos]

    def advance(self) -> _Token:
        tok = self.tokens[self.pos]
        if tok.kind != "end":
            self.pos += 1
        return tok

    def at_op(self, *chars: str) -> bool:
        tok = self.peek()
        return tok.kind == "op" and tok.text in chars

    def expect_op(self, char: str) -> _Token:
        tok = self.peek()
        if not (tok.kind == "op" and tok.text == char):
            raise ParseError(f"expected {char!r}", tok.line, tok.col)
        return self.advance()

    def expect_end(self) -> None:
        tok = self.peek()
        if tok.kind != "end":
            raise ParseError(f"unexpected {tok.text!r}", tok.line, tok.col)

    def at_end(self) -> bool:
        return self.peek().kind == "end"

    # -- grammar ------------------------------------------------------------
    #
    # expr   := unary (('+' | '-') unary)*
    # unary  := ('+' | '-') unary | power
    # power  := atom ('^' integer)*
    # atom   := integer ('/' integer)? | 'n' | 'k' | '(' expr ')'

    def parse_expr(self) -> PolyNK:
        node = self.parse_unary()
        while self.at_op("+", "-"):
            op = self.advance()
            rhs = self.parse_unary()
            node = node + rhs if op.text == "+" else node - rhs
        return node

    def parse_unary(self) -> PolyNK:
        if self.at_op("+", "-"):
            op = self.advance()
            node = self.parse_unary()
            return node if op.text == "+" else -node

        node = self.parse_power()
        while self.at_op("*"):
            self.advance()
            node = node * self.parse_power()
        return node

    def parse_power(self) -> PolyNK:
        node = self.parse_atom()
        while self.at_op("^"):
            self.advance()
            exponent = self.parse_integer()
            result = PolyNK.one()
            for _ in range(exponent):
                result = result * node
            node = result
        return node

    def parse_atom(self) -> PolyNK:
        tok = self.peek()
        if tok.kind == "num":
            return PolyNK.const(self.parse_rational())
        if tok.kind == "name":
            if tok.text == "n":
                self.advance()
                return PolyNK.n()
            if tok.text == "k":
                self.advance()
                return PolyNK.k()
            raise ParseError(f"unexpected name {tok.text!r}", tok.line, tok.col)
        if self.at_op("("):
            self.advance()
            node = self.parse_expr()
            self.expect_op(")")
            return node
        if self.at_op("+", "-"):
            return self.parse_unary()
        shown = tok.text if tok.kind != "end" else "end of value"
        raise ParseError(f"expected an expression, got {shown!r}", tok.line, tok.col)

    def parse_integer(self) -> int:
        tok = self.peek()
        if tok.kind != "num":
            raise ParseError("expected an integer", tok.line, tok.col)
        self.advance()
        return int(tok.text)

    def parse_rational(self) -> Rat:
        """An integer literal, optionally followed by '/' and a denominator."""
        numerator = self.parse_integer()
        if self.at_op("/"):
            slash = self.advance()
            denominator = self.parse_integer()
            if denominator == 0:
                raise ParseError("zero denominator", slash.line, slash.col)
            return mpq(numerator, denominator)
        return mpq(numerator)

    def parse_signed_rational(self) -> Rat:
        sign = 1
        while self.at_op("+", "-"):
            if self.advance().text == "-":
                sign = -sign
        return sign * self.parse_rational()

    def parse_signed_integer(self) -> int:
        tok = self.peek()
        value = self.parse_signed_rational()
        if value.denominator != 1:
            raise ParseError("expected an integer", tok.line, tok.col)
        return int(value)


# ---------------------------------------------------------------------------
# key/value line structure
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class _Line:
    key: str
    parser: _ValueParser
    line: int
    key_col: int


def _split_lines(text: str) -> list[_Line]:
    out: list[_Line] = []
    for lineno, raw in enumerate(text.split("\n"), 1):
        raw = raw.rstrip("\r")
        if not raw.strip():
            continue
        colon = raw.find(":")
        if colon < 0:
            col = len(raw) - len(raw.lstrip()) + 1
            raise ParseError("expected a 'key: value' line", lineno, col)
        key = raw[:colon].strip()
        key_col = raw.find(key) + 1 if key else colon + 1
        if not key or not key.isalpha():
            raise ParseError(f"bad key {key!r}", lineno, key_col)
        value = raw[colon + 1:]
        tokens = _tokenize(value, lineno, colon + 2)
        out.append(_Line(key, _ValueParser(tokens), lineno, key_col))
    return out


def _constant_value(parser: _ValueParser, what: str) -> Rat:
    tok = parser.peek()
    poly = parser.parse_expr()
    parser.expect_end()
    value = poly.as_constant()
    if value is None:
        raise ParseError(f"{what} must be a constant", tok.line, tok.col)
    return value


# ---------------------------------------------------------------------------
# term files
# ---------------------------------------------------------------------------

_TERM_KEYS = ("poly", "x", "y", "num", "den")


def _linear_coefficients(poly: PolyNK) -> tuple[Rat, Rat, Rat] | None:
    """(cn, ck, c0) when poly = cn*n + ck*k + c0, else None."""
    coeffs = {(1, 0): mpq(0), (0, 1): mpq(0), (0, 0): mpq(0)}
    for exponents, coeff in poly.terms_glex():
        if exponents not in coeffs:
            return None
        coeffs[exponents] = coeff
    return coeffs[(1, 0)], coeffs[(0, 1)], coeffs[(0, 0)]


def _parse_gamma_list(parser: _ValueParser, numerator: bool) -> list[GammaArg]:
    factors: list[GammaArg] = []
    if parser.at_end():
        return factors
    while True:
        head = parser.peek()
        if head.kind != "name" or head.text != "Gamma":
            raise ParseError("expected 'Gamma'", head.line, head.col)
        parser.advance()
        parser.expect_op("(")
        arg_tok = parser.peek()
        argument = parser.parse_expr()
        parser.expect_op(")")
        factors.append(_classify_gamma(argument, numerator, arg_tok))
        if parser.at_op(","):
            parser.advance()
            continue
        parser.expect_end()
        return factors


def _classify_gamma(argument: PolyNK, numerator: bool, tok: _Token) -> GammaArg:
    where = f"(line {tok.line}, col {tok.col})"
    linear = _linear_coefficients(argument)
    if linear is None:
        raise ParseError("Gamma argument must be linear in n and k", tok.line, tok.col)
    cn, ck, c0 = linear
    if cn.denominator != 1 or ck.denominator != 1:
        raise StructuralError(
            f"non-integer linear coefficient in Gamma argument {where}")
    if cn < 0:
        raise StructuralError(
            f"negative n-coefficient in Gamma argument {where}")
    if ck >= 0:
        family = "A" if numerator else "U"
    else:
        family = "B" if numerator else "V"
    return GammaArg(int(cn), abs(int(ck)), c0, family)


def parse_term(text: str) -> ProperTerm:
    """Read a five-key term file into a :class:`ProperTerm`."""
    seen: dict[str, _Line] = {}
    for line in _split_lines(text):
        if line.key not in _TERM_KEYS:
            raise ParseError(f"unknown key {line.key!r}", line.line, line.key_col)
        if line.key in seen:
            raise ParseError(f"duplicate key {line.key!r}", line.line, line.key_col)
        seen[line.key] = line
    missing = [key for key in _TERM_KEYS if key not in seen]
    if missing:
        raise ParseError(f"missing key {missing[0]!r}")

    poly_parser = seen["poly"].parser
    poly = poly_parser.parse_expr()
    poly_parser.expect_end()
    x = _constant_value(seen["x"].parser, "x")
    y = _constant_value(seen["y"].parser, "y")
    factors = _parse_gamma_list(seen["num"].parser, numerator=True)
    factors += _parse_gamma_list(seen["den"].parser, numerator=False)
    return ProperTerm(poly, x, y, tuple(factors))


def serialize_term(h: ProperTerm) -> str:
    """Five-line term file; numerator factors precede denominator factors."""
    num = ", ".join(_gamma_str(f) for f in h.factors if f.in_numerator)
    den = ", ".join(_gamma_str(f) for f in h.factors if not f.in_numerator)
    return "".join([
        f"poly: {_poly_str(h.p)}\n",
        f"x: {format_number(h.x)}\n",
        f"y: {format_number(h.y)}\n",
        f"num:{' ' + num if num else ''}\n",
        f"den:{' ' + den if den else ''}\n",
    ])


def _gamma_str(factor: GammaArg) -> str:
    return f"Gamma({_poly_str(factor.argument())})"


# ---------------------------------------------------------------------------
# decomposition files
# ---------------------------------------------------------------------------

def parse_decomp(text: str) -> DecomposedInput:
    """Read a ``u`` line plus one or more part blocks."""
    lines = _split_lines(text)
    if not lines or lines[0].key != "u":
        where = lines[0] if lines else None
        raise ParseError(
            "decomposition must start with a 'u:' line",
            where.line if where else None,
            where.key_col if where else None)
    u = lines[0].parser.parse_expr()
    lines[0].parser.expect_end()

    parts: list[tuple[RecOperator, RationalSummand]] = []
    index = 1
    while index < len(lines):
        header = lines[index]
        if header.key != "part":
            raise ParseError("expected a 'part:' line", header.line, header.key_col)
        header.parser.expect_end()
        index += 1
        block: dict[str, _Line] = {}
        while index < len(lines) and lines[index].key in ("V", "f"):
            entry = lines[index]
            if entry.key in block:
                raise ParseError(
                    f"duplicate key {entry.key!r}", entry.line, entry.key_col)
            block[entry.key] = entry
            index += 1
        for key in ("V", "f"):
            if key not in block:
                raise ParseError(f"part is missing its {key!r} line",
                                 header.line, header.key_col)
        coeffs = _parse_poly_list(block["V"].parser)
        summand = _parse_pole_descriptor(block["f"].parser)
        parts.append((RecOperator(tuple(coeffs)), summand))
    if not parts:
        raise ParseError("decomposition has no parts")
    return DecomposedInput(u, tuple(parts))


def _parse_poly_list(parser: _ValueParser) -> list[PolyNK]:
    parser.expect_op("[")
    polys: list[PolyNK] = []
    if not parser.at_op("]"):
        while True:
            polys.append(parser.parse_expr())
            if parser.at_op(","):
                parser.advance()
                continue
            break
    parser.expect_op("]")
    parser.expect_end()
    return polys


def _parse_pole_descriptor(parser: _ValueParser) -> RationalSummand:
    parser.expect_op("(")
    a = parser.parse_signed_integer()
    parser.expect_op(",")
    ap = parser.parse_signed_integer()
    parser.expect_op(",")
    app = parser.parse_signed_rational()
    parser.expect_op(",")
    e = parser.parse_signed_integer()
    parser.expect_op(")")
    parser.expect_end()
    return RationalSummand(a, ap, app, e)


def serialize_decomp(inp: DecomposedInput) -> str:
    chunks = [f"u: {_poly_str(inp.u)}\n"]
    for v, f in inp.parts:
        coeffs = ", ".join(_poly_str(c) for c in v.polynomial_coeffs())
        chunks.append("part:\n")
        chunks.append(f"V: [{coeffs}]\n")
        chunks.append(
            f"f: ({f.a}, {f.ap}, {format_number(f.app)}, {f.e})\n")
    return "".join(chunks)


# ---------------------------------------------------------------------------
# operator and pair files
# ---------------------------------------------------------------------------

def _single_line(text: str, key: str) -> _ValueParser:
    lines = _split_lines(text)
    if len(lines) != 1 or lines[0].key != key:
        bad = next((ln for ln in lines if ln.key != key), None)
        if bad is not None:
            raise ParseError(f"expected a single {key!r} line", bad.line, bad.key_col)
        raise ParseError(f"expected a single {key!r} line")
    return lines[0].parser


def parse_telescoper(text: str) -> Telescoper:
    """Read an ``L: [...]`` operator file."""
    coeffs = _parse_poly_list(_single_line(text, "L"))
    return Telescoper(tuple(coeffs))


def serialize_telescoper(tele: Telescoper) -> str:
    body = ", ".join(_poly_str(c) for c in tele.coeffs)
    return f"L: [{body}]\n"


def parse_pair(text: str) -> tuple[Telescoper, Certificate]:
    """Read an operator plus certificate file (``L`` and ``C`` lines)."""
    lines = _split_lines(text)
    by_key: dict[str, _Line] = {}
    for line in lines:
        if line.key not in ("L", "C"):
            raise ParseError(f"unknown key {line.key!r}", line.line, line.key_col)
        if line.key in by_key:
            raise ParseError(f"duplicate key {line.key!r}", line.line, line.key_col)
        by_key[line.key] = line
    for key in ("L", "C"):
        if key not in by_key:
            raise ParseError(f"missing key {key!r}")
    tele = Telescoper(tuple(_parse_poly_list(by_key["L"].parser)))

    parser = by_key["C"].parser
    num = parser.parse_expr()
    if parser.at_op("/"):
        parser.advance()
        den_tok = parser.peek()
        den = parser.parse_expr()
        if den.is_zero:
            raise ParseError("zero denominator", den_tok.line, den_tok.col)
    else:
        den = PolyNK.one()
    parser.expect_end()
    return tele, Certificate(RatFuncNK(num, den))


def serialize_pair(tele: Telescoper, cert: Certificate) -> str:
    value = cert.value
    return (serialize_telescoper(tele)
            + f"C: ({_poly_str(value.num)}) / ({_poly_str(value.den)})\n")


# ---------------------------------------------------------------------------
# bare expressions and ratio files
# ---------------------------------------------------------------------------

def parse_poly(text: str) -> PolyNK:
    """A standalone polynomial expression (no key prefix)."""
    parser = _ValueParser(_tokenize(text.rstrip("\r\n"), 1, 1))
    poly = parser.parse_expr()
    parser.expect_end()
    return poly


_RATIO_KEYS = ("p", "q")


def parse_ratio(text: str) -> tuple[PolyNK, PolyNK]:
    """Read a two-line rational function file (``p:`` over ``q:``)."""
    seen: dict[str, _Line] = {}
    for line in _split_lines(text):
        if line.key not in _RATIO_KEYS:
            raise ParseError(f"unknown key {line.key!r}", line.line, line.key_col)
        if line.key in seen:
            raise ParseError(f"duplicate key {line.key!r}", line.line, line.key_col)
        seen[line.key] = line
    missing = [key for key in _RATIO_KEYS if key not in seen]
    if missing:
        raise ParseError(f"missing key {missing[0]!r}")
    polys = []
    for key in _RATIO_KEYS:
        parser = seen[key].parser
        polys.append(parser.parse_expr())
        parser.expect_end()
    return polys[0], polys[1]


def serialize_ratio(p: PolyNK, q: PolyNK) -> str:
    return f"p: {_poly_str(p)}\nq: {_poly_str(q)}\n"


# ---------------------------------------------------------------------------
# polynomial and number formatting
# ---------------------------------------------------------------------------

def _poly_str(poly: PolyNK) -> str:
    if poly.is_zero:
        return "0"
    pieces: list[str] = []
    for (i, j), coeff in poly.terms_glex():
        magnitude = abs(coeff)
        atoms: list[str] = []
        if magnitude != 1 or (i == 0 and j == 0):
            atoms.append(format_number(magnitude))
        if i:
            atoms.append("n" if i == 1 else f"n^{i}")
        if j:
            atoms.append("k" if j == 1 else f"k^{j}")
        body = "*".join(atoms)
        if not pieces:
            pieces.append(f"-{body}" if coeff < 0 else body)
        else:
            pieces.append(f" - {body}" if coeff < 0 else f" + {body}")
    return "".join(pieces)


def format_number(value) -> str:
    """Canonical text for the numbers the package produces.

    Integers (including integer-valued rationals) print bare; other rationals
    print as ``p/q``.
    """
    if isinstance(value, bool):
        return str(int(value))
    if isinstance(value, int) or isinstance(value, type(mpz(0))):
        return str(int(value))
    q = rat(value)
    if q.denominator == 1:
        return str(int(q.numerator))
    return f"{q.numerator}/{q.denominator}"


# ---------------------------------------------------------------------------
# CSV tables
# ---------------------------------------------------------------------------

def emit_csv(header: Sequence[str], rows: Iterable[Sequence]) -> str:
    """A CSV table with the given header; cells go through format_number."""
    lines = [",".join(header)]
    width = len(header)
    for row in rows:
        cells = [cell if isinstance(cell, str) else format_number(cell)
                 for cell in row]
        if len(cells) != width:
            raise StructuralError(
                f"CSV row has {len(cells)} cells, expected {width}")
        lines.append(",".join(cells))
    return "\n".join(lines) + "\n"


def curve_csv(rows: Iterable[Sequence]) -> str:
    """Rows of (order, minimal certified degree)."""
    return emit_csv(("r", "d_min"), rows)


def region_csv(rows: Iterable[Sequence]) -> str:
    """Rows of (order, degree, found) with found emitted as 0 or 1."""
    return emit_csv(("r", "d", "exists"),
                    ((r, d, 1 if exists else 0) for r, d, exists in rows))


def cost_csv(rows: Iterable[Sequence]) -> str:
    """Rows of (order, minimal certified degree, predicted cost)."""
    return emit_csv(("r", "d_min", "cost"), rows)
