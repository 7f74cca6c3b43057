"""Parser for polynomial / formal-series expressions.

Grammar (precedence low to high):

    expr   := term (('+'|'-') term)*
    term   := factor (('*'|'/') factor)*
    factor := ('-')* power
    power  := atom ('^' INT)?
    atom   := INT | IMAG | 'i' | 'lam' | 'x<k>' | '(' expr ')'

IMAG is an integer immediately followed by `i` (`3i`).  Division is exact
and only by nonzero constants.  `lam` is the formal deformation parameter;
a parsed value is a map {lambda power -> Poly}.  Errors carry the character
offset of the offending token.
"""

from __future__ import annotations

from .poly import CR_ONE, CRat, Poly, crat, rat


class ExprError(ValueError):
    """Syntax or evaluation error in an expression, with character offset."""

    def __init__(self, message: str, pos: int):
        super().__init__("%s (at offset %d)" % (message, pos))
        self.message = message
        self.pos = pos


# token kinds: INT, IMAG, IDENT, OP, END
def _tokenize(text: str):
    toks = []
    i, m = 0, len(text)
    while i < m:
        ch = text[i]
        if ch.isspace():
            i += 1
            continue
        if ch.isdigit():
            j = i
            while j < m and text[j].isdigit():
                j += 1
            if j < m and text[j] == "i" and not (j + 1 < m and text[j + 1].isalnum()):
                toks.append(("IMAG", text[i:j], i))
                j += 1
            else:
                toks.append(("INT", text[i:j], i))
            i = j
            continue
        if ch.isalpha() or ch == "_":
            j = i
            while j < m and (text[j].isalnum() or text[j] == "_"):
                j += 1
            toks.append(("IDENT", text[i:j], i))
            i = j
            continue
        if ch in "+-*/^()[],":
            toks.append(("OP", ch, i))
            i += 1
            continue
        raise ExprError("unexpected character %r" % ch, i)
    toks.append(("END", "", m))
    return toks


# A value is a dict {lambda_power: Poly}; zero is the empty dict.
def _v_zero():
    return {}


def _v_const(nvars, c: CRat):
    if c.is_zero():
        return {}
    return {0: Poly.const(nvars, c)}


def _v_add(a, b):
    out = dict(a)
    for k, p in b.items():
        q = out.get(k)
        q = p if q is None else q + p
        if q.is_zero():
            out.pop(k, None)
        else:
            out[k] = q
    return out


def _v_neg(a):
    return {k: -p for k, p in a.items()}


def _v_mul(a, b):
    out = {}
    for k1, p1 in a.items():
        for k2, p2 in b.items():
            p = p1 * p2
            if p.is_zero():
                continue
            k = k1 + k2
            q = out.get(k)
            q = p if q is None else q + p
            if q.is_zero():
                out.pop(k, None)
            else:
                out[k] = q
    return out


def _v_as_const(a):
    """The value as a CRat constant, or None if it is not one."""
    if not a:
        return CRat(0)
    if list(a) != [0]:
        return None
    p = a[0]
    if p.total_degree() > 0:
        return None
    return p.constant_term()


class _Parser:
    def __init__(self, text: str, nvars: int):
        self.text = text
        self.nvars = nvars
        self.toks = _tokenize(text)
        self.k = 0

    def peek(self):
        return self.toks[self.k]

    def next(self):
        t = self.toks[self.k]
        self.k += 1
        return t

    def expect_op(self, op):
        kind, val, pos = self.next()
        if kind != "OP" or val != op:
            raise ExprError("expected %r" % op, pos)

    def parse_expr(self):
        v = self.parse_term()
        while True:
            kind, val, _ = self.peek()
            if kind == "OP" and val in "+-":
                self.next()
                rhs = self.parse_term()
                v = _v_add(v, rhs if val == "+" else _v_neg(rhs))
            else:
                return v

    def parse_term(self):
        v = self.parse_factor()
        while True:
            kind, val, pos = self.peek()
            if kind == "OP" and val in "*/":
                self.next()
                rhs = self.parse_factor()
                if val == "*":
                    v = _v_mul(v, rhs)
                else:
                    c = _v_as_const(rhs)
                    if c is None:
                        raise ExprError("division only by constants", pos)
                    if c.is_zero():
                        raise ExprError("division by zero", pos)
                    inv = _v_const(self.nvars, CR_ONE / c)
                    v = _v_mul(v, inv)
            else:
                return v

    def parse_factor(self):
        kind, val, _ = self.peek()
        if kind == "OP" and val == "-":
            self.next()
            return _v_neg(self.parse_factor())
        return self.parse_power()

    def parse_power(self):
        v = self.parse_atom()
        kind, val, pos = self.peek()
        if kind == "OP" and val == "^":
            self.next()
            k2, v2, p2 = self.next()
            if k2 != "INT":
                raise ExprError("exponent must be a non-negative integer", p2)
            e = int(v2)
            out = _v_const(self.nvars, CR_ONE)
            for _ in range(e):
                out = _v_mul(out, v)
            return out
        return v

    def parse_atom(self):
        kind, val, pos = self.next()
        if kind == "INT":
            return _v_const(self.nvars, CRat(rat(int(val))))
        if kind == "IMAG":
            return _v_const(self.nvars, CRat(0, rat(int(val))))
        if kind == "IDENT":
            if val == "i":
                return _v_const(self.nvars, CRat(0, 1))
            if val == "lam":
                return {1: Poly.one(self.nvars)}
            if val.startswith("x") and val[1:].isdigit():
                idx = int(val[1:])
                if not 1 <= idx <= self.nvars:
                    raise ExprError(
                        "variable x%d out of range 1..%d" % (idx, self.nvars), pos
                    )
                return {0: Poly.variable(self.nvars, idx)}
            raise ExprError("unknown identifier %r" % val, pos)
        if kind == "OP" and val == "(":
            v = self.parse_expr()
            self.expect_op(")")
            return v
        raise ExprError("unexpected token %r" % (val or "end of input"), pos)

    # -- list forms (vectors and matrices of expressions) -------------------

    def parse_vector(self):
        self.expect_op("[")
        entries = []
        while True:
            entries.append(self.parse_expr())
            kind, val, pos = self.next()
            if kind == "OP" and val == ",":
                continue
            if kind == "OP" and val == "]":
                return tuple(entries)
            raise ExprError("expected ',' or ']'", pos)

    def parse_matrix(self):
        self.expect_op("[")
        rows = []
        while True:
            rows.append(self.parse_vector())
            kind, val, pos = self.next()
            if kind == "OP" and val == ",":
                continue
            if kind == "OP" and val == "]":
                break
            raise ExprError("expected ',' or ']'", pos)
        width = len(rows[0])
        if any(len(r) != width for r in rows):
            raise ExprError("ragged matrix rows", 0)
        return tuple(rows)

    def finish(self):
        kind, val, pos = self.peek()
        if kind != "END":
            raise ExprError("trailing input %r" % val, pos)


def parse_series(text: str, nvars: int) -> dict:
    """Parse a scalar expression into {lambda_power: Poly}."""
    p = _Parser(text, nvars)
    v = p.parse_expr()
    p.finish()
    return v


def parse_poly(text: str, nvars: int) -> Poly:
    """Parse a lambda-free polynomial expression."""
    v = parse_series(text, nvars)
    if any(k != 0 for k in v):
        raise ExprError("'lam' not allowed here", 0)
    return v.get(0, Poly.zero(nvars))


def parse_vector_series(text: str, nvars: int):
    """Parse `[e1, e2, ...]` into a tuple of series dicts."""
    p = _Parser(text, nvars)
    v = p.parse_vector()
    p.finish()
    return v


def parse_matrix_series(text: str, nvars: int):
    """Parse `[[e11, ...], ...]` into a tuple of row tuples of series dicts."""
    p = _Parser(text, nvars)
    v = p.parse_matrix()
    p.finish()
    return v


def parse_poly_matrix(text: str, nvars: int):
    """Parse a matrix whose entries must be lambda-free polynomials."""
    rows = parse_matrix_series(text, nvars)
    out = []
    for row in rows:
        out.append(tuple(_demand_poly(v, nvars) for v in row))
    return tuple(out)


def _demand_poly(v, nvars) -> Poly:
    if any(k != 0 for k in v):
        raise ExprError("'lam' not allowed here", 0)
    return v.get(0, Poly.zero(nvars))
