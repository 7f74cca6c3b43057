"""Exact complex-rational scalars and sparse multivariate polynomials.

These are the coefficient rings everything else is built on: CRat is the
field Q(i), Poly is Q(i)[x1..x_m] stored as a sparse map from exponent
vectors to coefficients.  All arithmetic is exact; equality means equality.
"""

from __future__ import annotations

try:
    from gmpy2 import mpq as _mpq
except ImportError:  # pragma: no cover - gmpy2 is the fast path, Fraction works too
    from fractions import Fraction as _mpq


def rat(num, den=1):
    """An exact rational number (the active backend's type)."""
    return _mpq(num, den)


_R0 = rat(0)
_R1 = rat(1)


def _rat_str(q) -> str:
    return str(q)


class CRat:
    """A complex number with exact rational real and imaginary parts."""

    __slots__ = ("re", "im")

    def __init__(self, re=0, im=0):
        self.re = _mpq(re)
        self.im = _mpq(im)

    def __add__(self, other):
        return CRat(self.re + other.re, self.im + other.im)

    def __sub__(self, other):
        return CRat(self.re - other.re, self.im - other.im)

    def __neg__(self):
        return CRat(-self.re, -self.im)

    def __mul__(self, other):
        a, b, c, d = self.re, self.im, other.re, other.im
        if not b and not d:
            return CRat(a * c, 0)
        return CRat(a * c - b * d, a * d + b * c)

    def __truediv__(self, other):
        a, b, c, d = self.re, self.im, other.re, other.im
        if not c and not d:
            raise ZeroDivisionError("division by zero CRat")
        if not d:
            return CRat(a / c, b / c)
        m = c * c + d * d
        return CRat((a * c + b * d) / m, (b * c - a * d) / m)

    def __pow__(self, k: int):
        out = CR_ONE
        base = self
        k = int(k)
        if k < 0:
            base = CR_ONE / base
            k = -k
        while k:
            if k & 1:
                out = out * base
            base = base * base
            k >>= 1
        return out

    def conjugate(self):
        return CRat(self.re, -self.im)

    def scale_rat(self, q):
        return CRat(self.re * q, self.im * q)

    def is_zero(self) -> bool:
        return not self.re and not self.im

    def is_real(self) -> bool:
        return not self.im

    def __bool__(self):
        return bool(self.re) or bool(self.im)

    def __eq__(self, other):
        return isinstance(other, CRat) and self.re == other.re and self.im == other.im

    def __hash__(self):
        return hash((self.re, self.im))

    def canonical(self) -> str:
        """Canonical text form: `3`, `-1/2`, `i`, `2i/3`, `(1/2+3i)`, `(2-i)`.

        Imaginary parts print as `<num>i/<den>` so the string re-parses with
        ordinary operator precedence (`2/3i` would read as 2/(3i)).
        """
        re, im = self.re, self.im
        if not im:
            return _rat_str(re)
        num, den = im.numerator, im.denominator
        if num == 1:
            im_s = "i"
        elif num == -1:
            im_s = "-i"
        else:
            im_s = "%di" % num
        if den != 1:
            im_s += "/%d" % den
        if not re:
            return im_s
        sign = "+" if im > 0 else "-"
        return "(%s%s%s)" % (_rat_str(re), sign, im_s.lstrip("-"))

    def __repr__(self):
        return "CRat(%s)" % self.canonical()


CR_ZERO = CRat(0)
CR_ONE = CRat(1)
CR_I = CRat(0, 1)
CR_MINUS_I = CRat(0, -1)


def crat(value) -> CRat:
    """Coerce an int, rational, or CRat to CRat."""
    if isinstance(value, CRat):
        return value
    return CRat(value)


def _monomial_str(exps) -> str:
    parts = []
    for k, e in enumerate(exps):
        if e == 0:
            continue
        parts.append("x%d" % (k + 1) if e == 1 else "x%d^%d" % (k + 1, e))
    return "*".join(parts)


class Poly:
    """Sparse polynomial over CRat in variables x1..x_nvars.

    terms maps exponent tuples (length nvars) to nonzero CRat coefficients.
    Instances are treated as immutable; all operations return new objects.
    """

    __slots__ = ("nvars", "terms")

    def __init__(self, nvars: int, terms=None):
        self.nvars = nvars
        if terms is None:
            terms = {}
        self.terms = terms

    # -- constructors ------------------------------------------------------

    @classmethod
    def zero(cls, nvars: int) -> "Poly":
        return cls(nvars, {})

    @classmethod
    def const(cls, nvars: int, c) -> "Poly":
        c = crat(c)
        if c.is_zero():
            return cls(nvars, {})
        return cls(nvars, {(0,) * nvars: c})

    @classmethod
    def one(cls, nvars: int) -> "Poly":
        return cls.const(nvars, CR_ONE)

    @classmethod
    def variable(cls, nvars: int, index: int) -> "Poly":
        """The coordinate x_index, index 1-based."""
        if not 1 <= index <= nvars:
            raise IndexError("variable index %d out of range 1..%d" % (index, nvars))
        e = [0] * nvars
        e[index - 1] = 1
        return cls(nvars, {tuple(e): CR_ONE})

    @classmethod
    def monomial(cls, nvars: int, exps, coeff) -> "Poly":
        coeff = crat(coeff)
        exps = tuple(int(e) for e in exps)
        if len(exps) != nvars or any(e < 0 for e in exps):
            raise ValueError("bad exponent vector %r" % (exps,))
        if coeff.is_zero():
            return cls(nvars, {})
        return cls(nvars, {exps: coeff})

    # -- arithmetic --------------------------------------------------------

    def _check(self, other: "Poly"):
        if self.nvars != other.nvars:
            raise ValueError("polynomials over different variable counts")

    def __add__(self, other: "Poly") -> "Poly":
        self._check(other)
        out = dict(self.terms)
        for e, c in other.terms.items():
            prev = out.get(e)
            if prev is None:
                out[e] = c
            else:
                s = prev + c
                if s.is_zero():
                    del out[e]
                else:
                    out[e] = s
        return Poly(self.nvars, out)

    def __sub__(self, other: "Poly") -> "Poly":
        return self + (-other)

    def __neg__(self) -> "Poly":
        return Poly(self.nvars, {e: -c for e, c in self.terms.items()})

    def __mul__(self, other: "Poly") -> "Poly":
        self._check(other)
        if not self.terms or not other.terms:
            return Poly(self.nvars, {})
        out: dict = {}
        for e1, c1 in self.terms.items():
            for e2, c2 in other.terms.items():
                e = tuple(a + b for a, b in zip(e1, e2))
                c = c1 * c2
                prev = out.get(e)
                if prev is None:
                    out[e] = c
                else:
                    s = prev + c
                    if s.is_zero():
                        del out[e]
                    else:
                        out[e] = s
        return Poly(self.nvars, out)

    def __pow__(self, k: int) -> "Poly":
        if k < 0:
            raise ValueError("negative polynomial power")
        out = Poly.one(self.nvars)
        base = self
        while k:
            if k & 1:
                out = out * base
            base = base * base
            k >>= 1
        return out

    def scale(self, c) -> "Poly":
        c = crat(c)
        if c.is_zero():
            return Poly(self.nvars, {})
        return Poly(self.nvars, {e: v * c for e, v in self.terms.items()})

    def diff(self, index: int) -> "Poly":
        """Partial derivative with respect to x_index (1-based)."""
        if not 1 <= index <= self.nvars:
            raise IndexError("variable index %d out of range" % index)
        i = index - 1
        out = {}
        for e, c in self.terms.items():
            m = e[i]
            if m == 0:
                continue
            e2 = e[:i] + (m - 1,) + e[i + 1:]
            out[e2] = c.scale_rat(rat(m))
        return Poly(self.nvars, out)

    def conj(self) -> "Poly":
        """Complex-conjugate all coefficients (coordinates are real)."""
        return Poly(self.nvars, {e: c.conjugate() for e, c in self.terms.items()})

    # -- queries -----------------------------------------------------------

    def is_zero(self) -> bool:
        return not self.terms

    def is_real(self) -> bool:
        return all(c.is_real() for c in self.terms.values())

    def total_degree(self) -> int:
        """Max total degree; -1 for the zero polynomial."""
        if not self.terms:
            return -1
        return max(sum(e) for e in self.terms)

    def constant_term(self) -> CRat:
        return self.terms.get((0,) * self.nvars, CR_ZERO)

    def __eq__(self, other):
        return (
            isinstance(other, Poly)
            and self.nvars == other.nvars
            and self.terms == other.terms
        )

    def __hash__(self):
        return hash((self.nvars, frozenset(self.terms.items())))

    def __bool__(self):
        return bool(self.terms)

    # -- canonical form ----------------------------------------------------

    def canonical(self) -> str:
        """Canonical text form: terms in lexicographic exponent order."""
        if not self.terms:
            return "0"
        chunks = []
        for e in sorted(self.terms):
            c = self.terms[e]
            mono = _monomial_str(e)
            if not mono:
                body = c.canonical()
            elif c == CR_ONE:
                body = mono
            elif c == CRat(-1):
                body = "-" + mono
            else:
                body = c.canonical() + "*" + mono
            chunks.append(body)
        out = chunks[0]
        for body in chunks[1:]:
            if body.startswith("-"):
                out += " - " + body[1:]
            else:
                out += " + " + body
        return out

    def __repr__(self):
        return "Poly(%s)" % self.canonical()
