"""The graded fiber algebra of the formal Weyl construction.

Elements live in (symmetric forms) x (antisymmetric forms) x (fiber) over a
2n-dimensional chart, with polynomial coefficients and a formal parameter
lam.  A term is indexed by a key (lam_power, sym, asym):

    lam_power : integer power of the formal parameter (negative allowed in
                intermediate values; solved objects must come out >= 0)
    sym       : sorted tuple of coordinate indices in 1..2n (a multiset,
                the symmetric-form factor)
    asym      : sorted strictly increasing tuple (the wedge factor)

and carries a fiber value: a Poly (scalar kind), a rank x rank matrix of
Poly (endomorphism kind, "end"), or a length-rank vector of Poly (section
kind, "vec").

The total degree of a term is Deg = len(sym) + 2*lam_power; every element
carries a cutoff `trunc` and silently drops terms with Deg > trunc.  The
deformed product preserves Deg termwise (each contraction trades two
symmetric slots for one power of lam), so truncation commutes with all
products: computing at cutoff N then truncating to N' < N equals computing
at cutoff N'.

The chart is a Darboux chart: the symplectic matrix is the constant
standard one (omega[i][n+i] = 1 = -omega[n+i][i], indices 1-based), and
the Poisson tensor used in the deformed product is minus its inverse.
"""

from __future__ import annotations

import itertools
from dataclasses import dataclass

from .exprs import parse_poly
from .poly import CR_I, CR_ONE, CR_ZERO, CRat, Poly, crat, rat

SCALAR = "scalar"
END = "end"
VEC = "vec"

_KINDS = (SCALAR, END, VEC)


class DimensionError(ValueError):
    """Mismatched chart dimension, fiber rank, or cutoff between operands."""


class KindError(ValueError):
    """Fiber kinds that the requested product/action does not support."""


@dataclass(frozen=True)
class TruncationOrder:
    """Total-degree cutoff for all series arithmetic.

    To read off star products correct modulo lam^(K+1) the cutoff must be
    at least 2K, since lam carries total degree 2.
    """

    cutoff: int

    def __post_init__(self):
        if self.cutoff < 0:
            raise ValueError("truncation order must be >= 0")

    @classmethod
    def for_lambda_order(cls, k: int) -> "TruncationOrder":
        if k < 0:
            raise ValueError("lambda order must be >= 0")
        return cls(2 * k)


def as_cutoff(trunc) -> int:
    if isinstance(trunc, TruncationOrder):
        return trunc.cutoff
    n = int(trunc)
    if n < 0:
        raise ValueError("truncation order must be >= 0")
    return n


# ---------------------------------------------------------------------------
# standard symplectic structure of the chart

def omega_entry(n: int, i: int, j: int) -> int:
    """Entry omega_{ij} of the standard symplectic matrix, 1-based."""
    if j == i + n:
        return 1
    if i == j + n:
        return -1
    return 0


def omega_upper_entry(n: int, i: int, j: int) -> int:
    """Entry omega^{ij} of the inverse matrix (omega^{il} omega_{lj} = delta)."""
    if j == i + n:
        return -1
    if i == j + n:
        return 1
    return 0


def poisson_entry(n: int, i: int, j: int) -> int:
    """Poisson tensor Lambda^{ij} = -omega^{ij}."""
    return -omega_upper_entry(n, i, j)


def _partner(n: int, k: int) -> int:
    return k + n if k <= n else k - n


# ---------------------------------------------------------------------------
# fiber values

def fiber_zero(kind, nvars, rank):
    if kind == SCALAR:
        return Poly.zero(nvars)
    if kind == VEC:
        return (Poly.zero(nvars),) * rank
    z = Poly.zero(nvars)
    return tuple((z,) * rank for _ in range(rank))


def fiber_is_zero(kind, v) -> bool:
    if kind == SCALAR:
        return v.is_zero()
    if kind == VEC:
        return all(p.is_zero() for p in v)
    return all(p.is_zero() for row in v for p in row)


def fiber_add(kind, a, b):
    if kind == SCALAR:
        return a + b
    if kind == VEC:
        return tuple(x + y for x, y in zip(a, b))
    return tuple(tuple(x + y for x, y in zip(ra, rb)) for ra, rb in zip(a, b))


def fiber_neg(kind, a):
    if kind == SCALAR:
        return -a
    if kind == VEC:
        return tuple(-x for x in a)
    return tuple(tuple(-x for x in row) for row in a)


def fiber_scale(kind, a, c: CRat):
    if kind == SCALAR:
        return a.scale(c)
    if kind == VEC:
        return tuple(x.scale(c) for x in a)
    return tuple(tuple(x.scale(c) for x in row) for row in a)


def fiber_scale_poly(kind, a, p: Poly):
    if kind == SCALAR:
        return a * p
    if kind == VEC:
        return tuple(x * p for x in a)
    return tuple(tuple(x * p for x in row) for row in a)


def fiber_map(kind, a, f):
    if kind == SCALAR:
        return f(a)
    if kind == VEC:
        return tuple(f(x) for x in a)
    return tuple(tuple(f(x) for x in row) for row in a)


def mul_kind(kind1, kind2):
    """Result kind of the (module) products, or None when undefined."""
    if kind1 == SCALAR:
        return kind2
    if kind1 == END:
        if kind2 == VEC:
            return VEC
        if kind2 in (SCALAR, END):
            return END
        return None
    if kind1 == VEC and kind2 == SCALAR:
        return VEC
    return None


def fiber_mul(kind1, a, kind2, b):
    """Pointwise fiber product; kinds must be compatible per mul_kind."""
    if kind1 == SCALAR:
        if kind2 == SCALAR:
            return a * b
        if kind2 == END:
            return tuple(tuple(a * x for x in row) for row in b)
        return tuple(a * x for x in b)
    if kind1 == END:
        if kind2 == SCALAR:
            return tuple(tuple(x * b for x in row) for row in a)
        if kind2 == END:
            r = len(a)
            return tuple(
                tuple(
                    _poly_dot(a[i], [b[k][j] for k in range(r)]) for j in range(r)
                )
                for i in range(r)
            )
        return tuple(_poly_dot(row, b) for row in a)
    # VEC * SCALAR
    return tuple(x * b for x in a)


def _poly_dot(xs, ys) -> Poly:
    out = None
    for x, y in zip(xs, ys):
        p = x * y
        out = p if out is None else out + p
    return out


def end_identity_value(nvars: int, rank: int):
    one = Poly.one(nvars)
    z = Poly.zero(nvars)
    return tuple(
        tuple(one if i == j else z for j in range(rank)) for i in range(rank)
    )


# ---------------------------------------------------------------------------
# wedge combinatorics

def _wedge_merge(a1, a2):
    """Merge two sorted strictly-increasing tuples with the Koszul sign.

    Returns (sign, merged) or (0, None) if they overlap.
    """
    if not a1:
        return 1, a2
    if not a2:
        return 1, a1
    sign = 1
    out = []
    i, j, n1 = 0, 0, len(a1)
    while i < n1 and j < len(a2):
        x, y = a1[i], a2[j]
        if x == y:
            return 0, None
        if x < y:
            out.append(x)
            i += 1
        else:
            out.append(y)
            j += 1
            if (n1 - i) & 1:
                sign = -sign
    out.extend(a1[i:])
    out.extend(a2[j:])
    return sign, tuple(out)


def _counts(sym):
    c = {}
    for k in sym:
        c[k] = c.get(k, 0) + 1
    return c


_I_POW = (CR_ONE, CR_I, CRat(-1), CRat(0, -1))


def _half_i_pow(t: int) -> CRat:
    # (i/2)^t
    return _I_POW[t & 3].scale_rat(rat(1, 2 ** t))


def _falling(c: int, m: int) -> int:
    out = 1
    for j in range(m):
        out *= c - j
    return out


_FACT = [1]
while len(_FACT) < 64:
    _FACT.append(_FACT[-1] * len(_FACT))


class GradedElement:
    """A truncated element of the graded fiber algebra.

    Treated as immutable: operations return new elements, `data` is never
    mutated after construction.
    """

    __slots__ = ("n", "rank", "kind", "trunc", "data")

    def __init__(self, n, rank, kind, trunc, data):
        self.n = n
        self.rank = rank
        self.kind = kind
        self.trunc = trunc
        self.data = data

    # -- constructors ------------------------------------------------------

    @classmethod
    def zero(cls, n, rank, kind, trunc) -> "GradedElement":
        if kind not in _KINDS:
            raise KindError("unknown fiber kind %r" % kind)
        return cls(n, rank, kind, as_cutoff(trunc), {})

    @classmethod
    def from_terms(cls, n, rank, kind, trunc, terms) -> "GradedElement":
        """Build from (lam, sym, asym, value) tuples, normalizing keys.

        sym is sorted; asym is sorted with the wedge sign applied, and a
        repeated antisymmetric index kills the term.
        """
        out = cls.zero(n, rank, kind, trunc)
        data = {}
        for lam, sym, asym, value in terms:
            sym = tuple(sorted(int(k) for k in sym))
            for k in sym:
                if not 1 <= k <= 2 * n:
                    raise IndexError("symmetric index %d out of range" % k)
            sign, aset = _normalize_asym(asym)
            if sign == 0:
                continue
            for k in aset:
                if not 1 <= k <= 2 * n:
                    raise IndexError("antisymmetric index %d out of range" % k)
            if len(sym) + 2 * lam > out.trunc:
                continue
            if sign < 0:
                value = fiber_neg(kind, value)
            _acc(data, kind, (int(lam), sym, aset), value)
        return cls(n, rank, kind, out.trunc, data)

    @classmethod
    def from_fiber(cls, n, rank, kind, trunc, value, lam=0) -> "GradedElement":
        return cls.from_terms(n, rank, kind, trunc, [(lam, (), (), value)])

    @classmethod
    def from_poly(cls, n, trunc, p: Poly, lam=0) -> "GradedElement":
        return cls.from_fiber(n, 1, SCALAR, trunc, p, lam=lam)

    @classmethod
    def one(cls, n, trunc) -> "GradedElement":
        return cls.from_poly(n, trunc, Poly.one(2 * n))

    @classmethod
    def identity(cls, n, rank, trunc) -> "GradedElement":
        return cls.from_fiber(n, rank, END, trunc, end_identity_value(2 * n, rank))

    # -- structural helpers --------------------------------------------------

    def _like(self, data, kind=None) -> "GradedElement":
        return GradedElement(self.n, self.rank, kind or self.kind, self.trunc, data)

    def _check_compatible(self, other: "GradedElement"):
        if (
            self.n != other.n
            or self.rank != other.rank
            or self.trunc != other.trunc
        ):
            raise DimensionError(
                "operands disagree: (n=%d, rank=%d, trunc=%d) vs (n=%d, rank=%d, trunc=%d)"
                % (self.n, self.rank, self.trunc, other.n, other.rank, other.trunc)
            )

    def is_zero(self) -> bool:
        return not self.data

    def __eq__(self, other):
        return (
            isinstance(other, GradedElement)
            and self.n == other.n
            and self.rank == other.rank
            and self.kind == other.kind
            and self.trunc == other.trunc
            and self.data == other.data
        )

    def __repr__(self):
        return "GradedElement(kind=%s, %d terms, trunc=%d)" % (
            self.kind,
            len(self.data),
            self.trunc,
        )

    def terms(self):
        return self.data.items()

    def retrunc(self, trunc) -> "GradedElement":
        """Copy with a new cutoff, dropping terms above it.

        Raising the cutoff does not create the (unknown) discarded tail; it
        only permits higher-degree terms in subsequent arithmetic.
        """
        trunc = as_cutoff(trunc)
        data = {
            key: v
            for key, v in self.data.items()
            if len(key[1]) + 2 * key[0] <= trunc
        }
        return GradedElement(self.n, self.rank, self.kind, trunc, data)

    def eq_mod(self, other: "GradedElement", deg: int) -> bool:
        """Equality of all components with Deg <= deg."""
        return self.retrunc(deg).data == other.retrunc(deg).data

    # -- linear structure ----------------------------------------------------

    def __add__(self, other: "GradedElement") -> "GradedElement":
        self._check_compatible(other)
        if self.kind != other.kind:
            raise KindError("cannot add %s and %s elements" % (self.kind, other.kind))
        data = dict(self.data)
        for key, v in other.data.items():
            _acc(data, self.kind, key, v)
        return self._like(data)

    def __sub__(self, other: "GradedElement") -> "GradedElement":
        return self + (-other)

    def __neg__(self) -> "GradedElement":
        return self._like(
            {key: fiber_neg(self.kind, v) for key, v in self.data.items()}
        )

    def scale(self, c) -> "GradedElement":
        c = crat(c)
        if c.is_zero():
            return self._like({})
        return self._like(
            {key: fiber_scale(self.kind, v, c) for key, v in self.data.items()}
        )

    def scale_poly(self, p: Poly) -> "GradedElement":
        if p.is_zero():
            return self._like({})
        return self._like(
            {key: fiber_scale_poly(self.kind, v, p) for key, v in self.data.items()}
        )

    def times_i(self) -> "GradedElement":
        return self.scale(CR_I)

    def shift_lambda(self, k: int) -> "GradedElement":
        """Multiply by lam^k (k may be negative); terms pushed over the cutoff drop."""
        data = {}
        for (lam, sym, asym), v in self.data.items():
            if len(sym) + 2 * (lam + k) > self.trunc:
                continue
            data[(lam + k, sym, asym)] = v
        return self._like(data)

    # -- degree bookkeeping --------------------------------------------------

    def min_lambda(self):
        return min((key[0] for key in self.data), default=None)

    def min_total_degree(self):
        return min((len(k[1]) + 2 * k[0] for k in self.data), default=None)

    def max_total_degree(self):
        return max((len(k[1]) + 2 * k[0] for k in self.data), default=None)

    def degrees(self):
        """Homogeneous decomposition, keyed by (deg_s, deg_a, deg_lam).

        The total degree of a component is deg_s + 2*deg_lam; the sum of all
        components reconstructs the element.
        """
        buckets = {}
        for key, v in self.data.items():
            lam, sym, asym = key
            buckets.setdefault((len(sym), len(asym), lam), {})[key] = v
        return {sig: self._like(data) for sig, data in buckets.items()}

    def deg_component(self, d: int) -> "GradedElement":
        data = {
            key: v
            for key, v in self.data.items()
            if len(key[1]) + 2 * key[0] == d
        }
        return self._like(data)

    def deg_components(self):
        out = {}
        for key, v in self.data.items():
            d = len(key[1]) + 2 * key[0]
            out.setdefault(d, {})[key] = v
        return {d: self._like(data) for d, data in sorted(out.items())}

    def part(self, degs=None, dega=None, lam=None) -> "GradedElement":
        data = {}
        for key, v in self.data.items():
            if degs is not None and len(key[1]) != degs:
                continue
            if dega is not None and len(key[2]) != dega:
                continue
            if lam is not None and key[0] != lam:
                continue
            data[key] = v
        return self._like(data)

    def split_asym_parity(self):
        even, odd = {}, {}
        for key, v in self.data.items():
            (odd if len(key[2]) & 1 else even)[key] = v
        return self._like(even), self._like(odd)

    def map_values(self, f, kind=None) -> "GradedElement":
        """Apply f to every fiber value (same keys), pruning zeros."""
        kind = kind or self.kind
        data = {}
        for key, v in self.data.items():
            w = f(v)
            if not fiber_is_zero(kind, w):
                data[key] = w
        return GradedElement(self.n, self.rank, kind, self.trunc, data)

    def diff_coeffs(self, index: int) -> "GradedElement":
        """Differentiate every polynomial coefficient by x_index."""
        kind = self.kind
        return self.map_values(lambda v: fiber_map(kind, v, lambda p: p.diff(index)))

    def vec_component(self, a: int) -> "GradedElement":
        """The a-th fiber component of a section-valued element, as scalar kind."""
        if self.kind != VEC:
            raise KindError("vec_component expects a section-valued element")
        data = {}
        for key, v in self.data.items():
            p = v[a]
            if not p.is_zero():
                data[key] = p
        return GradedElement(self.n, self.rank, SCALAR, self.trunc, data)

    # -- insertions and the structural operators ------------------------------

    def insert_sym(self, k: int) -> "GradedElement":
        """Symmetric insertion i_s(d/dx^k): derivation on the symmetric factor."""
        self._check_index(k)
        data = {}
        for (lam, sym, asym), v in self.data.items():
            m = sym.count(k)
            if m == 0:
                continue
            pos = sym.index(k)
            key = (lam, sym[:pos] + sym[pos + 1:], asym)
            _acc(data, self.kind, key, fiber_scale(self.kind, v, CRat(m)))
        return self._like(data)

    def insert_asym(self, k: int) -> "GradedElement":
        """Antisymmetric insertion i_a(d/dx^k): contraction with Koszul sign."""
        self._check_index(k)
        data = {}
        for (lam, sym, asym), v in self.data.items():
            try:
                pos = asym.index(k)
            except ValueError:
                continue
            if pos & 1:
                v = fiber_neg(self.kind, v)
            _acc(data, self.kind, (lam, sym, asym[:pos] + asym[pos + 1:]), v)
        return self._like(data)

    def mul_sym_gen(self, k: int) -> "GradedElement":
        """Multiply by the symmetric generator (dx^k (x) 1)."""
        self._check_index(k)
        data = {}
        for (lam, sym, asym), v in self.data.items():
            if len(sym) + 1 + 2 * lam > self.trunc:
                continue
            pos = 0
            while pos < len(sym) and sym[pos] < k:
                pos += 1
            _acc(data, self.kind, (lam, sym[:pos] + (k,) + sym[pos:], asym), v)
        return self._like(data)

    def mul_asym_gen(self, k: int) -> "GradedElement":
        """Left-wedge with the antisymmetric generator (1 (x) dx^k)."""
        self._check_index(k)
        data = {}
        for (lam, sym, asym), v in self.data.items():
            if k in asym:
                continue
            before = sum(1 for j in asym if j < k)
            if before & 1:
                v = fiber_neg(self.kind, v)
            merged = tuple(sorted(asym + (k,)))
            _acc(data, self.kind, (lam, sym, merged), v)
        return self._like(data)

    def delta(self) -> "GradedElement":
        """delta = sum_k (1 (x) dx^k) wedge i_s(d_k); lowers Deg by one."""
        data = {}
        for (lam, sym, asym), v in self.data.items():
            seen = None
            for pos, k in enumerate(sym):
                if k == seen:
                    continue
                seen = k
                if k in asym:
                    continue
                m = sym.count(k)
                before = sum(1 for j in asym if j < k)
                c = CRat(-m if before & 1 else m)
                key = (
                    lam,
                    sym[:pos] + sym[pos + 1:],
                    tuple(sorted(asym + (k,))),
                )
                _acc(data, self.kind, key, fiber_scale(self.kind, v, c))
        return self._like(data)

    def delta_star(self) -> "GradedElement":
        """delta* = sum_k (dx^k (x) 1) vee i_a(d_k); raises Deg by one."""
        data = {}
        for (lam, sym, asym), v in self.data.items():
            if len(sym) + 1 + 2 * lam > self.trunc:
                continue
            for pos, k in enumerate(asym):
                c = CRat(-1 if pos & 1 else 1)
                spos = 0
                while spos < len(sym) and sym[spos] < k:
                    spos += 1
                key = (
                    lam,
                    sym[:spos] + (k,) + sym[spos:],
                    asym[:pos] + asym[pos + 1:],
                )
                _acc(data, self.kind, key, fiber_scale(self.kind, v, c))
        return self._like(data)

    def delta_inv(self) -> "GradedElement":
        """The homotopy delta^{-1}: delta*/(deg_s + deg_a), zero on degree (0,0)."""
        data = {}
        for (lam, sym, asym), v in self.data.items():
            kl = len(sym) + len(asym)
            if kl == 0:
                continue
            if len(sym) + 1 + 2 * lam > self.trunc:
                continue
            q = rat(1, kl)
            for pos, k in enumerate(asym):
                c = CRat(-q if pos & 1 else q)
                spos = 0
                while spos < len(sym) and sym[spos] < k:
                    spos += 1
                key = (
                    lam,
                    sym[:spos] + (k,) + sym[spos:],
                    asym[:pos] + asym[pos + 1:],
                )
                _acc(data, self.kind, key, fiber_scale(self.kind, v, c))
        return self._like(data)

    def sigma_element(self) -> "GradedElement":
        """Projection onto symmetric and antisymmetric degree zero."""
        data = {
            key: v for key, v in self.data.items() if not key[1] and not key[2]
        }
        return self._like(data)

    def sigma_series(self) -> dict:
        """The symbol as a map {lam_power: fiber value}."""
        return {
            key[0]: v
            for key, v in self.data.items()
            if not key[1] and not key[2]
        }

    def deg_sum_op(self) -> "GradedElement":
        """(deg_s + deg_a) applied as an operator (termwise scaling)."""
        data = {}
        for key, v in self.data.items():
            m = len(key[1]) + len(key[2])
            if m == 0:
                continue
            data[key] = fiber_scale(self.kind, v, CRat(m))
        return self._like(data)

    # -- products -------------------------------------------------------------

    def sym_mul(self, other: "GradedElement") -> "GradedElement":
        """Undeformed (vee (x) wedge) product with the fiber product."""
        return self._product(other, deformed=False)

    def weyl_mul(self, other: "GradedElement") -> "GradedElement":
        """Fiberwise deformed product: exponential contraction of symmetric
        slots against the Poisson tensor; each contraction order t adds t to
        the lam power, so Deg is preserved termwise."""
        return self._product(other, deformed=True)

    def _product(self, other: "GradedElement", deformed: bool) -> "GradedElement":
        self._check_compatible(other)
        out_kind = mul_kind(self.kind, other.kind)
        if out_kind is None:
            raise KindError(
                "no product for kinds (%s, %s)" % (self.kind, other.kind)
            )
        n, trunc = self.n, self.trunc
        data = {}
        left = [
            (key, len(key[1]) + 2 * key[0], _counts(key[1]), v)
            for key, v in self.data.items()
        ]
        right = [
            (key, len(key[1]) + 2 * key[0], _counts(key[1]), v)
            for key, v in other.data.items()
        ]
        for (l1, s1, a1), d1, c1, v1 in left:
            for (l2, s2, a2), d2, c2, v2 in right:
                if d1 + d2 > trunc:
                    continue
                wsign, asym = _wedge_merge(a1, a2)
                if wsign == 0:
                    continue
                base = fiber_mul(self.kind, v1, other.kind, v2)
                if fiber_is_zero(out_kind, base):
                    continue
                if wsign < 0:
                    base = fiber_neg(out_kind, base)
                if not deformed:
                    sym = tuple(sorted(s1 + s2))
                    _acc(data, out_kind, (l1 + l2, sym, asym), base)
                    continue
                # contraction channels pair index k on the left with its
                # symplectic partner on the right; the pools are disjoint,
                # so channel multiplicities range independently
                channels = []
                for k, ck in c1.items():
                    p = _partner(n, k)
                    cp = c2.get(p)
                    if cp:
                        channels.append((k, p, min(ck, cp), 1 if k <= n else -1))
                ranges = [range(cap + 1) for (_, _, cap, _) in channels]
                for mvec in itertools.product(*ranges):
                    t = sum(mvec)
                    num = 1
                    den = 1
                    rem1 = {}
                    rem2 = {}
                    for (k, p, _, sgn), mc in zip(channels, mvec):
                        if mc == 0:
                            continue
                        num *= _falling(c1[k], mc) * _falling(c2[p], mc)
                        if sgn < 0 and mc & 1:
                            num = -num
                        den *= _FACT[mc]
                        rem1[k] = mc
                        rem2[p] = mc
                    coeff = _half_i_pow(t).scale_rat(rat(num, den))
                    merged = []
                    for idx in sorted(set(c1) | set(c2)):
                        cnt = (
                            c1.get(idx, 0)
                            - rem1.get(idx, 0)
                            + c2.get(idx, 0)
                            - rem2.get(idx, 0)
                        )
                        merged.extend((idx,) * cnt)
                    key = (l1 + l2 + t, tuple(merged), asym)
                    _acc(data, out_kind, key, fiber_scale(out_kind, base, coeff))
        return GradedElement(self.n, self.rank, out_kind, trunc, data)

    # -- embeddings ------------------------------------------------------------

    def embed_end(self, rank: int) -> "GradedElement":
        """Embed a scalar element as a multiple of the identity endomorphism."""
        if self.kind != SCALAR:
            raise KindError("embed_end expects a scalar element")
        z = Poly.zero(2 * self.n)
        data = {
            key: tuple(
                tuple(v if i == j else z for j in range(rank)) for i in range(rank)
            )
            for key, v in self.data.items()
        }
        return GradedElement(self.n, rank, END, self.trunc, data)

    def _check_index(self, k: int):
        if not 1 <= k <= 2 * self.n:
            raise IndexError("coordinate index %d out of range 1..%d" % (k, 2 * self.n))

    # -- canonical serialization ------------------------------------------------

    def to_lines(self):
        """Canonical text: one line per term, sorted by (Deg, lam, sym, asym)."""
        lines = []
        for lam, sym, asym in sorted(
            self.data, key=lambda k: (len(k[1]) + 2 * k[0], k[0], k[1], k[2])
        ):
            v = self.data[(lam, sym, asym)]
            lines.append(
                "lambda^%d | sym=[%s] | asym=[%s] | %s"
                % (
                    lam,
                    ",".join(map(str, sym)),
                    ",".join(map(str, asym)),
                    _fiber_repr(self.kind, v),
                )
            )
        return lines

    def canonical_text(self) -> str:
        return "\n".join(self.to_lines())

    @classmethod
    def parse(cls, text, n, rank, kind, trunc) -> "GradedElement":
        terms = []
        for raw in text.splitlines():
            line = raw.strip()
            if not line or line.startswith("#"):
                continue
            terms.append(_parse_term_line(line, n, rank, kind))
        return cls.from_terms(n, rank, kind, trunc, terms)


def _normalize_asym(asym):
    """Sort an antisymmetric index tuple, returning (sign, tuple); 0 on repeats."""
    lst = [int(k) for k in asym]
    if len(set(lst)) != len(lst):
        return 0, ()
    sign = 1
    for i in range(len(lst)):
        for j in range(i + 1, len(lst)):
            if lst[i] > lst[j]:
                sign = -sign
    return sign, tuple(sorted(lst))


def _acc(data, kind, key, value):
    prev = data.get(key)
    if prev is None:
        if not fiber_is_zero(kind, value):
            data[key] = value
        return
    s = fiber_add(kind, prev, value)
    if fiber_is_zero(kind, s):
        del data[key]
    else:
        data[key] = s


def _fiber_repr(kind, v) -> str:
    if kind == SCALAR:
        return "poly=%s" % v.canonical()
    if kind == VEC:
        return "vec=[%s]" % ", ".join('"%s"' % p.canonical() for p in v)
    rows = ", ".join(
        "[%s]" % ", ".join('"%s"' % p.canonical() for p in row) for row in v
    )
    return "mat=[%s]" % rows


def _parse_term_line(line, n, rank, kind):
    parts = [p.strip() for p in line.split("|")]
    if len(parts) != 4:
        raise ValueError("malformed term line: %r" % line)
    if not parts[0].startswith("lambda^"):
        raise ValueError("malformed lambda field: %r" % parts[0])
    lam = int(parts[0][len("lambda^"):])
    sym = _parse_index_list(parts[1], "sym")
    asym = _parse_index_list(parts[2], "asym")
    nvars = 2 * n
    body = parts[3]
    if kind == SCALAR:
        if not body.startswith("poly="):
            raise ValueError("expected poly= field: %r" % body)
        value = parse_poly(body[len("poly="):], nvars)
    elif kind == VEC:
        if not body.startswith("vec="):
            raise ValueError("expected vec= field: %r" % body)
        value = tuple(parse_poly(s, nvars) for s in _split_quoted(body[len("vec="):]))
        if len(value) != rank:
            raise ValueError("vector length %d != rank %d" % (len(value), rank))
    else:
        if not body.startswith("mat="):
            raise ValueError("expected mat= field: %r" % body)
        rows = _split_rows(body[len("mat="):])
        value = tuple(
            tuple(parse_poly(s, nvars) for s in row) for row in rows
        )
        if len(value) != rank or any(len(r) != rank for r in value):
            raise ValueError("matrix shape mismatch with rank %d" % rank)
    return (lam, sym, asym, value)


def _parse_index_list(field, name):
    if not field.startswith(name + "=[") or not field.endswith("]"):
        raise ValueError("malformed %s field: %r" % (name, field))
    body = field[len(name) + 2:-1].strip()
    if not body:
        return ()
    return tuple(int(x) for x in body.split(","))


def _split_quoted(body):
    body = body.strip()
    if not body.startswith("[") or not body.endswith("]"):
        raise ValueError("malformed list: %r" % body)
    out = []
    i = 1
    while i < len(body) - 1:
        ch = body[i]
        if ch in " ,":
            i += 1
            continue
        if ch != '"':
            raise ValueError("expected quoted entry in %r" % body)
        j = body.index('"', i + 1)
        out.append(body[i + 1:j])
        i = j + 1
    return out


def _split_rows(body):
    body = body.strip()
    if not body.startswith("[") or not body.endswith("]"):
        raise ValueError("malformed matrix: %r" % body)
    rows = []
    depth = 0
    start = None
    for i, ch in enumerate(body):
        if ch == "[":
            depth += 1
            if depth == 2:
                start = i
        elif ch == "]":
            if depth == 2:
                rows.append(_split_quoted(body[start:i + 1]))
            depth -= 1
    return rows


# ---------------------------------------------------------------------------
# derived operators

def commutator_ad(a: GradedElement, b: GradedElement) -> GradedElement:
    """Super-commutator ad(a)b = a o b - (-1)^{|a||b|} b o a (|.| = wedge parity)."""
    b_even, b_odd = b.split_asym_parity()
    a_even, a_odd = a.split_asym_parity()
    out = a.weyl_mul(b)
    out = out - b_even.weyl_mul(a_even) - b_even.weyl_mul(a_odd)
    out = out - b_odd.weyl_mul(a_even) + b_odd.weyl_mul(a_odd)
    return out


def scaled_ad(a: GradedElement, b: GradedElement) -> GradedElement:
    """(i/lam) ad(a) b."""
    return commutator_ad(a, b).times_i().shift_lambda(-1)


def omega_tilde(n: int, trunc) -> GradedElement:
    """The symplectic form as a (sym 1, asym 1) element: omega_{ij} dx^i (x) dx^j."""
    terms = []
    one = Poly.one(2 * n)
    for i in range(1, n + 1):
        terms.append((0, (i,), (i + n,), one))
        terms.append((0, (i + n,), (i,), -one))
    return GradedElement.from_terms(n, 1, SCALAR, trunc, terms)


def omega_form(n: int, trunc) -> GradedElement:
    """The symplectic form as an antisymmetric 2-form element."""
    one = Poly.one(2 * n)
    terms = [(0, (), (i, i + n), one) for i in range(1, n + 1)]
    return GradedElement.from_terms(n, 1, SCALAR, trunc, terms)
