from hypothesis import given
from hypothesis import strategies as st

from weylstar.poly import CR_I, CR_ONE, CRat, Poly, rat


def crats():
    q = st.integers(-6, 6)
    d = st.integers(1, 4)
    return st.builds(lambda a, b, c, e: CRat(rat(a, b), rat(c, e)), q, d, q, d)


def polys(nvars=2, max_deg=3):
    exps = st.tuples(*([st.integers(0, max_deg)] * nvars))
    term = st.tuples(exps, crats())
    return st.lists(term, max_size=4).map(
        lambda ts: sum(
            (Poly.monomial(nvars, e, c) for e, c in ts), Poly.zero(nvars)
        )
    )


@given(crats(), crats(), crats())
def test_crat_ring_axioms(a, b, c):
    assert (a + b) + c == a + (b + c)
    assert a * (b + c) == a * b + a * c
    assert a + (-a) == CRat(0)
    assert (a * b) * c == a * (b * c)
    assert a * b == b * a


@given(crats())
def test_crat_division_and_conjugation(a):
    if not a.is_zero():
        assert a / a == CR_ONE
        assert (CR_ONE / a) * a == CR_ONE
    assert a.conjugate().conjugate() == a
    assert CR_I * CR_I == CRat(-1)


@given(crats())
def test_crat_canonical_roundtrip(a):
    from weylstar.exprs import parse_series

    s = a.canonical()
    v = parse_series(s, 2)
    got = v.get(0, Poly.zero(2)).constant_term() if v else CRat(0)
    assert got == a


@given(polys(), polys(), polys())
def test_poly_ring_axioms(p, q, r):
    assert (p + q) + r == p + (q + r)
    assert p * (q + r) == p * q + p * r
    assert (p * q) * r == p * (q * r)
    assert p * q == q * p
    assert p - p == Poly.zero(2)


@given(polys(), polys())
def test_poly_diff_is_derivation(p, q):
    for k in (1, 2):
        assert (p * q).diff(k) == p.diff(k) * q + p * q.diff(k)


@given(polys())
def test_poly_canonical_roundtrip(p):
    from weylstar.exprs import parse_poly

    assert parse_poly(p.canonical(), 2) == p


def test_poly_basics():
    x1 = Poly.variable(2, 1)
    x2 = Poly.variable(2, 2)
    p = x1 * x1 + x2.scale(CRat(rat(1, 2)))
    assert p.diff(1) == x1.scale(CRat(2))
    assert p.diff(2) == Poly.const(2, CRat(rat(1, 2)))
    assert p.total_degree() == 2
    assert (p - p).is_zero()
    assert p.canonical() == "1/2*x2 + x1^2"


def test_crat_canonical_forms():
    assert CRat(3).canonical() == "3"
    assert CRat(rat(-1, 2)).canonical() == "-1/2"
    assert CRat(0, 1).canonical() == "i"
    assert CRat(0, -1).canonical() == "-i"
    assert CRat(0, rat(2, 3)).canonical() == "2i/3"
    assert CRat(rat(1, 2), 3).canonical() == "(1/2+3i)"
    assert CRat(2, -1).canonical() == "(2-i)"
