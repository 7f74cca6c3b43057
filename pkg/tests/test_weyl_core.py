import random

import pytest

from weylstar.poly import CR_I, CRat, Poly, rat
from weylstar.weyl_core import (
    END,
    SCALAR,
    VEC,
    DimensionError,
    GradedElement,
    KindError,
    commutator_ad,
    omega_form,
    omega_tilde,
    scaled_ad,
)

N = 1
TR = 10


def el(terms, kind=SCALAR, rank=1, n=N, trunc=TR):
    return GradedElement.from_terms(n, rank, kind, trunc, terms)


def gen_sym(k, n=N, trunc=TR):
    """The generator dx^k (x) 1."""
    return el([(0, (k,), (), Poly.one(2 * n))], n=n, trunc=trunc)


def gen_asym(k, n=N, trunc=TR):
    """The generator 1 (x) dx^k."""
    return el([(0, (), (k,), Poly.one(2 * n))], n=n, trunc=trunc)


def random_scalar_element(rng, n=N, trunc=TR, max_sym=3, max_lam=2, nterms=4):
    terms = []
    for _ in range(rng.randint(1, nterms)):
        lam = rng.randint(0, max_lam)
        sym = tuple(rng.randint(1, 2 * n) for _ in range(rng.randint(0, max_sym)))
        asym = tuple(
            k for k in range(1, 2 * n + 1) if rng.random() < 0.4
        )
        exps = tuple(rng.randint(0, 2) for _ in range(2 * n))
        c = CRat(rat(rng.randint(-3, 3)), rat(rng.randint(-2, 2)))
        if c.is_zero():
            c = CRat(1)
        terms.append((lam, sym, asym, Poly.monomial(2 * n, exps, c)))
    return el(terms, n=n, trunc=trunc)


# -- spec examples: undeformed product, insertions ---------------------------


def test_sym_mul_square():
    a = gen_sym(1)
    sq = a.sym_mul(a)
    assert sq == el([(0, (1, 1), (), Poly.one(2))])


def test_wedge_nilpotent_and_antisymmetric():
    w1, w2 = gen_asym(1), gen_asym(2)
    assert w1.sym_mul(w1).is_zero()
    assert w1.sym_mul(w2) == -(w2.sym_mul(w1))


def test_insert_sym():
    a = gen_sym(1)
    sq = a.sym_mul(a)
    assert sq.insert_sym(1) == a.scale(CRat(2))
    assert gen_sym(2).insert_sym(1).is_zero()
    mixed = el([(0, (1,), (2,), Poly.one(2))])
    assert mixed.insert_sym(1) == gen_asym(2)


def test_insert_asym():
    w12 = el([(0, (), (1, 2), Poly.one(2))])
    assert w12.insert_asym(1) == gen_asym(2)
    assert w12.insert_asym(2) == -gen_asym(1)
    assert gen_sym(1).insert_asym(1).is_zero()


def test_insert_index_out_of_range():
    with pytest.raises(IndexError):
        gen_sym(1).insert_sym(3)


# -- delta, delta*, hodge ------------------------------------------------------


def test_delta_omega_tilde():
    wt = omega_tilde(N, TR)
    assert wt.delta() == omega_form(N, TR).scale(CRat(2))
    assert wt.delta_inv().is_zero()


def test_delta_on_sym_generator():
    assert gen_sym(1).delta() == gen_asym(1)


def test_delta_inv_examples():
    assert gen_asym(1).delta_inv() == gen_sym(1)


def test_delta_squares_and_anticommutator():
    rng = random.Random(7)
    for _ in range(40):
        a = random_scalar_element(rng)
        assert a.delta().delta().is_zero()
        assert a.delta_star().delta_star().is_zero()
        lhs = a.delta().delta_star() + a.delta_star().delta()
        assert lhs == a.deg_sum_op()


def test_hodge_decomposition():
    rng = random.Random(11)
    for _ in range(40):
        a = random_scalar_element(rng)
        recon = a.delta().delta_inv() + a.delta_inv().delta() + a.sigma_element()
        assert recon == a


# -- the deformed product ------------------------------------------------------


def test_weyl_unit():
    rng = random.Random(3)
    one = GradedElement.one(N, TR)
    for _ in range(10):
        a = random_scalar_element(rng)
        assert a.weyl_mul(one) == a
        assert one.weyl_mul(a) == a


def test_weyl_generator_commutator():
    # dx1 o dx2 - dx2 o dx1 = i*lam  (Poisson pairing of the conjugate pair)
    a, b = gen_sym(1), gen_sym(2)
    comm = a.weyl_mul(b) - b.weyl_mul(a)
    assert comm == el([(1, (), (), Poly.one(2))]).times_i()


def test_weyl_associativity_random():
    rng = random.Random(5)
    for _ in range(25):
        a = random_scalar_element(rng, max_sym=2, max_lam=1, nterms=2)
        b = random_scalar_element(rng, max_sym=2, max_lam=1, nterms=2)
        c = random_scalar_element(rng, max_sym=2, max_lam=1, nterms=2)
        assert a.weyl_mul(b).weyl_mul(c) == a.weyl_mul(b.weyl_mul(c))


def test_weyl_associativity_n2():
    rng = random.Random(6)
    for _ in range(10):
        a = random_scalar_element(rng, n=2, trunc=8, max_sym=2, max_lam=1, nterms=2)
        b = random_scalar_element(rng, n=2, trunc=8, max_sym=2, max_lam=1, nterms=2)
        c = random_scalar_element(rng, n=2, trunc=8, max_sym=2, max_lam=1, nterms=2)
        assert a.weyl_mul(b).weyl_mul(c) == a.weyl_mul(b.weyl_mul(c))


def test_delta_is_inner_derivation():
    # -delta b = (i/lam) ad(omega~)(b)
    rng = random.Random(13)
    wt = omega_tilde(N, TR)
    for _ in range(30):
        b = random_scalar_element(rng)
        assert scaled_ad(wt, b) == -(b.delta())


def test_scaled_ad_scalar_no_negative_lambda():
    rng = random.Random(17)
    for _ in range(20):
        a = random_scalar_element(rng, max_lam=1)
        b = random_scalar_element(rng, max_lam=1)
        res = scaled_ad(a, b)
        ml = res.min_lambda()
        assert ml is None or ml >= 0


def test_ad_of_even_element_on_itself_vanishes():
    rng = random.Random(19)
    for _ in range(10):
        a = random_scalar_element(rng)
        a_even, _ = a.split_asym_parity()
        assert commutator_ad(a_even, a_even).is_zero()


# -- grading ---------------------------------------------------------------------


def test_total_degree_weights():
    lam1 = el([(1, (), (), Poly.one(2))])
    assert lam1.min_total_degree() == 2
    assert gen_sym(1).min_total_degree() == 1


def test_product_preserves_total_degree():
    rng = random.Random(23)
    for _ in range(15):
        a = random_scalar_element(rng, nterms=2)
        b = random_scalar_element(rng, nterms=2)
        prod = a.weyl_mul(b)
        for d, comp in prod.deg_components().items():
            expect = GradedElement.zero(N, 1, SCALAR, TR)
            for d1, c1 in a.deg_components().items():
                for d2, c2 in b.deg_components().items():
                    if d1 + d2 == d:
                        expect = expect + c1.weyl_mul(c2)
            assert comp == expect


def test_dega_graded_product():
    rng = random.Random(29)
    for _ in range(10):
        a = random_scalar_element(rng, nterms=2)
        b = random_scalar_element(rng, nterms=2)
        prod = a.weyl_mul(b)
        for dega in range(3):
            total = GradedElement.zero(N, 1, SCALAR, TR)
            for (_, la, _), ca in a.degrees().items():
                for (_, lb, _), cb in b.degrees().items():
                    if la + lb == dega:
                        total = total + ca.weyl_mul(cb)
            assert prod.part(dega=dega) == total


def test_degrees_reconstruct():
    rng = random.Random(31)
    a = random_scalar_element(rng)
    total = GradedElement.zero(N, 1, SCALAR, TR)
    for comp in a.degrees().values():
        total = total + comp
    assert total == a


def test_truncation_consistency():
    rng = random.Random(37)
    for _ in range(15):
        a = random_scalar_element(rng, trunc=10)
        b = random_scalar_element(rng, trunc=10)
        hi = a.weyl_mul(b).retrunc(6)
        lo = a.retrunc(6).weyl_mul(b.retrunc(6))
        assert hi == lo


# -- module structure --------------------------------------------------------------


def random_end_element(rng, rank=2, n=N, trunc=TR):
    terms = []
    for _ in range(rng.randint(1, 3)):
        lam = rng.randint(0, 1)
        sym = tuple(rng.randint(1, 2 * n) for _ in range(rng.randint(0, 2)))
        asym = tuple(k for k in range(1, 2 * n + 1) if rng.random() < 0.3)
        mat = tuple(
            tuple(
                Poly.monomial(
                    2 * n,
                    tuple(rng.randint(0, 1) for _ in range(2 * n)),
                    CRat(rng.randint(-2, 2)),
                )
                for _ in range(rank)
            )
            for _ in range(rank)
        )
        terms.append((lam, sym, asym, mat))
    return GradedElement.from_terms(n, rank, END, trunc, terms)


def random_vec_element(rng, rank=2, n=N, trunc=TR):
    terms = []
    for _ in range(rng.randint(1, 3)):
        lam = rng.randint(0, 1)
        sym = tuple(rng.randint(1, 2 * n) for _ in range(rng.randint(0, 2)))
        asym = tuple(k for k in range(1, 2 * n + 1) if rng.random() < 0.3)
        vec = tuple(
            Poly.monomial(
                2 * n,
                tuple(rng.randint(0, 1) for _ in range(2 * n)),
                CRat(rng.randint(-2, 2)),
            )
            for _ in range(rank)
        )
        terms.append((lam, sym, asym, vec))
    return GradedElement.from_terms(n, rank, VEC, trunc, terms)


def test_module_actions_commute_and_associate():
    rng = random.Random(41)
    for _ in range(15):
        a = random_end_element(rng)
        b = random_end_element(rng)
        psi = random_vec_element(rng)
        s = random_scalar_element(rng, nterms=2).retrunc(TR)
        s = GradedElement(1, 2, SCALAR, TR, dict(s.data))
        # (a o psi) o f = a o (psi o f); (a o b) o psi = a o (b o psi)
        assert a.weyl_mul(psi).weyl_mul(s) == a.weyl_mul(psi.weyl_mul(s))
        assert a.weyl_mul(b).weyl_mul(psi) == a.weyl_mul(b.weyl_mul(psi))


def test_identity_endomorphism_is_unit():
    rng = random.Random(43)
    ident = GradedElement.identity(N, 2, TR)
    psi = random_vec_element(rng)
    a = random_end_element(rng)
    assert ident.weyl_mul(psi) == psi
    assert ident.weyl_mul(a) == a
    assert a.weyl_mul(ident) == a


def test_kind_errors():
    psi = GradedElement.from_fiber(N, 2, VEC, TR, (Poly.one(2), Poly.zero(2)))
    with pytest.raises(KindError):
        psi.weyl_mul(psi)


def test_dimension_error():
    a = GradedElement.one(1, 8)
    b = GradedElement.one(1, 10)
    with pytest.raises(DimensionError):
        a.weyl_mul(b)


# -- serialization -----------------------------------------------------------------


def test_canonical_roundtrip_scalar():
    rng = random.Random(47)
    for _ in range(10):
        a = random_scalar_element(rng)
        text = a.canonical_text()
        back = GradedElement.parse(text, N, 1, SCALAR, TR)
        assert back == a
        assert back.canonical_text() == text


def test_canonical_roundtrip_end_vec():
    rng = random.Random(53)
    a = random_end_element(rng)
    assert GradedElement.parse(a.canonical_text(), N, 2, END, TR) == a
    v = random_vec_element(rng)
    assert GradedElement.parse(v.canonical_text(), N, 2, VEC, TR) == v
