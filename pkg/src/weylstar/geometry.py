"""Geometric input data and the covariant calculus built from it.

A chart scenario consists of lowered symplectic Christoffel symbols (their
total symmetry encodes "torsion-free and compatible with the constant
symplectic form"), a local connection one-form for the fiber bundle, and a
closed formal two-form series entering the flatness normalization.  The
covariant derivatives act on graded elements as wedge-degree +1
super-derivations; curvature sign conventions are pinned by the operator
identities checked in verify_geometry_identities.
"""

from __future__ import annotations

import hashlib
from dataclasses import dataclass
from functools import lru_cache

from .exprs import parse_poly
from .poly import CR_I, CRat, Poly, crat, rat
from .weyl_core import (
    END,
    SCALAR,
    VEC,
    GradedElement,
    KindError,
    as_cutoff,
    commutator_ad,
    fiber_mul,
    omega_upper_entry,
    scaled_ad,
)


class GeometryError(ValueError):
    """Scenario data violating a standing hypothesis."""


def _as_poly(value, nvars) -> Poly:
    if isinstance(value, Poly):
        if value.nvars != nvars:
            raise GeometryError("polynomial over wrong variable count")
        return value
    if isinstance(value, str):
        return parse_poly(value, nvars)
    return Poly.const(nvars, crat(value))


@dataclass(frozen=True)
class GeometryInput:
    """Validated-shape chart data; run validate() for the hypothesis checks.

    gamma[i][j][k] are the lowered Christoffel symbols (0-based tuples),
    conn[i] is the rank x rank connection matrix for the i-th coordinate,
    omega_series is a tuple of (order, 2n x 2n matrix) with order >= 1.
    """

    n: int
    rank: int
    gamma: tuple
    conn: tuple
    omega_series: tuple
    hermitian: bool = False

    @property
    def nvars(self) -> int:
        return 2 * self.n

    def canonical_text(self) -> str:
        lines = [
            "n = %d" % self.n,
            "rank = %d" % self.rank,
            "hermitian = %s" % ("true" if self.hermitian else "false"),
        ]
        d = self.nvars
        for i in range(d):
            for j in range(d):
                for k in range(d):
                    p = self.gamma[i][j][k]
                    if not p.is_zero():
                        lines.append(
                            'gamma[%d][%d][%d] = "%s"'
                            % (i + 1, j + 1, k + 1, p.canonical())
                        )
        for i in range(d):
            if any(not p.is_zero() for row in self.conn[i] for p in row):
                lines.append("conn[%d] = %s" % (i + 1, _matrix_text(self.conn[i])))
        for order, mat in self.omega_series:
            lines.append("omega[%d] = %s" % (order, _matrix_text(mat)))
        return "\n".join(lines)

    def digest(self) -> str:
        return hashlib.sha256(self.canonical_text().encode()).hexdigest()[:16]


def _matrix_text(mat) -> str:
    return "[%s]" % ", ".join(
        "[%s]" % ", ".join('"%s"' % p.canonical() for p in row) for row in mat
    )


def make_geometry(
    n: int,
    rank: int,
    gamma=None,
    conn=None,
    omega=None,
    hermitian: bool = False,
    symmetrize_gamma: bool = False,
) -> GeometryInput:
    """Assemble a GeometryInput from sparse 1-based entry maps.

    gamma: {(i, j, k): poly-like}; conn: {i: rank x rank matrix of
    poly-like}; omega: {order: 2n x 2n matrix}.  With symmetrize_gamma the
    given gamma entries are copied onto all index permutations (a
    convenience for building valid data; validation still checks the
    result).
    """
    d = 2 * n
    g = [[[Poly.zero(d) for _ in range(d)] for _ in range(d)] for _ in range(d)]
    for (i, j, k), val in (gamma or {}).items():
        p = _as_poly(val, d)
        if symmetrize_gamma:
            for a, b, c in {
                (i, j, k), (i, k, j), (j, i, k), (j, k, i), (k, i, j), (k, j, i)
            }:
                g[a - 1][b - 1][c - 1] = p
        else:
            g[i - 1][j - 1][k - 1] = p
    gamma_t = tuple(tuple(tuple(row) for row in plane) for plane in g)

    c = [
        [[Poly.zero(d) for _ in range(rank)] for _ in range(rank)]
        for _ in range(d)
    ]
    for i, mat in (conn or {}).items():
        if len(mat) != rank or any(len(row) != rank for row in mat):
            raise GeometryError("conn[%d] must be a %d x %d matrix" % (i, rank, rank))
        for a in range(rank):
            for b in range(rank):
                c[i - 1][a][b] = _as_poly(mat[a][b], d)
    conn_t = tuple(tuple(tuple(row) for row in mat) for mat in c)

    om = []
    for order in sorted((omega or {})):
        mat = omega[order]
        if len(mat) != d or any(len(row) != d for row in mat):
            raise GeometryError("omega[%d] must be a %d x %d matrix" % (order, d, d))
        om.append(
            (
                int(order),
                tuple(tuple(_as_poly(v, d) for v in row) for row in mat),
            )
        )
    return GeometryInput(n, rank, gamma_t, conn_t, tuple(om), hermitian)


# ---------------------------------------------------------------------------
# validation

@dataclass
class ValidationReport:
    ok: bool
    failures: list

    def __str__(self):
        if self.ok:
            return "geometry: ok"
        return "geometry: INVALID\n" + "\n".join("  - " + f for f in self.failures)


def validate(g: GeometryInput) -> ValidationReport:
    """Check the standing hypotheses: total symmetry of gamma, closed
    antisymmetric omega orders, anti-Hermitian connection in hermitian mode."""
    failures = []
    d = g.nvars
    for i in range(d):
        for j in range(d):
            for k in range(d):
                for (a, b, c) in ((i, k, j), (j, i, k)):
                    if g.gamma[i][j][k] != g.gamma[a][b][c]:
                        failures.append(
                            "gamma[%d][%d][%d] != gamma[%d][%d][%d]"
                            % (i + 1, j + 1, k + 1, a + 1, b + 1, c + 1)
                        )
    for order, mat in g.omega_series:
        if order < 1:
            failures.append("omega order %d must be >= 1" % order)
        for i in range(d):
            for j in range(d):
                if mat[i][j] != -mat[j][i]:
                    failures.append(
                        "omega[%d] not antisymmetric at (%d,%d)" % (order, i + 1, j + 1)
                    )
        for i in range(d):
            for j in range(i + 1, d):
                for k in range(j + 1, d):
                    dw = (
                        mat[j][k].diff(i + 1)
                        - mat[i][k].diff(j + 1)
                        + mat[i][j].diff(k + 1)
                    )
                    if not dw.is_zero():
                        failures.append(
                            "omega[%d] not closed at (%d,%d,%d)"
                            % (order, i + 1, j + 1, k + 1)
                        )
    if g.hermitian:
        for i in range(d):
            mat = g.conn[i]
            for a in range(g.rank):
                for b in range(g.rank):
                    if mat[b][a].conj() != -mat[a][b]:
                        failures.append(
                            "conn[%d] not anti-Hermitian at (%d,%d)"
                            % (i + 1, a + 1, b + 1)
                        )
    # dedupe, keep order
    seen = set()
    uniq = [f for f in failures if not (f in seen or seen.add(f))]
    return ValidationReport(not uniq, uniq)


def require_valid(g: GeometryInput):
    report = validate(g)
    if not report.ok:
        raise GeometryError(str(report))


# ---------------------------------------------------------------------------
# covariant derivatives

@lru_cache(maxsize=32)
def _gamma_up(g: GeometryInput):
    """Raised Christoffels Gamma^k_{ij} = omega^{kl} Gamma_{lij}, 0-based [k][i][j]."""
    d = g.nvars
    out = []
    for k in range(d):
        plane = []
        for i in range(d):
            row = []
            for j in range(d):
                acc = Poly.zero(d)
                for l in range(d):
                    w = omega_upper_entry(g.n, k + 1, l + 1)
                    if w:
                        acc = acc + g.gamma[l][i][j].scale(CRat(w))
                row.append(acc)
            plane.append(tuple(row))
        out.append(tuple(plane))
    return tuple(out)


@lru_cache(maxsize=32)
def _conn_elements(g: GeometryInput):
    """conn matrices as constant endomorphism values, indexed 0-based by i."""
    return tuple(g.conn[i] for i in range(g.nvars))


def cov_derivative(g: GeometryInput, a: GradedElement) -> GradedElement:
    """The covariant derivative, dispatched on the fiber kind of `a`:
    scalar elements get the symplectic connection only, endomorphism
    elements add the commutator with the connection matrices, section
    elements add their left action."""
    d = g.nvars
    gup = _gamma_up(g)
    out = GradedElement.zero(a.n, a.rank, a.kind, a.trunc)
    for i in range(1, d + 1):
        term = a.diff_coeffs(i)
        for k in range(1, d + 1):
            ins = a.insert_sym(k)
            if ins.is_zero():
                continue
            for j in range(1, d + 1):
                G = gup[k - 1][i - 1][j - 1]
                if G.is_zero():
                    continue
                term = term - ins.mul_sym_gen(j).scale_poly(G)
        if a.kind == END:
            Ai = g.conn[i - 1]
            if any(not p.is_zero() for row in Ai for p in row):
                left = a.map_values(lambda v, M=Ai: fiber_mul(END, M, END, v))
                right = a.map_values(lambda v, M=Ai: fiber_mul(END, v, END, M))
                term = term + left - right
        elif a.kind == VEC:
            Ai = g.conn[i - 1]
            if any(not p.is_zero() for row in Ai for p in row):
                term = term + a.map_values(lambda v, M=Ai: fiber_mul(END, M, VEC, v))
        out = out + term.mul_asym_gen(i)
    return out


def cov_D(g: GeometryInput, a: GradedElement) -> GradedElement:
    if a.kind != SCALAR:
        raise KindError("cov_D expects a scalar-valued element")
    return cov_derivative(g, a)


def cov_D_end(g: GeometryInput, a: GradedElement) -> GradedElement:
    if a.kind != END:
        raise KindError("cov_D_end expects an endomorphism-valued element")
    return cov_derivative(g, a)


def cov_D_E(g: GeometryInput, psi: GradedElement) -> GradedElement:
    if psi.kind != VEC:
        raise KindError("cov_D_E expects a section-valued element")
    return cov_derivative(g, psi)


# ---------------------------------------------------------------------------
# curvatures

@dataclass(frozen=True)
class CurvaturePair:
    R: GradedElement
    RE: GradedElement


def _curvature_components(g: GeometryInput):
    """R^m_{kij} (0-based [m][k][i][j]) of the symplectic connection."""
    d = g.nvars
    gup = _gamma_up(g)
    R = [
        [[[Poly.zero(d) for _ in range(d)] for _ in range(d)] for _ in range(d)]
        for _ in range(d)
    ]
    for m in range(d):
        for k in range(d):
            for i in range(d):
                for j in range(i + 1, d):
                    val = gup[m][j][k].diff(i + 1) - gup[m][i][k].diff(j + 1)
                    for p in range(d):
                        val = val + gup[m][i][p] * gup[p][j][k]
                        val = val - gup[m][j][p] * gup[p][i][k]
                    R[m][k][i][j] = val
                    R[m][k][j][i] = -val
    return R


def curvatures(g: GeometryInput, trunc) -> CurvaturePair:
    """The curvature elements: R with symmetric degree 2 (both indices
    lowered with the symplectic form, a quarter per ordered index pair),
    and the bundle curvature as a wedge 2-form of endomorphisms."""
    trunc = as_cutoff(trunc)
    d = g.nvars
    Rc = _curvature_components(g)
    quarter = CRat(rat(1, 4))
    terms = []
    for l in range(d):
        for m in range(d):
            w = -1 if l + 1 == (m + 1) + g.n else (1 if m + 1 == (l + 1) + g.n else 0)
            if not w:
                continue
            for k in range(d):
                for i in range(d):
                    for j in range(d):
                        if i == j:
                            continue
                        p = Rc[m][k][i][j]
                        if p.is_zero():
                            continue
                        coeff = quarter if w > 0 else -quarter
                        terms.append(
                            (0, (l + 1, k + 1), (i + 1, j + 1), p.scale(coeff))
                        )
    R_el = GradedElement.from_terms(g.n, g.rank, SCALAR, trunc, terms)

    half = CRat(rat(1, 2))
    re_terms = []
    for i in range(d):
        for j in range(d):
            if i == j:
                continue
            mat = _re_matrix(g, i, j)
            if all(p.is_zero() for row in mat for p in row):
                continue
            scaled = tuple(tuple(p.scale(half) for p in row) for row in mat)
            re_terms.append((0, (), (i + 1, j + 1), scaled))
    RE_el = GradedElement.from_terms(g.n, g.rank, END, trunc, re_terms)
    return CurvaturePair(R_el, RE_el)


def _re_matrix(g: GeometryInput, i: int, j: int):
    """R^E_{ij} = d_i A_j - d_j A_i + [A_i, A_j], 0-based i, j."""
    d = g.nvars
    Ai, Aj = g.conn[i], g.conn[j]
    r = g.rank
    out = []
    for a in range(r):
        row = []
        for b in range(r):
            val = Aj[a][b].diff(i + 1) - Ai[a][b].diff(j + 1)
            for c in range(r):
                val = val + Ai[a][c] * Aj[c][b] - Aj[a][c] * Ai[c][b]
            row.append(val)
        out.append(tuple(row))
    return tuple(out)


def omega_series_element(g: GeometryInput, trunc) -> GradedElement:
    """The formal two-form series as a graded element (order m at lam^m)."""
    trunc = as_cutoff(trunc)
    terms = []
    for order, mat in g.omega_series:
        for i in range(g.nvars):
            for j in range(i + 1, g.nvars):
                p = mat[i][j]
                if not p.is_zero():
                    terms.append((order, (), (i + 1, j + 1), p))
    return GradedElement.from_terms(g.n, g.rank, SCALAR, trunc, terms)


# ---------------------------------------------------------------------------
# identity suite

@dataclass
class IdentityRecord:
    name: str
    trials: int
    ok: bool
    witness: str = ""


def _super_anticommute(op1, op2, a):
    return op1(op2(a)) + op2(op1(a))


def verify_geometry_identities(g: GeometryInput, trunc, samples) -> list:
    """Check the covariant-calculus identities on the given sample elements.

    samples: dict with keys "scalar", "end", "vec" mapping to lists of
    GradedElements at the same cutoff.  All checks are exact; failures
    carry the canonical text of a witness.  Samples should keep total
    degree at least two below the cutoff so no product truncates.
    """
    require_valid(g)
    trunc = as_cutoff(trunc)
    pair = curvatures(g, trunc)
    R, RE = pair.R, pair.RE
    R_end = R.embed_end(g.rank)
    records = []

    def check(name, inputs, fn):
        for x in inputs:
            res = fn(x)
            if not res.is_zero():
                records.append(
                    IdentityRecord(
                        name,
                        len(inputs),
                        False,
                        witness=x.canonical_text(),
                    )
                )
                return
        records.append(IdentityRecord(name, len(inputs), True))

    D = lambda x: cov_derivative(g, x)
    delta = lambda x: x.delta()

    scalars = samples.get(SCALAR, [])
    ends = samples.get(END, [])
    vecs = samples.get(VEC, [])

    check("delta D anticommute (scalar)", scalars, lambda x: _super_anticommute(delta, D, x))
    check("delta D anticommute (end)", ends, lambda x: _super_anticommute(delta, D, x))
    check("delta D anticommute (vec)", vecs, lambda x: _super_anticommute(delta, D, x))

    check("D squared = inner curvature (scalar)", scalars, lambda x: D(D(x)) - scaled_ad(R, x))
    check(
        "D squared = inner curvature (end)",
        ends,
        lambda x: D(D(x)) - scaled_ad(R_end - RE.shift_lambda(1).times_i(), x),
    )
    check(
        "D squared = inner curvature + left curvature (vec)",
        vecs,
        lambda x: D(D(x)) - scaled_ad(R, x) - RE.weyl_mul(x),
    )

    zero_checks = [
        ("bianchi: delta R = 0", R.delta()),
        ("bianchi: D R = 0", cov_D(g, R)),
        ("bianchi: delta RE = 0", RE.delta()),
        ("bianchi: D RE = 0", cov_D_end(g, RE)),
    ]
    for name, value in zero_checks:
        records.append(
            IdentityRecord(name, 1, value.is_zero(), witness="" if value.is_zero() else value.canonical_text())
        )

    def leibniz(x, y):
        x_even, x_odd = x.split_asym_parity()
        lhs = D(x.weyl_mul(y))
        rhs = D(x).weyl_mul(y) + x_even.weyl_mul(D(y)) - x_odd.weyl_mul(D(y))
        return lhs - rhs

    pairs_scalar = list(zip(scalars, scalars[1:] + scalars[:1]))
    check("D derivation of product (scalar)", pairs_scalar, lambda p: leibniz(*p))
    pairs_end = list(zip(ends, ends[1:] + ends[:1]))
    check("D derivation of product (end)", pairs_end, lambda p: leibniz(*p))
    pairs_left = list(zip(ends, vecs + vecs[:1]))
    check("module derivation (end acting on vec)", pairs_left, lambda p: leibniz(*p))
    pairs_right = list(zip(vecs, scalars + scalars[:1]))
    check("module derivation (vec acted by scalar)", pairs_right, lambda p: leibniz(*p))
    return records
