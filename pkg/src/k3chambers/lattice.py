"""Integral lattices with exact Gram matrices: duals, complements, saturation,
discriminant forms, gluing, reflections and isometries.

Vectors are rows of rationals in the lattice basis; isometries act on rows
from the right, so composition g*h means "apply g, then h".
"""

from __future__ import annotations

from dataclasses import dataclass, field
from fractions import Fraction

from . import linalg as la


class LatticeError(ValueError):
    pass


@dataclass(frozen=True)
class IntegralLattice:
    gram: tuple  # rank x rank, symmetric, integer entries, nonzero determinant

    def __post_init__(self):
        G = la.mat(self.gram)
        object.__setattr__(self, "gram", G)
        n = len(G)
        if any(len(row) != n for row in G):
            raise LatticeError("gram matrix must be square")
        if not la.is_integral_mat(G):
            raise LatticeError("gram matrix must be integral")
        for i in range(n):
            for j in range(i):
                if G[i][j] != G[j][i]:
                    raise LatticeError("gram matrix must be symmetric")

    @property
    def rank(self):
        return len(self.gram)

    def pairing(self, u, v):
        return la.gram_pairing(self.gram, u, v)

    def norm(self, v):
        return self.pairing(v, v)

    def det(self):
        return la.det(self.gram)

    def is_even(self):
        return all(self.gram[i][i] % 2 == 0 for i in range(self.rank))

    def basis_vector(self, i):
        return tuple(Fraction(1 if j == i else 0) for j in range(self.rank))

    def contains(self, v):
        return la.is_integral_vec(v)

    def in_dual(self, v):
        """Membership in the dual lattice: integral pairing with every basis vector."""
        return la.is_integral_vec(la.vec_mat(v, self.gram))

    def pairing_coords(self, v):
        """Integer coordinates of a dual vector: its pairings with the basis."""
        p = la.vec_mat(v, self.gram)
        if not la.is_integral_vec(p):
            raise LatticeError("vector is not in the dual lattice")
        return la.int_vec(p)

    def from_pairings(self, pairings):
        """The rational vector v with <v, b_i> = pairings[i]."""
        return la.solve_right(self.gram, la.vec(pairings))


def signature(L: IntegralLattice):
    """Exact inertia (positive, negative) by rational symmetric elimination."""
    if la.det(L.gram) == 0:
        raise LatticeError("degenerate gram matrix")
    G = [[Fraction(x) for x in row] for row in L.gram]
    n = len(G)
    pos = neg = 0
    k = 0
    while k < n:
        piv = next((i for i in range(k, n) if G[i][i] != 0), None)
        if piv is None:
            # mix basis vectors to create a diagonal pivot (congruence transform)
            i, j = next(
                (i, j)
                for i in range(k, n)
                for j in range(i + 1, n)
                if G[i][j] != 0
            )
            sgn = 1 if 2 * G[i][j] + G[j][j] != 0 else -1
            for c in range(n):
                G[i][c] += sgn * G[j][c]
            for r in range(n):
                G[r][i] += sgn * G[r][j]
            piv = i
        if piv != k:
            G[k], G[piv] = G[piv], G[k]
            for row in G:
                row[k], row[piv] = row[piv], row[k]
        d = G[k][k]
        if d > 0:
            pos += 1
        else:
            neg += 1
        for i in range(k + 1, n):
            if G[i][k]:
                f = G[i][k] / d
                for c in range(k, n):
                    G[i][c] -= f * G[k][c]
                for r in range(k, n):
                    G[r][i] -= f * G[r][k]
        k += 1
    return pos, neg


def is_negative_definite(L: IntegralLattice):
    p, n = signature(L)
    return p == 0 and n == L.rank


def is_hyperbolic(L: IntegralLattice):
    p, n = signature(L)
    return p == 1 and n == L.rank - 1


def dual_basis(L: IntegralLattice):
    """Rows of the inverse Gram: row i pairs to delta_ij with basis vector j."""
    return la.inverse(L.gram)


def sublattice(L: IntegralLattice, rows):
    """Lattice structure on the integer span of independent integral rows."""
    rows = la.mat(rows)
    if la.rank(rows) != len(rows):
        raise LatticeError("dependent generators")
    G = tuple(tuple(L.pairing(u, v) for v in rows) for u in rows)
    return IntegralLattice(G), rows


def saturation(L: IntegralLattice, rows):
    """Basis of (span_Q(rows) intersect L); equals input span iff primitive."""
    rows = la.mat(rows)
    if not rows:
        return ()
    if la.rank(rows) != len(rows):
        raise LatticeError("dependent generators")
    if not la.is_integral_mat(rows):
        raise LatticeError("generators must lie in the lattice")
    n = L.rank
    # x is in the saturation iff x is integral and lies in the rational row span,
    # i.e. x annihilates every functional vanishing on the span.
    N = la.rational_nullspace(rows, n)
    if not N:
        return la.mat(la.identity(n))
    N_int = [la.primitive_int_vector(nu) for nu in N]
    ker = la.integer_kernel(la.transpose(la.mat(N_int)))
    return la.mat(ker)


def orthogonal_complement(L: IntegralLattice, rows):
    """Primitive sublattice {x in L : <x, s> = 0 for all s in rows} with its basis."""
    rows = la.mat(rows)
    sat = saturation(L, rows)
    if not _same_span_and_index(rows, sat):
        raise LatticeError("sublattice is not saturated; saturate first")
    funcs = [la.int_vec(la.vec_mat(r, L.gram)) for r in rows]
    ker = la.integer_kernel(la.transpose(la.mat(funcs)))
    basis = la.mat(ker)
    G = tuple(tuple(L.pairing(u, v) for v in basis) for u in basis)
    return IntegralLattice(G), basis


def _same_span_and_index(rows, sat):
    if len(rows) != len(sat):
        return False
    # rows = C @ sat with C integral and |det C| = 1
    sol = []
    for r in rows:
        c = la.solve_linear_system(la.transpose(la.mat(sat)), r)
        if c is None:
            return False
        sol.append(c)
    C = la.mat(sol)
    return la.is_integral_mat(C) and abs(la.det(C)) == 1


# ---------------------------------------------------------------------------
# Isometries
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class Isometry:
    lattice: IntegralLattice
    matrix: tuple  # rows = images of basis vectors; acts on rows from the right

    def __post_init__(self):
        M = la.mat(self.matrix)
        object.__setattr__(self, "matrix", M)
        G = self.lattice.gram
        if la.mat_mul(la.mat_mul(M, G), la.transpose(M)) != G:
            raise LatticeError("matrix does not preserve the pairing")
        if not la.is_integral_mat(M):
            raise LatticeError("isometry must map the lattice into itself")

    def apply(self, v):
        return la.vec_mat(la.vec(v), self.matrix)

    def __mul__(self, other):
        """self * other = apply self, then other (right action composition)."""
        return Isometry(self.lattice, la.mat_mul(self.matrix, other.matrix))

    def inverse(self):
        return Isometry(self.lattice, la.inverse(self.matrix))

    def is_identity(self):
        return self.matrix == la.identity(self.lattice.rank)

    def order(self, cap=64):
        g = self
        for k in range(1, cap + 1):
            if g.is_identity():
                return k
            g = g * self
        return None


def identity_isometry(L: IntegralLattice):
    return Isometry(L, la.identity(L.rank))


def weyl_reflection(L: IntegralLattice, r):
    """s_r : x -> x + <x, r> r for a (-2)-vector r in L."""
    r = la.vec(r)
    if not L.contains(r):
        raise LatticeError("reflection vector must lie in the lattice")
    if L.norm(r) != -2:
        raise LatticeError("reflection vector must have self-pairing -2")
    n = L.rank
    rows = []
    for i in range(n):
        e = L.basis_vector(i)
        rows.append(la.add(e, la.scale(r, L.pairing(e, r))))
    return Isometry(L, rows)


# ---------------------------------------------------------------------------
# Discriminant forms
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class DiscriminantForm:
    lattice: IntegralLattice
    orders: tuple          # invariant factors > 1, ascending divisibility
    generators: tuple      # dual vectors (rational rows in the lattice basis)
    # derived tables
    q_values: tuple = field(default=None)
    bilinear: tuple = field(default=None)

    def __post_init__(self):
        qs = tuple(_mod2(self.lattice.norm(g)) for g in self.generators)
        bil = tuple(
            tuple(_mod1(self.lattice.pairing(g, h)) for h in self.generators)
            for g in self.generators
        )
        object.__setattr__(self, "q_values", qs)
        object.__setattr__(self, "bilinear", bil)

    @property
    def order(self):
        o = 1
        for d in self.orders:
            o *= d
        return o

    def elements(self):
        """All group elements as coefficient tuples."""
        import itertools

        return itertools.product(*(range(d) for d in self.orders))

    def rep(self, coeffs):
        """A dual-vector representative of the element with the given coefficients."""
        v = la.zeros(self.lattice.rank)
        for c, g in zip(coeffs, self.generators):
            v = la.add(v, la.scale(g, c))
        return v

    def q(self, coeffs):
        return _mod2(self.lattice.norm(self.rep(coeffs)))

    def b(self, c1, c2):
        return _mod1(self.lattice.pairing(self.rep(c1), self.rep(c2)))

    def coords_of(self, v):
        """Coefficients (mod orders) of a dual vector v in the generator basis."""
        rows = list(self.generators) + [self.lattice.basis_vector(i) for i in range(self.lattice.rank)]
        sol = la.integral_solve(rows, la.vec(v))
        if sol is None:
            raise LatticeError("vector not in the dual lattice")
        coeffs = sol[: len(self.generators)]
        return tuple(int(c) % d for c, d in zip(coeffs, self.orders))


def _mod2(x):
    x = Fraction(x)
    num = x.numerator % (2 * x.denominator)
    return Fraction(num, x.denominator)


def _mod1(x):
    x = Fraction(x)
    return Fraction(x.numerator % x.denominator, x.denominator)


def discriminant_form(L: IntegralLattice):
    """Invariant-factor generators of A(L) = L^dual / L with q-values, for even L."""
    if not L.is_even():
        raise LatticeError("discriminant form requires an even lattice (q is mod 2Z)")
    n = L.rank
    G_int = la.int_mat(L.gram)
    U, S, V = la.smith_normal_form(G_int)
    # Identify L^dual with Z^n via y -> y @ G^{-1}; then L corresponds to the row
    # span Z^n @ G and A(L) = Z^n / (Z^n @ G).  With U G V = S the quotient is
    # presented by S in the coordinates u = y @ V, so the generator of the factor
    # Z/s_i is row i of V^{-1} back in y-coordinates.
    Vinv = la.inverse(la.mat(V))
    Ginv = la.inverse(L.gram)
    gen_vecs = []
    orders = []
    for i in range(n):
        d = S[i][i]
        if d > 1:
            gen_vecs.append(la.vec_mat(Vinv[i], Ginv))
            orders.append(d)
    form = DiscriminantForm(lattice=L, orders=tuple(orders), generators=tuple(gen_vecs))
    expected = abs(la.det(L.gram))
    if form.order != expected:
        raise LatticeError("internal error: |A(L)| != |det gram|")
    return form


def disc_action(form: DiscriminantForm, g: Isometry):
    """Images of the discriminant generators under g, as coefficient tuples."""
    return tuple(form.coords_of(g.apply(gen)) for gen in form.generators)


def is_pm_one_on_disc(form: DiscriminantForm, g: Isometry):
    """True iff g acts as +id or -id on A(L); avoids full coordinate solves."""
    L = form.lattice
    plus = all(L.contains(la.sub(g.apply(gen), gen)) for gen in form.generators)
    if plus:
        return True
    return all(L.contains(la.add(g.apply(gen), gen)) for gen in form.generators)


# ---------------------------------------------------------------------------
# Gluing
# ---------------------------------------------------------------------------

def _q_of_coeffs(form: DiscriminantForm, coeffs):
    """q of a coefficient combination from the stored generator tables."""
    total = Fraction(0)
    gens = len(form.orders)
    for i in range(gens):
        ci = coeffs[i]
        if not ci:
            continue
        total += ci * ci * form.q_values[i]
        for j in range(i + 1, gens):
            if coeffs[j]:
                total += 2 * ci * coeffs[j] * form.bilinear[i][j]
    return _mod2(total)


def _b_of_coeffs(form: DiscriminantForm, c1, c2):
    total = Fraction(0)
    gens = len(form.orders)
    for i in range(gens):
        if not c1[i]:
            continue
        for j in range(gens):
            if c2[j]:
                total += c1[i] * c2[j] * form.bilinear[i][j]
    return _mod1(total)


def _coeff_span(orders, tuples):
    """Subgroup of the coefficient group generated by the tuples."""
    seen = {tuple(0 for _ in orders)}
    frontier = list(seen)
    while frontier:
        base = frontier.pop()
        for t in tuples:
            nxt = tuple((a + b) % d for a, b, d in zip(base, t, orders))
            if nxt not in seen:
                seen.add(nxt)
                frontier.append(nxt)
    return seen


@dataclass(frozen=True)
class GlueMap:
    source: DiscriminantForm
    target: DiscriminantForm
    images: tuple  # images[i] = coefficient tuple in target of source generator i

    def is_anti_isometry(self):
        fs, ft = self.source, self.target
        if fs.orders != ft.orders:
            return False
        for i in range(len(fs.generators)):
            if _q_of_coeffs(ft, self.images[i]) != _mod2(-fs.q_values[i]):
                return False
            order_scaled = tuple(
                (fs.orders[i] * c) % d for c, d in zip(self.images[i], ft.orders)
            )
            if any(order_scaled):
                return False  # image order does not divide the generator order
            for j in range(i, len(fs.generators)):
                if _b_of_coeffs(ft, self.images[i], self.images[j]) != _mod1(-fs.bilinear[i][j]):
                    return False
        return len(_coeff_span(ft.orders, self.images)) == fs.order


def form_isometry_search(qM: DiscriminantForm, qN: DiscriminantForm):
    """One isomorphism of finite quadratic forms q(M) ~ q(N), or None."""
    return _finite_form_search(qM, qN, Fraction(1))


def anti_isometry_search(qM: DiscriminantForm, qN: DiscriminantForm):
    """One anti-isometry q(M) ~ -q(N) by backtracking, or None.

    Generators are matched in decreasing-order to prune early; q-values, bilinear
    values, and element orders constrain candidate images; the surviving map is
    validated in coefficient space.
    """
    return _finite_form_search(qM, qN, Fraction(-1))


def _finite_form_search(qM, qN, sign):
    if qM.orders != qN.orders:
        return None
    k = len(qM.orders)
    perm = sorted(range(k), key=lambda i: -qM.orders[i])
    targets = {}
    for coeffs in qN.elements():
        o = _element_order(coeffs, qN.orders)
        targets.setdefault(o, []).append(coeffs)
    chosen = {}

    def ok(i, cand):
        if _q_of_coeffs(qN, cand) != _mod2(sign * qM.q_values[i]):
            return False
        for j, prev in chosen.items():
            if _b_of_coeffs(qN, cand, prev) != _mod1(sign * qM.bilinear[i][j]):
                return False
        return True

    def full_check(gm):
        if sign < 0:
            return gm.is_anti_isometry()
        # isometry variant: value/bilinear checks plus surjectivity
        fs, ft = gm.source, gm.target
        for i in range(k):
            if _q_of_coeffs(ft, gm.images[i]) != _mod2(fs.q_values[i]):
                return False
            for j in range(i, k):
                if _b_of_coeffs(ft, gm.images[i], gm.images[j]) != _mod1(fs.bilinear[i][j]):
                    return False
        return len(_coeff_span(ft.orders, gm.images)) == fs.order

    def extend(pos):
        if pos == k:
            gm = GlueMap(qM, qN, tuple(chosen[i] for i in range(k)))
            return gm if full_check(gm) else None
        i = perm[pos]
        for cand in targets.get(qM.orders[i], ()):
            if ok(i, cand):
                chosen[i] = cand
                res = extend(pos + 1)
                if res is not None:
                    return res
                del chosen[i]
        return None

    return extend(0)


def _element_order(coeffs, orders):
    from math import gcd, lcm

    o = 1
    for c, d in zip(coeffs, orders):
        if c % d:
            o = lcm(o, d // gcd(c, d))
    return o


def overlattice_from_glue(M: IntegralLattice, N: IntegralLattice, glue: GlueMap):
    """Even overlattice of M + N generated by the graph of the glue map.

    Returns (L, embed_M, embed_N): embed rows give the images of the M/N bases
    in the new basis of L.
    """
    if glue.source.lattice is not M and glue.source.lattice.gram != M.gram:
        raise LatticeError("glue source mismatch")
    if not glue.is_anti_isometry():
        raise LatticeError("glue map is not an anti-isometry of discriminant forms")
    m, n = M.rank, N.rank
    gens = []
    for i in range(m):
        gens.append(tuple(M.basis_vector(i)) + la.zeros(n))
    for i in range(n):
        gens.append(la.zeros(m) + tuple(N.basis_vector(i)))
    for i, gen in enumerate(glue.source.generators):
        img = glue.target.rep(glue.images[i])
        gens.append(tuple(gen) + tuple(img))
    # integral basis of the subgroup of (1/d)Z^{m+n} generated by gens
    from math import gcd

    den = 1
    for g in gens:
        for e in g:
            d = Fraction(e).denominator
            den = den * d // gcd(den, d)
    scaled = [tuple(int(Fraction(e) * den) for e in g) for g in gens]
    basis_scaled = la.hnf_row_basis(scaled)
    basis = [tuple(Fraction(e, den) for e in row) for row in basis_scaled]
    if len(basis) != m + n:
        raise LatticeError("glue generators do not span full rank")
    big_gram = [[Fraction(0)] * (m + n) for _ in range(m + n)]
    for i in range(m):
        for j in range(m):
            big_gram[i][j] = M.gram[i][j]
    for i in range(n):
        for j in range(n):
            big_gram[m + i][m + j] = N.gram[i][j]
    G = la.mat(big_gram)
    new_gram = tuple(
        tuple(la.dot(la.vec_mat(u, G), v) for v in basis) for u in basis
    )
    if not la.is_integral_mat(new_gram):
        raise LatticeError("glued lattice is not integral (glue not isotropic)")
    L = IntegralLattice(new_gram)
    if not L.is_even():
        raise LatticeError("glued lattice is not even")
    # rows of embed: coordinates in the L-basis of the original M/N basis vectors
    Tinv = la.inverse(la.mat(basis))
    embed_M = la.mat([la.vec_mat(tuple(M.basis_vector(i)) + la.zeros(n), Tinv) for i in range(m)])
    embed_N = la.mat([la.vec_mat(la.zeros(m) + tuple(N.basis_vector(i)), Tinv) for i in range(n)])
    if not la.is_integral_mat(embed_M) or not la.is_integral_mat(embed_N):
        raise LatticeError("internal error: summands do not embed integrally")
    return L, embed_M, embed_N
