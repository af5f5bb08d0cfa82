"""Finite exact enumeration in definite shells and hyperbolic slices.

The core is an exact Fincke-Pohst depth-first search on a rational LDL^T
decomposition; interval bounds use exact integer square roots, so emptiness
results are certified facts, not numerics.
"""

from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction
from math import gcd

from . import linalg as la
from .lattice import IntegralLattice, LatticeError


class EnumerationError(ValueError):
    pass


class ShellSolver:
    """Enumerator for a fixed positive-definite exact quadratic form.

    Solves Q(x + offset) = t (or in a window) over integer rows x; offset varies
    per call, the LDL^T data is computed once.
    """

    def __init__(self, gram):
        G = la.mat(gram)
        n = len(G)
        q = [[Fraction(e) for e in row] for row in G]
        for i in range(n):
            if q[i][i] <= 0:
                raise EnumerationError("form is not positive definite")
            for j in range(i + 1, n):
                q[j][i] = q[i][j]          # save the undivided symmetric entry
                q[i][j] = q[i][j] / q[i][i]
            for k in range(i + 1, n):
                for l in range(k, n):
                    q[k][l] = q[k][l] - q[k][i] * q[i][l]
        self.n = n
        self.d = tuple(q[i][i] for i in range(n))
        self.l = tuple(tuple(q[i][j] for j in range(n)) for i in range(n))
        self.gram = G

    def solve(self, target, offset=None, lo=None, constraints=()):
        """All integer x with Q(x + offset) == target, or lo <= Q <= target if lo given.

        constraints: tuples (coefs, const, low, high); low <= dot(coefs, x) + const <= high
        is enforced (None bound = unbounded).  Each constraint is checked as soon as
        all its coordinates are settled (the search fixes x[n-1] first).
        """
        n = self.n
        if n == 0:
            val = Fraction(0)
            ok = (lo is None and val == target) or (lo is not None and lo <= val <= target)
            return [()] if ok and not constraints else ([()] if ok else [])
        off = tuple(Fraction(e) for e in offset) if offset is not None else (Fraction(0),) * n
        target = Fraction(target)
        if lo is not None:
            lo = Fraction(lo)
        d, lmat = self.d, self.l
        # constraint bookkeeping: fire at the smallest index with nonzero coefficient
        by_level = [[] for _ in range(n)]
        for coefs, const, low, high in constraints:
            coefs = la.vec(coefs)
            support = [i for i in range(n) if coefs[i] != 0]
            if not support:
                val = Fraction(const)
                if (low is not None and val < low) or (high is not None and val > high):
                    return []
                continue
            by_level[min(support)].append((coefs, Fraction(const), low, high))
        results = []
        x = [0] * n
        y = [Fraction(0)] * n  # y_i = x_i + off_i

        def descend(i, budget):
            # budget = target - sum of completed terms (levels > i)
            u = Fraction(0)
            li = lmat[i]
            for j in range(i + 1, n):
                if li[j]:
                    u += li[j] * y[j]
            di = d[i]
            rad = budget / di
            center = -u - off[i]
            xi_lo = la.ceil_minus_sqrt(center, rad)
            xi_hi = la.floor_plus_sqrt(center, rad)
            for xi in range(xi_lo, xi_hi + 1):
                x[i] = xi
                y[i] = xi + off[i]
                term = di * (y[i] + u) ** 2
                rem = budget - term
                if rem < 0:
                    continue
                ok = True
                for coefs, const, low, high in by_level[i]:
                    val = const
                    for k in range(i, n):
                        if coefs[k]:
                            val += coefs[k] * x[k]
                    if (low is not None and val < low) or (high is not None and val > high):
                        ok = False
                        break
                if not ok:
                    continue
                if i == 0:
                    used = target - rem
                    if lo is None:
                        if rem == 0:
                            results.append(tuple(x))
                    else:
                        if used >= lo:
                            results.append(tuple(x))
                else:
                    descend(i - 1, rem)

        descend(n - 1, target)
        results.sort()
        return results


@dataclass(frozen=True)
class ShellQuery:
    """Norm-shell query: vectors of prescribed norm with exact pairing constraints.

    constraints: tuples (vector, value) for equalities or (vector, (low, high)) for
    pairing windows (None = unbounded end).
    """

    lattice: IntegralLattice
    norm: Fraction
    constraints: tuple = ()
    base_point: tuple = None  # enumerate in base_point + L instead of L


def _split_constraints(query):
    eqs, windows = [], []
    for v, spec in query.constraints:
        if isinstance(spec, tuple):
            windows.append((la.vec(v), spec[0], spec[1]))
        else:
            eqs.append((la.vec(v), Fraction(spec)))
    return eqs, windows


def affine_shell(L, particular, kernel_basis, norm, windows=(), norm_lo=None):
    """Vectors particular + sum c_i kernel_basis[i] (c integral) of the given norm.

    windows: (vector, low, high) pairing windows.  Returns full coordinate rows.
    Requires the restriction of the form to the kernel to be negative definite.
    """
    k = len(kernel_basis)
    if k == 0:
        val = L.norm(particular)
        ok = val == norm if norm_lo is None else (norm_lo <= val <= norm)
        if ok:
            for v, low, high in windows:
                p = L.pairing(particular, v)
                if (low is not None and p < low) or (high is not None and p > high):
                    return []
            return [la.vec(particular)]
        return []
    GK = tuple(tuple(L.pairing(u, v) for v in kernel_basis) for u in kernel_basis)
    neg = tuple(tuple(-e for e in row) for row in GK)
    try:
        solver = ShellSolver(neg)
    except EnumerationError:
        raise EnumerationError(
            "infinite family: quadratic form on the constraint subspace is not negative definite"
        )
    return _affine_shell_with_solver(L, solver, particular, kernel_basis, norm, windows, norm_lo)


def _affine_shell_with_solver(L, solver, particular, kernel_basis, norm, windows=(), norm_lo=None):
    p = la.vec(particular)
    GK = tuple(tuple(-e for e in row) for row in solver.gram)  # original (negative) gram
    pair_pk = tuple(L.pairing(p, kb) for kb in kernel_basis)
    GK_inv = la.inverse(GK)
    offset = la.vec_mat(pair_pk, GK_inv)
    p_perp_norm = L.norm(p) - la.dot(offset, la.vec_mat(offset, GK))
    # <p + sum c_i k_i, same> = p_perp_norm + Q_K(c + offset); want == norm
    target = Fraction(norm) - p_perp_norm
    lo = None if norm_lo is None else Fraction(norm_lo) - p_perp_norm
    # negate for the positive-definite solver: Q_pos = -Q_K
    pos_target = -target if lo is None else -lo
    pos_lo = None if lo is None else -Fraction(norm) + p_perp_norm
    if pos_target < 0:
        return []
    cons = []
    for v, low, high in windows:
        coefs = tuple(L.pairing(kb, v) for kb in kernel_basis)
        const = L.pairing(p, v)
        cons.append((coefs, const, low, high))
    sols = solver.solve(pos_target, offset=offset, lo=pos_lo, constraints=cons)
    out = []
    for c in sols:
        vvec = p
        for ci, kb in zip(c, kernel_basis):
            if ci:
                vvec = la.add(vvec, la.scale(kb, ci))
        out.append(vvec)
    out.sort()
    return out


def short_vectors(query: ShellQuery):
    """Complete duplicate-free list of solutions, lexicographically ordered."""
    L = query.lattice
    n = L.rank
    eqs, windows = _split_constraints(query)
    base = la.vec(query.base_point) if query.base_point is not None else la.zeros(n)
    if eqs:
        funcs = [la.vec_mat(v, L.gram) for v, _t in eqs]
        targets = [t - L.pairing(base, v) for v, t in eqs]
        aff = la.integral_affine_solutions(funcs, targets)
        if aff is None:
            return []
        part, kernel = aff
        particular = la.add(base, part)
    else:
        particular = base
        kernel = la.identity(n)
    return affine_shell(L, particular, kernel, query.norm, windows)


def roots(L: IntegralLattice):
    """All (-2)-vectors of an even negative-definite lattice."""
    if not L.is_even():
        raise EnumerationError("roots are defined for even lattices")
    if L.rank == 0:
        return []
    pos, neg = _signature(L)
    if pos != 0:
        raise EnumerationError("lattice is not negative definite")
    return short_vectors(ShellQuery(L, Fraction(-2)))


def _signature(L):
    from .lattice import signature

    return signature(L)


def sep(L: IntegralLattice, v1, v2):
    """Separating (-2)-vectors: <r,v1> > 0, <r,v2> < 0, <r,r> = -2.

    v1, v2: rational positive-norm vectors in the same positive cone.
    """
    v1, v2 = la.vec(v1), la.vec(v2)
    if v1 == v2:
        return []
    n11, n22, n12 = L.norm(v1), L.norm(v2), L.pairing(v1, v2)
    if n11 <= 0 or n22 <= 0:
        raise EnumerationError("sep requires positive-norm vectors")
    if n12 <= 0:
        raise EnumerationError("sep requires vectors in the same positive cone")
    finder = SepFinder(L, v1, v2)
    out = list(finder.iterate())
    out.sort()
    return out


class SepFinder:
    """Shared machinery for separating-root searches between two cone points.

    Decomposes candidates over the plane P spanned by the two points: the pair of
    pairings (c1, c2) = (<r,w1>, <r,w2>) determines the P-part, whose norm must lie
    in [-2, 0); each admissible pair leaves a definite residual shell.
    """

    def __init__(self, L, v1, v2):
        self.L = L
        s1 = _common_denominator(v1)
        s2 = _common_denominator(v2)
        self.w1 = la.scale(v1, s1)  # in L, same ray as v1
        self.w2 = la.scale(v2, s2)
        f1 = la.int_vec(la.vec_mat(self.w1, L.gram))
        f2 = la.int_vec(la.vec_mat(self.w2, L.gram))
        if la.rank(la.mat([f1, f2])) < 2:
            self.degenerate = True
            return
        self.degenerate = False
        A = int(L.norm(self.w1))
        B = int(L.pairing(self.w1, self.w2))
        C = int(L.norm(self.w2))
        self.A, self.B, self.C = A, B, C
        self.D = A * C - B * B
        if self.D >= 0:
            raise EnumerationError("span of v1, v2 is not hyperbolic")
        # linear integral lift of the pairing map x -> (x.f1, x.f2) via Smith form
        n = L.rank
        Ft = la.mat([(Fraction(f1[i]), Fraction(f2[i])) for i in range(n)])  # n x 2
        U, S, V = la.smith_normal_form([(f1[i], f2[i]) for i in range(n)])
        self.s_divisors = (S[0][0], S[1][1] if n > 1 else 0)
        self.V = V  # 2x2
        self.U = U  # n x n
        aff = la.integral_affine_solutions([la.vec(f1), la.vec(f2)], (0, 0))
        _zero, kernel = aff
        self.kernel = kernel
        self._lift_rows = (self._raw_lift(1, 0), self._raw_lift(0, 1))
        if kernel:
            GK = tuple(tuple(L.pairing(u, v) for v in kernel) for u in kernel)
            self.GK = GK
            self.solver = ShellSolver(tuple(tuple(-e for e in row) for row in GK))
            GK_inv = la.inverse(GK)
            lift1, lift2 = self._lift_rows
            # offset rows: K-coordinates of the perpendicular parts, linear in (c1, c2)
            self.O1 = la.vec_mat(tuple(L.pairing(lift1, kb) for kb in kernel), GK_inv)
            self.O2 = la.vec_mat(tuple(L.pairing(lift2, kb) for kb in kernel), GK_inv)
        else:
            self.solver = None

    def _raw_lift(self, c1, c2):
        """Rational lift with the given pairings (integral iff divisibility holds)."""
        w = (c1 * self.V[0][0] + c2 * self.V[1][0], c1 * self.V[0][1] + c2 * self.V[1][1])
        n = self.L.rank
        y = [Fraction(0)] * n
        for i, (wi, si) in enumerate(zip(w, self.s_divisors)):
            if si == 0:
                if wi:
                    return None
            else:
                y[i] = Fraction(wi, si)
        return la.vec_mat(tuple(y), la.mat(self.U))

    def _lift(self, c1, c2):
        """One x in L with <x,w1> = c1, <x,w2> = c2, or None."""
        w1 = c1 * self.V[0][0] + c2 * self.V[1][0]
        w2 = c1 * self.V[0][1] + c2 * self.V[1][1]
        s1, s2 = self.s_divisors
        if s1 == 0 or w1 % s1:
            return None
        if s2 == 0 or w2 % s2:
            return None
        lift1, lift2 = self._lift_rows
        return la.add(la.scale(lift1, c1), la.scale(lift2, c2))

    def pair_region(self):
        """Integer pairs (c1, c2) with c1 >= 1, c2 <= -1 and projection norm >= -2."""
        A, B, C, D = self.A, self.B, self.C, self.D
        bound = -2 * D  # = 2|D| > 0
        c1 = 1
        while C * c1 * c1 <= bound:
            disc = (B * c1) ** 2 - A * (C * c1 * c1 - bound)
            if disc >= 0:
                b_hi = la.floor_plus_sqrt(Fraction(-B * c1, A), Fraction(disc, A * A))
                for b in range(1, b_hi + 1):
                    yield (c1, -b)
            c1 += 1

    def iterate(self):
        """Yield all separating (-2)-vectors (unsorted)."""
        if self.degenerate:
            return
        L = self.L
        for c1, c2 in self.pair_region():
            qp = Fraction(self.C * c1 * c1 - 2 * self.B * c1 * c2 + self.A * c2 * c2, self.D)
            if qp < -2 or qp >= 0:
                continue
            p = self._lift(c1, c2)
            if p is None:
                continue
            if not self.kernel:
                if L.norm(p) == -2:
                    yield la.vec(p)
                continue
            offset = la.add(la.scale(self.O1, c1), la.scale(self.O2, c2))
            pos_target = 2 + qp  # residual positive-definite norm, in (0, 2]
            for c in self.solver.solve(pos_target, offset=offset):
                vvec = la.vec(p)
                for ci, kb in zip(c, self.kernel):
                    if ci:
                        vvec = la.add(vvec, la.scale(kb, ci))
                yield vvec

    def is_empty(self):
        for _ in self.iterate():
            return False
        return True


def _common_denominator(v):
    den = 1
    for e in v:
        d = Fraction(e).denominator
        den = den * d // gcd(den, d)
    return den


def isotropic_degree_one(L: IntegralLattice, h):
    """E = {e : <e,e> = 0, <e,h> = 1} for a norm-2 class h."""
    h = la.vec(h)
    if L.norm(h) != 2:
        raise EnumerationError("isotropic_degree_one requires <h,h> = 2")
    return short_vectors(ShellQuery(L, Fraction(0), ((h, Fraction(1)),)))


def minus_two_with_degree(L: IntegralLattice, h, m):
    """All r with <r,r> = -2 and <r,h> = m (finite: h has positive norm)."""
    h = la.vec(h)
    if L.norm(h) <= 0:
        raise EnumerationError("degree vector must have positive norm")
    return short_vectors(ShellQuery(L, Fraction(-2), ((h, Fraction(m)),)))
