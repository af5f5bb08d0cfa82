"""Exact rational linear algebra on tuple vectors and tuple-of-tuple matrices.

Everything here is pure and side-effect free.  Vectors are rows; matrices act
on rows from the right (x -> x @ M), matching the convention used throughout
the package.
"""

from __future__ import annotations

from fractions import Fraction
from math import gcd, isqrt

Vec = tuple
Mat = tuple


def _num(e):
    """Normalize a number: ints stay ints, integral Fractions demote to int."""
    if type(e) is int:
        return e
    f = Fraction(e)
    return f.numerator if f.denominator == 1 else f


def vec(entries) -> Vec:
    return tuple(_num(e) for e in entries)


def mat(rows) -> Mat:
    return tuple(tuple(_num(e) for e in row) for row in rows)


def zeros(n):
    return (0,) * n


def identity(n) -> Mat:
    return tuple(tuple(1 if i == j else 0 for j in range(n)) for i in range(n))


def add(u, v):
    return tuple(a + b for a, b in zip(u, v))


def sub(u, v):
    return tuple(a - b for a, b in zip(u, v))


def scale(u, c):
    c = _num(c)
    return tuple(c * a for a in u)


def neg(u):
    return tuple(-a for a in u)


def dot(u, v):
    return sum(a * b for a, b in zip(u, v))


def mat_vec(M, v):
    """M @ v^T as a row (used for pairing computations)."""
    return tuple(dot(row, v) for row in M)


def vec_mat(v, M):
    """Row vector times matrix: (v @ M)."""
    n = len(M[0])
    return tuple(sum(v[i] * M[i][j] for i in range(len(v))) for j in range(n))


def mat_mul(A, B):
    n, k, m = len(A), len(B), len(B[0])
    Bt = tuple(zip(*B))
    return tuple(tuple(dot(A[i], Bt[j]) for j in range(m)) for i in range(n))


def transpose(A):
    return tuple(zip(*A))


def mat_eq(A, B):
    return A == B


def gram_pairing(G, u, v):
    """<u, v> with respect to the symmetric matrix G (rows/coords exact)."""
    return dot(vec_mat(u, G), v)


def is_integral_vec(v):
    return all(type(e) is int or Fraction(e).denominator == 1 for e in v)


def is_integral_mat(M):
    return all(is_integral_vec(row) for row in M)


def int_vec(v):
    return tuple(int(e) for e in v)


def int_mat(M):
    return tuple(tuple(int(e) for e in row) for row in M)


def det(A):
    """Exact determinant by fraction-free-ish Gaussian elimination."""
    n = len(A)
    M = [list(map(Fraction, row)) for row in A]
    d = Fraction(1)
    for col in range(n):
        piv = next((r for r in range(col, n) if M[r][col] != 0), None)
        if piv is None:
            return Fraction(0)
        if piv != col:
            M[col], M[piv] = M[piv], M[col]
            d = -d
        d *= M[col][col]
        inv = 1 / M[col][col]
        for r in range(col + 1, n):
            if M[r][col]:
                f = M[r][col] * inv
                for c in range(col, n):
                    M[r][c] -= f * M[col][c]
    return d


def inverse(A):
    n = len(A)
    M = [list(map(Fraction, row)) + list(row2) for row, row2 in zip(A, identity(n))]
    for col in range(n):
        piv = next((r for r in range(col, n) if M[r][col] != 0), None)
        if piv is None:
            raise ValueError("singular matrix")
        M[col], M[piv] = M[piv], M[col]
        inv = 1 / M[col][col]
        M[col] = [x * inv for x in M[col]]
        for r in range(n):
            if r != col and M[r][col]:
                f = M[r][col]
                M[r] = [x - f * y for x, y in zip(M[r], M[col])]
    return tuple(tuple(row[n:]) for row in M)


def solve_right(A, b):
    """Solve x @ A = b for a row vector x (A square invertible)."""
    return vec_mat(b, inverse(A))


def rank(A):
    if not A:
        return 0
    M = [list(map(Fraction, row)) for row in A]
    n_rows, n_cols = len(M), len(M[0])
    r = 0
    for col in range(n_cols):
        piv = next((i for i in range(r, n_rows) if M[i][col] != 0), None)
        if piv is None:
            continue
        M[r], M[piv] = M[piv], M[r]
        inv = 1 / M[r][col]
        M[r] = [x * inv for x in M[r]]
        for i in range(n_rows):
            if i != r and M[i][col]:
                f = M[i][col]
                M[i] = [x - f * y for x, y in zip(M[i], M[r])]
        r += 1
        if r == n_rows:
            break
    return r


def solve_linear_system(rows, targets):
    """One rational solution x of x @ rows^T = targets, i.e. dot(x, rows[i]) = targets[i].

    Returns None when inconsistent.  `rows` need not be square or independent.
    """
    if not rows:
        return ()
    n = len(rows[0])
    M = [list(map(Fraction, row)) + [Fraction(t)] for row, t in zip(rows, targets)]
    piv_cols = []
    r = 0
    for col in range(n):
        piv = next((i for i in range(r, len(M)) if M[i][col] != 0), None)
        if piv is None:
            continue
        M[r], M[piv] = M[piv], M[r]
        inv = 1 / M[r][col]
        M[r] = [x * inv for x in M[r]]
        for i in range(len(M)):
            if i != r and M[i][col]:
                f = M[i][col]
                M[i] = [x - f * y for x, y in zip(M[i], M[r])]
        piv_cols.append(col)
        r += 1
    for i in range(r, len(M)):
        if M[i][n] != 0:
            return None
    x = [Fraction(0)] * n
    for i, col in enumerate(piv_cols):
        x[col] = M[i][n]
    return tuple(x)


# ---------------------------------------------------------------------------
# Integer matrix normal forms
# ---------------------------------------------------------------------------

def _swap_rows(M, i, j):
    M[i], M[j] = M[j], M[i]


def hnf_row_basis(rows):
    """Basis (list of int tuples) of the subgroup of Z^n generated by integer rows."""
    if not rows:
        return []
    M = [list(map(int, r)) for r in rows]
    n = len(M[0])
    basis = []
    r = 0
    for col in range(n):
        piv = None
        for i in range(r, len(M)):
            if M[i][col]:
                piv = i
                break
        if piv is None:
            continue
        _swap_rows(M, r, piv)
        # clear below by gcd steps
        for i in range(r + 1, len(M)):
            while M[i][col]:
                q = M[r][col] // M[i][col]
                M[r] = [a - q * b for a, b in zip(M[r], M[i])]
                _swap_rows(M, r, i)
        if M[r][col] < 0:
            M[r] = [-a for a in M[r]]
        r += 1
    M = M[:r]
    # reduce above pivots
    piv_of = []
    for row in M:
        piv_of.append(next(c for c, a in enumerate(row) if a))
    for i in range(len(M)):
        for j in range(i):
            c = piv_of[i]
            if M[j][c]:
                q = M[j][c] // M[i][c]
                M[j] = [a - q * b for a, b in zip(M[j], M[i])]
    return [tuple(row) for row in M]


def smith_normal_form(A):
    """Smith normal form of an integer matrix.

    Returns (U, S, V) with U @ A @ V = S, U and V unimodular, S diagonal with
    s_1 | s_2 | ... (nonnegative).  All entries plain ints.
    """
    M = [list(map(int, row)) for row in A]
    n_rows = len(M)
    n_cols = len(M[0]) if n_rows else 0
    U = [[1 if i == j else 0 for j in range(n_rows)] for i in range(n_rows)]
    V = [[1 if i == j else 0 for j in range(n_cols)] for i in range(n_cols)]

    def row_op(i, j, q):  # row_i -= q * row_j
        M[i] = [a - q * b for a, b in zip(M[i], M[j])]
        U[i] = [a - q * b for a, b in zip(U[i], U[j])]

    def col_op(i, j, q):  # col_i -= q * col_j
        for row in M:
            row[i] -= q * row[j]
        for row in V:
            row[i] -= q * row[j]

    def swap_rows(i, j):
        M[i], M[j] = M[j], M[i]
        U[i], U[j] = U[j], U[i]

    def swap_cols(i, j):
        for row in M:
            row[i], row[j] = row[j], row[i]
        for row in V:
            row[i], row[j] = row[j], row[i]

    t = 0
    while t < min(n_rows, n_cols):
        # find pivot: smallest nonzero |entry| in M[t:, t:]
        piv = None
        best = None
        for i in range(t, n_rows):
            for j in range(t, n_cols):
                a = M[i][j]
                if a and (best is None or abs(a) < best):
                    best = abs(a)
                    piv = (i, j)
        if piv is None:
            break
        swap_rows(t, piv[0])
        swap_cols(t, piv[1])
        dirty = False
        for i in range(t + 1, n_rows):
            if M[i][t]:
                q = M[i][t] // M[t][t]
                row_op(i, t, q)
                if M[i][t]:
                    swap_rows(t, i)
                    dirty = True
        for j in range(t + 1, n_cols):
            if M[t][j]:
                q = M[t][j] // M[t][t]
                col_op(j, t, q)
                if M[t][j]:
                    swap_cols(t, j)
                    dirty = True
        if dirty:
            continue
        # divisibility: M[t][t] must divide everything below-right
        need_restart = False
        d = M[t][t]
        for i in range(t + 1, n_rows):
            for j in range(t + 1, n_cols):
                if M[i][j] % d:
                    row_op(t, i, -1)  # add row i to row t
                    need_restart = True
                    break
            if need_restart:
                break
        if need_restart:
            continue
        if M[t][t] < 0:
            M[t] = [-a for a in M[t]]
            U[t] = [-a for a in U[t]]
        t += 1
    return ([tuple(r) for r in U], [tuple(r) for r in M], [tuple(r) for r in V])


def integer_kernel(A):
    """Basis of {x in Z^m : x @ A = 0} for an integer matrix A (m rows)."""
    U, S, _V = smith_normal_form(A)
    m = len(A)
    r = sum(1 for i in range(min(m, len(A[0]) if A else 0)) if i < len(S) and S[i][i] != 0)
    # rows of U with index >= r map to zero rows of S
    return [tuple(U[i]) for i in range(r, m)]


def integral_solve(rows, target):
    """Integral x with sum_i x_i * rows[i] = target, or None.

    `rows` are rational; `target` rational.  Uses the Smith form of the
    denominator-cleared stack.
    """
    if not rows:
        return () if all(Fraction(t) == 0 for t in target) else None
    den = 1
    for r in list(rows) + [target]:
        for e in r:
            d = Fraction(e).denominator
            den = den * d // gcd(den, d)
    A = [[int(Fraction(e) * den) for e in r] for r in rows]
    t = [int(Fraction(e) * den) for e in target]
    U, S, V = smith_normal_form(A)
    # x @ A = t ; A = U^{-1} S V^{-1}; set y = x @ U^{-1}: y S = t V =: w
    w = [sum(t[i] * V[i][j] for i in range(len(t))) for j in range(len(V[0]))]
    m, n = len(A), len(A[0])
    y = [0] * m
    for i in range(min(m, n)):
        s = S[i][i]
        if s:
            if w[i] % s:
                return None
            y[i] = w[i] // s
        elif w[i]:
            return None
    for i in range(min(m, n), n):
        if w[i]:
            return None
    # x = y @ U
    x = tuple(sum(y[i] * U[i][j] for i in range(m)) for j in range(m))
    return x


class AffineSolver:
    """Repeated integral solving of dot(x, funcs[j]) = t_j for varying targets.

    Precomputes the Smith data of the (denominator-cleared) functional stack.
    """

    def __init__(self, funcs):
        n = len(funcs[0])
        self.dens = []
        int_funcs = []
        for f in funcs:
            den = 1
            for e in f:
                d = Fraction(e).denominator
                den = den * d // gcd(den, d)
            self.dens.append(den)
            int_funcs.append(tuple(int(Fraction(e) * den) for e in f))
        A = [tuple(row) for row in transpose(mat(int_funcs))]  # n x k
        self.U, self.S, self.V = smith_normal_form(A)
        self.m = len(A)
        self.k = len(A[0]) if A else 0
        self.kernel = integer_kernel(A)

    def solve(self, targets):
        """One integral solution row, or None."""
        t = []
        for tv, den in zip(targets, self.dens):
            tt = Fraction(tv) * den
            if tt.denominator != 1:
                return None
            t.append(int(tt))
        V, S, U, m = self.V, self.S, self.U, self.m
        w = [sum(t[i] * V[i][j] for i in range(len(t))) for j in range(len(V[0]))]
        y = [0] * m
        for i in range(min(m, self.k)):
            s = S[i][i]
            if s:
                if w[i] % s:
                    return None
                y[i] = w[i] // s
            elif w[i]:
                return None
        for i in range(min(m, self.k), self.k):
            if w[i]:
                return None
        return tuple(sum(y[i] * U[i][j] for i in range(m)) for j in range(m))


def integral_affine_solutions(funcs, targets):
    """Solve dot(x, funcs[j]) = targets[j] over x in Z^n.

    Returns (particular, kernel_basis) or None when no integral solution exists.
    funcs may be rational rows; each is cleared to integers first.
    """
    n = len(funcs[0])
    int_funcs = []
    int_targets = []
    for f, t in zip(funcs, targets):
        den = 1
        for e in f:
            d = Fraction(e).denominator
            den = den * d // gcd(den, d)
        int_funcs.append(tuple(int(Fraction(e) * den) for e in f))
        t_scaled = Fraction(t) * den
        if t_scaled.denominator != 1:
            return None
        int_targets.append(int(t_scaled))
    A = transpose(mat(int_funcs))  # n x k: x @ A = targets
    part = integral_solve([tuple(row) for row in A], int_targets)
    if part is None:
        return None
    kernel = integer_kernel([tuple(map(int, row)) for row in A])
    return vec(part), mat(kernel)


def primitive_int_vector(v):
    """Scale a rational row to a primitive integer row with the same direction (sign kept)."""
    den = 1
    for e in v:
        den = den * Fraction(e).denominator // gcd(den, Fraction(e).denominator)
    w = [int(Fraction(e) * den) for e in v]
    g = 0
    for a in w:
        g = gcd(g, a)
    if g == 0:
        return tuple(w)
    return tuple(a // g for a in w)


# ---------------------------------------------------------------------------
# Exact bounds with square roots
# ---------------------------------------------------------------------------

def floor_sqrt_frac(p, q):
    """floor(sqrt(p/q)) for nonnegative integers p, q > 0."""
    if p < 0:
        raise ValueError("negative radicand")
    return isqrt(p * q) // q


def floor_plus_sqrt(c, rad):
    """floor(c + sqrt(rad)) for Fractions c, rad >= 0."""
    a, b = c.numerator, c.denominator
    p, q = rad.numerator, rad.denominator
    # n <= a/b + sqrt(p/q)  <=>  (n*b - a) <= b*sqrt(p/q) (when lhs >= 0)
    n = (a * q + b * isqrt(p * q)) // (b * q)
    # fix off-by-one both ways
    while True:
        lhs = (n + 1) * b - a
        if lhs <= 0 or lhs * lhs * q <= p * b * b:
            n += 1
        else:
            break
    while True:
        lhs = n * b - a
        if lhs > 0 and lhs * lhs * q > p * b * b:
            n -= 1
        else:
            break
    return n


def ceil_minus_sqrt(c, rad):
    """ceil(c - sqrt(rad)) for Fractions c, rad >= 0."""
    return -floor_plus_sqrt(-c, rad)


# ---------------------------------------------------------------------------
# Exact LP feasibility (small dense simplex)
# ---------------------------------------------------------------------------

def lp_max_slack(constraints, equalities, n):
    """Maximize s subject to dot(x, c) >= s for c in constraints, dot(x, e) = 0 for e
    in equalities, and an implicit normalization sum over constraints dot(x,c) <= bound.

    Returns (s*, x*) with exact Fractions, or (None, None) if unbounded/degenerate.
    Small helper used for wall-feasibility fallback; n is the dimension.
    """
    # Variables: x (free, split x = x+ - x-), s (free).  Standard-form phase-1/2 would be
    # heavy; instead solve by binary descent on vertex enumeration is worse.  Use a compact
    # simplex on the dual-scaled problem:
    #   max s  s.t.  dot(x,c) - s >= 0  (c in constraints),  dot(x,e) = 0,
    #                sum_c dot(x,c) = 1   (normalization pins the cone scale)
    cons = [tuple(map(Fraction, c)) for c in constraints]
    eqs = [tuple(map(Fraction, e)) for e in equalities]
    m = len(cons)
    norm_row = tuple(sum(c[i] for c in cons) for i in range(n))
    # tableau variables: x0..x_{n-1} free, s free, surplus w_c >= 0 per constraint
    # Solve with a simple exact big-M simplex over free variables handled by substitution:
    # eliminate equalities first by projecting x onto their null space.
    if eqs:
        null = rational_nullspace(eqs, n)
        if not null:
            return Fraction(0), zeros(n)
    else:
        null = [tuple(Fraction(1 if i == j else 0) for j in range(n)) for i in range(n)]
    k = len(null)
    proj_cons = [tuple(dot(b, c) for b in null) for c in cons]
    proj_norm = tuple(dot(b, norm_row) for b in null)
    res = _simplex_max_slack(proj_cons, proj_norm, k)
    if res is None:
        return None, None
    s, y = res
    x = zeros(n)
    for coef, b in zip(y, null):
        x = add(x, scale(b, coef))
    return s, x


def rational_nullspace(rows, n):
    """Basis of {x in Q^n : dot(x, row) = 0 for all rows}."""
    M = [list(map(Fraction, r)) for r in rows]
    piv_cols = []
    r = 0
    for col in range(n):
        piv = next((i for i in range(r, len(M)) if M[i][col] != 0), None)
        if piv is None:
            continue
        M[r], M[piv] = M[piv], M[r]
        inv = 1 / M[r][col]
        M[r] = [x * inv for x in M[r]]
        for i in range(len(M)):
            if i != r and M[i][col]:
                f = M[i][col]
                M[i] = [x - f * y for x, y in zip(M[i], M[r])]
        piv_cols.append(col)
        r += 1
    free_cols = [c for c in range(n) if c not in piv_cols]
    basis = []
    for fc in free_cols:
        v = [Fraction(0)] * n
        v[fc] = Fraction(1)
        for i, pc in enumerate(piv_cols):
            v[pc] = -M[i][fc]
        basis.append(tuple(v))
    return basis


def _simplex_max_slack(cons, norm_row, k):
    """max s st dot(y,c) >= s for all c, dot(y, norm_row) = 1; y in Q^k free."""
    # Convert: variables y (free) and s; constraints dot(y,c) - s >= 0 -> surplus form.
    # Since y and s are free, bring into standard form via y = u - v, s = s+ - s-.
    rows = []
    rhs = []
    for c in cons:
        row = list(c) + [-x for x in c] + [-1, 1]
        rows.append([-x for x in row])  # -dot(y,c) + s <= 0
        rhs.append(Fraction(0))
    rows.append(list(norm_row) + [-x for x in norm_row] + [0, 0])
    rhs.append(Fraction(1))
    rows.append([-x for x in rows[-1]])
    rhs.append(Fraction(-1))
    obj = [Fraction(0)] * (2 * k) + [Fraction(1), Fraction(-1)]  # maximize s
    sol = simplex_solve(rows, rhs, obj)
    if sol is None:
        return None
    val, x = sol
    y = tuple(x[i] - x[k + i] for i in range(k))
    return val, y


def simplex_solve(A_rows, b, c):
    """Maximize dot(c, x) s.t. A x <= b, x >= 0.  Exact simplex with Bland's rule.

    Returns (optimum, x) or None if infeasible; raises on unbounded.
    """
    m = len(A_rows)
    n = len(c)
    # Phase 1 with artificial variables for negative rhs rows
    T = []
    base = []
    for i in range(m):
        row = list(map(Fraction, A_rows[i])) + [Fraction(0)] * m + [Fraction(b[i])]
        row[n + i] = Fraction(1)
        T.append(row)
        base.append(n + i)
    need_art = [i for i in range(m) if b[i] < 0]
    if need_art:
        for i in need_art:
            T[i] = [-x for x in T[i]]
            T[i][n + i] = Fraction(-1)
        # artificials
        n_art = len(need_art)
        for idx, i in enumerate(need_art):
            for j, row in enumerate(T):
                row.insert(n + m + idx, Fraction(1) if j == i else Fraction(0))
            base[i] = n + m + idx
        obj1 = [Fraction(0)] * (n + m + n_art) + [Fraction(0)]
        for idx in range(n_art):
            obj1[n + m + idx] = Fraction(-1)
        val = _simplex_core(T, base, obj1)
        if val < 0:
            return None
        # drop artificial columns
        for row in T:
            del row[n + m:n + m + n_art]
        for i, bv in enumerate(base):
            if bv >= n + m:
                # pivot artificial out if still basic (degenerate); find any nonzero col
                piv_col = next((j for j in range(n + m) if T[i][j] != 0), None)
                if piv_col is None:
                    base[i] = -1
                else:
                    _pivot(T, base, i, piv_col)
    obj = list(map(Fraction, c)) + [Fraction(0)] * m + [Fraction(0)]
    val = _simplex_core(T, base, obj)
    x = [Fraction(0)] * n
    for i, bv in enumerate(base):
        if 0 <= bv < n:
            x[bv] = T[i][-1]
    return val, tuple(x)


def _pivot(T, base, r, col):
    piv = T[r][col]
    T[r] = [x / piv for x in T[r]]
    for i in range(len(T)):
        if i != r and T[i][col]:
            f = T[i][col]
            T[i] = [x - f * y for x, y in zip(T[i], T[r])]
    base[r] = col


def _simplex_core(T, base, obj):
    """Run simplex on tableau T (rows: constraints with rhs last) maximizing obj."""
    m = len(T)
    width = len(T[0]) - 1
    while True:
        # reduced costs
        z = list(obj[:width])
        const = Fraction(0)
        for i, bv in enumerate(base):
            if bv >= 0 and obj[bv]:
                f = obj[bv]
                const += f * T[i][-1]
                for j in range(width):
                    z[j] -= f * T[i][j]
        col = next((j for j in range(width) if z[j] > 0), None)
        if col is None:
            return const
        # ratio test (Bland)
        best = None
        for i in range(m):
            if T[i][col] > 0:
                ratio = T[i][-1] / T[i][col]
                if best is None or ratio < best[0] or (ratio == best[0] and base[i] < base[best[1]]):
                    best = (ratio, i)
        if best is None:
            raise ArithmeticError("unbounded LP")
        _pivot(T, base, best[1], col)
