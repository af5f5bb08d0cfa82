"""The worked double-plane surface: its Neron-Severi lattice, named curve
classes, auxiliary symmetry group, rational-curve census, embedding into the
rank-26 lattice, and the full reproduction pipeline.

Coordinates: the rational spanning classes are (line, exc[1]+, exc[1]-, ...,
exc[6]+, exc[6]-) with Gram diag([2], A2 x 6); the integral basis of the full
lattice replaces exc[6]- by the conic-lift class.
"""

from __future__ import annotations

import itertools
from dataclasses import dataclass, field
from fractions import Fraction

from . import ade, linalg as la
from .enumeration import ShellQuery, ShellSolver, minus_two_with_degree, sep, short_vectors
from .kthree import K3Surface
from .lattice import (
    IntegralLattice,
    Isometry,
    anti_isometry_search,
    discriminant_form,
    overlattice_from_glue,
    signature,
)

A2_BLOCK = ((-2, 1), (1, -2))


def _span_gram():
    """Gram of the rational spanning classes (line; six A2 exceptional pairs)."""
    n = 13
    G = [[Fraction(0)] * n for _ in range(n)]
    G[0][0] = Fraction(2)
    for i in range(6):
        base = 1 + 2 * i
        G[base][base] = Fraction(-2)
        G[base + 1][base + 1] = Fraction(-2)
        G[base][base + 1] = Fraction(1)
        G[base + 1][base] = Fraction(1)
    return la.mat(G)


SPAN_GRAM = _span_gram()


def span_index(i, sign):
    """Index of exc[i]^sign (i in 1..6, sign in '+-') in the spanning basis."""
    return 1 + 2 * (i - 1) + (0 if sign == "+" else 1)


class XfgModel:
    """Rank-13 Neron-Severi lattice of the double plane with its named classes.

    All named classes are stored in integral-basis coordinates; `span` converts
    from spanning-class coordinates (line, exceptional pairs), `pairings` solves a
    class from its intersection numbers against the spanning classes.
    """

    def __init__(self):
        # conic lift: line - sum (2 exc_i+ + exc_i-) / 3 in spanning coordinates
        conic_plus_span = [Fraction(1)] + [Fraction(0)] * 12
        for i in range(1, 7):
            conic_plus_span[span_index(i, "+")] = Fraction(-2, 3)
            conic_plus_span[span_index(i, "-")] = Fraction(-1, 3)
        self.conic_plus_span = la.vec(conic_plus_span)
        # integral basis: line, exc1+-, ..., exc5+-, exc6+, conic+
        rows = [la.vec([1 if j == k else 0 for j in range(13)]) for k in range(12)]
        rows.append(self.conic_plus_span)
        self.basis_in_span = la.mat(rows)
        self.span_in_basis = la.inverse(self.basis_in_span)
        gram = la.mat(
            tuple(
                tuple(la.gram_pairing(SPAN_GRAM, u, v) for v in self.basis_in_span)
                for u in self.basis_in_span
            )
        )
        if not la.is_integral_mat(gram):
            raise AssertionError("model basis is not integral")
        self.lattice = IntegralLattice(la.int_mat(gram))
        # named classes
        self.line = self.span([1] + [0] * 12)
        self.exc = {}
        for i in range(1, 7):
            for s in "+-":
                e = [Fraction(0)] * 13
                e[span_index(i, s)] = Fraction(1)
                self.exc[(i, s)] = self.span(e)
        conic_minus_span = [Fraction(1)] + [Fraction(0)] * 12
        for i in range(1, 7):
            conic_minus_span[span_index(i, "+")] = Fraction(-1, 3)
            conic_minus_span[span_index(i, "-")] = Fraction(-2, 3)
        self.conic = {
            "+": self.span(self.conic_plus_span),
            "-": self.span(conic_minus_span),
        }
        self.ample = self.pairings([8] + [1] * 12)
        self.lines_through = {}
        for i, j in itertools.combinations(range(1, 7), 2):
            v = [Fraction(1)] + [Fraction(0)] * 12
            v[span_index(i, "+")] = v[span_index(i, "-")] = Fraction(-1)
            v[span_index(j, "+")] = v[span_index(j, "-")] = Fraction(-1)
            self.lines_through[(i, j)] = self.span(v)
        self.surface = K3Surface(self.lattice, self.ample)
        self._verify()

    # -- coordinates ---------------------------------------------------------

    def span(self, coords, by_pairings=False):
        """Integral-basis coordinates of a class given in spanning coordinates."""
        v = la.vec(coords)
        if by_pairings:
            return self.pairings(coords)
        return la.vec_mat(v, self.span_in_basis)

    def pairings(self, values):
        """Class with prescribed intersection numbers against the spanning classes."""
        x_span = la.solve_right(SPAN_GRAM, la.vec(values))
        return la.vec_mat(x_span, self.span_in_basis)

    def pairing_profile(self, v):
        """Intersection numbers of v with the 13 spanning classes."""
        x_span = la.vec_mat(la.vec(v), self.basis_in_span)
        return la.vec_mat(x_span, SPAN_GRAM)

    # -- named vector families ------------------------------------------------

    def wall_vector_alpha(self, alpha):
        vals = [1] + [0] * 12
        vals[span_index(alpha, "+")] = 1
        vals[span_index(alpha, "-")] = 1
        return self.pairings(vals)

    def wall_vector_pair(self, I, J):
        vals = [2] + [0] * 12
        for i in I:
            vals[span_index(i, "+")] = 1
        for j in J:
            vals[span_index(j, "-")] = 1
        return self.pairings(vals)

    def polarization_pair(self, I, J):
        vals = [6] + [0] * 12
        for i in I:
            vals[span_index(i, "+")] = 1
            vals[span_index(i, "-")] = 1
        for j in J:
            vals[span_index(j, "+")] = 0
            vals[span_index(j, "-")] = 3
        return self.pairings(vals)

    def wall_vector_alpha_sign(self, alpha, sign):
        vals = [1] + [0] * 12
        vals[span_index(alpha, "+" if sign == "+" else "-")] = 2
        vals[span_index(alpha, "-" if sign == "+" else "+")] = -1
        return self.pairings(vals)

    def polarization_alpha(self, alpha, sign):
        vals = [4] + [0] * 12
        for b in range(1, 7):
            if b == alpha:
                vals[span_index(b, "+" if sign == "+" else "-")] = 2
                vals[span_index(b, "-" if sign == "+" else "+")] = 0
            else:
                vals[span_index(b, "+" if sign == "+" else "-")] = 0
                vals[span_index(b, "-" if sign == "+" else "+")] = 1
        return self.pairings(vals)

    def wall_vector_beta_F(self, alpha, beta, F, sign):
        vals = [2] + [0] * 12
        for i in (alpha, beta):
            vals[span_index(i, "+" if sign == "+" else "-")] = 1
        for i in F:
            vals[span_index(i, "-" if sign == "+" else "+")] = 1
        return self.pairings(vals)

    def wall_vector_u(self, alpha, beta, F):
        vals = [3] + [0] * 12
        vals[span_index(alpha, "+")] = 1
        vals[span_index(alpha, "-")] = 1
        for i in range(1, 7):
            if i in (alpha, beta):
                continue
            if i in F:
                vals[span_index(i, "-")] = 1
            else:
                vals[span_index(i, "+")] = 1
        return self.pairings(vals)

    def polarization_sigma_j(self, sign, J):
        """Degree-14 polarization for J = (i1, (i2, i3), (i4, i5), i6)."""
        i1, (i2, i3), (i4, i5), i6 = J
        bar = "-" if sign == "+" else "+"
        vals = [14] + [0] * 12
        vals[span_index(i1, sign)] = 1
        for i in (i2, i3):
            vals[span_index(i, sign)] = 4
        for i in (i4, i5):
            vals[span_index(i, bar)] = 5
        vals[span_index(i6, sign)] = 5
        vals[span_index(i6, bar)] = 4
        return self.pairings(vals)

    def fibration_classes(self, sign, I):
        """Fiber and zero-section classes for I = (i1, (i2, i3, i4), (i5, i6))."""
        i1, triple, _pair = I
        bar = "-" if sign == "+" else "+"
        f = la.scale(self.conic[bar], 2)
        f = la.add(f, self.exc[(i1, bar)])
        for t in triple:
            f = la.add(f, self.exc[(t, bar)])
        z = self.exc[(i1, sign)]
        return f, z

    # -- verification -----------------------------------------------------------

    def _verify(self):
        L = self.lattice
        assert signature(L) == (1, 12)
        assert abs(int(la.det(L.gram))) == 162
        a = self.ample
        assert L.norm(a) == 20
        assert L.contains(a)
        for (i, s), e in self.exc.items():
            assert L.norm(e) == -2 and L.pairing(e, self.line) == 0
        assert L.norm(self.line) == 2
        for s in "+-":
            c = self.conic[s]
            assert L.norm(c) == -2 and L.pairing(c, self.line) == 2 and L.contains(c)
        for (i, j), ell in self.lines_through.items():
            assert L.norm(ell) == -2 and L.pairing(ell, self.line) == 2 and L.contains(ell)
        assert L.pairing(self.conic["+"], self.exc[(1, "+")]) == 1
        assert L.pairing(self.conic["+"], self.exc[(1, "-")]) == 0

    # -- rational-curve census -------------------------------------------------

    def degree_shell_candidates(self, m):
        """All (-2)-classes of line-degree m pairing >= 0 with the 12 exceptional
        classes, the two conic lifts, and the 15 bisecant lines (the named classes
        themselves are excluded by their own self-pairing and are pooled
        separately by the census).

        Assembled by meet-in-the-middle over the six cusp blocks: r = (m/2) line
        + sum of per-cusp block vectors sharing one glue residue k in {0,1,2}.
        Exact integer arithmetic (block coordinates scaled by 3).  The filters
        per block/half/join use:
          3<r,e_i+> = -2U_i+V_i >= 0,   3<r,e_i-> = U_i-2V_i >= 0,
          <r,conic+> = m + sum U_i/3 >= 0,  <r,conic-> = m + sum V_i/3 >= 0,
          <r,line_ij> = m - t_i - t_j >= 0 with t_i = -(U_i+V_i)/3 >= 0.
        """
        if m % 2:
            return []
        total9 = -18 - 9 * (m * m) // 2  # 9 * (-2 - m^2/2)
        rows = []
        for k in range(3):
            blocks = self._block_vectors(k, -total9, m)
            if not blocks:
                continue
            half = self._half_sums(blocks, -total9, m)
            for left_norm, lefts in sorted(half.items()):
                rights = half.get(total9 - left_norm)
                if not rights:
                    continue
                for lt in lefts:
                    bl_l, su_l, sv_l, t1_l, t2_l = lt
                    for rt in rights:
                        bl_r, su_r, sv_r, t1_r, t2_r = rt
                        if su_l + su_r < -3 * m or sv_l + sv_r < -3 * m:
                            continue
                        top2 = sorted((t1_l, t2_l, t1_r, t2_r))[-2:]
                        if top2[0] + top2[1] > 3 * m:
                            continue
                        coords = [Fraction(m, 2)] + [Fraction(0)] * 12
                        for i, (U, V) in enumerate(bl_l + bl_r, start=1):
                            coords[span_index(i, "+")] = Fraction(U, 3)
                            coords[span_index(i, "-")] = Fraction(V, 3)
                        rows.append(self.span(coords))
        return rows

    def _block_vectors(self, k, budget9, m):
        """Per-cusp block vectors (3u, 3v) = (U, V) with glue residue k.

        Filters: 9|norm| <= budget9, exceptional pairings >= 0 (which forces
        U, V <= 0), block degree t = -(U+V)/3 <= m, and U, V >= -3m (conic
        filters with the other blocks contributing <= 0).
        """
        res_u, res_v = (-2 * k) % 3, (-k) % 3
        out = []
        for U in range(-3 * m, 1):
            if U % 3 != res_u:
                continue
            for V in range(-3 * m - U, 1):
                if V % 3 != res_v:
                    continue
                if -2 * U + V < 0 or U - 2 * V < 0:
                    continue
                n9 = -2 * U * U - 2 * V * V + 2 * U * V
                if -n9 > budget9:
                    continue
                out.append((n9, U, V))
        out.sort(reverse=True)
        return out

    def _half_sums(self, blocks, budget9, m):
        """Filtered triples of block vectors bucketed by total scaled norm.

        Each entry: (((U1,V1),(U2,V2),(U3,V3)), sumU, sumV, tmax1, tmax2) where
        tmax1 >= tmax2 are the two largest scaled block degrees 3*t = -(U+V).
        """
        by_norm = {}
        for i1, (n1, U1, V1) in enumerate(blocks):
            for n2, U2, V2 in blocks:
                n12 = n1 + n2
                if -n12 > budget9:
                    break
                t1, t2 = -(U1 + V1), -(U2 + V2)
                if t1 + t2 > 3 * m:
                    continue
                for n3, U3, V3 in blocks:
                    n = n12 + n3
                    if -n > budget9:
                        break
                    t3 = -(U3 + V3)
                    ts = sorted((t1, t2, t3))
                    if ts[1] + ts[2] > 3 * m:
                        continue
                    su = U1 + U2 + U3
                    sv = V1 + V2 + V3
                    if su < -3 * m or sv < -3 * m:
                        continue
                    by_norm.setdefault(n, []).append(
                        (((U1, V1), (U2, V2), (U3, V3)), su, sv, ts[2], ts[1])
                    )
        return by_norm

    def rats_census(self, m_max=14):
        """nu(m) table and the certified curve-class list up to line-degree m_max.

        Candidates of every degree <= m_max are classified at once by the
        ample-degree recursion: a class is a curve class iff it pairs >= 0 with
        every accepted class of strictly smaller ample degree.  The recursion is
        grounded because every reducible effective (-2)-class has an irreducible
        component of strictly smaller ample degree and line-degree <= its own.
        """
        import numpy as np

        L = self.lattice
        named = [self.exc[key] for key in sorted(self.exc)]
        named += [self.conic["+"], self.conic["-"]]
        named += [self.lines_through[key] for key in sorted(self.lines_through)]
        pool = {}
        for r in named:
            pool[tuple(r)] = la.vec(r)
        # degree-0 candidates: roots orthogonal to the line class with positive
        # ample degree (includes the non-curve sums of exceptional pairs)
        for r in minus_two_with_degree(L, self.line, 0):
            if L.pairing(r, self.ample) > 0:
                pool.setdefault(tuple(r), la.vec(r))
        for m in range(2, m_max + 1, 2):
            for r in self.degree_shell_candidates(m):
                if not L.contains(r):
                    continue
                if L.pairing(r, self.ample) > 0:
                    pool.setdefault(tuple(r), la.vec(r))
        cands = list(pool.values())
        adeg = [int(L.pairing(r, self.ample)) for r in cands]
        order = sorted(range(len(cands)), key=lambda i: adeg[i])
        vecs = np.array([[int(e) for e in cands[i]] for i in order], dtype=np.float64)
        gram = np.array([[int(e) for e in L.gram[i]] for i in range(L.rank)], dtype=np.float64)
        pair_rows = vecs @ gram  # candidate x gram, exact in float64 (small ints)
        degs = [adeg[i] for i in order]
        accepted_idx = []
        accepted_mat = np.empty((0, L.rank))
        accepted_deg = []
        i = 0
        n = len(order)
        while i < n:
            j = i
            while j < n and degs[j] == degs[i]:
                j += 1
            chunk = pair_rows[i:j]
            if accepted_idx:
                prods = chunk @ accepted_mat.T
                ok = (prods >= 0).all(axis=1)
            else:
                ok = np.ones(j - i, dtype=bool)
            for t in range(i, j):
                if ok[t - i]:
                    accepted_idx.append(t)
            if accepted_idx:
                accepted_mat = vecs[accepted_idx]
            i = j
        rats = [cands[order[t]] for t in accepted_idx]
        rejected = [cands[order[t]] for t in range(n) if t not in set(accepted_idx)]
        table = {}
        for r in rats:
            d = int(L.pairing(r, self.line))
            table[d] = table.get(d, 0) + 1
        for m in range(0, m_max + 1):
            table.setdefault(m, 0)
        self.surface.seed_rats_cache(rats, rejected)
        return {m: table[m] for m in sorted(table) if m <= m_max}, rats

    # -- symmetry group M ---------------------------------------------------------

    def cover_involution(self):
        """The deck involution of the degree-2 map given by the line class."""
        return self.surface.involution_of_polarization(self.line)

    def permutation_isometry(self, perm):
        """Isometry permuting the exceptional pairs by perm (dict or list on 1..6)."""
        if not isinstance(perm, dict):
            perm = {i + 1: p for i, p in enumerate(perm)}
        span_rows = []
        for k in range(13):
            span_rows.append(None)
        span_rows[0] = la.vec([1] + [0] * 12)
        for i in range(1, 7):
            for s in "+-":
                img = [Fraction(0)] * 13
                img[span_index(perm[i], s)] = Fraction(1)
                span_rows[span_index(i, s)] = la.vec(img)
        # matrix acting on spanning coordinates; convert to the integral basis
        P_span = la.mat(span_rows)
        M = la.mat_mul(la.mat_mul(self.basis_in_span, P_span), self.span_in_basis)
        return Isometry(self.lattice, M)

    def aux_group(self):
        """The 1440-element group: pair-preserving permutations times the deck swap."""
        from itertools import permutations

        swap = self.swap_isometry()
        elements = []
        for perm in permutations(range(1, 7)):
            g = self.permutation_isometry(perm)
            elements.append(g)
            elements.append(g * swap)
        return elements

    def swap_isometry(self):
        """The involution fixing the line class and swapping every exceptional pair."""
        span_rows = [None] * 13
        span_rows[0] = la.vec([1] + [0] * 12)
        for i in range(1, 7):
            p, m = span_index(i, "+"), span_index(i, "-")
            row_p = [Fraction(0)] * 13
            row_p[m] = Fraction(1)
            row_m = [Fraction(0)] * 13
            row_m[p] = Fraction(1)
            span_rows[p] = la.vec(row_p)
            span_rows[m] = la.vec(row_m)
        P_span = la.mat(span_rows)
        M = la.mat_mul(la.mat_mul(self.basis_in_span, P_span), self.span_in_basis)
        return Isometry(self.lattice, M)

    # -- embedding into the rank-26 lattice -------------------------------------

    def complement_lattice(self):
        """The negative-definite partner: A1 + 6 A2 extended by the six-block
        glue vector (sum of the plus-node dual vectors), determinant 162."""
        n = 13
        G0 = [[Fraction(0)] * n for _ in range(n)]
        G0[0][0] = Fraction(-2)
        for i in range(6):
            b = 1 + 2 * i
            G0[b][b] = G0[b + 1][b + 1] = Fraction(-2)
            G0[b][b + 1] = G0[b + 1][b] = Fraction(1)
        G0 = la.mat(G0)
        glue = [Fraction(0)] * n
        for i in range(6):
            b = 1 + 2 * i
            glue[b] += Fraction(-2, 3)
            glue[b + 1] += Fraction(-1, 3)
        rows = [la.vec([1 if j == k else 0 for j in range(n)]) for k in range(n - 1)]
        rows.append(la.vec(glue))
        gram = tuple(
            tuple(la.gram_pairing(G0, u, v) for v in rows) for u in rows
        )
        if not la.is_integral_mat(gram):
            raise AssertionError("complement basis is not integral")
        return IntegralLattice(la.int_mat(gram))

    def build_embedding(self):
        """Glue the Neron-Severi lattice with its partner into the rank-26
        unimodular lattice and package the embedding data."""
        from .borcherds import EmbeddedNS

        R = self.complement_lattice()
        qS = discriminant_form(self.lattice)
        qR = discriminant_form(R)
        glue = anti_isometry_search(qS, qR)
        if glue is None:
            raise AssertionError("no anti-isometry between the discriminant forms")
        big, embed_S, embed_R = overlattice_from_glue(self.lattice, R, glue)
        if abs(int(la.det(big.gram))) != 1:
            raise AssertionError("glued lattice is not unimodular")
        if signature(big) != (1, 25):
            raise AssertionError("glued lattice has wrong signature")
        return EmbeddedNS(
            surface=self.surface,
            big=big,
            embed_S=embed_S,
            embed_R=embed_R,
            R=R,
        )

    def probe_perturbation(self):
        """Deterministic regular perturbation on the complement side: the short
        root plus one plus-node per block (pairs nonzero with all 38 roots)."""
        v = [0] * 13
        v[0] = 1
        for i in range(6):
            v[1 + 2 * i] = 1
        return la.vec(v)


# ---------------------------------------------------------------------------
# Catalog and reproduction pipeline
# ---------------------------------------------------------------------------

ALL_INDICES = (1, 2, 3, 4, 5, 6)


def type_b_labels():
    for I in itertools.combinations(ALL_INDICES, 2):
        rest = [x for x in ALL_INDICES if x not in I]
        for J in itertools.combinations(rest, 2):
            yield (I, J)


def type_c_labels():
    for alpha in ALL_INDICES:
        for sign in "+-":
            yield (alpha, sign)


def type_d_labels():
    for sign in "+-":
        for i1 in ALL_INDICES:
            rest1 = [x for x in ALL_INDICES if x != i1]
            for pair1 in itertools.combinations(rest1, 2):
                rest2 = [x for x in rest1 if x not in pair1]
                for pair2 in itertools.combinations(rest2, 2):
                    (i6,) = [x for x in rest2 if x not in pair2]
                    yield (sign, (i1, pair1, pair2, i6))


def type_e_labels():
    for sign in "+-":
        for i1 in ALL_INDICES:
            rest = [x for x in ALL_INDICES if x != i1]
            for triple in itertools.combinations(rest, 3):
                pair = tuple(x for x in rest if x not in triple)
                I = (i1, triple, pair)
                for j in triple:
                    yield (sign, I, j)


def admissible_abf():
    for alpha in ALL_INDICES:
        for beta in ALL_INDICES:
            if beta == alpha:
                continue
            for F in itertools.combinations(
                [x for x in ALL_INDICES if x not in (alpha, beta)], 2
            ):
                yield (alpha, beta, F)


class Pipeline:
    """Staged reproduction of the worked computation; stages cache their data
    on the instance and, when an output directory is given, to JSON files so a
    run can resume."""

    def __init__(self, out_dir=None):
        self.out_dir = out_dir
        self.model = XfgModel()
        self._stages = {}

    # -- stages ------------------------------------------------------------

    def census(self):
        if "census" not in self._stages:
            table, rats = self.model.rats_census(14)
            self._stages["census"] = {"table": table, "count": len(rats)}
        return self._stages["census"]

    def embedding(self):
        if "embedding" not in self._stages:
            self._stages["embedding"] = self.model.build_embedding()
        return self._stages["embedding"]

    def initial_chamber(self):
        from . import borcherds as bc

        if "initial" not in self._stages:
            E = self.embedding()
            probe = bc.find_probe(E, [self.model.probe_perturbation()])
            weyl = bc.initial_weyl_vector(E, probe)
            chamber = bc.chamber_from_weyl(E, weyl, self.model.surface.ample)
            self._stages["initial"] = (probe, weyl, chamber)
        return self._stages["initial"]

    def walk(self):
        from . import borcherds as bc

        if "walk" not in self._stages:
            E = self.embedding()
            _probe, _weyl, D0 = self.initial_chamber()
            M = self.model.aux_group()
            self._stages["walk"] = bc.borcherds_walk(E, D0, symmetry=M)
        return self._stages["walk"]

    def catalog(self):
        """Generator catalog of the five types, built from one seed per type
        and transported around by the auxiliary symmetry group (conjugation),
        which is exact because the involution of a polarization h is canonical
        in h and translations transform with the fibration data."""
        if "catalog" in self._stages:
            return self._stages["catalog"]
        from . import mordell_weil as mw

        m = self.model
        S = m.surface
        entries = []  # (tag, label, Isometry)
        entries.append(("a", None, m.cover_involution()))

        def conjugates(seed_label, seed_iso, labels, transform_label):
            """Transport seed_iso over all labels by symmetry conjugation."""
            out = {seed_label: seed_iso}
            for g_sym, perm, swapped in self._sym_with_data():
                lbl = transform_label(perm, swapped, seed_label)
                if lbl not in out:
                    out[lbl] = g_sym.inverse() * seed_iso * g_sym
                if len(out) == len(labels):
                    break
            missing = [l for l in labels if l not in out]
            if missing:
                raise AssertionError(f"conjugation did not reach labels: {missing[:3]}")
            return out

        # type (b)
        seed_b = ((1, 2), (3, 4))
        iso_b = S.involution_of_polarization(m.polarization_pair(*seed_b))
        labels_b = list(type_b_labels())
        got_b = conjugates(seed_b, iso_b, labels_b, _transform_b)
        for lbl in labels_b:
            entries.append(("b", lbl, got_b[lbl]))
        # type (c)
        seed_c = (1, "+")
        iso_c = S.involution_of_polarization(m.polarization_alpha(*seed_c))
        labels_c = list(type_c_labels())
        got_c = conjugates(seed_c, iso_c, labels_c, _transform_c)
        for lbl in labels_c:
            entries.append(("c", lbl, got_c[lbl]))
        # type (d)
        seed_d = ("+", (1, (2, 3), (4, 5), 6))
        iso_d = S.involution_of_polarization(m.polarization_sigma_j(*seed_d))
        labels_d = list(type_d_labels())
        got_d = conjugates(seed_d, iso_d, labels_d, _transform_d)
        for lbl in labels_d:
            entries.append(("d", lbl, got_d[lbl]))
        # type (e)
        seed_e = ("+", (1, (2, 3, 4), (5, 6)), 2)
        f, z = m.fibration_classes(seed_e[0], seed_e[1])
        fib = mw.build_fibration(S, f, z)
        iso_e = fib.translation_isometry(m.exc[(seed_e[2], seed_e[0])])
        labels_e = list(type_e_labels())
        got_e = conjugates(seed_e, iso_e, labels_e, _transform_e)
        for lbl in labels_e:
            entries.append(("e", lbl, got_e[lbl]))
        self._stages["catalog"] = entries
        return entries

    def _sym_with_data(self):
        """Symmetry elements with their permutation data: (isometry, perm, swapped)."""
        if "symdata" not in self._stages:
            from itertools import permutations

            m = self.model
            swap = m.swap_isometry()
            data = []
            for perm in permutations(range(1, 7)):
                base = m.permutation_isometry(perm)
                pd = {i + 1: perm[i] for i in range(6)}
                data.append((base, pd, False))
                data.append((base * swap, pd, True))
            self._stages["symdata"] = data
        return self._stages["symdata"]

    def catalog_validation(self):
        """Criterion-5 style validation of every catalog element."""
        if "validation" in self._stages:
            return self._stages["validation"]
        m = self.model
        S = m.surface
        counts = {"a": 0, "b": 0, "c": 0, "d": 0, "e": 0}
        for tag, _lbl, g in self.catalog():
            counts[tag] += 1
            if tag in "abcd":
                if not (g * g).is_identity():
                    raise AssertionError(f"type ({tag}) element is not an involution")
            else:
                if g.order(cap=24) is not None:
                    raise AssertionError("type (e) element has finite small order")
            if not S.aut_membership(g):
                raise AssertionError(f"type ({tag}) element fails membership")
        self._stages["validation"] = counts
        return counts

    def identity_check(self):
        """Equation g_{a b F} = g'_{sigma I beta} g''_{sigma J} for both signs,
        and the chamber mapping of the product."""
        if "identity" in self._stages:
            return self._stages["identity"]
        got_d = {lbl: g for tag, lbl, g in self.catalog() if tag == "d"}
        got_e = {lbl: g for tag, lbl, g in self.catalog() if tag == "e"}
        walkres = self.walk()
        chamber_map = self._rep_chambers()
        m = self.model
        L = m.lattice
        prim = lambda x: tuple(la.primitive_int_vector(la.vec_mat(x, L.gram)))
        checked = 0
        for alpha, beta, F in admissible_abf():
            K = tuple(x for x in ALL_INDICES if x not in (alpha, beta) and x not in F)
            I_p = (alpha, tuple(sorted(K + (beta,))), F)
            J_p = (beta, K, F, alpha)
            I_m = (alpha, tuple(sorted(F + (beta,))), K)
            J_m = (beta, F, K, alpha)
            lhs = got_e[("+", I_p, beta)] * got_d[("+", J_p)]
            rhs = got_e[("-", I_m, beta)] * got_d[("-", J_m)]
            if lhs.matrix != rhs.matrix:
                raise AssertionError(f"product identity fails at {(alpha, beta, F)}")
            # chamber mapping: g maps the beta-representative onto the chamber
            # across the u-wall of the alpha-representative
            wall = prim(m.wall_vector_u(alpha, beta, F))
            adj_walls = self._adjacent_wallset(alpha, wall)
            from .borcherds import _image_wall_set

            img = _image_wall_set(m.surface, lhs, chamber_map[beta])
            if img != adj_walls:
                raise AssertionError(f"chamber mapping fails at {(alpha, beta, F)}")
            checked += 2
        self._stages["identity"] = checked
        return checked

    def _rep_chambers(self):
        """Map alpha -> the representative chamber containing the alpha data."""
        if "repmap" in self._stages:
            return self._stages["repmap"]
        walkres = self.walk()
        m = self.model
        L = m.lattice
        prim = lambda x: tuple(la.primitive_int_vector(la.vec_mat(x, L.gram)))
        out = {}
        for rep in walkres.representatives[1:]:
            # identify alpha: the missing exceptional walls are those of alpha
            walls = set(rep.walls)
            for alpha in ALL_INDICES:
                e_plus = prim(m.exc[(alpha, "+")])
                if e_plus not in walls:
                    out[alpha] = rep
                    break
        if len(out) != 6:
            raise AssertionError("could not identify the six secondary representatives")
        self._stages["repmap"] = out
        return out

    def _adjacent_wallset(self, alpha, wall):
        """Wall set of the chamber across `wall` of the alpha-representative."""
        walkres = self.walk()
        reps = walkres.representatives
        rep = self._rep_chambers()[alpha]
        idx = reps.index(rep)
        result = walkres.transporter_map().get((idx, wall))
        if result is None:
            raise AssertionError("wall has no walk result")
        g, target = result
        from .borcherds import _image_wall_set

        return _image_wall_set(self.model.surface, g.inverse(), reps[target])

    def wall_label(self, wall):
        """Pairings of a wall row with the spanning classes, as a dict."""
        m = self.model
        pi = la.vec(wall)
        prof = {"line": la.dot(m.line, pi)}
        for key, e in m.exc.items():
            prof[key] = la.dot(e, pi)
        return prof

    def transporter_witnesses(self):
        """Re-derive every inner-wall transporter as the catalog element the
        construction attaches to that wall class, and verify its chamber map.

        This is the computational containment step: the walk generators all lie
        in the group generated by the catalog.
        """
        if "witnesses" in self._stages:
            return self._stages["witnesses"]
        from .borcherds import _image_wall_set

        m = self.model
        S = m.surface
        L = m.lattice
        walkres = self.walk()
        reps = walkres.representatives
        tmap = walkres.transporter_map()
        got_b = {lbl: g for tag, lbl, g in self.catalog() if tag == "b"}
        got_c = {lbl: g for tag, lbl, g in self.catalog() if tag == "c"}
        repmap = self._rep_chambers()
        alpha_of = {id(rep): a for a, rep in repmap.items()}
        GS_inv = la.inverse(L.gram)
        checked = 0

        def adj_walls(idx, wall):
            g, target = tmap[(idx, wall)]
            return _image_wall_set(S, g.inverse(), reps[target])

        for idx, rep in enumerate(reps):
            is_base = idx == 0
            alpha = None if is_base else alpha_of.get(id(rep))
            if not is_base and alpha is None:
                raise AssertionError("unidentified representative")
            for wall in rep.walls:
                if (idx, wall) not in tmap:
                    continue  # outer
                v = la.vec_mat(la.vec(wall), GS_inv)
                n = la.dot(v, la.vec(wall))
                prof = self.wall_label(wall)
                target_walls = adj_walls(idx, wall)
                if is_base and n == Fraction(-3, 2):
                    # crossing lands directly on a secondary representative
                    a2 = next(i for i in ALL_INDICES if prof[(i, "+")] == 1)
                    if target_walls != repmap[a2].walls:
                        raise AssertionError("crossing does not land on its representative")
                elif is_base:
                    I = tuple(i for i in ALL_INDICES if prof[(i, "+")] == 1)
                    J = tuple(i for i in ALL_INDICES if prof[(i, "-")] == 1)
                    g = got_b[(I, J)]
                    if _image_wall_set(S, g, rep) != target_walls:
                        raise AssertionError(f"pair involution fails at wall {(I, J)}")
                elif n == Fraction(-3, 2) and prof["line"] < 0:
                    if target_walls != reps[0].walls:
                        raise AssertionError("back wall does not return to the base chamber")
                elif n == Fraction(-3, 2):
                    sign = "+" if prof[(alpha, "+")] == 2 else "-"
                    g = got_c[(alpha, sign)]
                    if _image_wall_set(S, g, rep) != target_walls:
                        raise AssertionError(f"alpha involution fails at {(alpha, sign)}")
                elif n == Fraction(-2, 3):
                    plus = tuple(i for i in ALL_INDICES if prof[(i, "+")] == 1)
                    minus = tuple(i for i in ALL_INDICES if prof[(i, "-")] == 1)
                    if alpha in plus:
                        sign = "+"
                        A = plus
                        F = minus
                        g = got_b[(tuple(sorted(A)), tuple(sorted(F)))]
                    else:
                        sign = "-"
                        A = minus
                        F = plus
                        g = got_b[(tuple(sorted(F)), tuple(sorted(A)))]
                    beta = next(i for i in A if i != alpha)
                    if _image_wall_set(S, g, repmap[beta]) != target_walls:
                        raise AssertionError(f"pair involution fails at {(A, F, sign)}")
                elif n == Fraction(-1, 6):
                    continue  # handled by the product-identity stage
                else:
                    raise AssertionError(f"unclassified inner wall with n = {n}")
                checked += 1
        self._stages["witnesses"] = checked
        return checked

    def transitivity(self):
        """Connectivity of the generator action on the 29 named curve classes."""
        if "transitivity" in self._stages:
            return self._stages["transitivity"]
        m = self.model
        named = {}
        for key in sorted(m.exc):
            named[tuple(m.exc[key])] = f"e{key[0]}{key[1]}"
        for s in "+-":
            named[tuple(m.conic[s])] = f"conic{s}"
        for key in sorted(m.lines_through):
            named[tuple(m.lines_through[key])] = f"l{key[0]}{key[1]}"
        verts = list(named)
        index = {v: i for i, v in enumerate(verts)}
        adj = {i: set() for i in range(len(verts))}
        for _tag, _lbl, g in self.catalog():
            for v in verts:
                img = tuple(g.apply(v))
                j = index.get(img)
                if j is not None and j != index[v]:
                    adj[index[v]].add(j)
                    adj[j].add(index[v])
        seen = {0}
        stack = [0]
        while stack:
            x = stack.pop()
            for y in adj[x]:
                if y not in seen:
                    seen.add(y)
                    stack.append(y)
        connected = len(seen) == len(verts)
        self._stages["transitivity"] = {"vertices": len(verts), "connected": connected}
        return self._stages["transitivity"]

    def wall_tables(self):
        """Orbit decompositions of the walls of the representatives under the
        symmetry stabilizers, with their (n, a, h) data."""
        if "tables" in self._stages:
            return self._stages["tables"]
        from . import borcherds as bc

        walkres = self.walk()
        m = self.model
        M = self.model.aux_group()
        out = []
        reps = [walkres.representatives[0]]
        reps.append(self._rep_chambers()[1])
        for rep in reps:
            stab = [g for g in M if bc._image_wall_set(m.surface, g, rep) == rep.walls]
            orbits = bc._wall_orbits(m.surface, rep, stab)
            rows = []
            for orbit in orbits:
                w = orbit[0]
                n, a, h = bc.wall_invariants(
                    m.surface, w, rep.weyl, self.embedding() if rep.weyl is not None else None,
                    m.line,
                )
                rows.append({"size": len(orbit), "n": str(n), "a": str(a), "h": str(h)})
            rows.sort(key=lambda r: (r["size"], r["n"], r["h"]))
            out.append(rows)
        self._stages["tables"] = out
        return out

    def report(self):
        census = self.census()
        walkres = self.walk()
        counts = self.catalog_validation()
        identity = self.identity_check()
        witnesses = self.transporter_witnesses()
        trans = self.transitivity()
        tables = self.wall_tables()
        return {
            "census": {str(k): v for k, v in census["table"].items()},
            "representatives": len(walkres.representatives),
            "walls_per_rep": [r.wall_count() for r in walkres.representatives],
            "stabilizer_order": len(walkres.stabilizer),
            "outer_walls": len(walkres.outer_walls),
            "transporters": len(walkres.transporters),
            "involutions": counts["a"] + counts["b"] + counts["c"] + counts["d"],
            "infinite_order": counts["e"],
            "identity_checks": identity,
            "witness_checks": witnesses,
            "transitive": trans["connected"],
            "wall_tables": tables,
        }


def _apply_perm_sign(perm, swapped, idx, sign):
    new_idx = perm[idx]
    new_sign = sign if not swapped else ("-" if sign == "+" else "+")
    return new_idx, new_sign


def _transform_b(perm, swapped, label):
    (I, J) = label
    I2 = tuple(sorted(perm[i] for i in I))
    J2 = tuple(sorted(perm[j] for j in J))
    return (I2, J2) if not swapped else (J2, I2)


def _transform_c(perm, swapped, label):
    alpha, sign = label
    a2 = perm[alpha]
    s2 = sign if not swapped else ("-" if sign == "+" else "+")
    return (a2, s2)


def _transform_d(perm, swapped, label):
    sign, (i1, p1, p2, i6) = label
    s2 = sign if not swapped else ("-" if sign == "+" else "+")
    return (
        s2,
        (
            perm[i1],
            tuple(sorted(perm[i] for i in p1)),
            tuple(sorted(perm[i] for i in p2)),
            perm[i6],
        ),
    )


def _transform_e(perm, swapped, label):
    sign, (i1, triple, pair), j = label
    s2 = sign if not swapped else ("-" if sign == "+" else "+")
    return (
        s2,
        (perm[i1], tuple(sorted(perm[i] for i in triple)), tuple(sorted(perm[i] for i in pair))),
        perm[j],
    )
