"""Jacobian fibrations on a marked Neron-Severi lattice: fiber configurations,
section classes, the height pairing, and translation isometries.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from fractions import Fraction

from . import ade, linalg as la
from .enumeration import ShellQuery, ShellSolver, short_vectors
from .kthree import GeometryError, K3Surface
from .lattice import Isometry, saturation


class FibrationError(ValueError):
    pass


@dataclass
class JacobianFibration:
    surface: K3Surface
    fiber: tuple
    zero_section: tuple
    config: ade.ADEConfig
    mw_rank: int
    torsion_order: int
    u_basis: tuple           # lifts of a basis of the free quotient
    trivial_basis: tuple     # fiber, zero section, then the component classes
    _proj_cache: dict = field(default_factory=dict)

    @property
    def lattice(self):
        return self.surface.lattice

    # -- section classes ------------------------------------------------------

    def horizontal_part(self, v):
        """Projection of v to the orthogonal complement of span(fiber, zero)."""
        f, z = self.fiber, self.zero_section
        L = self.lattice
        vf, vz = L.pairing(v, f), L.pairing(v, z)
        # alpha*f + beta*z with <.,f> = vf, <.,z> = vz
        beta = vf
        alpha = vz + 2 * vf
        return la.sub(la.vec(v), la.add(la.scale(f, alpha), la.scale(z, beta)))

    def component_residues(self, v):
        """Per component: the reduced node j with v|_comp = gamma_j mod roots."""
        L = self.lattice
        out = []
        for comp in self.config.components:
            pair_row = tuple(L.pairing(v, c) for c in comp.simple_roots)
            G = ade.component_lattice(comp, self.surface.pairing)
            coords = la.solve_right(G.gram, pair_row)
            j = ade.residue_node(comp, self.surface.pairing, coords)
            if j is None:
                raise FibrationError(
                    "restriction matches no reduced-node dual weight (invariant violation)"
                )
            out.append((comp, j, coords))
        return out

    def section_class(self, v, validate=False):
        """The curve class of the section representing v modulo the trivial lattice."""
        L = self.lattice
        v = la.vec(v)
        if not L.contains(v):
            raise FibrationError("section_class requires a lattice vector")
        vp = self.horizontal_part(v)
        correction = la.zeros(L.rank)
        nodes = []
        for comp, j, coords in self.component_residues(vp):
            weights = ade.dual_weights(comp, self.surface.pairing)
            alpha = la.sub(coords, weights[j])
            if not la.is_integral_vec(alpha):
                raise FibrationError("non-integral component correction (invariant violation)")
            for a, root in zip(alpha, comp.simple_roots):
                if a:
                    correction = la.add(correction, la.scale(root, a))
            nodes.append((comp, j))
        vpp = la.sub(vp, correction)
        t = -L.norm(vpp) / 2 if L.norm(vpp) % 2 == 0 else None
        if t is None:
            raise FibrationError("horizontal part has odd norm (invariant violation)")
        s = la.add(la.add(la.scale(self.fiber, t), self.zero_section), vpp)
        if L.pairing(s, self.fiber) != 1 or L.norm(s) != -2 or not L.contains(s):
            raise FibrationError("assembled section class fails its invariants")
        if validate and not self.surface.is_rat_class(s):
            raise FibrationError("assembled section class is not a curve class")
        return s, tuple(nodes)

    # -- heights ----------------------------------------------------------------

    def _trivial_proj(self, v):
        """Projection of v onto the span of the trivial sublattice."""
        key = tuple(v)
        hit = self._proj_cache.get(key)
        if hit is not None:
            return hit
        B = self.trivial_basis
        GB = self._trivial_gram()
        pair_row = tuple(self.lattice.pairing(v, b) for b in B)
        coefs = la.vec_mat(pair_row, GB)
        proj = la.zeros(self.lattice.rank)
        for c, b in zip(coefs, B):
            if c:
                proj = la.add(proj, la.scale(b, c))
        self._proj_cache[key] = proj
        return proj

    def _trivial_gram(self):
        hit = self._proj_cache.get("_gram_inv")
        if hit is None:
            B = self.trivial_basis
            G = tuple(tuple(self.lattice.pairing(u, w) for w in B) for u in B)
            hit = la.inverse(la.mat(G))
            self._proj_cache["_gram_inv"] = hit
        return hit

    def height_pairing(self, v, w):
        """Positive-definite pairing on the free quotient via orthogonal projection."""
        sv, _ = self.section_class(v)
        sw, _ = self.section_class(w)
        pv = la.sub(sv, self._trivial_proj(sv))
        pw = la.sub(sw, self._trivial_proj(sw))
        return -self.lattice.pairing(pv, pw)

    def height_gram(self, vectors=None):
        vs = vectors if vectors is not None else self.u_basis
        return la.mat(tuple(tuple(self.height_pairing(v, w) for w in vs) for v in vs))

    def count_by_height(self, budget):
        """Exact counts of nonzero group elements by height, up to the budget."""
        if self.torsion_order != 1:
            raise FibrationError("height census implemented for torsion-free groups")
        H = self.height_gram()
        solver = ShellSolver(H)
        table = {}
        for c in solver.solve(Fraction(budget), lo=Fraction(0)):
            if all(e == 0 for e in c):
                continue
            h = la.gram_pairing(H, c, c)
            table[h] = table.get(h, 0) + 1
        return table

    # -- translations ------------------------------------------------------------

    def translation_isometry(self, v, validate_membership=False):
        """The isometry of the ambient lattice induced by translation by s(v)."""
        L = self.lattice
        sv, nodes = self.section_class(v)
        span_rows = [self.fiber, self.zero_section]
        image_rows = [self.fiber, sv]
        for u in self.u_basis:
            su, _ = self.section_class(u)
            su_v, _ = self.section_class(la.add(la.vec(u), la.vec(v)))
            span_rows.append(su)
            image_rows.append(su_v)
        for comp, j in nodes:
            perm = comp.translation_permutation(j)
            zero_class = ade.affine_zero_class(comp, self.fiber)
            classes = {0: zero_class}
            for node in range(1, comp.l + 1):
                classes[node] = comp.root(node)
            for node in range(1, comp.l + 1):
                span_rows.append(classes[node])
                image_rows.append(classes[perm[node]])
        M_span = la.mat(span_rows)
        M_img = la.mat(image_rows)
        sol = la.mat_mul(la.inverse(M_span), M_img)
        if not la.is_integral_mat(sol):
            raise FibrationError("translation matrix is not integral (invariant violation)")
        g = Isometry(L, sol)
        if g.apply(self.fiber) != la.vec(self.fiber):
            raise FibrationError("translation does not fix the fiber class")
        if validate_membership and not self.surface.aut_membership(g):
            raise FibrationError("translation fails the automorphism membership test")
        return g


def build_fibration(surface: K3Surface, fiber, zero_section) -> JacobianFibration:
    """Assemble the full fibration record from the fiber and zero-section classes."""
    L = surface.lattice
    f, z = la.vec(fiber), la.vec(zero_section)
    if L.norm(f) != 0 or L.pairing(f, z) != 1 or L.norm(z) != -2:
        raise FibrationError("need <f,f>=0, <f,z>=1, <z,z>=-2")
    if not (L.contains(f) and L.contains(z)):
        raise FibrationError("fiber and zero section must be lattice vectors")
    if not surface.is_nef_isotropic(f):
        raise FibrationError("fiber class is not nef")
    if not surface.is_rat_class(z):
        raise FibrationError("zero section is not a curve class")
    roots = short_vectors(
        ShellQuery(L, Fraction(-2), ((f, Fraction(0)), (z, Fraction(0))))
    )
    theta = [
        r
        for r in roots
        if L.pairing(r, surface.ample) > 0 and surface.is_rat_class(r)
    ]
    config = ade.classify(theta, surface.pairing, positive=surface.ample)
    if set(map(tuple, config.all_roots())) != set(map(tuple, theta)):
        raise FibrationError("fiber configuration classes are not a simple system")
    rho_total = config.total_rank
    m = L.rank - 2 - rho_total
    trivial = [f, z] + [la.vec(r) for r in config.all_roots()]
    sat = saturation(L, la.mat(trivial))
    # torsion = index of the trivial lattice in its saturation
    sub_in_sat = []
    for t in trivial:
        c = la.solve_linear_system(la.transpose(la.mat(sat)), t)
        sub_in_sat.append(c)
    torsion = abs(int(la.det(la.mat(sub_in_sat))))
    u_basis = _free_quotient_lifts(L.rank, trivial)
    if len(u_basis) != m:
        raise FibrationError("free-quotient rank mismatch")
    return JacobianFibration(
        surface=surface,
        fiber=f,
        zero_section=z,
        config=config,
        mw_rank=m,
        torsion_order=torsion,
        u_basis=tuple(u_basis),
        trivial_basis=tuple(trivial),
    )


def _free_quotient_lifts(n, trivial_rows):
    """Deterministic lifts of a basis of Z^n / (trivial + torsion) from the
    Smith transform of the generator stack."""
    A = [tuple(int(e) for e in row) for row in trivial_rows]
    U, S, V = la.smith_normal_form(A)
    k = len(A)
    r = sum(1 for i in range(min(k, n)) if S[i][i] != 0)
    Vinv = la.inverse(la.mat(V))
    return [la.vec(Vinv[i]) for i in range(r, n)]
