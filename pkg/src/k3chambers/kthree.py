"""Geometric tests on a marked Neron-Severi lattice: ampleness, nefness,
rational-curve classes, contracted configurations, norm-2 analysis and the
involutions attached to degree-2 polarizations.
"""

from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction
from itertools import product

from . import ade, linalg as la
from .enumeration import (
    EnumerationError,
    SepFinder,
    ShellQuery,
    isotropic_degree_one,
    minus_two_with_degree,
    sep,
    short_vectors,
)
from .lattice import (
    IntegralLattice,
    Isometry,
    LatticeError,
    discriminant_form,
    is_pm_one_on_disc,
    signature,
)


class GeometryError(ValueError):
    pass


class K3Surface:
    """Even hyperbolic lattice with a marked ample class and a rational-curve cache.

    The cache is grow-only: entries record certified membership answers and may be
    seeded in bulk by the census machinery.
    """

    def __init__(self, lattice: IntegralLattice, ample, check=True):
        self.lattice = lattice
        self.ample = la.vec(ample)
        self._rats_cache = {}
        self._disc_form = None
        if check:
            if not lattice.is_even():
                raise GeometryError("Neron-Severi lattice must be even")
            if signature(lattice) != (1, lattice.rank - 1):
                raise GeometryError("Neron-Severi lattice must be hyperbolic")
            if lattice.norm(self.ample) <= 0:
                raise GeometryError("ample class must have positive norm")
            if self.roots_orthogonal_to(self.ample):
                raise GeometryError("marked class is not ample: orthogonal roots exist")

    # -- plumbing ----------------------------------------------------------

    def pairing(self, u, v):
        return self.lattice.pairing(la.vec(u), la.vec(v))

    def norm(self, v):
        return self.lattice.norm(la.vec(v))

    def disc_form(self):
        if self._disc_form is None:
            self._disc_form = discriminant_form(self.lattice)
        return self._disc_form

    def roots_orthogonal_to(self, v):
        """Roots(v^perp cap S) for positive-norm v."""
        return short_vectors(
            ShellQuery(self.lattice, Fraction(-2), ((la.vec(v), Fraction(0)),))
        )

    def seed_rats_cache(self, members, non_members=()):
        for r in members:
            self._rats_cache[tuple(la.vec(r))] = True
        for r in non_members:
            self._rats_cache[tuple(la.vec(r))] = False

    # -- cone tests (positive-norm classes) --------------------------------

    def is_positive_cone(self, v):
        v = la.vec(v)
        if self.norm(v) <= 0:
            raise GeometryError("positive-cone test requires positive norm")
        return self.pairing(self.ample, v) > 0

    def is_nef(self, v):
        v = la.vec(v)
        if self.norm(v) <= 0:
            raise GeometryError("use is_nef_isotropic for norm <= 0 classes")
        if not self.is_positive_cone(v):
            return False
        return not sep(self.lattice, self.ample, v)

    def is_ample(self, v):
        if not self.is_nef(v):
            return False
        return not self.roots_orthogonal_to(v)

    def is_nef_isotropic(self, f):
        f = la.vec(f)
        if self.norm(f) != 0:
            raise GeometryError("is_nef_isotropic requires an isotropic class")
        if all(e == 0 for e in f):
            raise GeometryError("is_nef_isotropic requires a nonzero class")
        af = self.pairing(self.ample, f)
        if af <= 0:
            return False
        shifted = la.add(self.ample, la.scale(f, af))
        return not sep(self.lattice, shifted, self.ample)

    def make_ample(self, h, correction, cap=64):
        h, correction = la.vec(h), la.vec(correction)
        for m in range(1, cap + 1):
            v = la.add(la.scale(h, m), correction)
            if self.norm(v) > 0 and self.is_ample(v):
                return v
        raise GeometryError(f"no ample class of the form m*h + correction for m <= {cap}")

    # -- automorphism membership -------------------------------------------

    def aut_membership(self, g: Isometry):
        """Reduced period condition (+-1 on A(S)) plus nef-cone preservation."""
        image = g.apply(self.ample)
        if self.pairing(self.ample, image) <= 0:
            return False
        if not is_pm_one_on_disc(self.disc_form(), g):
            return False
        return SepFinder(self.lattice, self.ample, image).is_empty()

    # -- rational-curve classes ---------------------------------------------

    def is_rat_class(self, r, use_cache=True):
        """Membership of a (-2)-class in the set of smooth-rational-curve classes.

        Projection criterion: with a' the orthogonal projection of the ample class
        to the mirror of r (scaled to stay rational), r is a curve class iff the
        only roots orthogonal to a' are +-r and nothing separates a' from the ample
        class.
        """
        r = la.vec(r)
        if self.norm(r) != -2:
            raise GeometryError("curve-class test requires self-pairing -2")
        ar = self.pairing(self.ample, r)
        if ar <= 0:
            raise GeometryError("curve-class test requires positive ample degree")
        key = tuple(r)
        if use_cache and key in self._rats_cache:
            return self._rats_cache[key]
        shifted = la.add(self.ample, la.scale(r, Fraction(ar, 2)))
        orth = self.roots_orthogonal_to(shifted)
        ok = set(map(tuple, orth)) == {tuple(r), tuple(la.neg(r))}
        if ok:
            ok = not sep(self.lattice, shifted, self.ample)
        self._rats_cache[key] = ok
        return ok

    def vinberg_rats_up_to(self, degree_budget):
        """All curve classes r with <r, ample> <= budget via the walls-of-the-nef-cone
        recursion: r is accepted iff it pairs >= 0 with every accepted class of
        smaller ample degree.  Independent of is_rat_class; used as a cross-check.
        """
        accepted = []
        for d in range(1, degree_budget + 1):
            shell = minus_two_with_degree(self.lattice, self.ample, d)
            for r in shell:
                if all(self.pairing(r, s) >= 0 for s in accepted):
                    accepted.append(r)
        return accepted

    # -- contracted configurations and norm-2 classes ------------------------

    def contracted_configuration(self, h):
        """ADE configuration of curve classes orthogonal to a nef class h."""
        h = la.vec(h)
        roots = self.roots_orthogonal_to(h)
        members = [r for r in roots if self.pairing(self.ample, r) > 0 and self.is_rat_class(r)]
        return ade.classify(members, self.pairing, positive=self.ample)

    def classify_norm2(self, h):
        """Branch analysis of a nef class of norm 2: base-point-free or pencil case."""
        h = la.vec(h)
        if self.norm(h) != 2:
            raise GeometryError("classify_norm2 requires a class of norm 2")
        if not self.is_nef(h):
            raise GeometryError("classify_norm2 requires a nef class")
        degree_one = isotropic_degree_one(self.lattice, h)
        if not degree_one:
            config = self.contracted_configuration(h)
            return Polarization(h=h, branch_config=config, surface=self)
        found = None
        for e in degree_one:
            if self.pairing(self.ample, e) <= 0:
                continue
            z = la.sub(h, la.scale(e, 2))
            if self.is_nef_isotropic(e) and self.is_rat_class(z):
                if found is not None:
                    raise GeometryError("pencil case produced two base decompositions")
                found = (e, z)
        if found is None:
            raise GeometryError("pencil case found no nef fiber class (invariant violation)")
        return Pencil(fiber=found[0], zero_section=found[1])

    def involution_of_polarization(self, h, config=None):
        """The deck involution of a degree-2 polarization, as an isometry.

        Fixes h; acts as +1 on the span of h and the deck-invariant combinations of
        the contracted configuration, as -1 on the orthogonal complement.  The deck
        action per component is a diagram involution selected by validation.
        """
        h = la.vec(h)
        if config is None:
            config = self.contracted_configuration(h)
        choices = []
        for comp in config.components:
            invs = ade.diagram_involutions(comp, self.pairing)
            if comp.letter == "A":
                reversal = {i: comp.l + 1 - i for i in range(1, comp.l + 1)}
                preferred = [reversal]
            elif comp.letter == "D" and comp.l == 4:
                preferred = [{i: i for i in range(1, 5)}]
            else:
                preferred = []
            rest = [m for m in invs if m not in preferred]
            choices.append(preferred + rest)
        valid = []
        for combo in product(*choices) if choices else [()]:
            g = self._involution_from_deck(h, config, combo)
            if g is None:
                continue
            if self.aut_membership(g):
                valid.append(g)
                break  # defaults are ordered first; first valid wins
        if not valid:
            raise GeometryError(
                "no deck action yields an integral involution passing the "
                f"membership test (components {config.type_name})"
            )
        return valid[0]

    def _involution_from_deck(self, h, config, deck_maps):
        plus_basis = [la.vec(h)]
        for comp, mapping in zip(config.components, deck_maps):
            seen = set()
            for node in range(1, comp.l + 1):
                img = mapping[node]
                key = (min(node, img), max(node, img))
                if key in seen:
                    continue
                seen.add(key)
                vsum = comp.root(node) if img == node else la.add(comp.root(node), comp.root(img))
                plus_basis.append(la.vec(vsum))
        B = la.mat(plus_basis)
        if la.rank(B) != len(plus_basis):
            return None
        GB = tuple(tuple(self.pairing(u, v) for v in B) for u in B)
        try:
            GB_inv = la.inverse(la.mat(GB))
        except ValueError:
            return None
        n = self.lattice.rank
        rows = []
        for i in range(n):
            e = self.lattice.basis_vector(i)
            pair_row = tuple(self.pairing(e, b) for b in B)
            coefs = la.vec_mat(pair_row, GB_inv)
            proj = la.zeros(n)
            for c, b in zip(coefs, B):
                proj = la.add(proj, la.scale(b, c))
            rows.append(la.sub(la.scale(proj, 2), e))
        M = la.mat(rows)
        if not la.is_integral_mat(M):
            return None
        try:
            return Isometry(self.lattice, M)
        except LatticeError:
            return None


@dataclass(frozen=True)
class Polarization:
    h: tuple
    branch_config: ade.ADEConfig
    surface: K3Surface

    @property
    def branch_type(self):
        return self.branch_config.type_name

    def involution(self):
        return self.surface.involution_of_polarization(self.h, self.branch_config)


@dataclass(frozen=True)
class Pencil:
    fiber: tuple
    zero_section: tuple
