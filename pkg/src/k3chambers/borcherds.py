"""Chamber machinery for the rank-26 even unimodular lattice: Weyl vectors,
induced chambers on an embedded hyperbolic sublattice, adjacency, congruence
transporters, and the breadth-first walk that produces chamber representatives
and automorphism generators.
"""

from __future__ import annotations

import json
from dataclasses import dataclass, field
from fractions import Fraction
from math import gcd, isqrt

from . import linalg as la
from .enumeration import EnumerationError, SepFinder, ShellQuery, ShellSolver, short_vectors
from .kthree import K3Surface
from .lattice import IntegralLattice, Isometry, is_pm_one_on_disc, signature


class BorcherdsError(ValueError):
    pass


# ---------------------------------------------------------------------------
# Embedded Neron-Severi data
# ---------------------------------------------------------------------------

@dataclass
class EmbeddedNS:
    surface: K3Surface
    big: IntegralLattice          # even unimodular hyperbolic overlattice
    embed_S: tuple                # rows: S-basis in big coordinates
    embed_R: tuple                # rows: R-basis in big coordinates
    R: IntegralLattice
    _cache: dict = field(default_factory=dict)

    def __post_init__(self):
        S = self.surface.lattice
        GS = tuple(
            tuple(self.big.pairing(u, v) for v in self.embed_S) for u in self.embed_S
        )
        if la.mat(GS) != S.gram:
            raise BorcherdsError("embedding does not preserve the S pairing")
        GR = tuple(
            tuple(self.big.pairing(u, v) for v in self.embed_R) for u in self.embed_R
        )
        if la.mat(GR) != self.R.gram:
            raise BorcherdsError("embedding does not preserve the R pairing")
        for u in self.embed_S:
            for v in self.embed_R:
                if self.big.pairing(u, v) != 0:
                    raise BorcherdsError("S and R are not orthogonal in the big lattice")
        self._GS_inv = la.inverse(S.gram)
        self._GR_inv = la.inverse(self.R.gram)

    def to_big(self, s_coords):
        return la.vec_mat(la.vec(s_coords), self.embed_S)

    def r_to_big(self, r_coords):
        return la.vec_mat(la.vec(r_coords), self.embed_R)

    def proj_S(self, x):
        """S-coordinates of the orthogonal projection of x (big coords)."""
        pair = tuple(self.big.pairing(x, row) for row in self.embed_S)
        return la.vec_mat(pair, self._GS_inv)

    def proj_R(self, x):
        pair = tuple(self.big.pairing(x, row) for row in self.embed_R)
        return la.vec_mat(pair, self._GR_inv)

    # -- the finite set of complement-side fragments -------------------------

    def rho_set(self):
        """All rho in R-dual with -2 < <rho,rho> <= 0, with their glue data.

        Each entry: (rho, rho_norm, kappa, kappa_scaled, den) where kappa is an
        S-dual coset representative such that kappa + rho lifts into the big
        lattice and kappa_scaled = den * kappa is integral.  Precomputed once.
        """
        if "rho" in self._cache:
            return self._cache["rho"]
        GR_inv = self._GR_inv
        solver = ShellSolver(tuple(tuple(-e for e in row) for row in GR_inv))
        sols = solver.solve(Fraction(2), lo=Fraction(0))
        out = []
        for y in sols:
            rho = la.vec_mat(la.vec(y), GR_inv)
            norm = self.R.norm(rho)
            if norm <= -2:
                continue
            kappa = self._glue_partner(rho)
            if kappa is None:
                continue
            den = 1
            for e in kappa:
                d = Fraction(e).denominator
                from math import gcd as _g

                den = den * d // _g(den, d)
            kappa_num = tuple(int(Fraction(e) * den) for e in kappa)
            out.append((rho, norm, kappa, kappa_num, den))
        self._cache["rho"] = out
        return out

    def _glue_partner(self, rho):
        """S-side coset representative kappa with kappa + rho in the big lattice."""
        solver = self._cache.get("glue_solver")
        if solver is None:
            funcs = [la.vec_mat(row, self.big.gram) for row in self.embed_R]
            solver = la.AffineSolver(funcs)
            self._cache["glue_solver"] = solver
        targets = [self.R.pairing(rho, self.R.basis_vector(i)) for i in range(self.R.rank)]
        x0 = solver.solve(targets)
        if x0 is None:
            return None
        return self.proj_S(la.vec(x0))

    def lift_root(self, r_s, rho):
        """Big-lattice coordinates of r = r_S + rho; checks integrality."""
        x = la.add(self.to_big(r_s), self.r_to_big(rho))
        if not self.big.contains(x):
            raise BorcherdsError("root fragment does not lift to the big lattice")
        return x


# ---------------------------------------------------------------------------
# Chambers
# ---------------------------------------------------------------------------

class Chamber:
    """Induced chamber: Weyl vector, primitive wall rows, and certified points.

    Walls are stored as integer pairing rows: wall w pairs with an S-coordinate
    point y as plain dot(y, w).  Identity is wall-set equality.
    """

    def __init__(self, weyl, walls, interior, witnesses=None, lifts=None):
        self.weyl = la.vec(weyl) if weyl is not None else None
        self.walls = tuple(sorted(tuple(int(e) for e in w) for w in walls))
        self.interior = la.vec(interior)
        self.witnesses = witnesses or {}
        self.lifts = lifts or {}

    def __eq__(self, other):
        return isinstance(other, Chamber) and self.walls == other.walls

    def __hash__(self):
        return hash(self.walls)

    def wall_count(self):
        return len(self.walls)

    def fingerprint(self, surface):
        """G-invariant fingerprint: multiset of (norm, pairing-profile-hash)."""
        key = getattr(self, "_fp", None)
        if key is not None:
            return key
        GS_inv = _gram_inverse(surface.lattice)
        vecs = [la.vec_mat(la.vec(w), GS_inv) for w in self.walls]
        norms = [la.dot(v, la.vec(w)) for v, w in zip(vecs, self.walls)]
        profiles = []
        for i, v in enumerate(vecs):
            pairs = sorted(
                (norms[j], la.dot(v, la.vec(self.walls[j]))) for j in range(len(vecs))
            )
            profiles.append((norms[i], tuple(pairs)))
        self._fp = tuple(sorted(profiles))
        return self._fp

    def to_jsonable(self):
        return {
            "weyl": [str(e) for e in self.weyl] if self.weyl is not None else None,
            "walls": [[int(e) for e in w] for w in self.walls],
            "interior": [str(e) for e in self.interior],
            "witnesses": {
                ",".join(map(str, k)): [str(e) for e in v]
                for k, v in self.witnesses.items()
            },
            "lifts": {
                ",".join(map(str, k)): [[str(e) for e in r] for r in v]
                for k, v in self.lifts.items()
            },
        }

    @classmethod
    def from_jsonable(cls, data):
        frac = lambda s: Fraction(s)
        weyl = [frac(e) for e in data["weyl"]] if data["weyl"] else None
        walls = [tuple(w) for w in data["walls"]]
        interior = [frac(e) for e in data["interior"]]
        witnesses = {
            tuple(int(x) for x in k.split(",")): la.vec([frac(e) for e in v])
            for k, v in data["witnesses"].items()
        }
        lifts = {
            tuple(int(x) for x in k.split(",")): [la.vec([frac(e) for e in r]) for r in v]
            for k, v in data["lifts"].items()
        }
        return cls(weyl, walls, interior, witnesses, lifts)


def wall_invariants(surface, wall, weyl_big=None, embedded=None, line_class=None):
    """(n, a, h) data of a wall: self-pairing, Weyl pairing, line-class degree."""
    GS_inv = _gram_inverse(surface.lattice)
    v = la.vec_mat(la.vec(wall), GS_inv)
    n = la.dot(v, la.vec(wall))
    a_val = None
    if weyl_big is not None and embedded is not None:
        a_val = embedded.big.pairing(weyl_big, embedded.to_big(v))
    h_val = la.dot(line_class, la.vec(wall)) if line_class is not None else None
    return n, a_val, h_val


# ---------------------------------------------------------------------------
# Weyl vectors
# ---------------------------------------------------------------------------

def find_probe(embedded: EmbeddedNS, seed_vectors):
    """First vector of the form iota(ample) + r-perturbation satisfying the
    interior-point conditions (no orthogonal roots; nothing separating)."""
    a_big = embedded.to_big(embedded.surface.ample)
    for pert in seed_vectors:
        probe = la.add(a_big, embedded.r_to_big(pert))
        if embedded.big.norm(probe) <= 0:
            continue
        orth = short_vectors(
            ShellQuery(embedded.big, Fraction(-2), ((probe, Fraction(0)),))
        )
        if orth:
            continue
        if not SepFinder(embedded.big, a_big, probe).is_empty():
            continue
        return probe
    raise BorcherdsError("no probe found among the provided perturbations")


def initial_weyl_vector(embedded: EmbeddedNS, probe, max_level=8):
    """Weyl vector of the fundamental domain at the probe, by level search.

    Collects domain walls level by level (level = pairing with the probe),
    keeping roots not shielded by earlier ones; solves <w, r> = 1 on 26
    independent collected roots and verifies the solution on all of them.
    """
    big = embedded.big
    n = big.rank
    accepted = []
    for level in range(1, max_level + 1):
        shell = short_vectors(
            ShellQuery(big, Fraction(-2), ((la.vec(probe), Fraction(level)),))
        )
        for r in shell:
            if all(big.pairing(r, s) >= 0 for s in accepted):
                accepted.append(r)
        if len(accepted) >= n and la.rank(la.mat(accepted)) == n:
            break
    if la.rank(la.mat(accepted)) < n:
        raise BorcherdsError(
            "root collection stagnated before spanning; try another probe"
        )
    funcs = [la.vec_mat(r, big.gram) for r in accepted]
    aff = la.integral_affine_solutions(funcs, [1] * len(accepted))
    if aff is None:
        raise BorcherdsError("no integral Weyl vector solves the collected equations")
    w, kernel = aff
    if kernel:
        raise BorcherdsError("collected roots do not pin the Weyl vector")
    w = la.vec(w)
    if big.norm(w) != 0:
        raise BorcherdsError("solved Weyl vector is not isotropic")
    prim = la.primitive_int_vector(w)
    if tuple(w) != tuple(prim):
        raise BorcherdsError("solved Weyl vector is not primitive")
    for r in accepted:
        if big.pairing(w, r) != 1:
            raise BorcherdsError("Weyl vector fails the normalization on a wall root")
    return w


# ---------------------------------------------------------------------------
# Wall enumeration (induced chamber of a Weyl vector)
# ---------------------------------------------------------------------------

def chamber_from_weyl(embedded: EmbeddedNS, weyl, interior_hint=None):
    """The induced chamber of the Weyl vector: complete certified wall list."""
    candidates = _enumerate_fragments(embedded, weyl)
    return _assemble_chamber(embedded, weyl, interior_hint, candidates)


def _enumerate_fragments(embedded: EmbeddedNS, weyl):
    """All Leech-root S-fragments of the Weyl vector, grouped by signed
    primitive direction; values are the supporting big-lattice roots.

    The per-fragment loop is integer-scaled: dual cosets are carried with a
    common denominator and the offset algebra runs over scaled integers.
    """
    S = embedded.surface.lattice
    n = S.rank
    w_S = embedded.proj_S(weyl)
    w_R = embedded.proj_R(weyl)
    ns = la.dot(la.vec_mat(w_S, S.gram), w_S)
    if ns <= 0:
        raise BorcherdsError(
            "degenerate chamber: the S-projection of the Weyl vector is not "
            "positive; the chamber has no interior in the positive cone"
        )
    # fixed data per chamber
    w_func = la.vec_mat(w_S, S.gram)
    den = 1
    for e in w_func:
        d = Fraction(e).denominator
        den = den * d // gcd(den, d)
    w_func_int = tuple(int(Fraction(e) * den) for e in w_func)
    g = 0
    for e in w_func_int:
        g = gcd(g, e)
    aff = la.integral_affine_solutions([la.vec(w_func_int)], (g,))
    y_gen, kernel = aff
    y_gen = tuple(int(e) for e in y_gen)
    kernel_int = [tuple(int(e) for e in row) for row in kernel]
    G_int = [tuple(int(e) for e in row) for row in S.gram]
    KG = [  # kernel row times gram: functionals of the kernel basis
        tuple(sum(kr[i] * G_int[i][j] for i in range(n)) for j in range(n))
        for kr in kernel_int
    ]
    GK = tuple(
        tuple(sum(KG[a][j] * kernel_int[b][j] for j in range(n)) for b in range(len(kernel_int)))
        for a in range(len(kernel_int))
    )
    k = len(kernel_int)
    solver = ShellSolver(tuple(tuple(-e for e in row) for row in GK))
    GK_inv = la.inverse(la.mat(GK))
    det_GK = abs(int(la.det(la.mat(GK))))
    GK_adj = [
        tuple(int(GK_inv[a][b] * det_GK) for b in range(k)) for a in range(k)
    ]
    f_wR = la.vec_mat(w_R, embedded.R.gram)
    candidates = {}
    rho_entries = embedded.rho_set()
    gram_cols = _gram_cols(G_int, n)
    GK_adj_cols = [tuple(GK_adj[a][b] for a in range(k)) for b in range(k)]
    for rho, rho_norm, kappa, kappa_num, kden in rho_entries:
        beta = 1 - la.dot(f_wR, rho)
        # particular point: p = kappa + t * y_gen with <p, w_S> = beta
        beta_rem = beta * den - Fraction(_int_dot(kappa_num, w_func_int), kden)
        if beta_rem.denominator != 1:
            continue
        beta_rem = int(beta_rem)
        if g == 0:
            if beta_rem != 0:
                continue
            t = 0
        else:
            if beta_rem % g:
                continue
            t = beta_rem // g
        p_num = tuple(kappa_num[i] + kden * t * y_gen[i] for i in range(n))  # kden * p
        pair_scaled = tuple(_int_dot(p_num, KG[a]) for a in range(k))        # kden <p, k_a>
        off_num = tuple(_int_dot(pair_scaled, col) for col in GK_adj_cols)
        off_den = kden * det_GK
        p_norm = Fraction(_int_quad(p_num, G_int), kden * kden)
        off_quad = Fraction(_int_quad(off_num, GK), off_den * off_den)
        p_perp = p_norm - off_quad
        pos_target = p_perp - (Fraction(-2) - rho_norm)
        if pos_target < 0:
            continue
        offset = tuple(Fraction(e, off_den) for e in off_num)
        for c in solver.solve(pos_target, offset=offset):
            r_num = list(p_num)
            for ci, kb in zip(c, kernel_int):
                if ci:
                    for i in range(n):
                        r_num[i] += kden * ci * kb[i]
            row_num = tuple(_int_dot(r_num, col) for col in gram_cols)
            if any(e % kden for e in row_num):
                raise BorcherdsError("wall fragment is not in the dual lattice")
            pairing_row = tuple(e // kden for e in row_num)
            direction = _primitive_same_sign(pairing_row)
            r_s = tuple(Fraction(e, kden) for e in r_num)
            lift = embedded.lift_root(r_s, rho)
            candidates.setdefault(direction, []).append(lift)
    return candidates


def _int_dot(u, v):
    return sum(a * b for a, b in zip(u, v))


def _int_quad(u, M):
    total = 0
    for i, a in enumerate(u):
        if a:
            row = M[i]
            total += a * sum(b * row[j] for j, b in enumerate(u) if b)
    return total


def _gram_cols(G, n):
    return [tuple(G[i][j] for i in range(n)) for j in range(n)]


def _primitive_same_sign(row):
    """Primitive integer row in the same direction (never negated)."""
    prim = la.primitive_int_vector(row)
    for a, b in zip(prim, row):
        if b != 0:
            if (a > 0) != (b > 0):
                return tuple(-e for e in prim)
            return tuple(prim)
    return tuple(prim)


def _assemble_chamber(embedded, weyl, interior_hint, candidates):
    S = embedded.surface.lattice
    GS_inv = _gram_inverse(S)
    dirs = list(candidates)
    for d in dirs:
        if tuple(-e for e in d) in candidates:
            raise BorcherdsError(
                "opposite wall directions both present: chamber has no interior"
            )
    x0 = la.vec(interior_hint) if interior_hint is not None else None
    if x0 is None or any(la.dot(x0, la.vec(d)) <= 0 for d in dirs):
        slack, x0 = la.lp_max_slack([tuple(d) for d in dirs], [], S.rank)
        if slack is None or slack <= 0:
            raise BorcherdsError("chamber has no interior point (degenerate)")
        x0 = la.vec(x0)
        if la.dot(la.vec_mat(x0, S.gram), x0) <= 0:
            raise BorcherdsError(
                "interior search produced a non-positive point; pass a hint"
            )
    walls = []
    witnesses = {}
    for d in dirs:
        others = [e for e in dirs if e != d]
        witness = _facet_witness(S, GS_inv, x0, d, others)
        if witness is not None:
            walls.append(d)
            witnesses[d] = witness
    lifts = {d: candidates[d] for d in walls}
    return Chamber(weyl, walls, x0, witnesses, lifts)


def _facet_witness(S, GS_inv, x0, d, others):
    """A point of the mirror of d strictly inside all other candidate halfspaces
    and in the positive cone, or None when d supports no facet."""
    dv = la.vec_mat(la.vec(d), GS_inv)
    nd = la.dot(dv, la.vec(d))
    t = Fraction(la.dot(x0, la.vec(d)), nd)
    xw = la.sub(x0, la.scale(dv, t))
    # the straight projection always has positive norm; check other halfspaces
    if all(la.dot(xw, la.vec(e)) > 0 for e in others):
        return xw
    slack, y = la.lp_max_slack([tuple(e) for e in others], [tuple(d)], len(d))
    if slack is None or slack <= 0:
        return None
    # mix the LP witness toward the projection to restore positive norm exactly
    lam = Fraction(1, 2)
    for _ in range(64):
        z = la.add(la.scale(xw, lam), la.scale(la.vec(y), 1 - lam))
        if la.dot(la.vec_mat(z, S.gram), z) > 0 and all(
            la.dot(z, la.vec(e)) > 0 for e in others
        ):
            return z
        lam = (1 + lam) / 2
    raise BorcherdsError("facet witness mixing failed to converge")


# ---------------------------------------------------------------------------
# Adjacency
# ---------------------------------------------------------------------------

def adjacent_chamber(embedded: EmbeddedNS, chamber: Chamber, wall, budget=64):
    """The chamber across the given wall, by reflecting the Weyl vector.

    The Weyl vector is reflected through violated Conway walls until its induced
    chamber contains the crossing point; each step uses the raw direction
    fragments only, and the final chamber is fully assembled.
    """
    if wall not in chamber.lifts:
        raise BorcherdsError("wall is not a wall of the chamber")
    S = embedded.surface.lattice
    x0 = chamber.interior
    q = chamber.witnesses[wall]
    # a point strictly beyond the wall, past q, crossing only this mirror
    p = None
    for k in range(1, 64):
        e = Fraction(1, 2**k)
        cand = la.add(q, la.scale(la.sub(q, x0), e))
        if all(
            la.dot(cand, la.vec(u)) > 0 for u in chamber.walls if u != wall
        ) and la.dot(cand, la.vec(wall)) < 0:
            if la.dot(la.vec_mat(cand, S.gram), cand) > 0:
                p = cand
                break
    if p is None:
        raise BorcherdsError("could not construct a crossing point")
    w = la.add(chamber.weyl, chamber.lifts[wall][0])
    if embedded.big.pairing(chamber.weyl, chamber.lifts[wall][0]) != 1:
        raise BorcherdsError("stored lift is not normalized against the Weyl vector")
    for _ in range(budget):
        candidates = _enumerate_fragments(embedded, w)
        violated = None
        for d, roots in candidates.items():
            if la.dot(p, la.vec(d)) < 0:
                violated = roots[0]
                break
        if violated is None:
            return _assemble_chamber(embedded, w, p, candidates)
        if embedded.big.pairing(w, violated) != 1:
            raise BorcherdsError("violated lift is not normalized against the Weyl vector")
        w = la.add(w, violated)
    raise BorcherdsError("crossing walk exceeded its budget")


def wall_is_outer(surface: K3Surface, wall):
    """True iff a positive multiple of the wall vector is a curve class."""
    GS_inv = _gram_inverse(surface.lattice)
    v = la.vec_mat(la.vec(wall), GS_inv)
    n = la.dot(v, la.vec(wall))
    ratio = Fraction(-2) / n  # c^2
    num, den = ratio.numerator, ratio.denominator
    rn, rd = isqrt(num), isqrt(den)
    if rn * rn != num or rd * rd != den:
        return False
    c = Fraction(rn, rd)
    r = la.scale(v, c)
    if not surface.lattice.contains(r):
        return False
    return surface.is_rat_class(r)


# ---------------------------------------------------------------------------
# Congruence transporters
# ---------------------------------------------------------------------------

def chamber_transporters(surface: K3Surface, D: Chamber, E: Chamber, in_group=None,
                         find_one=False, orientation=True):
    """Isometries of S mapping D's wall set onto E's (optionally filtered).

    Backtracking over wall matchings, pruned by pairing profiles; `in_group` is an
    optional predicate (e.g. the +-1 discriminant condition).  With find_one, the
    first surviving isometry is returned in a singleton list.
    """
    out = []
    if len(D.walls) != len(E.walls):
        return out
    if D.fingerprint(surface) != E.fingerprint(surface):
        return out
    S = surface.lattice
    GS_inv = _gram_inverse(S)
    d_vecs = {w: la.vec_mat(la.vec(w), GS_inv) for w in D.walls}
    e_vecs = {w: la.vec_mat(la.vec(w), GS_inv) for w in E.walls}
    # integer-scaled copies for fast pruning dots
    det_scale = abs(int(la.det(S.gram)))
    d_int = {w: tuple(int(e * det_scale) for e in d_vecs[w]) for w in D.walls}
    e_int = {w: tuple(int(e * det_scale) for e in e_vecs[w]) for w in E.walls}

    def profile(walls, vecs, w):
        v = vecs[w]
        return (
            la.dot(v, la.vec(w)),
            tuple(sorted(la.dot(v, la.vec(u)) for u in walls)),
        )

    d_prof = {w: profile(D.walls, d_vecs, w) for w in D.walls}
    e_prof = {w: profile(E.walls, e_vecs, w) for w in E.walls}
    buckets = {}
    for w in E.walls:
        buckets.setdefault(e_prof[w], []).append(w)
    # greedy independent base, small candidate buckets first
    order = sorted(D.walls, key=lambda w: (len(buckets.get(d_prof[w], ())), w))
    base = []
    base_vec_rows = []
    for w in order:
        if la.rank(la.mat(base_vec_rows + [d_vecs[w]])) > len(base_vec_rows):
            base.append(w)
            base_vec_rows.append(d_vecs[w])
        if len(base) == S.rank:
            break
    if len(base) < S.rank:
        raise BorcherdsError("chamber walls do not span; cannot search transporters")
    n = S.rank
    assigned = []
    B_inv = la.inverse(la.mat([d_vecs[w] for w in base]))
    e_wall_set = set(E.walls)
    e_int_interior = la.vec_mat(E.interior, S.gram)

    def extend(i):
        if i == n:
            C = la.mat([e_vecs[w] for w in assigned])
            M = la.mat_mul(B_inv, C)
            if not la.is_integral_mat(M):
                return False
            M = la.int_mat(M)
            if la.mat_mul(la.mat_mul(M, S.gram), la.transpose(M)) != S.gram:
                return False
            MG = la.mat_mul(M, S.gram)  # integer
            mapped = set()
            for w in D.walls:
                row = la.vec_mat(d_int[w], MG)
                mapped.add(tuple(int(e) // det_scale for e in row))
            if mapped != e_wall_set:
                return False
            g = Isometry(S, M)
            if orientation and la.dot(g.apply(D.interior), e_int_interior) <= 0:
                return False
            if in_group is not None and not in_group(g):
                return False
            out.append(g)
            return find_one

        w = base[i]
        nw = d_prof[w]
        wi = d_int[w]
        for cand in buckets.get(nw, ()):
            ci = e_int[cand]
            ok = True
            for j, prev in enumerate(assigned):
                if la.dot(wi, la.vec(base[j])) != la.dot(ci, la.vec(prev)):
                    ok = False
                    break
            if not ok:
                continue
            assigned.append(cand)
            if extend(i + 1):
                return True
            assigned.pop()
        return False

    extend(0)
    return out


def _map_walls(S, g, walls):
    """Images of wall pairing-rows under an isometry (integer-scaled)."""
    scaled, den = _wall_transform(S, g)
    out = []
    for w in walls:
        row = la.vec_mat(la.vec(w), scaled)
        out.append(tuple(int(e) // den for e in row))
    return out


def map_chamber(surface, g: Isometry, chamber: Chamber):
    """The image chamber under an isometry (walls, interior, witnesses; no Weyl)."""
    S = surface.lattice
    walls = _map_walls(S, g, chamber.walls)
    interior = g.apply(chamber.interior)
    witnesses = {}
    lifts = {}
    for w, nw in zip(chamber.walls, walls):
        witnesses[nw] = g.apply(chamber.witnesses[w])
    return Chamber(None, walls, interior, witnesses, lifts)


# ---------------------------------------------------------------------------
# The walk
# ---------------------------------------------------------------------------

@dataclass
class WalkResult:
    representatives: list          # Chamber objects
    transporters: list             # (rep_idx, wall, Isometry, target_idx)
    outer_walls: list              # (rep_idx, wall)
    stabilizer: list               # Isometries stabilizing representatives[0]
    complete: bool
    crossings: int
    state: object = None

    def transporter_map(self):
        return {(i, w): (g, t) for i, w, g, t in self.transporters}


class _Walk:
    """Walk state: representatives, pending work, symmetry derivations."""

    def __init__(self, embedded, start, symmetry, group_test):
        self.embedded = embedded
        self.surface = embedded.surface
        if group_test is None:
            form = self.surface.disc_form()
            group_test = lambda g: is_pm_one_on_disc(form, g)
        self.group_test = group_test
        ident = la_identity(self.surface.lattice)
        self.sym = list(symmetry) if symmetry else []
        if not any(m.is_identity() for m in self.sym):
            self.sym.insert(0, ident)
        for m in self.sym:
            if m.apply(self.surface.ample) != la.vec(self.surface.ample):
                raise BorcherdsError("symmetry elements must fix the ample class")
        self.reps = [start]
        self.by_walls = {start.walls: 0}
        self.derivation = {0: None}   # rep idx -> None (explicit) or (parent_idx, m)
        self.results = {}             # (rep_idx, wall) -> ("outer", None, None) | ("cross", g, t)
        self.queue = [0]
        self.crossings = 0
        self._image_cache = {}

    def resolve_image(self, rep_idx, m):
        """(target_idx, transporter in T_G(rep^m, target)); may add a new rep."""
        key = (rep_idx, id(m))
        hit = self._image_cache.get(key)
        if hit is not None:
            return hit
        chamber_m = map_chamber(self.surface, m, self.reps[rep_idx])
        found = self.by_walls.get(chamber_m.walls)
        if found is not None:
            res = (found, la_identity(self.surface.lattice))
        else:
            res = None
            for i, rep in enumerate(self.reps):
                got = chamber_transporters(
                    self.surface, chamber_m, rep, in_group=self.group_test, find_one=True
                )
                if got:
                    res = (i, got[0])
                    break
            if res is None:
                self.reps.append(chamber_m)
                new_idx = len(self.reps) - 1
                self.by_walls[chamber_m.walls] = new_idx
                parent = self.derivation[rep_idx]
                if parent is None:
                    self.derivation[new_idx] = (rep_idx, m)
                else:
                    anc, m0 = parent
                    self.derivation[new_idx] = (anc, m0 * m)
                self.queue.append(new_idx)
                res = (new_idx, la_identity(self.surface.lattice))
        self._image_cache[key] = res
        return res

    def process_explicit(self, idx, budget):
        rep = self.reps[idx]
        stab_sym = [
            m for m in self.sym if _image_wall_set(self.surface, m, rep) == rep.walls
        ]
        orbits = _wall_orbits(self.surface, rep, stab_sym)
        for orbit in orbits:
            wall = orbit[0]
            if (idx, wall) in self.results:
                continue
            if wall_is_outer(self.surface, wall):
                for w in orbit:
                    self.results[(idx, w)] = ("outer", None, None)
                continue
            if budget is not None and self.crossings >= budget:
                return False
            nxt = adjacent_chamber(self.embedded, rep, wall)
            self.crossings += 1
            target, g = self._locate(nxt)
            self.results[(idx, wall)] = ("cross", g, target)
            for m in stab_sym:
                w_m = _image_wall(self.surface, m, wall)
                if w_m == wall:
                    continue
                if (idx, w_m) in self.results:
                    continue
                conj = (m.inverse() * g * m) if g is not None else None
                t_m, fold = self.resolve_image(target, m)
                g_m = conj * fold if conj is not None else fold
                self.results[(idx, w_m)] = ("cross", g_m, t_m)
        return True

    def process_derived(self, idx):
        anc_idx, m = self.derivation[idx]
        m_inv = m.inverse()
        for wall in self.reps[anc_idx].walls:
            w_m = _image_wall(self.surface, m, wall)
            if (idx, w_m) in self.results:
                continue
            kind, g, target = self.results[(anc_idx, wall)]
            if kind == "outer":
                self.results[(idx, w_m)] = ("outer", None, None)
                continue
            conj = m_inv * g * m
            t_m, fold = self.resolve_image(target, m)
            self.results[(idx, w_m)] = ("cross", conj * fold, t_m)

    def _locate(self, chamber):
        found = self.by_walls.get(chamber.walls)
        ident = la_identity(self.surface.lattice)
        if found is not None:
            return found, ident
        for i, rep in enumerate(self.reps):
            got = chamber_transporters(
                self.surface, chamber, rep, in_group=self.group_test, find_one=True
            )
            if got:
                return i, got[0]
        self.reps.append(chamber)
        new_idx = len(self.reps) - 1
        self.by_walls[chamber.walls] = new_idx
        self.derivation[new_idx] = None
        self.queue.append(new_idx)
        return new_idx, ident


def borcherds_walk(embedded: EmbeddedNS, start: Chamber = None, symmetry=(), budget=None,
                   group_test=None, resume_state=None):
    """Breadth-first chamber walk producing orbit representatives and generators.

    `symmetry`: optional isometries of S fixing the ample class and normalizing
    the target group (the +-1-discriminant subgroup by default); walls are
    crossed once per symmetry orbit with the remaining results derived by
    conjugation, and symmetry images of representatives are installed as their
    own representatives with derived data.  Every (rep, wall) pair ends with a
    certified result: an outer mark or a transporter into the representative set.

    With a crossing budget the walk checkpoints: the returned result carries the
    state and can be passed back as resume_state to continue.
    """
    if resume_state is not None:
        walk = resume_state
    else:
        walk = _Walk(embedded, start, symmetry, group_test)
    complete = True
    while walk.queue:
        idx = walk.queue[0]
        if walk.derivation.get(idx) is None:
            if not walk.process_explicit(idx, budget):
                complete = False
                break
        else:
            walk.process_derived(idx)
        walk.queue.pop(0)
    transporters = [
        (i, w, g, t)
        for (i, w), (kind, g, t) in sorted(walk.results.items())
        if kind == "cross"
    ]
    outer = [
        (i, w) for (i, w), (kind, _g, _t) in sorted(walk.results.items()) if kind == "outer"
    ]
    stab = []
    if complete:
        stab = chamber_transporters(
            walk.surface, walk.reps[0], walk.reps[0], in_group=walk.group_test
        )
    result = WalkResult(walk.reps, transporters, outer, stab, complete, walk.crossings)
    result.state = walk
    return result


def la_identity(S):
    return Isometry(S, la.identity(S.rank))


_WALL_ACTION_CACHE = {}
_GS_INV_CACHE = {}


def _gram_inverse(S):
    key = id(S.gram)
    hit = _GS_INV_CACHE.get(key)
    if hit is None:
        hit = la.inverse(S.gram)
        _GS_INV_CACHE[key] = hit
    return hit


def _wall_transform(S, g):
    """Integer matrix pair (T_scaled, denom) acting on wall pairing-rows (cached).

    Wall rows w map to (w @ T_scaled) / denom, always exactly integral.
    """
    key = (id(S.gram), id(g))
    T = _WALL_ACTION_CACHE.get(key)
    if T is None:
        GS_inv = _gram_inverse(S)
        raw = la.mat_mul(la.mat_mul(GS_inv, g.matrix), S.gram)
        den = 1
        from math import gcd as _gcd

        for row in raw:
            for e in row:
                d = Fraction(e).denominator
                den = den * d // _gcd(den, d)
        scaled = tuple(tuple(int(Fraction(e) * den) for e in row) for row in raw)
        T = (scaled, den)
        _WALL_ACTION_CACHE[key] = T
    return T


def _image_wall(surface, g, wall):
    scaled, den = _wall_transform(surface.lattice, g)
    row = la.vec_mat(la.vec(wall), scaled)
    return tuple(int(e) // den for e in row)


def _image_wall_set(surface, g, chamber):
    import numpy as np

    scaled, den = _wall_transform(surface.lattice, g)
    W = np.array([list(w) for w in chamber.walls], dtype=np.int64)
    T = np.array([list(r) for r in scaled], dtype=np.int64)
    img = W @ T
    if den != 1:
        if (img % den).any():
            raise BorcherdsError("wall image is not integral")
        img = img // den
    return tuple(sorted(tuple(int(e) for e in row) for row in img))


def _wall_orbits(surface, chamber, stab_sym):
    import numpy as np

    walls = chamber.walls
    W = np.array([list(w) for w in walls], dtype=np.int64)
    maps = []
    for m in stab_sym:
        scaled, den = _wall_transform(surface.lattice, m)
        T = np.array([list(r) for r in scaled], dtype=np.int64)
        img = W @ T
        if den != 1:
            img = img // den
        maps.append([tuple(int(e) for e in row) for row in img])
    seen = set()
    orbits = []
    for i, w in enumerate(walls):
        if w in seen:
            continue
        orbit = {w} | {mp[i] for mp in maps}
        seen |= orbit
        orbits.append(sorted(orbit))
    return orbits


def _locate(surface, embedded, chamber, reps, group_test):
    """Find a representative G-equivalent to the chamber, with a transporter."""
    for i, rep in enumerate(reps):
        if chamber == rep:
            return i, la_identity(surface.lattice)
        found = chamber_transporters(
            surface, chamber, rep, in_group=group_test, find_one=True
        )
        if found:
            return i, found[0]
    return None, None
