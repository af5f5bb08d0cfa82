"""ADE root-system combinatorics: classification into Dynkin components,
affine multiplicities, the component groups on reduced-multiplicity nodes,
dual weights, and translation permutations of affine diagrams.

Node numbering convention (fixed once, used by every table below):
  A_l : path 1 - 2 - ... - l; affine node 0 closes the cycle.
  D_l : fork tips 1, 2 attached to 3; tail 3 - 4 - ... - l; affine node 0
        attached to l-1 (forking with l).  For l = 4 the center is 3.
  E_6 : center 4 with legs (1), (3, 2), (5, 6); affine node 0 attached to 1.
  E_7 : path 0 - 2 - 3 - 4 - 5 - 6 - 7 with branch 1 at 4.
  E_8 : path 0 - 8 - 7 - 6 - 5 - 4 - 3 - 2 with branch 1 at 4.
These are exactly the numberings under which the affine multiplicity strings
and the translation permutations below are valid; tests re-derive both from
first principles.
"""

from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction
from itertools import permutations

from . import linalg as la
from .lattice import IntegralLattice


class ADEError(ValueError):
    pass


AFFINE_MULTIPLICITIES = {
    "A": lambda l: [1] * (l + 1),
    "D": lambda l: [1, 1, 1] + [2] * (l - 3) + [1],
    "E6": lambda l: [1, 2, 1, 2, 3, 2, 1],
    "E7": lambda l: [1, 2, 2, 3, 4, 3, 2, 1],
    "E8": lambda l: [1, 3, 2, 4, 6, 5, 4, 3, 2],
}


def affine_edges(letter, l):
    """Edges of the affine Dynkin diagram on nodes 0..l (numbering above)."""
    if letter == "A":
        if l == 1:
            return [(0, 1), (0, 1)]  # double bond degenerates; treat as single pair
        return [(i, (i + 1) % (l + 1)) for i in range(l + 1)]
    if letter == "D":
        edges = [(1, 3), (2, 3)] + [(i, i + 1) for i in range(3, l)]
        edges.append((0, l - 1))
        return edges
    if letter == "E6":
        return [(0, 1), (1, 4), (3, 4), (2, 3), (5, 4), (6, 5)]
    if letter == "E7":
        return [(0, 2), (2, 3), (3, 4), (4, 5), (5, 6), (6, 7), (1, 4)]
    if letter == "E8":
        return [(0, 8), (8, 7), (7, 6), (6, 5), (5, 4), (4, 3), (3, 2), (1, 4)]
    raise ADEError(f"unknown type {letter}")


def finite_edges(letter, l):
    return [(a, b) for a, b in affine_edges(letter, l) if a != 0 and b != 0]


def multiplicities(letter, l):
    if letter.startswith("E"):
        return AFFINE_MULTIPLICITIES[letter](l)
    return AFFINE_MULTIPLICITIES[letter](l)


def reduced_nodes(letter, l):
    """J = indices with multiplicity 1 (always contains the affine node 0)."""
    return [j for j, m in enumerate(multiplicities(letter, l)) if m == 1]


def group_table(letter, l):
    """Addition table on J as a dict (a, b) -> c."""
    J = reduced_nodes(letter, l)
    table = {}
    if letter == "A":
        n = l + 1
        for a in J:
            for b in J:
                table[(a, b)] = (a + b) % n
    elif letter == "D":
        if l % 2 == 0:
            # Klein four group {0, 1, 2, l}
            invs = {0: 0, 1: 1, 2: 2, l: l}
            pairs = {
                (0, 0): 0, (1, 1): 0, (2, 2): 0, (l, l): 0,
                (1, 2): l, (1, l): 2, (2, l): 1,
            }
            for a in J:
                table[(a, a)] = pairs[(a, a)]
                table[(0, a)] = a
                table[(a, 0)] = a
            for (a, b), c in list(pairs.items()):
                table[(a, b)] = c
                table[(b, a)] = c
        else:
            # Z/4 generated by 1, with l the element of order 2: 1+1=l, 1+l=2, 2+1=0...
            order = {0: 0, 1: 1, l: 2, 2: 3}
            inv_order = {v: k for k, v in order.items()}
            for a in J:
                for b in J:
                    table[(a, b)] = inv_order[(order[a] + order[b]) % 4]
    elif letter == "E6":
        order = {0: 0, 2: 1, 6: 2}
        inv_order = {v: k for k, v in order.items()}
        for a in J:
            for b in J:
                table[(a, b)] = inv_order[(order[a] + order[b]) % 3]
    elif letter == "E7":
        for a in J:
            for b in J:
                table[(a, b)] = 0 if a == b else (a + b)
    elif letter == "E8":
        table[(0, 0)] = 0
    return table


def translation_permutation_table(letter, l, j):
    """Permutation of the affine nodes {0..l} induced by translating by j in J."""
    nodes = list(range(l + 1))
    if letter == "A":
        n = l + 1
        return {i: (i + j) % n for i in nodes}
    if letter == "D":
        if j == 0:
            return {i: i for i in nodes}
        if l % 2 == 0:
            if j == 1:
                p = {0: 1, 1: 0, 2: l, l: 2}
                p.update({k: l + 2 - k for k in range(3, l) if 2 < k < l})
                return {**{i: i for i in nodes}, **p}
            if j == 2:
                p = {0: 2, 2: 0, 1: l, l: 1}
                p.update({k: l + 2 - k for k in range(3, l)})
                return {**{i: i for i in nodes}, **p}
            if j == l:
                p = {0: l, l: 0, 1: 2, 2: 1}
                return {**{i: i for i in nodes}, **p}
        else:
            if j == 1:
                p = {0: 1, 1: l, l: 2, 2: 0}
                p.update({k: l + 2 - k for k in range(3, l)})
                return {**{i: i for i in nodes}, **p}
            if j == 2:
                p = {0: 2, 2: l, l: 1, 1: 0}
                p.update({k: l + 2 - k for k in range(3, l)})
                return {**{i: i for i in nodes}, **p}
            if j == l:
                p = {0: l, l: 0, 1: 2, 2: 1}
                return {**{i: i for i in nodes}, **p}
    if letter == "E6":
        if j == 0:
            return {i: i for i in nodes}
        if j == 2:
            return {0: 2, 2: 6, 6: 0, 1: 3, 3: 5, 5: 1, 4: 4}
        if j == 6:
            return {0: 6, 6: 2, 2: 0, 1: 5, 5: 3, 3: 1, 4: 4}
    if letter == "E7":
        if j == 0:
            return {i: i for i in nodes}
        if j == 7:
            return {0: 7, 7: 0, 1: 1, 4: 4, 2: 6, 6: 2, 3: 5, 5: 3}
    if letter == "E8" and j == 0:
        return {i: i for i in nodes}
    raise ADEError(f"{j} is not a reduced-multiplicity node of {letter}{l}")


@dataclass(frozen=True)
class Component:
    """One connected ADE component with its ordered simple roots."""

    letter: str     # "A", "D", "E6", "E7", "E8"
    l: int          # rank
    simple_roots: tuple  # simple_roots[k] is node k+1 (nodes are 1-based)

    @property
    def type_name(self):
        if self.letter in ("E6", "E7", "E8"):
            return self.letter[0] + self.letter[1]
        return f"{self.letter}{self.l}"

    @property
    def rank(self):
        return self.l

    def root(self, node):
        """Simple root of a finite node (1-based)."""
        return self.simple_roots[node - 1]

    def multiplicities(self):
        return multiplicities(self.letter, self.l)

    def reduced_nodes(self):
        return reduced_nodes(self.letter, self.l)

    def group_table(self):
        return group_table(self.letter, self.l)

    def translation_permutation(self, j):
        return translation_permutation_table(self.letter, self.l, j)


@dataclass(frozen=True)
class ADEConfig:
    components: tuple  # of Component

    @property
    def type_name(self):
        names = sorted((c.type_name for c in self.components), key=_type_sort_key)
        out = []
        for name in names:
            if out and out[-1][1] == name:
                out[-1][0] += 1
            else:
                out.append([1, name])
        return "+".join(name if k == 1 else f"{k}{name}" for k, name in out)

    @property
    def total_rank(self):
        return sum(c.l for c in self.components)

    def all_roots(self):
        return [r for c in self.components for r in c.simple_roots]


def _type_sort_key(name):
    return (name[0], int(name[1:]))


def _adjacency_from_gram(pair):
    """pair(i, j) -> Gram entry; builds the dual graph on indices."""
    return pair


def classify(root_set, pairing, positive=None) -> ADEConfig:
    """Classify a set of (-2)-vectors into ADE components with canonical numbering.

    `pairing(u, v)` must return the exact intersection number.  A simple basis is
    extracted first (indecomposable positive roots), so any negation-closed or
    partial root set spanning a negative-definite sublattice is accepted.  When
    `positive` is given (e.g. an ample class pairing nonzero with every root),
    it fixes the positivity functional; otherwise a generic coordinate
    functional is used.
    """
    roots = [la.vec(r) for r in root_set]
    if not roots:
        return ADEConfig(())
    for r in roots:
        if pairing(r, r) != -2:
            raise ADEError("all inputs must have self-pairing -2")
    simple = _extract_simple_basis(roots, pairing, positive)
    # split into connected components
    n = len(simple)
    adj = [[i for i in range(n) if i != j and pairing(simple[j], simple[i]) != 0] for j in range(n)]
    for j in range(n):
        for i in adj[j]:
            if pairing(simple[j], simple[i]) != 1:
                raise ADEError("simple basis is not a Dynkin diagram (bad edge weight)")
    seen = [False] * n
    comps = []
    for start in range(n):
        if seen[start]:
            continue
        stack, nodes = [start], []
        seen[start] = True
        while stack:
            v = stack.pop()
            nodes.append(v)
            for w in adj[v]:
                if not seen[w]:
                    seen[w] = True
                    stack.append(w)
        comps.append(sorted(nodes))
    components = []
    for nodes in comps:
        components.append(_identify_component([simple[i] for i in nodes], pairing))
    components.sort(key=lambda c: (_type_sort_key(c.type_name), c.simple_roots))
    return ADEConfig(tuple(components))


def _extract_simple_basis(roots, pairing, positive_class=None):
    """Indecomposable positive roots for a deterministic positivity functional."""
    # close under negation, dedupe
    root_list = sorted(set(tuple(r) for r in roots) | set(tuple(la.neg(r)) for r in roots))
    if positive_class is not None:
        pc = la.vec(positive_class)

        def phi(r):
            return pairing(la.vec(r), pc)

    else:
        # generic functional: weights 1, N, N^2, ... on coordinates, N large
        # enough that no cancellation across digits is possible
        n = len(root_list[0])
        big = 3
        for r in root_list:
            for e in r:
                f = abs(Fraction(e))
                big = max(big, 2 * (f.numerator // f.denominator + 1) + 1)
        weights = [Fraction(big) ** k for k in range(n)]

        def phi(r):
            return sum(w * e for w, e in zip(weights, r))

    for r in root_list:
        if phi(r) == 0:
            raise ADEError("positivity functional vanishes on a root")
    positive = [la.vec(r) for r in root_list if phi(r) > 0]
    pos_set = set(tuple(r) for r in positive)
    simple = []
    for r in positive:
        decomposable = False
        for s in positive:
            if s == r:
                continue
            diff = tuple(la.sub(r, s))
            if diff in pos_set:
                decomposable = True
                break
        if not decomposable:
            simple.append(r)
    return simple


def _identify_component(simple, pairing):
    """Identify the type of one connected simple system and number its nodes."""
    n = len(simple)
    adj = {
        i: [j for j in range(n) if j != i and pairing(simple[i], simple[j]) == 1]
        for i in range(n)
    }
    degrees = sorted(len(v) for v in adj.values())
    branch = [i for i in range(n) if len(adj[i]) >= 3]
    if len(branch) > 1 or (branch and len(adj[branch[0]]) > 3):
        raise ADEError("diagram is not of ADE shape")
    if not branch:
        # path: type A_n
        if n == 1:
            return Component("A", 1, (simple[0],))
        ends = [i for i in range(n) if len(adj[i]) == 1]
        order = _walk_path(adj, ends[0])
        alt = _walk_path(adj, ends[1])
        seq = min([tuple(simple[i]) for i in order], [tuple(simple[i]) for i in alt])
        chosen = order if [tuple(simple[i]) for i in order] == list(seq) else alt
        return Component("A", n, tuple(simple[i] for i in chosen))
    center = branch[0]
    legs = []
    for first in adj[center]:
        leg = [first]
        prev, cur = center, first
        while True:
            nxt = [w for w in adj[cur] if w != prev]
            if not nxt:
                break
            prev, cur = cur, nxt[0]
            leg.append(cur)
        legs.append(leg)
    legs.sort(key=len)
    lens = sorted(len(leg) for leg in legs)
    if lens[0] == 1 and lens[1] == 1:
        # D_n: tips are the two short legs; tail is the long leg
        short = [leg for leg in legs if len(leg) == 1]
        tail = max(legs, key=len) if n > 4 else None
        if n == 4:
            # all three legs length 1: D4; tips chosen in canonical coordinate order
            tips = sorted([legs[0][0], legs[1][0], legs[2][0]], key=lambda i: tuple(simple[i]))
            order = [tips[0], tips[1], center, tips[2]]
            return Component("D", 4, tuple(simple[i] for i in order))
        tip_idx = sorted((short[0][0], short[1][0]), key=lambda i: tuple(simple[i]))
        order = [tip_idx[0], tip_idx[1], center] + tail
        return Component("D", n, tuple(simple[i] for i in order))
    if lens == [1, 2, 2] and n == 6:
        # E6: center node 4; short leg -> node 1; long legs -> (3,2) and (5,6)
        short = next(leg for leg in legs if len(leg) == 1)
        long1, long2 = [leg for leg in legs if len(leg) == 2]
        l1, l2 = sorted([long1, long2], key=lambda leg: tuple(simple[leg[-1]]))
        order = [short[0], l1[1], l1[0], center, l2[0], l2[1]]
        return Component("E6", 6, tuple(simple[i] for i in order))
    if lens == [1, 2, 3] and n == 7:
        legs_by_len = {len(leg): leg for leg in legs}
        # E7 finite edges: (2,3),(3,4),(4,5),(5,6),(6,7),(1,4): center 4,
        # legs: (1), (3,2), (5,6,7)
        leg1, leg2, leg3 = legs_by_len[1], legs_by_len[2], legs_by_len[3]
        order = [leg1[0], leg2[1], leg2[0], center, leg3[0], leg3[1], leg3[2]]
        return Component("E7", 7, tuple(simple[i] for i in order))
    if lens == [1, 2, 4] and n == 8:
        legs_by_len = {len(leg): leg for leg in legs}
        # E8 finite edges: (8,7),(7,6),(6,5),(5,4),(4,3),(3,2),(1,4): center 4,
        # legs: (1), (3,2), (5,6,7,8)
        leg1, leg2, leg4 = legs_by_len[1], legs_by_len[2], legs_by_len[4]
        order = [leg1[0], leg2[1], leg2[0], center, leg4[0], leg4[1], leg4[2], leg4[3]]
        return Component("E8", 8, tuple(simple[i] for i in order))
    raise ADEError(f"unrecognized diagram with leg lengths {lens}")


def _walk_path(adj, start):
    order = [start]
    prev = None
    cur = start
    while True:
        nxt = [w for w in adj[cur] if w != prev]
        if not nxt:
            return order
        prev, cur = cur, nxt[0]
        order.append(cur)


def affine_zero_class(component: Component, fiber_class, pairing=None):
    """[C_0] = f - sum_j m_j [C_j] (the identity-component class of the fiber)."""
    ms = component.multiplicities()
    v = la.vec(fiber_class)
    for node in range(1, component.l + 1):
        v = la.sub(v, la.scale(component.root(node), ms[node]))
    return v


def component_lattice(component: Component, pairing):
    G = tuple(
        tuple(pairing(u, v) for v in component.simple_roots) for u in component.simple_roots
    )
    return IntegralLattice(G)


def dual_weights(component: Component, pairing):
    """gamma_j: dual basis of the component root lattice; gamma_0 = 0.

    Returned in simple-root coordinates (rows of the inverse component Gram),
    indexed 0..l.
    """
    G = component_lattice(component, pairing).gram
    inv = la.inverse(G)
    return (la.zeros(component.l),) + tuple(inv)


def jgroup(component: Component, pairing):
    """Group structure on reduced nodes, cross-validated against gamma residues."""
    table = component.group_table()
    G = component_lattice(component, pairing)
    weights = dual_weights(component, pairing)
    J = component.reduced_nodes()
    for a in J:
        for b in J:
            c = table[(a, b)]
            diff = la.sub(la.add(weights[a], weights[b]), weights[c])
            if not G.contains(diff):
                raise ADEError(
                    f"group law {a}+{b}={c} disagrees with discriminant arithmetic"
                )
    return table


def residue_node(component: Component, pairing, dual_vector_coords):
    """The reduced node j with dual_vector = gamma_j modulo the root lattice, or None."""
    G = component_lattice(component, pairing)
    weights = dual_weights(component, pairing)
    for j in component.reduced_nodes():
        if G.contains(la.sub(la.vec(dual_vector_coords), weights[j])):
            return j
    return None


def diagram_involutions(component: Component, pairing):
    """All order <= 2 Gram-preserving permutations of the finite diagram (as dicts)."""
    l = component.l
    edges = set()
    for a, b in finite_edges(component.letter, l):
        edges.add((min(a, b), max(a, b)))
    out = []
    for perm in permutations(range(1, l + 1)):
        mapping = {i + 1: perm[i] for i in range(l)}
        if any(mapping[mapping[i]] != i for i in mapping):
            continue
        ok = all(
            (min(mapping[a], mapping[b]), max(mapping[a], mapping[b])) in edges
            for a, b in edges
        )
        if ok:
            out.append(mapping)
    out.sort(key=lambda m: tuple(m[i] for i in range(1, l + 1)))
    return out
