"""Finite abelian groups in Smith normal form: elements, subgroups, homs.

Elements are integer vectors modulo the invariant chain d_1 | d_2 | ... | d_k
(each >= 2).  Desk scale: subgroups cache their full element sets, which keeps
index computations, lattice operations and character conductors exact.
"""

from __future__ import annotations

import itertools
import math
import os
from collections import deque
from dataclasses import dataclass
from functools import cached_property

from .qfield import ResourceLimitError

DEFAULT_CLOSURE_CAP = int(os.environ.get("RAYUNITS_CLOSURE_CAP", 100000))
DEFAULT_LATTICE_CAP = int(os.environ.get("RAYUNITS_LATTICE_CAP", 10000))
DEFAULT_SUBGROUP_COUNT_CAP = int(os.environ.get("RAYUNITS_SUBGROUP_COUNT_CAP", 50000))


@dataclass(frozen=True)
class FinAbGroup:
    invariants: tuple[int, ...]

    def __post_init__(self):
        for i, d in enumerate(self.invariants):
            if d < 2:
                raise ValueError("invariants must be >= 2")
            if i and d % self.invariants[i - 1]:
                raise ValueError("invariants must form a divisibility chain")

    @property
    def rank(self) -> int:
        return len(self.invariants)

    @property
    def order(self) -> int:
        out = 1
        for d in self.invariants:
            out *= d
        return out

    @property
    def exponent(self) -> int:
        return self.invariants[-1] if self.invariants else 1

    @property
    def identity(self) -> tuple[int, ...]:
        return (0,) * len(self.invariants)

    def reduce(self, v) -> tuple[int, ...]:
        return tuple(x % d for x, d in zip(v, self.invariants, strict=True))

    def add(self, u, v) -> tuple[int, ...]:
        return tuple((x + y) % d for x, y, d in zip(u, v, self.invariants, strict=True))

    def neg(self, v) -> tuple[int, ...]:
        return tuple((-x) % d for x, d in zip(v, self.invariants, strict=True))

    def scale(self, k: int, v) -> tuple[int, ...]:
        return tuple((k * x) % d for x, d in zip(v, self.invariants, strict=True))

    def elements(self):
        return itertools.product(*(range(d) for d in self.invariants))

    def element_order(self, v) -> int:
        out = 1
        for x, d in zip(v, self.invariants, strict=True):
            out = math.lcm(out, d // math.gcd(d, x))
        return out

    def __repr__(self):
        return "FinAbGroup" + repr(list(self.invariants))


class Subgroup:
    def __init__(self, parent: FinAbGroup, generators, elements: frozenset):
        self.parent = parent
        self.generators = tuple(generators)
        self.elements = elements

    @staticmethod
    def from_generators(parent: FinAbGroup, generators) -> "Subgroup":
        gens = [parent.reduce(g) for g in generators]
        seen = {parent.identity}
        queue = deque(seen)
        while queue:
            x = queue.popleft()
            for g in gens:
                y = parent.add(x, g)
                if y not in seen:
                    seen.add(y)
                    queue.append(y)
        return Subgroup(parent, gens, frozenset(seen))

    @staticmethod
    def from_elements(parent: FinAbGroup, elements) -> "Subgroup":
        elems = frozenset(elements)
        if parent.identity not in elems:
            raise ValueError("subgroup must contain the identity")
        return Subgroup(parent, sorted(elems), elems)

    @property
    def order(self) -> int:
        return len(self.elements)

    @cached_property
    def small_generators(self) -> tuple:
        """A short generating set found greedily over the element list."""
        gens = []
        closure = {self.parent.identity}
        for x in sorted(self.elements):
            if x in closure:
                continue
            gens.append(x)
            frontier = list(closure)
            for y in frontier:
                z = y
                while True:
                    z = self.parent.add(z, x)
                    if z in closure:
                        break
                    closure.add(z)
        return tuple(gens)

    def contains(self, v) -> bool:
        return tuple(v) in self.elements

    def is_subset(self, other: "Subgroup") -> bool:
        return self.elements <= other.elements

    def __eq__(self, other):
        return (
            isinstance(other, Subgroup)
            and self.parent == other.parent
            and self.elements == other.elements
        )

    def __hash__(self):
        return hash((self.parent, self.elements))

    def __repr__(self):
        return f"Subgroup(order={self.order} of {self.parent})"


def join(s1: Subgroup, s2: Subgroup) -> Subgroup:
    if s1.parent != s2.parent:
        raise ValueError("subgroups of different parents")
    return Subgroup.from_generators(s1.parent, list(s1.generators) + list(s2.generators))


def intersect(s1: Subgroup, s2: Subgroup) -> Subgroup:
    if s1.parent != s2.parent:
        raise ValueError("subgroups of different parents")
    return Subgroup.from_elements(s1.parent, s1.elements & s2.elements)


def index_in(s1: Subgroup, s2: Subgroup) -> int:
    """[s2 : s1]; requires s1 <= s2."""
    if not s1.is_subset(s2):
        raise ValueError("s1 is not contained in s2")
    return s2.order // s1.order


@dataclass(frozen=True)
class GroupHom:
    source: FinAbGroup
    target: FinAbGroup
    rows: tuple[tuple[int, ...], ...]  # image of each source SNF basis vector

    def __post_init__(self):
        for d, row in zip(self.source.invariants, self.rows, strict=True):
            if self.target.scale(d, row) != self.target.identity:
                raise ValueError("map is not well defined on the given invariants")

    def apply(self, v) -> tuple[int, ...]:
        out = self.target.identity
        for x, row in zip(v, self.rows, strict=True):
            if x:
                out = self.target.add(out, self.target.scale(x, row))
        return out

    def kernel(self) -> Subgroup:
        elems = [v for v in self.source.elements() if self.apply(v) == self.target.identity]
        return Subgroup.from_elements(self.source, elems)

    def image(self) -> Subgroup:
        return Subgroup.from_generators(self.target, self.rows)

    def is_surjective(self) -> bool:
        return self.image().order == self.target.order


def smith_normal_form(rows: list[list[int]], m: int):
    """Diagonalize the row lattice: returns (diag, V, Vinv) with row ops free.

    V and Vinv are m x m unimodular with (relation lattice) * V equal to the
    lattice spanned by diag(d_1..d_m), d_1 | d_2 | ... | d_m.
    """
    W = [list(r) for r in rows]
    k = len(W)
    V = [[int(i == j) for j in range(m)] for i in range(m)]
    Vinv = [[int(i == j) for j in range(m)] for i in range(m)]

    def col_swap(i, j):
        for r in W:
            r[i], r[j] = r[j], r[i]
        for r in V:
            r[i], r[j] = r[j], r[i]
        Vinv[i], Vinv[j] = Vinv[j], Vinv[i]

    def col_add(src, dst, q):
        # col_dst += q * col_src;  Vinv: row_src -= q * row_dst
        for r in W:
            r[dst] += q * r[src]
        for r in V:
            r[dst] += q * r[src]
        Vinv[src] = [a - q * b for a, b in zip(Vinv[src], Vinv[dst])]

    def col_neg(i):
        for r in W:
            r[i] = -r[i]
        for r in V:
            r[i] = -r[i]
        Vinv[i] = [-a for a in Vinv[i]]

    def row_add(src, dst, q):
        W[dst] = [a + q * b for a, b in zip(W[dst], W[src])]

    diag = [0] * m
    t = 0
    while t < m:
        # find a pivot of minimal absolute value in the working submatrix
        piv = None
        best = None
        for i in range(t, k):
            for j in range(t, m):
                v = W[i][j]
                if v and (best is None or abs(v) < best):
                    best = abs(v)
                    piv = (i, j)
        if piv is None:
            raise ValueError("relation lattice is not of full rank (infinite group)")
        i0, j0 = piv
        W[t], W[i0] = W[i0], W[t]
        if j0 != t:
            col_swap(t, j0)
        if W[t][t] < 0:
            col_neg(t)
        clean = True
        for i in range(t + 1, k):
            if W[i][t]:
                q = W[i][t] // W[t][t]
                row_add(t, i, -q)
                if W[i][t]:
                    clean = False
        for j in range(t + 1, m):
            if W[t][j]:
                q = W[t][j] // W[t][t]
                col_add(t, j, -q)
                if W[t][j]:
                    clean = False
        if not clean:
            continue
        # enforce divisibility of every remaining entry by the pivot
        offender = None
        for i in range(t + 1, k):
            for j in range(t + 1, m):
                if W[i][j] % W[t][t]:
                    offender = (i, j)
                    break
            if offender:
                break
        if offender:
            col_add(offender[1], t, 1)
            continue
        diag[t] = W[t][t]
        t += 1
    return diag, V, Vinv


@dataclass
class Decomposition:
    group: FinAbGroup
    log: dict
    _from_vec: callable
    _gen_exponents: callable
    generators: tuple

    def to_vector(self, obj):
        return self.log[obj]

    def from_vector(self, vec):
        return self._from_vec(tuple(vec))

    def generator_exponents(self, vec) -> tuple[int, ...]:
        """Integer exponents over the original generators representing vec."""
        return self._gen_exponents(tuple(vec))


def decompose(generators, mul, identity, max_order: int = DEFAULT_CLOSURE_CAP) -> Decomposition:
    """SNF decomposition of the closure of black-box generators.

    `mul` must be associative-commutative on canonical objects and `identity`
    the canonical identity.  Returns the group together with the discrete-log
    dictionary (object -> vector) and the inverse map.
    """
    gens = list(generators)
    m = len(gens)
    if m == 0:
        group = FinAbGroup(())
        return Decomposition(group, {identity: ()}, lambda v: identity, lambda v: (), ())
    elems = {identity: (0,) * m}
    queue = deque([identity])
    relations = []
    while queue:
        x = queue.popleft()
        vx = elems[x]
        for i, g in enumerate(gens):
            y = mul(x, g)
            vy = list(vx)
            vy[i] += 1
            if y in elems:
                rel = [a - b for a, b in zip(vy, elems[y])]
                if any(rel):
                    relations.append(rel)
            else:
                if len(elems) >= max_order:
                    raise ResourceLimitError(
                        f"closure exceeded the cap of {max_order} elements"
                    )
                elems[y] = tuple(vy)
                queue.append(y)
    n = len(elems)
    diag, V, Vinv = smith_normal_form(relations, m)
    prod = 1
    for d in diag:
        prod *= d
    if prod != n:
        raise AssertionError("SNF order does not match closure size")
    keep = [i for i, d in enumerate(diag) if d > 1]
    group = FinAbGroup(tuple(diag[i] for i in keep))

    def project(v):
        full = [0] * m
        for j in range(m):
            s = 0
            for i in range(m):
                s += v[i] * V[i][j]
            full[j] = s
        return tuple(full[i] % diag[i] for i in keep)

    log = {obj: project(v) for obj, v in elems.items()}
    if len(set(log.values())) != n:
        raise AssertionError("decomposition is not a bijection")

    gen_orders = []
    for i in range(m):
        vec = log[gens[i]] if gens[i] in log else project(elems[gens[i]])
        gen_orders.append(group.element_order(vec) if keep else 1)

    def gen_exponents(vec):
        full = [0] * m
        for pos, i in enumerate(keep):
            full[i] = vec[pos]
        return tuple(
            sum(full[j] * Vinv[j][i] for j in range(m)) for i in range(m)
        )

    def pow_obj(g, k):
        out = identity
        base = g
        while k:
            if k & 1:
                out = mul(out, base)
            base = mul(base, base)
            k >>= 1
        return out

    def from_vec(vec):
        w = gen_exponents(vec)
        out = identity
        for i, wi in enumerate(w):
            out = mul(out, pow_obj(gens[i], wi % gen_orders[i]))
        return out

    return Decomposition(group, log, from_vec, gen_exponents, tuple(gens))


def _prefix_membership(rows, v):
    """Is v (len == len(rows)) in the row span of the lower-triangular rows?"""
    v = list(v)
    for j in range(len(rows) - 1, -1, -1):
        if v[j] % rows[j][j]:
            return False
        q = v[j] // rows[j][j]
        if q:
            for i in range(j + 1):
                v[i] -= q * rows[j][i]
    return True


def subgroup_lattice(
    G: FinAbGroup,
    cap: int = DEFAULT_LATTICE_CAP,
    max_subgroups: int = DEFAULT_SUBGROUP_COUNT_CAP,
) -> list[Subgroup]:
    """All subgroups of G, each exactly once, ordered by (order, elements).

    Subgroups correspond to integer lattices L with D*Z^k <= L <= Z^k,
    enumerated through their unique lower-triangular HNF bases.  The
    containment d_j*e_j in L only involves the first j+1 basis rows, so
    invalid prefixes are pruned as soon as a row is placed.
    """
    if G.order > cap:
        raise ResourceLimitError(f"group order {G.order} exceeds the cap {cap}")
    k = G.rank
    if k == 0:
        return [Subgroup.from_elements(G, [()])]
    divs = [[e for e in range(1, d + 1) if d % e == 0] for d in G.invariants]
    out = []
    fingerprints = set()

    def rec(j, rows):
        if j == k:
            full = [tuple(row) + (0,) * (k - len(row)) for row in rows]
            sub = Subgroup.from_generators(G, full)
            if sub.elements in fingerprints:
                raise AssertionError("duplicate subgroup in HNF enumeration")
            fingerprints.add(sub.elements)
            out.append(sub)
            if len(out) > max_subgroups:
                raise ResourceLimitError(
                    f"subgroup count exceeds the cap {max_subgroups}"
                )
            return
        for piv in divs[j]:
            for off in itertools.product(*(range(rows[i][i]) for i in range(j))):
                row = list(off) + [piv]
                v = [0] * j + [G.invariants[j]]
                if _prefix_membership(rows + [row], v):
                    rec(j + 1, rows + [row])

    rec(0, [])
    out.sort(key=lambda s: (s.order, sorted(s.elements)))
    return out
