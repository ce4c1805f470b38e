"""Characters of ray class groups: conductors, extensions, admissible search.

Characters are stored as exponent vectors (t_1, ..., t_k) against the SNF
invariants (d_1, ..., d_k); the value on v is the rational t_1*v_1/d_1 + ...
mod 1, i.e. the exponent of exp(2*pi*i).  All character algebra is exact.
"""

from __future__ import annotations

import itertools
import math
import os
from dataclasses import dataclass
from fractions import Fraction

import mpmath

from .abgroup import FinAbGroup, Subgroup, intersect, join
from .qfield import Ideal
from .rayclass import RayClassGroup, g_p

BRUTE_CHECK_THRESHOLD = int(os.environ.get("RAYUNITS_BRUTE_CHECK_CAP", 5000))


class NoAdmissibleCharacter(ValueError):
    def __init__(self, prime: Ideal):
        self.prime = prime
        super().__init__(
            f"no admissible character exists; the hypothesis fails at {prime.text()}"
        )


@dataclass(frozen=True)
class Character:
    group: FinAbGroup
    exponents: tuple[int, ...]

    def __post_init__(self):
        if len(self.exponents) != self.group.rank:
            raise ValueError("exponent vector length mismatch")

    def value(self, v) -> Fraction:
        """chi(v) as a rational in [0, 1) (the exponent of exp(2*pi*i))."""
        total = Fraction(0)
        for t, x, d in zip(self.exponents, v, self.group.invariants, strict=True):
            total += Fraction(t * x, d)
        return total % 1

    def complex_value(self, v, prec: int = 64) -> mpmath.mpc:
        t = self.value(v)
        with mpmath.workprec(prec):
            return mpmath.expjpi(2 * mpmath.mpf(t.numerator) / t.denominator)

    def is_trivial(self) -> bool:
        return all(t == 0 for t in self.exponents)

    def is_trivial_on(self, sub) -> bool:
        gens = sub.small_generators if isinstance(sub, Subgroup) else sub
        return all(self.value(g) == 0 for g in gens)

    def order(self) -> int:
        out = 1
        for t, d in zip(self.exponents, self.group.invariants, strict=True):
            out = math.lcm(out, d // math.gcd(t, d))
        return out

    def __mul__(self, other: "Character") -> "Character":
        if self.group != other.group:
            raise ValueError("characters of different groups")
        exps = tuple(
            (a + b) % d
            for a, b, d in zip(self.exponents, other.exponents, self.group.invariants, strict=True)
        )
        return Character(self.group, exps)

    def conj(self) -> "Character":
        exps = tuple(
            (-t) % d for t, d in zip(self.exponents, self.group.invariants, strict=True)
        )
        return Character(self.group, exps)

    def __repr__(self):
        return f"Character{list(self.exponents)} on {self.group}"


def trivial_character(G: FinAbGroup) -> Character:
    return Character(G, (0,) * G.rank)


def all_characters(G: FinAbGroup):
    """All characters in deterministic lexicographic exponent order."""
    for exps in itertools.product(*(range(d) for d in G.invariants)):
        yield Character(G, exps)


def conductor(R: RayClassGroup, chi: Character) -> Ideal:
    """The divisor-minimal level f' | f through which chi factors."""
    if chi.group != R.group:
        raise ValueError("character does not live on this ray class group")
    good = []
    for D in R.divisor_ideals:
        ker = _level_kernel_cached(R, D)
        if chi.is_trivial_on(ker):
            good.append(D)
    minimal = [D for D in good if all(D.divides(D2) for D2 in good)]
    if len(minimal) != 1:
        raise AssertionError("conductor is not unique; level lattice corrupted")
    return minimal[0]


_kernel_cache: dict = {}


def _level_kernel_cached(R: RayClassGroup, D: Ideal) -> Subgroup:
    key = (id(R), D.a, D.b, D.c)
    if key not in _kernel_cache:
        _kernel_cache[key] = R.level_kernel(D)
    return _kernel_cache[key]


def primitive_character(R: RayClassGroup, chi: Character):
    """(f_chi, R', chi0) with chi0 primitive on Cl(f_chi) and chi0 o level = chi."""
    from .rayclass import ray_class_group

    f_chi = conductor(R, chi)
    if f_chi.is_unit_ideal():
        raise ValueError(
            "conductor is the unit ideal; the primitive character lives on Cl(K)"
        )
    if f_chi == R.modulus:
        return f_chi, R, chi
    Rp = ray_class_group(R.field.d, f_chi)
    hom = R.level_map(Rp)
    gen_pairs = [(hom.apply(v), chi.value(v)) for v in _basis_vectors(R.group)]
    for cand in all_characters(Rp.group):
        if all(cand.value(img) == val for img, val in gen_pairs):
            if conductor(Rp, cand) != f_chi:
                raise AssertionError("primitive character is not primitive")
            return f_chi, Rp, cand
    raise AssertionError("no primitive character found; level map corrupted")


def _basis_vectors(G: FinAbGroup):
    for i in range(G.rank):
        yield tuple(1 if j == i else 0 for j in range(G.rank))


@dataclass(frozen=True)
class PartialCharacter:
    """A character of a subgroup, tabulated on its elements."""

    subgroup: Subgroup
    values: tuple  # sorted tuple of (element, Fraction) pairs

    @staticmethod
    def make(subgroup: Subgroup, mapping) -> "PartialCharacter":
        vals = dict(mapping)
        if set(vals) != set(subgroup.elements):
            raise ValueError("values must be given on exactly the subgroup elements")
        G = subgroup.parent
        for g in subgroup.small_generators:
            for h in subgroup.elements:
                if (vals[G.add(g, h)] - vals[g] - vals[h]) % 1 != 0:
                    raise ValueError("values do not define a homomorphism")
        return PartialCharacter(subgroup, tuple(sorted(vals.items())))

    @staticmethod
    def trivial(subgroup: Subgroup) -> "PartialCharacter":
        return PartialCharacter(subgroup, tuple(sorted((e, Fraction(0)) for e in subgroup.elements)))

    def value(self, v) -> Fraction:
        return dict(self.values)[tuple(v)]

    def as_dict(self) -> dict:
        return dict(self.values)


def extend_character(
    G: FinAbGroup, H: Subgroup, chi: PartialCharacter, g, root: Fraction
) -> PartialCharacter:
    """Extend chi from H to <H, g> with the prescribed value exp(2*pi*i*root) at g.

    root must satisfy n*root = chi(n*g) mod 1 where n is the order of [g] in G/H.
    """
    if H.parent != G or chi.subgroup != H:
        raise ValueError("mismatched group data")
    g = tuple(g)
    if H.contains(g):
        raise ValueError("g already lies in H")
    n = 1
    power = g
    while not H.contains(power):
        power = G.add(power, g)
        n += 1
    if (n * root - chi.value(power)) % 1 != 0:
        raise ValueError("root^n does not equal chi(g^n)")
    vals = chi.as_dict()
    new_vals = dict(vals)
    shift = G.identity
    acc = Fraction(0)
    for _ in range(1, n):
        shift = G.add(shift, g)
        acc = (acc + root) % 1
        for h, v in vals.items():
            new_vals[G.add(h, shift)] = (v + acc) % 1
    H2 = Subgroup.from_generators(G, list(H.generators) + [g])
    return PartialCharacter.make(H2, new_vals)


def _admissible_roots(G: FinAbGroup, H: Subgroup, chi: PartialCharacter, g):
    """The n-th roots available when extending chi by g, in a fixed order."""
    g = tuple(g)
    n = 1
    power = g
    while not H.contains(power):
        power = G.add(power, g)
        n += 1
    base = chi.value(power)
    return n, [Fraction(base + j, n) % 1 for j in range(n)]


def character_from_values(G: FinAbGroup, full: PartialCharacter) -> Character:
    """Convert a partial character defined on all of G to exponent form."""
    if full.subgroup.order != G.order:
        raise ValueError("partial character is not defined on the full group")
    exps = []
    vals = full.as_dict()
    for i, d in enumerate(G.invariants):
        e_i = tuple(1 if j == i else 0 for j in range(G.rank))
        t = vals[e_i] * d
        if t.denominator != 1:
            raise AssertionError("value on a basis vector is not a d_i-th root")
        exps.append(int(t) % d)
    chi = Character(G, tuple(exps))
    for v, val in vals.items():
        if chi.value(v) != val:
            raise AssertionError("exponent form disagrees with the value table")
    return chi


def extensions_to_group(G: FinAbGroup, partial: PartialCharacter):
    """Yield every extension of `partial` to G in a deterministic order."""
    H, chi = partial.subgroup, partial
    if H.order == G.order:
        yield character_from_values(G, chi)
        return
    g = next(v for v in G.elements() if not H.contains(v))
    _, roots = _admissible_roots(G, H, chi, g)
    for r in roots:
        yield from extensions_to_group(G, extend_character(G, H, chi, g, r))


def extend_to_group(G: FinAbGroup, partial: PartialCharacter) -> Character:
    """First extension of `partial` to G in the fixed enumeration order."""
    return next(extensions_to_group(G, partial))


def _extension_with_nontrivial_value(G: FinAbGroup, S: Subgroup, D) -> Character:
    """A character trivial on S with chi(D) != 1, built by explicit extension."""
    D = tuple(D)
    if S.contains(D):
        raise ValueError("D lies in the subgroup; no such character exists")
    chi = PartialCharacter.trivial(S)
    n, roots = _admissible_roots(G, S, chi, D)
    root = next(r for r in roots if r != 0)
    chi = extend_character(G, S, chi, D, root)
    return extend_to_group(G, chi)


def find_admissible_character(
    R: RayClassGroup,
    S_L: Subgroup,
    D,
    required_primes=None,
    brute_check: bool | None = None,
) -> Character:
    """A character chi with chi|_{S_L} = 1, chi(D) != 1 and p | f_chi for p required.

    Follows the constructive two-case proof: start from any extension with
    chi(D) != 1; for each required prime p not dividing the conductor, build
    the reduction phi_p to G_p, pick a character psi of G_p trivial on the
    image of S_L ∩ Cl(K_f/H_K) (with the Case-1/Case-2 value constraint at
    beta), pull back, extend to Cl(f) and multiply into chi.
    """
    G = R.group
    D = tuple(D)
    if required_primes is None:
        required_primes = [(P, e) for P, e in R.factorization]
    chi = _extension_with_nontrivial_value(G, S_L, D)
    HK, preimage = R.unit_image
    SLH = intersect(S_L, HK)
    J = join(S_L, HK)

    n_D = 1
    power = D
    while not HK.contains(power):
        power = G.add(power, D)
        n_D += 1
    beta = preimage[power]  # D^n = [(beta)]

    for P, e in required_primes:
        f_chi = conductor(R, chi)
        if P.divides(f_chi):
            continue
        gp = g_p(R.field, P, e)
        phi = {v: gp.dlog(alpha) for v, alpha in preimage.items()}
        T = Subgroup.from_generators(gp.group, [phi[v] for v in SLH.elements])
        beta_bar = gp.dlog(beta)
        chi_Dn = chi.value(power)
        case1 = join(T, Subgroup.from_generators(gp.group, [beta_bar])).order < gp.order

        replaced = False
        for psi in all_characters(gp.group):
            if psi.is_trivial():
                continue
            if not psi.is_trivial_on(T):
                continue
            val_beta = psi.value(beta_bar)
            if case1:
                if val_beta != 0:
                    continue
            else:
                if val_beta == 0 or (val_beta + chi_Dn) % 1 == 0:
                    continue
            # pull back along phi_p and glue with the trivial character on S_L
            joint = {}
            ok = True
            for s in S_L.elements:
                for h in HK.elements:
                    x = G.add(s, h)
                    val = psi.value(phi[h])
                    if joint.setdefault(x, val) != val:
                        ok = False
                        break
                if not ok:
                    break
            if not ok:
                continue
            partial = PartialCharacter.make(J, joint)
            for psi_p in extensions_to_group(G, partial):
                if (chi.value(D) + psi_p.value(D)) % 1 != 0:
                    new_chi = chi * psi_p
                    f_new = conductor(R, new_chi)
                    if not f_chi.divides(f_new) or not P.divides(f_new):
                        raise AssertionError("conductor did not grow as required")
                    chi = new_chi
                    replaced = True
                    break
            if replaced:
                break
        if not replaced:
            raise NoAdmissibleCharacter(P)

    f_chi = conductor(R, chi)
    for P, _ in required_primes:
        if not P.divides(f_chi):
            raise NoAdmissibleCharacter(P)
    if brute_check is None:
        brute_check = R.order <= BRUTE_CHECK_THRESHOLD
    if brute_check:
        admissible = brute_force_admissible(R, S_L, D, required_primes)
        if chi not in admissible:
            raise AssertionError("constructed character missing from brute-force set")
    return chi


def brute_force_admissible(R: RayClassGroup, S_L: Subgroup, D, required_primes) -> list[Character]:
    """All characters satisfying the three admissibility conditions, by enumeration."""
    out = []
    D = tuple(D)
    for chi in all_characters(R.group):
        if not chi.is_trivial_on(S_L):
            continue
        if chi.value(D) == 0:
            continue
        f_chi = conductor(R, chi)
        if all(P.divides(f_chi) for P, _ in required_primes):
            out.append(chi)
    return out


def count_G1_G2(
    R: RayClassGroup, S_L: Subgroup, S_Lp: Subgroup, h_set
) -> tuple[int, int]:
    """(|G1|, |G2|) counted exactly by character enumeration.

    G1: characters trivial on S_L and nontrivial on S_Lp (S_L < S_Lp properly).
    G2: nontrivial characters trivial on S_L whose conductor misses some
    prime of h_set.
    """
    if not S_L.is_subset(S_Lp) or S_L.order == S_Lp.order:
        raise ValueError("need a proper chain S_L < S_Lp")
    sLp_gens = list(S_Lp.elements)
    g1 = g2 = 0
    for chi in all_characters(R.group):
        if not chi.is_trivial_on(S_L):
            continue
        nontrivial_on_Lp = any(chi.value(v) != 0 for v in sLp_gens)
        if nontrivial_on_Lp:
            g1 += 1
        if not chi.is_trivial():
            f_chi = conductor(R, chi)
            if any(not P.divides(f_chi) for P in h_set):
                g2 += 1
    expected_g1 = R.order // S_L.order - R.order // S_Lp.order
    if g1 != expected_g1:
        raise AssertionError("|G1| disagrees with [L:K] - [L':K]")
    return g1, g2
