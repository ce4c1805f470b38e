"""Ray class groups Cl(f): construction, ideal discrete log, level maps, G_p.

The canonical form of an integral ideal A coprime to f is the pair
(k, unit-orbit of beta mod f) where k is the ideal class index of A and beta
generates A * b_k for the fixed auxiliary ideal b_k of the inverse class.
This is a bijection onto Cl(f), so the discrete log comes for free once every
canonical form has been seen; the group law multiplies smallest-norm
representative ideals and re-canonicalizes.
"""

from __future__ import annotations

import threading
from functools import cached_property

from .abgroup import DEFAULT_CLOSURE_CAP, GroupHom, Subgroup, decompose
from .clgroup import class_group, principal_generator_fast
from .qfield import (
    Ideal,
    QuadField,
    QuadInt,
    ResourceLimitError,
    enumerate_ideals,
    factor_ideal,
    quad_field,
)


class ResidueRing:
    """O_K / f with residues in the HNF box {m + n*w : 0 <= m < a, 0 <= n < c}."""

    def __init__(self, F: QuadField, modulus: Ideal):
        if modulus.is_zero:
            raise ValueError("modulus must be a nonzero ideal")
        self.field = F
        self.modulus = modulus
        self.factorization = factor_ideal(F, modulus)
        self._primes = [P for P, _ in self.factorization]

    @property
    def size(self) -> int:
        return self.modulus.norm()

    def reduce(self, x: QuadInt) -> QuadInt:
        a, b, c = self.modulus.a, self.modulus.b, self.modulus.c
        v = x.b % c
        q = (x.b - v) // c
        u = (x.a - q * b) % a
        return QuadInt(self.field, u, v)

    def mul(self, x: QuadInt, y: QuadInt) -> QuadInt:
        return self.reduce(x * y)

    def is_unit(self, x: QuadInt) -> bool:
        return all(not P.contains(x) for P in self._primes)

    @cached_property
    def units(self) -> tuple[QuadInt, ...]:
        a, c = self.modulus.a, self.modulus.c
        out = []
        for n in range(c):
            for m in range(a):
                x = QuadInt(self.field, m, n)
                if self.is_unit(x):
                    out.append(x)
        return tuple(out)

    @cached_property
    def phi(self) -> int:
        count = len(self.units)
        expected = 1
        for P, e in self.factorization:
            q = P.norm()
            expected *= q**e - q ** (e - 1)
        if count != expected:
            raise AssertionError("unit count disagrees with the multiplicative formula")
        return count

    @cached_property
    def omega_count(self) -> int:
        """Number of roots of unity congruent to 1 modulo the modulus."""
        one = self.field.one
        return sum(1 for u in self.field.roots_of_unity if self.modulus.contains(u - one))

    def unit_orbit_key(self, x: QuadInt) -> tuple[int, int]:
        """Canonical representative of {u*x mod f : u a root of unity}."""
        best = None
        for u in self.field.roots_of_unity:
            r = self.reduce(u * x)
            key = (r.a, r.b)
            if best is None or key < best:
                best = key
        return best


class GpGroup:
    """The quotient (O_K/p^e)^x / image(roots of unity)."""

    def __init__(self, F: QuadField, prime: Ideal, e: int):
        if e < 1:
            raise ValueError("exponent must be >= 1")
        self.field = F
        self.prime = prime
        self.e = e
        self.modulus = prime**e
        self.ring = ResidueRing(F, self.modulus)
        expected = self.ring.phi * self.ring.omega_count // F.w
        gens = _greedy_generators(
            [self.ring.unit_orbit_key(u) for u in self.ring.units],
            self._mul_keys,
            self.ring.unit_orbit_key(F.one),
        )
        self._dec = decompose(gens, self._mul_keys, self.ring.unit_orbit_key(F.one))
        self.group = self._dec.group
        if self.group.order != expected:
            raise AssertionError("|G_p| disagrees with phi * omega / w_K")

    def _mul_keys(self, k1, k2):
        x = QuadInt(self.field, *k1) * QuadInt(self.field, *k2)
        return self.ring.unit_orbit_key(x)

    @property
    def order(self) -> int:
        return self.group.order

    def dlog(self, x: QuadInt) -> tuple[int, ...]:
        if not self.ring.is_unit(x):
            raise ValueError("residue is not a unit modulo p^e")
        return self._dec.to_vector(self.ring.unit_orbit_key(x))


def _greedy_generators(candidates, mul, identity):
    """Small generating set: scan candidates, keep those outside the closure."""
    gens = []
    closure = {identity}
    for x in candidates:
        if x in closure:
            continue
        gens.append(x)
        frontier = list(closure)
        for y in frontier:
            z = y
            while True:
                z = mul(z, x)
                if z in closure:
                    break
                closure.add(z)
    return gens


class RayClassGroup:
    """Cl(f) for a nonzero proper integral ideal f."""

    def __init__(self, F: QuadField, modulus: Ideal, closure_cap: int = DEFAULT_CLOSURE_CAP):
        if modulus.is_zero or modulus.is_unit_ideal():
            raise ValueError("modulus must be a nonzero proper integral ideal")
        self.field = F
        self.modulus = modulus
        self.ring = ResidueRing(F, modulus)
        self.factorization = self.ring.factorization
        self._cl = class_group(F.d)
        self._b_ideals = self._choose_b_ideals()
        expected = self._cl.h * self.ring.phi * self.ring.omega_count // F.w
        if expected > closure_cap:
            raise ResourceLimitError(
                f"|Cl(f)| = {expected} exceeds the closure cap {closure_cap}"
            )
        self.order = expected
        self._scan_representatives()
        gens = _greedy_generators(
            list(self._form_rep), self._mul_forms, self._identity_form
        )
        self._dec = decompose(gens, self._mul_forms, self._identity_form)
        self.group = self._dec.group
        if self.group.order != expected:
            raise AssertionError("|Cl(f)| disagrees with h * phi * omega / w_K")
        self._dlog = {cf: self._dec.to_vector(cf) for cf in self._form_rep}
        self._vec_rep = {self._dlog[cf]: I for cf, I in self._form_rep.items()}
        self._gen_ideals = tuple(self._form_rep[cf] for cf in self._dec.generators)

    # -- construction helpers -------------------------------------------------

    def _choose_b_ideals(self):
        """b_k: smallest-norm integral ideal coprime to f in the inverse of class k."""
        reps = self._cl.representatives_coprime(self.modulus)
        return tuple(reps[self._cl.inverse[k]] for k in range(self._cl.h))

    def _canonical_form(self, I: Ideal):
        k = self._cl.class_index(I)
        gen = principal_generator_fast(self.field, I * self._b_ideals[k])
        if gen is None:
            raise AssertionError("A * b_k must be principal")
        return (k, self.ring.unit_orbit_key(gen))

    @property
    def _identity_form(self):
        return self._canonical_form(self.field.unit_ideal)

    def _mul_forms(self, cf1, cf2):
        return self._canonical_form(self._form_rep[cf1] * self._form_rep[cf2])

    def _scan_representatives(self):
        self._form_rep = {}
        scanned = 0
        for I in enumerate_ideals(self.field, coprime_to=self.modulus):
            cf = self._canonical_form(I)
            if cf not in self._form_rep:
                self._form_rep[cf] = I
                if len(self._form_rep) == self.order:
                    return
            scanned += 1
            if scanned > 200 * self.order + 10000:
                raise ResourceLimitError(
                    "representative scan did not terminate within the expected bound"
                )

    # -- public API -----------------------------------------------------------

    def class_of_ideal(self, I: Ideal) -> tuple[int, ...]:
        """SNF vector of the ray class of an integral ideal coprime to f."""
        if I.is_zero:
            raise ValueError("zero ideal")
        if not I.is_coprime(self.modulus):
            raise ValueError("ideal is not coprime to the modulus")
        return self._dlog[self._canonical_form(I)]

    def class_of_principal(self, x: QuadInt) -> tuple[int, ...]:
        """Ray class of the principal ideal (x), for x coprime to f."""
        if not self.ring.is_unit(x):
            raise ValueError("element is not coprime to the modulus")
        cf = (self._cl.identity, self.ring.unit_orbit_key(x))
        return self._dlog[cf]

    def representative(self, vec) -> Ideal:
        """Deterministic smallest-norm integral ideal coprime to f in the class."""
        return self._vec_rep[tuple(vec)]

    def elements(self):
        return self.group.elements()

    @cached_property
    def unit_image(self) -> tuple[Subgroup, dict]:
        """The subgroup Cl(K_f/H_K) (classes of principal ideals) with residue preimages."""
        preimage = {}
        for alpha in self.ring.units:
            vec = self.class_of_principal(alpha)
            preimage.setdefault(vec, alpha)
        sub = Subgroup.from_elements(self.group, preimage)
        return sub, preimage

    @cached_property
    def divisor_ideals(self) -> tuple[Ideal, ...]:
        """All divisors of f (including O_K and f), ordered by (norm, c, b)."""
        divs = [self.field.unit_ideal]
        for P, e in self.factorization:
            divs = [D * P**j for D in divs for j in range(e + 1)]
        divs.sort(key=lambda I: (I.norm(), I.c, I.b))
        return tuple(divs)

    def level_kernel(self, fprime: Ideal) -> Subgroup:
        """Kernel of Cl(f) -> Cl(f') computed from residues congruent to 1 mod f'."""
        if not fprime.divides(self.modulus):
            raise ValueError("f' does not divide f")
        one = self.field.one
        gens = [
            self.class_of_principal(alpha)
            for alpha in self.ring.units
            if fprime.contains(alpha - one)
        ]
        return Subgroup.from_generators(self.group, gens)

    def level_map(self, target: "RayClassGroup") -> GroupHom:
        """The natural surjection Cl(f) -> Cl(f') for f' | f."""
        if target.field.d != self.field.d:
            raise ValueError("mixed-field operands")
        if not target.modulus.divides(self.modulus):
            raise ValueError("target modulus does not divide the source modulus")
        gen_images = [target.class_of_ideal(I) for I in self._gen_ideals]
        rows = []
        for i in range(self.group.rank):
            basis = tuple(1 if j == i else 0 for j in range(self.group.rank))
            w = self._dec.generator_exponents(basis)
            img = target.group.identity
            for wj, gv in zip(w, gen_images, strict=True):
                img = target.group.add(img, target.group.scale(wj, gv))
            rows.append(img)
        hom = GroupHom(self.group, target.group, tuple(rows))
        if not hom.is_surjective():
            raise AssertionError("level map must be surjective")
        return hom


_ray_cache: dict = {}
_ray_lock = threading.Lock()


def build_rayclass(F: QuadField, modulus: Ideal, closure_cap: int = DEFAULT_CLOSURE_CAP) -> RayClassGroup:
    return RayClassGroup(F, modulus, closure_cap)


def ray_class_group(d: int, modulus: Ideal, closure_cap: int = DEFAULT_CLOSURE_CAP) -> RayClassGroup:
    """Cached ray class group factory (the finished group is immutable)."""
    key = (d, modulus.a, modulus.b, modulus.c)
    with _ray_lock:
        hit = _ray_cache.get(key)
    if hit is not None:
        return hit
    R = RayClassGroup(quad_field(d), modulus, closure_cap)
    with _ray_lock:
        _ray_cache.setdefault(key, R)
    return R


def g_p(F: QuadField, prime: Ideal, e: int) -> GpGroup:
    """The unit quotient G_p = (O_K/p^e)^x / image(O_K^x)."""
    return GpGroup(F, prime, e)
