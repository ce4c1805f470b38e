"""Exact arithmetic in an imaginary quadratic field: integers, ideals, factorization.

K = Q(sqrt(d)) for a fundamental discriminant d < 0 is realized on the integral
basis {1, w} with w = (d + sqrt(d))/2, so that w satisfies
x^2 - d*x + (d^2 - d)/4 = 0 for every residue class of d mod 4 and
O_K = Z + Z*w.  Nonzero ideals are kept in upper triangular Hermite normal
form [[a, b], [0, c]], meaning a*Z + (b + c*w)*Z with c | a, c | b and
0 <= b < a; the absolute norm is a*c and the smallest positive rational
integer in the ideal is a.
"""

from __future__ import annotations

import math
import os
from dataclasses import dataclass
from fractions import Fraction
from functools import lru_cache

NORM_FACTOR_CAP = int(os.environ.get("RAYUNITS_NORM_CAP", 10**9))


class ResourceLimitError(RuntimeError):
    """A configured desk-scale cap was exceeded."""


def xgcd(a: int, b: int) -> tuple[int, int, int]:
    """Return (g, x, y) with g = gcd(a, b) = a*x + b*y and g >= 0."""
    x0, y0, x1, y1 = 1, 0, 0, 1
    while b:
        q, r = divmod(a, b)
        a, b = b, r
        x0, x1 = x1, x0 - q * x1
        y0, y1 = y1, y0 - q * y1
    if a < 0:
        a, x0, y0 = -a, -x0, -y0
    return a, x0, y0


_MR_BASES = (2, 3, 5, 7, 11, 13, 17, 19, 23, 29, 31, 37)


def is_prime(n: int) -> bool:
    if n < 2:
        return False
    for p in _MR_BASES:
        if n % p == 0:
            return n == p
    d = n - 1
    s = 0
    while d % 2 == 0:
        d //= 2
        s += 1
    for a in _MR_BASES:
        x = pow(a, d, n)
        if x in (1, n - 1):
            continue
        for _ in range(s - 1):
            x = x * x % n
            if x == n - 1:
                break
        else:
            return False
    return True


def sqrt_mod(a: int, p: int) -> int | None:
    """A square root of a modulo the prime p, or None when a is a non-residue."""
    a %= p
    if p == 2:
        return a
    if a == 0:
        return 0
    if pow(a, (p - 1) // 2, p) != 1:
        return None
    if p % 4 == 3:
        return pow(a, (p + 1) // 4, p)
    # Tonelli-Shanks
    q, s = p - 1, 0
    while q % 2 == 0:
        q //= 2
        s += 1
    z = 2
    while pow(z, (p - 1) // 2, p) != p - 1:
        z += 1
    m, c, t, r = s, pow(z, q, p), pow(a, q, p), pow(a, (q + 1) // 2, p)
    while t != 1:
        i, t2 = 0, t
        while t2 != 1:
            t2 = t2 * t2 % p
            i += 1
        b = pow(c, 1 << (m - i - 1), p)
        m, c, t, r = i, b * b % p, t * b * b % p, r * b % p
    return r


def factor_int(n: int) -> dict[int, int]:
    """Trial-division factorization; desk scale is capped at NORM_FACTOR_CAP."""
    if n <= 0:
        raise ValueError("factor_int needs a positive integer")
    if n > NORM_FACTOR_CAP:
        raise ResourceLimitError(
            f"norm {n} exceeds the trial-division cap NORM_FACTOR_CAP={NORM_FACTOR_CAP}"
        )
    out: dict[int, int] = {}
    for p in (2, 3):
        while n % p == 0:
            out[p] = out.get(p, 0) + 1
            n //= p
    f = 5
    while f * f <= n:
        for p in (f, f + 2):
            while n % p == 0:
                out[p] = out.get(p, 0) + 1
                n //= p
        f += 6
    if n > 1:
        out[n] = out.get(n, 0) + 1
    return dict(sorted(out.items()))


def _squarefree(n: int) -> bool:
    if n % 4 == 0:
        return False
    f = 3
    while f * f <= n:
        if n % (f * f) == 0:
            return False
        f += 2
    return True


def kronecker_symbol(d: int, p: int) -> int:
    """Splitting symbol of the prime p in the field of discriminant d.

    Returns -1 (inert), 0 (ramified) or +1 (split).
    """
    if not is_prime(p):
        raise ValueError(f"{p} is not prime")
    if p == 2:
        if d % 2 == 0:
            return 0
        return 1 if d % 8 == 1 else -1
    if d % p == 0:
        return 0
    return 1 if pow(d % p, (p - 1) // 2, p) == 1 else -1


@dataclass(frozen=True)
class QuadField:
    """Q(sqrt(d)) for a fundamental discriminant d < 0."""

    d: int

    def __post_init__(self):
        d = self.d
        if d >= 0:
            raise ValueError("discriminant must be negative")
        if d % 4 == 1:
            if not _squarefree(-d):
                raise ValueError(f"{d} is not a fundamental discriminant")
        elif d % 4 == 0:
            m = -d // 4
            if m % 4 not in (1, 2) or not _squarefree(m):
                # -d/4 must be squarefree and = 1 or 2 mod 4 (so d/4 = 2,3 mod 4)
                raise ValueError(f"{d} is not a fundamental discriminant")
        else:
            raise ValueError(f"{d} is not 0 or 1 mod 4")

    @property
    def trace_omega(self) -> int:
        return self.d

    @property
    def norm_omega(self) -> int:
        return (self.d * self.d - self.d) // 4

    @property
    def w(self) -> int:
        """Number of roots of unity in O_K."""
        return 6 if self.d == -3 else 4 if self.d == -4 else 2

    @property
    def roots_of_unity(self) -> tuple["QuadInt", ...]:
        if self.d == -3:
            # powers of the primitive 6th root (1 + sqrt(-3))/2 = 2 + w
            coeffs = ((1, 0), (2, 1), (1, 1), (-1, 0), (-2, -1), (-1, -1))
        elif self.d == -4:
            coeffs = ((1, 0), (2, 1), (-1, 0), (-2, -1))
        else:
            coeffs = ((1, 0), (-1, 0))
        return tuple(QuadInt(self, a, b) for a, b in coeffs)

    def element(self, a: int, b: int = 0) -> "QuadInt":
        return QuadInt(self, a, b)

    @property
    def one(self) -> "QuadInt":
        return QuadInt(self, 1, 0)

    @property
    def omega(self) -> "QuadInt":
        return QuadInt(self, 0, 1)

    @property
    def sqrt_disc(self) -> "QuadInt":
        """sqrt(d) = 2*w - d as an element of O_K."""
        return QuadInt(self, -self.d, 2)

    def norm_form(self, x: int, y: int) -> int:
        """N(x + y*w) as a binary quadratic form value."""
        return x * x + self.d * x * y + self.norm_omega * y * y

    @property
    def unit_ideal(self) -> "Ideal":
        return Ideal(self, 1, 0, 1)

    @property
    def zero_ideal(self) -> "Ideal":
        return Ideal(self, 0, 0, 0, is_zero=True)

    def principal_ideal(self, x) -> "Ideal":
        if isinstance(x, int):
            x = QuadInt(self, x, 0)
        if x.a == 0 and x.b == 0:
            return self.zero_ideal
        return ideal_from_generators(self, [x])

    def ideal(self, a: int, b: int, c: int) -> "Ideal":
        """Ideal from HNF entries [a, b, c]; validates ideality."""
        return _canonical_ideal(self, a, b, c)

    def __repr__(self):
        return f"QuadField({self.d})"


@lru_cache(maxsize=None)
def quad_field(d: int) -> QuadField:
    return QuadField(d)


@dataclass(frozen=True)
class QuadInt:
    """Element a + b*w of O_K."""

    field: QuadField
    a: int
    b: int

    def _check(self, other: "QuadInt"):
        if self.field.d != other.field.d:
            raise ValueError("mixed-field operands")

    def __add__(self, other):
        if isinstance(other, int):
            return QuadInt(self.field, self.a + other, self.b)
        self._check(other)
        return QuadInt(self.field, self.a + other.a, self.b + other.b)

    __radd__ = __add__

    def __sub__(self, other):
        if isinstance(other, int):
            return QuadInt(self.field, self.a - other, self.b)
        self._check(other)
        return QuadInt(self.field, self.a - other.a, self.b - other.b)

    def __rsub__(self, other):
        return (-self) + other

    def __neg__(self):
        return QuadInt(self.field, -self.a, -self.b)

    def __mul__(self, other):
        if isinstance(other, int):
            return QuadInt(self.field, self.a * other, self.b * other)
        self._check(other)
        t, n = self.field.trace_omega, self.field.norm_omega
        a, b, c, d = self.a, self.b, other.a, other.b
        return QuadInt(self.field, a * c - b * d * n, a * d + b * c + b * d * t)

    __rmul__ = __mul__

    def __pow__(self, k: int):
        if k < 0:
            raise ValueError("negative powers not supported in O_K")
        out = self.field.one
        base = self
        while k:
            if k & 1:
                out = out * base
            base = base * base
            k >>= 1
        return out

    def conj(self) -> "QuadInt":
        return QuadInt(self.field, self.a + self.b * self.field.trace_omega, -self.b)

    def norm(self) -> int:
        return self.field.norm_form(self.a, self.b)

    def trace(self) -> int:
        return 2 * self.a + self.b * self.field.trace_omega

    def is_zero(self) -> bool:
        return self.a == 0 and self.b == 0

    def is_unit(self) -> bool:
        return self.norm() == 1

    def __repr__(self):
        return f"({self.a}{self.b:+}w)"


@dataclass(frozen=True)
class QuadRat:
    """Field element num/den with num in O_K and den a positive integer."""

    num: QuadInt
    den: int

    @staticmethod
    def make(num: QuadInt, den: int) -> "QuadRat":
        if den == 0:
            raise ZeroDivisionError("zero denominator")
        if den < 0:
            num, den = -num, -den
        g = math.gcd(math.gcd(abs(num.a), abs(num.b)), den)
        if g > 1:
            num = QuadInt(num.field, num.a // g, num.b // g)
            den //= g
        return QuadRat(num, den)

    def norm(self) -> Fraction:
        return Fraction(self.num.norm(), self.den * self.den)

    def trace(self) -> Fraction:
        return Fraction(self.num.trace(), self.den)

    def mul_int(self, x: QuadInt) -> "QuadRat":
        return QuadRat.make(self.num * x, self.den)

    def times_ideal(self, I: "Ideal") -> "Ideal":
        """The ideal (self) * I; raises ValueError when the product is not integral."""
        J = self.num.field.principal_ideal(self.num) * I
        if J.a % self.den or J.b % self.den or J.c % self.den:
            raise ValueError("product ideal is not integral")
        return _canonical_ideal(J.field, J.a // self.den, J.b // self.den, J.c // self.den)

    def __repr__(self):
        return f"{self.num}/{self.den}"


@dataclass(frozen=True)
class Ideal:
    """Integral ideal in HNF a*Z + (b + c*w)*Z."""

    field: QuadField
    a: int
    b: int
    c: int
    is_zero: bool = False

    def norm(self) -> int:
        if self.is_zero:
            raise ValueError("zero ideal has no norm")
        return self.a * self.c

    def smallest_positive_integer(self) -> int:
        """The generator of the rational-integer sublattice: ideal ∩ Z = a*Z."""
        if self.is_zero:
            raise ValueError("zero ideal")
        return self.a

    def basis(self) -> tuple[QuadInt, QuadInt]:
        return (QuadInt(self.field, self.a, 0), QuadInt(self.field, self.b, self.c))

    def contains(self, x: QuadInt) -> bool:
        if self.is_zero:
            return x.is_zero()
        if x.b % self.c:
            return False
        q = x.b // self.c
        return (x.a - q * self.b) % self.a == 0

    def is_unit_ideal(self) -> bool:
        return not self.is_zero and self.a == 1 and self.c == 1

    def __mul__(self, other: "Ideal") -> "Ideal":
        if self.field.d != other.field.d:
            raise ValueError("mixed-field operands")
        if self.is_zero or other.is_zero:
            return self.field.zero_ideal
        u1, v1 = self.basis()
        u2, v2 = other.basis()
        prods = [u1 * u2, u1 * v2, v1 * u2, v1 * v2]
        return _hnf_from_elements(self.field, prods)

    def __pow__(self, k: int) -> "Ideal":
        if k < 0:
            raise ValueError("use inverse() for fractional powers")
        out = self.field.unit_ideal
        base = self
        while k:
            if k & 1:
                out = out * base
            base = base * base
            k >>= 1
        return out

    def __add__(self, other: "Ideal") -> "Ideal":
        """Ideal sum (the gcd of the two ideals)."""
        if self.field.d != other.field.d:
            raise ValueError("mixed-field operands")
        if self.is_zero:
            return other
        if other.is_zero:
            return self
        return _hnf_from_elements(self.field, list(self.basis()) + list(other.basis()))

    def is_coprime(self, other: "Ideal") -> bool:
        return (self + other).is_unit_ideal()

    def conj(self) -> "Ideal":
        if self.is_zero:
            return self
        u, v = self.basis()
        return _hnf_from_elements(self.field, [u.conj(), v.conj()])

    def divides(self, other: "Ideal") -> bool:
        """self | other, i.e. other is contained in self."""
        if self.is_zero:
            return other.is_zero
        if other.is_zero:
            return True
        u, v = other.basis()
        return self.contains(u) and self.contains(v)

    def divexact_int(self, m: int) -> "Ideal":
        if self.a % m or self.b % m or self.c % m:
            raise ValueError(f"ideal is not divisible by {m}")
        return _canonical_ideal(self.field, self.a // m, self.b // m, self.c // m)

    def inverse(self) -> "FracIdeal":
        """Fractional inverse conj(I)/N(I)."""
        if self.is_zero:
            raise ZeroDivisionError("zero ideal")
        return FracIdeal.make(self.conj(), self.norm())

    def text(self) -> str:
        return f"[{self.a},{self.b},{self.c}]"

    def __repr__(self):
        return f"Ideal{self.text()}"


@dataclass(frozen=True)
class FracIdeal:
    """Fractional ideal num/den with minimal positive denominator."""

    num: Ideal
    den: int

    @staticmethod
    def make(num: Ideal, den: int) -> "FracIdeal":
        if den <= 0:
            raise ValueError("denominator must be positive")
        g = math.gcd(den, num.c)  # gcd(a, b, c) = c for an HNF ideal
        if g > 1:
            num = _canonical_ideal(num.field, num.a // g, num.b // g, num.c // g)
            den //= g
        return FracIdeal(num, den)

    def basis_vectors(self) -> tuple[tuple[int, int], tuple[int, int], int]:
        """((x1, y1), (x2, y2), den) meaning the lattice spanned by (x + y*w)/den."""
        return ((self.num.a, 0), (self.num.b, self.num.c), self.den)

    def __repr__(self):
        return f"FracIdeal({self.num.text()}/{self.den})"


def _canonical_ideal(F: QuadField, a: int, b: int, c: int) -> Ideal:
    if a == 0 and b == 0 and c == 0:
        return Ideal(F, 0, 0, 0, is_zero=True)
    if a <= 0 or c <= 0:
        raise ValueError("invalid HNF entries")
    b %= a
    if a % c or b % c:
        raise ValueError("lattice is not an O_K-module (c must divide a and b)")
    t, n = F.trace_omega, F.norm_omega
    if (b * b + t * b * c + n * c * c) % (a * c):
        raise ValueError("lattice is not closed under multiplication by w")
    return Ideal(F, a, b, c)


def _hnf_from_vectors(F: QuadField, vecs: list[tuple[int, int]]) -> Ideal:
    """HNF of the Z-lattice spanned by (x, y) ~ x + y*w; must be an ideal."""
    vecs = [(x, y) for x, y in vecs if x or y]
    if not vecs:
        return F.zero_ideal
    gx, gy = 0, 0
    for x, y in vecs:
        if y == 0:
            continue
        if gy == 0:
            gx, gy = x, y
        else:
            g, s, t = xgcd(gy, y)
            gx, gy = s * gx + t * x, g
    if gy == 0:
        raise ValueError("rank-1 lattice is not an ideal")
    if gy < 0:
        gx, gy = -gx, -gy
    a = 0
    for x, y in vecs:
        q = y // gy
        a = math.gcd(a, x - q * gx)
    if a == 0:
        raise ValueError("rank-1 lattice is not an ideal")
    return _canonical_ideal(F, abs(a), gx % abs(a), gy)


def _hnf_from_elements(F: QuadField, elems: list[QuadInt]) -> Ideal:
    return _hnf_from_vectors(F, [(e.a, e.b) for e in elems])


def ideal_from_generators(F: QuadField, gens: list[QuadInt]) -> Ideal:
    """The O_K-ideal generated by gens (Z-span of gens and w*gens)."""
    elems = []
    w = F.omega
    for g in gens:
        elems.append(g)
        elems.append(g * w)
    return _hnf_from_elements(F, elems)


def different(F: QuadField) -> Ideal:
    """The different of K/Q, the principal ideal (sqrt(d))."""
    return F.principal_ideal(F.sqrt_disc)


def primes_above(F: QuadField, p: int) -> list[Ideal]:
    """Prime ideals above p, ordered by ascending HNF b-entry."""
    sym = kronecker_symbol(F.d, p)
    t, n = F.trace_omega, F.norm_omega
    if sym == -1:
        return [Ideal(F, p, 0, p)]
    if p == 2:
        roots = sorted(r for r in (0, 1) if (r * r - t * r + n) % 2 == 0)
    else:
        s = sqrt_mod(F.d % p, p)
        inv2 = pow(2, p - 2, p)
        roots = sorted({(t + s) * inv2 % p, (t - s) * inv2 % p})
    # root r of x^2 - t*x + n gives the prime p*Z + (w - r)*Z
    out = [_canonical_ideal(F, p, (-r) % p, 1) for r in roots]
    out.sort(key=lambda I: I.b)
    return out


def _valuation(I: Ideal, P: Ideal, p: int) -> tuple[int, Ideal]:
    """(v_P(I), I / P^v) by repeated exact division."""
    e = 0
    if P.c == P.a:  # inert prime (p)
        while I.a % p == 0 and I.b % p == 0 and I.c % p == 0:
            I = I.divexact_int(p)
            e += 1
        return e, I
    Pbar = P.conj()
    while P.divides(I):
        I = (I * Pbar).divexact_int(p)
        e += 1
    return e, I


def factor_ideal(F: QuadField, I: Ideal) -> list[tuple[Ideal, int]]:
    """Prime ideal factorization, ordered by (p, HNF b-entry)."""
    if I.is_zero:
        raise ValueError("cannot factor the zero ideal")
    if I.is_unit_ideal():
        return []
    out: list[tuple[Ideal, int]] = []
    rest = I
    for p in factor_int(I.norm()):
        for P in primes_above(F, p):
            e, rest = _valuation(rest, P, p)
            if e:
                out.append((P, e))
    check = F.unit_ideal
    for P, e in out:
        check = check * P**e
    if check != I:
        raise AssertionError("factorization failed to reproduce the ideal")
    return out


def ideals_of_norm(F: QuadField, m: int) -> list[Ideal]:
    """All integral ideals of norm m, ordered by (c, b)."""
    out = []
    t, n = F.trace_omega, F.norm_omega
    c = 1
    while c * c <= m:
        if m % (c * c) == 0:
            a = m // c
            for b in range(0, a, c):
                if (b * b + t * b * c + n * c * c) % (a * c) == 0:
                    out.append(Ideal(F, a, b, c))
        c += 1
    return out


def enumerate_ideals(F: QuadField, coprime_to: Ideal | None = None, start: int = 1):
    """Yield integral ideals ordered by (norm, c, b), optionally coprime to a modulus."""
    m = start
    while True:
        for I in ideals_of_norm(F, m):
            if coprime_to is None or I.is_coprime(coprime_to):
                yield I
        m += 1


def canonical_unit_multiple(x: QuadInt) -> QuadInt:
    """Deterministic representative among the unit multiples of x.

    Prefers representatives with a > 0 (or a = 0, b > 0), then the
    lexicographically smallest (a, b).
    """
    cands = [u * x for u in x.field.roots_of_unity]

    def key(z: QuadInt):
        positive = z.a > 0 or (z.a == 0 and z.b > 0)
        return (0 if positive else 1, z.a, z.b)

    return min(cands, key=key)


def principal_generator(F: QuadField, I: Ideal) -> QuadInt | None:
    """Generator of I when principal, else None.

    Enumerates lattice elements of I with norm exactly N(I) by a short-vector
    sweep over the HNF box, then canonicalizes over unit multiples.
    """
    if I.is_zero:
        raise ValueError("zero ideal")
    if I.is_unit_ideal():
        return F.one
    N = I.norm()
    t = F.trace_omega
    absd = -F.d
    a, b, c = I.a, I.b, I.c
    vmax = math.isqrt(4 * N // absd)
    for y in range(-(vmax // c), vmax // c + 1):
        v = y * c
        rem = 4 * N - absd * v * v
        if rem < 0:
            continue
        s = math.isqrt(rem)
        lo = -(-(-t * v - s) // 2)  # ceil((-t*v - s)/2)
        hi = (-t * v + s) // 2
        u = lo + ((y * b - lo) % a)
        while u <= hi:
            if u * u + t * u * v + F.norm_omega * v * v == N:
                return canonical_unit_multiple(QuadInt(F, u, v))
            u += a
    return None


def parse_ideal(F: QuadField, text: str) -> Ideal:
    """Parse `[a,b,c]` HNF text or a rational integer n (meaning n*O_K)."""
    text = text.strip()
    if text.startswith("["):
        if not text.endswith("]"):
            raise ValueError(f"malformed ideal text at position {len(text)}: {text!r}")
        parts = text[1:-1].split(",")
        if len(parts) != 3:
            raise ValueError(f"ideal text needs three entries: {text!r}")
        entries = []
        pos = 1
        for p in parts:
            try:
                entries.append(int(p.strip()))
            except ValueError:
                raise ValueError(
                    f"malformed ideal text at position {pos}: {p.strip()!r}"
                ) from None
            pos += len(p) + 1
        return _canonical_ideal(F, *entries)
    try:
        n = abs(int(text))
    except ValueError:
        raise ValueError(f"malformed ideal text at position 0: {text!r}") from None
    if n == 0:
        raise ValueError("zero ideal is not a valid modulus")
    return F.principal_ideal(n)
