"""Arbitrary-precision Siegel functions and their singular values on ray classes.

The Siegel function is the q-product

    g_{r1,r2}(tau) = -q^{B2(r1)/2} e^{pi i r2 (r1-1)} (1 - q^{r1} e^{2 pi i r2})
                     prod_{n>=1} (1 - q^{n+r1} e^{2 pi i r2})(1 - q^{n-r1} e^{-2 pi i r2})

with q^x meaning exp(2 pi i tau x) and B2(X) = X^2 - X + 1/6.  The singular
value attached to a ray class C mod f is g at the reduced basis quotient of
f*c^{-1} raised to the 12N-th power, N the smallest positive integer in f.
All evaluation happens in log space at a guarded working precision.

Truncation contract: the product over n is cut at the smallest n_max with
(n_max - |r1| - 1) * 2*pi*Im(tau) >= (P + 16) * ln 2.  Each omitted factor
1 - z has |z| <= 2^-(P+16) * rho^(n - n_max) with rho = exp(-2*pi*Im(tau)),
so the omitted log-mass is a geometric series bounded by
2^-(P+16) * 2/(1 - rho); for Im(tau) >= 0.1 this is below 2^-(P+14) and the
returned value carries relative error <= 2^(-P+8).
"""

from __future__ import annotations

import math
import threading
from dataclasses import dataclass
from fractions import Fraction

import mpmath

from .qfield import FracIdeal, Ideal, QuadField
from .rayclass import RayClassGroup

GUARD_BITS = 32

_log_cache: dict = {}
_cache_lock = threading.Lock()


def bernoulli2(x: Fraction | int) -> Fraction:
    """The second Bernoulli polynomial B2(x) = x^2 - x + 1/6, exactly."""
    x = Fraction(x)
    return x * x - x + Fraction(1, 6)


def _to_mpf(x: Fraction) -> mpmath.mpf:
    return mpmath.mpf(x.numerator) / x.denominator


def _truncation_index(r1: Fraction, im_tau, prec: int) -> int:
    """Smallest n with (n - |r1| - 1) * 2*pi*Im(tau) >= (prec + 16) * ln 2."""
    bound = (prec + 16) * math.log(2) / (2 * math.pi * float(im_tau))
    return max(1, math.ceil(bound + abs(float(r1)) + 1))


def _log_siegel(r1: Fraction, r2: Fraction, tau, prec: int) -> mpmath.mpc:
    """log(-g_{r1,r2}(tau)) at working precision prec + GUARD_BITS.

    The leading -1 is dropped (it cancels in every 12N-th power); callers that
    need g itself multiply by -1 after exponentiating.
    """
    if r1.denominator == 1 and r2.denominator == 1:
        raise ValueError("(r1, r2) must not be integral")
    wp = prec + GUARD_BITS
    with mpmath.workprec(wp):
        tau = mpmath.mpc(tau)
        if tau.imag <= 0:
            raise ValueError("tau must lie in the upper half plane")
        two_pi_i = 2j * mpmath.pi
        r1f, r2f = _to_mpf(r1), _to_mpf(r2)
        total = mpmath.pi * 1j * (tau * _to_mpf(bernoulli2(r1)) + r2f * (r1f - 1))
        n_max = _truncation_index(r1, tau.imag, prec)
        # n = 0 factor, then the paired factors for 1 <= n <= n_max
        total += mpmath.log1p(-mpmath.exp(two_pi_i * (tau * r1f + r2f)))
        for n in range(1, n_max + 1):
            total += mpmath.log1p(-mpmath.exp(two_pi_i * (tau * (n + r1f) + r2f)))
            total += mpmath.log1p(-mpmath.exp(two_pi_i * (tau * (n - r1f) - r2f)))
        return total


def siegel_g(r1: Fraction | int, r2: Fraction | int, tau, prec: int = 128) -> mpmath.mpc:
    """The Siegel function g_{r1,r2}(tau), relative error <= 2^(-prec+8)."""
    r1, r2 = Fraction(r1), Fraction(r2)
    log_val = _log_siegel(r1, r2, tau, prec)
    with mpmath.workprec(prec + GUARD_BITS):
        return -mpmath.exp(log_val)


@dataclass(frozen=True)
class InvariantSpec:
    """Exact data defining the singular value at a ray class."""

    field: QuadField
    modulus: Ideal
    class_vec: tuple[int, ...]
    representative: Ideal  # integral, coprime to f, smallest norm in the class
    omega1: tuple[int, int]  # (x, y) meaning (x + y*w)/den
    omega2: tuple[int, int]
    den: int
    smallest_n: int  # N, the smallest positive integer in f
    r1: int
    r2: int

    def fractions(self) -> tuple[Fraction, Fraction]:
        return Fraction(self.r1, self.smallest_n), Fraction(self.r2, self.smallest_n)


def _lagrange_reduce(F: QuadField, v1, v2):
    """Two-term Gauss/Lagrange reduction for the norm form lattice basis."""

    def Q(v):
        return F.norm_form(v[0], v[1])

    while True:
        if Q(v1) > Q(v2):
            v1, v2 = v2, v1
        q1 = Q(v1)
        two_b = Q((v1[0] + v2[0], v1[1] + v2[1])) - q1 - Q(v2)
        m = (two_b + q1) // (2 * q1)
        if m == 0:
            return v1, v2
        v2 = (v2[0] - m * v1[0], v2[1] - m * v1[1])


def invariant_spec(R: RayClassGroup, C) -> InvariantSpec:
    """Reduced-basis data for the invariant at class C of Cl(f)."""
    F = R.field
    f = R.modulus
    C = tuple(C)
    rep = R.representative(C)
    lattice = FracIdeal.make(f * rep.conj(), rep.norm())  # f * c^{-1}
    (x1, y1), (x2, y2), den = lattice.basis_vectors()
    short, other = _lagrange_reduce(F, (x1, y1), (x2, y2))
    w2, w1 = short, other  # shortest vector as denominator maximizes Im(tau)
    # sign(Im(w1/w2)) = sign(y1*x2 - x1*y2)
    if w1[1] * w2[0] - w1[0] * w2[1] < 0:
        w1 = (-w1[0], -w1[1])
    N = f.smallest_positive_integer()
    det = w1[0] * w2[1] - w2[0] * w1[1]
    num1 = N * den * w2[1]
    num2 = -N * den * w1[1]
    if num1 % det or num2 % det:
        raise AssertionError("N = r1*w1 + r2*w2 must have an integer solution")
    r1, r2 = num1 // det, num2 // det
    if r1 % N == 0 and r2 % N == 0:
        raise AssertionError("(r1/N, r2/N) must not be integral for a proper modulus")
    return InvariantSpec(F, f, C, rep, w1, w2, den, N, r1, r2)


def _tau_of(spec: InvariantSpec, wp: int) -> mpmath.mpc:
    with mpmath.workprec(wp):
        F = spec.field
        sq = mpmath.sqrt(mpmath.mpf(-F.d))
        omega = mpmath.mpc(F.d, sq) / 2
        w1 = spec.omega1[0] + spec.omega1[1] * omega
        w2 = spec.omega2[0] + spec.omega2[1] * omega
        return w1 / w2


def _invariant_log_from_basis(
    F: QuadField, omega1, omega2, den: int, N: int, prec: int
) -> mpmath.mpc:
    """12N * log g at the basis quotient; r's solved exactly from the basis."""
    det = omega1[0] * omega2[1] - omega2[0] * omega1[1]
    num1, num2 = N * den * omega2[1], -N * den * omega1[1]
    if num1 % det or num2 % det:
        raise ValueError("N is not an integer combination of the basis")
    r1 = Fraction(num1 // det, N) % 1
    r2 = Fraction(num2 // det, N) % 1
    wp = prec + GUARD_BITS
    with mpmath.workprec(wp):
        sq = mpmath.sqrt(mpmath.mpf(-F.d))
        omega = mpmath.mpc(F.d, sq) / 2
        tau = (omega1[0] + omega1[1] * omega) / (omega2[0] + omega2[1] * omega)
        return 12 * N * _log_siegel(r1, r2, tau, prec)


def invariant_log(R: RayClassGroup, C, prec: int = 128) -> mpmath.mpc:
    """A logarithm of the invariant at C: exp of it is the 12N-th power value.

    The real part is exactly log|g_f(C)| (no branch ambiguity); the imaginary
    part is one branch of the argument.  Cached per (field, modulus, C, prec).
    """
    C = tuple(C)
    key = (R.field.d, R.modulus.a, R.modulus.b, R.modulus.c, C, prec)
    with _cache_lock:
        hit = _log_cache.get(key)
    if hit is not None:
        return hit
    spec = invariant_spec(R, C)
    val = _invariant_log_from_basis(
        spec.field, spec.omega1, spec.omega2, spec.den, spec.smallest_n, prec
    )
    with _cache_lock:
        _log_cache.setdefault(key, val)
    return val


def invariant(R: RayClassGroup, C, prec: int = 128) -> mpmath.mpc:
    """The Siegel-Ramachandra singular value g_f(C) at precision prec bits."""
    log_val = invariant_log(R, C, prec)
    with mpmath.workprec(prec + GUARD_BITS):
        return mpmath.exp(log_val)


def invariant_err_log2(R: RayClassGroup, C, prec: int) -> int:
    """Conservative log2 bound for the relative error of invariant()."""
    log_val = invariant_log(R, C, prec)
    with mpmath.workprec(64):
        mag = float(abs(log_val)) + 4.0
    return int(math.ceil(math.log2(mag))) - prec - GUARD_BITS + 16
