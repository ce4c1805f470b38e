"""Stickelberger elements, Gauss sums, and the second Kronecker limit formula.

The limit formula relates the character-weighted log sum of singular Siegel
values to the Hecke L-value at s = 1:

    L_{f_chi}(1, chi0) * prod_{p | f, p !| f_chi} (1 - conj(chi0)([p]))
        = -2*pi*chi0([gamma*d_K*f_chi])
          / (6 * N(f) * omega(f) * T_gamma(conj(chi0)) * sqrt(-d_K))
          * S_f(conj(chi)),

with N(f) the smallest positive integer in the LEVEL f and omega(f) the
number of roots of unity congruent to 1 mod f.  (Some references print
N(f_chi)*omega(f_chi) here; that normalization is only correct at f = f_chi.
The level-f form above is forced by the distribution relation of the Siegel
values and is confirmed independently by smoothed partial L-sums; dividing
both levels by N*omega gives the exact level-lowering identity

    S_f(conj chi) / (N(f) omega(f))
        = prod (1 - conj(chi0)([p])) * S_{f_chi}(conj chi0) / (N(f_chi) omega(f_chi)).)

L-values are never used as ground truth here: the precision-exact checks are
gamma-independence of the right side and the level-lowering identity; the
smoothed partial L-sum is a loose secondary check only.
"""

from __future__ import annotations

import cmath
import math
from dataclasses import dataclass
from fractions import Fraction

import mpmath

from .chars import Character, conductor, primitive_character
from .qfield import (
    Ideal,
    QuadInt,
    QuadRat,
    ResourceLimitError,
    different,
    kronecker_symbol,
    primes_above,
)
from .rayclass import RayClassGroup
from .siegel import GUARD_BITS, invariant_log


class DegenerateEulerFactor(ArithmeticError):
    """The Euler factor vanishes exactly; the division is withheld."""

    def __init__(self, undivided_rhs, euler_exponents):
        self.undivided_rhs = undivided_rhs
        self.euler_exponents = euler_exponents
        super().__init__("limit formula degenerate at this level: Euler factor is 0")


def stickelberger(R: RayClassGroup, chi: Character, prec: int = 128) -> mpmath.mpc:
    """S_f(chi) = sum over C of chi(C) * log|g_f(C)|; error <= |Cl(f)|*2^(-prec+12)."""
    if chi.group != R.group:
        raise ValueError("character does not live on this ray class group")
    if chi.is_trivial():
        raise ValueError("the Stickelberger element needs a nontrivial character")
    wp = prec + GUARD_BITS
    with mpmath.workprec(wp):
        total = mpmath.mpc(0)
        for C in R.elements():
            log_abs = invariant_log(R, C, prec).real
            total += chi.complex_value(C, wp) * log_abs
        return total


def find_gamma(R_chi: RayClassGroup, index: int = 0, scan_cap: int = 10**6) -> QuadRat:
    """A gamma with gamma * d_K * f_chi integral and coprime to f_chi.

    Scans the lattice (d_K * f_chi)^(-1) by ascending norm of the product
    ideal (ties broken by (x, y)); `index` selects the (index+1)-th valid
    element, which gives independent gammas for cross-checks.
    """
    F = R_chi.field
    f_chi = R_chi.modulus
    target = different(F) * f_chi
    lattice = target.inverse()
    (x1, y1), (x2, y2), den = lattice.basis_vectors()
    found = 0
    bound = 4
    seen_limit = 0
    while bound <= scan_cap:
        pts = []
        # all lattice points x*(x1,y1) + y*(x2,y2) with norm <= bound
        q_of = F.norm_form
        ymax = math.isqrt(4 * bound // (-F.d))
        for yy in range(-ymax - 1, ymax + 2):
            for xx in range(-ymax - abs(yy) - 2, ymax + abs(yy) + 3):
                px = xx * x1 + yy * x2
                py = xx * y1 + yy * y2
                if px == 0 and py == 0:
                    continue
                n = q_of(px, py)
                if n <= bound:
                    pts.append((n, px, py))
        pts.sort()
        count = 0
        for n, px, py in pts:
            if n <= seen_limit:
                count += 1
                continue
            gamma = QuadRat.make(QuadInt(F, px, py), den)
            prod = gamma.times_ideal(target)
            if prod.is_coprime(f_chi):
                if found == index:
                    return gamma
                found += 1
        seen_limit = bound
        bound *= 4
    raise ResourceLimitError(f"gamma scan exceeded the norm cap {scan_cap}")


def _validate_gamma(R_chi: RayClassGroup, gamma: QuadRat) -> Ideal:
    F = R_chi.field
    target = different(F) * R_chi.modulus
    try:
        prod = gamma.times_ideal(target)
    except ValueError:
        raise ValueError("invalid gamma: gamma * d_K * f_chi is not an integral ideal")
    if not prod.is_coprime(R_chi.modulus):
        raise ValueError("invalid gamma: gamma * d_K * f_chi is not coprime to f_chi")
    return prod


def gauss_sum(R_chi: RayClassGroup, chi0: Character, gamma: QuadRat, prec: int = 128) -> mpmath.mpc:
    """T_gamma(conj(chi0)) = sum over units x mod f_chi of conj(chi0)([x]) e^(2 pi i Tr(gamma x))."""
    if chi0.is_trivial():
        raise ValueError("the Gauss sum needs a nontrivial primitive character")
    if conductor(R_chi, chi0) != R_chi.modulus:
        raise ValueError("chi0 is not primitive on this level")
    _validate_gamma(R_chi, gamma)
    chibar = chi0.conj()
    wp = prec + GUARD_BITS
    with mpmath.workprec(wp):
        total = mpmath.mpc(0)
        for x in R_chi.ring.units:
            exponent = chibar.value(R_chi.class_of_principal(x)) + gamma.mul_int(x).trace()
            exponent %= 1
            total += mpmath.expjpi(2 * mpmath.mpf(exponent.numerator) / exponent.denominator)
        return total


@dataclass(frozen=True)
class LimitFormulaContext:
    """All exact inputs to the right-hand side of the limit formula."""

    R: RayClassGroup  # level f
    chi: Character
    R_chi: RayClassGroup  # level f_chi
    chi0: Character
    gamma: QuadRat
    gamma_ideal: Ideal  # gamma * d_K * f_chi, integral and coprime to f_chi
    n_f: int  # smallest positive integer in the level f
    omega_f: int
    n_fchi: int  # smallest positive integer in f_chi
    omega_fchi: int

    @property
    def f(self) -> Ideal:
        return self.R.modulus

    @property
    def f_chi(self) -> Ideal:
        return self.R_chi.modulus

    def normalization_ratio(self) -> Fraction:
        """(N(f) * omega(f)) / (N(f_chi) * omega(f_chi))."""
        return Fraction(self.n_f * self.omega_f, self.n_fchi * self.omega_fchi)


def make_limit_context(
    R: RayClassGroup, chi: Character, gamma: QuadRat | None = None, gamma_index: int = 0
) -> LimitFormulaContext:
    if chi.is_trivial():
        raise ValueError("the limit formula needs a nontrivial character")
    f_chi, R_chi, chi0 = primitive_character(R, chi)
    if gamma is None:
        gamma = find_gamma(R_chi, index=gamma_index)
    gamma_ideal = _validate_gamma(R_chi, gamma)
    return LimitFormulaContext(
        R=R,
        chi=chi,
        R_chi=R_chi,
        chi0=chi0,
        gamma=gamma,
        gamma_ideal=gamma_ideal,
        n_f=R.modulus.smallest_positive_integer(),
        omega_f=R.ring.omega_count,
        n_fchi=f_chi.smallest_positive_integer(),
        omega_fchi=R_chi.ring.omega_count,
    )


def euler_factor_exponents(ctx: LimitFormulaContext) -> list[Fraction]:
    """Exponents of conj(chi0)([p]) over primes p | f with p !| f_chi."""
    chibar0 = ctx.chi0.conj()
    out = []
    for P, _ in ctx.R.factorization:
        if not P.divides(ctx.f_chi):
            out.append(chibar0.value(ctx.R_chi.class_of_ideal(P)))
    return out


def kronecker_rhs(ctx: LimitFormulaContext, prec: int = 128) -> mpmath.mpc:
    """The limit-formula right side divided by the Euler factor: predicted L_{f_chi}(1, chi0).

    The constant carries N(f) * omega(f) of the level (see the module
    docstring; this is the normalization confirmed by partial L-sums).
    Raises DegenerateEulerFactor (carrying the undivided value) when some
    conj(chi0)([p]) equals 1 exactly.
    """
    exps = euler_factor_exponents(ctx)
    wp = prec + GUARD_BITS
    s_val = stickelberger(ctx.R, ctx.chi.conj(), prec)
    t_val = gauss_sum(ctx.R_chi, ctx.chi0, ctx.gamma, prec)
    with mpmath.workprec(wp):
        chi0_at_gamma = ctx.chi0.complex_value(
            ctx.R_chi.class_of_ideal(ctx.gamma_ideal), wp
        )
        const = -2 * mpmath.pi * chi0_at_gamma / (
            6 * ctx.n_f * ctx.omega_f * t_val * mpmath.sqrt(mpmath.mpf(-ctx.R.field.d))
        )
        undivided = const * s_val
        if any(e == 0 for e in exps):
            raise DegenerateEulerFactor(undivided, exps)
        euler = mpmath.mpc(1)
        for e in exps:
            euler *= 1 - mpmath.expjpi(2 * mpmath.mpf(e.numerator) / e.denominator)
        return undivided / euler


def level_lowering_identity(ctx: LimitFormulaContext, prec: int = 128):
    """Both sides of the exact level-lowering identity (normalized form).

    Returns (lhs, rhs) with
        lhs = S_f(conj chi),
        rhs = (N(f) omega(f)) / (N(f_chi) omega(f_chi))
              * prod(1 - conj(chi0)([p])) * S_{f_chi}(conj chi0);
    a pure Siegel-value identity, exact to precision.
    """
    lhs = stickelberger(ctx.R, ctx.chi.conj(), prec)
    if ctx.f_chi == ctx.f:
        return lhs, lhs
    lhs_unnorm, rhs_unnorm = lhs, _euler_times_lower(ctx, prec)
    ratio = ctx.normalization_ratio()
    with mpmath.workprec(prec + GUARD_BITS):
        return lhs_unnorm, rhs_unnorm * ratio.numerator / ratio.denominator


def level_lowering_identity_as_stated(ctx: LimitFormulaContext, prec: int = 128):
    """Both sides of the identity WITHOUT the level normalization factor.

    This is the form some references print; it is exact only when
    N(f)*omega(f) = N(f_chi)*omega(f_chi) (in particular at f = f_chi).
    """
    lhs = stickelberger(ctx.R, ctx.chi.conj(), prec)
    if ctx.f_chi == ctx.f:
        return lhs, lhs
    return lhs, _euler_times_lower(ctx, prec)


def _euler_times_lower(ctx: LimitFormulaContext, prec: int) -> mpmath.mpc:
    exps = euler_factor_exponents(ctx)
    s_low = stickelberger(ctx.R_chi, ctx.chi0.conj(), prec)
    with mpmath.workprec(prec + GUARD_BITS):
        euler = mpmath.mpc(1)
        for e in exps:
            euler *= 1 - mpmath.expjpi(2 * mpmath.mpf(e.numerator) / e.denominator)
        return euler * s_low


def _smallest_prime_factors(bound: int) -> list[int]:
    spf = list(range(bound + 1))
    for p in range(2, math.isqrt(bound) + 1):
        if spf[p] == p:
            for m in range(p * p, bound + 1, p):
                if spf[m] == m:
                    spf[m] = p
    return spf


def _prime_power_coefficients(R: RayClassGroup, chi: Character, p: int, kmax: int) -> list[complex]:
    """a_{p^k} = sum of chi over ideals of norm p^k, for k = 0..kmax."""
    F = R.field
    f = R.modulus

    def chi_at(I: Ideal) -> complex:
        if not I.is_coprime(f):
            return 0j
        t = chi.value(R.class_of_ideal(I))
        return cmath.exp(2j * cmath.pi * float(t))

    sym = kronecker_symbol(F.d, p)
    out = [1 + 0j]
    if sym == -1:
        Ip = F.principal_ideal(p)
        val = chi_at(Ip)
        for k in range(1, kmax + 1):
            out.append(val ** (k // 2) if k % 2 == 0 else 0j)
        return out
    if sym == 0:
        P = primes_above(F, p)[0]
        val = chi_at(P)
        for k in range(1, kmax + 1):
            out.append(val**k)
        return out
    P, Pbar = primes_above(F, p)
    if P.is_coprime(f) and Pbar.is_coprime(f):
        x = chi_at(P)
        t_p = chi.value(R.class_of_principal(QuadInt(F, p, 0)))
        y = cmath.exp(2j * cmath.pi * float(t_p)) / x  # chi((p)) = chi(P) chi(Pbar)
    else:
        x, y = chi_at(P), chi_at(Pbar)
    for k in range(1, kmax + 1):
        out.append(sum(x**i * y ** (k - i) for i in range(k + 1)))
    return out


def l_partial_sum(
    R: RayClassGroup,
    chi: Character,
    s: float = 1.0,
    norm_bound: int = 10**5,
    smoothing: str = "cesaro",
) -> tuple[complex, float]:
    """Smoothed partial sum of L_f(s, chi) over ideals of norm <= norm_bound.

    Hardware-double accumulation (the smoothing error estimate dominates
    rounding by many orders).  Returns (value, empirical error estimate),
    the estimate being the difference of the last two smoothed blocks.
    """
    if chi.is_trivial():
        raise ValueError("partial L-sums need a nontrivial character")
    if smoothing not in ("cesaro", "none"):
        raise ValueError("smoothing must be 'cesaro' or 'none'")
    B = int(norm_bound)
    spf = _smallest_prime_factors(B)
    coeff = [0j] * (B + 1)
    coeff[1] = 1 + 0j
    pk_cache: dict[int, list[complex]] = {}
    for m in range(2, B + 1):
        p = spf[m]
        k = 0
        mm = m
        while mm % p == 0:
            mm //= p
            k += 1
        if p not in pk_cache:
            kmax = int(math.log(B, p)) + 1
            pk_cache[p] = _prime_power_coefficients(R, chi, p, kmax)
        coeff[m] = coeff[mm] * pk_cache[p][k]

    block = max(1, math.isqrt(B))
    partials = []
    acc = 0j
    next_mark = block
    for m in range(1, B + 1):
        c = coeff[m]
        if c:
            acc += c / (m**s)
        if m >= next_mark:
            partials.append(acc)
            next_mark += block
    if partials and partials[-1] != acc:
        partials.append(acc)

    if smoothing == "none":
        value = acc
        err = abs(partials[-1] - partials[-2]) if len(partials) >= 2 else float("inf")
        return value, err

    def cesaro(upto: int) -> complex:
        tail = partials[upto // 2 : upto]
        return sum(tail) / len(tail)

    j = len(partials)
    if j < 4:
        return acc, float("inf")
    value = cesaro(j)
    prev = cesaro(j - 1)
    return value, abs(value - prev)
