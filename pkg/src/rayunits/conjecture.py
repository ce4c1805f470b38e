"""Hypothesis checking and numerical generation verdicts for subfields of K_f.

A subfield K <= L <= K_f corresponds to the subgroup S_L = Cl(K_f/L) of
Cl(f).  The engine checks the per-prime ord_nu hypothesis (the exceptional
set h_{L,f}), the reduction hypotheses, and the rational assumption sum, then
verifies numerically that the conjugates of N_{K_f/L}(g_f(C)^n) (a product of
singular Siegel values over S_L, one factor per class) are pairwise distinct
in exactly [L:K] clusters.  Verdicts: a FAIL is only emitted when two
conjugates agree far below the error bound while the rest separate cleanly;
insufficient separation is INCONCLUSIVE with a suggested precision.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from fractions import Fraction

import mpmath

from .abgroup import Subgroup, intersect, join
from .qfield import Ideal, factor_int, kronecker_symbol, quad_field
from .rayclass import RayClassGroup, g_p, ray_class_group
from .siegel import GUARD_BITS, invariant_log


@dataclass(frozen=True)
class SubfieldSpec:
    R: RayClassGroup
    S_L: Subgroup
    degree: int  # [L : K]
    S_LHK: Subgroup  # S_L ∩ Cl(K_f/H_K)
    index_f_LHK: int  # [K_f : L H_K] = |S_LHK|

    @property
    def is_vacuous(self) -> bool:
        """S_L = Cl(f), i.e. L = K: generation is trivially true."""
        return self.degree == 1


def make_subfield_spec(R: RayClassGroup, S_L: Subgroup) -> SubfieldSpec:
    if S_L.parent != R.group:
        raise ValueError("subgroup does not live in this ray class group")
    HK, _ = R.unit_image
    S_LHK = intersect(S_L, HK)
    degree = R.order // S_L.order
    if degree * S_L.order != R.order:
        raise AssertionError("subgroup order must divide the group order")
    return SubfieldSpec(R, S_L, degree, S_LHK, S_LHK.order)


@dataclass(frozen=True)
class PrimeHypothesis:
    prime: Ideal
    exponent: int
    gp_order: int
    nu: int | None  # witness rational prime, if any
    i_p: int | None  # 1 if nu = 2 else 0
    in_h_set: bool
    reduction_violated: bool  # S_L contains ker(Cl(f) -> Cl(f p^-e)), i.e. L <= K_{f p^-e}


def prime_hypotheses(spec: SubfieldSpec) -> list[PrimeHypothesis]:
    """Per-prime ord_nu search and reduction flags, in factorization order."""
    R = spec.R
    out = []
    m = spec.index_f_LHK
    for P, e in R.factorization:
        gp_order = g_p(R.field, P, e).order
        nu_found, i_found = None, None
        for nu in factor_int(gp_order):
            i_p = 1 if nu == 2 else 0
            ord_g = _ord_at(gp_order, nu)
            ord_m = _ord_at(m, nu)
            if ord_g > ord_m + i_p:
                nu_found, i_found = nu, i_p
                break
        lower = _divide_out(R.modulus, P, e)
        if lower.is_unit_ideal():
            HK, _ = R.unit_image
            violated = HK.elements <= spec.S_L.elements
        else:
            violated = R.level_kernel(lower).elements <= spec.S_L.elements
        out.append(
            PrimeHypothesis(
                prime=P,
                exponent=e,
                gp_order=gp_order,
                nu=nu_found,
                i_p=i_found,
                in_h_set=nu_found is None,
                reduction_violated=violated,
            )
        )
    return out


def _ord_at(n: int, p: int) -> int:
    e = 0
    while n % p == 0:
        n //= p
        e += 1
    return e


def _divide_out(f: Ideal, P: Ideal, e: int) -> Ideal:
    """f * P^-e, exactly."""
    prod = P**e
    quotient = f * prod.conj()
    return quotient.divexact_int(prod.norm())


def h_set(spec: SubfieldSpec) -> set[Ideal]:
    """The exceptional primes of f for which no ord_nu witness exists."""
    return {h.prime for h in prime_hypotheses(spec) if h.in_h_set}


@dataclass(frozen=True)
class AssumptionReport:
    hypotheses: tuple[PrimeHypothesis, ...]
    not_contained_in_HK: bool  # L is not a subfield of H_K
    reduction_ok: bool  # no prime has L <= K_{f p^-e}
    terms: tuple[tuple[str, Fraction], ...]  # (prime text, 1/[L : L ∩ K_{f p^-e}])
    total: Fraction
    holds: bool  # total <= 1/2


def assumption_check(spec: SubfieldSpec) -> AssumptionReport:
    """The exact rational sum of 1/[L : L ∩ K_{f p^-e}] over the exceptional primes."""
    R = spec.R
    hyps = tuple(prime_hypotheses(spec))
    HK, _ = R.unit_image
    not_in_HK = not (HK.elements <= spec.S_L.elements)
    reduction_ok = not any(h.reduction_violated for h in hyps)
    terms = []
    total = Fraction(0)
    for h in hyps:
        if not h.in_h_set:
            continue
        lower = _divide_out(R.modulus, h.prime, h.exponent)
        if lower.is_unit_ideal():
            ker = HK
        else:
            ker = R.level_kernel(lower)
        # [L : L ∩ K_{f'}] = |join(S_L, ker)| / |S_L|
        idx = join(spec.S_L, ker).order // spec.S_L.order
        term = Fraction(1, idx)
        terms.append((h.prime.text(), term))
        total += term
    return AssumptionReport(
        hypotheses=hyps,
        not_contained_in_HK=not_in_HK,
        reduction_ok=reduction_ok,
        terms=tuple(terms),
        total=total,
        holds=total <= Fraction(1, 2),
    )


def coset_representatives(R: RayClassGroup, S_L: Subgroup) -> list[tuple[int, ...]]:
    """Lexicographically minimal representatives of the S_L-cosets."""
    G = R.group
    reps = {min(G.add(e, s) for s in S_L.elements) for e in G.elements()}
    return sorted(reps)


def norm_to_L(spec: SubfieldSpec, C, n: int, prec: int = 128) -> tuple[mpmath.mpc, int]:
    """N_{K_f/L}(g_f(C)^n) = prod over E in S_L of g_f(C*E)^n, in log space.

    Returns (value, err_bound_log2) with relative error
    <= |S_L| * |n| * 2^(-prec+12).
    """
    if n == 0:
        raise ValueError("n must be a nonzero integer")
    R = spec.R
    C = tuple(C)
    wp = prec + GUARD_BITS
    with mpmath.workprec(wp):
        total = mpmath.mpc(0)
        for E in spec.S_L.elements:
            total += invariant_log(R, R.group.add(C, E), prec)
        value = mpmath.exp(n * total)
    err_log2 = -prec + 12 + max(spec.S_L.order * abs(n), 1).bit_length()
    return value, err_log2


@dataclass
class ConjectureReport:
    spec: SubfieldSpec
    n: int
    base_class: tuple[int, ...]
    prec: int
    unconditional: bool
    assumption: AssumptionReport | None
    norm_value: mpmath.mpc | None
    conjugates: list[mpmath.mpc]
    distinct_count: int
    expected_degree: int
    min_separation_ratio: float  # min distance / (rel error bound * scale)
    err_bound_log2: int
    verdict: str  # PASS | FAIL | INCONCLUSIVE
    suggested_prec: int | None
    poly_coefficients: list[tuple[int, int]]
    poly_residuals: list[float]
    notes: list[str] = field(default_factory=list)


def verify_generation(
    spec: SubfieldSpec,
    C,
    n: int,
    prec: int = 256,
    unconditional: bool = False,
) -> ConjectureReport:
    """Numerical verdict on L = K(N_{K_f/L}(g_f(C)^n)).

    Conjugates are indexed by the S_L-cosets; PASS iff the cluster count at
    tolerance 4x the error bound equals [L:K] with separation margin >= 2x.
    """
    if n == 0:
        raise ValueError("n must be a nonzero integer")
    R = spec.R
    C = tuple(C)
    notes: list[str] = []
    assumption = None
    if spec.is_vacuous:
        value, err_log2 = norm_to_L(spec, C, n, prec)
        coeffs, residuals = _round_poly([value], R.field, prec)
        return ConjectureReport(
            spec=spec,
            n=n,
            base_class=C,
            prec=prec,
            unconditional=unconditional,
            assumption=None,
            norm_value=value,
            conjugates=[value],
            distinct_count=1,
            expected_degree=1,
            min_separation_ratio=float("inf"),
            err_bound_log2=err_log2,
            verdict="PASS",
            suggested_prec=None,
            poly_coefficients=coeffs,
            poly_residuals=residuals,
            notes=["vacuous: L = K, a single conjugate"],
        )
    assumption = assumption_check(spec)
    if not unconditional:
        if not assumption.not_contained_in_HK:
            raise ValueError(
                "L is contained in H_K; reduce the modulus or run unconditionally"
            )
        if not assumption.reduction_ok:
            raise ValueError(
                "reduce the modulus: L lies in K_{f p^-e} for some prime p"
            )
        if not assumption.holds:
            raise ValueError(
                "assumption sum exceeds 1/2; run unconditionally to test the conjecture"
            )
    elif not (assumption.reduction_ok and assumption.holds and assumption.not_contained_in_HK):
        notes.append("unconditional test of the conjecture (hypotheses not established)")

    reps = coset_representatives(R, spec.S_L)
    wp = prec + GUARD_BITS
    conjugates = []
    err_log2 = -prec + 12 + max(spec.S_L.order * abs(n), 1).bit_length()
    with mpmath.workprec(wp):
        for E1 in reps:
            total = mpmath.mpc(0)
            for E in spec.S_L.elements:
                total += invariant_log(R, R.group.add(R.group.add(C, E1), E), prec)
            conjugates.append(mpmath.exp(n * total))
        rel_bound = mpmath.mpf(2) ** err_log2
        m = len(conjugates)
        parent = list(range(m))

        def find(i):
            while parent[i] != i:
                parent[i] = parent[parent[i]]
                i = parent[i]
            return i

        min_ratio = mpmath.inf
        for i in range(m):
            for j in range(i + 1, m):
                dist = abs(conjugates[i] - conjugates[j])
                scale = abs(conjugates[i]) + abs(conjugates[j])
                tol = 4 * rel_bound * scale
                if dist <= tol:
                    pi, pj = find(i), find(j)
                    if pi != pj:
                        parent[pi] = pj
                else:
                    ratio = dist / (rel_bound * scale)
                    min_ratio = min(min_ratio, ratio)
        clusters: dict[int, list[int]] = {}
        for i in range(m):
            clusters.setdefault(find(i), []).append(i)
        count = len(clusters)

        expected = spec.degree
        suggested = None
        if count == expected and (min_ratio == mpmath.inf or min_ratio >= 2):
            verdict = "PASS"
        elif count == expected:
            verdict = "INCONCLUSIVE"
            suggested = 2 * prec
        else:
            # a cluster collapsed: FAIL only when the coincidence is far below
            # the error bound while the other conjugates separate cleanly
            max_intra = mpmath.mpf(0)
            for members in clusters.values():
                for a in range(len(members)):
                    for b in range(a + 1, len(members)):
                        i, j = members[a], members[b]
                        scale = abs(conjugates[i]) + abs(conjugates[j])
                        if scale > 0:
                            max_intra = max(
                                max_intra, abs(conjugates[i] - conjugates[j]) / scale
                            )
            clean_coincidence = max_intra < rel_bound / 16
            clean_separation = min_ratio == mpmath.inf or min_ratio >= 16
            if clean_coincidence and clean_separation:
                verdict = "FAIL"
                notes.append(f"conjecture violated at precision {prec}")
            else:
                verdict = "INCONCLUSIVE"
                suggested = 2 * prec
        coeffs, residuals = _round_poly(conjugates, R.field, prec)
        min_ratio_f = float(min_ratio) if min_ratio != mpmath.inf else float("inf")
    return ConjectureReport(
        spec=spec,
        n=n,
        base_class=C,
        prec=prec,
        unconditional=unconditional,
        assumption=assumption,
        norm_value=conjugates[reps.index(min(reps))] if reps else None,
        conjugates=conjugates,
        distinct_count=count,
        expected_degree=expected,
        min_separation_ratio=min_ratio_f,
        err_bound_log2=err_log2,
        verdict=verdict,
        suggested_prec=suggested,
        poly_coefficients=coeffs,
        poly_residuals=residuals,
        notes=notes,
    )


def _round_poly(conjugates, F, prec):
    """Expand prod(x - v) and round coefficients to O_K = Z + Z*w."""
    with mpmath.workprec(prec + GUARD_BITS):
        coeffs = [mpmath.mpc(1)]
        for v in conjugates:
            nxt = [mpmath.mpc(0)] * (len(coeffs) + 1)
            for i, cf in enumerate(coeffs):
                nxt[i] += cf
                nxt[i + 1] -= cf * v
            coeffs = nxt
        omega = mpmath.mpc(F.d, mpmath.sqrt(mpmath.mpf(-F.d))) / 2
        rounded, residuals = [], []
        for cf in coeffs:
            b = mpmath.nint(cf.imag / omega.imag)
            a = mpmath.nint(cf.real - b * omega.real)
            rounded.append((int(a), int(b)))
            residuals.append(float(abs(cf - (a + b * omega))))
    return rounded, residuals


def predicted_norm_collapse(R: RayClassGroup, S_L: Subgroup) -> bool:
    """Does the distribution relation force N_{K_f/L}(g_f(C)^n) into K?

    When L lies in the level-f*p^-e ray class field AND the Artin symbol of p
    acts trivially on L (the class of p at the lower level lands in the image
    of S_L), the norm collapses to a Galois-invariant value, so no power of it
    can generate L over K.  This is exactly the situation the reduction
    hypothesis excludes.
    """
    spec = make_subfield_spec(R, S_L)
    if spec.is_vacuous:
        return False
    for h in prime_hypotheses(spec):
        if not h.reduction_violated:
            continue
        lower = _divide_out(R.modulus, h.prime, h.exponent)
        if lower.is_unit_ideal():
            continue
        lower_R = ray_class_group(R.field.d, lower)
        hom = R.level_map(lower_R)
        image = Subgroup.from_generators(
            lower_R.group, [hom.apply(v) for v in S_L.small_generators]
        )
        if image.contains(lower_R.class_of_ideal(h.prime)):
            return True
    return False


# -- the case table of prime powers with tiny unit quotients ------------------


def small_gp_listed(d: int, p: int, e: int) -> bool:
    """Is (d, p, e) in the case table of prime powers with |G_p| in {1, 2}?"""
    if d == -4:
        return (p == 2 and e in (1, 2, 3, 4)) or (p == 3 and e == 1) or (p == 5 and e == 1)
    if d == -3:
        return (p == 2 and e in (1, 2)) or (p == 3 and e in (1, 2)) or (p == 7 and e == 1) or (p == 13 and e == 1)
    if p == 2 and e in (1, 2, 3):
        return kronecker_symbol(d, 2) != -1
    if p == 3 and e == 1:
        return kronecker_symbol(d, 3) != -1
    if p == 5 and e == 1:
        return kronecker_symbol(d, 5) != -1
    return False


def fundamental_discriminants(max_abs: int) -> list[int]:
    out = []
    for d in range(-3, -max_abs - 1, -1):
        try:
            quad_field(d)
        except ValueError:
            continue
        out.append(d)
    return out


def small_quotient_table_scan(max_abs_d: int = 40, max_norm: int = 200) -> list[tuple]:
    """Exhaustive scan: |G_p| <= 2 holds exactly for the listed (d, p, e) cases.

    Returns the scanned rows (d, p-norm, p, e, |G_p|, listed); raises on any
    mismatch between the table and the computed order.
    """
    from .qfield import primes_above

    rows = []
    for d in fundamental_discriminants(max_abs_d):
        F = quad_field(d)
        p = 2
        while p * p <= max_norm or p <= max_norm:
            if kronecker_symbol(d, p) == -1:
                base_norm = p * p
            else:
                base_norm = p
            if base_norm <= max_norm:
                for P in primes_above(F, p):
                    e = 1
                    while P.norm() ** e <= max_norm:
                        order = g_p(F, P, e).order
                        listed = small_gp_listed(d, p, e)
                        if (order <= 2) != listed:
                            raise AssertionError(
                                f"table mismatch at d={d}, p={p}, e={e}: |G_p|={order}"
                            )
                        rows.append((d, P.norm(), p, e, order, listed))
                        e += 1
            p += 1
            while not _is_prime_cached(p):
                p += 1
    return rows


def _is_prime_cached(p: int) -> bool:
    from .qfield import is_prime

    return is_prime(p)


# -- check pipeline with automatic modulus reduction ---------------------------


@dataclass
class SubfieldCheck:
    """One subgroup's worth of reports, possibly at a reduced modulus."""

    original_modulus: Ideal
    effective_modulus: Ideal
    subgroup_order: int
    reduced: bool
    reports: list[ConjectureReport]
    log_lines: list[str]


def check_subfield(
    R: RayClassGroup,
    S_L: Subgroup,
    C,
    n: int,
    prec: int = 256,
    auto_reduce: bool = True,
    include_unconditional: bool = True,
) -> SubfieldCheck:
    """Theorem-backed verification, reducing the modulus when its hypotheses demand.

    When the reduction hypotheses fail at the given level, the modulus is
    replaced by f*p^-e (logged) and S_L by its image; the theorem run happens
    at the reduced level.  The original level still gets an unconditional
    conjecture test when requested.
    """
    log_lines: list[str] = []
    reports: list[ConjectureReport] = []
    spec = make_subfield_spec(R, S_L)
    eff_R, eff_S = R, S_L
    reduced = False

    if not spec.is_vacuous:
        while True:
            eff_spec = make_subfield_spec(eff_R, eff_S)
            if eff_spec.is_vacuous:
                break
            hyps = prime_hypotheses(eff_spec)
            violating = [h for h in hyps if h.reduction_violated]
            if not violating or not auto_reduce:
                break
            h = violating[0]
            lower = _divide_out(eff_R.modulus, h.prime, h.exponent)
            if lower.is_unit_ideal():
                log_lines.append(
                    f"L lies in H_K after removing {h.prime.text()}^{h.exponent}; "
                    "no theorem-backed level remains"
                )
                break
            log_lines.append(
                f"reducing the modulus: {eff_R.modulus.text()} -> {lower.text()} "
                f"(L lies in the level-{lower.text()} ray class field)"
            )
            lower_R = ray_class_group(eff_R.field.d, lower)
            hom = eff_R.level_map(lower_R)
            eff_S = Subgroup.from_generators(
                lower_R.group, [hom.apply(v) for v in eff_S.small_generators]
            )
            eff_R = lower_R
            reduced = True

    eff_spec = make_subfield_spec(eff_R, eff_S)
    eff_C = tuple(C)
    if reduced:
        hom = R.level_map(eff_R)
        eff_C = hom.apply(tuple(C))
    assumption = None if eff_spec.is_vacuous else assumption_check(eff_spec)
    theorem_applicable = eff_spec.is_vacuous or (
        assumption.not_contained_in_HK and assumption.reduction_ok and assumption.holds
    )
    if theorem_applicable:
        reports.append(verify_generation(eff_spec, eff_C, n, prec))
    else:
        log_lines.append("theorem hypotheses unavailable; running unconditionally")
        reports.append(verify_generation(eff_spec, eff_C, n, prec, unconditional=True))
    if reduced and include_unconditional:
        reports.append(verify_generation(spec, tuple(C), n, prec, unconditional=True))
    return SubfieldCheck(
        original_modulus=R.modulus,
        effective_modulus=eff_R.modulus,
        subgroup_order=S_L.order,
        reduced=reduced,
        reports=reports,
        log_lines=log_lines,
    )
