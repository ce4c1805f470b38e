import random

import pytest

from rayunits.qfield import (
    QuadInt,
    canonical_unit_multiple,
    different,
    enumerate_ideals,
    factor_ideal,
    ideals_of_norm,
    kronecker_symbol,
    parse_ideal,
    primes_above,
    principal_generator,
    quad_field,
)


def brute_kronecker(d, p):
    """Independent oracle: count square roots of d mod p."""
    if p == 2:
        if d % 2 == 0:
            return 0
        return 1 if d % 8 == 1 else -1
    if d % p == 0:
        return 0
    squares = {x * x % p for x in range(p)}
    return 1 if d % p in squares else -1


class TestField:
    def test_omega_minimal_polynomial(self):
        for d in (-3, -4, -7, -8, -11, -15, -20, -23):
            F = quad_field(d)
            w = F.omega
            # w^2 - d*w + (d^2-d)/4 = 0
            val = w * w - d * w + F.norm_omega
            assert val.is_zero()

    def test_roots_of_unity(self):
        for d, count in ((-3, 6), (-4, 4), (-7, 2), (-11, 2)):
            F = quad_field(d)
            assert F.w == count
            roots = F.roots_of_unity
            assert len(roots) == count
            assert len(set(roots)) == count
            for u in roots:
                assert u.norm() == 1

    def test_non_fundamental_rejected(self):
        for d in (-12, -9, -5, -16, -27, 5):
            with pytest.raises(ValueError):
                quad_field(d)

    def test_sqrt_disc(self):
        F = quad_field(-11)
        s = F.sqrt_disc
        assert (s * s) == QuadInt(F, -11, 0)
        assert s.norm() == 11


class TestKronecker:
    def test_paper_values_d11(self):
        assert kronecker_symbol(-11, 2) == -1
        assert kronecker_symbol(-11, 11) == 0
        assert kronecker_symbol(-11, 5) == 1

    def test_against_brute_force(self):
        for d in (-3, -4, -7, -8, -11, -15, -20):
            for p in (2, 3, 5, 7, 11, 13, 17, 19, 23):
                assert kronecker_symbol(d, p) == brute_kronecker(d, p), (d, p)

    def test_rejects_composite(self):
        with pytest.raises(ValueError):
            kronecker_symbol(-11, 6)


class TestIdealBasics:
    def test_hnf_canonical(self):
        F = quad_field(-11)
        I = F.principal_ideal(22)
        assert (I.a, I.b, I.c) == (22, 0, 22)
        assert I.norm() == 484

    def test_sqrt_m11_ideal(self):
        F = quad_field(-11)
        P = F.principal_ideal(F.sqrt_disc)
        assert (P.a, P.b, P.c) == (11, 0, 1)
        assert P.norm() == 11
        assert P.smallest_positive_integer() == 11

    def test_norm_multiplicative_random(self):
        rng = random.Random(7)
        F = quad_field(-11)
        for _ in range(200):
            x = QuadInt(F, rng.randrange(-9, 10), rng.randrange(-9, 10))
            y = QuadInt(F, rng.randrange(-9, 10), rng.randrange(-9, 10))
            if x.is_zero() or y.is_zero():
                continue
            I, J = F.principal_ideal(x), F.principal_ideal(y)
            assert (I * J).norm() == I.norm() * J.norm()

    def test_different(self):
        F = quad_field(-11)
        D = different(F)
        assert D.norm() == 11
        assert D == F.principal_ideal(F.sqrt_disc)

    def test_coprime(self):
        F = quad_field(-11)
        two = F.principal_ideal(2)
        root = F.principal_ideal(F.sqrt_disc)
        assert two.is_coprime(root)
        assert not two.is_coprime(F.principal_ideal(22))

    def test_membership(self):
        F = quad_field(-11)
        P = F.principal_ideal(F.sqrt_disc)
        assert P.contains(F.omega)  # w = sqrt(-11)*(6 + w)
        assert not P.contains(F.one)

    def test_parse_and_text(self):
        F = quad_field(-11)
        assert parse_ideal(F, "22") == F.principal_ideal(22)
        assert parse_ideal(F, "[11,0,1]") == F.principal_ideal(F.sqrt_disc)
        assert parse_ideal(F, "[11,0,1]").text() == "[11,0,1]"
        with pytest.raises(ValueError):
            parse_ideal(F, "[11,3,1")
        with pytest.raises(ValueError):
            parse_ideal(F, "[11,5,1]")  # not an O_K module


class TestFactorization:
    def test_example_22(self):
        F = quad_field(-11)
        fac = factor_ideal(F, F.principal_ideal(22))
        assert len(fac) == 2
        (P1, e1), (P2, e2) = fac
        assert (P1.norm(), e1) == (4, 1)  # inert 2
        assert (P2.norm(), e2) == (11, 2)  # ramified sqrt(-11)
        assert P1 == F.principal_ideal(2)
        assert P2 == F.principal_ideal(F.sqrt_disc)

    def test_unit_ideal(self):
        F = quad_field(-11)
        assert factor_ideal(F, F.unit_ideal) == []

    def test_split_five(self):
        F = quad_field(-11)
        fac = factor_ideal(F, F.principal_ideal(5))
        assert len(fac) == 2
        assert all(e == 1 for _, e in fac)
        assert all(P.norm() == 5 for P, _ in fac)
        assert fac[0][0] != fac[1][0]
        assert fac[0][0].conj() == fac[1][0]

    def test_zero_rejected(self):
        F = quad_field(-11)
        with pytest.raises(ValueError):
            factor_ideal(F, F.zero_ideal)

    def test_roundtrip_random(self):
        rng = random.Random(11)
        for d in (-11, -7, -15, -20):
            F = quad_field(d)
            for _ in range(60):
                x = QuadInt(F, rng.randrange(-12, 13), rng.randrange(-12, 13))
                if x.is_zero():
                    continue
                I = F.principal_ideal(x)
                fac = factor_ideal(F, I)
                J = F.unit_ideal
                for P, e in fac:
                    J = J * P**e
                assert J == I

    def test_valuation_matches_repeated_division(self):
        F = quad_field(-11)
        I = F.principal_ideal(QuadInt(F, 4, 2))  # 2*(2 + w)
        for P, e in factor_ideal(F, I):
            # independent valuation: divide by P as often as possible
            count = 0
            J = I
            while P.divides(J):
                prod = J * P.conj()
                p = P.a if P.c == 1 else P.a
                J = prod.divexact_int(P.norm() if P.c == P.a else P.a)
                count += 1
            assert count == e


class TestPrincipalGenerator:
    def test_principal_22(self):
        F = quad_field(-11)
        g = principal_generator(F, F.principal_ideal(22))
        assert g == QuadInt(F, 22, 0)

    def test_sqrt_disc_canonical(self):
        F = quad_field(-11)
        g = principal_generator(F, F.principal_ideal(F.sqrt_disc))
        assert g == canonical_unit_multiple(F.sqrt_disc)
        assert g == QuadInt(F, 11, 2)

    def test_not_principal_d15(self):
        F = quad_field(-15)
        P2 = primes_above(F, 2)[0]
        assert P2.norm() == 2
        assert principal_generator(F, P2) is None

    def test_random_principal_ideals(self):
        rng = random.Random(3)
        for d in (-11, -7, -3, -4, -15):
            F = quad_field(d)
            for _ in range(200):
                x = QuadInt(F, rng.randrange(-15, 16), rng.randrange(-15, 16))
                if x.is_zero():
                    continue
                g = principal_generator(F, F.principal_ideal(x))
                assert g is not None
                assert g == canonical_unit_multiple(x)


class TestEnumeration:
    def test_ideals_of_norm_counts(self):
        F = quad_field(-11)
        # norm 11: only the ramified prime
        assert len(ideals_of_norm(F, 11)) == 1
        # norm 5: two split primes
        assert len(ideals_of_norm(F, 5)) == 2
        # norm 2: none (2 inert)
        assert ideals_of_norm(F, 2) == []
        assert len(ideals_of_norm(F, 4)) == 1

    def test_enumeration_order_deterministic(self):
        F = quad_field(-11)
        it = enumerate_ideals(F)
        first = [next(it) for _ in range(8)]
        norms = [I.norm() for I in first]
        assert norms == sorted(norms)
        assert first[0].is_unit_ideal()

    def test_coprime_filter(self):
        F = quad_field(-11)
        mod = F.principal_ideal(22)
        it = enumerate_ideals(F, coprime_to=mod)
        for _ in range(30):
            I = next(it)
            assert I.is_coprime(mod)
