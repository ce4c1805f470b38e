import random

from rayunits.clgroup import (
    QForm,
    class_group,
    form_of_ideal,
    ideal_of_form,
    principal_generator_fast,
    reduced_forms,
)
from rayunits.qfield import QuadInt, enumerate_ideals, primes_above, principal_generator, quad_field


def brute_reduced_forms(d):
    """Oracle: scan all (a, b, c) in a box for reduced forms of disc d."""
    out = set()
    bound = int((-d / 3) ** 0.5) + 2
    for a in range(1, bound + 1):
        for b in range(-a, a + 1):
            if (b * b - d) % (4 * a):
                continue
            c = (b * b - d) // (4 * a)
            f = QForm(a, b, c)
            if f.is_reduced():
                out.add(f)
    return out


class TestForms:
    def test_class_numbers(self):
        assert class_group(-11).h == 1
        assert class_group(-4).h == 1
        assert class_group(-15).h == 2
        assert class_group(-23).h == 3
        assert class_group(-20).h == 2

    def test_d15_forms(self):
        forms = reduced_forms(-15)
        assert set(forms) == {QForm(1, 1, 4), QForm(2, 1, 2)}

    def test_enumeration_matches_brute_force(self):
        for d in (-3, -4, -7, -11, -15, -20, -23, -31, -39, -40):
            assert set(reduced_forms(d)) == brute_reduced_forms(d), d

    def test_reduction_preserves_disc(self):
        rng = random.Random(5)
        for _ in range(200):
            a = rng.randrange(1, 50)
            b = rng.randrange(-60, 60)
            # pick c so disc is negative
            c = rng.randrange((b * b) // (4 * a) + 1, (b * b) // (4 * a) + 40)
            f = QForm(a, b, c)
            r = f.reduced()
            assert r.disc() == f.disc()
            assert r.is_reduced()


class TestClassGroup:
    def test_identity_and_axioms(self):
        for d in (-15, -20, -23, -47):
            cg = class_group(d)
            e = cg.identity
            h = cg.h
            for i in range(h):
                assert cg.compose(e, i) == i
                assert cg.compose(i, cg.inverse[i]) == e
                for j in range(h):
                    assert cg.compose(i, j) == cg.compose(j, i)
                    for k in range(h):
                        assert cg.compose(cg.compose(i, j), k) == cg.compose(
                            i, cg.compose(j, k)
                        )

    def test_class_index_homomorphism(self):
        rng = random.Random(17)
        for d in (-15, -23):
            F = quad_field(d)
            cg = class_group(d)
            ideals = []
            it = enumerate_ideals(F)
            for _ in range(40):
                ideals.append(next(it))
            for _ in range(500):
                I = rng.choice(ideals)
                J = rng.choice(ideals)
                assert cg.class_index(I * J) == cg.compose(
                    cg.class_index(I), cg.class_index(J)
                )

    def test_principal_iff_generator(self):
        rng = random.Random(23)
        F = quad_field(-15)
        cg = class_group(-15)
        it = enumerate_ideals(F)
        for _ in range(80):
            I = next(it)
            is_identity = cg.class_index(I) == cg.identity
            has_gen = principal_generator(F, I) is not None
            assert is_identity == has_gen

    def test_d15_nonprincipal_prime(self):
        F = quad_field(-15)
        cg = class_group(-15)
        P = primes_above(F, 2)[0]
        k = cg.class_index(P)
        assert cg.forms[k] == QForm(2, 1, 2)

    def test_conjugate_product_principal(self):
        F = quad_field(-15)
        cg = class_group(-15)
        for p in (2, 17, 23):
            for P in primes_above(F, p):
                assert cg.class_index(P * P.conj()) == cg.identity

    def test_representatives_coprime(self):
        F = quad_field(-15)
        cg = class_group(-15)
        mod = F.principal_ideal(30)
        reps = cg.representatives_coprime(mod)
        assert len(reps) == 2
        for k, I in enumerate(reps):
            assert I.is_coprime(mod)
            assert cg.class_index(I) == k


class TestFastGenerator:
    def test_matches_sweep(self):
        rng = random.Random(31)
        for d in (-11, -7, -3, -4, -15, -23):
            F = quad_field(d)
            for _ in range(150):
                x = QuadInt(F, rng.randrange(-20, 21), rng.randrange(-20, 21))
                if x.is_zero():
                    continue
                I = F.principal_ideal(x)
                assert principal_generator_fast(F, I) == principal_generator(F, I)

    def test_not_principal(self):
        F = quad_field(-15)
        P = primes_above(F, 2)[0]
        assert principal_generator_fast(F, P) is None

    def test_nonprincipal_random(self):
        F = quad_field(-23)
        it = enumerate_ideals(F)
        for _ in range(60):
            I = next(it)
            assert (principal_generator_fast(F, I) is None) == (
                principal_generator(F, I) is None
            )

    def test_ideal_of_form_roundtrip(self):
        for d in (-15, -20, -23, -47, -71):
            F = quad_field(d)
            for f in reduced_forms(d):
                assert form_of_ideal(ideal_of_form(F, f)) == f
