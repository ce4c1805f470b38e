"""The ideal class group via reduced binary quadratic forms.

Forms (A, B, C) of discriminant d = B^2 - 4AC correspond to ideal classes
through the HNF basis: the ideal a*Z + (b + c*w)*Z carries the norm form
N(x*a + y*(b + c*w)) / N(ideal).  Composition is realized by ideal
multiplication followed by form reduction, so a single exact code path is
tested against the group axioms.
"""

from __future__ import annotations

from dataclasses import dataclass
from functools import lru_cache

from .qfield import (
    Ideal,
    QuadField,
    QuadInt,
    _canonical_ideal,
    canonical_unit_multiple,
    enumerate_ideals,
    quad_field,
)


@dataclass(frozen=True)
class QForm:
    a: int
    b: int
    c: int

    def disc(self) -> int:
        return self.b * self.b - 4 * self.a * self.c

    def is_reduced(self) -> bool:
        return (-self.a < self.b <= self.a < self.c) or (
            0 <= self.b <= self.a == self.c
        )

    def reduced(self) -> "QForm":
        f, _ = reduce_form(self)
        return f

    def __repr__(self):
        return f"({self.a},{self.b},{self.c})"


def reduce_form(form: QForm) -> tuple[QForm, tuple[tuple[int, int], tuple[int, int]]]:
    """Reduce a positive definite form; also return U with F(U*(x,y)) = F_red(x,y)."""
    a, b, c = form.a, form.b, form.c
    u00, u01, u10, u11 = 1, 0, 0, 1
    while True:
        if b <= -a or b > a:
            # (x, y) -> (x + r*y, y): U <- U * [[1, r], [0, 1]]
            r = (a - b) // (2 * a)
            c = a * r * r + b * r + c
            b = b + 2 * r * a
            u01, u11 = u01 + r * u00, u11 + r * u10
        if a > c or (a == c and b < 0):
            # (x, y) -> (-y, x): U <- U * [[0, -1], [1, 0]]
            a, b, c = c, -b, a
            u00, u01 = u01, -u00
            u10, u11 = u11, -u10
            continue
        break
    return QForm(a, b, c), ((u00, u01), (u10, u11))


def principal_form(d: int) -> QForm:
    if d % 2 == 0:
        return QForm(1, 0, -d // 4)
    return QForm(1, 1, (1 - d) // 4)


def reduced_forms(d: int) -> tuple[QForm, ...]:
    """All reduced forms of discriminant d < 0, ordered by (a, b)."""
    out = []
    a = 1
    while 3 * a * a <= -d:
        for b in range(-a + 1, a + 1):
            if (b * b - d) % (4 * a):
                continue
            c = (b * b - d) // (4 * a)
            if c < a:
                continue
            if a == c and b < 0:
                continue
            out.append(QForm(a, b, c))
        a += 1
    out.sort(key=lambda f: (f.a, f.b))
    return tuple(out)


def form_of_ideal(I: Ideal) -> QForm:
    """The (reduced) norm form attached to a nonzero integral ideal."""
    if I.is_zero:
        raise ValueError("zero ideal")
    F = I.field
    t = F.trace_omega
    a, b = I.a // I.c, I.b // I.c
    A = a
    B = 2 * b + t
    C = (b * b + t * b + F.norm_omega) // a
    return QForm(A, B, C).reduced()


def ideal_of_form(F: QuadField, form: QForm) -> Ideal:
    """An integral ideal whose attached form reduces to the given form."""
    b = ((form.b - F.d) // 2) % form.a
    return _canonical_ideal(F, form.a, b, 1)


def principal_generator_fast(F: QuadField, I: Ideal) -> QuadInt | None:
    """Generator of I when principal, via form reduction with transformation.

    Returns the same canonical unit multiple as the short-vector sweep in
    qfield.principal_generator, in time logarithmic in the norm.
    """
    if I.is_zero:
        raise ValueError("zero ideal")
    if I.is_unit_ideal():
        return F.one
    t = F.trace_omega
    content = I.c
    a, b = I.a // content, I.b // content
    A, B, C = a, 2 * b + t, (b * b + t * b + F.norm_omega) // a
    red, U = reduce_form(QForm(A, B, C))
    if red != principal_form(F.d):
        return None
    x, y = U[0][0], U[1][0]
    # F(x, y) = 1, so mu = x*a + y*(b + w) has norm a and generates the
    # primitive part of I.
    mu = QuadInt(F, x * a + y * b, y)
    assert mu.norm() == a
    return canonical_unit_multiple(mu * content)


class ClassGroup:
    """Reduced forms of disc d with composition table via ideal multiplication."""

    def __init__(self, F: QuadField):
        if -F.d > 10**6:
            raise ValueError("|d| beyond the desk-scale cap 10^6")
        self.field = F
        self.forms = reduced_forms(F.d)
        self.h = len(self.forms)
        self._index = {f: k for k, f in enumerate(self.forms)}
        self.identity = self._index[principal_form(F.d)]
        reps = [ideal_of_form(F, f) for f in self.forms]
        for k, I in enumerate(reps):
            if self.class_index(I) != k:
                raise AssertionError("representative ideal maps to the wrong class")
        self.representatives = tuple(reps)
        self.table = tuple(
            tuple(self.class_index(reps[i] * reps[j]) for j in range(self.h))
            for i in range(self.h)
        )
        inv = [None] * self.h
        for i in range(self.h):
            for j in range(self.h):
                if self.table[i][j] == self.identity:
                    inv[i] = j
        self.inverse = tuple(inv)

    def class_index(self, I: Ideal) -> int:
        return self._index[form_of_ideal(I)]

    def compose(self, i: int, j: int) -> int:
        return self.table[i][j]

    def representatives_coprime(self, modulus: Ideal) -> tuple[Ideal, ...]:
        """Smallest-norm integral ideal coprime to the modulus, one per class."""
        found: dict[int, Ideal] = {}
        for I in enumerate_ideals(self.field, coprime_to=modulus):
            k = self.class_index(I)
            if k not in found:
                found[k] = I
                if len(found) == self.h:
                    break
        return tuple(found[k] for k in range(self.h))


@lru_cache(maxsize=None)
def class_group(d: int) -> ClassGroup:
    return ClassGroup(quad_field(d))
