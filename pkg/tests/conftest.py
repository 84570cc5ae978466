"""Shared test charts and random generators.

Charts beyond the built-in catalog:

* unipotent4 - generic polynomial lower-triangular frame, det = 1; every
  curvature identity is non-vacuous (nonzero 3- and 4-forms) on it.
* sl2rational - the group SL(2, R) in the coordinates (a, b, c) with
  d = (1 + b c)/a, frame = left-invariant columns; an exact chart of a
  nonabelian noncompact group, with zero curvature and a genuinely
  nonzero odd trace form.
"""

from __future__ import annotations

import random
from fractions import Fraction

import pytest

from flatcheck.frames import FrameChart
from flatcheck.jetcore import multi_indices
from flatcheck.rational import Poly, RationalFunc


def rf(p: Poly) -> RationalFunc:
    return RationalFunc(p)


def make_unipotent4() -> FrameChart:
    n = 4
    x1, x2, x3 = (Poly.var(n, i) for i in range(3))
    one = Poly.const(n, 1)
    zero = Poly.zero(n)
    rows = [
        [one, zero, zero, zero],
        [x1, one, zero, zero],
        [x2 * x2, x3, one, zero],
        [x3, x1 * x2, x1, one],
    ]
    return FrameChart("unipotent4", n, [(-1, 1)] * 4,
                      entries=[[rf(p) for p in row] for row in rows])


def make_sl2rational() -> FrameChart:
    n = 3
    a, b, c = (Poly.var(n, i) for i in range(3))
    one = Poly.const(n, 1)
    zero = Poly.zero(n)
    d = rf(one + b * c) * rf(a).inverse()
    entries = [
        [rf(a), rf(zero), rf(b)],
        [rf(b).scale(-1), rf(a), rf(zero)],
        [rf(c), rf(zero), d],
    ]
    return FrameChart("sl2rational", n,
                      [(Fraction(3, 4), Fraction(5, 4)),
                       (Fraction(-1, 4), Fraction(1, 4)),
                       (Fraction(-1, 4), Fraction(1, 4))],
                      entries=entries)


def make_sl2mix4() -> FrameChart:
    """sl2rational with its first column coupled to a fourth coordinate.

    Curved (nonzero homogeneity obstruction), with non-nilpotent Hom
    values: the squared-curvature trace is genuinely nonzero, so the
    transgression identity is checked with both sides alive.
    """
    n = 4
    a, b, c, w = (Poly.var(n, i) for i in range(4))
    one = Poly.const(n, 1)
    zero = Poly.zero(n)
    d = rf(one + b * c) * rf(a).inverse()
    coupling = rf(one + w * w)
    entries = [
        [rf(a) * coupling, rf(zero), rf(b), rf(zero)],
        [rf(b).scale(-1), rf(a), rf(zero), rf(zero)],
        [rf(c), rf(zero), d, rf(zero)],
        [rf(zero), rf(zero), rf(zero), rf(one)],
    ]
    quarter = Fraction(1, 4)
    return FrameChart("sl2mix4", n,
                      [(Fraction(3, 4), Fraction(5, 4)),
                       (-quarter, quarter), (-quarter, quarter), (-quarter, quarter)],
                      entries=entries)


def random_poly(n: int, deg: int, rng: random.Random, span: int = 3) -> Poly:
    coeffs = {}
    for mono in multi_indices(n, deg):
        c = rng.randint(-span, span)
        if c:
            coeffs[mono] = Fraction(c)
    return Poly(n, coeffs)


@pytest.fixture
def unipotent4():
    return make_unipotent4()


@pytest.fixture
def sl2rational():
    return make_sl2rational()
