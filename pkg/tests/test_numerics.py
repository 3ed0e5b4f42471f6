from fractions import Fraction as F

import mpmath
import pytest
from mpmath import mp

from mopchains.errors import DomainError
from mopchains.numerics import (TranscendentalUnit, UnitPoly, UnitRatio, beta_ratio, digits_to_bits,
                                format_scalar, gauss_jacobi, hyp2f1, log_beta, parse_scalar, pochhammer,
                                sign_of, to_mpf)


@pytest.mark.parametrize("text,value", [("-1/4", F(-1, 4)), ("0.1", F(1, 10)), ("3", F(3)), (2, F(2))])
def test_parse_scalar(text, value):
    assert parse_scalar(text) == value


def test_parse_scalar_rejects_garbage():
    with pytest.raises(DomainError):
        parse_scalar("one third")


def test_format_roundtrip():
    for x in (F(-1, 4), F(7), F(22, 7)):
        assert parse_scalar(format_scalar(x)) == x


def test_pochhammer_small_cases():
    assert pochhammer(F(1, 2), 0) == 1
    assert pochhammer(F(1, 2), 3) == F(1, 2) * F(3, 2) * F(5, 2)
    with pytest.raises(DomainError):
        pochhammer(1, -1)


@pytest.mark.parametrize("a,b", [(F(-1, 4), F(-1, 2)), (F(1, 2), F(0)), (F(-1, 2), F(1, 2))])
def test_beta_ratio_telescopes(a, b):
    for k in range(12):
        assert beta_ratio(k + 1, a, b) * (k + a + b + 2) / (k + a + 1) == beta_ratio(k, a, b)


def test_beta_ratio_against_gamma_functions():
    # independent oracle: mpmath's beta function
    a, b = F(-1, 4), F(-1, 2)
    with mp.workdps(40):
        for k in (0, 1, 5, 13):
            ref = mpmath.beta(k + a + 1, b + 1) / mpmath.beta(a + 1, b + 1)
            assert abs(to_mpf(beta_ratio(k, a, b), 40) - ref) < mpmath.mpf(10) ** -35


def test_beta_ratio_domain():
    with pytest.raises(DomainError):
        beta_ratio(1, -1, 0)


@pytest.mark.parametrize("p", [F(-1, 2), F(-1, 4), F(0), F(1, 2)])
@pytest.mark.parametrize("q", [F(-1, 2), F(-1, 4), F(0), F(1, 2)])
@pytest.mark.parametrize("n", [1, 5, 16, 32])
def test_gauss_jacobi_exact_degree(n, p, q):
    digits = 30
    rule = gauss_jacobi(n, p, q, digits)
    assert rule.degree_exact == 2 * n - 1
    with mp.workdps(digits):
        for k in sorted({0, 1, n, 2 * n - 1}):
            got = rule.integrate(lambda x: x**k, normalized=True)
            want = to_mpf(beta_ratio(k, q, p), digits)
            assert abs(got - want) <= abs(want) * mpmath.mpf(10) ** (5 - digits)


def test_gauss_jacobi_mass_is_beta():
    rule = gauss_jacobi(8, F(1, 2), F(-1, 4), 30)
    with mp.workdps(30):
        assert abs(rule.mass - mpmath.beta(F(-1, 4) + 1, F(1, 2) + 1)) < mpmath.mpf(10) ** -25


@pytest.mark.parametrize("args", [(F(1, 3), F(1, 2), F(3, 2), F(1, 5)),
                                  (F(2, 3), F(1, 3), F(5, 2), F(9, 10)),
                                  (F(1, 3), F(1, 6), F(7, 2), F(99, 100))])
def test_hyp2f1_against_mpmath(args):
    a, b, c, z = args
    with mp.workdps(40):
        ref = mpmath.hyp2f1(*(to_mpf(v, 40) for v in args))
    got = hyp2f1(a, b, c, z, 30)
    assert abs(got - ref) <= abs(ref) * mpmath.mpf(10) ** -25


def test_hyp2f1_unit_argument_is_gauss_sum():
    a, b, c = F(1, 3), F(1, 6), F(7, 2)
    with mp.workdps(40):
        ref = mpmath.gamma(c) * mpmath.gamma(c - a - b) / (mpmath.gamma(c - a) * mpmath.gamma(c - b))
    assert abs(hyp2f1(a, b, c, 1, 30) - ref) < mpmath.mpf(10) ** -25


def test_log_beta_matches_mpmath():
    with mp.workdps(30):
        assert abs(log_beta(F(3, 4), F(1, 2), 30) - mpmath.log(mpmath.beta(0.75, 0.5))) < 1e-25


def _unit():
    return TranscendentalUnit("sqrt2", lambda d: mpmath.sqrt(2))


def test_unit_poly_exact_arithmetic():
    u = _unit()
    x = UnitPoly((1, 1), u)          # 1 + u
    y = UnitPoly((-1, 1), u)         # -1 + u
    prod = x * y                     # u^2 - 1
    assert prod == UnitPoly((-1, 0, 1), u)
    with mp.workdps(30):
        assert abs(prod.evaluate(30) - 1) < 1e-25  # u^2 = 2
    assert (x - x) == UnitPoly((0,), u)
    assert sign_of(y) == 1


def test_unit_ratio_equality_cross_multiplies():
    u = _unit()
    r1 = UnitRatio(UnitPoly((2, 2), u), UnitPoly((0, 2), u))
    r2 = UnitRatio(UnitPoly((1, 1), u), UnitPoly((0, 1), u))
    assert r1 == r2
    assert abs(float(r1) - (1 + 2**-0.5)) < 1e-12


def test_unit_poly_cancellation_is_resolved():
    u = TranscendentalUnit("third", lambda d: mpmath.mpf(1) / 3)
    tiny = UnitPoly((F(-1, 3) + F(1, 10**40), 1), u)
    assert abs(tiny.evaluate(20) - mpmath.mpf(10) ** -40) < mpmath.mpf(10) ** -55


def test_digits_to_bits_monotone():
    assert digits_to_bits(30) > 99 and digits_to_bits(60) > digits_to_bits(30)
