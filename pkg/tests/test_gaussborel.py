from fractions import Fraction as F

import mpmath
import pytest
from mpmath import mp

from mopchains.errors import NumericError, SingularMinorError
from mopchains.gaussborel import (build_family, extract_hessenberg, factorize, horner, typeII_at,
                                  verify_biorthogonality, verify_typeI_orthogonality,
                                  verify_typeII_orthogonality)
from mopchains.moments import MomentLayout, MomentMatrix, build_classical_moments, build_moments
from mopchains.numerics import UnitPoly, to_mpf

KAPPA = F(4, 27)


def test_ldu_reproduces_moments_exactly(jp_rec):
    f = factorize(build_moments(jp_rec, 9))
    assert f.residual() == 0


def test_s_inverts_lower_factor(jp_rec):
    f = factorize(build_moments(jp_rec, 6))
    S = f.S
    for i in range(6):
        for j in range(6):
            s = sum(S[i][k] * f.out(f.lower(k, j)) for k in range(6))
            assert s == (1 if i == j else 0)


def test_chebyshev_hankel_gives_textbook_recurrence():
    # monic Chebyshev polynomials of the first kind: x T_n = T_{n+1} + b_n T_{n-1}
    H = extract_hessenberg(factorize(build_classical_moments("chebyshev", 9)))
    assert all(v == 0 for v in H.c)
    assert H.b[1] == F(1, 2) and all(v == F(1, 4) for v in H.b[2:])


def test_legendre_hankel_gives_textbook_recurrence():
    # shifted Legendre on [0, 1]: c_n = 1/2, b_n = n^2 / (4 (4 n^2 - 1))
    H = extract_hessenberg(factorize(build_classical_moments(("jacobi", 0, 0), 9)))
    assert all(v == F(1, 2) for v in H.c)
    assert all(H.b[n] == F(n * n, 4 * (4 * n * n - 1)) for n in range(1, 8))


def test_zero_minor_is_reported():
    g = MomentMatrix([[F(1), F(1)], [F(1), F(1)]], MomentLayout(2, False), "exact", None, "test")
    with pytest.raises(SingularMinorError) as err:
        factorize(g)
    assert err.value.index == 1


def test_uniform_bands_are_toeplitz(fam_uniform):
    H = fam_uniform.hessenberg
    assert all(v == KAPPA**3 for v in H.a[2:])
    assert all(v == 3 * KAPPA**2 for v in H.b[1:])
    assert all(v == 3 * KAPPA for v in H.c)


def test_jp_bands_positive_and_first_rows(fam_rec):
    H = fam_rec.hessenberg
    assert H.positive()
    assert H.c[0] == F(3, 5)  # first moment of the normalized w1


def test_typeII_values_match_polynomials(fam_rec):
    for n in range(8):
        assert typeII_at(fam_rec, n, 1) == fam_rec.B_at_1[n]


def test_type_I_values_are_exact_in_the_unit(fam_rec):
    q = fam_rec.q_at_1
    assert q[0] == 1
    assert all(isinstance(v, UnitPoly) for v in q[1:])


def test_typeI_values_by_quadrature_limit(fam_tr, jp_tr):
    # Q_n(x)/w1(x) -> q_n as x -> 1, evaluated from the coefficient lists
    with mp.workdps(30):
        x = 1 - mpmath.mpf(10) ** -14
        for n in (1, 2, 5):
            A1, A2 = fam_tr.typeI_pair(n)
            ratio = jp_tr.density(2, x, 30) / jp_tr.density(1, x, 30)
            v = horner([to_mpf(c, 30) for c in A1], x) + ratio * horner([to_mpf(c, 30) for c in A2], x)
            assert abs(v - to_mpf(fam_tr.q_at_1[n], 30)) < 1e-6 * abs(v)


@pytest.mark.parametrize("fixture", ["fam_rec", "fam_tr"])
def test_orthogonality_suites_jp(fixture, request):
    fam = request.getfixturevalue(fixture)
    for rep in (verify_biorthogonality(fam, fam.system, 8),
                verify_typeII_orthogonality(fam, fam.system, 8),
                verify_typeI_orthogonality(fam, fam.system, 8)):
        assert rep.passed, (rep.name, rep.max_deviation, rep.worst)


def test_orthogonality_suite_uniform(fam_uniform):
    rep = verify_biorthogonality(fam_uniform, fam_uniform.system, 4, digits=30)
    assert rep.passed, rep.max_deviation


def test_numeric_mode_agrees_with_exact(jp_rec):
    ex = build_family(jp_rec, 30, "exact")
    nu = build_family(jp_rec, 30, "numeric", 25)
    with mp.workdps(30):
        for n in range(30):
            assert abs(nu.hessenberg.c[n] - to_mpf(ex.hessenberg.c[n], 30)) < 1e-22
            assert abs(nu.B_at_1[n] - to_mpf(ex.B_at_1[n], 30)) < 1e-22 * abs(nu.B_at_1[n])
            assert abs(nu.q_at_1[n] - to_mpf(ex.q_at_1[n], 30)) < 1e-20 * abs(nu.q_at_1[n])
    assert nu.hessenberg.offband < 1e-20


def test_numeric_mode_reports_budget_exhaustion(jp_rec):
    with pytest.raises(NumericError):
        build_family(jp_rec, 40, "numeric", 30, max_bits=64)


def test_ll_numeric_family(uniform):
    nu = build_family(uniform, 12, "numeric", 25)
    with mp.workdps(25):
        assert abs(nu.hessenberg.c[7] - 3 * to_mpf(KAPPA, 25)) < 1e-20


def test_horner():
    assert horner([1, 2, 3], 2) == 17
