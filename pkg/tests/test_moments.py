from fractions import Fraction as F

import mpmath
import pytest
from mpmath import mp

from mopchains.errors import DomainError
from mopchains.moments import (MomentLayout, build_classical_moments, build_jp_moments, build_ll_moments,
                               build_moments, chebyshev_moment, ll_moment_exact, ll_moment_series, to_numeric)
from mopchains.numerics import TranscendentalUnit, to_mpf
from mopchains.weights import UNIFORM_TUPLE, WeightSystem


def test_layout_interleaves_weights():
    lay = MomentLayout(6)
    assert [lay.column(k) for k in range(4)] == [(0, 1), (0, 2), (1, 1), (1, 2)]
    assert MomentLayout(4, interleaved=False).column(3) == (3, 1)


def test_first_jp_ratio(jp_rec):
    g = build_jp_moments(jp_rec.params, 4)
    assert g[1, 0] / g[0, 0] == F(3, 5)
    assert g[0, 0] == g[0, 1] == 1


def test_jp_unit_is_symbolic_for_fractional_alpha0(jp_rec):
    g = build_jp_moments(jp_rec.params, 4)
    assert isinstance(g.odd_unit, TranscendentalUnit)
    assert g.odd_columns_rational()
    with mp.workdps(30):
        u = g.odd_unit.value(30)
        ref = mpmath.beta(F(-1, 2) + 1, F(1, 2)) / mpmath.beta(F(-1, 4) + 1, F(1, 2))
        assert abs(u - ref) < 1e-25


def test_jp_unit_rational_for_integer_alpha0():
    sys_ = WeightSystem.jacobi_pineiro(F(-1, 4), F(-1, 2), 2)
    g = build_jp_moments(sys_.params, 4)
    with mp.workdps(30):
        ref = mpmath.beta(F(1, 2), 3) / mpmath.beta(F(3, 4), 3)
    assert isinstance(g.odd_unit, F)
    assert abs(to_mpf(g.odd_unit) - ref) < 1e-25


def test_jp_moments_against_quadrature(jp_rec):
    g = build_jp_moments(jp_rec.params, 10)
    with mp.workdps(25):
        for j in (0, 3, 7):
            for k in (0, 1, 4, 9):
                power, which = g.layout.column(k)
                dens = lambda x: jp_rec.density(which, x, 25) * x ** (j + power)  # noqa: E731
                ref = mpmath.quad(dens, [0, 1])
                assert abs(to_mpf(g[j, k], 25) - ref) < 1e-12 * abs(ref)


def test_raw_entry_multiplies_unit(jp_rec):
    g = build_jp_moments(jp_rec.params, 4)
    with mp.workdps(30):
        assert abs(g.raw_entry(0, 1, 30) - g.odd_unit.value(30)) < 1e-25


@pytest.mark.parametrize("tup", [UNIFORM_TUPLE, (F(1, 2), F(3, 4), F(3, 2), F(2))])
def test_ll_moments_series_vs_pochhammer(tup):
    params = WeightSystem.hypergeometric(*tup).params
    for which in (1, 2):
        for p in (0, 1, 4, 9):
            exact = ll_moment_exact(params, p, which)
            series = ll_moment_series(params, p, which, 30)
            assert abs(series - to_mpf(exact, 30)) < 1e-25 * abs(to_mpf(exact, 30))


def test_ll_moments_against_density_quadrature(uniform):
    with mp.workdps(20):
        for which in (1, 2):
            ref = mpmath.quad(lambda x: uniform.density(which, x, 20) * x**3, [0, 1])
            assert abs(to_mpf(ll_moment_exact(uniform.params, 3, which), 20) - ref) < 1e-12


def test_ll_numeric_matrix_matches_exact(uniform):
    ex = build_ll_moments(uniform.params, 5, "exact")
    nu = build_ll_moments(uniform.params, 5, "numeric", 30)
    for j in range(5):
        for k in range(5):
            assert abs(nu[j, k] - to_mpf(ex[j, k], 30)) < 1e-25


def test_chebyshev_moments():
    assert [chebyshev_moment(k) for k in range(5)] == [1, 0, F(1, 2), 0, F(3, 8)]
    g = build_classical_moments("chebyshev", 4)
    assert g.support == (-1, 1) and g.affine_map
    assert g[1, 1] == F(1, 2) and g[2, 2] == F(3, 8)


def test_classical_jacobi_hankel():
    g = build_classical_moments(("jacobi", F(1, 2), 0), 3)
    # density proportional to (1-x)^(1/2): mean 2/5
    assert g[0, 1] == F(2, 5)


def test_to_numeric_and_json(jp_rec):
    g = build_jp_moments(jp_rec.params, 3)
    n = to_numeric(g, 20)
    with mp.workdps(20):
        assert n.mode == "numeric" and abs(n[1, 0] - mpmath.mpf(3) / 5) < 1e-18
    js = g.to_json()
    assert js["entries"][1][0] == "3/5" and js["odd_unit"]["name"].startswith("u[")


def test_size_checks(jp_rec):
    with pytest.raises(DomainError):
        build_moments(jp_rec, 1)
