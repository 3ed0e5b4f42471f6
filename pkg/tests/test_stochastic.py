from fractions import Fraction as F

import pytest

from mopchains.errors import ConsistencyError, DomainError, PositivityError
from mopchains.gaussborel import build_family
from mopchains.numerics import sign_of
from mopchains.stochastic import (UNIFORM_RATIO, estimate_norm, geometric_values, make_stochastic_pair,
                                  pair_for_family, rescale_to_unit_norm, toeplitz_generator, verify_duality,
                                  verify_transposed_limit)
from mopchains.weights import WeightSystem

from reference_tables import (RECURRENT_CHECK, RECURRENT_HAT, TRANSIENT_CHECK, TRANSIENT_HAT, max_deviation)

KAPPA = F(4, 27)


@pytest.mark.parametrize("fixture,hat,check", [("pair_rec", RECURRENT_HAT, RECURRENT_CHECK),
                                               ("pair_tr", TRANSIENT_HAT, TRANSIENT_CHECK)])
def test_reference_matrices(fixture, hat, check, request):
    pair = request.getfixturevalue(fixture)
    assert max_deviation(hat, pair.float_matrix("hat")) <= 5e-4
    assert max_deviation(check, pair.float_matrix("check")) <= 5e-4


@pytest.mark.parametrize("fixture", ["pair_rec", "pair_tr"])
def test_rows_sum_to_one_exactly(fixture, request):
    pair = request.getfixturevalue(fixture)
    for chain in ("hat", "check"):
        for n, total in pair.row_sums[chain].items():
            assert total == 1, (chain, n)
        assert pair.row_status[chain][pair.size - 1] == "edge"
    assert pair.row_status["check"][pair.size - 2] == "edge"


@pytest.mark.parametrize("fixture", ["pair_rec", "pair_tr", "pair_uniform"])
def test_duality_is_exact(fixture, request):
    rep = verify_duality(request.getfixturevalue(fixture))
    assert rep.passed and rep.checked > 0


def test_diagonals_coincide(pair_rec):
    for n in range(pair_rec.size):
        assert pair_rec.hatH[n][n] == pair_rec.checkH[n][n]


def test_uniform_geometric_pattern(pair_uniform):
    assert pair_uniform.normalization == "geometric"
    for n in pair_uniform.interior_rows("hat"):
        assert pair_uniform.hatH[n][n - 2:n + 2] == [F(1, 27), F(6, 27), F(12, 27), F(8, 27)]
    for n in pair_uniform.interior_rows("check"):
        assert pair_uniform.checkH[n][n - 1:n + 3] == [F(8, 27), F(12, 27), F(6, 27), F(1, 27)]
        assert pair_uniform.row_sums["check"][n] == 1
    assert pair_uniform.row_sums["hat"][0] == F(20, 27)
    assert pair_uniform.row_sums["hat"][1] == F(26, 27)
    assert pair_uniform.row_sums["check"][0] == F(19, 27)


def test_uniform_oracle_normalization_is_stochastic(fam_uniform):
    pair = pair_for_family(fam_uniform, "oracle")
    assert all(v == 1 for v in pair.row_sums["hat"].values())
    assert all(v == 1 for v in pair.row_sums["check"].values())


def test_geometric_values():
    B, q = geometric_values(UNIFORM_RATIO, 3)
    assert B == [1, F(8, 27), F(64, 729)] and q[2] == F(729, 64)


def test_negative_coefficient_is_reported():
    fam = build_family(WeightSystem.jacobi_pineiro(F(-1, 2), F(3, 4), F(-1, 2)), 8, "exact")
    assert not fam.hessenberg.positive()
    with pytest.raises(PositivityError, match="a_2"):
        pair_for_family(fam)


def test_wrong_values_at_one_break_row_sums(fam_rec):
    B = list(fam_rec.B_at_1)
    B[3] *= 2
    with pytest.raises(ConsistencyError):
        make_stochastic_pair(fam_rec.hessenberg, B, fam_rec.q_at_1, 8)


def test_unknown_normalization(fam_rec):
    with pytest.raises(DomainError):
        pair_for_family(fam_rec, "spectral")


def test_transposed_limit_shrinks(jp_rec):
    fam = build_family(jp_rec, 60, "numeric", 20)
    rep = verify_transposed_limit(pair_for_family(fam))
    assert rep.decreasing and rep.tail < rep.head
    assert rep.slope < 0


def test_transposed_limit_needs_room(pair_rec):
    with pytest.raises(DomainError):
        verify_transposed_limit(pair_rec)


def test_uniform_norm_and_rescaling(fam_uniform):
    H = fam_uniform.hessenberg
    H.generator = toeplitz_generator(H)
    norm, sizes = estimate_norm(H, eps=1e-7)
    assert abs(norm - float((1 + KAPPA) ** 3)) < 1e-6
    op = rescale_to_unit_norm(H, norm=norm)
    assert abs(op.c[5] - float(3 * KAPPA) / norm) < 1e-15
    H.generator = None


def test_jp_operator_norm_stays_bounded(pair_rec, fam_rec):
    # the operator is bounded; small truncations are below the limit (1 + kappa)^3
    from mopchains.stochastic import truncation_norm
    assert truncation_norm(fam_rec.hessenberg, 16) < float((1 + KAPPA) ** 3) + 0.1


def test_uniform_check_is_hat_transposed(pair_uniform):
    for n in pair_uniform.interior_rows("check"):
        for k in (-1, 0, 1, 2):
            if n + k in pair_uniform.interior_rows("hat"):
                assert pair_uniform.checkH[n][n + k] == pair_uniform.hatH[n + k][n]


def test_entries_nonnegative(pair_rec, pair_tr, pair_uniform):
    for pair in (pair_rec, pair_tr, pair_uniform):
        for chain in ("hat", "check"):
            assert all(sign_of(v) >= 0 for row in pair.matrix(chain) for v in row)


def test_tridiagonal_norm_tends_to_one():
    from mopchains.classical import TridiagonalChain
    half = F(1, 2)
    walk = TridiagonalChain(lambda n: half, lambda n: F(0), lambda n: half)
    norm, _ = estimate_norm(walk, eps=1e-4)
    assert abs(norm - 1) < 1e-3


@pytest.mark.slow
@pytest.mark.parametrize("fixture", ["jp_rec", "jp_tr"])
def test_transposed_limit_at_200(fixture, request):
    fam = build_family(request.getfixturevalue(fixture), 200, "numeric", 20)
    rep = verify_transposed_limit(pair_for_family(fam), offsets=(-2, -1, 0, 1))
    assert rep.tail < 1e-2 and rep.tail < rep.head
