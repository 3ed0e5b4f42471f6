import json
from fractions import Fraction as F

import pytest
from mpmath import mp

from mopchains.errors import DomainError, SizingError
from mopchains.kmg import (EvolutionQuery, KmgEvaluator, evolve, load_queries, matrix_power_probability,
                           matrix_power_row)
from mopchains.numerics import to_mpf


@pytest.mark.parametrize("chain", ["hat", "check"])
def test_zero_steps_is_identity(fam_rec, chain):
    ev = KmgEvaluator(fam_rec, digits=30)
    for n in range(4):
        for m in range(4):
            p = ev.probability(EvolutionQuery(n, m, 0, chain))
            assert abs(p - (1 if n == m else 0)) < 1e-20


@pytest.mark.parametrize("fixture", ["pair_rec", "pair_tr"])
def test_one_step_reproduces_entries(fixture, request):
    pair = request.getfixturevalue(fixture)
    fam = request.getfixturevalue(fixture.replace("pair", "fam"))
    ev = KmgEvaluator(fam, digits=30)
    with mp.workdps(30):
        for chain in ("hat", "check"):
            M = pair.matrix(chain)
            for n in range(5):
                for m in range(7):
                    p = ev.probability(EvolutionQuery(n, m, 1, chain))
                    assert abs(p - to_mpf(M[n][m], 30)) < 1e-10, (chain, n, m)


def test_grid_agrees_with_matrix_power(fam_tr, pair_tr):
    ev = KmgEvaluator(fam_tr, digits=40)
    worst = 0.0
    for chain in ("hat", "check"):
        for n in range(4):
            for r in range(4):
                for m in range(4):
                    res = evolve(EvolutionQuery(n, m, r, chain), fam_tr, pair_tr, 40, ev)
                    worst = max(worst, res.discrepancy)
    assert worst < 1e-10


def test_uniform_two_step_return(pair_uniform, fam_uniform):
    assert matrix_power_probability(pair_uniform, EvolutionQuery(0, 0, 2)) == F(64, 243)
    ev = KmgEvaluator(fam_uniform, "geometric", 30)
    assert abs(ev.probability(EvolutionQuery(0, 0, 2)) - mp.mpf(64) / 243) < 1e-12


def test_power_rows_are_stochastic_away_from_the_edge(pair_rec):
    row = matrix_power_row(pair_rec, "hat", 2, 5)
    assert sum(row.values()) == 1
    assert max(row) <= 2 + 5


def test_truncation_too_small(pair_rec):
    with pytest.raises(SizingError, match="needs at least"):
        matrix_power_row(pair_rec, "check", 10, 8)
    with pytest.raises(SizingError):
        matrix_power_probability(pair_rec, EvolutionQuery(0, 40, 1))


def test_query_sizes():
    q = EvolutionQuery(3, 5, 4, "check")
    assert q.minimal_size == 3 + 2 * 4 + 1
    assert q.auto_size == 5 + 2 * 4 + 3


@pytest.mark.parametrize("kw", [dict(chain="left"), dict(method="guess"), dict(r=-1)])
def test_bad_queries(kw):
    args = dict(n=0, m=0, r=1) | kw
    with pytest.raises(DomainError):
        EvolutionQuery(**args)


def test_load_queries(tmp_path):
    text = json.dumps([{"n": 1, "m": 2, "r": 3}, {"n": 0, "m": 0, "r": 2, "chain": "check"}])
    path = tmp_path / "q.json"
    path.write_text(text)
    assert load_queries(str(path)) == load_queries(text)
    assert load_queries(text)[1].chain == "check"
    with pytest.raises(DomainError):
        load_queries("{not json")
    with pytest.raises(DomainError):
        load_queries('{"n": 1}')


def test_result_json(fam_rec, pair_rec):
    res = json.loads(evolve(EvolutionQuery(0, 1, 1), fam_rec, pair_rec, 30).to_json())
    assert res["matrix_power"] == "2/5" and res["discrepancy"] < 1e-20


def test_single_path_two_steps(pair_rec):
    # 0 -> 1 -> 2 is the only way to climb two states in two hat steps
    row = matrix_power_row(pair_rec, "hat", 0, 2)
    assert row[2] == pair_rec.hatH[0][1] * pair_rec.hatH[1][2]


def test_uniform_grid_agrees(fam_uniform, pair_uniform):
    ev = KmgEvaluator(fam_uniform, pair_uniform.normalization, 30)
    for chain in ("hat", "check"):
        for n, m, r in [(0, 0, 3), (2, 1, 4), (3, 5, 2), (1, 1, 1)]:
            res = evolve(EvolutionQuery(n, m, r, chain), fam_uniform, pair_uniform, 30, ev)
            assert res.discrepancy < 1e-8, (chain, n, m, r)


@pytest.mark.parametrize("chain", ["hat", "check"])
def test_chapman_kolmogorov(fam_tr, chain):
    ev = KmgEvaluator(fam_tr, digits=30)
    n, m, r1, r2 = 1, 2, 2, 2
    reach = {"hat": 1, "check": 2}[chain]
    with mp.workdps(30):
        lhs = ev.probability(EvolutionQuery(n, m, r1 + r2, chain))
        rhs = sum(ev.probability(EvolutionQuery(n, j, r1, chain)) * ev.probability(EvolutionQuery(j, m, r2, chain))
                  for j in range(0, n + reach * r1 + 1))
        assert abs(lhs - rhs) < 1e-8


@pytest.mark.parametrize("chain", ["hat", "check"])
def test_probability_is_conserved(fam_rec, chain):
    ev = KmgEvaluator(fam_rec, digits=30)
    n, r = 2, 3
    reach = {"hat": 1, "check": 2}[chain]
    with mp.workdps(30):
        total = sum(ev.probability(EvolutionQuery(n, m, r, chain)) for m in range(n + reach * r + 1))
        assert abs(total - 1) < 1e-8


def test_doubling_the_truncation_changes_nothing(jp_rec, pair_rec):
    from mopchains.gaussborel import build_family
    from mopchains.stochastic import pair_for_family
    big = pair_for_family(build_family(jp_rec, 40, "exact"))
    for chain in ("hat", "check"):
        q = EvolutionQuery(2, 3, 5, chain)
        assert matrix_power_probability(big, q) == matrix_power_probability(pair_rec, q)
