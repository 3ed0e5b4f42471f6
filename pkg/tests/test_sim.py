from fractions import Fraction as F

import numpy as np
import pytest

from mopchains.errors import DomainError, SizingError
from mopchains.gaussborel import build_family
from mopchains.kmg import matrix_power_row
from mopchains.sim import SimConfig, empirical_vs_kmg, simulate, trajectory_uniforms
from mopchains.stochastic import pair_for_family


def test_streams_are_reproducible_and_independent():
    a = trajectory_uniforms(7, 3, 50)
    assert np.array_equal(a, trajectory_uniforms(7, 3, 50))
    assert not np.array_equal(a, trajectory_uniforms(7, 4, 50))
    assert not np.array_equal(a, trajectory_uniforms(8, 3, 50))


def test_same_seed_same_report(pair_rec):
    cfg = SimConfig("hat", 2, 4, 500, seed=11)
    r1, r2 = simulate(pair_rec, cfg), simulate(pair_rec, cfg)
    assert np.array_equal(r1.visit_counts, r2.visit_counts)
    assert r1.to_csv() == r2.to_csv()


@pytest.mark.parametrize("chain", ["hat", "check"])
def test_mass_is_conserved(pair_rec, chain):
    rep = simulate(pair_rec, SimConfig(chain, 1, 5, 2000, seed=1))
    assert rep.conserved() and rep.killed[-1] == 0


def test_killed_mass_accounts_for_row_deficits(pair_uniform):
    rep = simulate(pair_uniform, SimConfig("hat", 0, 4, 3000, seed=5))
    assert rep.conserved() and rep.killed[-1] > 0


def test_zero_steps():
    cfg = SimConfig("check", 3, 0, 10)
    assert cfg.truncation == 6


def test_zero_steps_report(pair_rec):
    rep = simulate(pair_rec, SimConfig("check", 3, 0, 10))
    assert rep.visit_counts.shape[0] == 1 and rep.visit_counts[0, 3] == 10
    assert rep.estimate(3) == (1.0, 0.0)


def test_hat_trajectories_rise_at_most_one_per_step(pair_rec):
    rep = simulate(pair_rec, SimConfig("hat", 5, 3, 4000, seed=2))
    assert max(np.flatnonzero(rep.visit_counts[-1])) <= 8


def test_config_validation():
    with pytest.raises(DomainError):
        SimConfig("hat", 0, -1, 10)
    with pytest.raises(DomainError):
        SimConfig("up", 0, 1, 10)
    with pytest.raises(SizingError):
        SimConfig("check", 2, 5, 10, truncation=12)


def test_pair_smaller_than_config(pair_rec):
    with pytest.raises(SizingError):
        simulate(pair_rec, SimConfig("hat", 10, 15, 10))


def test_uniform_return_matches_exact(pair_uniform):
    T = 20000
    rep = simulate(pair_uniform, SimConfig("hat", 0, 2, T, seed=3))
    p, se = rep.estimate(0)
    exact = 64 / 243
    assert abs(p - exact) <= 3 * (exact * (1 - exact) / T) ** 0.5


def test_jp_four_step_return(pair_rec):
    rep = simulate(pair_rec, SimConfig("hat", 0, 4, 10**5, seed=4))
    row = matrix_power_row(pair_rec, "hat", 0, 4)
    comps = empirical_vs_kmg(rep, row)
    assert comps and not any(c.flagged for c in comps)


def test_comparison_flags_wrong_probabilities(pair_rec):
    rep = simulate(pair_rec, SimConfig("hat", 0, 1, 5000, seed=4))
    comps = empirical_vs_kmg(rep, {0: F(1, 10), 1: F(9, 10)})
    assert all(c.flagged for c in comps)


def test_standard_error_shrinks(pair_rec):
    errs = [simulate(pair_rec, SimConfig("hat", 0, 3, T, seed=9)).estimate(0)[1] for T in (10**3, 10**4, 10**5)]
    assert errs[0] > errs[1] > errs[2]
    assert 2 < errs[0] / errs[1] < 5 and 2 < errs[1] / errs[2] < 5


@pytest.mark.slow
def test_recurrent_returns_more_often(jp_rec, jp_tr):
    steps, T = 200, 10**4
    freq = {}
    for name, system in (("rec", jp_rec), ("tr", jp_tr)):
        cfg = SimConfig("hat", 0, steps, T, seed=0)
        pair = pair_for_family(build_family(system, cfg.truncation, "numeric", 20))
        freq[name] = simulate(pair, cfg).return_frequency
    assert freq["rec"] > freq["tr"]
