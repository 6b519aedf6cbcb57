"""
DSMC particle solver
"""
import numpy as np
import pytest

from errors import ArgumentError, NumericError
from models.catalog import build_model
from solvers.dsmc import (
    DSMCSolver,
    ParticleEnsemble,
    RngStreamSpec,
    dsmc_step,
    run_dsmc,
    sample_initial,
    select_pairs,
    sround,
    step_count,
)


def test_sround_integers_are_exact(rng):
    assert sround(3.0, rng) == 3
    assert sround(0.0, rng) == 0


def test_sround_rejects_negative(rng):
    with pytest.raises(ArgumentError):
        sround(-0.5, rng)


def test_sround_is_unbiased(rng):
    draws = np.array([sround(2.5, rng) for _ in range(200_000)])
    assert set(np.unique(draws)) <= {2, 3}
    assert abs(draws.mean() - 2.5) <= 3 * 0.5 / np.sqrt(draws.size)


def test_sample_initial_uniform_opinion(opinion_a, rng):
    N = 100_000
    centred = sample_initial(opinion_a, N, 0.0, rng)
    assert centred.values.min() >= -0.5 and centred.values.max() <= 0.5
    assert abs(centred.values.mean()) <= 3 / np.sqrt(12 * N)

    shifted = sample_initial(opinion_a, N, 1.0, rng)
    # interval [-0.25, 0.75]
    assert abs(shifted.values.mean() - 0.25) <= 3 / np.sqrt(12 * N)


def test_sample_initial_wealth(wealth_b, rng):
    ens = sample_initial(wealth_b, 50_000, 0.0, rng)
    assert ens.values.min() >= 0.0 and ens.values.max() <= 2.0
    assert abs(ens.values.mean() - 1.0) <= 3 * 2 / np.sqrt(12 * ens.N)


def test_sample_initial_needs_two_particles(opinion_a, rng):
    with pytest.raises(ArgumentError):
        sample_initial(opinion_a, 1, 0.0, rng)


def test_stream_spec_is_deterministic():
    spec = RngStreamSpec(2024)
    a = spec.with_key(3, "dsmc").generator().random(5)
    b = spec.with_key(3, "dsmc").generator().random(5)
    c = spec.with_key(3, "nodes").generator().random(5)
    d = spec.child(1).with_key(3, "dsmc").generator().random(5)
    np.testing.assert_array_equal(a, b)
    assert not np.array_equal(a, c)
    assert not np.array_equal(a, d)


def test_select_pairs_are_disjoint(rng):
    first, second = select_pairs(101, 50, rng)
    touched = np.concatenate([first, second])
    assert touched.size == 100
    assert np.unique(touched).size == 100


def test_full_step_pairs_everybody(opinion_a, rng):
    ens = sample_initial(opinion_a, 1000, 0.5, rng)
    out = dsmc_step(ens, opinion_a, 0.1, 0.1)
    assert out.last_pair_count == 500
    assert out.t == pytest.approx(0.1)


def test_half_step_pair_count(opinion_a, rng):
    ens = sample_initial(opinion_a, 10_000, 0.5, rng)
    assert dsmc_step(ens, opinion_a, 0.05, 0.1).last_pair_count == 2500


def test_fractional_pair_count_matches_expectation(opinion_a, rng):
    ens = sample_initial(opinion_a, 1001, 0.5, rng)
    counts = []
    for _ in range(1000):
        ens = dsmc_step(ens, opinion_a, 0.05, 0.1)
        counts.append(ens.last_pair_count)
    # expectation 1001 / 4
    assert abs(np.mean(counts) - 250.25) <= 3 * np.sqrt(0.1875 / len(counts))


def test_odd_ensemble_leaves_one_particle_unpaired(opinion_a, rng):
    ens = sample_initial(opinion_a, 11, 0.5, rng)
    out = dsmc_step(ens, opinion_a, 0.1, 0.1)
    assert out.last_pair_count == 5
    assert np.sum(out.values == ens.values) >= 1


def test_step_larger_than_epsilon_fails(opinion_a, rng):
    ens = sample_initial(opinion_a, 100, 0.5, rng)
    with pytest.raises(NumericError):
        dsmc_step(ens, opinion_a, 0.2, 0.1)


def test_noiseless_step_conserves_the_mean(rng):
    model = build_model("opinion-A", sigma2=0.0)
    ens = sample_initial(model, 10_000, 0.3, rng)
    out = ens
    for _ in range(20):
        out = dsmc_step(out, model, 0.1, 0.1)
    assert abs(out.values.mean() - ens.values.mean()) <= 1e-12


def test_step_count():
    assert step_count(5.0, 0.1) == 50
    assert step_count(1.0, 0.3) == 4
    assert step_count(0.1, 0.01) == 10


def test_run_dsmc_final_snapshot(opinion_a):
    snaps = run_dsmc(opinion_a, 500, 0.5, 0.1, 5.0, RngStreamSpec(7))
    assert len(snaps) == 1
    assert snaps[0].t == pytest.approx(5.0)
    assert np.all(opinion_a.contains(snaps[0].values))


def test_run_dsmc_at_time_zero_returns_initial_sample(opinion_a):
    stream = RngStreamSpec(7)
    snaps = run_dsmc(opinion_a, 500, 0.5, 0.1, 0.0, stream)
    initial = sample_initial(opinion_a, 500, 0.5, stream.generator())
    np.testing.assert_array_equal(snaps[0].values, initial.values)
    assert snaps[0].t == 0.0


def test_run_dsmc_snaps_to_nearest_step(opinion_a):
    snaps = run_dsmc(opinion_a, 200, 0.5, 0.1, 1.0, RngStreamSpec(7), [0.0, 0.25, 1.0])
    assert [s.t for s in snaps][0] == 0.0
    assert abs(snaps[1].t - 0.25) <= 0.05 + 1e-12
    assert snaps[2].t == pytest.approx(1.0)


def test_run_dsmc_is_reproducible(wealth_b):
    a = run_dsmc(wealth_b, 1000, 0.2, 0.1, 2.0, RngStreamSpec(99, 4))
    b = run_dsmc(wealth_b, 1000, 0.2, 0.1, 2.0, RngStreamSpec(99, 4))
    np.testing.assert_array_equal(a[0].values, b[0].values)


def test_run_dsmc_rejects_unsorted_snapshots(opinion_a):
    with pytest.raises(ArgumentError):
        run_dsmc(opinion_a, 100, 0.5, 0.1, 1.0, RngStreamSpec(1), [0.5, 0.2])


def test_wealth_stays_positive_and_mean_drifts_within_noise(wealth_b):
    N, R, steps, epsilon = 10_000, 100, 100, 0.01
    sigma2 = wealth_b.noise.sigma2
    standardized = []
    for r in range(R):
        stream = RngStreamSpec(5, r)
        ens = sample_initial(wealth_b, N, 0.0, stream.generator())
        start, spread = ens.values.mean(), ens.values.std(ddof=1)
        for s in range(1, steps + 1):
            before = ens.values
            ens = dsmc_step(ens, wealth_b, epsilon, epsilon)
            assert ens.values.min() >= 0.0
            drift = ens.values.mean() - start
            assert abs(drift) <= 4.0 * spread / np.sqrt(N) * np.sqrt(s)
            # every particle interacts once per step; the untruncated noise eta * w has variance eps sigma2 w^2
            step_sd = np.sqrt(epsilon * sigma2 * np.mean(before ** 2) / N)
            standardized.append((ens.values.mean() - before.mean()) / step_sd)

    standardized = np.array(standardized)
    n = standardized.size
    assert abs(standardized.mean()) <= 3.0 / np.sqrt(n)
    assert abs(standardized.var(ddof=1) - 1.0) <= 3.0 * np.sqrt(2.0 / (n - 1))


def test_solver_matches_run_dsmc(opinion_b):
    base = RngStreamSpec(11)
    solver = DSMCSolver(opinion_b, 300, 0.1, base)
    a = solver.simulate(0.2, 6, 1.0)
    b = run_dsmc(opinion_b, 300, 0.2, 0.1, 1.0, base.with_key(6, "dsmc"))
    np.testing.assert_array_equal(a[0].values, b[0].values)


def test_ensemble_export(opinion_a, rng, tmp_path):
    ens = sample_initial(opinion_a, 64, 0.5, rng)
    ens.to_binary(str(tmp_path / "ens.bin"))
    np.testing.assert_array_equal(ParticleEnsemble.read_binary(str(tmp_path / "ens.bin")), ens.values)
    ens.to_csv(str(tmp_path / "ens.csv"))
    assert (tmp_path / "ens.csv").read_text().splitlines()[0] == "w"
