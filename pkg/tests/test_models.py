"""
Model catalog, interaction rule and noise admissibility
"""
import numpy as np
import pytest

from errors import ArgumentError, ConfigurationError, DomainError
from models.catalog import build_model, get_model_entry, list_models
from models.interaction import (
    admissible_noise_bound,
    apply_interaction,
    drift_kernel,
    noise_variance_deficit,
    sample_noise,
)
from models.spec import DiffusionSpec, UncertaintyLaw

CATALOG_KEYS = ["opinion-A", "opinion-B", "wealth-A", "wealth-B", "bounded-confidence"]


def test_catalog_lists_all_scenarios():
    assert list_models() == CATALOG_KEYS


def test_unknown_model_entry_returns_error_dictionary():
    result = get_model_entry("opinion-Z")
    assert "error" in result
    assert result["available_models"] == CATALOG_KEYS


def test_build_unknown_model_raises_configuration_error():
    with pytest.raises(ConfigurationError, match="opinion-Z"):
        build_model("opinion-Z")


def test_sigma2_override():
    assert build_model("opinion-A", sigma2=0.05).noise.sigma2 == 0.05


@pytest.mark.parametrize("key", CATALOG_KEYS)
def test_catalog_models_conserve_the_mean(key):
    assert build_model(key).mean_conserving


@pytest.mark.parametrize("key", CATALOG_KEYS)
def test_initial_density_has_unit_mass(key):
    model = build_model(key)
    for z in np.linspace(model.uncertainty.lower[0], model.uncertainty.upper[0], 3):
        assert model.check_initial_mass(z) == pytest.approx(1.0, abs=1e-8)


def test_uncertainty_law_rejects_empty_support():
    with pytest.raises(ConfigurationError):
        UncertaintyLaw((1.0,), (1.0,))


def test_uncertainty_law_samples_inside_support(rng):
    law = UncertaintyLaw((-1.0,), (1.0,))
    samples = law.sample(rng, 1000)
    assert samples.shape == (1000,)
    assert law.contains(samples)


def test_drift_kernel_opinion(opinion_a):
    assert drift_kernel(0.5, 0.1, 0.3, opinion_a) == pytest.approx(0.4)


def test_drift_kernel_wealth(wealth_a):
    assert drift_kernel(2.0, 1.0, 0.5, wealth_a) == pytest.approx(1.0)


def test_drift_kernel_bounded_confidence_beyond_radius(bounded_confidence):
    assert drift_kernel(0.9, -0.9, 1.5, bounded_confidence) == 0.0


def test_bounded_confidence_tie_does_not_interact(bounded_confidence):
    # |v - w| = z exactly
    assert drift_kernel(0.75, -0.75, 1.5, bounded_confidence) == 0.0


def test_drift_kernel_rejects_out_of_domain_state(opinion_a):
    with pytest.raises(DomainError):
        drift_kernel(1.5, 0.0, 0.5, opinion_a)


def test_zero_noise_opinion_contraction(opinion_a):
    v, w = apply_interaction(1.0, -1.0, 0.5, 0.0, 0.0, 0.1, opinion_a)
    assert v == pytest.approx(0.8)
    assert w == pytest.approx(-0.8)


def test_zero_noise_wealth_exchange(wealth_b):
    # z = 0 gives lambda = 1/2
    v, w = apply_interaction(2.0, 0.0, 0.0, 0.0, 0.0, 0.1, wealth_b)
    assert v == pytest.approx(1.9)
    assert w == pytest.approx(0.1)


def test_apply_interaction_rejects_bad_epsilon(opinion_a):
    with pytest.raises(ArgumentError):
        apply_interaction(0.0, 0.0, 0.5, 0.0, 0.0, 1.5, opinion_a)


@pytest.mark.parametrize("key", CATALOG_KEYS)
def test_zero_noise_conserves_pair_sum(key, rng):
    model = build_model(key)
    lo, hi = model.window
    v = rng.uniform(lo, hi, 1000)
    w = rng.uniform(lo, hi, 1000)
    z = model.uncertainty.sample(rng, 1000)
    v_new, w_new = apply_interaction(v, w, z, 0.0, 0.0, 0.3, model)
    np.testing.assert_allclose(v_new + w_new, v + w, rtol=0, atol=1e-13)


def test_opinion_interaction_is_exchangeable(opinion_b, rng):
    v, w = rng.uniform(-1, 1, 100), rng.uniform(-1, 1, 100)
    z = opinion_b.uncertainty.sample(rng, 100)
    bound = admissible_noise_bound(v, w, z, 0.1, opinion_b)
    eta_v, eta_w = rng.uniform(-1, 1, 100) * bound, rng.uniform(-1, 1, 100) * bound
    a = apply_interaction(v, w, z, eta_v, eta_w, 0.1, opinion_b)
    b = apply_interaction(w, v, z, eta_w, eta_v, 0.1, opinion_b)
    np.testing.assert_array_equal(a[0], b[1])
    np.testing.assert_array_equal(a[1], b[0])


@pytest.mark.parametrize("key", CATALOG_KEYS)
@pytest.mark.parametrize("epsilon", [0.1, 0.5, 1.0])
def test_extreme_admissible_noise_keeps_states_in_domain(key, epsilon, rng):
    model = build_model(key)
    n = 100_000
    lo, hi = model.window
    v = rng.uniform(lo, hi, n)
    w = rng.uniform(lo, hi, n)
    z = model.uncertainty.sample(rng, n)
    bound = admissible_noise_bound(v, w, z, epsilon, model)
    eta_v = rng.choice([-1.0, 1.0], n) * bound
    eta_w = rng.uniform(-1.0, 1.0, n) * bound
    v_new, w_new = apply_interaction(v, w, z, eta_v, eta_w, epsilon, model)
    assert np.all(model.contains(v_new)) and np.all(model.contains(w_new))


def test_wealth_noise_bound(wealth_a):
    assert admissible_noise_bound(3.0, 0.5, 0.2, 0.1, wealth_a) == pytest.approx(0.9)


def test_parabola_noise_bound(opinion_b):
    # max p = 3/4 + 1/4 = 1
    bound = admissible_noise_bound(0.5, -0.2, 0.0, 0.1, opinion_b)
    assert bound == pytest.approx(0.9 / 1.5)


def test_interior_bound_has_positive_small_epsilon_limit(opinion_b):
    bounds = [admissible_noise_bound(0.1, -0.1, 0.0, eps, opinion_b) for eps in (1e-2, 1e-4, 1e-6)]
    assert bounds[-1] == pytest.approx(1.0 / 1.1, rel=1e-5)
    assert all(b > 0.8 for b in bounds)


def test_zero_bound_gives_zero_noise(opinion_a, rng):
    assert sample_noise(0.0, 0.1, opinion_a, rng) == 0.0


def test_negative_bound_rejected(opinion_a, rng):
    with pytest.raises(ArgumentError):
        sample_noise(-0.1, 0.1, opinion_a, rng)


def test_untruncated_noise_moments(opinion_a, rng):
    eps = 0.1
    n = 1_000_000
    half = opinion_a.noise.half_width(eps)
    eta = sample_noise(np.full(n, 10.0), eps, opinion_a, rng)
    assert np.all(np.abs(eta) <= half)
    variance = eps * opinion_a.noise.sigma2
    se_var = np.sqrt(4 * half ** 4 / 45 / n)
    assert abs(eta.var() - variance) <= 3 * se_var
    assert abs(eta.mean()) <= 3 * half / np.sqrt(3 * n)


def test_variance_deficit_is_reported(opinion_a):
    eps = 0.1
    assert noise_variance_deficit(10.0, eps, opinion_a) == pytest.approx(0.0, abs=1e-15)
    assert noise_variance_deficit(0.0, eps, opinion_a) == pytest.approx(eps * opinion_a.noise.sigma2)


def _sqrt_parabola(w, z):
    return np.sqrt(np.clip(1.0 - w * w, 0.0, None))


def test_custom_diffusion_evaluates_callable():
    custom = DiffusionSpec("custom", func=_sqrt_parabola)
    w = np.linspace(-1.0, 1.0, 11)
    np.testing.assert_allclose(custom(w, 0.3), DiffusionSpec("sqrt-parabola")(w))
    np.testing.assert_allclose(custom.squared(w), 1.0 - w * w, atol=1e-15)


def test_custom_diffusion_broadcasts_constant_callable():
    custom = DiffusionSpec("custom", func=lambda w, z: 0.5)
    assert custom(np.zeros(4)).shape == (4,)
    assert np.all(custom(np.zeros(4)) == 0.5)


def test_custom_diffusion_needs_callable():
    with pytest.raises(ConfigurationError):
        DiffusionSpec("custom")
