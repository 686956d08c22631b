import numpy as np
import pytest
from hypothesis import assume, given, strategies as st

from majthermo.divergence import (
    CHI2,
    HELLINGER,
    KLF,
    TV,
    ParamFamily,
    f_divergence,
    fisher_matrix,
    fisher_metric,
    kl_divergence,
    named_function,
    power_fn,
    renyi_divergence,
    renyi_entropy,
    shannon_entropy,
)
from majthermo.prob import DimensionError, SupportError, random_stochastic

from conftest import prob_pairs, prob_vectors, seeds

ALPHAS = [0.0, 0.3, 0.5, 0.9, 1.0, 1.5, 2.0, 5.0, np.inf]


def test_shannon_and_kl_basics():
    assert shannon_entropy([0.5, 0.5]) == pytest.approx(np.log(2))
    assert shannon_entropy([1.0, 0.0]) == 0.0
    assert kl_divergence([1, 0], [0.5, 0.5]) == pytest.approx(np.log(2))
    assert kl_divergence([0.5, 0.5], [1, 0]) == np.inf


def test_kl_dimension_mismatch():
    with pytest.raises(DimensionError):
        kl_divergence([1.0], [0.5, 0.5])


def test_renyi_endpoints():
    p, q = np.array([0.7, 0.3, 0.0]), np.array([0.2, 0.3, 0.5])
    assert renyi_divergence(p, q, 0) == pytest.approx(-np.log(0.5))
    assert renyi_divergence(p, q, np.inf) == pytest.approx(np.log(3.5))
    assert renyi_divergence(p, q, 1) == pytest.approx(kl_divergence(p, q))


@given(prob_pairs(full_q=True))
def test_renyi_continuous_at_one(pq):
    p, q = pq
    lo, hi = renyi_divergence(p, q, 1 - 1e-6), renyi_divergence(p, q, 1 + 1e-6)
    assert abs(lo - kl_divergence(p, q)) < 1e-4
    assert abs(hi - kl_divergence(p, q)) < 1e-4


@given(prob_pairs(full_q=True))
def test_renyi_monotone_in_alpha(pq):
    p, q = pq
    vals = [renyi_divergence(p, q, a) for a in ALPHAS]
    assert all(b >= a - 1e-9 for a, b in zip(vals, vals[1:]))


@given(prob_pairs(full_q=True), st.sampled_from([-0.5, -2.0, -7.0]))
def test_negative_order_duality(pq, a):
    p, q = pq
    assume(np.all(p > 1e-6))
    lhs = renyi_divergence(p, q, a)
    rhs = a / (a - 1) * renyi_divergence(q, p, 1 - a)
    assert lhs == pytest.approx(rhs, rel=1e-9, abs=1e-9)


def test_renyi_entropy_orders():
    p = np.array([0.5, 0.25, 0.25, 0.0])
    assert renyi_entropy(p, 0) == pytest.approx(np.log(3))
    assert renyi_entropy(p, 1) == pytest.approx(shannon_entropy(p))
    assert renyi_entropy(p, np.inf) == pytest.approx(np.log(2))


@given(prob_pairs(full_q=False), seeds, st.sampled_from(ALPHAS))
def test_renyi_data_processing(pq, seed, a):
    p, q = pq
    T = random_stochastic(np.random.default_rng(seed), p.size)
    before = renyi_divergence(p, q, a)
    after = renyi_divergence(T @ p, T @ q, a)
    assert after <= before + 1e-8 or before == np.inf


@pytest.mark.parametrize("f", [KLF, TV, HELLINGER, CHI2, power_fn(0.4), power_fn(3.0)])
@given(pq=prob_pairs(full_q=False), seed=seeds)
def test_f_divergence_data_processing(f, pq, seed):
    p, q = pq
    T = random_stochastic(np.random.default_rng(seed), p.size)
    before, after = f_divergence(p, q, f), f_divergence(T @ p, T @ q, f)
    assert after <= before + 1e-8 or before == np.inf


@given(prob_pairs(full_q=True))
def test_named_functions_reproduce_known_divergences(pq):
    p, q = pq
    assert f_divergence(p, q, KLF) == pytest.approx(kl_divergence(p, q), abs=1e-12)
    assert f_divergence(p, q, TV) == pytest.approx(0.5 * np.abs(p - q).sum(), abs=1e-12)
    assert f_divergence(p, q, CHI2) == pytest.approx(np.sum((p - q) ** 2 / q), abs=1e-9)
    for a in (2.0, 3.0):
        s = np.log(f_divergence(p, q, power_fn(a))) / (a - 1)
        assert s == pytest.approx(renyi_divergence(p, q, a), abs=1e-9)


def test_f_divergence_support_leak_uses_slope_at_infinity():
    p, q = np.array([0.5, 0.5]), np.array([1.0, 0.0])
    assert f_divergence(p, q, TV) == pytest.approx(0.5)
    assert f_divergence(p, q, HELLINGER) == pytest.approx(1 - np.sqrt(0.5))
    assert f_divergence(p, q, KLF) == np.inf


def test_named_function_lookup():
    assert named_function("tv") is TV
    assert named_function("alpha:2").label == "alpha:2"
    with pytest.raises(ValueError):
        named_function("nope")


def _softmax_family(T):
    # exponential family p_theta(x) ~ exp(theta . T(x))
    T = np.asarray(T, dtype=float)

    def state_at(theta):
        x = T @ np.atleast_1d(theta)
        w = np.exp(x - x.max())
        return w / w.sum()

    def hessian_A(theta):
        p = state_at(theta)
        mean = p @ T
        return (T * p[:, None]).T @ T - np.outer(mean, mean)

    return state_at, hessian_A


@pytest.mark.parametrize("theta", [[0.3], [-1.2], [0.4, -0.7]])
def test_fisher_of_exponential_family_is_hessian(theta):
    T = [[0.0], [1.0], [2.5]] if len(theta) == 1 else [[0, 0], [1, 0], [0, 1], [1, 2]]
    state_at, hess = _softmax_family(T)
    J = fisher_matrix(ParamFamily(state_at, m=len(theta)), theta)
    assert np.abs(J - hess(np.array(theta))).max() < 1e-6


def test_cramer_rao_saturated_for_bernoulli_mean():
    # the sample frequency is efficient: var = 1/J for one draw
    for th in (0.2, 0.5, 0.83):
        fam = ParamFamily(lambda t: np.array([1 - t[0], t[0]]))
        J = fisher_matrix(fam, [th])[0, 0]
        assert 1 / J == pytest.approx(th * (1 - th), rel=1e-8)


@given(seeds)
def test_fisher_monotone_under_stochastic_maps(seed):
    rng = np.random.default_rng(seed)
    state_at, _ = _softmax_family(rng.normal(size=(4, 2)))
    T = random_stochastic(rng, 3, 4)
    th = rng.normal(size=2)
    J = fisher_matrix(ParamFamily(state_at, m=2), th)
    J2 = fisher_matrix(ParamFamily(lambda t: T @ state_at(t), m=2), th)
    assert np.linalg.eigvalsh(J - J2).min() >= -1e-8


def test_fisher_metric_requires_support():
    assert fisher_metric([0.5, 0.5], [1, -1], [1, -1]) == pytest.approx(4.0)
    with pytest.raises(SupportError):
        fisher_metric([1.0, 0.0], [1, -1], [1, -1])
