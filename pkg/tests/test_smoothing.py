import time

import numpy as np
import pytest
from hypothesis import given, strategies as st

from majthermo.prob import SupportError, ValidationError, random_stochastic
from majthermo.qdivergence import q_renyi_0, q_renyi_inf
from majthermo.quantum import diag_state, proj, random_channel, random_density
from majthermo.smoothing import (
    HeuristicWarning,
    iid_power,
    markov_path_distribution,
    markov_path_logs,
    markov_rate,
    markov_source_sweep,
    _sh_from_logs,
    sh_classical,
    sh_classical_iid,
    sh_quantum,
    smooth_quantum_bounds,
    smooth_r0_classical,
    smooth_rinf_classical,
    stationary_distribution,
    stein_sweep_classical,
    stein_sweep_quantum,
)

from conftest import prob_pairs, seeds
from oracles import sh_classical_lp, sh_grid, smooth_r0_exhaustive, smooth_rinf_grid, smooth_rinf_lp

etas = st.floats(0.02, 0.98)


def test_sh_classical_examples():
    assert sh_classical([0.5, 0.5], [0.75, 0.25], 0.5) == pytest.approx(np.log(2))
    assert sh_classical([0.3, 0.7], [0.3, 0.7], 0.4) == pytest.approx(0.0, abs=1e-15)
    with pytest.raises(ValidationError):
        sh_classical([0.5, 0.5], [0.5, 0.5], 1.0)


def test_sh_near_one_approaches_support_divergence():
    p, q = [0.6, 0.4, 0.0], [0.3, 0.3, 0.4]
    assert sh_classical(p, q, 1 - 1e-12) == pytest.approx(-np.log(0.6), abs=1e-9)


@given(prob_pairs(full_q=True), etas)
def test_sh_classical_matches_lp(pq, eta):
    p, q = pq
    assert sh_classical(p, q, eta) == pytest.approx(sh_classical_lp(p, q, eta), abs=1e-7)


@given(st.integers(1, 6), etas, seeds)
def test_type_classes_match_direct_tensor(n, eta, seed):
    rng = np.random.default_rng(seed)
    k = int(rng.integers(2, 4))
    p, q = rng.dirichlet(np.ones(k)), rng.dirichlet(np.ones(k))
    direct = sh_classical(iid_power(p, n), iid_power(q, n), eta)
    assert sh_classical_iid(p, q, eta, n) == pytest.approx(direct, abs=1e-12)


def test_type_classes_handle_large_n():
    v = sh_classical_iid([0.5, 0.5], [0.75, 0.25], 0.5, 1000)
    assert abs(v / 1000 - 0.143841) < 0.01


def test_alphabet_guard():
    with pytest.raises(ValidationError):
        sh_classical_iid(np.full(9, 1 / 9), np.full(9, 1 / 9), 0.5, 3)


@given(prob_pairs(full_q=False), etas, seeds)
def test_sh_classical_data_processing(pq, eta, seed):
    p, q = pq
    T = random_stochastic(np.random.default_rng(seed), p.size)
    assert sh_classical(T @ p, T @ q, eta) <= sh_classical(p, q, eta) + 1e-8


@given(prob_pairs(full_q=True), etas, etas)
def test_sh_monotone_in_eta(pq, a, b):
    p, q = pq
    lo, hi = min(a, b), max(a, b)
    assert sh_classical(p, q, lo) >= sh_classical(p, q, hi) - 1e-12


@given(st.integers(2, 3), etas, seeds)
def test_quantum_duality_gap(d, eta, seed):
    rng = np.random.default_rng(seed)
    rho = random_density(rng, d, rank=int(rng.integers(1, d + 1)))
    sigma = random_density(rng, d)
    v, cert = sh_quantum(rho, sigma, eta)
    assert cert.gap <= 1e-8
    assert v == pytest.approx(-np.log(cert.primal))
    # the certificate is feasible: mu rho <= sigma + X
    M = sigma + cert.X - cert.mu * rho
    assert np.linalg.eigvalsh((M + M.conj().T) / 2).min() >= -1e-9


def test_quantum_example_and_identity():
    v, cert = sh_quantum(proj([1, 1]), np.diag([2 / 3, 1 / 3]), 0.5)
    assert cert.gap <= 1e-8
    rho = random_density(np.random.default_rng(2), 3)
    assert sh_quantum(rho, rho, 0.3)[0] == pytest.approx(0.0, abs=1e-9)


def test_quantum_requires_invertible_reference():
    with pytest.raises(SupportError):
        sh_quantum(proj([1, 0]), proj([1, 0]), 0.5)


@given(st.integers(2, 4), etas, seeds)
def test_commuting_quantum_matches_classical(d, eta, seed):
    rng = np.random.default_rng(seed)
    p, q = rng.dirichlet(np.ones(d)), rng.dirichlet(np.ones(d))
    assert sh_quantum(diag_state(p), diag_state(q), eta)[0] == pytest.approx(sh_classical(p, q, eta), abs=1e-10)


@pytest.mark.parametrize("seed", range(5))
def test_quantum_against_threshold_grid(seed):
    rng = np.random.default_rng(seed)
    rho, sigma = random_density(rng, 2), random_density(rng, 2)
    eta = float(rng.uniform(0.1, 0.9))
    v = sh_quantum(rho, sigma, eta)[0]
    g = sh_grid(rho, sigma, eta, n=2000)
    assert g <= v + 1e-9 and v - g <= 1e-4


@given(st.integers(2, 3), etas, seeds)
def test_sh_quantum_data_processing(d, eta, seed):
    rng = np.random.default_rng(seed)
    rho, sigma = random_density(rng, d), random_density(rng, d)
    E = random_channel(rng, d)
    assert sh_quantum(E(rho), E(sigma), eta)[0] <= sh_quantum(rho, sigma, eta)[0] + 1e-8


@given(st.integers(2, 3), etas, st.floats(0.1, 10), seeds)
def test_scaling_reference(d, eta, Z, seed):
    rng = np.random.default_rng(seed)
    rho, sigma = random_density(rng, d), random_density(rng, d)
    assert sh_quantum(rho, sigma / Z, eta)[0] == pytest.approx(sh_quantum(rho, sigma, eta)[0] + np.log(Z), abs=1e-8)


@given(etas, seeds)
def test_block_decomposition(eta, seed):
    rng = np.random.default_rng(seed)
    sig = [random_density(rng, 2) for _ in range(2)]
    r = rng.dirichlet(np.ones(2))
    sigma = np.zeros((4, 4), dtype=complex)
    for k in range(2):
        sigma[2 * k:2 * k + 2, 2 * k:2 * k + 2] = r[k] * sig[k]
    rho = random_density(rng, 2)
    k = int(rng.integers(2))
    embedded = np.zeros((4, 4), dtype=complex)
    embedded[2 * k:2 * k + 2, 2 * k:2 * k + 2] = rho
    lhs = sh_quantum(embedded, sigma, eta)[0]
    assert lhs == pytest.approx(sh_quantum(rho, sig[k], eta)[0] - np.log(r[k]), abs=1e-8)


@given(seeds)
def test_min_max_additive_on_products(seed):
    rng = np.random.default_rng(seed)
    r1, s1, r2, s2 = (random_density(rng, 2) for _ in range(4))
    for fn in (q_renyi_0, q_renyi_inf):
        assert fn(np.kron(r1, r2), np.kron(s1, s2)) == pytest.approx(fn(r1, s1) + fn(r2, s2), abs=1e-9)


def test_smooth_examples():
    assert smooth_r0_classical([0.9, 0.1], [0.5, 0.5], 0.1) == pytest.approx(np.log(2))
    assert smooth_rinf_classical([0.9, 0.1], [0.5, 0.5], 0.2) == pytest.approx(np.log(1.4))
    p, q = [0.7, 0.2, 0.1], [0.2, 0.3, 0.5]
    assert smooth_r0_classical(p, q, 0.0) == pytest.approx(0.0)
    assert smooth_rinf_classical(p, q, 0.0) == pytest.approx(np.log(3.5))
    assert smooth_r0_classical(p, q, 0.31) == pytest.approx(-np.log(0.2))
    assert smooth_rinf_classical(q, q, 0.3) == 0.0


@given(st.integers(2, 8), st.floats(0, 0.95), seeds)
def test_smooth_r0_against_enumeration(d, eps, seed):
    rng = np.random.default_rng(seed)
    p, q = rng.dirichlet(np.ones(d)), rng.dirichlet(np.ones(d))
    assert smooth_r0_classical(p, q, eps) == pytest.approx(smooth_r0_exhaustive(p, q, eps), abs=1e-12)


@given(st.integers(2, 8), st.floats(0, 0.95), seeds)
def test_smooth_rinf_against_lp(d, eps, seed):
    rng = np.random.default_rng(seed)
    p, q = rng.dirichlet(np.ones(d)), rng.dirichlet(np.ones(d))
    assert smooth_rinf_classical(p, q, eps) == pytest.approx(smooth_rinf_lp(p, q, eps), abs=1e-8)


def test_smooth_rinf_against_grid():
    rng = np.random.default_rng(5)
    for _ in range(20):
        p, q = rng.dirichlet(np.ones(4)), rng.dirichlet(np.ones(4))
        eps = float(rng.uniform(0, 0.5))
        g, step = smooth_rinf_grid(p, q, eps)
        v = smooth_rinf_classical(p, q, eps)
        assert v <= g + 1e-12 and np.exp(g) - np.exp(v) <= step + 1e-12


def test_large_dimension_uses_flagged_greedy():
    rng = np.random.default_rng(0)
    p, q = rng.dirichlet(np.ones(30)), rng.dirichlet(np.ones(30))
    with pytest.warns(HeuristicWarning):
        v, exact = smooth_r0_classical(p, q, 0.2, return_exact=True)
    assert not exact and v >= 0


@given(st.integers(2, 5), st.floats(0.01, 0.49), seeds)
def test_brackets_contain_classical_values(d, eps, seed):
    rng = np.random.default_rng(seed)
    p, q = rng.dirichlet(np.ones(d)), rng.dirichlet(np.ones(d))
    b = smooth_quantum_bounds(diag_state(p), diag_state(q), eps)
    assert b.r0_lo - 1e-9 <= smooth_r0_classical(p, q, eps) <= b.r0_hi + 1e-9
    assert b.rinf_lo - 1e-9 <= smooth_rinf_classical(p, q, eps) <= b.rinf_hi + 1e-9


@given(seeds, st.floats(0.01, 0.49))
def test_quantum_brackets_ordered(seed, eps):
    rng = np.random.default_rng(seed)
    b = smooth_quantum_bounds(random_density(rng, 2), random_density(rng, 2), eps)
    assert b.r0_lo <= b.r0_hi and b.rinf_lo <= b.rinf_hi


def test_classical_stein_sweep():
    t0 = time.perf_counter()
    sw = stein_sweep_classical([0.5, 0.5], [0.75, 0.25], 0.5, 200)
    assert time.perf_counter() - t0 < 10
    assert sw.target == pytest.approx(0.1438410362)
    assert abs(sw.rates[-1] - sw.target) <= 0.02 and sw.converged


def test_stein_limit_is_eta_independent():
    a = stein_sweep_classical([0.5, 0.5], [0.75, 0.25], 0.1, 1000)
    b = stein_sweep_classical([0.5, 0.5], [0.75, 0.25], 0.9, 1000)
    assert abs(a.rates[-1] - b.rates[-1]) < 0.05
    assert abs(a.rates[-1] - a.target) < abs(a.rates[0] - a.target)


def test_identical_sources_have_zero_rate():
    sw = stein_sweep_classical([0.3, 0.7], [0.3, 0.7], 0.5, 50)
    assert np.allclose(sw.rates, 0.0, atol=1e-12)


def test_quantum_stein_commuting_matches_classical():
    p, q = [0.6, 0.4], [0.3, 0.7]
    qs = stein_sweep_quantum(diag_state(p), diag_state(q), 0.5, 6)
    cs = stein_sweep_classical(p, q, 0.5, 6)
    assert np.allclose(qs.rates, cs.rates, atol=1e-9)


def test_trellis_matches_dense_paths():
    P = np.array([[0.75, 0.25], [0.25, 0.75]])
    start = np.array([0.3, 0.7])
    for n in (1, 3, 6):
        la, lb = markov_path_logs(P, start, [0.5, 0.5], n)
        dense = markov_path_distribution(P, start, n)
        ref = sh_classical(dense, iid_power([0.5, 0.5], n), 0.5)
        assert _sh_from_logs(la, lb, 0.5) == pytest.approx(ref, abs=1e-10)


def test_markov_with_iid_chain_reduces_to_iid():
    p = np.array([0.6, 0.4])
    P = np.column_stack([p, p])
    sw = markov_source_sweep(P, p, [0.5, 0.5], 0.5, 8)
    cs = stein_sweep_classical(p, [0.5, 0.5], 0.5, 8)
    assert np.allclose(sw.rates, cs.rates, atol=1e-10)


def test_markov_rate_and_guards():
    P = np.array([[0.75, 0.25], [0.25, 0.75]])
    pi = stationary_distribution(P)
    assert np.allclose(pi, [0.5, 0.5])
    assert markov_rate(P, pi, [0.5, 0.5]) == pytest.approx(np.log(2) + 0.75 * np.log(0.75) + 0.25 * np.log(0.25))
    with pytest.raises(ValidationError):
        markov_source_sweep(np.eye(2), [0.5, 0.5], [0.5, 0.5], 0.5, 4)


def test_markov_start_distribution_does_not_change_the_trend():
    P = np.array([[0.75, 0.25], [0.25, 0.75]])
    pi = stationary_distribution(P)
    a = markov_source_sweep(P, pi, [0.5, 0.5], 0.5, 12)
    b = markov_source_sweep(P, pi, [0.5, 0.5], 0.5, 12, p0=[1.0, 0.0])
    # a point-mass start against a uniform reference only costs ln 2 / n
    offset = np.abs(np.array(a.rates) - np.array(b.rates)) * np.array(a.n_values)
    assert np.allclose(offset, np.log(2), atol=1e-9)


def test_quantum_sweep_rejects_ill_conditioned_powers():
    with pytest.raises(SupportError, match="numerically singular"):
        stein_sweep_quantum(np.eye(2) / 2, np.diag([0.95, 0.05]), 0.5, 10)
