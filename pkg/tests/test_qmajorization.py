import numpy as np
import pytest
from hypothesis import given, strategies as st
from scipy.linalg import expm

from majthermo.majorization import NotMajorized
from majthermo.qdivergence import q_renyi_0, q_renyi_inf, quantum_kl
from majthermo.qmajorization import (
    alpha_free_energy_q,
    alpha_free_energy_unnormalized,
    average_work_gap,
    build_scw,
    coherence_counterexample,
    mixture_of_unitaries_witness,
    q_dmaj_sufficient_witness,
    q_majorization_witness,
    q_majorizes,
    random_average_work_instance,
    single_shot_work_verdict,
)
from majthermo.quantum import (
    QGibbsSpec,
    gibbs_spec_diag,
    is_cptp,
    is_gibbs_preserving,
    is_unital,
    proj,
    random_density,
    random_energy_conserving_unitary,
    random_unital_channel,
    thermal_operation_channel,
)

from conftest import seeds


@given(st.integers(2, 4), seeds)
def test_unital_witness_hits_target(d, seed):
    rng = np.random.default_rng(seed)
    rho = random_density(rng, d)
    target = random_unital_channel(rng, d)(rho)
    assert q_majorizes(rho, target)
    E = q_majorization_witness(rho, target)
    assert is_cptp(E) and is_unital(E)
    assert np.abs(E(rho) - target).max() <= 1e-8


@given(st.integers(2, 4), seeds)
def test_mixture_of_unitaries(d, seed):
    rng = np.random.default_rng(seed)
    rho = random_density(rng, d)
    target = random_unital_channel(rng, d)(rho)
    terms = mixture_of_unitaries_witness(rho, target)
    assert sum(w for w, _ in terms) == pytest.approx(1.0)
    for _, U in terms:
        assert np.allclose(U @ U.conj().T, np.eye(d), atol=1e-10)
    out = sum(w * U @ rho @ U.conj().T for w, U in terms)
    assert np.abs(out - target).max() <= 1e-8


def test_witness_refused_when_purity_would_grow():
    with pytest.raises(NotMajorized):
        q_majorization_witness(np.eye(2) / 2, proj([1, 1]))


@given(seeds)
def test_sufficient_dmaj_witness_maps_both_states(seed):
    rng = np.random.default_rng(seed)
    rho = random_density(rng, 3, rank=1)
    sigma = random_density(rng, 3)
    # a target pair that is certainly reachable: push rho towards sigma
    lam = rng.random()
    rt = lam * sigma + (1 - lam) * np.eye(3) / 3
    st_ = sigma
    E = q_dmaj_sufficient_witness(rho, sigma, rt, st_)
    if E is None:
        assert q_renyi_inf(rt, st_) > q_renyi_0(rho, sigma)
        return
    assert is_cptp(E)
    assert np.abs(E(rho) - rt).max() <= 1e-8
    assert np.abs(E(sigma) - st_).max() <= 1e-8


def test_sufficient_test_reports_undecided():
    sigma = np.eye(2) / 2
    assert q_dmaj_sufficient_witness(sigma, sigma, proj([1, 0]), sigma) is None


def test_full_overlap_uses_target_reference():
    sigma = np.eye(2) / 2
    E = q_dmaj_sufficient_witness(sigma, sigma, sigma, sigma)
    assert np.allclose(E(sigma), sigma)


def _specs(rng, d, beta):
    return (QGibbsSpec(np.diag(rng.random(d) * 2), beta), QGibbsSpec(np.diag(rng.random(d) * 2), beta))


@given(seeds, st.floats(-2, 2))
def test_scw_gibbs_state_and_decomposition(seed, w):
    rng = np.random.default_rng(seed)
    sS, sT = _specs(rng, 2, 0.9)
    scw = build_scw(sS, sT, w)
    G = expm(-0.9 * scw.hamiltonian)
    assert np.abs(G / np.trace(G) - scw.gibbs).max() <= 1e-12
    rho = random_density(rng, 2)
    Om = scw.embed(rho, 0, "i")
    shift = sS.beta * sS.free_energy + np.logaddexp(sS.log_Z, sT.log_Z) + sS.beta * scw.E_i + scw.log_Z_W
    for fn in (q_renyi_0, quantum_kl, q_renyi_inf):
        assert fn(Om, scw.gibbs) == pytest.approx(fn(rho, sS.state) + shift, abs=1e-9)


@given(seeds, st.floats(-3, 3))
def test_verdict_sufficient_implies_necessary(seed, w):
    rng = np.random.default_rng(seed)
    sS, sT = _specs(rng, 2, 1.0)
    v = single_shot_work_verdict(random_density(rng, 2), random_density(rng, 2), sS, sT, w)
    if v.sufficient:
        assert v.necessary


def test_verdict_formation_threshold():
    spec = gibbs_spec_diag([0.0, 1.0], 1.0)
    target = proj([0, 1])
    w = q_renyi_inf(target, spec.state)
    assert single_shot_work_verdict(spec.state, target, spec, spec, w + 1e-9).sufficient
    assert not single_shot_work_verdict(spec.state, target, spec, spec, w - 1e-6).necessary


@given(seeds, st.sampled_from([0, 1, np.inf]))
def test_alpha_free_energy_two_routes(seed, a):
    rng = np.random.default_rng(seed)
    H = rng.normal(size=(3, 3)) + 1j * rng.normal(size=(3, 3))
    spec = QGibbsSpec((H + H.conj().T) / 2, 1.4)
    rho = random_density(rng, 3)
    assert abs(alpha_free_energy_q(rho, spec, a) - alpha_free_energy_unnormalized(rho, spec, a)) <= 1e-10


@given(seeds)
def test_average_work_inequality(seed):
    scw, Om, E = random_average_work_instance(np.random.default_rng(seed))
    assert np.abs(E(scw.gibbs) - scw.gibbs).max() <= 1e-9
    assert average_work_gap(scw, Om, E(Om)) >= -1e-8


def test_gibbs_preserving_map_creates_coherence():
    spec, E = coherence_counterexample(0.0, 1.0, 1.0)
    assert is_cptp(E) and is_gibbs_preserving(E, spec)
    assert np.abs(E(proj([0, 1])) - proj([1, 1])).max() <= 1e-12


@given(seeds)
def test_thermal_operations_keep_energy_states_incoherent(seed):
    rng = np.random.default_rng(seed)
    spec = gibbs_spec_diag([0.0, 1.0], 1.0)
    bath = gibbs_spec_diag([0.0, 1.0, 1.0, 2.0], 1.0)
    H = np.kron(spec.hamiltonian, np.eye(4)) + np.kron(np.eye(2), bath.hamiltonian)
    E = thermal_operation_channel(spec, bath, random_energy_conserving_unitary(rng, H))
    out = E(proj([0, 1]))
    assert abs(out[0, 1]) <= 1e-10
