"""Quantum majorization witnesses, measure-and-prepare d-majorization and
single-shot work with a clock and a two-level work storage."""

from dataclasses import dataclass

import numpy as np

from .majorization import NotMajorized, birkhoff_decompose, majorizes, violated_k, witness_doubly_stochastic
from .prob import ValidationError
from .qdivergence import quantum_kl, q_renyi_0, q_renyi_inf, support_projector
from .quantum import QGibbsSpec, QuantumChannel, eigh_desc, partial_trace, proj

TOL = 1e-10


def q_majorizes(rho, rho_target):
    return majorizes(eigh_desc(rho)[0], eigh_desc(rho_target)[0])


def _eig_pair(rho, rho_target):
    p, Phi = eigh_desc(rho)
    p2, Phi2 = eigh_desc(rho_target)
    p, p2 = np.clip(p, 0, None), np.clip(p2, 0, None)
    k = violated_k(p, p2)
    if k is not None:
        raise NotMajorized(f"spectrum of target not majorized (partial sum {k})", k)
    return p, Phi, p2, Phi2


def q_majorization_witness(rho, rho_target):
    """Unital channel with Kraus ops sqrt(T_ji) |phi'_j><phi_i|."""
    p, Phi, p2, Phi2 = _eig_pair(rho, rho_target)
    T = witness_doubly_stochastic(p, p2).matrix
    ks = []
    for j in range(T.shape[0]):
        for i in range(T.shape[1]):
            if T[j, i] > 0:
                ks.append(np.sqrt(T[j, i]) * np.outer(Phi2[:, j], Phi[:, i].conj()))
    return QuantumChannel(ks)


def mixture_of_unitaries_witness(rho, rho_target):
    """[(weight, U)] with U = Phi' P Phi^dagger from a Birkhoff decomposition."""
    p, Phi, p2, Phi2 = _eig_pair(rho, rho_target)
    T = witness_doubly_stochastic(p, p2).matrix
    out = []
    for perm, w in birkhoff_decompose(T):
        P = np.zeros_like(T)
        P[np.arange(T.shape[0]), perm] = 1.0
        out.append((w, Phi2 @ P @ Phi.conj().T))
    return out


def _prepare_kraus(state, basis_vectors):
    lam, V = eigh_desc(state)
    ks = []
    for k in range(lam.size):
        if lam[k] > 0:
            for e in basis_vectors:
                ks.append(np.sqrt(lam[k]) * np.outer(V[:, k], e.conj()))
    return ks


def q_dmaj_sufficient_witness(rho, sigma, rho_target, sigma_target, tol=TOL):
    """Measure-and-prepare channel, or None when the sufficient test fails.

    None means "undecided": a channel may still exist.
    """
    s0 = q_renyi_0(rho, sigma)
    if q_renyi_inf(rho_target, sigma_target) > s0 + tol:
        return None
    c = float(np.exp(-s0))
    P = support_projector(rho)
    w, V = eigh_desc(P)
    inside = [V[:, i] for i in range(w.size) if w[i] > 0.5]
    outside = [V[:, i] for i in range(w.size) if w[i] <= 0.5]
    rho_target = np.asarray(rho_target)
    sigma_target = np.asarray(sigma_target)
    if 1 - c > 1e-12:
        rest = (sigma_target - c * rho_target) / (1 - c)
        rest = (rest + rest.conj().T) / 2
        lam, U = eigh_desc(rest)
        # the sufficient test guarantees rest >= 0 up to rounding
        rest = (U * np.clip(lam, 0, None)) @ U.conj().T
        rest = rest / np.trace(rest).real
    else:
        rest = sigma_target
    ks = _prepare_kraus(rho_target, inside)
    if outside:
        ks += _prepare_kraus(rest, outside)
    return QuantumChannel(ks)


@dataclass(frozen=True)
class SCWComposite:
    """System (x) clock (x) work storage.

    Work levels are ordered (final, initial) with energies (0, w), so that
    the storage hands the system the energy E_i - E_f = w.
    """

    spec_S: QGibbsSpec
    spec_S_target: QGibbsSpec
    w: float
    hamiltonian: np.ndarray
    gibbs: np.ndarray

    @property
    def beta(self):
        return self.spec_S.beta

    @property
    def dims(self):
        return (self.spec_S.dim, 2, 2)

    @property
    def E_i(self):
        return self.w

    @property
    def E_f(self):
        return 0.0

    @property
    def log_Z_W(self):
        return float(np.logaddexp(0.0, -self.beta * self.w))

    def embed(self, rho_S, clock, work):
        """rho_S (x) |clock><clock| (x) rho_W; ``work`` is 'i', 'f' or a 2x2 state."""
        c = np.zeros((2, 2))
        c[clock, clock] = 1.0
        if isinstance(work, str):
            W = np.zeros((2, 2))
            idx = {"f": 0, "i": 1}[work]
            W[idx, idx] = 1.0
        else:
            W = np.asarray(work)
        return np.kron(np.kron(np.asarray(rho_S), c), W)

    def system_marginal(self, Omega, clock):
        """Unnormalized block of the system with the clock in ``clock``."""
        d = self.spec_S.dim
        r = np.asarray(Omega).reshape(d, 2, 2, d, 2, 2)
        return np.einsum("ickjcl->ij", r[:, clock:clock + 1, :, :, clock:clock + 1, :])

    def work_marginal(self, Omega):
        d = self.spec_S.dim
        return partial_trace(Omega, (2 * d, 2), keep="B")


def build_scw(spec_S, spec_S_target, w):
    if spec_S.beta != spec_S_target.beta:
        raise ValidationError("system Hamiltonians must share beta")
    if spec_S.dim != spec_S_target.dim:
        raise ValidationError("initial and final system dimensions differ")
    d = spec_S.dim
    beta = spec_S.beta
    c0, c1 = np.diag([1.0, 0.0]), np.diag([0.0, 1.0])
    H_W = np.diag([0.0, float(w)])
    H = (np.kron(np.kron(spec_S.hamiltonian, c0), np.eye(2))
         + np.kron(np.kron(spec_S_target.hamiltonian, c1), np.eye(2))
         + np.kron(np.eye(2 * d), H_W))
    lz = np.logaddexp(spec_S.log_Z, spec_S_target.log_Z)
    G_SC = (np.kron(spec_S.state, c0) * np.exp(spec_S.log_Z - lz)
            + np.kron(spec_S_target.state, c1) * np.exp(spec_S_target.log_Z - lz))
    x = np.array([0.0, -beta * w])
    gw = np.exp(x - np.logaddexp(x[0], x[1]))
    G = np.kron(G_SC, np.diag(gw))
    return SCWComposite(spec_S, spec_S_target, float(w), H, G)


@dataclass(frozen=True)
class QWorkVerdict:
    necessary_alpha0: bool
    necessary_alpha1: bool
    necessary_alphainf: bool
    sufficient: bool

    @property
    def necessary(self):
        return self.necessary_alpha0 and self.necessary_alpha1 and self.necessary_alphainf


def _divs(rho, G):
    return q_renyi_0(rho, G), quantum_kl(rho, G), q_renyi_inf(rho, G)


def single_shot_work_verdict(rho, rho_target, spec_S, spec_S_target, w, tol=TOL):
    beta = spec_S.beta
    if beta <= 0 or spec_S_target.beta != beta:
        raise ValidationError("verdict needs a shared beta > 0")
    lhs = beta * (w - (spec_S_target.free_energy - spec_S.free_energy))
    a0, a1, ai = _divs(rho, spec_S.state)
    b0, b1, bi = _divs(rho_target, spec_S_target.state)
    v = QWorkVerdict(
        bool(lhs >= b0 - a0 - tol),
        bool(lhs >= b1 - a1 - tol),
        bool(lhs >= bi - ai - tol),
        bool(lhs >= bi - a0 - tol),
    )
    if v.sufficient and not v.necessary:
        raise AssertionError("sufficient verdict without the necessary ones")
    return v


def alpha_free_energy_q(rho, spec, alpha=1.0):
    if spec.beta <= 0:
        raise ValidationError("free energies need beta > 0")
    G = spec.state
    if alpha == 0:
        s = q_renyi_0(rho, G)
    elif alpha == 1:
        s = quantum_kl(rho, G)
    elif alpha == np.inf:
        s = q_renyi_inf(rho, G)
    else:
        raise ValidationError("alpha must be 0, 1 or inf")
    return s / spec.beta + spec.free_energy


def alpha_free_energy_unnormalized(rho, spec, alpha=1.0):
    """Same quantity computed against exp(-beta H) without normalizing."""
    G = spec.unnormalized()
    fn = {0: q_renyi_0, 1: quantum_kl, np.inf: q_renyi_inf}[alpha]
    return fn(rho, G) / spec.beta


def average_work_gap(scw, Omega_in, Omega_out):
    """LHS - RHS of the average work inequality for a perfect-clock run.

    LHS: beta (W - dF) + S(rho_W') - S(rho_W); RHS: change of S_1 against the
    system Gibbs states.  W is read off the work-storage marginal.
    """
    from .qdivergence import von_neumann

    beta = scw.beta
    rs = scw.system_marginal(Omega_in, 0)
    rs2 = scw.system_marginal(Omega_out, 1)
    leak = 1.0 - float(np.trace(rs2).real)
    if leak > 1e-8:
        raise ValidationError("clock did not end in its final state")
    W_in, W_out = scw.work_marginal(Omega_in), scw.work_marginal(Omega_out)
    H_W = np.diag([0.0, scw.w])
    work = float(np.trace(H_W @ (W_in - W_out)).real)
    dF = scw.spec_S_target.free_energy - scw.spec_S.free_energy
    lhs = beta * (work - dF) + von_neumann(W_out) - von_neumann(W_in)
    rhs = quantum_kl(rs2, scw.spec_S_target.state) - quantum_kl(rs, scw.spec_S.state)
    return lhs - rhs


def coherence_counterexample(E0, E1, beta):
    """Gibbs-preserving qubit map sending |1> to |+>; no thermal operation can."""
    spec = QGibbsSpec(np.diag([E0, E1]), beta)
    G = spec.state
    p0, p1 = G[0, 0].real, G[1, 1].real
    plus = proj([1, 1])
    sigma = (G - p1 * plus) / p0
    ks = _prepare_kraus(sigma, [np.array([1, 0], complex)])
    ks += _prepare_kraus(plus, [np.array([0, 1], complex)])
    return spec, QuantumChannel(ks)


def random_average_work_instance(rng, d=2, beta=1.0, max_tries=20000):
    """Sample (scw, Omega, channel) with a Gibbs-preserving composite channel.

    The system and clock move 0 -> 1 and the storage populations are swapped;
    draws are repeated until the measure-and-prepare construction applies.
    """
    from .quantum import random_density

    for _ in range(max_tries):
        sS = QGibbsSpec(np.diag(rng.random(d)), beta)
        sT = QGibbsSpec(np.diag(rng.random(d)), beta)
        scw = build_scw(sS, sT, 2 * rng.normal())
        rho = random_density(rng, d, rank=1 if rng.random() < 0.5 else d)
        pw = rng.dirichlet([1.0, 1.0])
        Om = scw.embed(rho, 0, np.diag(pw))
        Ot = scw.embed(random_density(rng, d), 1, np.diag(pw[::-1]))
        E = q_dmaj_sufficient_witness(Om, scw.gibbs, Ot, scw.gibbs)
        if E is not None:
            return scw, Om, E
    raise RuntimeError("no admissible instance found")
