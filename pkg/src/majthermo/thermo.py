"""Classical second law: entropy production, free energies, protocols and
work-assisted convertibility.

Sign convention: ``work`` is energy delivered *to* the system, so extraction
shows up as negative work.
"""

from dataclasses import dataclass, field

import numpy as np

from .divergence import kl_divergence, renyi_divergence, shannon_entropy
from .majorization import thermo_majorizes
from .prob import ValidationError, is_fixed_point

CAP_KT = 40.0
TOL = 1e-10


class GibbsPreservationError(ValidationError):
    code = "not_gibbs_preserving"


def _gibbs(E, beta):
    x = -beta * np.asarray(E, dtype=float)
    w = np.exp(x - x.max())
    return w / w.sum()


def _check_gp(T, g, tol=1e-9):
    T = np.asarray(T, dtype=float)
    if T.shape != (g.size, g.size) or not is_fixed_point(T, g, tol):
        raise GibbsPreservationError("relaxation map does not fix the Gibbs state")
    return T


def entropy_production(p, T, gibbs):
    g = gibbs.state
    T = _check_gp(T, g)
    p = np.asarray(p, dtype=float)
    return kl_divergence(p, g) - kl_divergence(T @ p, g)


def heat(p, T, energies):
    p = np.asarray(p, dtype=float)
    return float(np.dot(energies, np.asarray(T) @ p - p))


def noneq_free_energy(p, gibbs, alpha=1.0):
    if gibbs.beta <= 0:
        raise ValidationError("free energies need beta > 0")
    return renyi_divergence(p, gibbs.state, alpha) / gibbs.beta + gibbs.free_energy


@dataclass(frozen=True)
class Quench:
    energies: tuple


@dataclass(frozen=True)
class Relax:
    """Relaxation under the current Hamiltonian; ``T=None`` relaxes fully."""

    T: object = None


@dataclass
class Protocol:
    steps: list
    beta: float


@dataclass
class ProtocolReport:
    work: float
    heat: float
    delta_S1: float
    sigma: float
    trajectory: list = field(default_factory=list)
    work_variance: float = 0.0
    energies: tuple = ()


def simulate_protocol(proto, p0, E0):
    beta = proto.beta
    p = np.array(p0, dtype=float)
    E = np.array(E0, dtype=float)
    m1 = np.zeros_like(p)
    m2 = np.zeros_like(p)
    W = Q = 0.0
    e_start = float(E @ p)
    s_start = shannon_entropy(p)
    traj = [p.copy()]
    for step in proto.steps:
        if isinstance(step, Quench):
            E_new = np.array(step.energies, dtype=float)
            if E_new.shape != E.shape:
                raise ValidationError("quench changes the number of levels")
            w = E_new - E
            W += float(w @ p)
            m2 = m2 + 2 * w * m1 + w * w * p
            m1 = m1 + w * p
            E = E_new
        elif isinstance(step, Relax):
            g = _gibbs(E, beta)
            if step.T is None:
                T = np.outer(g, np.ones_like(g))
            else:
                T = _check_gp(step.T, g)
            p_new = T @ p
            Q += float(E @ (p_new - p))
            p = p_new
            m1 = T @ m1
            m2 = T @ m2
        else:
            raise ValidationError(f"unknown protocol step {step!r}")
        traj.append(p.copy())
    dS = shannon_entropy(p) - s_start
    var = max(0.0, float(m2.sum() - m1.sum() ** 2))
    rep = ProtocolReport(W, Q, dS, dS - beta * Q, traj, var, tuple(E))
    if abs((float(E @ p) - e_start) - (W + Q)) > 1e-9:
        raise AssertionError("first-law bookkeeping failed")
    return rep


def staircase(E_from, E_to, N):
    """N quench-then-relax steps along the straight line between spectra."""
    E_from = np.asarray(E_from, dtype=float)
    E_to = np.asarray(E_to, dtype=float)
    steps = []
    for n in range(1, N + 1):
        steps.append(Quench(tuple(E_from + (n / N) * (E_to - E_from))))
        steps.append(Relax())
    return steps


def _effective_energies(p, beta, cap):
    p = np.asarray(p, dtype=float)
    out = np.full(p.size, cap)
    m = p > 0
    out[m] = -np.log(p[m]) / beta
    return np.minimum(out, cap)


def geodesic_states(p_from, p_to, N):
    """N states along the great circle joining sqrt(p_from) and sqrt(p_to).

    Equal steps in Fisher length keep the quasi-static dissipation near its
    minimum, about L**2 / (2 N).
    """
    a = np.sqrt(np.asarray(p_from, dtype=float))
    b = np.sqrt(np.asarray(p_to, dtype=float))
    theta = float(np.arccos(np.clip(a @ b, -1.0, 1.0)))
    out = []
    for n in range(1, N + 1):
        s = n / N
        if theta < 1e-12:
            v = (1 - s) * a + s * b
        else:
            v = (np.sin((1 - s) * theta) * a + np.sin(s * theta) * b) / np.sin(theta)
        v = v * v
        out.append(v / v.sum())
    return out


def quasi_static(p_from, p_to, beta, N, cap):
    """Quench/relax staircase through the Gibbs states on the geodesic."""
    steps = []
    for state in geodesic_states(p_from, p_to, N):
        steps.append(Quench(tuple(_effective_energies(state, beta, cap))))
        steps.append(Relax())
    return steps


def optimal_fluctuating_protocol(p, p_target, E, E_target, beta, N):
    """Quench so that p is thermal, move quasi-statically, quench back out.

    Zero-probability levels are parked at ``max(E) + 40/beta`` instead of
    infinity.
    """
    if N < 1:
        raise ValidationError("N must be >= 1")
    cap = max(np.max(E), np.max(E_target)) + CAP_KT / beta
    Et = _effective_energies(p, beta, cap)
    start = _gibbs(Et, beta)
    steps = [Quench(tuple(Et))]
    steps += quasi_static(start, p_target, beta, N, cap)
    steps.append(Quench(tuple(np.asarray(E_target, dtype=float))))
    return Protocol(steps, beta)


def single_shot_extraction(p, gibbs, N=256):
    """Deterministic extractable work beta^-1 S_0(p||p_G) and a protocol for it."""
    if gibbs.beta <= 0:
        raise ValidationError("extraction needs beta > 0")
    p = np.asarray(p, dtype=float)
    beta = gibbs.beta
    w = renyi_divergence(p, gibbs.state, 0.0) / beta
    E = gibbs.E
    cap = E.max() + CAP_KT / beta
    raised = np.where(p > 0, E, cap)
    steps = [Quench(tuple(raised)), Relax()]
    steps += quasi_static(_gibbs(raised, beta), gibbs.state, beta, N, cap)
    steps.append(Quench(tuple(E)))
    return w, Protocol(steps, beta)


@dataclass(frozen=True)
class WorkVerdict:
    transformable: bool
    sufficient: bool
    necessary: bool


def _clock_composite(p, p_target, gibbs, gibbs_target):
    """System(+clock) vectors; the clock is only added when Hamiltonians differ."""
    if gibbs.energies == gibbs_target.energies:
        return np.asarray(p, float), np.asarray(p_target, float), gibbs.state
    d, d2 = gibbs.dim, gibbs_target.dim
    a = np.concatenate([p, np.zeros(d2)])
    b = np.concatenate([np.zeros(d), p_target])
    logw = np.concatenate([-gibbs.beta * gibbs.E, -gibbs.beta * gibbs_target.E])
    g = np.exp(logw - logw.max())
    return a, b, g / g.sum()


def work_storage_gibbs(w, beta):
    """Two-level battery with levels (final, initial) at energies (0, w)."""
    x = np.array([0.0, -beta * w])
    g = np.exp(x - x.max())
    return g / g.sum()


def w_assisted_transformable(p, p_target, gibbs, gibbs_target, w):
    if gibbs.beta != gibbs_target.beta or gibbs.beta <= 0:
        raise ValidationError("both Gibbs specs need the same beta > 0")
    p = np.asarray(p, dtype=float)
    p_target = np.asarray(p_target, dtype=float)
    if p.size != gibbs.dim or p_target.size != gibbs_target.dim:
        raise ValidationError("state and Hamiltonian dimensions differ")
    beta = gibbs.beta
    a, b, g = _clock_composite(p, p_target, gibbs, gibbs_target)
    r = work_storage_gibbs(w, beta)
    start = np.kron(a, [0.0, 1.0])
    end = np.kron(b, [1.0, 0.0])
    verdict = thermo_majorizes(start, end, np.kron(g, r))

    lhs = beta * (w - (gibbs_target.free_energy - gibbs.free_energy))
    g0, g1 = gibbs.state, gibbs_target.state
    s0, s0t = renyi_divergence(p, g0, 0.0), renyi_divergence(p_target, g1, 0.0)
    si, sit = renyi_divergence(p, g0, np.inf), renyi_divergence(p_target, g1, np.inf)
    necessary = lhs >= s0t - s0 - TOL and lhs >= sit - si - TOL
    sufficient = lhs >= sit - s0 - TOL
    return WorkVerdict(bool(verdict), bool(sufficient), bool(necessary))


def work_bound(case, p, gibbs, gibbs_target=None):
    """Smallest w for the three textbook transitions.

    formation: p_G -> p;  extraction: p -> p_G;  equilibrium: p_G -> p_G'.
    """
    beta = gibbs.beta
    if case == "formation":
        return renyi_divergence(p, gibbs.state, np.inf) / beta
    if case == "extraction":
        return -renyi_divergence(p, gibbs.state, 0.0) / beta
    if case == "equilibrium":
        if gibbs_target is None:
            raise ValidationError("equilibrium case needs a target Hamiltonian")
        return gibbs_target.free_energy - gibbs.free_energy
    raise ValidationError(f"unknown case {case!r}")
