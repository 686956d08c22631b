"""Quantum entropies and divergences: von Neumann, relative entropy, the
min/max divergences, Petz and sandwiched Renyi, Petz quasi-entropies and
quantum Fisher information.

The second argument may be unnormalized; every log-trace divergence then
shifts by ``-ln tr(sigma)``-type constants exactly as the formulas dictate.
"""

import warnings

import numpy as np

from .divergence import shannon_entropy
from .prob import SupportError, ValidationError
from .quantum import eigh_desc, mpow, msqrt, fidelity

RANK_TOL = 1e-10
INF = float("inf")


class NoMonotonicityWarning(UserWarning):
    pass


def _support(w, rank_tol=RANK_TOL):
    top = max(float(w[0]), 0.0)
    return w > rank_tol * top


def _spec(A, rank_tol=RANK_TOL):
    w, V = eigh_desc(A)
    keep = _support(w, rank_tol)
    return w, V, keep


def _leaks(rho, sigma, rank_tol=RANK_TOL):
    """True when rho has weight outside supp(sigma)."""
    w, V, keep = _spec(sigma, rank_tol)
    if keep.all():
        return False
    Vc = V[:, ~keep]
    out = np.trace(Vc.conj().T @ np.asarray(rho) @ Vc).real
    return out > rank_tol * max(1.0, float(np.trace(np.asarray(rho)).real))


def von_neumann(rho):
    w = np.clip(eigh_desc(rho)[0], 0.0, None)
    return shannon_entropy(w)


def _overlaps(rho, sigma):
    p, P = eigh_desc(rho)
    q, Q = eigh_desc(sigma)
    return np.clip(p, 0.0, None), np.clip(q, 0.0, None), np.abs(P.conj().T @ Q) ** 2


def quantum_kl(rho, sigma, rank_tol=RANK_TOL):
    if _leaks(rho, sigma, rank_tol):
        return INF
    p, q, O = _overlaps(rho, sigma)
    kp = _support(p, rank_tol)
    kq = _support(q, rank_tol)
    a = float(np.sum(p[kp] * np.log(p[kp])))
    b = float(np.sum((p[kp, None] * O[np.ix_(kp, kq)]) * np.log(q[kq])[None, :]))
    return max(0.0, a - b) if abs(np.sum(p) - np.sum(q)) < 1e-9 else a - b


def support_projector(rho, rank_tol=RANK_TOL):
    w, V, keep = _spec(rho, rank_tol)
    Vk = V[:, keep]
    return Vk @ Vk.conj().T


def q_renyi_0(rho, sigma, rank_tol=RANK_TOL):
    P = support_projector(rho, rank_tol)
    t = float(np.trace(P @ np.asarray(sigma)).real)
    if t <= 0:
        return INF
    return float(-np.log(t))


def q_renyi_inf(rho, sigma, rank_tol=RANK_TOL):
    if _leaks(rho, sigma, rank_tol):
        return INF
    S = mpow(sigma, -0.5, rank_tol * max(float(eigh_desc(sigma)[0][0]), 0.0))
    top = float(eigh_desc(S @ np.asarray(rho) @ S)[0][0])
    return float(np.log(top))


def petz_renyi(rho, sigma, alpha, rank_tol=RANK_TOL):
    a = float(alpha)
    if not 0 <= a <= 2:
        warnings.warn("Petz Renyi outside [0, 2] carries no monotonicity guarantee", NoMonotonicityWarning)
    if a == 1:
        return quantum_kl(rho, sigma, rank_tol)
    if a == 0:
        return q_renyi_0(rho, sigma, rank_tol)
    if a > 1 and _leaks(rho, sigma, rank_tol):
        return INF
    p, q, O = _overlaps(rho, sigma)
    kp = _support(p, rank_tol)
    kq = _support(q, rank_tol)
    s = float(np.sum((p[kp, None] ** a) * O[np.ix_(kp, kq)] * (q[kq][None, :] ** (1 - a))))
    if s <= 0:
        return INF
    return float(np.log(s) / (a - 1))


def sandwiched_renyi(rho, sigma, alpha, rank_tol=RANK_TOL):
    a = float(alpha)
    if a == 1:
        return quantum_kl(rho, sigma, rank_tol)
    if a == INF:
        return q_renyi_inf(rho, sigma, rank_tol)
    if a < 0.5:
        raise ValidationError("sandwiched Renyi is defined here for alpha >= 1/2")
    if a == 0.5:
        F = fidelity(rho, sigma)
        return INF if F <= 0 else -2.0 * np.log(F)
    if a > 1 and _leaks(rho, sigma, rank_tol):
        return INF
    top = max(float(eigh_desc(sigma)[0][0]), 0.0)
    S = mpow(sigma, (1 - a) / (2 * a), rank_tol * top)
    M = S @ np.asarray(rho) @ S
    w = np.clip(eigh_desc(M)[0], 0.0, None)
    w = w[w > 0]
    if w.size == 0:
        return INF
    lw = np.log(w) * a
    m = lw.max()
    return float((m + np.log(np.exp(lw - m).sum())) / (a - 1))


class ModularAction:
    """The relative modular operator of (rho, sigma) through both spectra."""

    def __init__(self, rho, sigma):
        self.p, self.P = eigh_desc(rho)
        self.q, self.Q = eigh_desc(sigma)
        if self.q.min() <= 0:
            raise SupportError("sigma must be positive definite")
        self.p = np.clip(self.p, 0.0, None)

    def apply(self, f, X):
        """sum_ij f(p_i/q_j) P_i X Q_j using rank-one eigenprojectors."""
        Xt = self.P.conj().T @ np.asarray(X) @ self.Q
        ratio = self.p[:, None] / self.q[None, :]
        return self.P @ (f(ratio) * Xt) @ self.Q.conj().T

    def quasi_entropy(self, f):
        s = msqrt(self.Q @ np.diag(self.q) @ self.Q.conj().T)
        return float(np.trace(s.conj().T @ self.apply(f, s)).real)


def petz_quasi_entropy(rho, sigma, f):
    """sum_ij q_j f(p_i/q_j) |<p_i|q_j>|^2 with sigma positive definite."""
    p, q, O = _overlaps(rho, sigma)
    if q.min() <= RANK_TOL * q.max():
        raise SupportError("sigma must be positive definite")
    zero = p <= RANK_TOL * p.max()
    total = 0.0
    if zero.any():
        if not np.isfinite(f.f_at_0):
            raise SupportError("rho is rank deficient but f(0) is infinite")
        total += float(np.sum(O[zero] * q[None, :]) * f.f_at_0)
    nz = ~zero
    vals = f(p[nz, None] / q[None, :])
    total += float(np.sum(q[None, :] * vals * O[nz]))
    return total


def _q_partials(fam, theta):
    theta = np.atleast_1d(np.asarray(theta, dtype=float))
    h = fam.fd_step
    out = []
    for k in range(fam.m):
        e = np.zeros_like(theta)
        e[k] = 1.0
        d1 = (np.asarray(fam.state_at(theta + h * e)) - np.asarray(fam.state_at(theta - h * e))) / (2 * h)
        d2 = (np.asarray(fam.state_at(theta + 2 * h * e)) - np.asarray(fam.state_at(theta - 2 * h * e))) / (4 * h)
        out.append((4 * d1 - d2) / 3)
    return theta, out


def quantum_fisher(fam, theta, kind="SLD"):
    """SLD or RLD quantum Fisher information matrix.

    ``fam`` is a ParamFamily whose ``state_at`` returns density matrices.
    """
    theta, dr = _q_partials(fam, theta)
    rho = np.asarray(fam.state_at(theta))
    lam, V = eigh_desc(rho)
    if lam.min() <= RANK_TOL * lam.max():
        raise SupportError("quantum Fisher information needs a positive definite state")
    A = [V.conj().T @ d @ V for d in dr]
    kind = kind.upper()
    if kind == "SLD":
        weight = 2.0 / (lam[:, None] + lam[None, :])
        K = np.array([[np.sum(a.conj() * b * weight) for b in A] for a in A])
        K = K.real
        return (K + K.T) / 2
    if kind == "RLD":
        inv = np.diag(1.0 / lam)
        K = np.array([[np.trace(a @ b @ inv) for b in A] for a in A])
        K = (K + K.conj().T) / 2
        return K.real if np.abs(K.imag).max() < 1e-12 else K
    raise ValidationError(f"unknown Fisher kind {kind!r}")
