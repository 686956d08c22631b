"""Density matrices, Kraus channels and quantum Gibbs states."""

from dataclasses import dataclass
from functools import cached_property

import numpy as np

from .prob import DimensionError, ValidationError

HERM_TOL = 1e-10
EIG_TOL = 1e-10
TRACE_TOL = 1e-10
CHANNEL_TOL = 1e-8


class EnergyConservationError(ValidationError):
    code = "energy_not_conserved"


def eigh_desc(A):
    """Eigen-decomposition of a Hermitian matrix, eigenvalues non-increasing."""
    A = np.asarray(A)
    A = (A + A.conj().T) / 2
    if np.iscomplexobj(A) and not np.any(A.imag):
        A = A.real
    w, V = np.linalg.eigh(A)
    return w[::-1], V[:, ::-1]


def mfunc(A, fn):
    w, V = eigh_desc(A)
    return (V * fn(w)) @ V.conj().T


def mpow(A, a, rank_tol=None):
    """A**a on the support of a PSD matrix (pseudo-power for a < 0)."""
    w, V = eigh_desc(A)
    tol = rank_tol if rank_tol is not None else EIG_TOL * max(w[0], 0.0)
    keep = w > tol
    vals = np.zeros_like(w)
    vals[keep] = w[keep] ** a
    return (V * vals) @ V.conj().T


def msqrt(A):
    return mfunc(A, lambda w: np.sqrt(np.clip(w, 0.0, None)))


def dagger(A):
    return np.asarray(A).conj().T


def ket(v):
    v = np.asarray(v, dtype=complex).ravel()
    return v / np.linalg.norm(v)


def proj(v):
    v = ket(v)
    return np.outer(v, v.conj())


class DensityMatrix:
    """Hermitian PSD operator with (sub)unit trace and a cached spectrum."""

    def __init__(self, entries, subnormalized=False):
        A = np.array(entries, dtype=complex)
        if A.ndim != 2 or A.shape[0] != A.shape[1]:
            raise ValidationError("density matrix must be square")
        scale = max(1.0, float(np.abs(A).max()))
        if np.abs(A - A.conj().T).max() > HERM_TOL * scale:
            raise ValidationError("density matrix is not Hermitian")
        A = (A + A.conj().T) / 2
        w, V = eigh_desc(A)
        if w[-1] < -EIG_TOL:
            raise ValidationError(f"density matrix has eigenvalue {w[-1]:.3g} < 0")
        tr = float(np.trace(A).real)
        if subnormalized:
            if tr > 1 + TRACE_TOL:
                raise ValidationError("subnormalized state has trace above 1")
        elif abs(tr - 1) > TRACE_TOL:
            raise ValidationError(f"trace is {tr!r}, not 1")
        if w[-1] < 0:
            # clamp tiny negative eigenvalues and restore the trace
            w = np.clip(w, 0.0, None)
            w = w * (tr / w.sum())
            A = (V * w) @ V.conj().T
        self.mat = A
        self.mat.setflags(write=False)
        self._spec = (w, V)
        self.subnormalized = subnormalized

    def __array__(self, dtype=None, copy=None):
        return self.mat if dtype is None else self.mat.astype(dtype)

    @property
    def dim(self):
        return self.mat.shape[0]

    @property
    def spectrum(self):
        return self._spec

    @property
    def eigvals(self):
        return self._spec[0]

    def __repr__(self):
        return f"DensityMatrix(dim={self.dim}, eigvals={np.round(self.eigvals, 6)})"


def spectral_decompose(rho):
    if isinstance(rho, DensityMatrix):
        return rho.spectrum
    return eigh_desc(rho)


def diag_state(p):
    return np.diag(np.asarray(p, dtype=float)).astype(complex)


@dataclass(frozen=True)
class QGibbsSpec:
    hamiltonian: np.ndarray
    beta: float

    def __post_init__(self):
        H = np.array(self.hamiltonian, dtype=complex)
        if H.ndim != 2 or H.shape[0] != H.shape[1]:
            raise ValidationError("Hamiltonian must be square")
        if np.abs(H - H.conj().T).max() > HERM_TOL * max(1.0, np.abs(H).max()):
            raise ValidationError("Hamiltonian must be Hermitian")
        if not np.isfinite(self.beta) or self.beta < 0:
            raise ValidationError("beta must be non-negative")
        object.__setattr__(self, "hamiltonian", (H + H.conj().T) / 2)

    @property
    def dim(self):
        return self.hamiltonian.shape[0]

    @cached_property
    def _eig(self):
        w, V = np.linalg.eigh(self.hamiltonian)
        return w, V

    @property
    def log_Z(self):
        x = -self.beta * self._eig[0]
        m = x.max()
        return float(m + np.log(np.exp(x - m).sum()))

    @property
    def Z(self):
        return float(np.exp(self.log_Z))

    @property
    def free_energy(self):
        return None if self.beta == 0 else -self.log_Z / self.beta

    @property
    def state(self):
        w, V = self._eig
        x = -self.beta * w
        g = np.exp(x - x.max())
        g /= g.sum()
        return (V * g) @ V.conj().T

    def unnormalized(self):
        """exp(-beta H) itself."""
        w, V = self._eig
        return (V * np.exp(-self.beta * w)) @ V.conj().T


def gibbs_spec_diag(energies, beta):
    return QGibbsSpec(np.diag(np.asarray(energies, dtype=float)), beta)


class QuantumChannel:
    """CP map in Kraus form, rho -> sum_k M_k rho M_k^dagger."""

    def __init__(self, kraus):
        ks = [np.array(k, dtype=complex) for k in kraus]
        if not ks:
            raise ValidationError("a channel needs at least one Kraus operator")
        shape = ks[0].shape
        if any(k.shape != shape or k.ndim != 2 for k in ks):
            raise ValidationError("Kraus operators must share one 2-D shape")
        self.kraus = ks

    @property
    def dim_in(self):
        return self.kraus[0].shape[1]

    @property
    def dim_out(self):
        return self.kraus[0].shape[0]

    def __call__(self, rho):
        rho = np.asarray(rho)
        if rho.shape != (self.dim_in, self.dim_in):
            raise DimensionError(f"channel on dim {self.dim_in} got operator of shape {rho.shape}")
        return sum(k @ rho @ k.conj().T for k in self.kraus)

    def adjoint(self, X):
        return sum(k.conj().T @ X @ k for k in self.kraus)

    def compose(self, other):
        """self after other."""
        return QuantumChannel([a @ b for a in self.kraus for b in other.kraus])


def mix_channels(channels, weights):
    ks = []
    for ch, w in zip(channels, weights):
        if w > 0:
            ks.extend(np.sqrt(w) * k for k in ch.kraus)
    return QuantumChannel(ks)


def apply_channel(E, rho):
    return E(rho)


def is_cptp(E, tol=CHANNEL_TOL):
    return bool(np.abs(E.adjoint(np.eye(E.dim_out)) - np.eye(E.dim_in)).max() <= tol)


def is_trace_nonincreasing(E, tol=CHANNEL_TOL):
    G = E.adjoint(np.eye(E.dim_out)) - np.eye(E.dim_in)
    return bool(np.linalg.eigvalsh((G + G.conj().T) / 2).max() <= tol)


def is_unital(E, tol=CHANNEL_TOL):
    if E.dim_in != E.dim_out:
        return False
    return bool(np.abs(E(np.eye(E.dim_in)) - np.eye(E.dim_out)).max() <= tol)


def is_gibbs_preserving(E, spec, spec_out=None, tol=CHANNEL_TOL):
    spec_out = spec if spec_out is None else spec_out
    return bool(np.abs(E(spec.state) - spec_out.state).max() <= tol)


def is_gibbs_sub_preserving(E, spec_in, spec_out, tol=CHANNEL_TOL):
    D = spec_out.unnormalized() - E(spec_in.unnormalized())
    return bool(np.linalg.eigvalsh((D + D.conj().T) / 2).min() >= -tol)


def predicates(E, spec=None, spec_out=None):
    out = {
        "cptp": is_cptp(E),
        "trace_nonincreasing": is_trace_nonincreasing(E),
        "unital": is_unital(E),
    }
    if spec is not None:
        so = spec if spec_out is None else spec_out
        if so.dim == E.dim_out and spec.dim == E.dim_in:
            out["gibbs_preserving"] = is_gibbs_preserving(E, spec, so)
            out["gibbs_sub_preserving"] = is_gibbs_sub_preserving(E, spec, so)
    return out


def partial_trace(rho, dims, keep="A"):
    dA, dB = dims
    rho = np.asarray(rho)
    if dA * dB != rho.shape[0]:
        raise DimensionError(f"{dA} x {dB} does not factor dimension {rho.shape[0]}")
    r = rho.reshape(dA, dB, dA, dB)
    if keep == "A":
        return np.einsum("ijkj->ik", r)
    if keep == "B":
        return np.einsum("ijil->jl", r)
    raise ValidationError("keep must be 'A' or 'B'")


def trace_distance(rho, sigma):
    D = np.asarray(rho) - np.asarray(sigma)
    return 0.5 * float(np.abs(np.linalg.eigvalsh((D + D.conj().T) / 2)).sum())


def fidelity(rho, sigma):
    """tr sqrt(sqrt(rho) sigma sqrt(rho)), as the nuclear norm of sqrt(rho) sqrt(sigma)."""
    s = np.linalg.svd(msqrt(rho) @ msqrt(sigma), compute_uv=False)
    return float(min(1.0, s.sum()))


def distances(rho, sigma):
    F = fidelity(rho, sigma)
    return {"trace": trace_distance(rho, sigma), "fidelity": F, "purified": float(np.sqrt(max(0.0, 1 - F * F)))}


def unitary_channel(U):
    return QuantumChannel([U])


def dephasing_channel(basis):
    """Full dephasing in the orthonormal columns of ``basis``."""
    V = np.asarray(basis, dtype=complex)
    return QuantumChannel([np.outer(V[:, i], V[:, i].conj()) for i in range(V.shape[1])])


def classical_embedding_channel(T, basis=None):
    """Kraus ops sqrt(T_ij)|i><j| in ``basis``; T column-stochastic."""
    T = np.asarray(T, dtype=float)
    d_out, d_in = T.shape
    B_out = np.eye(d_out) if basis is None else np.asarray(basis)
    B_in = np.eye(d_in) if basis is None else np.asarray(basis)
    ks = []
    for i in range(d_out):
        for j in range(d_in):
            if T[i, j] > 0:
                ks.append(np.sqrt(T[i, j]) * np.outer(B_out[:, i], B_in[:, j].conj()))
    return QuantumChannel(ks)


def stinespring_channel(U, env_state, dims, keep="A"):
    """rho -> tr_env[U (rho (x) env) U^dagger] as a Kraus channel.

    ``dims = (d_sys, d_env)``; ``keep`` selects the output factor.
    """
    d, de = dims
    U = np.asarray(U, dtype=complex)
    w, V = eigh_desc(env_state)
    ks = []
    Ur = U.reshape(d, de, d, de)
    for b in range(de):
        if w[b] <= 0:
            continue
        env_ket = V[:, b]
        # U (I (x) |env_b>) : d*de x d
        A = np.einsum("ijkl,l->ijk", Ur, env_ket)
        for a in range(de if keep == "A" else d):
            if keep == "A":
                K = A[:, a, :]
            else:
                K = A[a, :, :]
            ks.append(np.sqrt(w[b]) * K)
    return QuantumChannel(ks)


def thermal_operation_channel(spec_S, bath, U, tol=1e-8):
    dS, dB = spec_S.dim, bath.dim
    U = np.asarray(U, dtype=complex)
    if U.shape != (dS * dB, dS * dB):
        raise DimensionError("unitary must act on system (x) bath")
    if np.abs(U @ U.conj().T - np.eye(dS * dB)).max() > tol:
        raise ValidationError("U is not unitary")
    H = np.kron(spec_S.hamiltonian, np.eye(dB)) + np.kron(np.eye(dS), bath.hamiltonian)
    if np.linalg.norm(U @ H - H @ U, 2) > tol:
        raise EnergyConservationError("U does not commute with the total Hamiltonian")
    return stinespring_channel(U, bath.state, (dS, dB), keep="A")


# random generators -------------------------------------------------------

def random_unitary(rng, d):
    Z = (rng.normal(size=(d, d)) + 1j * rng.normal(size=(d, d))) / np.sqrt(2)
    Q, R = np.linalg.qr(Z)
    ph = np.diag(R) / np.abs(np.diag(R))
    return Q * ph


def random_density(rng, d, rank=None):
    rank = d if rank is None else rank
    G = rng.normal(size=(d, rank)) + 1j * rng.normal(size=(d, rank))
    rho = G @ G.conj().T
    return rho / np.trace(rho).real


def random_pure(rng, d):
    v = rng.normal(size=d) + 1j * rng.normal(size=d)
    return proj(v)


def random_channel(rng, d_in, d_out=None, n_kraus=None):
    """Stinespring dilation with a Haar-random isometry."""
    d_out = d_in if d_out is None else d_out
    n_kraus = d_in * d_out if n_kraus is None else n_kraus
    U = random_unitary(rng, d_out * n_kraus)
    Vmat = U[:, :d_in]
    return QuantumChannel([Vmat[k * d_out:(k + 1) * d_out, :] for k in range(n_kraus)])


def random_unital_channel(rng, d, terms=3):
    w = rng.dirichlet(np.ones(terms))
    return mix_channels([unitary_channel(random_unitary(rng, d)) for _ in range(terms)], w)


def random_energy_conserving_unitary(rng, H, tol=1e-9):
    w, V = np.linalg.eigh(np.asarray(H))
    U = np.zeros_like(V, dtype=complex)
    i = 0
    n = w.size
    while i < n:
        j = i + 1
        while j < n and abs(w[j] - w[i]) <= tol:
            j += 1
        U[i:j, i:j] = random_unitary(rng, j - i)
        i = j
    return V @ U @ V.conj().T


def random_gibbs_preserving_channel(rng, spec):
    """Mixture of a resonant thermal operation and a classical Gibbs-preserving
    map embedded in the energy eigenbasis."""
    from .prob import random_stochastic_fixed_point

    bath = spec
    H = np.kron(spec.hamiltonian, np.eye(spec.dim)) + np.kron(np.eye(spec.dim), bath.hamiltonian)
    U = random_energy_conserving_unitary(rng, H)
    to = thermal_operation_channel(spec, bath, U)
    w, V = spec._eig
    g = np.exp(-spec.beta * (w - w.min()))
    T = random_stochastic_fixed_point(g / g.sum(), int(rng.integers(2**31)))
    cl = classical_embedding_channel(T, V)
    lam = rng.random()
    return mix_channels([to, cl, to.compose(cl)], [lam * 0.5, (1 - lam) * 0.5, 0.5])
