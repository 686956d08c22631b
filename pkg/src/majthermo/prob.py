"""Classical probability vectors, column-stochastic maps and Gibbs states.

Probability vectors are plain read-only float64 numpy arrays that passed
through :func:`prob_vec`.  Stochastic matrices follow the column convention
``sum_i T[i, j] == 1`` so that a map acts as ``T @ p``.
"""

from dataclasses import dataclass

import numpy as np

TOL_NORM = 1e-12
TOL_NEG = 1e-12
TOL_STOCH = 1e-10


class ValidationError(ValueError):
    """Input does not describe a valid object (bad shape, sign or norm)."""

    code = "invalid_input"


class DimensionError(ValidationError):
    code = "dimension_mismatch"


class SupportError(ValidationError):
    code = "support_violation"


def _freeze(a):
    a = np.array(a, dtype=float)
    a.setflags(write=False)
    return a


def prob_vec(x, normalize=False, tol=TOL_NORM):
    """Validate ``x`` as a probability vector and return a frozen copy.

    Tiny negative entries (above ``-TOL_NEG``) are clamped to zero.  With
    ``normalize=False`` the sum must already be within ``tol`` of one.
    """
    a = np.array(x, dtype=float).ravel()
    if a.size == 0:
        raise ValidationError("probability vector must have dim >= 1")
    if not np.all(np.isfinite(a)):
        raise ValidationError("probability vector has non-finite entries")
    if np.any(a < -TOL_NEG):
        raise ValidationError(f"negative entry {a.min():.3g}")
    a = np.clip(a, 0.0, None)
    s = a.sum()
    if normalize:
        if s <= 0:
            raise ValidationError("cannot normalize a zero vector")
        a = a / s
    elif abs(s - 1.0) > tol:
        raise ValidationError(f"entries sum to {float(s)!r}, not 1")
    return _freeze(a)


def uniform(d):
    return _freeze(np.full(d, 1.0 / d))


def stochastic_matrix(T, tol=TOL_STOCH):
    """Validate a column-stochastic matrix (columns sum to one)."""
    a = np.array(T, dtype=float)
    if a.ndim != 2:
        raise ValidationError("stochastic matrix must be 2-D")
    if np.any(a < -tol):
        raise ValidationError("stochastic matrix has negative entries")
    a = np.clip(a, 0.0, None)
    cols = a.sum(axis=0)
    if np.any(np.abs(cols - 1.0) > tol):
        raise ValidationError("columns of a stochastic matrix must sum to 1")
    return _freeze(a)


def is_stochastic(T, tol=TOL_STOCH):
    T = np.asarray(T, dtype=float)
    return bool(T.ndim == 2 and np.all(T >= -tol) and np.allclose(T.sum(axis=0), 1.0, rtol=0, atol=tol))


def is_doubly_stochastic(T, tol=TOL_STOCH):
    T = np.asarray(T, dtype=float)
    if T.ndim != 2 or T.shape[0] != T.shape[1]:
        return False
    return is_stochastic(T, tol) and bool(np.allclose(T.sum(axis=1), 1.0, rtol=0, atol=tol))


def is_fixed_point(T, q, tol=TOL_STOCH):
    T = np.asarray(T, dtype=float)
    q = np.asarray(q, dtype=float)
    return bool(np.max(np.abs(T @ q - q)) <= tol)


def rearrange_decreasing(p):
    """Sort ``p`` non-increasingly with a stable tie-break.

    Returns ``(sorted, perm)`` where ``perm[k]`` is the input index placed at
    output position ``k``.
    """
    p = np.asarray(p, dtype=float)
    perm = np.argsort(-p, kind="stable")
    return _freeze(p[perm]), perm


def trace_distance(p, q):
    p = np.asarray(p, dtype=float)
    q = np.asarray(q, dtype=float)
    if p.shape != q.shape:
        raise DimensionError(f"dims {p.shape} and {q.shape} differ")
    return 0.5 * float(np.abs(p - q).sum())


def apply_stochastic(T, p):
    T = np.asarray(T, dtype=float)
    p = np.asarray(p, dtype=float)
    if T.ndim != 2 or T.shape[1] != p.shape[0]:
        raise DimensionError(f"matrix {T.shape} cannot act on vector of dim {p.shape[0]}")
    out = np.clip(T @ p, 0.0, None)
    return _freeze(out / out.sum())


def tensor(p, r):
    return _freeze(np.kron(np.asarray(p, dtype=float), np.asarray(r, dtype=float)))


@dataclass(frozen=True)
class GibbsSpec:
    energies: tuple
    beta: float

    def __post_init__(self):
        e = tuple(float(x) for x in np.ravel(self.energies))
        if not e or not all(np.isfinite(e)):
            raise ValidationError("energies must be a non-empty sequence of finite reals")
        if not np.isfinite(self.beta) or self.beta < 0:
            raise ValidationError("beta must be a non-negative real")
        object.__setattr__(self, "energies", e)
        object.__setattr__(self, "beta", float(self.beta))

    @property
    def dim(self):
        return len(self.energies)

    @property
    def E(self):
        return np.array(self.energies)

    @property
    def log_Z(self):
        x = -self.beta * self.E
        m = x.max()
        return float(m + np.log(np.exp(x - m).sum()))

    @property
    def Z(self):
        return float(np.exp(self.log_Z))

    @property
    def free_energy(self):
        """-ln(Z)/beta, or None at infinite temperature."""
        if self.beta == 0:
            return None
        return -self.log_Z / self.beta

    @property
    def state(self):
        x = -self.beta * self.E
        w = np.exp(x - x.max())
        return _freeze(w / w.sum())


def gibbs_state(spec):
    """Return ``(p_G, Z, F)``; ``F`` is None when ``beta == 0``."""
    return spec.state, spec.Z, spec.free_energy


def random_prob(rng, d, concentration=1.0):
    return _freeze(rng.dirichlet(np.full(d, concentration)))


def random_stochastic(rng, d_out, d_in=None):
    d_in = d_out if d_in is None else d_in
    T = rng.random((d_out, d_in)) ** 2
    return _freeze(T / T.sum(axis=0))


def random_stochastic_fixed_point(q, seed):
    """Random column-stochastic ``T`` with ``T q = q``.

    Metropolis rates ``T[i, j] = a_ij * min(1, q_i / q_j) / d`` with a random
    symmetric ``a`` obey detailed balance; the diagonal absorbs the rest.
    """
    q = np.asarray(q, dtype=float)
    if np.any(q <= 0):
        raise SupportError("fixed point must have full support")
    d = q.size
    rng = np.random.default_rng(seed)
    a = rng.random((d, d))
    a = (a + a.T) / 2
    ratio = q[:, None] / q[None, :]
    T = a * np.minimum(1.0, ratio) / d
    np.fill_diagonal(T, 0.0)
    T[np.diag_indices(d)] = 1.0 - T.sum(axis=0)
    return _freeze(T)


def random_doubly_stochastic(rng, d, terms=None):
    """Convex mixture of random permutation matrices."""
    terms = d * d if terms is None else terms
    w = rng.dirichlet(np.ones(terms))
    T = np.zeros((d, d))
    for wk in w:
        T[rng.permutation(d), np.arange(d)] += wk
    return _freeze(T)
