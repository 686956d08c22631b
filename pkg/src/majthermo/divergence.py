"""Classical entropies, Renyi and f-divergences, Fisher information."""

from dataclasses import dataclass
from typing import Callable

import numpy as np

from .prob import DimensionError, SupportError, ValidationError

INF = float("inf")


def _pair(p, q):
    p = np.asarray(p, dtype=float)
    q = np.asarray(q, dtype=float)
    if p.shape != q.shape:
        raise DimensionError(f"dims {p.shape} and {q.shape} differ")
    return p, q


def _xlogy(x, y):
    # x ln y with the convention 0 ln 0 = 0
    out = np.zeros_like(x)
    m = x > 0
    out[m] = x[m] * np.log(y[m])
    return out


def shannon_entropy(p):
    p = np.asarray(p, dtype=float)
    return float(-_xlogy(p, p).sum())


def kl_divergence(p, q):
    p, q = _pair(p, q)
    if np.any((p > 0) & (q <= 0)):
        return INF
    m = p > 0
    return float(max(0.0, np.sum(p[m] * (np.log(p[m]) - np.log(q[m])))))


def renyi_divergence(p, q, alpha):
    """Renyi divergence for any extended-real ``alpha``.

    Negative orders use the sign-flipped normalisation, so the value is
    ``alpha/(alpha-1) * S_{1-alpha}(q||p)``.
    """
    p, q = _pair(p, q)
    a = float(alpha)
    leak = np.any((p > 0) & (q <= 0))
    if a == 1.0:
        return kl_divergence(p, q)
    if a == 0.0:
        s = q[p > 0].sum()
        return INF if s <= 0 else float(max(0.0, -np.log(s)))
    if a == INF:
        if leak:
            return INF
        m = p > 0
        return float(max(0.0, np.log(np.max(p[m] / q[m]))))
    if a == -INF:
        if np.any((q > 0) & (p <= 0)):
            return INF
        m = q > 0
        return float(np.log(np.max(q[m] / p[m])))
    if a > 1 and leak:
        return INF
    if a < 0 and np.any((q > 0) & (p <= 0)):
        return INF
    m = (p > 0) & (q > 0)
    lp, lq = np.log(p[m]), np.log(q[m])
    x = a * lp + (1 - a) * lq
    mx = x.max() if x.size else 0.0
    s = np.exp(x - mx).sum()
    if s <= 0:
        return INF
    val = (mx + np.log(s)) / (a - 1)
    if a < 0:
        return float(-val)
    return float(max(0.0, val))


def renyi_entropy(p, alpha):
    p = np.asarray(p, dtype=float)
    d = p.size
    a = float(alpha)
    u = np.full(d, 1.0 / d)
    sgn = -1.0 if a < 0 else 1.0
    return float(sgn * np.log(d) - renyi_divergence(p, u, a))


@dataclass(frozen=True)
class ConvexFnSpec:
    evaluator: Callable
    f_at_0: float
    f_prime_at_inf: float
    label: str = ""

    def __call__(self, x):
        return self.evaluator(x)


def _xlnx(x):
    x = np.asarray(x, dtype=float)
    return np.where(x > 0, x * np.log(np.where(x > 0, x, 1.0)), 0.0)


KLF = ConvexFnSpec(_xlnx, 0.0, INF, "klf")
TV = ConvexFnSpec(lambda x: 0.5 * np.abs(np.asarray(x) - 1.0), 0.5, 0.5, "tv")
HELLINGER = ConvexFnSpec(lambda x: 1.0 - np.sqrt(x), 1.0, 0.0, "hellinger")
CHI2 = ConvexFnSpec(lambda x: (np.asarray(x) - 1.0) ** 2, 1.0, INF, "chi2")
SQUARE = ConvexFnSpec(lambda x: np.asarray(x) ** 2, 0.0, INF, "x2")


def power_fn(alpha):
    """x**alpha, negated on (0, 1) so that it is convex for every real alpha."""
    a = float(alpha)
    if 0 < a < 1:
        return ConvexFnSpec(lambda x: -np.asarray(x, dtype=float) ** a, 0.0, 0.0, f"alpha:{a:g}")
    f0 = 0.0 if a > 0 else (1.0 if a == 0 else INF)
    finf = INF if a > 1 else (1.0 if a == 1 else 0.0)
    return ConvexFnSpec(lambda x: np.asarray(x, dtype=float) ** a, f0, finf, f"alpha:{a:g}")


NAMED_FUNCTIONS = {"klf": KLF, "tv": TV, "hellinger": HELLINGER, "chi2": CHI2}


def named_function(name):
    if name in NAMED_FUNCTIONS:
        return NAMED_FUNCTIONS[name]
    if name.startswith("alpha:"):
        return power_fn(float(name.split(":", 1)[1]))
    raise ValidationError(f"unknown function {name!r}")


def f_divergence(p, q, f):
    """sum_i q_i f(p_i/q_i); indices with q_i = 0 use p_i * f'(inf)."""
    p, q = _pair(p, q)
    with np.errstate(over="ignore", divide="ignore", invalid="ignore"):
        r = np.where(q > 0, p / np.where(q > 0, q, 1.0), np.inf)
        m = np.isfinite(r)
        total = float(np.sum(q[m] * f(r[m])))
    # an overflowing ratio is the q -> 0 limit
    extra = p[~m].sum()
    if extra > 0:
        total += extra * f.f_prime_at_inf
    return total


@dataclass
class ParamFamily:
    state_at: Callable
    m: int = 1
    fd_step: float = 1e-5


def _partials(fam, theta):
    theta = np.atleast_1d(np.asarray(theta, dtype=float))
    h = fam.fd_step
    grads = []
    for k in range(fam.m):
        e = np.zeros_like(theta)
        e[k] = 1.0
        # central difference with one Richardson level
        d1 = (np.asarray(fam.state_at(theta + h * e)) - np.asarray(fam.state_at(theta - h * e))) / (2 * h)
        d2 = (np.asarray(fam.state_at(theta + 2 * h * e)) - np.asarray(fam.state_at(theta - 2 * h * e))) / (4 * h)
        grads.append((4 * d1 - d2) / 3)
    return theta, grads


def fisher_matrix(fam, theta):
    theta, grads = _partials(fam, theta)
    p = np.asarray(fam.state_at(theta), dtype=float)
    if np.any(p <= 0):
        raise SupportError("Fisher information needs full support")
    G = np.array([[np.sum(a * b / p) for b in grads] for a in grads])
    return (G + G.T) / 2


def fisher_metric(p, a, b):
    p = np.asarray(p, dtype=float)
    if np.any(p <= 0):
        raise SupportError("Fisher metric needs full support")
    a = np.asarray(a, dtype=float)
    b = np.asarray(b, dtype=float)
    if a.shape != p.shape or b.shape != p.shape:
        raise DimensionError("tangent vectors must match the state dimension")
    return float(np.sum(a * b / p))
