"""Hypothesis-testing divergence, smooth min/max divergences and finite-n
Stein sweeps.

``sh_*`` return ``-ln(beta/eta)`` where ``beta`` is the smallest type-II
error of a test accepting ``p`` with probability at least ``eta``.
"""

import math
import warnings
from collections import namedtuple
from dataclasses import dataclass
from itertools import product

import numpy as np
from scipy.optimize import brentq
from scipy.special import gammaln, logsumexp

from .divergence import kl_divergence
from .prob import DimensionError, SupportError, ValidationError, tensor
from .qdivergence import quantum_kl
from .quantum import eigh_desc, mpow

INF = float("inf")
MAX_TYPES = 3_000_000
EXACT_R0_DIM = 20


class HeuristicWarning(UserWarning):
    pass


def _check_eta(eta):
    if not 0 < eta < 1:
        raise ValidationError("eta must lie in (0, 1)")


def _greedy_tail(logp, logq, eta):
    """Fractional knapsack in log space; returns ln(min type-II error)."""
    order = np.lexsort((logq, -(logp - logq)))
    P = np.exp(logp[order])
    cum = np.cumsum(P)
    k = int(np.searchsorted(cum, eta, side="left"))
    k = min(k, P.size - 1)
    before = cum[k - 1] if k > 0 else 0.0
    frac = (eta - before) / P[k]
    terms = list(logq[order][:k])
    if frac > 0:
        terms.append(math.log(min(frac, 1.0)) + logq[order][k])
    if not terms:
        return -INF
    return float(logsumexp(terms))


def _sh_from_logs(logp, logq, eta):
    keep = np.isfinite(logp)
    logp, logq = logp[keep], logq[keep]
    if np.any(~np.isfinite(logq)):
        # symbols impossible under q are accepted for free
        free = ~np.isfinite(logq)
        got = float(np.exp(logp[free]).sum())
        if got >= eta:
            return INF
    lv = _greedy_tail(logp, logq, eta)
    return INF if lv == -INF else float(math.log(eta) - lv)


def _logs(x):
    x = np.asarray(x, dtype=float)
    with np.errstate(divide="ignore"):
        return np.log(x)


def sh_classical(p, q, eta):
    _check_eta(eta)
    p, q = np.asarray(p, float), np.asarray(q, float)
    if p.shape != q.shape:
        raise DimensionError("p and q differ in length")
    return _sh_from_logs(_logs(p), _logs(q), eta)


def _compositions(n, k):
    if k == 1:
        yield (n,)
        return
    for i in range(n + 1):
        for rest in _compositions(n - i, k - 1):
            yield (i,) + rest


def sh_classical_iid(p, q, eta, n):
    """S_H for n i.i.d. copies, aggregated over type classes."""
    _check_eta(eta)
    p, q = np.asarray(p, float), np.asarray(q, float)
    if p.size > 8:
        raise ValidationError("alphabet too large for type aggregation (max 8)")
    if n < 1:
        raise ValidationError("n must be >= 1")
    keep = p > 0
    if np.any(q[keep] <= 0):
        return INF
    lp, lq = np.log(p[keep]), np.log(q[keep])
    k = lp.size
    if math.comb(n + k - 1, k - 1) > MAX_TYPES:
        raise ValidationError("too many type classes for this n and alphabet")
    types = np.array(list(_compositions(n, k)), dtype=float)
    lmult = gammaln(n + 1) - gammaln(types + 1).sum(axis=1)
    return _sh_from_logs(lmult + types @ lp, lmult + types @ lq, eta)


@dataclass(frozen=True)
class DualCertificate:
    mu: float
    X: np.ndarray
    primal: float
    dual: float

    @property
    def gap(self):
        return abs(self.primal - self.dual)


def _pos_part(A):
    w, V = eigh_desc(A)
    w = np.clip(w, 0, None)
    return (V * w) @ V.conj().T


def _weight(rho, Vm):
    """tr[rho Vm Vm^dagger] without forming the projector."""
    return float(np.sum(Vm.conj() * (rho @ Vm)).real)


def _as_matrix(A):
    A = np.asarray(A)
    if np.iscomplexobj(A) and not np.any(A.imag):
        return A.real.astype(float)
    return A.astype(complex) if np.iscomplexobj(A) else A.astype(float)


def sh_quantum(rho, sigma, eta, cluster_tol=1e-10):
    """Returns (S_H, certificate); sigma must be positive definite."""
    _check_eta(eta)
    rho, sigma = _as_matrix(rho), _as_matrix(sigma)
    qs = eigh_desc(sigma)[0]
    if qs[-1] <= 1e-12 * max(qs[0], 0.0) or qs[-1] <= 0:
        raise SupportError("sigma must be positive definite")
    S = mpow(sigma, -0.5)
    b = eigh_desc(S @ rho @ S)[0]
    # cluster the pencil eigenvalues into breakpoints with multiplicities
    bps, mult = [], []
    for x in b:
        if bps and abs(bps[-1] - x) <= cluster_tol * max(1.0, abs(x)):
            mult[-1] += 1
        else:
            bps.append(float(x))
            mult.append(1)
    above = 0
    t_sol = s_sol = None
    n_pos = n_null = 0
    for k, (t, m) in enumerate(zip(bps, mult)):
        A = rho - t * sigma
        w, V = eigh_desc(A)
        lo = _weight(rho, V[:, :above])
        r0 = _weight(rho, V[:, above:above + m])
        if lo <= eta <= lo + r0 and r0 > 0:
            t_sol, s_sol, n_pos, n_null = t, (eta - lo) / r0, above, m
            break
        above += m
        if k + 1 < len(bps):
            t_next = bps[k + 1]

            def g(x, m_=above):
                return _weight(rho, eigh_desc(rho - x * sigma)[1][:, :m_]) - eta

            if g(t_next) > 0 > g(t):
                t_sol = brentq(g, t_next, t, xtol=1e-15, rtol=4 * np.finfo(float).eps, maxiter=500)
                s_sol, n_pos, n_null = 0.0, above, 0
                break
    if t_sol is None or t_sol <= 0:
        raise AssertionError("threshold sweep failed to bracket eta")
    w, V = eigh_desc(rho - t_sol * sigma)
    beta = _weight(sigma, V[:, :n_pos])
    if n_null:
        beta += s_sol * _weight(sigma, V[:, n_pos:n_pos + n_null])
    mu = 1.0 / t_sol
    X = _pos_part(mu * rho - sigma)
    dual = mu - float(np.trace(X).real) / eta
    cert = DualCertificate(mu, X, beta / eta, dual)
    return float(-np.log(beta / eta)), cert


def smooth_r0_classical(p, q, eps, return_exact=False):
    """max S_0(tau||q) over the trace-distance eps-ball around p.

    Exact branch and bound up to dimension 20; a greedy-by-ratio fill beyond
    that, which raises HeuristicWarning.
    """
    if not 0 <= eps < 1:
        raise ValidationError("eps must lie in [0, 1)")
    p, q = np.asarray(p, float), np.asarray(q, float)
    supp = np.flatnonzero(p > 0)
    pw, qv = p[supp], q[supp]
    budget = eps + 1e-12
    # choose indices to drop: maximize dropped q under dropped p <= eps
    with np.errstate(divide="ignore"):
        ratio = qv / pw
    order = np.argsort(-ratio, kind="stable")
    pw, qv = pw[order], qv[order]
    exact = supp.size <= EXACT_R0_DIM
    if exact:
        best = [0.0, ()]

        def bound(i, cap):
            val = 0.0
            for j in range(i, pw.size):
                if pw[j] <= cap:
                    cap -= pw[j]
                    val += qv[j]
                else:
                    return val + qv[j] * cap / pw[j]
            return val

        def dfs(i, cap, val, chosen):
            if val > best[0]:
                best[0], best[1] = val, chosen
            if i == pw.size or val + bound(i, cap) <= best[0] + 1e-15:
                return
            if pw[i] <= cap:
                dfs(i + 1, cap - pw[i], val + qv[i], chosen + (i,))
            dfs(i + 1, cap, val, chosen)

        dfs(0, budget, 0.0, ())
        drop = set(best[1])
    else:
        warnings.warn("dimension above 20: greedy smoothing, not guaranteed optimal", HeuristicWarning)
        cap, drop = budget, set()
        for j in range(pw.size):
            if pw[j] <= cap:
                cap -= pw[j]
                drop.add(j)
    # summing what is kept avoids cancellation when little q-mass remains
    kept = math.fsum(qv[j] for j in range(pw.size) if j not in drop)
    val = INF if kept <= 0 else 0.0 - math.log(kept)
    return (val, exact) if return_exact else val


def smooth_rinf_classical(p, q, eps):
    """min S_inf(tau||q) over the trace-distance eps-ball around p."""
    if not 0 <= eps < 1:
        raise ValidationError("eps must lie in [0, 1)")
    p, q = np.asarray(p, float), np.asarray(q, float)
    stuck = float(p[q <= 0].sum())
    if stuck > eps + 1e-15:
        return INF
    m = q > 0
    r = p[m] / q[m]
    order = np.argsort(-r, kind="stable")
    r, pp, qq = r[order], p[m][order], q[m][order]
    A = stuck
    B = 0.0
    lam = 0.0
    for k in range(r.size):
        A += pp[k]
        B += qq[k]
        nxt = r[k + 1] if k + 1 < r.size else 0.0
        if A - nxt * B > eps:
            lam = (A - eps) / B
            break
    # a normalized tau under lam*q needs lam >= 1
    return float(np.log(max(1.0, lam)))


SmoothBounds = namedtuple("SmoothBounds", "r0_lo r0_hi rinf_lo rinf_hi")


def smooth_quantum_bounds(rho, sigma, eps):
    """Two-sided brackets for the quantum smooth 0- and inf-divergences, 0 < eps < 1/2."""
    if not 0 < eps < 0.5:
        raise ValidationError("brackets hold for 0 < eps < 1/2")
    e6 = eps * eps / 6

    def sh(eta):
        return sh_quantum(rho, sigma, eta)[0]

    r0_lo = sh(1 - e6) - math.log((1 - e6) / e6)
    r0_hi = sh(1 - eps) - math.log(1 - eps)
    ri_lo = sh(2 * eps) - math.log(2)
    ri_hi = sh(eps * eps / 2) - math.log(1 - eps)
    return SmoothBounds(r0_lo, r0_hi, ri_lo, ri_hi)


@dataclass
class SteinSweep:
    eta: float
    n_values: list
    rates: list
    target: float
    converged: bool
    tolerance: float = 0.0

    @property
    def gaps(self):
        return [abs(r - self.target) for r in self.rates]

    def rows(self):
        return [(n, r, self.target) for n, r in zip(self.n_values, self.rates)]


def _n_grid(n_max, n_values):
    if n_values is not None:
        return sorted(set(int(n) for n in n_values))
    if n_max <= 20:
        return list(range(1, n_max + 1))
    grid = set(range(1, 11)) | set(np.unique(np.geomspace(10, n_max, 25).astype(int)).tolist())
    grid.add(n_max)
    return sorted(grid)


def stein_sweep_classical(p, q, eta, n_max, tol=0.02, n_values=None):
    target = kl_divergence(p, q)
    ns = _n_grid(n_max, n_values)
    rates = [sh_classical_iid(p, q, eta, n) / n for n in ns]
    return SteinSweep(eta, ns, rates, target, bool(abs(rates[-1] - target) <= tol), tol)


def _tensor_power(A, n):
    out = np.array([[1.0]], dtype=complex)
    for _ in range(n):
        out = np.kron(out, A)
    return out


def stein_sweep_quantum(rho, sigma, eta, n_max, tol=0.1):
    if n_max > 10:
        raise ValidationError("quantum sweep is limited to n <= 10")
    rho, sigma = np.asarray(rho, complex), np.asarray(sigma, complex)
    if rho.shape[0] ** n_max > 1024:
        raise DimensionError("tensor power too large")
    q = eigh_desc(sigma)[0]
    if q[-1] <= 0 or n_max * np.log(q[0] / q[-1]) > np.log(1e12):
        raise SupportError(f"sigma^(x{n_max}) is numerically singular (condition number above 1e12)")
    target = quantum_kl(rho, sigma)
    ns = list(range(1, n_max + 1))
    rates = [sh_quantum(_tensor_power(rho, n), _tensor_power(sigma, n), eta)[0] / n for n in ns]
    return SteinSweep(eta, ns, rates, target, bool(abs(rates[-1] - target) <= tol), tol)


def stationary_distribution(P):
    """Column-stochastic P (P[j, i] = prob i -> j)."""
    P = np.asarray(P, float)
    w, V = np.linalg.eig(P)
    k = int(np.argmin(np.abs(w - 1)))
    pi = np.real(V[:, k])
    pi = pi / pi.sum()
    return np.clip(pi, 0, None) / np.clip(pi, 0, None).sum()


def _irreducible(P):
    d = P.shape[0]
    R = (np.asarray(P) > 0).astype(int) + np.eye(d, dtype=int)
    M = np.linalg.matrix_power(R, d)
    return bool(np.all(M > 0))


def markov_rate(P, pi, q):
    P, pi, q = np.asarray(P, float), np.asarray(pi, float), np.asarray(q, float)
    total = 0.0
    for i in range(P.shape[1]):
        for j in range(P.shape[0]):
            if P[j, i] > 0:
                total += pi[i] * P[j, i] * math.log(P[j, i] / q[j])
    return total


def markov_path_logs(P, p0, q, n):
    """log-probabilities of every length-n path under the chain and under q^n.

    Paths are aggregated by their (chain, iid) log-likelihood pair, which is
    exact because the test only sees the likelihood ratio.
    """
    P, p0, q = np.asarray(P, float), np.asarray(p0, float), np.asarray(q, float)
    d = p0.size
    with np.errstate(divide="ignore"):
        lP, lp0, lq = np.log(P), np.log(p0), np.log(q)
    # trellis: state -> dict of (rounded chain log, rounded q log) -> (logw, chain log, q log)
    layer = []
    for s in range(d):
        if np.isfinite(lp0[s]):
            layer.append({(round(lp0[s], 12), round(lq[s], 12)): (lp0[s], lq[s], 0.0)})
        else:
            layer.append({})
    for _ in range(n - 1):
        nxt = [dict() for _ in range(d)]
        for s in range(d):
            for (a, b), (la, lb, lmul) in layer[s].items():
                for t in range(d):
                    if not np.isfinite(lP[t, s]):
                        continue
                    na, nb = la + lP[t, s], lb + lq[t]
                    key = (round(na, 10), round(nb, 10))
                    prev = nxt[t].get(key)
                    if prev is None:
                        nxt[t][key] = (na, nb, lmul)
                    else:
                        # same likelihood pair: add the path counts
                        nxt[t][key] = (prev[0], prev[1], float(np.logaddexp(prev[2], lmul)))
        layer = nxt
    la, lb = [], []
    for s in range(d):
        for (_, _), (a, b, lm) in layer[s].items():
            la.append(a + lm)
            lb.append(b + lm)
    return np.array(la), np.array(lb)


def markov_source_sweep(P, pi, q_iid, eta, n_max, p0=None, tol=0.05):
    """Stein sweep for a Markov source against an i.i.d. reference."""
    P = np.asarray(P, float)
    if not _irreducible(P):
        raise ValidationError("chain must be irreducible")
    if n_max > 14:
        raise ValidationError("trellis sweep is limited to n <= 14")
    pi = np.asarray(pi, float)
    start = pi if p0 is None else np.asarray(p0, float)
    target = markov_rate(P, pi, q_iid)
    ns = list(range(1, n_max + 1))
    rates = []
    for n in ns:
        la, lb = markov_path_logs(P, start, q_iid, n)
        rates.append(_sh_from_logs(la, lb, eta) / n)
    return SteinSweep(eta, ns, rates, target, bool(abs(rates[-1] - target) <= tol), tol)


def markov_path_distribution(P, p0, n):
    """Dense path distribution (oracle use, small n)."""
    P, p0 = np.asarray(P, float), np.asarray(p0, float)
    d = p0.size
    out = []
    for path in product(range(d), repeat=n):
        w = p0[path[0]]
        for a, b in zip(path, path[1:]):
            w *= P[b, a]
        out.append(w)
    return np.array(out)


def iid_power(q, n):
    out = np.array([1.0])
    for _ in range(n):
        out = tensor(out, q)
    return out
