"""Lorenz curves, (relative) majorization tests and stochastic witnesses.

Decision procedures compare partial sums or curve heights with an additive
tolerance of ``TOL`` so that touching curves count as majorized.
"""

import bisect
from dataclasses import dataclass
from fractions import Fraction
from math import lcm

import numpy as np
from scipy.optimize import linprog
from scipy.sparse.csgraph import maximum_bipartite_matching
from scipy.sparse import csr_matrix

from .prob import DimensionError, SupportError, ValidationError, is_doubly_stochastic

TOL = 1e-10
M_MAX = 10_000


class NotMajorized(Exception):
    """Raised when a witness is requested for a pair that is not majorized."""

    def __init__(self, message, k=None):
        super().__init__(message)
        self.k = k


@dataclass(frozen=True)
class LorenzCurve:
    points: np.ndarray
    kind: str = "ordinary"

    @property
    def x(self):
        return self.points[:, 0]

    @property
    def y(self):
        return self.points[:, 1]

    def __call__(self, xs):
        return np.interp(xs, self.x, self.y)


@dataclass(frozen=True)
class WitnessReport:
    matrix: np.ndarray
    residual_p: float
    residual_q: float = None
    method: str = "ttransform"


def _pad(a, b):
    a = np.asarray(a, dtype=float).ravel()
    b = np.asarray(b, dtype=float).ravel()
    d = max(a.size, b.size)
    return np.pad(a, (0, d - a.size)), np.pad(b, (0, d - b.size))


def _dedupe(xs, ys):
    # collapse repeated x values, keeping the largest height
    pts = np.column_stack([xs, ys])
    out = [pts[0]]
    for x, y in pts[1:]:
        if x <= out[-1][0]:
            out[-1] = np.array([out[-1][0], max(out[-1][1], y)])
        else:
            out.append(np.array([x, y]))
    return np.array(out)


def lorenz(p):
    p = np.asarray(p, dtype=float)
    d = p.size
    xs = np.arange(d + 1) / d
    ys = np.concatenate([[0.0], np.cumsum(np.sort(p)[::-1])])
    ys[-1] = 1.0
    return LorenzCurve(np.column_stack([xs, ys]), "ordinary")


def ratio_order(p, q):
    """Indices sorted by p_i/q_i, largest first, ties by original index."""
    p = np.asarray(p, dtype=float)
    q = np.asarray(q, dtype=float)
    if p.shape != q.shape:
        raise DimensionError(f"dims {p.shape} and {q.shape} differ")
    if np.any((q <= 0) & (p > 0)):
        raise SupportError("supp(p) must lie inside supp(q)")
    r = np.where(q > 0, p / np.where(q > 0, q, 1.0), -1.0)
    return np.argsort(-r, kind="stable")


def lorenz_relative(p, q):
    order = ratio_order(p, q)
    p = np.asarray(p, dtype=float)[order]
    q = np.asarray(q, dtype=float)[order]
    xs = np.concatenate([[0.0], np.cumsum(q)])
    ys = np.concatenate([[0.0], np.cumsum(p)])
    xs[-1] = ys[-1] = 1.0
    return LorenzCurve(_dedupe(xs, ys), "relative")


def violated_k(p_hi, p_lo, tol=TOL):
    """First k (1-based) where the partial sums of p_lo exceed those of p_hi."""
    a, b = _pad(p_hi, p_lo)
    sa = np.cumsum(np.sort(a)[::-1])
    sb = np.cumsum(np.sort(b)[::-1])
    bad = np.nonzero(sb > sa + tol)[0]
    return int(bad[0]) + 1 if bad.size else None


def majorizes(p_hi, p_lo, tol=TOL):
    return violated_k(p_hi, p_lo, tol) is None


def d_majorizes(pair_hi, pair_lo, tol=TOL):
    """True iff the relative Lorenz curve of pair_hi lies above that of pair_lo."""
    hi = lorenz_relative(*pair_hi)
    lo = lorenz_relative(*pair_lo)
    xs = np.union1d(hi.x, lo.x)
    return bool(np.all(hi(xs) >= lo(xs) - tol))


def t_sweep_dmajorizes(pair_hi, pair_lo, tol=TOL):
    """Check sum|p' - t q'| <= sum|p - t q| at every ratio breakpoint t."""
    p, q = (np.asarray(v, dtype=float) for v in pair_hi)
    p2, q2 = (np.asarray(v, dtype=float) for v in pair_lo)
    ts = [0.0]
    for a, b in ((p, q), (p2, q2)):
        m = b > 0
        ts.extend((a[m] / b[m]).tolist())
    ts = np.unique(ts)
    lhs = np.abs(p2[None, :] - ts[:, None] * q2[None, :]).sum(axis=1)
    rhs = np.abs(p[None, :] - ts[:, None] * q[None, :]).sum(axis=1)
    return bool(np.all(lhs <= rhs + tol))


def thermo_majorizes(p, p_target, gibbs, tol=TOL):
    g = np.asarray(gibbs, dtype=float)
    if np.any(g <= 0):
        raise SupportError("Gibbs state must have full support")
    return d_majorizes((p, g), (p_target, g), tol)


def _lp_feasible(p, q, p2, q2, doubly):
    """Minimise the l1 slack of T p = p2 (and T q = q2) over stochastic T."""
    d_in, d_out = p.size, p2.size
    n = d_out * d_in
    rows, rhs = [], []
    # column sums
    for j in range(d_in):
        r = np.zeros(n)
        r[j::d_in] = 1.0
        rows.append(r)
        rhs.append(1.0)
    if doubly:
        for i in range(d_out):
            r = np.zeros(n)
            r[i * d_in:(i + 1) * d_in] = 1.0
            rows.append(r)
            rhs.append(1.0)
    images = [(p, p2)] + ([] if q is None else [(q, q2)])
    n_img = d_out * len(images)
    A_img = np.zeros((n_img, n))
    b_img = np.zeros(n_img)
    for s, (src, dst) in enumerate(images):
        for i in range(d_out):
            A_img[s * d_out + i, i * d_in:(i + 1) * d_in] = src
            b_img[s * d_out + i] = dst[i]
    A_struct = np.array(rows)
    # slack variables s+ and s- for each image equation
    A_eq = np.block([
        [A_struct, np.zeros((len(rows), 2 * n_img))],
        [A_img, np.eye(n_img), -np.eye(n_img)],
    ])
    b_eq = np.concatenate([rhs, b_img])
    c = np.concatenate([np.zeros(n), np.ones(2 * n_img)])
    res = linprog(c, A_eq=A_eq, b_eq=b_eq, bounds=(0, None), method="highs")
    if res.status != 0:
        return float("inf"), None
    return float(res.fun), res.x[:n].reshape(d_out, d_in)


def lp_majorization_oracle(p, p_target, tol=1e-9):
    """LP feasibility of a doubly stochastic T with T p = p_target."""
    a, b = _pad(p, p_target)
    slack, _ = _lp_feasible(a, None, b, None, doubly=True)
    return slack <= tol


def lp_dmajorization_oracle(pair_hi, pair_lo, tol=1e-9):
    """LP feasibility of a stochastic T with T p = p', T q = q'."""
    p, q = (np.asarray(v, dtype=float) for v in pair_hi)
    p2, q2 = (np.asarray(v, dtype=float) for v in pair_lo)
    slack, _ = _lp_feasible(p, q, p2, q2, doubly=False)
    return slack <= tol


def _hlp_steps(x, y):
    """T-transform chain taking sorted x to sorted y (y majorized by x).

    Surplus/deficit index sets only shrink, so each step costs O(log n).
    """
    x = np.array(x, dtype=float)
    y = np.asarray(y, dtype=float)
    scale = max(1.0, float(np.abs(x).max()))
    eps = 1e-15 * scale
    surplus = [i for i in range(x.size) if x[i] - y[i] > eps]
    deficit = [i for i in range(x.size) if y[i] - x[i] > eps]
    steps = []
    while surplus and deficit:
        j = surplus[-1]
        pos = bisect.bisect_right(deficit, j)
        if pos == len(deficit):
            break
        k = deficit[pos]
        gap_j = x[j] - y[j]
        gap_k = y[k] - x[k]
        delta = min(gap_j, gap_k)
        spread = x[j] - x[k]
        if spread <= 0:
            break
        lam = 1.0 - delta / spread
        steps.append((j, k, lam))
        if gap_j <= gap_k:
            x[j] = y[j]
            x[k] += delta
            surplus.pop()
            if gap_j == gap_k or y[k] - x[k] <= eps:
                x[k] = y[k]
                deficit.pop(pos)
        else:
            x[k] = y[k]
            x[j] -= delta
            deficit.pop(pos)
            if x[j] - y[j] <= eps:
                x[j] = y[j]
                surplus.pop()
    return steps


def _apply_steps(B, steps):
    for j, k, lam in steps:
        rj = B[j].copy()
        rk = B[k]
        B[j] = lam * rj + (1 - lam) * rk
        B[k] = (1 - lam) * rj + lam * rk
    return B


def witness_doubly_stochastic(p, p_target):
    p = np.asarray(p, dtype=float)
    p_target = np.asarray(p_target, dtype=float)
    if p.shape != p_target.shape:
        raise DimensionError("witness requires equal dimensions")
    k = violated_k(p, p_target)
    if k is not None:
        raise NotMajorized(f"target is not majorized (partial sum {k} violated)", k)
    d = p.size
    perm_p = np.argsort(-p, kind="stable")
    perm_t = np.argsort(-p_target, kind="stable")
    steps = _hlp_steps(p[perm_p], p_target[perm_t])
    B = np.zeros((d, d))
    B[np.arange(d), perm_p] = 1.0
    B = _apply_steps(B, steps)
    T = np.zeros((d, d))
    T[perm_t] = B
    res = float(np.abs(T @ p - p_target).sum())
    return WitnessReport(T, res, None, "ttransform")


def _common_denominator(vecs, m_max=M_MAX, tol=1e-12):
    dens = []
    for v in vecs:
        for x in v:
            f = Fraction(float(x)).limit_denominator(m_max)
            if abs(float(f) - x) > tol:
                return None
            dens.append(f.denominator)
    M = 1
    for den in dens:
        M = lcm(M, den)
        if M > m_max:
            return None
    return M


def _embedding_witness(p, q, p2, q2, M):
    m = np.rint(q * M).astype(int)
    m2 = np.rint(q2 * M).astype(int)
    if m.sum() != M or m2.sum() != M or np.any(m <= 0) or np.any(m2 <= 0):
        return None
    d, d2 = p.size, p2.size
    src_block = np.repeat(np.arange(d), m)
    dst_block = np.repeat(np.arange(d2), m2)
    x = (p / m)[src_block]
    y = (p2 / m2)[dst_block]
    perm_x = np.argsort(-x, kind="stable")
    perm_y = np.argsort(-y, kind="stable")
    steps = _hlp_steps(x[perm_x], y[perm_y])
    # rows: sorted source positions, columns: source blocks
    B = np.zeros((M, d))
    B[np.arange(M), src_block[perm_x]] = 1.0
    B = _apply_steps(B, steps)
    T = np.zeros((d2, d))
    np.add.at(T, dst_block[perm_y], B)
    return T / m[None, :]


def witness_d_stochastic(p, q, p_target, q_target):
    p, q, p2, q2 = (np.asarray(v, dtype=float) for v in (p, q, p_target, q_target))
    if np.any(q <= 0) or np.any(q2 <= 0):
        raise SupportError("reference distributions must have full support")
    if not d_majorizes((p, q), (p2, q2)):
        raise NotMajorized("(p', q') is not d-majorized by (p, q)")
    T = None
    method = "embedding"
    M = _common_denominator([q, q2])
    if M is not None:
        T = _embedding_witness(p, q, p2, q2, M)
        if T is not None and np.abs(T @ p - p2).sum() > 1e-6:
            T = None
    if T is None:
        method = "lp"
        slack, T = _lp_feasible(p, q, p2, q2, doubly=False)
        if T is None or slack > 1e-6:
            raise NotMajorized(f"LP found no witness (slack {slack:.3g})")
        T = np.clip(T, 0.0, None)
        T = T / T.sum(axis=0)
    return WitnessReport(T, float(np.abs(T @ p - p2).sum()), float(np.abs(T @ q - q2).sum()), method)


def _has_perfect_matching(mask):
    g = csr_matrix(mask.astype(np.int8))
    match = maximum_bipartite_matching(g, perm_type="column")
    return bool(np.all(match >= 0))


def _lex_smallest_matching(mask):
    d = mask.shape[0]
    mask = mask.copy()
    perm = np.empty(d, dtype=int)
    for i in range(d):
        for j in np.nonzero(mask[i])[0]:
            trial = mask.copy()
            trial[i] = False
            trial[i, j] = True
            trial[i + 1:, j] = False
            if _has_perfect_matching(trial):
                mask = trial
                perm[i] = j
                break
        else:
            return None
    return perm


def _bottleneck_perm(R, floor):
    vals = np.unique(R[R > floor])
    lo, hi = 0, vals.size - 1
    best = None
    # largest threshold that still admits a perfect matching
    while lo <= hi:
        mid = (lo + hi) // 2
        if _has_perfect_matching(R >= vals[mid]):
            best = vals[mid]
            lo = mid + 1
        else:
            hi = mid - 1
    if best is None:
        return None
    return _lex_smallest_matching(R >= best)


def _caratheodory(perms, weights, d):
    limit = (d - 1) ** 2 + 1
    perms = list(perms)
    w = np.array(weights, dtype=float)
    while len(perms) > limit:
        V = np.zeros((d * d + 1, len(perms)))
        for k, s in enumerate(perms):
            V[np.arange(d) * d + s, k] = 1.0
        V[-1] = 1.0
        c = np.linalg.svd(V)[2][-1]
        if c.max() <= 0:
            c = -c
        pos = c > 1e-14
        t = np.min(w[pos] / c[pos])
        w = w - t * c
        drop = int(np.argmin(np.where(pos, w, np.inf)))
        keep = [k for k in range(len(perms)) if k != drop and w[k] > 1e-15]
        perms = [perms[k] for k in keep]
        w = w[keep]
    return perms, w


def birkhoff_decompose(T, tol=1e-12):
    """Write a doubly stochastic T as sum_k w_k P_k.

    Returns a list of ``(perm, weight)``; ``perm[i]`` is the column hit by row
    ``i``, i.e. ``P[i, perm[i]] = 1``.
    """
    T = np.asarray(T, dtype=float)
    if not is_doubly_stochastic(T, 1e-9):
        raise ValidationError("matrix is not doubly stochastic")
    d = T.shape[0]
    R = T.copy()
    perms, weights = [], []
    while R.max() > tol and len(perms) < d * d + 1:
        s = _bottleneck_perm(R, tol)
        if s is None:
            break
        w = R[np.arange(d), s].min()
        R[np.arange(d), s] -= w
        R[np.abs(R) <= tol] = 0.0
        perms.append(s)
        weights.append(w)
    perms, weights = _caratheodory(perms, weights, d)
    return [(np.array(s), float(w)) for s, w in zip(perms, weights)]


def permutation_matrix(perm):
    d = len(perm)
    P = np.zeros((d, d))
    P[np.arange(d), perm] = 1.0
    return P
