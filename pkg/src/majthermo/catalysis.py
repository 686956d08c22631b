"""Checks for catalytic, catalytic-d and correlated-catalytic convertibility.

Grid checks over alpha are necessary evidence only: the exact criteria
quantify over every real alpha.  Each verdict carries that caveat.
"""

from dataclasses import dataclass, field

import numpy as np

from .divergence import renyi_divergence, renyi_entropy, shannon_entropy
from .majorization import majorizes
from .prob import SupportError, ValidationError, tensor

STRICT_MARGIN = 1e-12
GRID_CAVEAT = "finite alpha grid: a pass is necessary evidence, not a proof"


@dataclass(frozen=True)
class CatalysisVerdict:
    satisfied: bool
    failing_alpha: float = None
    alpha_grid: tuple = field(default=())
    caveat: str = GRID_CAVEAT


def default_alpha_grid():
    """161 points in [-20, 20] (80 log-spaced magnitudes per sign and 0), plus 1 and +-inf."""
    mags = np.logspace(-3, np.log10(20.0), 80)
    grid = np.concatenate([-mags[::-1], [0.0], mags, [1.0, -np.inf, np.inf]])
    return tuple(sorted(set(float(a) for a in grid)))


def f_alpha(p, alpha):
    """Piecewise monotone used by the exact trumping criterion.

    Zero entries are allowed and give +inf where a negative power or a log of
    zero would appear.
    """
    p = np.asarray(p, dtype=float)
    a = float(alpha)
    pos = p[p > 0]
    zero = pos.size < p.size
    if a == np.inf:
        return float(np.log(p.max()))
    if a == -np.inf:
        return float("inf") if zero else float(-np.log(p.min()))
    if a == 1.0:
        return float(np.sum(pos * np.log(pos)))
    if a == 0.0:
        return float("inf") if zero else float(-np.sum(np.log(p)))
    if a < 0 and zero:
        return float("inf")
    s = np.log(np.sum(pos ** a))
    return float(-s if 0 < a < 1 else s)


def _sorted_equal(p, p2):
    p = np.sort(np.asarray(p, dtype=float))
    p2 = np.sort(np.asarray(p2, dtype=float))
    return p.shape == p2.shape and bool(np.allclose(p, p2, rtol=0, atol=1e-14))


def verify_catalyst(p, p_target, r):
    return majorizes(tensor(p, r), tensor(p_target, r))


def trump_exact_conditions(p, p_target, alpha_grid=None):
    p = np.asarray(p, dtype=float)
    p_target = np.asarray(p_target, dtype=float)
    if np.any(p_target <= 0):
        raise SupportError("target distribution must have full rank")
    if _sorted_equal(p, p_target):
        raise ValidationError("sorted vectors coincide; the criterion needs them distinct")
    grid = default_alpha_grid() if alpha_grid is None else tuple(alpha_grid)
    for a in grid:
        lhs, rhs = f_alpha(p_target, a), f_alpha(p, a)
        # the +-inf limits of a strict family are only non-strict
        ok = lhs <= rhs if np.isinf(a) else lhs < rhs - STRICT_MARGIN
        if not ok:
            return CatalysisVerdict(False, a, grid)
    return CatalysisVerdict(True, None, grid)


def trump_approx_conditions(p, p_target, alpha_grid=None):
    grid = default_alpha_grid() if alpha_grid is None else tuple(alpha_grid)
    for a in grid:
        if renyi_entropy(p, a) > renyi_entropy(p_target, a) + 1e-12:
            return CatalysisVerdict(False, a, grid)
    return CatalysisVerdict(True, None, grid)


def d_trump_conditions(p, q, p_target, q_target, alpha_grid=None):
    q = np.asarray(q, dtype=float)
    q_target = np.asarray(q_target, dtype=float)
    if np.any(q <= 0) or np.any(q_target <= 0):
        raise SupportError("reference distributions must have full rank")
    grid = default_alpha_grid() if alpha_grid is None else tuple(alpha_grid)
    for a in grid:
        hi = renyi_divergence(p, q, a)
        lo = renyi_divergence(p_target, q_target, a)
        if lo == float("inf") and hi == float("inf"):
            continue
        if lo > hi + 1e-12:
            return CatalysisVerdict(False, a, grid)
    return CatalysisVerdict(True, None, grid)


def correlated_catalysis_conditions(p, p_target):
    if _sorted_equal(p, p_target):
        raise ValidationError("sorted vectors coincide; the criterion needs them distinct")
    s0 = renyi_entropy(p, 0.0) <= renyi_entropy(p_target, 0.0) + 1e-12
    if not s0:
        return CatalysisVerdict(False, 0.0, (0.0, 1.0), "exact two-condition test")
    s1 = shannon_entropy(p) < shannon_entropy(p_target) - STRICT_MARGIN
    return CatalysisVerdict(bool(s1), None if s1 else 1.0, (0.0, 1.0), "exact two-condition test")
