"""Quasi-static protocols and single-shot work bounds.

Run:  python demos/02_thermodynamics.py
"""

import numpy as np

from majthermo import thermo
from majthermo.prob import GibbsSpec

E, Et, beta = (0.0, 1.0, 2.0), (0.5, 0.0, 1.5), 1.0
p, pt = [0.7, 0.2, 0.1], [0.2, 0.3, 0.5]
dF = thermo.noneq_free_energy(pt, GibbsSpec(Et, beta)) - thermo.noneq_free_energy(p, GibbsSpec(E, beta))
print(f"free-energy change {dF:.4f}")
print(" N    work     dissipation  dissipation*N")
for N in (4, 16, 64, 256):
    r = thermo.simulate_protocol(thermo.optimal_fluctuating_protocol(p, pt, E, Et, beta, N), p, E)
    print(f"{N:4d}  {r.work:.4f}   {r.sigma:.5f}      {r.sigma * N:.4f}")

# the same staircase started in equilibrium: work fluctuations fade as 1/N
g = GibbsSpec(E, beta)
print("\n N    work variance (staircase from the Gibbs state)")
for N in (8, 32, 128):
    r = thermo.simulate_protocol(thermo.Protocol(thermo.staircase(E, Et, N), beta), g.state, E)
    print(f"{N:4d}  {r.work_variance:.5f}")

# deterministic work: the verdict flips exactly at the analytic bound
g = GibbsSpec((0.0, 0.8, 1.7), 1.3)
target = np.array([0.1, 0.2, 0.7])
w = thermo.work_bound("formation", target, g)
print(f"\nforming {target.tolist()} costs at least {w:.6f}")
for dw in (-1e-6, 1e-6):
    v = thermo.w_assisted_transformable(g.state, target, g, g, w + dw)
    print(f"  w = bound {dw:+.0e}: transformable = {v.transformable}")

pure = [0.0, 1.0, 0.0]
w, proto = thermo.single_shot_extraction(pure, g)
r = thermo.simulate_protocol(proto, pure, g.E)
print(f"\nextractable from the pure middle level: {w:.4f}; the protocol yields {-r.work:.4f}")
