"""Quantum channels: unital witnesses, coherence and a work ledger.

Run:  python demos/03_quantum.py
"""

import numpy as np

from majthermo import qmajorization as qm
from majthermo.quantum import QGibbsSpec, is_cptp, is_gibbs_preserving, is_unital, proj, random_density, random_unital_channel

rng = np.random.default_rng(3)
rho = random_density(rng, 3)
target = random_unital_channel(rng, 3)(rho)
E = qm.q_majorization_witness(rho, target)
print("spectra", np.round(np.linalg.eigvalsh(rho)[::-1], 4), "->", np.round(np.linalg.eigvalsh(target)[::-1], 4))
print("witness: CPTP", is_cptp(E), "unital", is_unital(E), "error", np.abs(E(rho) - target).max())
mix = qm.mixture_of_unitaries_witness(rho, target)
print(f"  as a mixture of {len(mix)} unitaries with weights", np.round([w for w, _ in mix], 4))

# Gibbs-preserving is weaker than thermal: this map creates coherence
spec, C = qm.coherence_counterexample(0.0, 1.0, 1.0)
print("\nGibbs-preserving:", is_gibbs_preserving(C, spec), " |1> ->\n", np.round(C(proj([0, 1])), 4))

# necessary and sufficient conditions for single-shot work with a clock
H = np.diag([0.0, 1.0])
S = QGibbsSpec(H, 1.0)
for w in (-1.2, -0.9, 0.0, 0.5):
    v = qm.single_shot_work_verdict(proj([0, 1]), proj([1, 0]), S, S, w)
    print(f"excited -> ground with w = {w:+.1f}: necessary {v.necessary}, sufficient {v.sufficient}")

scw, Om, E = qm.random_average_work_instance(rng)
print("\naverage-work inequality slack on a random composite channel:", round(qm.average_work_gap(scw, Om, E(Om)), 4))
