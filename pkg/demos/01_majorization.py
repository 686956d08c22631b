"""Majorization by hand: a failing pair, a witness, and a catalyst.

Run:  python demos/01_majorization.py
"""

import numpy as np

from majthermo import catalysis, majorization as mj

p, q = [2 / 3, 1 / 6, 1 / 6], [1 / 2, 1 / 2, 0]
print("does (2/3, 1/6, 1/6) majorize (1/2, 1/2, 0)?", mj.majorizes(p, q))
print("  first violated partial sum: k =", mj.violated_k(p, q))

# a pair that does work, with a doubly stochastic witness and its permutations
p, q = [0.6, 0.3, 0.1], [0.4, 0.4, 0.2]
rep = mj.witness_doubly_stochastic(p, q)
print("\nwitness T for", p, "->", q)
print(np.round(rep.matrix, 4))
print("  |Tp - q| =", rep.residual_p)
for perm, w in mj.birkhoff_decompose(rep.matrix):
    print(f"  {w:.4f} x permutation {perm.tolist()}")

# Lorenz curves: the upper curve belongs to the majorizing vector
for v in (p, q):
    print("Lorenz", v, "->", np.round(mj.lorenz(v).points, 3).tolist())

# no direct conversion, yet a small catalyst unlocks it
s, t, r = [0.5, 0.25, 0.25, 0.0], [0.4, 0.4, 0.1, 0.1], [0.6, 0.4]
print("\n", s, "->", t, "directly:", mj.majorizes(s, t))
print("  with catalyst", r, ":", catalysis.verify_catalyst(s, t, r))
print("  and backwards with the same catalyst:", catalysis.verify_catalyst(t, s, r))
v = catalysis.trump_exact_conditions(s, t)
print("  Renyi-entropy test over the alpha grid:", v.satisfied, v.caveat or "")

# relative majorization with a non-uniform reference
pair, pair2 = ([0.9, 0.1], [0.5, 0.5]), ([0.7, 0.3], [0.5, 0.5])
print("\nd-majorization", pair, "over", pair2, ":", mj.d_majorizes(pair, pair2))
W = mj.witness_d_stochastic(*pair, *pair2)
print("  stochastic witness:\n", np.round(W.matrix, 4))
