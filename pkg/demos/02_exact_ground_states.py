"""Exact ground states of the attractive dimer across the transition.

The dimer with 8 bosons crosses from a delocalised superfluid to a
cat-like state as Lambda = N_B U / J grows. The IPR and the single-mode
entropy both peak near Lambda = 3.
"""

import numpy as np

from photonic_bh import BHModel, entropy, ipr, solve

for lam in np.linspace(0.01, 10, 11):
    gs = solve(BHModel.from_lambda(2, 8, lam))
    probs = np.abs(gs.vector.amplitudes) ** 2
    cat = probs[0] + probs[-1]
    print(f"Lambda={lam:5.2f}  E0={gs.energy:9.4f}  IPR={ipr(gs.vector):6.3f}  "
          f"S={entropy(gs.vector):6.3f}  P(cat)={cat:5.3f}")
