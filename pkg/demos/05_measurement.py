"""Estimating the energy from photon-counting shots.

Diagonal terms come from plain number counts. Each hopping term is read
from a separate setting where a 50/50 splitter is applied to the edge
first. The statistical error shrinks like one over the square root of
the shot count.
"""

import numpy as np

from photonic_bh import BHModel, solve
from photonic_bh.measure import default_plan, estimate_energy

model = BHModel.from_lambda(2, 4, 3.0)
gs = solve(model)
rng = np.random.default_rng(0)
print(f"exact E0 = {gs.energy:.5f}")
for shots in (10**3, 10**4, 10**5):
    est = estimate_energy(gs.vector, model, default_plan(model, shots), rng)
    print(f"shots={shots:>6}  estimate={est.value:.5f} +/- {est.std_error:.5f}")
