"""Training a BS-Kerr circuit to prepare the dimer ground state.

The cost is the infidelity against the exact ground state, minimised with
L-BFGS-B and finite-difference gradients from five random restarts.
"""

from photonic_bh import BHModel
from photonic_bh.ansatz import AnsatzSpec, Family
from photonic_bh.engine import ExperimentSpec, InitialStatePrep, run_vqa_infidelity
from photonic_bh.optimize import OptimizerConfig

for lam in (0.01, 3.0, 10.0):
    spec = ExperimentSpec(
        model=BHModel.from_lambda(2, 4, lam),
        ansatz=AnsatzSpec(Family.BS_KERR, 2, 4),
        init=InitialStatePrep("bimodal"),
        optimizer=OptimizerConfig(max_evaluations=20000),
        restarts=3,
        seed=1,
    )
    res = run_vqa_infidelity(spec)
    print(f"Lambda={lam:5.2f}  F={res.fidelity:.6f}  evaluations={res.trace.n_evaluations}")
