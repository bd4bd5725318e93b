"""The two layered circuit families and their resource counts."""

from photonic_bh.ansatz import AnsatzSpec, Family, build, noninteracting_params
from photonic_bh.engine import fidelity
from photonic_bh.model import BHModel, ring_edges, solve
from photonic_bh.state import StateVector, fock_state

for s in (2, 3, 4):
    for family in Family:
        spec = AnsatzSpec(family, s, 6)
        print(f"{family.value:>20} S={s}  gates={spec.gate_count:3d}  params={spec.parameter_count:3d}")

# One stair layer with closed-form angles prepares the non-interacting ground state.
model = BHModel.from_lambda(3, 5, 0.0, edges=ring_edges(3))
gs = solve(model)
basis = gs.vector.basis
template = build(AnsatzSpec(Family.BS_KERR, 3, 1))
psi = fock_state(basis, (5, 0, 0))
out = StateVector(basis, template.run(basis, psi.amplitudes, noninteracting_params(3)))
print("Lambda=0 fidelity:", fidelity(out, gs.vector))
