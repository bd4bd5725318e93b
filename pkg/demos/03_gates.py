"""Photon-number-conserving gates acting on Fock states."""

import numpy as np

from photonic_bh.fock import enumerate_basis
from photonic_bh.gates import BeamSplitter, Kerr, Rotation, apply_circuit
from photonic_bh.state import fock_state

basis = enumerate_basis(2, 4)
psi = fock_state(basis, (4, 0))

# A 50/50 splitter spreads |4,0> binomially over the two modes.
out = apply_circuit(psi, [BeamSplitter(0, 1, np.pi / 4)])
for config, amp in zip(basis.configs, out.amplitudes):
    print(config, f"{abs(amp) ** 2:.4f}")

# Rotation and Kerr gates only add phases, so populations are unchanged.
out2 = apply_circuit(out, [Rotation(0, 0.3), Kerr(1, 1.1)])
print("populations unchanged:", np.allclose(abs(out.amplitudes), abs(out2.amplitudes)))

# Hong-Ou-Mandel: |1,1> through a 50/50 splitter never leaves one photon per mode.
hom = apply_circuit(fock_state(enumerate_basis(2, 2), (1, 1)), [BeamSplitter(0, 1, np.pi / 4)])
print("P(1,1) after 50/50:", round(abs(hom.amplitudes[1]) ** 2, 12))
