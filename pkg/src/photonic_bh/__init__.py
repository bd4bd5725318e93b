"""Variational preparation of attractive Bose-Hubbard ground states on a
simulated continuous-variable photonic circuit.

Modules:
    fock: fixed-N Fock basis enumeration and ranking.
    model: Hamiltonian, exact diagonalization, IPR and entropy.
    gates: beam-splitter, rotation and Kerr gates on Fock amplitudes.
    ansatz: BS-Kerr and interferometer-Kerr layered circuits.
    measure: photon-counting energy estimation.
    optimize: L-BFGS-B and CMA-ES outer loops.
    engine: VQA/VQE experiment drivers and layer scans.
    cli: command-line front end.
"""

from .fock import FockBasis, dimension, enumerate_basis
from .model import BHModel, build_hamiltonian, entropy, ipr, solve
from .state import StateVector, fock_state

__version__ = "0.1.0"

__all__ = [
    "BHModel",
    "FockBasis",
    "StateVector",
    "build_hamiltonian",
    "dimension",
    "entropy",
    "enumerate_basis",
    "fock_state",
    "ipr",
    "solve",
]
