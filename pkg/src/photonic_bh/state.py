"""Complex amplitude vectors over a fixed-N Fock basis."""

from __future__ import annotations

from dataclasses import dataclass
from typing import Sequence

import numpy as np

from .fock import FockBasis


@dataclass(frozen=True, eq=False)
class StateVector:
    basis: FockBasis
    amplitudes: np.ndarray

    def __post_init__(self):
        amps = np.asarray(self.amplitudes, dtype=np.complex128)
        if amps.shape != (self.basis.dim,):
            raise ValueError(f"expected {self.basis.dim} amplitudes, got shape {amps.shape}")
        object.__setattr__(self, "amplitudes", amps)

    @property
    def probabilities(self) -> np.ndarray:
        return np.abs(self.amplitudes) ** 2

    def norm(self) -> float:
        return float(np.linalg.norm(self.amplitudes))

    def normalized(self) -> "StateVector":
        nrm = self.norm()
        if nrm == 0.0:
            raise ValueError("cannot normalize the zero vector")
        return StateVector(self.basis, self.amplitudes / nrm)

    def amplitude(self, config: Sequence[int]) -> complex:
        return complex(self.amplitudes[self.basis.index_of(config)])

    def copy(self) -> "StateVector":
        return StateVector(self.basis, self.amplitudes.copy())


def fock_state(basis: FockBasis, config: Sequence[int]) -> StateVector:
    amps = np.zeros(basis.dim, dtype=np.complex128)
    amps[basis.index_of(config)] = 1.0
    return StateVector(basis, amps)


def superposition(basis: FockBasis, terms: dict) -> StateVector:
    """Normalized state from a ``{config: amplitude}`` mapping."""
    amps = np.zeros(basis.dim, dtype=np.complex128)
    for config, amp in terms.items():
        amps[basis.index_of(config)] += amp
    return StateVector(basis, amps).normalized()


def random_state(basis: FockBasis, rng: np.random.Generator) -> StateVector:
    amps = rng.normal(size=basis.dim) + 1j * rng.normal(size=basis.dim)
    return StateVector(basis, amps).normalized()
