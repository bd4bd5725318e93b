"""Layered ansatz circuits: the beam-splitter/Kerr stair and the
interferometer/Kerr mesh."""

from __future__ import annotations

import enum
from dataclasses import dataclass, asdict
from typing import Optional, Sequence

import numpy as np

from .fock import FockBasis
from .gates import (BeamSplitter, Gate, Kerr, Rotation, beamsplit_amplitudes, beamsplit_columns,
                    kerr_amplitudes, kerr_columns, rotate_amplitudes, rotate_columns)


class Family(str, enum.Enum):
    BS_KERR = "bs_kerr"
    INTERFEROMETER_KERR = "interferometer_kerr"


@dataclass(frozen=True)
class AnsatzSpec:
    family: Family
    n_sites: int
    n_layers: int
    zero_bs_phases: bool = False
    include_rotations: bool = True

    def __post_init__(self):
        object.__setattr__(self, "family", Family(self.family))
        if self.n_sites < 2:
            raise ValueError("ansatz circuits need at least two modes")
        if self.n_layers < 0:
            raise ValueError("n_layers must be >= 0")
        if self.family is Family.BS_KERR:
            # the stair ansatz always runs with phi = 0 and no rotations
            object.__setattr__(self, "zero_bs_phases", True)
            object.__setattr__(self, "include_rotations", False)

    @property
    def bs_per_layer(self) -> int:
        s = self.n_sites
        return s - 1 if self.family is Family.BS_KERR else s * (s - 1) // 2

    @property
    def gate_count(self) -> int:
        s = self.n_sites
        per_layer = self.bs_per_layer + s + (s if self.include_rotations else 0)
        return self.n_layers * per_layer

    @property
    def kerr_count(self) -> int:
        return self.n_layers * self.n_sites

    @property
    def parameter_count(self) -> int:
        s = self.n_sites
        bs_params = self.bs_per_layer * (1 if self.zero_bs_phases else 2)
        return self.n_layers * (bs_params + s + (s if self.include_rotations else 0))

    def to_dict(self) -> dict:
        d = asdict(self)
        d["family"] = self.family.value
        return d

    @classmethod
    def from_dict(cls, d: dict) -> "AnsatzSpec":
        allowed = {"family", "n_sites", "n_layers", "zero_bs_phases", "include_rotations"}
        unknown = set(d) - allowed
        if unknown:
            raise ValueError(f"unknown ansatz keys: {sorted(unknown)}")
        return cls(**d)


@dataclass(frozen=True)
class Slot:
    """One gate of a template. ``theta``/``phi`` are parameter indices
    (``phi`` is None when the phase is pinned to zero)."""

    kind: str
    modes: tuple[int, ...]
    theta: int
    phi: Optional[int] = None
    layer: int = 0


def stair_pairs(n_sites: int, layer: int) -> list[tuple[int, int]]:
    """Beam-splitter pairs of stair layer ``layer`` (0-based): down on even
    indices, up on odd ones."""
    down = [(p, p + 1) for p in range(n_sites - 1)]
    return down if layer % 2 == 0 else down[::-1]


def mesh_pairs(n_sites: int) -> list[tuple[int, int]]:
    """Rectangular nearest-neighbour mesh: ``n_sites`` columns alternating
    between pairs starting at mode 0 and at mode 1."""
    pairs = []
    for col in range(n_sites):
        pairs.extend((p, p + 1) for p in range(col % 2, n_sites - 1, 2))
    return pairs


@dataclass(frozen=True)
class CircuitTemplate:
    spec: AnsatzSpec
    slots: tuple[Slot, ...]

    @property
    def n_params(self) -> int:
        return self.spec.parameter_count

    def bind(self, params: Sequence[float]) -> list[Gate]:
        return bind(self, params)

    def run(self, basis: FockBasis, amps: np.ndarray, params: np.ndarray) -> np.ndarray:
        """Apply the bound circuit to raw amplitudes (hot path, no Gate objects)."""
        for s in self.slots:
            theta = params[s.theta]
            if s.kind == "kerr":
                amps = kerr_amplitudes(basis, amps, s.modes[0], theta)
            elif s.kind == "bs":
                phi = 0.0 if s.phi is None else params[s.phi]
                amps = beamsplit_amplitudes(basis, amps, s.modes[0], s.modes[1], theta, phi)
            else:
                amps = rotate_amplitudes(basis, amps, s.modes[0], theta)
        return amps

    def run_batch(self, basis: FockBasis, amps: np.ndarray, params: np.ndarray) -> np.ndarray:
        """:meth:`run` for every row of ``params`` (shape (m, n_params)) at
        once; returns the output states as columns, shape (dim, m)."""
        params = np.asarray(params, dtype=float)
        out = np.repeat(np.asarray(amps, dtype=complex)[:, None], params.shape[0], axis=1)
        for s in self.slots:
            theta = params[:, s.theta]
            if s.kind == "kerr":
                out = kerr_columns(basis, out, s.modes[0], theta)
            elif s.kind == "bs":
                phi = None if s.phi is None else params[:, s.phi]
                out = beamsplit_columns(basis, out, s.modes[0], s.modes[1], theta, phi)
            else:
                out = rotate_columns(basis, out, s.modes[0], theta)
        return out

    def slot_map(self) -> list[tuple[int, int, str]]:
        """``(param index, gate index, field)`` for every free parameter."""
        out = []
        for g, s in enumerate(self.slots):
            out.append((s.theta, g, "theta"))
            if s.phi is not None:
                out.append((s.phi, g, "phi"))
        return sorted(out)


def build_bs_kerr(spec: AnsatzSpec) -> CircuitTemplate:
    if spec.family is not Family.BS_KERR:
        raise ValueError("spec is not a BS-Kerr ansatz")
    slots: list[Slot] = []
    k = 0
    for layer in range(spec.n_layers):
        for p, q in stair_pairs(spec.n_sites, layer):
            slots.append(Slot("bs", (p, q), k, None, layer))
            k += 1
        for p in range(spec.n_sites):
            slots.append(Slot("kerr", (p,), k, None, layer))
            k += 1
    return CircuitTemplate(spec, tuple(slots))


def build_interferometer_kerr(spec: AnsatzSpec) -> CircuitTemplate:
    if spec.family is not Family.INTERFEROMETER_KERR:
        raise ValueError("spec is not an interferometer-Kerr ansatz")
    slots: list[Slot] = []
    k = 0
    for layer in range(spec.n_layers):
        for p, q in mesh_pairs(spec.n_sites):
            if spec.zero_bs_phases:
                slots.append(Slot("bs", (p, q), k, None, layer))
                k += 1
            else:
                slots.append(Slot("bs", (p, q), k, k + 1, layer))
                k += 2
        if spec.include_rotations:
            for p in range(spec.n_sites):
                slots.append(Slot("rot", (p,), k, None, layer))
                k += 1
        for p in range(spec.n_sites):
            slots.append(Slot("kerr", (p,), k, None, layer))
            k += 1
    return CircuitTemplate(spec, tuple(slots))


def build(spec: AnsatzSpec) -> CircuitTemplate:
    if spec.family is Family.BS_KERR:
        return build_bs_kerr(spec)
    return build_interferometer_kerr(spec)


def bind(template: CircuitTemplate, params: Sequence[float]) -> list[Gate]:
    params = np.asarray(params, dtype=float)
    if params.shape != (template.n_params,):
        raise ValueError(f"expected {template.n_params} parameters, got {params.shape}")
    gates: list[Gate] = []
    for s in template.slots:
        theta = float(params[s.theta])
        if s.kind == "bs":
            phi = 0.0 if s.phi is None else float(params[s.phi])
            gates.append(BeamSplitter(s.modes[0], s.modes[1], theta, phi))
        elif s.kind == "kerr":
            gates.append(Kerr(s.modes[0], theta))
        else:
            gates.append(Rotation(s.modes[0], theta))
    return gates


# closed-form beam-splitter angles that map |N, 0, ..., 0> onto the
# non-interacting ground state of the dimer and the 3-/4-site rings
UNIFORM_STAIR_ANGLES = {
    2: (np.pi / 4,),
    3: (np.arccos(1 / np.sqrt(3)), np.pi / 4),
    4: (np.pi / 3, np.arccos(1 / np.sqrt(3)), np.pi / 4),
}


def uniform_stair_angles(n_sites: int) -> tuple[float, ...]:
    """Stair angles spreading one mode uniformly over ``n_sites`` modes.

    ``theta_k = arccos(1 / sqrt(S - k))``; reproduces the tabulated values
    for 2, 3 and 4 sites.
    """
    return tuple(float(np.arccos(1 / np.sqrt(n_sites - k))) for k in range(n_sites - 1))


def noninteracting_params(n_sites: int) -> np.ndarray:
    """One BS-Kerr layer with the uniform stair angles and zero Kerr phases."""
    spec = AnsatzSpec(Family.BS_KERR, n_sites, 1)
    params = np.zeros(spec.parameter_count)
    params[: n_sites - 1] = UNIFORM_STAIR_ANGLES.get(n_sites, uniform_stair_angles(n_sites))
    return params
