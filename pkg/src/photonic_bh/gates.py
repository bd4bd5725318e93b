"""Number-preserving photonic gates acting on fixed-N state vectors.

Beam splitter convention::

    B_pq(theta, phi) = exp(theta (e^{i phi} a_q^dag a_p - e^{-i phi} a_p^dag a_q))
    B^dag a_p B = a_p cos(theta) - a_q sin(theta) e^{-i phi}

so ``B_pq(theta, 0)|N, 0> = (cos(theta) a_p^dag + sin(theta) a_q^dag)^N / sqrt(N!) |0>``.
The gate only mixes configurations sharing the pair total ``n_p + n_q`` and
the occupations of every other mode, so it is applied fiber by fiber with
small ``(n+1) x (n+1)`` blocks.
"""

from __future__ import annotations

import json
from dataclasses import dataclass
from functools import lru_cache
from typing import Iterable, Sequence, Union

import numpy as np
import scipy.sparse as sp

from .fock import FockBasis
from .state import StateVector


@dataclass(frozen=True)
class BeamSplitter:
    p: int
    q: int
    theta: float
    phi: float = 0.0

    @property
    def modes(self) -> tuple[int, ...]:
        return (self.p, self.q)

    def inverse(self) -> "BeamSplitter":
        return BeamSplitter(self.p, self.q, -self.theta, self.phi)


@dataclass(frozen=True)
class Rotation:
    p: int
    theta: float

    @property
    def modes(self) -> tuple[int, ...]:
        return (self.p,)

    def inverse(self) -> "Rotation":
        return Rotation(self.p, -self.theta)


@dataclass(frozen=True)
class Kerr:
    p: int
    theta: float

    @property
    def modes(self) -> tuple[int, ...]:
        return (self.p,)

    def inverse(self) -> "Kerr":
        return Kerr(self.p, -self.theta)


Gate = Union[BeamSplitter, Rotation, Kerr]

_TAGS = {BeamSplitter: "bs", Rotation: "rot", Kerr: "kerr"}


def _check_modes(basis: FockBasis, *modes: int) -> None:
    for m in modes:
        if not 0 <= m < basis.n_sites:
            raise ValueError(f"mode {m} out of range 0..{basis.n_sites - 1}")
    if len(set(modes)) != len(modes):
        raise ValueError(f"gate modes must be distinct, got {modes}")


# ---------------------------------------------------------------------------
# beam-splitter blocks


def bs_generator(n_total: int, theta: float = 1.0, phi: float = 0.0) -> np.ndarray:
    """Anti-Hermitian generator restricted to ``n_p + n_q = n_total``.

    Sub-basis index ``k`` is ``n_q``, so ``(n_p, n_q)`` runs ``(n, 0), (n-1, 1), ..., (0, n)``.
    """
    k = np.arange(n_total)
    c = np.sqrt((n_total - k) * (k + 1.0))
    gen = np.zeros((n_total + 1, n_total + 1), dtype=np.complex128)
    gen[k + 1, k] = theta * np.exp(1j * phi) * c
    gen[k, k + 1] = -theta * np.exp(-1j * phi) * c
    return gen


@lru_cache(maxsize=None)
def _block_spectrum(n_total: int) -> tuple[np.ndarray, np.ndarray]:
    # i K is Hermitian for the real antisymmetric phi=0 generator K
    w, v = np.linalg.eigh(1j * bs_generator(n_total).real)
    w.setflags(write=False)
    v.setflags(write=False)
    return w, v


@lru_cache(maxsize=4096)
def _bs_block_cached(n_total: int, theta: float, phi: float) -> np.ndarray:
    w, v = _block_spectrum(n_total)
    block = (v * np.exp(-1j * theta * w)) @ v.conj().T
    if phi != 0.0:
        d = np.exp(1j * phi * np.arange(n_total + 1))
        block = d[:, None] * block * d.conj()[None, :]
    block.setflags(write=False)
    return block


def bs_block(n_total: int, theta: float, phi: float = 0.0) -> np.ndarray:
    """Beam-splitter unitary on the ``n_total`` pair sector, ordered ``n_p = n_total .. 0``."""
    if n_total < 0:
        raise ValueError("n_total must be >= 0")
    return _bs_block_cached(int(n_total), float(theta), float(phi))


@lru_cache(maxsize=256)
def fiber_plan(basis: FockBasis, p: int, q: int) -> tuple[np.ndarray, ...]:
    """Index fibers of the ``(p, q)`` pair grouped by pair total.

    Entry ``n`` is an ``(F_n, n+1)`` integer array; row ``f`` lists the basis
    indices of ``(n_p, n_q) = (n, 0), (n-1, 1), ..., (0, n)`` with every other
    mode held fixed.
    """
    _check_modes(basis, p, q)
    occ = basis.occupations
    totals = occ[:, p] + occ[:, q]
    plans = []
    for n in range(basis.n_bosons + 1):
        anchors = occ[(totals == n) & (occ[:, q] == 0)]
        idx = np.empty((anchors.shape[0], n + 1), dtype=np.int64)
        for k in range(n + 1):
            moved = anchors.copy()
            moved[:, p] = n - k
            moved[:, q] = k
            idx[:, k] = basis.indices_of(moved)
        idx.setflags(write=False)
        plans.append(idx)
    return tuple(plans)


DENSE_SPECTRAL_LIMIT = 256


@lru_cache(maxsize=256)
def _pair_spectrum(basis: FockBasis, p: int, q: int):
    """Block-diagonal eigenbasis of the (p, q) generator over the whole sector.

    Returns ``(W, W^dag, w, n_q)`` with ``B(theta, phi) = D W diag(e^{-i theta w}) W^dag D^*``
    and ``D = diag(e^{i phi n_q})``. Assembled from the per-fiber block spectra.
    """
    plan = fiber_plan(basis, p, q)
    rows, cols, vals = [], [], []
    w_full = np.zeros(basis.dim)
    for n, idx in enumerate(plan):
        if idx.shape[0] == 0:
            continue
        w, v = _block_spectrum(n)
        w_full[idx] = w[None, :]
        # W[idx[f, k], idx[f, j]] = v[k, j]
        rows.append(np.repeat(idx, n + 1, axis=1).ravel())
        cols.append(np.tile(idx, (1, n + 1)).ravel())
        vals.append(np.broadcast_to(v, (idx.shape[0], n + 1, n + 1)).ravel())
    W = sp.csr_matrix((np.concatenate(vals), (np.concatenate(rows), np.concatenate(cols))),
                      shape=(basis.dim, basis.dim))
    if basis.dim <= DENSE_SPECTRAL_LIMIT:
        W = W.toarray()
        Wh = np.ascontiguousarray(W.conj().T)
    else:
        Wh = W.conj().T.tocsr()
    nq = basis.occupations[:, q].astype(float)
    w_full.setflags(write=False)
    nq.setflags(write=False)
    return W, Wh, w_full, nq


@lru_cache(maxsize=64)
def _number_columns(basis: FockBasis) -> np.ndarray:
    n = basis.occupations.T.astype(float)
    n.setflags(write=False)
    return n


# ---------------------------------------------------------------------------
# array-level kernels


def rotate_amplitudes(basis: FockBasis, amps: np.ndarray, p: int, theta: float) -> np.ndarray:
    return amps * np.exp(1j * theta * _number_columns(basis)[p])


def kerr_amplitudes(basis: FockBasis, amps: np.ndarray, p: int, theta: float) -> np.ndarray:
    n = _number_columns(basis)[p]
    return amps * np.exp(1j * theta * n * n)


def beamsplit_amplitudes(basis: FockBasis, amps: np.ndarray, p: int, q: int,
                         theta: float, phi: float = 0.0) -> np.ndarray:
    W, Wh, w, nq = _pair_spectrum(basis, p, q)
    if phi != 0.0:
        d = np.exp(1j * phi * nq)
        return d * (W @ (np.exp(-1j * theta * w) * (Wh @ (d.conj() * amps))))
    return W @ (np.exp(-1j * theta * w) * (Wh @ amps))


def beamsplit_amplitudes_by_fiber(basis: FockBasis, amps: np.ndarray, p: int, q: int,
                                  theta: float, phi: float = 0.0) -> np.ndarray:
    """Reference route: explicit per-fiber block mat-vecs."""
    plan = fiber_plan(basis, p, q)
    out = np.array(amps, dtype=np.complex128, copy=True)
    for n in range(1, len(plan)):
        idx = plan[n]
        if idx.shape[0] == 0:
            continue
        out[idx] = amps[idx] @ bs_block(n, theta, phi).T
    return out


# Batched variants: ``amps`` has shape (dim, m), one column per parameter
# setting, and ``theta``/``phi`` have shape (m,). Diagonal phases take few
# distinct values, so they are exponentiated once per level and gathered.


def _levels(values: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
    levels, inverse = np.unique(np.round(values, 9), return_inverse=True)
    inverse = inverse.ravel()
    # exact (unrounded) representative per level
    rep = np.zeros(levels.shape)
    rep[inverse] = values
    return rep, inverse


@lru_cache(maxsize=256)
def _diagonal_levels(basis: FockBasis, p: int, power: int) -> tuple[np.ndarray, np.ndarray]:
    return _levels(_number_columns(basis)[p] ** power)


@lru_cache(maxsize=256)
def _pair_levels(basis: FockBasis, p: int, q: int) -> tuple[np.ndarray, np.ndarray]:
    return _levels(_pair_spectrum(basis, p, q)[2])


def _phase_columns(levels: tuple[np.ndarray, np.ndarray], theta: np.ndarray, sign: float) -> np.ndarray:
    rep, inverse = levels
    angle = np.outer(rep, sign * np.asarray(theta, dtype=float))
    table = np.empty(angle.shape, dtype=complex)
    # real cos/sin is several times faster than complex exp
    np.cos(angle, out=table.real)
    np.sin(angle, out=table.imag)
    return table[inverse]


def rotate_columns(basis: FockBasis, amps: np.ndarray, p: int, theta: np.ndarray) -> np.ndarray:
    return amps * _phase_columns(_diagonal_levels(basis, p, 1), theta, 1.0)


def kerr_columns(basis: FockBasis, amps: np.ndarray, p: int, theta: np.ndarray) -> np.ndarray:
    return amps * _phase_columns(_diagonal_levels(basis, p, 2), theta, 1.0)


def beamsplit_columns(basis: FockBasis, amps: np.ndarray, p: int, q: int,
                      theta: np.ndarray, phi: np.ndarray | None = None) -> np.ndarray:
    W, Wh, _, _ = _pair_spectrum(basis, p, q)
    phase = _phase_columns(_pair_levels(basis, p, q), theta, -1.0)
    if phi is None:
        return W @ (phase * (Wh @ amps))
    d = _phase_columns(_diagonal_levels(basis, q, 1), phi, 1.0)
    return d * (W @ (phase * (Wh @ (d.conj() * amps))))


def apply_gate_amplitudes(basis: FockBasis, amps: np.ndarray, gate: Gate) -> np.ndarray:
    if isinstance(gate, Kerr):
        return kerr_amplitudes(basis, amps, gate.p, gate.theta)
    if isinstance(gate, BeamSplitter):
        return beamsplit_amplitudes(basis, amps, gate.p, gate.q, gate.theta, gate.phi)
    if isinstance(gate, Rotation):
        return rotate_amplitudes(basis, amps, gate.p, gate.theta)
    raise TypeError(f"not a gate: {gate!r}")


# ---------------------------------------------------------------------------
# state-level API


def apply_rotation(state: StateVector, p: int, theta: float) -> StateVector:
    _check_modes(state.basis, p)
    return StateVector(state.basis, rotate_amplitudes(state.basis, state.amplitudes, p, theta))


def apply_kerr(state: StateVector, p: int, theta: float) -> StateVector:
    _check_modes(state.basis, p)
    return StateVector(state.basis, kerr_amplitudes(state.basis, state.amplitudes, p, theta))


def apply_beamsplitter(state: StateVector, p: int, q: int, theta: float, phi: float = 0.0) -> StateVector:
    _check_modes(state.basis, p, q)
    return StateVector(state.basis,
                       beamsplit_amplitudes(state.basis, state.amplitudes, p, q, theta, phi))


def check_circuit(basis: FockBasis, circuit: Iterable[Gate]) -> None:
    for gate in circuit:
        _check_modes(basis, *gate.modes)


def apply_circuit(state: StateVector, circuit: Sequence[Gate]) -> StateVector:
    """Apply gates left to right."""
    basis = state.basis
    check_circuit(basis, circuit)
    amps = state.amplitudes
    for gate in circuit:
        amps = apply_gate_amplitudes(basis, amps, gate)
    return StateVector(basis, amps)


def inverse_circuit(circuit: Sequence[Gate]) -> list[Gate]:
    return [g.inverse() for g in reversed(circuit)]


def circuit_to_json(circuit: Sequence[Gate]) -> str:
    items = []
    for g in circuit:
        item = {"gate": _TAGS[type(g)], "modes": list(g.modes), "theta": float(g.theta)}
        if isinstance(g, BeamSplitter):
            item["phi"] = float(g.phi)
        items.append(item)
    return json.dumps(items)


def circuit_from_json(text: str) -> list[Gate]:
    gates: list[Gate] = []
    for item in json.loads(text):
        tag, modes, theta = item["gate"], item["modes"], float(item["theta"])
        if tag == "bs":
            gates.append(BeamSplitter(modes[0], modes[1], theta, float(item.get("phi", 0.0))))
        elif tag == "rot":
            gates.append(Rotation(modes[0], theta))
        elif tag == "kerr":
            gates.append(Kerr(modes[0], theta))
        else:
            raise ValueError(f"unknown gate tag {tag!r}")
    return gates
