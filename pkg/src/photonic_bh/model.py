"""Attractive Bose-Hubbard model: Hamiltonian assembly, exact diagonalization
and ground-state structure indicators (IPR, single-mode entropy)."""

from __future__ import annotations

import json
from dataclasses import dataclass, field
from typing import Optional, Sequence

import numpy as np
import scipy.sparse as sp
from scipy.sparse.linalg import ArpackNoConvergence, eigsh

from .fock import FockBasis, enumerate_basis
from .state import StateVector

DENSE_LIMIT = 512
SOLVER_TOL = 1e-10
DEGENERACY_RTOL = 1e-12


class SolverError(RuntimeError):
    def __init__(self, message: str, residual: float = float("nan")):
        super().__init__(message)
        self.residual = residual


def dimer_edges() -> list[tuple[int, int]]:
    return [(0, 1)]


def ring_edges(n_sites: int) -> list[tuple[int, int]]:
    """Periodic chain ``(0,1), (1,2), ..., (S-1,0)``; a 2-site ring is the dimer."""
    if n_sites < 2:
        raise ValueError("a ring needs at least two sites")
    if n_sites == 2:
        return dimer_edges()
    return [(p, (p + 1) % n_sites) for p in range(n_sites)]


@dataclass(frozen=True)
class BHModel:
    """Extended attractive Bose-Hubbard model.

    ``U`` is the attraction magnitude: the on-site term is ``-(U/2) n(n-1)``.
    ``mu`` adds ``sum_p mu_p n_p`` and ``V`` adds ``sum_{p,q} V_pq n_p n_q``
    (full double sum over ordered pairs).
    """

    n_sites: int
    n_bosons: int
    J: float
    U: float
    edges: tuple[tuple[int, int], ...]
    mu: Optional[tuple[float, ...]] = None
    V: Optional[np.ndarray] = field(default=None, compare=False)

    def __post_init__(self):
        edges = tuple((int(p), int(q)) for p, q in self.edges)
        seen = set()
        for p, q in edges:
            if p == q:
                raise ValueError(f"self-pair edge ({p}, {q})")
            if not (0 <= p < self.n_sites and 0 <= q < self.n_sites):
                raise ValueError(f"edge ({p}, {q}) references a mode outside 0..{self.n_sites - 1}")
            key = frozenset((p, q))
            if key in seen:
                raise ValueError(f"duplicate edge ({p}, {q})")
            seen.add(key)
        object.__setattr__(self, "edges", edges)
        if self.J <= 0:
            raise ValueError("J must be positive")
        if self.U < 0:
            raise ValueError("U is the attraction magnitude and must be >= 0")
        if self.mu is not None:
            mu = tuple(float(x) for x in self.mu)
            if len(mu) != self.n_sites:
                raise ValueError(f"mu needs {self.n_sites} entries")
            object.__setattr__(self, "mu", mu)
        if self.V is not None:
            V = np.array(self.V, dtype=float)
            if V.shape != (self.n_sites, self.n_sites):
                raise ValueError(f"V must be {self.n_sites}x{self.n_sites}")
            if not np.allclose(V, V.T, rtol=0, atol=0):
                raise ValueError("V must be symmetric")
            V.setflags(write=False)
            object.__setattr__(self, "V", V)

    @property
    def lam(self) -> float:
        """Correlation strength N_B U / J."""
        return self.n_bosons * self.U / self.J

    @classmethod
    def from_lambda(cls, n_sites: int, n_bosons: int, lam: float, J: float = 1.0,
                    edges: Optional[Sequence[tuple[int, int]]] = None, **extra) -> "BHModel":
        if n_bosons < 1:
            raise ValueError("lambda parameterization needs n_bosons >= 1")
        if edges is None:
            edges = ring_edges(n_sites)
        return cls(n_sites, n_bosons, J, lam * J / n_bosons, tuple(edges), **extra)

    def basis(self) -> FockBasis:
        return enumerate_basis(self.n_sites, self.n_bosons)


def diagonal_energies(model: BHModel, occupations: np.ndarray) -> np.ndarray:
    """Diagonal (number-operator) part of the Hamiltonian for each row of ``occupations``."""
    occ = np.asarray(occupations, dtype=float)
    diag = -0.5 * model.U * np.sum(occ * (occ - 1.0), axis=1)
    if model.mu is not None:
        diag = diag + occ @ np.asarray(model.mu)
    if model.V is not None:
        diag = diag + np.einsum("ip,pq,iq->i", occ, model.V, occ)
    return diag


@dataclass(frozen=True, eq=False)
class SparseHamiltonian:
    basis: FockBasis
    matrix: sp.csr_matrix

    @property
    def dim(self) -> int:
        return self.basis.dim

    def entries(self) -> list[tuple[int, int, float]]:
        coo = self.matrix.tocoo()
        return [(int(r), int(c), float(v)) for r, c, v in zip(coo.row, coo.col, coo.data)]

    def toarray(self) -> np.ndarray:
        return self.matrix.toarray()

    def expectation(self, amplitudes: np.ndarray) -> float:
        return float(np.real(np.vdot(amplitudes, self.matrix @ amplitudes)))


def build_hamiltonian(model: BHModel, basis: Optional[FockBasis] = None) -> SparseHamiltonian:
    if basis is None:
        basis = model.basis()
    if (basis.n_sites, basis.n_bosons) != (model.n_sites, model.n_bosons):
        raise ValueError("basis does not match the model's sites/bosons")
    occ = basis.occupations
    dim = basis.dim
    rows, cols, vals = [], [], []
    for p, q in model.edges:
        # b_p^dag b_q: move one boson q -> p
        src = np.nonzero(occ[:, q] > 0)[0]
        moved = occ[src].copy()
        amp = -model.J * np.sqrt((moved[:, p] + 1.0) * moved[:, q])
        moved[:, p] += 1
        moved[:, q] -= 1
        dst = basis.indices_of(moved)
        rows.append(dst)
        cols.append(src)
        vals.append(amp)
    if rows:
        r = np.concatenate(rows)
        c = np.concatenate(cols)
        v = np.concatenate(vals)
        hop = sp.coo_matrix((v, (r, c)), shape=(dim, dim)).tocsr()
        hop = hop + hop.T
    else:
        hop = sp.csr_matrix((dim, dim))
    h = (hop + sp.diags(diagonal_energies(model, occ))).tocsr()
    h.sum_duplicates()
    h.eliminate_zeros()
    return SparseHamiltonian(basis, h)


@dataclass(frozen=True, eq=False)
class GroundState:
    """Lowest eigenpair. ``partner`` is set when the first excited level lies
    within the degeneracy tolerance of ``energy``."""

    energy: float
    vector: StateVector
    gap: float
    partner: Optional[StateVector] = None
    residual: float = 0.0

    @property
    def degenerate(self) -> bool:
        return self.partner is not None


def _fix_phase(vec: np.ndarray) -> np.ndarray:
    mags = np.abs(vec)
    k = int(np.argmax(mags >= mags.max() * (1 - 1e-9)))
    return vec * (np.conj(vec[k]) / mags[k])


def ground_state(h: SparseHamiltonian, tol: float = SOLVER_TOL) -> GroundState:
    dim = h.dim
    if dim == 1:
        vals = h.toarray().real.ravel()
        vecs = np.ones((1, 1))
    elif dim <= DENSE_LIMIT:
        vals, vecs = np.linalg.eigh(h.toarray())
    else:
        try:
            vals, vecs = eigsh(h.matrix, k=2, which="SA", tol=tol * 1e-2, maxiter=50 * dim)
        except ArpackNoConvergence as exc:
            raise SolverError("Lanczos solver did not converge") from exc
        order = np.argsort(vals)
        vals, vecs = vals[order], vecs[:, order]
    e0 = float(vals[0])
    v0 = _fix_phase(vecs[:, 0].astype(np.complex128))
    v0 /= np.linalg.norm(v0)
    residual = float(np.linalg.norm(h.matrix @ v0 - e0 * v0))
    if residual > tol * max(1.0, abs(e0)):
        raise SolverError(f"ground-state residual {residual:.3e} above tolerance", residual)
    gap = float(vals[1] - vals[0]) if len(vals) > 1 else float("inf")
    partner = None
    if gap < DEGENERACY_RTOL * abs(e0):
        v1 = _fix_phase(vecs[:, 1].astype(np.complex128))
        partner = StateVector(h.basis, v1 / np.linalg.norm(v1))
    return GroundState(e0, StateVector(h.basis, v0), gap, partner, residual)


def solve(model: BHModel) -> GroundState:
    return ground_state(build_hamiltonian(model))


def ipr(state: StateVector) -> float:
    probs = state.probabilities
    total = probs.sum()
    if total == 0.0:
        raise ValueError("IPR of the zero vector is undefined")
    probs = probs / total
    return float(1.0 / np.sum(probs**2))


def mode_occupation_spectrum(state: StateVector, p: int) -> np.ndarray:
    """Eigenvalues ``lambda_k`` (k = 0..N_B) of the reduced density matrix of mode ``p``.

    For a fixed-N pure state the one-mode reduced density matrix is diagonal
    in the number basis, so the eigenvalues are the marginal occupation
    probabilities.
    """
    basis = state.basis
    if not 0 <= p < basis.n_sites:
        raise ValueError(f"mode {p} out of range 0..{basis.n_sites - 1}")
    return np.bincount(basis.occupations[:, p], weights=state.probabilities,
                       minlength=basis.n_bosons + 1)


def entropy(state: StateVector, p: int = 0) -> float:
    """Single-mode von Neumann entropy (natural log, 0 log 0 = 0)."""
    lam = mode_occupation_spectrum(state, p)
    lam = lam[lam > 0]
    return float(-np.sum(lam * np.log(lam)))


def ground_state_to_json(gs: GroundState, **extra) -> str:
    basis = gs.vector.basis
    doc = dict(extra)
    doc["energy"] = gs.energy
    doc["amplitudes"] = [
        [list(cfg), float(a.real), float(a.imag)]
        for cfg, a in zip(basis.configs, gs.vector.amplitudes)
    ]
    return json.dumps(doc, indent=2)


def model_from_config(cfg: dict) -> BHModel:
    """Model from a config mapping.

    Keys: ``n_sites``, ``n_bosons``, ``J`` (default 1), exactly one of ``U``
    or ``lambda``, ``topology`` (``"dimer"``, ``"ring"`` or a list of edge
    pairs), optional ``mu`` and ``V``.
    """
    allowed = {"n_sites", "n_bosons", "J", "U", "lambda", "topology", "mu", "V"}
    unknown = set(cfg) - allowed
    if unknown:
        raise ValueError(f"unknown model keys: {sorted(unknown)}")
    for key in ("n_sites", "n_bosons"):
        if key not in cfg:
            raise ValueError(f"model config missing '{key}'")
    n_sites, n_bosons = int(cfg["n_sites"]), int(cfg["n_bosons"])
    J = float(cfg.get("J", 1.0))
    if ("U" in cfg) == ("lambda" in cfg):
        raise ValueError("model config needs exactly one of 'U' or 'lambda'")
    topology = cfg.get("topology", "ring")
    if topology == "dimer":
        if n_sites != 2:
            raise ValueError("topology 'dimer' requires n_sites = 2")
        edges = dimer_edges()
    elif topology == "ring":
        edges = ring_edges(n_sites)
    elif isinstance(topology, list):
        edges = [tuple(e) for e in topology]
    else:
        raise ValueError(f"unknown topology {topology!r}")
    if "lambda" in cfg:
        if n_bosons < 1:
            raise ValueError("'lambda' needs n_bosons >= 1")
        U = float(cfg["lambda"]) * J / n_bosons
    else:
        U = float(cfg["U"])
    return BHModel(n_sites, n_bosons, J, U, tuple(edges), mu=cfg.get("mu"), V=cfg.get("V"))
