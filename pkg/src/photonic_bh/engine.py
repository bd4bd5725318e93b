"""Experiment drivers: infidelity-driven VQA, ideal VQE, sampled VQE and the
layer scan."""

from __future__ import annotations

import enum
import time
from dataclasses import dataclass, field, replace
from typing import Callable, Optional, Sequence

import numpy as np

from .ansatz import AnsatzSpec, CircuitTemplate, build
from .fock import FockBasis
from .measure import ShotPlan, colored_plan, default_plan, estimate_energy
from .model import BHModel, GroundState, build_hamiltonian, ground_state
from .optimize import Kind, OptimizationTrace, OptimizerConfig, minimize
from .state import StateVector, fock_state

DIMER_LAMBDAS = (0.01, 3.0, 5.0, 10.0)
# representative superfluid / crossover / cat values for the 3- and 4-site rings
RING_LAMBDAS = (0.01, 5.0, 10.0)


class CostKind(str, enum.Enum):
    INFIDELITY = "infidelity"
    ENERGY_EXACT = "energy_exact"
    ENERGY_SAMPLED = "energy_sampled"


class InitKind(str, enum.Enum):
    MONOMODAL = "monomodal"
    BIMODAL = "bimodal"
    EXPLICIT = "explicit"


@dataclass(frozen=True)
class InitialStatePrep:
    kind: InitKind = InitKind.MONOMODAL
    config: Optional[tuple[int, ...]] = None

    def __post_init__(self):
        object.__setattr__(self, "kind", InitKind(self.kind))
        if self.kind is InitKind.EXPLICIT and self.config is None:
            raise ValueError("explicit initial state needs a configuration")
        if self.config is not None:
            object.__setattr__(self, "config", tuple(int(n) for n in self.config))

    def occupations(self, n_sites: int, n_bosons: int) -> tuple[int, ...]:
        return initial_config(self.kind, n_sites, n_bosons, self.config)

    def prepare(self, basis: FockBasis) -> StateVector:
        return fock_state(basis, self.occupations(basis.n_sites, basis.n_bosons))


def bimodal_modes(n_sites: int) -> tuple[int, int]:
    """Modes receiving the two halves: (0, 1) on the dimer, (0, 2) otherwise."""
    return (0, 1) if n_sites == 2 else (0, 2)


def initial_config(kind, n_sites: int, n_bosons: int,
                   explicit: Optional[Sequence[int]] = None) -> tuple[int, ...]:
    kind = InitKind(kind)
    occ = [0] * n_sites
    if kind is InitKind.MONOMODAL:
        occ[0] = n_bosons
    elif kind is InitKind.BIMODAL:
        if n_sites < 2:
            raise ValueError("bimodal state needs two modes")
        a, b = bimodal_modes(n_sites)
        occ[a] = (n_bosons + 1) // 2
        occ[b] = n_bosons - occ[a]
    else:
        occ = [int(n) for n in explicit]
        if len(occ) != n_sites or sum(occ) != n_bosons:
            raise ValueError(f"explicit configuration {tuple(occ)} does not fit "
                             f"{n_bosons} bosons on {n_sites} modes")
    return tuple(occ)


def fidelity(a: StateVector, b: StateVector) -> float:
    """``|<a|b>|^2``."""
    if a.basis is not b.basis and (a.basis.n_sites, a.basis.n_bosons) != (b.basis.n_sites, b.basis.n_bosons):
        raise ValueError("states live on different bases")
    return float(abs(np.vdot(a.amplitudes, b.amplitudes)) ** 2)


def ground_fidelity(gs: GroundState, state: StateVector) -> float:
    """Fidelity with the ground state, or with the two-dimensional ground
    subspace when the lowest level is (numerically) degenerate."""
    f = fidelity(gs.vector, state)
    if gs.partner is not None:
        f += fidelity(gs.partner, state)
    return min(1.0, f)


@dataclass(frozen=True)
class ExperimentSpec:
    model: BHModel
    ansatz: AnsatzSpec
    init: InitialStatePrep = InitialStatePrep()
    cost: CostKind = CostKind.INFIDELITY
    optimizer: OptimizerConfig = OptimizerConfig()
    restarts: int = 5
    threshold: float = 0.99
    seed: int = 0
    shots: Optional[int] = None  # per cost evaluation, sampled runs only
    plan: str = "default"  # or "colored"
    infinite_shots: bool = False  # sampled runs: use exact expectations
    stop_on_success: bool = False

    def __post_init__(self):
        object.__setattr__(self, "cost", CostKind(self.cost))
        if self.ansatz.n_sites != self.model.n_sites:
            raise ValueError("ansatz and model disagree on the number of modes")
        if self.cost is CostKind.ENERGY_SAMPLED and not self.infinite_shots:
            if self.shots is None or self.shots < 1:
                raise ValueError("sampled energy cost needs a positive shot count")
        if self.restarts < 1:
            raise ValueError("restarts must be >= 1")
        if not 0 < self.threshold <= 1:
            raise ValueError("threshold must be in (0, 1]")

    def shot_plan(self) -> Optional[ShotPlan]:
        if self.cost is not CostKind.ENERGY_SAMPLED or self.infinite_shots:
            return None
        make = colored_plan if self.plan == "colored" else default_plan
        return make(self.model, self.shots)


@dataclass
class RunResult:
    best_params: np.ndarray
    fidelity: float
    energy: float
    e0: float
    trace: OptimizationTrace
    seed: int
    wall_time: float
    restart_fidelities: list = field(default_factory=list)
    restart_seeds: list = field(default_factory=list)
    shots_per_evaluation: Optional[int] = None
    gate_count: int = 0

    @property
    def delta_e(self) -> float:
        return self.energy - self.e0

    @property
    def infidelity(self) -> float:
        return 1.0 - self.fidelity

    @property
    def total_shots(self) -> int:
        return (self.shots_per_evaluation or 0) * self.trace.n_evaluations

    def to_dict(self) -> dict:
        return {
            "best_params": [float(x) for x in self.best_params],
            "fidelity": self.fidelity,
            "infidelity": self.infidelity,
            "energy": self.energy,
            "e0": self.e0,
            "delta_e": self.delta_e,
            "evaluations": self.trace.n_evaluations,
            "best_cost": self.trace.best_cost,
            "terminated_reason": self.trace.terminated_reason,
            "restart_fidelities": self.restart_fidelities,
            "restart_seeds": self.restart_seeds,
            "shots_per_evaluation": self.shots_per_evaluation,
            "total_shots": self.total_shots,
            "gate_count": self.gate_count,
            "seed": self.seed,
            "wall_time": self.wall_time,
        }


def restart_seed(seed: int, k: int) -> int:
    return int(np.random.SeedSequence([seed, k]).generate_state(1)[0])


class _Problem:
    """Everything a cost function needs, prepared once per spec."""

    def __init__(self, spec: ExperimentSpec, psi_ini: Optional[StateVector] = None):
        self.spec = spec
        self.basis = spec.model.basis()
        self.h = build_hamiltonian(spec.model, self.basis)
        self.gs = ground_state(self.h)
        self.template: CircuitTemplate = build(spec.ansatz)
        self.psi_ini = psi_ini if psi_ini is not None else spec.init.prepare(self.basis)
        self.h_dense = self.h.toarray() if self.basis.dim <= 512 else None
        targets = [self.gs.vector.amplitudes]
        if self.gs.partner is not None:
            targets.append(self.gs.partner.amplitudes)
        self.targets = np.array(targets).conj()

    def prepare(self, params: np.ndarray) -> np.ndarray:
        return self.template.run(self.basis, self.psi_ini.amplitudes, params)

    def state(self, params: np.ndarray) -> StateVector:
        return StateVector(self.basis, self.prepare(params))

    def infidelity(self, params: np.ndarray) -> float:
        overlaps = self.targets @ self.prepare(params)
        return 1.0 - float(np.sum(np.abs(overlaps) ** 2))

    def infidelity_batch(self, params: np.ndarray) -> np.ndarray:
        cols = self.template.run_batch(self.basis, self.psi_ini.amplitudes, params)
        return 1.0 - np.sum(np.abs(self.targets @ cols) ** 2, axis=0)

    def energy_batch(self, params: np.ndarray) -> np.ndarray:
        cols = self.template.run_batch(self.basis, self.psi_ini.amplitudes, params)
        hc = self.h_dense @ cols if self.h_dense is not None else self.h.matrix @ cols
        return np.real(np.sum(cols.conj() * hc, axis=0))

    def energy(self, params: np.ndarray) -> float:
        amps = self.prepare(params)
        if self.h_dense is not None:
            return float(np.real(np.vdot(amps, self.h_dense @ amps)))
        return self.h.expectation(amps)

    def sampled_cost(self, rng: np.random.Generator) -> Callable[[np.ndarray], float]:
        plan = self.spec.shot_plan()
        model = self.spec.model
        exact = self.spec.infinite_shots

        def cost(params):
            return estimate_energy(self.state(params), model, plan, rng, exact=exact).value

        return cost

    def grade(self, params: np.ndarray) -> tuple[float, float]:
        state = self.state(params)
        return ground_fidelity(self.gs, state), self.energy(params)


def _with_batch(single: Callable, batch: Callable) -> Callable:
    """Cost callable that also exposes a row-batched ``.batch``."""
    def cost(params):
        return single(params)
    cost.batch = batch
    return cost


def _run(spec: ExperimentSpec, expected: CostKind, psi_ini: Optional[StateVector] = None) -> RunResult:
    if spec.cost is not expected:
        raise ValueError(f"spec cost is {spec.cost.value}, expected {expected.value}")
    start = time.perf_counter()
    prob = _Problem(spec, psi_ini)
    dim = prob.template.n_params
    best = None
    fids, seeds = [], []
    for k in range(spec.restarts):
        seed_k = restart_seed(spec.seed, k)
        opt = replace(spec.optimizer, seed=seed_k)
        if dim == 0:
            trace = OptimizationTrace(best_params=np.zeros(0), terminated_reason="no_parameters")
            params = trace.best_params
        else:
            if spec.cost is CostKind.INFIDELITY:
                cost = _with_batch(prob.infidelity, prob.infidelity_batch)
            elif spec.cost is CostKind.ENERGY_EXACT:
                cost = _with_batch(prob.energy, prob.energy_batch)
            else:
                cost = prob.sampled_cost(np.random.default_rng([seed_k, 1]))
            trace = minimize(cost, dim, opt)
            # the distribution mean is the noise-robust estimate of the optimum
            if spec.cost is CostKind.ENERGY_SAMPLED and trace.final_mean is not None:
                params = trace.final_mean
            else:
                params = trace.best_params
        fid, energy = prob.grade(params)
        if dim == 0:
            trace.best_cost = 1.0 - fid if spec.cost is CostKind.INFIDELITY else energy
            trace.costs.append(trace.best_cost)
        fids.append(fid)
        seeds.append(seed_k)
        key = -fid if spec.cost is CostKind.INFIDELITY else energy
        if best is None or key < best[0]:
            best = (key, params, fid, energy, trace)
        if spec.stop_on_success and fid >= spec.threshold:
            break
    _, params, fid, energy, trace = best
    return RunResult(
        best_params=np.asarray(params), fidelity=fid, energy=energy, e0=prob.gs.energy,
        trace=trace, seed=spec.seed, wall_time=time.perf_counter() - start,
        restart_fidelities=fids, restart_seeds=seeds,
        shots_per_evaluation=spec.shots if spec.cost is CostKind.ENERGY_SAMPLED else None,
        gate_count=spec.ansatz.gate_count,
    )


def run_vqa_infidelity(spec: ExperimentSpec, psi_ini: Optional[StateVector] = None) -> RunResult:
    """Minimize ``1 - |<Psi_0|U(theta)|Psi_ini>|^2``; best over restarts."""
    return _run(spec, CostKind.INFIDELITY, psi_ini)


def run_vqe_exact(spec: ExperimentSpec, psi_ini: Optional[StateVector] = None) -> RunResult:
    """Minimize the exact energy of the simulated trial state."""
    return _run(spec, CostKind.ENERGY_EXACT, psi_ini)


def run_vqe_sampled(spec: ExperimentSpec, psi_ini: Optional[StateVector] = None) -> RunResult:
    """Minimize a freshly sampled energy estimate at every evaluation; the
    result is graded exactly at the final parameters."""
    return _run(spec, CostKind.ENERGY_SAMPLED, psi_ini)


@dataclass
class ScanResult:
    min_layers: Optional[int]  # None means not found within max_layers
    runs: dict = field(default_factory=dict)  # n_layers -> RunResult

    @property
    def found(self) -> bool:
        return self.min_layers is not None

    @property
    def gate_count(self) -> Optional[int]:
        if self.min_layers is None:
            return None
        return self.runs[self.min_layers].gate_count


def scan_layers(spec: ExperimentSpec, max_layers: int, start: int = 1) -> ScanResult:
    """Smallest layer count whose best-of-restarts infidelity run reaches
    ``spec.threshold``."""
    result = ScanResult(None)
    for n_layers in range(start, max_layers + 1):
        layered = replace(spec, ansatz=replace(spec.ansatz, n_layers=n_layers),
                          cost=CostKind.INFIDELITY, stop_on_success=True)
        run = run_vqa_infidelity(layered)
        result.runs[n_layers] = run
        if run.fidelity >= spec.threshold:
            result.min_layers = n_layers
            break
    return result
