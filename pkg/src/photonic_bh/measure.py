"""Photon-counting estimation of Bose-Hubbard energies.

Diagonal terms (on-site interaction, chemical potential, density-density)
come from a single unrotated setting. Each hopping term ``b_p^dag b_q + h.c.``
is read out after a 50/50 beam splitter ``B_pq(pi/4, 0)``, which maps it to
``n_q - n_p``. Edges that share a mode need separate settings; disjoint edges
can share one.
"""

from __future__ import annotations

import io
import json
from dataclasses import dataclass, field
from typing import Optional, Sequence

import numpy as np

from .fock import FockBasis
from .gates import beamsplit_amplitudes
from .model import BHModel, diagonal_energies
from .state import StateVector

HALF_MIXER = np.pi / 4


class PlanError(ValueError):
    pass


def as_generator(rng) -> np.random.Generator:
    if isinstance(rng, np.random.Generator):
        return rng
    return np.random.default_rng(rng)


@dataclass(frozen=True, eq=False)
class CountsHistogram:
    """Counts per basis configuration, stored densely in basis order."""

    basis: FockBasis
    counts: np.ndarray
    shots: int

    def __post_init__(self):
        if int(self.counts.sum()) != self.shots:
            raise ValueError("counts do not sum to shots")

    def as_dict(self) -> dict[tuple[int, ...], int]:
        nz = np.nonzero(self.counts)[0]
        return {self.basis.config_of(int(i)): int(self.counts[i]) for i in nz}

    def frequencies(self) -> np.ndarray:
        return self.counts / self.shots

    def sample_mean(self, values: np.ndarray) -> float:
        return float(self.counts @ values / self.shots)

    def marginal(self, p: int) -> np.ndarray:
        """Counts of ``n_p = 0..N_B`` (what a single-mode detector would see)."""
        return np.bincount(self.basis.occupations[:, p], weights=self.counts,
                           minlength=self.basis.n_bosons + 1).astype(np.int64)

    def to_csv(self) -> str:
        buf = io.StringIO()
        buf.write(",".join(f"n_{p}" for p in range(self.basis.n_sites)) + ",count\n")
        for config, c in self.as_dict().items():
            buf.write(",".join(str(n) for n in config) + f",{c}\n")
        return buf.getvalue()


def sample_counts(state: StateVector, shots: int, rng) -> CountsHistogram:
    """Born-rule photon-number-resolved samples of ``state``."""
    if shots <= 0:
        raise ValueError("shots must be positive")
    probs = state.probabilities
    probs = probs / probs.sum()
    counts = as_generator(rng).multinomial(shots, probs)
    return CountsHistogram(state.basis, counts.astype(np.int64), int(shots))


def _weighted_var(counts: np.ndarray, values: np.ndarray, shots: int) -> float:
    if shots < 2:
        return 0.0
    mean = counts @ values / shots
    return float(counts @ (values - mean) ** 2 / (shots - 1))


def estimate_interaction(hist: CountsHistogram, U: float) -> np.ndarray:
    """Per-site ``-(U/2) <n_p (n_p - 1)>`` from the sample mean of the per-shot
    value ``n_p (n_p - 1)``. This equals ``Var(n_p) + <n_p>^2 - <n_p>`` in
    expectation without the small-sample bias of the plug-in variance."""
    occ = hist.basis.occupations.astype(float)
    return -0.5 * U * (hist.counts @ (occ * (occ - 1.0))) / hist.shots


def number_moments(hist: CountsHistogram) -> tuple[np.ndarray, np.ndarray]:
    """Sample means ``<n_p>`` and the second-moment matrix ``<n_p n_q>``."""
    occ = hist.basis.occupations.astype(float)
    w = hist.counts / hist.shots
    return w @ occ, np.einsum("i,ip,iq->pq", w, occ, occ)


def number_covariance(hist: CountsHistogram) -> np.ndarray:
    mean, second = number_moments(hist)
    return second - np.outer(mean, mean)


def estimate_extended_terms(hist: CountsHistogram, mu: Optional[Sequence[float]] = None,
                            V: Optional[np.ndarray] = None) -> tuple[Optional[float], Optional[float]]:
    """``(sum_p mu_p <n_p>, sum_{p,q} V_pq <n_p n_q>)``; None for absent terms."""
    mean, second = number_moments(hist)
    chem = None if mu is None else float(np.dot(mu, mean))
    dip = None if V is None else float(np.sum(np.asarray(V) * second))
    return chem, dip


@dataclass(frozen=True)
class EdgeEstimate:
    edge: tuple[int, int]
    expectation: float  # <b_p^dag b_q + b_q^dag b_p>
    std_error: float
    J: float = 1.0

    @property
    def energy(self) -> float:
        return -self.J * self.expectation


def rotate_for_edges(state_amps: np.ndarray, basis: FockBasis, edges: Sequence[tuple[int, int]]) -> np.ndarray:
    amps = state_amps
    for p, q in edges:
        amps = beamsplit_amplitudes(basis, amps, p, q, HALF_MIXER, 0.0)
    return amps


def estimate_hopping(state: StateVector, edge: tuple[int, int], shots: int, rng,
                     J: float = 1.0) -> EdgeEstimate:
    """Hopping expectation of one edge from ``n_q - n_p`` after ``B_pq(pi/4, 0)``."""
    p, q = edge
    basis = state.basis
    rotated = StateVector(basis, rotate_for_edges(state.amplitudes, basis, [edge]))
    hist = sample_counts(rotated, shots, rng)
    diff = (basis.occupations[:, q] - basis.occupations[:, p]).astype(float)
    mean = hist.sample_mean(diff)
    se = np.sqrt(_weighted_var(hist.counts, diff, shots) / shots)
    return EdgeEstimate((p, q), mean, float(se), J)


def exact_hopping(state: StateVector, edge: tuple[int, int]) -> float:
    """Infinite-shot limit of :func:`estimate_hopping` (expectation only)."""
    p, q = edge
    basis = state.basis
    rotated = rotate_for_edges(state.amplitudes, basis, [edge])
    diff = (basis.occupations[:, q] - basis.occupations[:, p]).astype(float)
    return float(np.abs(rotated) ** 2 @ diff)


@dataclass(frozen=True)
class MeasurementGroup:
    """One measurement setting: beam splitters on ``edges`` (none for the
    unrotated setting), then photon counting, repeated ``shots`` times."""

    edges: tuple[tuple[int, int], ...]
    shots: int


@dataclass(frozen=True)
class ShotPlan:
    total_shots: int
    groups: tuple[MeasurementGroup, ...]

    def __post_init__(self):
        if sum(g.shots for g in self.groups) != self.total_shots:
            raise PlanError("group shots do not sum to total_shots")
        if any(g.shots < 0 for g in self.groups):
            raise PlanError("negative shot share")

    def validate(self, model: BHModel) -> None:
        unrotated = [g for g in self.groups if not g.edges]
        if len(unrotated) != 1:
            raise PlanError("plan needs exactly one unrotated setting")
        seen: list[frozenset] = []
        for g in self.groups:
            modes = [m for e in g.edges for m in e]
            if len(set(modes)) != len(modes):
                raise PlanError(f"edges sharing a mode in one setting: {g.edges}")
            seen.extend(frozenset(e) for e in g.edges)
        wanted = [frozenset(e) for e in model.edges]
        if sorted(map(sorted, seen)) != sorted(map(sorted, wanted)):
            raise PlanError("plan does not cover every hopping term exactly once")
        if any(g.shots == 0 for g in self.groups):
            raise PlanError("a setting received no shots")


def _split(total: int, parts: int) -> list[int]:
    base, extra = divmod(total, parts)
    return [base + (1 if i < extra else 0) for i in range(parts)]


def default_plan(model: BHModel, total_shots: int) -> ShotPlan:
    """One unrotated setting plus one setting per edge, equal split."""
    settings: list[tuple] = [()] + [(tuple(e),) for e in model.edges]
    shares = _split(total_shots, len(settings))
    return ShotPlan(total_shots, tuple(MeasurementGroup(s, n) for s, n in zip(settings, shares)))


def colored_plan(model: BHModel, total_shots: int) -> ShotPlan:
    """Greedy edge colouring: mode-disjoint edges share one rotated setting."""
    colors: list[list[tuple[int, int]]] = []
    for e in model.edges:
        for group in colors:
            if not any(set(e) & set(g) for g in group):
                group.append(tuple(e))
                break
        else:
            colors.append([tuple(e)])
    settings: list[tuple] = [()] + [tuple(c) for c in colors]
    shares = _split(total_shots, len(settings))
    return ShotPlan(total_shots, tuple(MeasurementGroup(s, n) for s, n in zip(settings, shares)))


@dataclass
class EnergyEstimate:
    value: float
    std_error: float
    hopping: dict = field(default_factory=dict)  # edge -> energy contribution
    hopping_std: dict = field(default_factory=dict)
    interaction: np.ndarray = field(default_factory=lambda: np.zeros(0))
    chemical: Optional[float] = None
    dipole: Optional[float] = None
    shots: int = 0

    def breakdown_total(self) -> float:
        total = sum(self.hopping.values()) + float(np.sum(self.interaction))
        total += self.chemical or 0.0
        total += self.dipole or 0.0
        return total

    def to_json(self, **extra) -> str:
        doc = dict(extra)
        doc.update(
            value=self.value,
            std_error=self.std_error,
            shots=self.shots,
            hopping=[{"edge": list(e), "value": v, "std_error": self.hopping_std.get(e, 0.0)}
                     for e, v in self.hopping.items()],
            interaction=[float(x) for x in self.interaction],
            chemical=self.chemical,
            dipole=self.dipole,
        )
        return json.dumps(doc, indent=2)


def estimate_energy(state: StateVector, model: BHModel, plan: Optional[ShotPlan] = None,
                    rng=None, exact: bool = False) -> EnergyEstimate:
    """Energy of ``state`` from photon counting under ``plan``.

    With ``exact=True`` every sample mean is replaced by its Born-rule
    expectation (infinite-shot limit) and ``plan``/``rng`` are not needed.
    """
    basis = state.basis
    occ = basis.occupations.astype(float)
    if exact:
        groups = [MeasurementGroup((), 0)] + [MeasurementGroup((tuple(e),), 0) for e in model.edges]
        streams = [None] * len(groups)
    else:
        if plan is None:
            raise PlanError("sampled estimation needs a shot plan")
        plan.validate(model)
        groups = list(plan.groups)
        streams = as_generator(rng).spawn(len(groups))

    est = EnergyEstimate(0.0, 0.0, shots=0 if exact else plan.total_shots)
    var = 0.0
    for group, stream in zip(groups, streams):
        amps = rotate_for_edges(state.amplitudes, basis, group.edges)
        probs = np.abs(amps) ** 2
        if exact:
            weights, shots = probs / probs.sum(), None
        else:
            hist = sample_counts(StateVector(basis, amps), group.shots, stream)
            weights, shots = hist.counts / group.shots, group.shots
        if not group.edges:
            est.interaction = -0.5 * model.U * (weights @ (occ * (occ - 1.0)))
            if model.mu is not None:
                est.chemical = float(weights @ (occ @ np.asarray(model.mu)))
            if model.V is not None:
                est.dipole = float(np.einsum("i,ip,pq,iq->", weights, occ, model.V, occ))
            if shots:
                var += _weighted_var(hist.counts, diagonal_energies(model, basis.occupations), shots) / shots
            continue
        per_shot = np.zeros(basis.dim)
        for p, q in group.edges:
            diff = occ[:, q] - occ[:, p]
            est.hopping[(p, q)] = -model.J * float(weights @ diff)
            est.hopping_std[(p, q)] = (
                model.J * np.sqrt(_weighted_var(hist.counts, diff, shots) / shots) if shots else 0.0
            )
            per_shot -= model.J * diff
        if shots:
            var += _weighted_var(hist.counts, per_shot, shots) / shots
    est.value = est.breakdown_total()
    est.std_error = float(np.sqrt(var))
    return est
