"""Outer-loop optimizers: L-BFGS-B with central finite-difference gradients
for smooth costs, and CMA-ES for sampled (noisy) costs."""

from __future__ import annotations

import enum
import hashlib
import io
import math
from dataclasses import dataclass, field, asdict
from typing import Callable, Optional

import numpy as np
from scipy.optimize import minimize as scipy_minimize


class Kind(str, enum.Enum):
    QUASI_NEWTON = "quasi_newton"
    CMA_ES = "cma_es"


class OptimizationError(RuntimeError):
    pass


class _BudgetExhausted(Exception):
    pass


class _TargetReached(Exception):
    pass


@dataclass(frozen=True)
class OptimizerConfig:
    kind: Kind = Kind.QUASI_NEWTON
    max_evaluations: int = 20000
    init_range: float = 0.05
    fd_step: float = 1e-6
    sigma0: float = 0.05
    tolerance: float = 1e-12
    seed: int = 0
    max_iterations: Optional[int] = None  # quasi-Newton iterations; None = budget only
    popsize: Optional[int] = None
    target_cost: Optional[float] = None  # stop as soon as a cost <= target is seen

    def __post_init__(self):
        object.__setattr__(self, "kind", Kind(self.kind))
        if self.max_evaluations < 1:
            raise ValueError("max_evaluations must be positive")
        if self.init_range <= 0:
            raise ValueError("init_range must be positive")
        if self.fd_step <= 0 or self.sigma0 <= 0:
            raise ValueError("fd_step and sigma0 must be positive")
        if self.max_iterations is not None and self.max_iterations < 1:
            raise ValueError("max_iterations must be positive")

    def to_dict(self) -> dict:
        d = asdict(self)
        d["kind"] = self.kind.value
        return d

    @classmethod
    def from_dict(cls, d: dict) -> "OptimizerConfig":
        allowed = set(cls.__dataclass_fields__)
        unknown = set(d) - allowed
        if unknown:
            raise ValueError(f"unknown optimizer keys: {sorted(unknown)}")
        return cls(**d)


def _params_hash(x: np.ndarray) -> str:
    return hashlib.blake2b(np.ascontiguousarray(x, dtype=float).tobytes(), digest_size=8).hexdigest()


@dataclass
class OptimizationTrace:
    costs: list = field(default_factory=list)
    hashes: list = field(default_factory=list)
    best_params: Optional[np.ndarray] = None
    best_cost: float = math.inf
    terminated_reason: str = ""
    final_mean: Optional[np.ndarray] = None  # CMA-ES distribution mean at exit
    generations: int = 0

    @property
    def n_evaluations(self) -> int:
        return len(self.costs)

    def best_so_far(self) -> np.ndarray:
        return np.minimum.accumulate(np.asarray(self.costs, dtype=float))

    def to_csv(self) -> str:
        buf = io.StringIO()
        buf.write("evaluation,cost\n")
        for i, c in enumerate(self.costs):
            buf.write(f"{i},{c!r}\n")
        return buf.getvalue()


class _Counted:
    """Budget-enforcing, recording wrapper around the user cost."""

    def __init__(self, cost: Callable[[np.ndarray], float], budget: int, trace: OptimizationTrace,
                 target: Optional[float] = None):
        self.cost = cost
        self.budget = budget
        self.trace = trace
        self.target = target

    def __call__(self, x: np.ndarray) -> float:
        if self.trace.n_evaluations >= self.budget:
            raise _BudgetExhausted
        x = np.array(x, dtype=float)
        value = float(self.cost(x))
        self._record(x, value)
        return value


    def many(self, xs: np.ndarray) -> np.ndarray:
        """Evaluate rows of ``xs`` through ``cost.batch``; recorded and
        budgeted exactly as if called one by one in row order."""
        left = self.budget - self.trace.n_evaluations
        if left <= 0:
            raise _BudgetExhausted
        requested = len(xs)
        xs = np.array(xs[:left], dtype=float)
        values = np.asarray(self.cost.batch(xs), dtype=float)
        for x, value in zip(xs, values):
            self._record(x, float(value))
        if left < requested:
            raise _BudgetExhausted
        return values

    def _record(self, x: np.ndarray, value: float) -> None:
        if not math.isfinite(value):
            raise OptimizationError(
                f"non-finite cost {value} at evaluation {self.trace.n_evaluations} "
                f"(params hash {_params_hash(x)})")
        self.trace.costs.append(value)
        self.trace.hashes.append(_params_hash(x))
        if value < self.trace.best_cost:
            self.trace.best_cost = value
            self.trace.best_params = x
        if self.target is not None and value <= self.target:
            raise _TargetReached


def init_params(dim: int, init_range: float, seed) -> np.ndarray:
    """Uniform i.i.d. draws in ``[-init_range, +init_range]``."""
    if init_range <= 0:
        raise ValueError("init_range must be positive")
    return np.random.default_rng(seed).uniform(-init_range, init_range, size=dim)


def minimize(cost: Callable[[np.ndarray], float], dim: int, config: OptimizerConfig,
             x0: Optional[np.ndarray] = None) -> OptimizationTrace:
    """Minimize ``cost`` over ``R^dim``; calls ``cost`` at most ``config.max_evaluations`` times."""
    if dim < 1:
        raise ValueError("dim must be >= 1")
    if x0 is None:
        x0 = init_params(dim, config.init_range, config.seed)
    x0 = np.asarray(x0, dtype=float)
    if x0.shape != (dim,):
        raise ValueError(f"x0 has shape {x0.shape}, expected ({dim},)")
    trace = OptimizationTrace()
    counted = _Counted(cost, config.max_evaluations, trace, config.target_cost)
    try:
        if config.kind is Kind.QUASI_NEWTON:
            _lbfgs(counted, x0, config, trace)
        else:
            _cma_es(counted, x0, config, trace)
    except _BudgetExhausted:
        trace.terminated_reason = "budget"
    except _TargetReached:
        trace.terminated_reason = "target"
        trace.final_mean = trace.best_params.copy()
    return trace


def _lbfgs(f: _Counted, x0: np.ndarray, config: OptimizerConfig, trace: OptimizationTrace) -> None:
    h = config.fd_step
    dim = x0.size

    batched = hasattr(f.cost, "batch")

    def fun_and_grad(x):
        if batched:
            # rows x, x+h e_0, x-h e_0, x+h e_1, ... (same order as the loop below)
            steps = np.zeros((2 * dim + 1, dim))
            steps[1::2] = h * np.eye(dim)
            steps[2::2] = -h * np.eye(dim)
            values = f.many(x + steps)
            return values[0], (values[1::2] - values[2::2]) / (2 * h)
        value = f(x)
        grad = np.empty(dim)
        step = np.zeros(dim)
        for i in range(dim):
            step[i] = h
            grad[i] = (f(x + step) - f(x - step)) / (2 * h)
            step[i] = 0.0
        return value, grad

    per_iter = 2 * dim + 1
    maxiter = config.max_iterations or max(1, config.max_evaluations // per_iter + 1)
    res = scipy_minimize(
        fun_and_grad, x0, jac=True, method="L-BFGS-B",
        options={"maxiter": maxiter, "maxfun": config.max_evaluations,
                 "ftol": config.tolerance, "gtol": 1e-10, "maxcor": 20},
    )
    trace.terminated_reason = "maxiter" if res.nit >= maxiter else "converged"


def _cma_es(f: _Counted, x0: np.ndarray, config: OptimizerConfig, trace: OptimizationTrace) -> None:
    """(mu/mu_w, lambda)-CMA-ES with cumulative step-size adaptation and
    rank-one plus rank-mu covariance updates."""
    n = x0.size
    rng = np.random.default_rng([config.seed, 0xC3A])
    lam = config.popsize or 4 + int(3 * math.log(n))
    mu = lam // 2
    weights = math.log(mu + 0.5) - np.log(np.arange(1, mu + 1))
    weights /= weights.sum()
    mu_eff = 1.0 / np.sum(weights**2)

    c_sigma = (mu_eff + 2) / (n + mu_eff + 5)
    d_sigma = 1 + 2 * max(0.0, math.sqrt((mu_eff - 1) / (n + 1)) - 1) + c_sigma
    c_c = (4 + mu_eff / n) / (n + 4 + 2 * mu_eff / n)
    c_1 = 2 / ((n + 1.3) ** 2 + mu_eff)
    c_mu = min(1 - c_1, 2 * (mu_eff - 2 + 1 / mu_eff) / ((n + 2) ** 2 + mu_eff))
    chi_n = math.sqrt(n) * (1 - 1 / (4 * n) + 1 / (21 * n * n))

    mean = x0.copy()
    sigma = config.sigma0
    C = np.eye(n)
    B = np.eye(n)
    D = np.ones(n)
    p_sigma = np.zeros(n)
    p_c = np.zeros(n)
    g = 0
    trace.final_mean = mean.copy()
    while True:
        if trace.n_evaluations + lam > config.max_evaluations:
            trace.terminated_reason = "budget"
            break
        z = rng.standard_normal((lam, n))
        y = (z * D) @ B.T
        xs = mean + sigma * y
        fs = np.array([f(x) for x in xs])
        order = np.argsort(fs, kind="stable")
        y_sel = y[order[:mu]]
        y_w = weights @ y_sel
        mean = mean + sigma * y_w

        c_inv_sqrt_yw = B @ ((B.T @ y_w) / D)
        p_sigma = (1 - c_sigma) * p_sigma + math.sqrt(c_sigma * (2 - c_sigma) * mu_eff) * c_inv_sqrt_yw
        norm_ps = np.linalg.norm(p_sigma)
        h_sigma = norm_ps / math.sqrt(1 - (1 - c_sigma) ** (2 * (g + 1))) < (1.4 + 2 / (n + 1)) * chi_n
        p_c = (1 - c_c) * p_c + h_sigma * math.sqrt(c_c * (2 - c_c) * mu_eff) * y_w
        rank_mu = (y_sel * weights[:, None]).T @ y_sel
        C = ((1 - c_1 - c_mu) * C
             + c_1 * (np.outer(p_c, p_c) + (1 - h_sigma) * c_c * (2 - c_c) * C)
             + c_mu * rank_mu)
        C = (C + C.T) / 2
        sigma *= math.exp((c_sigma / d_sigma) * (norm_ps / chi_n - 1))

        evals, B = np.linalg.eigh(C)
        if evals.min() <= 0:
            raise OptimizationError(f"covariance lost positive definiteness at generation {g}")
        D = np.sqrt(evals)
        g += 1
        trace.generations = g
        trace.final_mean = mean.copy()
        if sigma * D.max() < 1e-12:
            trace.terminated_reason = "sigma_collapse"
            break
