"""Command-line front end.

Subcommands ``ed``, ``scan``, ``vqe`` and ``vqe-sampled`` each read one
experiment config (YAML, or JSON which is a YAML subset), validate it
against a fixed schema and write CSV/JSON files into ``--out``. Every output
embeds the resolved config and seed.

Exit codes: 0 on success, 2 for config errors, 3 for runtime failures.

Config layout (all sections optional unless noted)::

    seed: 0
    model:                 # required
      n_sites: 2
      n_bosons: 8
      topology: dimer      # dimer | ring | [[p, q], ...]
      lambda: 3.0          # or U
    sweep:                 # ed only; list or {start, stop, num}
      lambdas: [0.01, 1, 3, 5, 10]
    grid:                  # scan/vqe; each entry overrides the model/ansatz
      n_bosons: [2, 4]
      lambdas: [0.01, 3]
      n_layers: [1, 2]     # vqe only
    ansatz: {family: bs_kerr, n_layers: 2}
    variants:              # scan only; named ansatz variants
      - {name: full, family: interferometer_kerr}
    max_layers: 12         # scan only
    init: {kind: bimodal}
    optimizer: {kind: quasi_newton, max_evaluations: 20000}
    experiment: {restarts: 5, threshold: 0.99, shots: 100000}
"""

from __future__ import annotations

import argparse
import csv
import io
import json
import os
import sys
from concurrent.futures import ThreadPoolExecutor
from dataclasses import replace
from pathlib import Path
from typing import Any, Callable, Optional, Sequence

import numpy as np
import yaml

from .ansatz import AnsatzSpec
from .engine import (CostKind, ExperimentSpec, InitialStatePrep, run_vqe_exact, run_vqe_sampled,
                     scan_layers)
from .fock import CapacityError
from .model import (BHModel, build_hamiltonian, entropy, ground_state, ground_state_to_json, ipr,
                    model_from_config)
from .optimize import OptimizerConfig

THREADS_ENV = "PHOTONIC_BH_THREADS"
NOT_FOUND = "NOT_FOUND"

EXIT_OK = 0
EXIT_CONFIG = 2
EXIT_RUNTIME = 3

SECTIONS = {
    "ed": {"seed", "model", "sweep"},
    "scan": {"seed", "model", "grid", "ansatz", "variants", "max_layers", "init", "optimizer", "experiment"},
    "vqe": {"seed", "model", "grid", "ansatz", "init", "optimizer", "experiment"},
    "vqe-sampled": {"seed", "model", "grid", "ansatz", "init", "optimizer", "experiment"},
}
GRID_KEYS = {"ed": set(), "scan": {"n_bosons", "lambdas"},
             "vqe": {"n_bosons", "lambdas", "n_layers"}, "vqe-sampled": {"n_bosons", "lambdas", "n_layers"}}
EXPERIMENT_KEYS = {"restarts", "threshold", "shots", "plan", "infinite_shots"}


class ConfigError(ValueError):
    """Invalid config; ``line`` is the 1-based source line when known."""

    def __init__(self, message: str, line: Optional[int] = None):
        super().__init__(message)
        self.line = line

    def __str__(self):
        msg = super().__str__()
        return f"line {self.line}: {msg}" if self.line else msg


def _key_lines(text: str) -> dict[tuple, int]:
    """Map key paths to 1-based source lines."""
    try:
        root = yaml.compose(text)
    except yaml.YAMLError:
        return {}
    lines: dict[tuple, int] = {}

    def walk(node, path):
        if isinstance(node, yaml.MappingNode):
            for k, v in node.value:
                sub = path + (k.value,)
                lines[sub] = k.start_mark.line + 1
                walk(v, sub)
        elif isinstance(node, yaml.SequenceNode):
            for i, v in enumerate(node.value):
                lines[path + (i,)] = v.start_mark.line + 1
                walk(v, path + (i,))

    if root is not None:
        walk(root, ())
    return lines


def load_config(path: Path, command: str) -> dict:
    """Parse and schema-check a config file."""
    try:
        text = Path(path).read_text()
    except OSError as exc:
        raise ConfigError(f"cannot read config: {exc}") from exc
    try:
        cfg = yaml.safe_load(text)
    except yaml.YAMLError as exc:
        mark = getattr(exc, "problem_mark", None)
        raise ConfigError(f"malformed config: {getattr(exc, 'problem', exc)}",
                          mark.line + 1 if mark else None) from exc
    lines = _key_lines(text)
    if not isinstance(cfg, dict):
        raise ConfigError("config must be a mapping", 1)
    check_schema(cfg, command, lines)
    return cfg


def _fail(message: str, lines: dict, path: tuple):
    raise ConfigError(message, lines.get(path))


def _mapping(cfg: dict, key: str, lines: dict) -> dict:
    value = cfg.get(key, {})
    if not isinstance(value, dict):
        _fail(f"'{key}' must be a mapping", lines, (key,))
    return value


def _unknown(section: dict, allowed: set, lines: dict, path: tuple):
    for k in section:
        if k not in allowed:
            _fail(f"unknown key '{'.'.join(map(str, path + (k,)))}'", lines, path + (k,))


def _int_list(value, lines, path) -> list[int]:
    if not isinstance(value, list) or not value or not all(isinstance(v, int) and v >= 0 for v in value):
        _fail(f"'{'.'.join(path)}' must be a non-empty list of non-negative integers", lines, path)
    return value


def lambda_values(spec, lines: dict = {}, path: tuple = ()) -> list[float]:
    """A list of numbers, or ``{start, stop, num}`` for a linear grid."""
    if isinstance(spec, dict):
        _unknown(spec, {"start", "stop", "num"}, lines, path)
        try:
            return [float(x) for x in np.linspace(float(spec["start"]), float(spec["stop"]), int(spec["num"]))]
        except (KeyError, TypeError, ValueError):
            _fail("lambda range needs numeric start, stop and num", lines, path)
    if not isinstance(spec, list) or not spec:
        _fail("lambdas must be a non-empty list or {start, stop, num}", lines, path)
    if not all(isinstance(x, (int, float)) and not isinstance(x, bool) for x in spec):
        _fail("lambdas must be numbers", lines, path)
    return [float(x) for x in spec]


def check_schema(cfg: dict, command: str, lines: dict = {}) -> None:
    """Reject unknown keys and type errors before anything runs."""
    _unknown(cfg, SECTIONS[command], lines, ())
    if "model" not in cfg:
        _fail("missing required section 'model'", lines, ())
    if "seed" in cfg and (not isinstance(cfg["seed"], int) or cfg["seed"] < 0):
        _fail("'seed' must be a non-negative integer", lines, ("seed",))
    model = _mapping(cfg, "model", lines)
    _unknown(model, {"n_sites", "n_bosons", "J", "U", "lambda", "topology", "mu", "V"}, lines, ("model",))
    if command == "ed":
        sweep = _mapping(cfg, "sweep", lines)
        _unknown(sweep, {"lambdas"}, lines, ("sweep",))
        if "lambdas" in sweep:
            lambda_values(sweep["lambdas"], lines, ("sweep", "lambdas"))
        return
    grid = _mapping(cfg, "grid", lines)
    _unknown(grid, GRID_KEYS[command], lines, ("grid",))
    if "n_bosons" in grid:
        _int_list(grid["n_bosons"], lines, ("grid", "n_bosons"))
    if "n_layers" in grid:
        _int_list(grid["n_layers"], lines, ("grid", "n_layers"))
    if "lambdas" in grid:
        lambda_values(grid["lambdas"], lines, ("grid", "lambdas"))
    ansatz = _mapping(cfg, "ansatz", lines)
    _unknown(ansatz, {"family", "n_layers", "zero_bs_phases", "include_rotations"}, lines, ("ansatz",))
    init = _mapping(cfg, "init", lines)
    _unknown(init, {"kind", "config"}, lines, ("init",))
    opt = _mapping(cfg, "optimizer", lines)
    _unknown(opt, set(OptimizerConfig.__dataclass_fields__) - {"seed"}, lines, ("optimizer",))
    exp = _mapping(cfg, "experiment", lines)
    _unknown(exp, EXPERIMENT_KEYS, lines, ("experiment",))
    if exp.get("plan", "default") not in ("default", "colored"):
        _fail("'experiment.plan' must be 'default' or 'colored'", lines, ("experiment", "plan"))
    if command == "scan":
        variants = cfg.get("variants", [])
        if not isinstance(variants, list):
            _fail("'variants' must be a list", lines, ("variants",))
        for i, v in enumerate(variants):
            if not isinstance(v, dict):
                _fail("each variant must be a mapping", lines, ("variants", i))
            _unknown(v, {"name", "family", "zero_bs_phases", "include_rotations"}, lines, ("variants", i))
        mx = cfg.get("max_layers", 12)
        if not isinstance(mx, int) or mx < 1:
            _fail("'max_layers' must be a positive integer", lines, ("max_layers",))


def resolve(cfg: dict, seed: Optional[int] = None, shots: Optional[int] = None) -> dict:
    """Apply command-line overrides; the result is what gets recorded."""
    out = json.loads(json.dumps(cfg))
    out["seed"] = int(seed if seed is not None else cfg.get("seed", 0))
    if shots is not None:
        out.setdefault("experiment", {})["shots"] = int(shots)
    return out


def _as_config_error(fn):
    """Domain errors while building models/specs are config errors."""
    def wrapped(*args, **kwargs):
        try:
            return fn(*args, **kwargs)
        except ConfigError:
            raise
        except (ValueError, TypeError, KeyError) as exc:
            raise ConfigError(str(exc)) from exc
    return wrapped


@_as_config_error
def _model(base: dict, n_bosons: Optional[int] = None, lam: Optional[float] = None) -> BHModel:
    m = dict(base)
    if n_bosons is not None:
        m["n_bosons"] = n_bosons
    if lam is not None:
        m.pop("U", None)
        m["lambda"] = lam
    return model_from_config(m)


@_as_config_error
def _experiment(cfg: dict, model: BHModel, cost: CostKind, ansatz: Optional[AnsatzSpec] = None) -> ExperimentSpec:
    if ansatz is None:
        a = {"family": "bs_kerr", "n_layers": 1, **cfg.get("ansatz", {})}
        ansatz = AnsatzSpec.from_dict({**a, "n_sites": model.n_sites})
    init = cfg.get("init", {})
    prep = InitialStatePrep(init.get("kind", "monomodal"), init.get("config"))
    opt = OptimizerConfig.from_dict(cfg.get("optimizer", {}))
    exp = cfg.get("experiment", {})
    return ExperimentSpec(model, ansatz, prep, cost, opt, seed=cfg["seed"],
                          restarts=int(exp.get("restarts", 5)), threshold=float(exp.get("threshold", 0.99)),
                          shots=exp.get("shots"), plan=exp.get("plan", "default"),
                          infinite_shots=bool(exp.get("infinite_shots", False)))


def _provenance(cfg: dict) -> str:
    return f"# config: {json.dumps(cfg, sort_keys=True)}\n# seed: {cfg['seed']}\n"


def _write_csv(path: Path, cfg: dict, header: Sequence[str], rows: list) -> None:
    buf = io.StringIO()
    buf.write(_provenance(cfg))
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(header)
    w.writerows(rows)
    path.write_text(buf.getvalue())


def _write_json(path: Path, cfg: dict, payload: dict) -> None:
    path.write_text(json.dumps({"config": cfg, "seed": cfg["seed"], **payload}, indent=2, sort_keys=True))


def _fmt(x: float) -> str:
    return repr(float(x))


def _map(fn: Callable, items: list, threads: int) -> list:
    if threads <= 1 or len(items) <= 1:
        return [fn(x) for x in items]
    with ThreadPoolExecutor(max_workers=threads) as pool:
        return list(pool.map(fn, items))


def cmd_ed(cfg: dict, out: Path, threads: int = 1) -> list[Path]:
    """Ground state JSON at the configured point, plus a (lambda, E0, IPR, S)
    sweep CSV when ``sweep.lambdas`` is given."""
    base = cfg["model"]
    point = _model(base) if ("U" in base or "lambda" in base) else None
    sweep = cfg.get("sweep", {})
    lams = lambda_values(sweep["lambdas"]) if "lambdas" in sweep else []
    models = [_model(base, lam=lam) for lam in lams]
    if point is None and not models:
        raise ConfigError("nothing to do: give model.lambda/U or sweep.lambdas")
    written = []
    if point is not None:
        gs = ground_state(build_hamiltonian(point))
        path = out / "ground_state.json"
        path.write_text(ground_state_to_json(
            gs, config=cfg, seed=cfg["seed"], lam=point.lam, ipr=ipr(gs.vector),
            entropy=entropy(gs.vector), gap=gs.gap, residual=gs.residual))
        written.append(path)
    if models:
        def row(item):
            lam, model = item
            gs = ground_state(build_hamiltonian(model))
            return [_fmt(lam), _fmt(gs.energy), _fmt(ipr(gs.vector)), _fmt(entropy(gs.vector))]

        path = out / "ed_sweep.csv"
        _write_csv(path, cfg, ["lambda", "E0", "IPR", "S"], _map(row, list(zip(lams, models)), threads))
        written.append(path)
    return written


def _grid_points(cfg: dict, with_layers: bool) -> list[tuple]:
    base = cfg["model"]
    grid = cfg.get("grid", {})
    n_bosons = grid.get("n_bosons", [base.get("n_bosons")])
    if "lambdas" in grid:
        lams = lambda_values(grid["lambdas"])
    elif "lambda" in base:
        lams = [float(base["lambda"])]
    elif "U" in base:
        lams = [None]
    else:
        raise ConfigError("give model.lambda, model.U or grid.lambdas")
    pts = [(nb, lam) for nb in n_bosons for lam in lams]
    if with_layers:
        layers = grid.get("n_layers", [cfg.get("ansatz", {}).get("n_layers", 1)])
        pts = [(nb, nl, lam) for nb in n_bosons for nl in layers for lam in lams]
    return pts


def cmd_scan(cfg: dict, out: Path, threads: int = 1) -> list[Path]:
    """Minimal layer count per (N_B, lambda, variant); NOT_FOUND when the
    threshold is not met within ``max_layers``."""
    variants = cfg.get("variants") or [{"name": cfg.get("ansatz", {}).get("family", "bs_kerr")}]
    max_layers = int(cfg.get("max_layers", 12))
    jobs = []
    for v in variants:
        a = {"family": "bs_kerr", **cfg.get("ansatz", {}), **{k: x for k, x in v.items() if k != "name"}}
        a.pop("n_layers", None)
        name = v.get("name", a["family"])
        for nb, lam in _grid_points(cfg, False):
            model = _model(cfg["model"], nb, lam)
            ansatz = _as_config_error(AnsatzSpec.from_dict)({**a, "n_sites": model.n_sites, "n_layers": 1})
            jobs.append((name, _experiment(cfg, model, CostKind.INFIDELITY, ansatz)))

    def run(job):
        name, spec = job
        model = spec.model
        res = scan_layers(spec, max_layers)
        fid = res.runs[res.min_layers].fidelity if res.found else max(r.fidelity for r in res.runs.values())
        return [model.n_bosons, _fmt(model.lam), name,
                res.min_layers if res.found else NOT_FOUND,
                res.gate_count if res.found else NOT_FOUND, _fmt(fid)]

    path = out / "scan.csv"
    _write_csv(path, cfg, ["n_bosons", "lambda", "variant", "min_layers", "gate_count", "fidelity"],
               _map(run, jobs, threads))
    return [path]


def _cmd_vqe(cfg: dict, out: Path, threads: int, cost: CostKind) -> list[Path]:
    runner = run_vqe_sampled if cost is CostKind.ENERGY_SAMPLED else run_vqe_exact
    specs = []
    for nb, nl, lam in _grid_points(cfg, True):
        spec = _experiment(cfg, _model(cfg["model"], nb, lam), cost)
        specs.append(replace(spec, ansatz=replace(spec.ansatz, n_layers=nl)))
    results = _map(lambda spec: (spec, runner(spec)), specs, threads)
    rows, runs = [], []
    for spec, res in results:
        rows.append([spec.model.n_bosons, spec.ansatz.n_layers, _fmt(spec.model.lam), _fmt(res.fidelity),
                     _fmt(res.delta_e), res.shots_per_evaluation or 0, res.total_shots, spec.seed])
        runs.append({"n_bosons": spec.model.n_bosons, "n_layers": spec.ansatz.n_layers,
                     "lambda": spec.model.lam, "sigma0": spec.optimizer.sigma0,
                     "optimizer": spec.optimizer.kind.value, **res.to_dict()})
    stem = "vqe_sampled" if cost is CostKind.ENERGY_SAMPLED else "vqe"
    csv_path, json_path = out / f"{stem}_fidelity_map.csv", out / f"{stem}_runs.json"
    _write_csv(csv_path, cfg, ["n_bosons", "n_layers", "lambda", "fidelity", "delta_e",
                               "shots_per_evaluation", "total_shots", "seed"], rows)
    _write_json(json_path, cfg, {"runs": runs})
    return [csv_path, json_path]


def cmd_vqe(cfg: dict, out: Path, threads: int = 1) -> list[Path]:
    return _cmd_vqe(cfg, out, threads, CostKind.ENERGY_EXACT)


def cmd_vqe_sampled(cfg: dict, out: Path, threads: int = 1) -> list[Path]:
    exp = cfg.get("experiment", {})
    if not exp.get("infinite_shots") and not exp.get("shots"):
        raise ConfigError("sampled runs need experiment.shots (or --shots)")
    return _cmd_vqe(cfg, out, threads, CostKind.ENERGY_SAMPLED)


COMMANDS = {"ed": cmd_ed, "scan": cmd_scan, "vqe": cmd_vqe, "vqe-sampled": cmd_vqe_sampled}


def _default_threads() -> int:
    try:
        return max(1, int(os.environ.get(THREADS_ENV, "1")))
    except ValueError:
        return 1


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="photonic-bh", description=__doc__.splitlines()[0])
    parser.add_argument("command", choices=sorted(COMMANDS))
    parser.add_argument("--config", required=True, type=Path, help="YAML or JSON experiment config")
    parser.add_argument("--seed", type=int, help="override the config seed")
    parser.add_argument("--out", type=Path, default=Path("."), help="output directory")
    parser.add_argument("--threads", type=int, default=None,
                        help=f"worker threads for grid cells (default ${THREADS_ENV} or 1)")
    parser.add_argument("--shots", type=int, help="override experiment.shots")
    return parser


def main(argv: Optional[Sequence[str]] = None) -> int:
    args = build_parser().parse_args(argv)
    threads = args.threads if args.threads is not None else _default_threads()
    try:
        if threads < 1:
            raise ConfigError("--threads must be >= 1")
        if args.seed is not None and args.seed < 0:
            raise ConfigError("--seed must be non-negative")
        if args.shots is not None and args.shots < 1:
            raise ConfigError("--shots must be positive")
        cfg = resolve(load_config(args.config, args.command), args.seed, args.shots)
        args.out.mkdir(parents=True, exist_ok=True)
        written = COMMANDS[args.command](cfg, args.out, threads)
    except (ConfigError, CapacityError) as exc:
        print(f"config error: {args.config}: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    except Exception as exc:  # noqa: BLE001
        print(f"runtime error: {type(exc).__name__}: {exc}", file=sys.stderr)
        return EXIT_RUNTIME
    for path in written:
        print(path)
    return EXIT_OK


if __name__ == "__main__":
    sys.exit(main())
