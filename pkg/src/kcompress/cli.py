"""The `kcompress` command: generate | select | pipeline | evaluate.

A single JSON config document drives each mode; any scalar field can be
overridden on the command line with its dotted path (for example
``--solver.max_iter 200`` or ``--candidates.count=64``). Runs write their
artifacts into the output directory:

* result JSON per seed (byte-identical for identical config and seed;
  wall-clock data goes to metadata.json instead),
* per-iteration diagnostics CSV (j, dual, sum_gamma, alpha, theta0,
  elapsed_ms),
* summary.csv with one row per solve (dim_beta, dim_gamma, wall time,
  achieved distance, duality gap),
* with --emit-plot-data: sample/candidate/selected point CSVs and a
  transport-plan dump (i, k, mass).

KC_LOG={error,info,debug} controls logging verbosity.
"""

from __future__ import annotations

import argparse
import csv
import json
import logging
import os
import sys
import time
from dataclasses import dataclass, fields as dataclass_fields
from datetime import datetime, timezone
from pathlib import Path

import numpy as np

from . import __version__
from .core import (
    DiscreteDistribution,
    compose_marginal,
    distribution_to_dict,
    kernel_to_dict,
)
from .dual import SolverConfig, run_subgradient
from .errors import ConfigError, KCompressError, ValidationError
from .generators import (
    GaussianComponent,
    demo_mixture,
    sample_gaussian_mixture,
    sobol_lattice,
)
from .pipeline import (
    GenerativeSystem,
    StageSpec,
    approximate_system,
    build_stage_instance,
    candidate_lattice,
    implied_kernel,
    system_from_dict,
    system_to_dict,
)
from .risk import evaluate_backward, expectation_mapping, semideviation_mapping
from .transport import wasserstein_exact

log = logging.getLogger("kcompress")

_MODES = ("generate", "select", "pipeline", "evaluate")

_TOP_KEYS = {
    "mode",
    "out",
    "seeds",
    "emit_plot_data",
    "mixture",
    "candidates",
    "margin",
    "budget",
    "order",
    "solver",
    "system",
    "stages",
    "candidate_mode",
    "system_path",
    "costs",
    "mapping",
}

_SOLVER_KEYS = {
    f.name for f in dataclass_fields(SolverConfig) if f.name != "seed"
}


# ---------------------------------------------------------------------------
# config loading
# ---------------------------------------------------------------------------

def _set_path(data: dict, dotted: str, value):
    keys = dotted.split(".")
    node = data
    for key in keys[:-1]:
        node = node.setdefault(key, {})
        if not isinstance(node, dict):
            raise ConfigError(
                f"override path {dotted!r} crosses a non-object field",
                field=dotted,
            )
    node[keys[-1]] = value


def parse_overrides(tokens) -> dict:
    """Turn leftover ``--dotted.path value`` (or =value) tokens into a map."""
    overrides = {}
    i = 0
    while i < len(tokens):
        token = tokens[i]
        if not token.startswith("--"):
            raise ConfigError(f"unexpected argument {token!r}")
        body = token[2:]
        if "=" in body:
            key, raw = body.split("=", 1)
            i += 1
        else:
            key = body
            if i + 1 >= len(tokens):
                raise ConfigError(f"flag --{key} is missing a value", field=key)
            raw = tokens[i + 1]
            i += 2
        try:
            overrides[key] = json.loads(raw)
        except json.JSONDecodeError:
            overrides[key] = raw
    return overrides


def _require(data: dict, key: str, mode: str):
    if data.get(key) is None:
        raise ConfigError(
            f"missing required field {key!r} for mode {mode}", field=key
        )
    return data[key]


def _components_from(data: dict):
    raw = data.get("components")
    if raw is None:
        return tuple(demo_mixture())
    out = []
    for i, comp in enumerate(raw):
        try:
            out.append(GaussianComponent(comp["mean"], comp["cov"]))
        except (KeyError, TypeError, KCompressError) as exc:
            raise ConfigError(
                f"bad mixture component {i}: {exc}",
                field=f"mixture.components[{i}]",
            ) from exc
    return tuple(out)


def _box_from(raw, field: str):
    if raw is None:
        return None
    try:
        low = np.asarray(raw[0], dtype=np.float64).ravel()
        high = np.asarray(raw[1], dtype=np.float64).ravel()
    except (IndexError, TypeError, ValueError) as exc:
        raise ConfigError(f"bad box {raw!r}", field=field) from exc
    if len(low) != len(high) or np.any(low >= high):
        raise ConfigError(
            f"box needs low < high per coordinate, got {raw!r}", field=field
        )
    return low, high


@dataclass
class ExperimentConfig:
    """Validated experiment description; built before any computation runs."""

    mode: str
    out: Path
    seeds: tuple
    emit_plot_data: bool
    components: tuple
    mixture_weights: np.ndarray
    samples_per_component: int
    candidate_count: int | None
    candidate_box: tuple | None
    margin: float
    budget: int | None
    order: float
    solver: dict
    system: dict | None
    stages: tuple
    candidate_mode: str
    system_path: str | None
    costs: tuple
    mapping: dict

    @classmethod
    def from_dict(cls, data: dict) -> "ExperimentConfig":
        unknown = set(data) - _TOP_KEYS
        if unknown:
            raise ConfigError(
                f"unknown config field {sorted(unknown)[0]!r}",
                field=sorted(unknown)[0],
            )
        mode = data.get("mode")
        if mode not in _MODES:
            raise ConfigError(
                f"mode must be one of {', '.join(_MODES)}, got {mode!r}",
                field="mode",
            )
        out = _require(data, "out", mode)
        seeds = data.get("seeds", [0])
        if not isinstance(seeds, (list, tuple)) or not seeds:
            raise ConfigError("seeds must be a nonempty list", field="seeds")
        seeds = tuple(int(s) for s in seeds)

        mixture = data.get("mixture") or {}
        components = _components_from(mixture)
        weights = mixture.get("weights")
        if weights is None:
            weights = np.full(len(components), 1.0 / len(components))
        else:
            weights = np.asarray(weights, dtype=np.float64)
            if len(weights) != len(components):
                raise ConfigError(
                    "one mixture weight per component required",
                    field="mixture.weights",
                )
        samples = int(mixture.get("samples_per_component", 100))
        if samples < 1:
            raise ConfigError(
                "samples_per_component must be positive",
                field="mixture.samples_per_component",
            )

        cand = data.get("candidates") or {}
        count = cand.get("count")
        count = None if count is None else int(count)
        box = _box_from(cand.get("box"), "candidates.box")
        margin = float(data.get("margin", 0.05))
        if margin < 0:
            raise ConfigError("margin must be >= 0", field="margin")

        budget = data.get("budget")
        budget = None if budget is None else int(budget)
        order = float(data.get("order", 1.0))
        if order < 1:
            raise ConfigError("order must be >= 1", field="order")

        solver = dict(data.get("solver") or {})
        bad = set(solver) - _SOLVER_KEYS
        if bad:
            raise ConfigError(
                f"unknown solver field {sorted(bad)[0]!r}",
                field=f"solver.{sorted(bad)[0]}",
            )
        try:
            SolverConfig(**solver, seed=seeds[0])
        except (ValidationError, TypeError) as exc:
            raise ConfigError(f"bad solver settings: {exc}", field="solver") from exc

        candidate_mode = data.get("candidate_mode", "lattice")
        if candidate_mode not in ("lattice", "subsample"):
            raise ConfigError(
                f"candidate_mode must be lattice or subsample, got"
                f" {candidate_mode!r}",
                field="candidate_mode",
            )

        stages = []
        if data.get("stages") is not None:
            for i, raw in enumerate(data["stages"]):
                try:
                    stages.append(
                        StageSpec(
                            t=i,
                            samples_per_source=int(raw["samples_per_source"]),
                            candidate_count=int(raw["candidate_count"]),
                            budget=int(raw["budget"]),
                            order=float(raw.get("order", order)),
                        )
                    )
                except (KeyError, TypeError, KCompressError) as exc:
                    raise ConfigError(
                        f"bad stage {i}: {exc}", field=f"stages[{i}]"
                    ) from exc

        system = data.get("system")
        if mode == "pipeline":
            system = _require(data, "system", mode)
            if system.get("type") != "gaussian_walk":
                raise ConfigError(
                    f"unknown system type {system.get('type')!r}"
                    " (supported: gaussian_walk)",
                    field="system.type",
                )
            if "x0" not in system or float(system.get("sigma", 0)) <= 0:
                raise ConfigError(
                    "gaussian_walk needs x0 and sigma > 0", field="system"
                )
            if not stages:
                raise ConfigError(
                    "missing required field 'stages' for mode pipeline",
                    field="stages",
                )

        if mode == "select":
            budget_val = _require(data, "budget", mode)
            if count is None:
                raise ConfigError(
                    "missing required field 'candidates.count' for mode"
                    " select",
                    field="candidates.count",
                )
            if not 1 <= int(budget_val) <= count:
                raise ConfigError(
                    f"budget {budget_val} outside [1, {count}]", field="budget"
                )

        mapping = data.get("mapping") or {"type": "expectation"}
        if mapping.get("type") not in ("expectation", "semideviation"):
            raise ConfigError(
                f"unknown mapping type {mapping.get('type')!r}", field="mapping"
            )
        costs = tuple(data.get("costs") or ())
        for i, spec in enumerate(costs):
            bad = set(spec) - {"affine", "norm"}
            if bad:
                raise ConfigError(
                    f"unknown cost term {sorted(bad)[0]!r}",
                    field=f"costs[{i}]",
                )
        if mode == "evaluate":
            _require(data, "system_path", mode)

        return cls(
            mode=mode,
            out=Path(out),
            seeds=seeds,
            emit_plot_data=bool(data.get("emit_plot_data", False)),
            components=components,
            mixture_weights=weights,
            samples_per_component=samples,
            candidate_count=count,
            candidate_box=box,
            margin=margin,
            budget=budget,
            order=order,
            solver=solver,
            system=system,
            stages=tuple(stages),
            candidate_mode=candidate_mode,
            system_path=data.get("system_path"),
            costs=costs,
            mapping=mapping,
        )

    def solver_config(self, seed: int) -> SolverConfig:
        return SolverConfig(**self.solver, seed=seed)


def load_config(path, overrides) -> ExperimentConfig:
    if path is None:
        data = {}
    else:
        try:
            with open(path) as fh:
                data = json.load(fh)
        except json.JSONDecodeError as exc:
            raise ConfigError(f"config does not parse as JSON: {exc}") from exc
        if not isinstance(data, dict):
            raise ConfigError("config root must be a JSON object")
    for dotted, value in (overrides or {}).items():
        _set_path(data, dotted, value)
    return ExperimentConfig.from_dict(data)


# ---------------------------------------------------------------------------
# artifact writers
# ---------------------------------------------------------------------------

def _write_json(path: Path, payload: dict):
    path.write_text(json.dumps(payload, sort_keys=True, indent=2) + "\n")


def _write_csv(path: Path, header, rows):
    with open(path, "w", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow(header)
        for row in rows:
            writer.writerow(row)


def _point_rows(points, prefix=()):
    return [list(prefix) + [repr(float(c)) for c in p] for p in points]


def _coord_header(dim: int):
    return [f"x{i}" for i in range(dim)]


def _write_diagnostics(path: Path, result):
    rows = [
        [
            j,
            repr(float(result.history_dual[j])),
            int(result.history_sum_gamma[j]),
            repr(float(result.history_alpha[j])),
            repr(float(result.history_theta0[j])),
            repr(float(result.history_elapsed_ms[j])),
        ]
        for j in range(result.iterations)
    ]
    _write_csv(
        path, ["j", "dual", "sum_gamma", "alpha", "theta0", "elapsed_ms"], rows
    )


def _write_plan(path: Path, plan):
    rows = []
    for i, k in np.argwhere(plan.plan > 0):
        rows.append([int(i), int(k), repr(float(plan.plan[i, k]))])
    _write_csv(path, ["i", "k", "mass"], rows)


def _write_metadata(cfg: ExperimentConfig, wall: float, extra=None):
    payload = {
        "mode": cfg.mode,
        "seeds": list(cfg.seeds),
        "version": __version__,
        "wall_time_s": wall,
        "written_utc": datetime.now(timezone.utc).isoformat(),
    }
    payload.update(extra or {})
    _write_json(cfg.out / "metadata.json", payload)


# ---------------------------------------------------------------------------
# cost grammar and risk mappings
# ---------------------------------------------------------------------------

def cost_function(spec: dict):
    """Build c(x) = offset + coeff.x + weight * |x - center|^power from the
    JSON cost grammar; an empty spec is the zero cost."""
    affine = spec.get("affine") or {}
    norm = spec.get("norm") or {}
    coeff = np.asarray(affine.get("coeff", []), dtype=np.float64)
    offset = float(affine.get("offset", 0.0))
    center = np.asarray(norm.get("center", []), dtype=np.float64)
    weight = float(norm.get("weight", 1.0)) if norm else 0.0
    power = float(norm.get("power", 1.0))

    def cost(x):
        x = np.asarray(x, dtype=np.float64).ravel()
        value = offset
        if coeff.size:
            value += float(np.dot(coeff, x))
        if norm:
            shift = x - center if center.size else x
            value += weight * float(np.linalg.norm(shift)) ** power
        return value

    return cost


def _mapping_from(config: dict):
    if config["type"] == "expectation":
        return expectation_mapping()
    return semideviation_mapping(float(config.get("kappa", 0.0)))


# ---------------------------------------------------------------------------
# modes
# ---------------------------------------------------------------------------

def _sample_clouds(cfg: ExperimentConfig, seed: int):
    return sample_gaussian_mixture(
        cfg.components, cfg.samples_per_component, seed
    )


def run_generate(cfg: ExperimentConfig):
    start = time.perf_counter()
    for seed in cfg.seeds:
        clouds = _sample_clouds(cfg, seed)
        dim = clouds[0].shape[1]
        rows = []
        for s, cloud in enumerate(clouds):
            _write_csv(
                cfg.out / f"cloud_{s:02d}_seed{seed}.csv",
                _coord_header(dim),
                _point_rows(cloud),
            )
            rows.extend(_point_rows(cloud, prefix=(s,)))
        means = np.array([c.mean for c in cfg.components])
        kernel_payload = kernel_to_dict(
            _empirical_kernel(means, clouds)
        )
        _write_json(cfg.out / f"empirical_kernel_seed{seed}.json", kernel_payload)
        if cfg.emit_plot_data:
            _write_csv(
                cfg.out / f"samples_seed{seed}.csv",
                ["group"] + _coord_header(dim),
                rows,
            )
        log.info(
            "generate seed=%d: %d clouds of %d points",
            seed,
            len(clouds),
            cfg.samples_per_component,
        )
    _write_metadata(cfg, time.perf_counter() - start)


def _empirical_kernel(sources, clouds):
    from .core import DiscreteKernel

    rows = tuple(
        DiscreteDistribution(c, np.full(len(c), 1.0 / len(c))) for c in clouds
    )
    return DiscreteKernel(sources, rows)


def _select_candidates(cfg: ExperimentConfig, clouds):
    if cfg.candidate_box is not None:
        dim = clouds[0].shape[1]
        return sobol_lattice(dim, cfg.candidate_count, cfg.candidate_box)
    return candidate_lattice(clouds, cfg.candidate_count, cfg.margin)


def run_select(cfg: ExperimentConfig):
    start = time.perf_counter()
    summary = []
    for seed in cfg.seeds:
        t0 = time.perf_counter()
        clouds = _sample_clouds(cfg, seed)
        means = np.array([c.mean for c in cfg.components])
        marginal = DiscreteDistribution(means, cfg.mixture_weights)
        candidates = _select_candidates(cfg, clouds)
        instance = build_stage_instance(
            marginal, clouds, candidates, cfg.order, cfg.budget
        )
        result = run_subgradient(instance, cfg.solver_config(seed))
        wall = time.perf_counter() - t0
        distance = result.objective ** (1.0 / cfg.order)

        kernel = implied_kernel(instance, result.gamma, result.beta_assignment)
        selected_marginal = compose_marginal(marginal, kernel)
        pooled = np.vstack(clouds)
        pooled_w = np.repeat(
            cfg.mixture_weights / cfg.samples_per_component,
            [len(c) for c in clouds],
        )
        empirical = DiscreteDistribution(pooled, pooled_w)
        composed_distance, plan = wasserstein_exact(
            empirical, selected_marginal, cfg.order
        )

        payload = {
            "assignment": [a.tolist() for a in result.beta_assignment],
            "best_dual": float(result.best_dual),
            "budget": cfg.budget,
            "composed_distance": float(composed_distance),
            "converged": bool(result.converged),
            "dim_beta": instance.dim_beta,
            "dim_gamma": instance.dim_gamma,
            "distance": float(distance),
            "gamma": result.gamma.tolist(),
            "gap": float(result.gap),
            "iterations": int(result.iterations),
            "objective": float(result.objective),
            "order": cfg.order,
            "seed": seed,
            "selected_distribution": distribution_to_dict(selected_marginal),
            "selected_indices": np.flatnonzero(result.gamma).tolist(),
            "sum_gamma": int(result.gamma.sum()),
        }
        _write_json(cfg.out / f"result_seed{seed}.json", payload)
        _write_diagnostics(cfg.out / f"diagnostics_seed{seed}.csv", result)
        summary.append(
            [
                seed,
                instance.dim_beta,
                instance.dim_gamma,
                repr(round(wall, 6)),
                repr(float(distance)),
                repr(float(result.gap)),
            ]
        )
        if cfg.emit_plot_data:
            dim = pooled.shape[1]
            rows = []
            for s, cloud in enumerate(clouds):
                rows.extend(_point_rows(cloud, prefix=(s,)))
            _write_csv(
                cfg.out / f"samples_seed{seed}.csv",
                ["group"] + _coord_header(dim),
                rows,
            )
            _write_csv(
                cfg.out / f"candidates_seed{seed}.csv",
                _coord_header(dim),
                _point_rows(candidates),
            )
            _write_csv(
                cfg.out / f"selected_seed{seed}.csv",
                _coord_header(dim),
                _point_rows(candidates[np.flatnonzero(result.gamma)]),
            )
            _write_plan(cfg.out / f"plan_seed{seed}.csv", plan)
        log.info(
            "select seed=%d: distance=%.6f gap=%.3e sum_gamma=%d wall=%.2fs",
            seed,
            distance,
            result.gap,
            int(result.gamma.sum()),
            wall,
        )
    _write_csv(
        cfg.out / "summary.csv",
        ["seed", "dim_beta", "dim_gamma", "wall_time_s", "distance", "gap"],
        summary,
    )
    _write_metadata(cfg, time.perf_counter() - start)


def _walk_system(spec: dict) -> GenerativeSystem:
    x0 = np.asarray(spec["x0"], dtype=np.float64).ravel()
    sigma = float(spec["sigma"])

    def sampler(t, source, n, rng):
        return source + sigma * rng.standard_normal((n, len(x0)))

    return GenerativeSystem(x0, sampler)


def run_pipeline(cfg: ExperimentConfig):
    start = time.perf_counter()
    summary = []
    for seed in cfg.seeds:
        collected = []
        t0 = time.perf_counter()
        approx = approximate_system(
            _walk_system(cfg.system),
            cfg.stages,
            cfg.solver_config(seed),
            candidate_mode=cfg.candidate_mode,
            margin=cfg.margin,
            box=cfg.candidate_box,
            on_stage=lambda stage, inst, res: collected.append(
                (stage, inst, res)
            ),
        )
        wall = time.perf_counter() - t0
        _write_json(
            cfg.out / f"system_seed{seed}.json", system_to_dict(approx)
        )
        for t, (stage, instance, result) in enumerate(collected):
            _write_json(
                cfg.out / f"stage_{t}_seed{seed}.json",
                {
                    "delta": float(approx.deltas[t]),
                    "kernel": kernel_to_dict(approx.kernels[t]),
                    "marginal": distribution_to_dict(approx.marginals[t + 1]),
                    "support": approx.supports[t + 1].tolist(),
                },
            )
            _write_diagnostics(
                cfg.out / f"diagnostics_stage{t}_seed{seed}.csv", result
            )
            stage_wall = float(result.history_elapsed_ms[-1]) / 1000.0
            summary.append(
                [
                    seed,
                    t,
                    instance.dim_beta,
                    instance.dim_gamma,
                    repr(round(stage_wall, 6)),
                    repr(float(approx.deltas[t])),
                    repr(float(result.gap)),
                ]
            )
            if cfg.emit_plot_data:
                dim = instance.candidates.shape[1]
                rows = []
                for s, cloud in enumerate(instance.clouds):
                    rows.extend(_point_rows(cloud, prefix=(s,)))
                _write_csv(
                    cfg.out / f"samples_stage{t}_seed{seed}.csv",
                    ["group"] + _coord_header(dim),
                    rows,
                )
                _write_csv(
                    cfg.out / f"candidates_stage{t}_seed{seed}.csv",
                    _coord_header(dim),
                    _point_rows(instance.candidates),
                )
                _write_csv(
                    cfg.out / f"selected_stage{t}_seed{seed}.csv",
                    _coord_header(dim),
                    _point_rows(instance.candidates[np.flatnonzero(result.gamma)]),
                )
            log.info(
                "pipeline seed=%d stage=%d: delta=%.6f gap=%.3e support=%d",
                seed,
                t,
                approx.deltas[t],
                result.gap,
                len(approx.supports[t + 1]),
            )
        log.info("pipeline seed=%d: wall=%.2fs", seed, wall)
    _write_csv(
        cfg.out / "summary.csv",
        [
            "seed",
            "stage",
            "dim_beta",
            "dim_gamma",
            "wall_time_s",
            "delta",
            "gap",
        ],
        summary,
    )
    _write_metadata(cfg, time.perf_counter() - start)


def run_evaluate(cfg: ExperimentConfig):
    start = time.perf_counter()
    with open(cfg.system_path) as fh:
        system = system_from_dict(json.load(fh))
    horizon = system.horizon
    specs = cfg.costs
    if len(specs) == 0:
        specs = ({},) * (horizon + 1)
    elif len(specs) == 1:
        specs = tuple(specs) * (horizon + 1)
    elif len(specs) != horizon + 1:
        raise ConfigError(
            f"need 1 or {horizon + 1} cost entries for a {horizon}-stage"
            f" system, got {len(specs)}",
            field="costs",
        )
    costs = [cost_function(spec) for spec in specs]
    sigma = _mapping_from(cfg.mapping)
    table = evaluate_backward(system, costs, sigma)
    table.to_csv(cfg.out / "values.csv")
    root = system.supports[0][0]
    payload = {
        "mapping": sigma.name,
        "root_state": [float(c) for c in root],
        "root_value": table.value(0, root),
        "stages": horizon,
    }
    _write_json(cfg.out / "evaluate_result.json", payload)
    log.info(
        "evaluate: stages=%d mapping=%s root_value=%.6f",
        horizon,
        sigma.name,
        payload["root_value"],
    )
    _write_metadata(cfg, time.perf_counter() - start)


# ---------------------------------------------------------------------------
# entry point
# ---------------------------------------------------------------------------

def run_experiment(config_path, overrides=None) -> int:
    """Load, validate, and execute one experiment config; returns 0."""
    cfg = load_config(config_path, overrides)
    cfg.out.mkdir(parents=True, exist_ok=True)
    runner = {
        "generate": run_generate,
        "select": run_select,
        "pipeline": run_pipeline,
        "evaluate": run_evaluate,
    }[cfg.mode]
    runner(cfg)
    return 0


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="kcompress",
        description="Compress empirical Markov kernels onto small supports.",
    )
    sub = parser.add_subparsers(dest="mode", required=True)
    for mode in _MODES:
        p = sub.add_parser(mode, help=f"run an experiment in {mode} mode")
        p.add_argument("--config", default=None, help="JSON config path")
        p.add_argument("--seed", type=int, default=None, help="single seed")
        p.add_argument(
            "--threads", type=int, default=None, help="solver worker threads"
        )
        p.add_argument("--out", default=None, help="output directory")
        p.add_argument(
            "--emit-plot-data",
            action="store_true",
            help="write sample/candidate/selected CSVs",
        )
    return parser


def _configure_logging():
    level = os.environ.get("KC_LOG", "info").lower()
    chosen = {
        "error": logging.ERROR,
        "info": logging.INFO,
        "debug": logging.DEBUG,
    }.get(level, logging.INFO)
    logging.basicConfig(level=chosen, format="%(levelname)s %(message)s")


def main(argv=None) -> int:
    _configure_logging()
    parser = build_parser()
    args, extra = parser.parse_known_args(argv)
    try:
        overrides = parse_overrides(extra)
        overrides["mode"] = args.mode
        if args.seed is not None:
            overrides["seeds"] = [args.seed]
        if args.threads is not None:
            overrides["solver.threads"] = args.threads
        if args.out is not None:
            overrides["out"] = args.out
        if args.emit_plot_data:
            overrides["emit_plot_data"] = True
        return run_experiment(args.config, overrides)
    except ConfigError as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return 2
    except (KCompressError, OSError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1


if __name__ == "__main__":
    sys.exit(main())
