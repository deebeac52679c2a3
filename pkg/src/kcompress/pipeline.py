"""Stage-by-stage compression of a sampled Markov system.

Each stage draws particle clouds from the current approximate marginal's
support points, selects at most M representative points from a candidate
set (Sobol lattice over the pooled clouds, or a seeded particle subsample),
and forms the implied kernel whose row weights are assignment fractions.
The achieved stage error Delta_t is the p-th root of the selection
objective, which equals the integrated transportation distance between the
empirical clouds and the implied kernel under the current marginal.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Callable

import numpy as np

from .core import (
    DiscreteDistribution,
    DiscreteKernel,
    as_points,
    compose_marginal,
)
from .dual import SolverConfig, run_subgradient
from .errors import (
    EmptyCloudError,
    InfeasibleBudgetError,
    SourceMismatchError,
    StageBudgetInfeasibleError,
    UnselectedAssignmentError,
    ValidationError,
)
from .generators import sobol_lattice
from .oracle import SelectionInstance


@dataclass(frozen=True)
class StageSpec:
    """Per-stage sizes: samples per source, candidate count, budget, order."""

    t: int
    samples_per_source: int
    candidate_count: int
    budget: int
    order: float

    def __post_init__(self):
        if self.t < 0:
            raise ValidationError("stage index must be >= 0")
        if min(self.samples_per_source, self.candidate_count, self.budget) < 1:
            raise ValidationError("stage sizes must be positive")
        if self.budget > self.candidate_count:
            raise StageBudgetInfeasibleError(
                f"budget {self.budget} exceeds candidate count "
                f"{self.candidate_count} at stage {self.t}"
            )
        if self.order < 1:
            raise ValidationError("order must be >= 1")


@dataclass(frozen=True)
class ApproximateSystem:
    """The compressed system: supports, kernels, marginals, stage errors.

    supports has T+1 entries (stage 0 is the single initial state), kernels
    and deltas have T, marginals has T+1 with marginals[t] supported on
    supports[t].
    """

    supports: tuple
    kernels: tuple
    marginals: tuple
    deltas: tuple

    @property
    def horizon(self) -> int:
        return len(self.kernels)


@dataclass(frozen=True)
class GenerativeSystem:
    """Sampling access to a Markov system: an initial state and a callable
    sampler(t, source_point, n, rng) returning an (n, dim) array of draws
    from the stage-t kernel at source_point."""

    x0: np.ndarray
    sampler: Callable

    def __post_init__(self):
        object.__setattr__(
            self, "x0", np.array(self.x0, dtype=np.float64).ravel()
        )


def build_stage_instance(
    marginal: DiscreteDistribution,
    clouds,
    candidates,
    p: float,
    budget: int,
) -> SelectionInstance:
    """Selection instance with group weights w_s = marginal_s / cloud size."""
    clouds = [as_points(c) for c in clouds]
    if len(clouds) != len(marginal):
        raise SourceMismatchError(
            f"{len(clouds)} clouds for {len(marginal)} marginal atoms"
        )
    for cloud in clouds:
        if len(cloud) == 0:
            raise EmptyCloudError("every source needs at least one particle")
    groups = [
        (float(w) / len(cloud), cloud)
        for w, cloud in zip(marginal.weights, clouds)
    ]
    try:
        return SelectionInstance.build(
            groups, candidates, p, budget, sources=marginal.support
        )
    except InfeasibleBudgetError as exc:
        raise StageBudgetInfeasibleError(str(exc)) from exc


def implied_kernel(
    instance: SelectionInstance, gamma, assignment
) -> DiscreteKernel:
    """Kernel whose row weights are per-source assignment fractions.

    Rows share one support: the selected candidates that received at least
    one assignment, in candidate-index order. Requires the instance to
    carry source coordinates (build_stage_instance attaches them).
    """
    sources = instance.sources
    if sources is None:
        raise SourceMismatchError("instance carries no source coordinates")
    gamma = np.asarray(gamma)
    selected = set(np.flatnonzero(gamma))
    used = sorted({int(k) for group in assignment for k in group})
    if not set(used) <= selected:
        raise UnselectedAssignmentError(
            "assignment references unselected candidates"
        )
    support = instance.candidates[used]
    col = {k: i for i, k in enumerate(used)}
    rows = []
    for group in assignment:
        counts = np.zeros(len(used))
        for k in group:
            counts[col[int(k)]] += 1.0
        rows.append(DiscreteDistribution(support, counts / len(group)))
    return DiscreteKernel(sources, tuple(rows))


def candidate_lattice(clouds, count: int, margin: float = 0.05) -> np.ndarray:
    """Sobol candidates over the pooled bounding box, expanded by `margin`
    per side; flat directions get a unit pad so the box stays proper."""
    pool = np.vstack([as_points(c) for c in clouds])
    lo, hi = pool.min(axis=0), pool.max(axis=0)
    span = hi - lo
    pad = np.where(span > 0, margin * span, 1.0)
    return sobol_lattice(pool.shape[1], count, (lo - pad, hi + pad))


def candidate_subsample(clouds, count: int, rng) -> np.ndarray:
    """Seeded uniform subsample (without replacement) of the pooled particles."""
    pool = np.vstack([as_points(c) for c in clouds])
    if count > len(pool):
        raise ValidationError(
            f"cannot subsample {count} of {len(pool)} particles"
        )
    idx = np.sort(rng.choice(len(pool), size=count, replace=False))
    return pool[idx]


def approximate_system(
    system: GenerativeSystem,
    stages,
    solver: SolverConfig,
    candidate_mode: str = "lattice",
    margin: float = 0.05,
    box=None,
    on_stage=None,
) -> ApproximateSystem:
    """Run the per-stage sample/select/compose loop over the whole horizon.

    Sampling is reproducible: the cloud for source s at stage t comes from
    a generator seeded by (solver.seed, t, s), independent of every other
    cloud. With box set, the stage candidate lattice uses that fixed box
    instead of the pooled bounding box. on_stage(stage, instance, result)
    is called after each stage's solve, for diagnostics collection.
    """
    if candidate_mode not in ("lattice", "subsample"):
        raise ValidationError(f"unknown candidate mode {candidate_mode!r}")
    x0 = system.x0
    marginal = DiscreteDistribution([x0], [1.0])
    supports = [marginal.support]
    marginals = [marginal]
    kernels = []
    deltas = []
    for stage in stages:
        clouds = []
        for s, source in enumerate(marginal.support):
            rng = np.random.default_rng(
                np.random.SeedSequence(solver.seed, spawn_key=(stage.t, s))
            )
            cloud = as_points(
                system.sampler(stage.t, source, stage.samples_per_source, rng)
            )
            clouds.append(cloud)
        if candidate_mode == "lattice":
            if box is not None:
                candidates = sobol_lattice(
                    clouds[0].shape[1], stage.candidate_count, box
                )
            else:
                candidates = candidate_lattice(
                    clouds, stage.candidate_count, margin
                )
        else:
            sub_rng = np.random.default_rng(
                np.random.SeedSequence(
                    solver.seed, spawn_key=(stage.t, len(marginal))
                )
            )
            candidates = candidate_subsample(
                clouds, stage.candidate_count, sub_rng
            )
        instance = build_stage_instance(
            marginal, clouds, candidates, stage.order, stage.budget
        )
        result = run_subgradient(instance, solver)
        if on_stage is not None:
            on_stage(stage, instance, result)
        kernel = implied_kernel(instance, result.gamma, result.beta_assignment)
        delta = result.objective ** (1.0 / stage.order)
        marginal = compose_marginal(marginal, kernel)
        kernels.append(kernel)
        deltas.append(delta)
        marginals.append(marginal)
        supports.append(marginal.support)
    return ApproximateSystem(
        tuple(supports), tuple(kernels), tuple(marginals), tuple(deltas)
    )


def system_to_dict(approx: ApproximateSystem) -> dict:
    """JSON-ready form: per-stage supports, kernel rows, marginals, deltas."""
    from .core import distribution_to_dict, kernel_to_dict

    return {
        "supports": [s.tolist() for s in approx.supports],
        "kernels": [kernel_to_dict(k) for k in approx.kernels],
        "marginals": [distribution_to_dict(m) for m in approx.marginals],
        "deltas": [float(d) for d in approx.deltas],
    }


def system_from_dict(data: dict) -> ApproximateSystem:
    from .core import distribution_from_dict, kernel_from_dict

    return ApproximateSystem(
        tuple(np.asarray(s, dtype=np.float64) for s in data["supports"]),
        tuple(kernel_from_dict(k) for k in data["kernels"]),
        tuple(distribution_from_dict(m) for m in data["marginals"]),
        tuple(float(d) for d in data["deltas"]),
    )
