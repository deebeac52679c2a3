"""Backward value evaluation over discrete systems with risk mappings.

A value table v_t is computed from the terminal stage backward:
v_T = c_T and v_t(x) = c_t(x) + sigma(x, Q_t(x), v_{t+1}), where sigma is a
transition risk mapping aggregating next-stage values under the kernel row
at x. The module also provides the a-priori propagation bound
sum_tau L_tau * (prod_j K_j) * Delta_tau on the weighted value error
induced by replacing kernels with approximations at stage errors Delta.
"""

from __future__ import annotations

import csv
from dataclasses import dataclass, field
from typing import Callable

import numpy as np

from .core import DiscreteDistribution
from .errors import (
    IndexRangeError,
    InvalidKappaError,
    LengthMismatchError,
    MissingValueError,
    SourceMismatchError,
    ValidationError,
)


@dataclass(frozen=True)
class RiskMapping:
    """A transition risk mapping sigma(x, mu, v): aggregates the next-stage
    value map v under the next-state distribution mu at state x. Evaluators
    must be pure and monotone in v."""

    name: str
    evaluate: Callable

    def __call__(self, x, mu: DiscreteDistribution, v) -> float:
        return self.evaluate(x, mu, v)


def expectation_mapping() -> RiskMapping:
    """sigma(x, mu, v) = sum_y mu(y) v(y)."""

    def evaluate(x, mu, v):
        values = np.array([v(y) for y in mu.support], dtype=np.float64)
        return float(np.dot(mu.weights, values))

    return RiskMapping("expectation", evaluate)


def semideviation_mapping(kappa: float) -> RiskMapping:
    """Mean plus kappa times the upper semideviation:
    sigma(x, mu, v) = E[v] + kappa * E[max(0, v - E[v])]."""
    if not 0.0 <= kappa <= 1.0:
        raise InvalidKappaError(f"kappa must lie in [0, 1], got {kappa}")

    def evaluate(x, mu, v):
        values = np.array([v(y) for y in mu.support], dtype=np.float64)
        mean = float(np.dot(mu.weights, values))
        excess = np.maximum(0.0, values - mean)
        return mean + kappa * float(np.dot(mu.weights, excess))

    return RiskMapping(f"semideviation({kappa})", evaluate)


@dataclass(frozen=True)
class DiscreteSystem:
    """A fully discrete Markov system: supports X_0..X_T and one kernel per
    transition, with kernel t mapping X_t sources forward."""

    supports: tuple
    kernels: tuple

    def __post_init__(self):
        supports = tuple(np.asarray(s, dtype=np.float64) for s in self.supports)
        kernels = tuple(self.kernels)
        if len(supports) != len(kernels) + 1:
            raise LengthMismatchError(
                f"{len(supports)} supports need {len(supports) - 1} kernels, "
                f"got {len(kernels)}"
            )
        for t, kernel in enumerate(kernels):
            if not np.array_equal(kernel.sources, supports[t]):
                raise SourceMismatchError(
                    f"kernel {t} sources do not match support {t}"
                )
        object.__setattr__(self, "supports", supports)
        object.__setattr__(self, "kernels", kernels)

    @property
    def horizon(self) -> int:
        return len(self.kernels)


@dataclass
class ValueTable:
    """Per-stage maps from support point to value, keyed by exact coordinates."""

    dim: int
    stages: dict = field(default_factory=dict)

    def set_value(self, t: int, point, value: float):
        key = tuple(float(c) for c in np.asarray(point).ravel())
        self.stages.setdefault(int(t), {})[key] = float(value)

    def value(self, t: int, point) -> float:
        key = tuple(float(c) for c in np.asarray(point).ravel())
        try:
            return self.stages[int(t)][key]
        except KeyError:
            raise MissingValueError(
                f"no value at stage {t} for point {key}"
            ) from None

    def stage_points(self, t: int):
        return sorted(self.stages.get(int(t), {}).keys())

    def to_csv(self, path):
        """Columns t, x0..x{dim-1}, value; floats written with full
        round-trip precision."""
        with open(path, "w", newline="") as fh:
            writer = csv.writer(fh)
            writer.writerow(
                ["t"] + [f"x{i}" for i in range(self.dim)] + ["value"]
            )
            for t in sorted(self.stages):
                for key in sorted(self.stages[t]):
                    writer.writerow(
                        [t] + [repr(c) for c in key] + [repr(self.stages[t][key])]
                    )

    @classmethod
    def from_csv(cls, path) -> "ValueTable":
        with open(path, newline="") as fh:
            reader = csv.reader(fh)
            header = next(reader)
            dim = len(header) - 2
            table = cls(dim)
            for row in reader:
                table.set_value(
                    int(row[0]), [float(c) for c in row[1 : 1 + dim]], float(row[-1])
                )
        return table


def evaluate_backward(system, costs, sigma: RiskMapping) -> ValueTable:
    """Backward recursion v_T = c_T, v_t(x) = c_t(x) + sigma(x, Q_t(x), v_{t+1}).

    system needs supports (T+1 point arrays) and kernels (T); costs is a
    sequence of T+1 functions of a point. Raises MissingValueError when a
    kernel row references a point absent from the next stage's table.
    """
    supports = system.supports
    kernels = system.kernels
    horizon = len(kernels)
    if len(supports) != horizon + 1:
        raise LengthMismatchError("supports and kernels lengths disagree")
    if len(costs) != horizon + 1:
        raise LengthMismatchError(
            f"need {horizon + 1} cost functions, got {len(costs)}"
        )
    table = ValueTable(int(np.asarray(supports[0]).shape[-1]))
    for x in supports[horizon]:
        table.set_value(horizon, x, float(costs[horizon](x)))
    for t in range(horizon - 1, -1, -1):
        def v_next(y, _t=t):
            return table.value(_t + 1, y)

        for x, row in zip(supports[t], kernels[t].rows):
            table.set_value(
                t, x, float(costs[t](x)) + float(sigma(x, row, v_next))
            )
    return table


def error_bound(lipschitz, kernel_consts, deltas, t: int) -> float:
    """sum_{tau=t}^{T-1} L_tau * (prod_{j=t}^{tau-1} K_j) * Delta_tau.

    lipschitz and deltas index stages 0..T-1, kernel_consts 0..T-2; the
    empty product at tau = t is 1.
    """
    L = np.asarray(lipschitz, dtype=np.float64)
    Kc = np.asarray(kernel_consts, dtype=np.float64)
    D = np.asarray(deltas, dtype=np.float64)
    horizon = len(L)
    if len(D) != horizon or len(Kc) != max(horizon - 1, 0):
        raise IndexRangeError(
            f"need {horizon} deltas and {max(horizon - 1, 0)} kernel "
            f"constants for {horizon} Lipschitz constants"
        )
    if not 0 <= t <= horizon - 1:
        raise IndexRangeError(f"stage {t} outside [0, {horizon - 1}]")
    if min(L.min(), D.min(), Kc.min() if len(Kc) else 0.0) < 0:
        raise ValidationError("bound constants must be nonnegative")
    total = 0.0
    for tau in range(t, horizon):
        total += float(L[tau]) * float(np.prod(Kc[t:tau])) * float(D[tau])
    return total
