"""Exhaustive ground truth for small instances."""
from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .core import Evaluator, FeasibilityError, Instance, ModelConfig, as_genotype

DEFAULT_LIMIT = 20
# relative tolerance for "hit the optimum"
OPTIMAL_RTOL = 1e-9


class OracleLimitError(ValueError):
    pass


@dataclass(frozen=True)
class ExactResult:
    optimum_genotype: np.ndarray
    optimum_objective: float
    num_enumerated: int


def is_optimal(objective: float, optimum: float) -> bool:
    return abs(objective - optimum) <= OPTIMAL_RTOL * abs(optimum)


def _genotypes(start: int, stop: int, n: int) -> np.ndarray:
    # bit j of the genotype is bit (n-1-j) of the counter: counting order is lexicographic
    ints = np.arange(start, stop, dtype=np.int64)
    shifts = np.arange(n - 1, -1, -1, dtype=np.int64)
    return ((ints[:, None] >> shifts[None, :]) & 1).astype(np.uint8)


def brute_force_optimum(
    instance: Instance, config: ModelConfig, limit: int = DEFAULT_LIMIT
) -> ExactResult:
    """Evaluate every feasible genotype; ties go to the lexicographically smallest."""
    n = instance.n
    if n > limit:
        raise OracleLimitError(
            f"refusing exhaustive search over 2^{n} genotypes (n={n} > limit {limit})"
        )
    if n < config.min_facilities:
        raise FeasibilityError(f"n={n} admits no feasible genotype")
    ev = Evaluator(instance, config)
    best_obj = math.inf
    best = None
    count = 0
    block = 1 << 14
    for start in range(0, 1 << n, block):
        pop = _genotypes(start, min(start + block, 1 << n), n)
        pop = pop[pop.sum(axis=1) >= config.min_facilities]
        if not len(pop):
            continue
        count += len(pop)
        obj = ev.evaluate_many(pop)
        i = int(np.argmin(obj))
        if obj[i] < best_obj:
            best_obj = float(obj[i])
            best = pop[i].copy()
    return ExactResult(optimum_genotype=best, optimum_objective=best_obj, num_enumerated=count)


def independent_evaluate(genotype, instance: Instance, config: ModelConfig) -> float:
    """Recompute the objective with plain loops, for cross-checking :class:`Evaluator`."""
    g = [int(b) for b in as_genotype(genotype)]
    selected = [j for j, b in enumerate(g) if b]
    if len(selected) < config.min_facilities:
        raise FeasibilityError(f"{len(selected)} selected sites is infeasible")
    m = len(selected) if config.fixed_m is None else config.fixed_m
    p = instance.failure_prob
    pts = [(float(x), float(y)) for x, y in instance.coords]

    # selection sort of the open sites by (distance, index) for every customer
    ranked = []
    for i in range(instance.n):
        rest = [(math.hypot(pts[i][0] - pts[j][0], pts[i][1] - pts[j][1]), j) for j in selected]
        order = []
        while rest:
            low = min(range(len(rest)), key=lambda a: rest[a])
            order.append(rest.pop(low))
        ranked.append(order)

    # sum level by level, customers in reverse
    transport = 0.0
    for r in range(m - 1, -1, -1):
        weight = p**r * (1.0 - p)
        for i in range(instance.n - 1, -1, -1):
            transport += int(instance.demands[i]) * ranked[i][r][0] * weight
    fixed = sum(int(instance.fixed_costs[j]) for j in reversed(selected))
    return config.alpha * transport + fixed
