"""Problem data, allocation decoding and the expected-cost objective.

Customers and candidate sites share one node set.  Transport cost per unit
of demand is the Euclidean distance between nodes.  A customer is served by
its selected sites in ascending order of distance; the level-``r`` site only
serves when the ``r`` closer ones have failed, which happens with probability
``p**r * (1 - p)``.
"""
from __future__ import annotations

from dataclasses import dataclass, field
from typing import Any, Sequence

import numpy as np

MIN_FACILITIES = 2


class FeasibilityError(ValueError):
    """Raised when a genotype violates the minimum-facility constraint."""


@dataclass(frozen=True, eq=False)
class Instance:
    coords: np.ndarray
    demands: np.ndarray
    fixed_costs: np.ndarray
    failure_prob: float
    metadata: dict[str, Any] = field(default_factory=dict)

    def __post_init__(self) -> None:
        coords = np.asarray(self.coords, dtype=float).reshape(-1, 2)
        demands = np.asarray(self.demands, dtype=np.int64)
        fixed_costs = np.asarray(self.fixed_costs, dtype=np.int64)
        n = len(coords)
        if n == 0:
            raise ValueError("instance must have at least one node")
        if demands.shape != (n,) or fixed_costs.shape != (n,):
            raise ValueError(
                f"demands and fixed_costs must have length {n}, "
                f"got {demands.shape} and {fixed_costs.shape}"
            )
        if np.any(demands < 0):
            raise ValueError("demands must be non-negative")
        if np.any(fixed_costs <= 0):
            raise ValueError("fixed costs must be positive")
        if not 0.0 <= self.failure_prob < 1.0:
            raise ValueError(f"failure_prob must lie in [0, 1), got {self.failure_prob}")
        for name, arr in (("coords", coords), ("demands", demands), ("fixed_costs", fixed_costs)):
            arr.setflags(write=False)
            object.__setattr__(self, name, arr)
        object.__setattr__(self, "failure_prob", float(self.failure_prob))

    @property
    def n(self) -> int:
        return len(self.coords)

    def __eq__(self, other: object) -> bool:
        if not isinstance(other, Instance):
            return NotImplemented
        return (
            np.array_equal(self.coords, other.coords)
            and np.array_equal(self.demands, other.demands)
            and np.array_equal(self.fixed_costs, other.fixed_costs)
            and self.failure_prob == other.failure_prob
            and self.metadata == other.metadata
        )

    __hash__ = None  # type: ignore[assignment]


@dataclass(frozen=True)
class ModelConfig:
    """Weight on the transport term and the allocation rule.

    ``fixed_m=None`` allocates every selected site to each customer
    (m equals the number of selected sites); an integer fixes m.
    """

    alpha: float = 1.0
    fixed_m: int | None = None

    def __post_init__(self) -> None:
        if self.alpha < 0:
            raise ValueError("alpha must be non-negative")
        if self.fixed_m is not None and self.fixed_m < MIN_FACILITIES:
            raise ValueError(f"fixed m must be >= {MIN_FACILITIES}, got {self.fixed_m}")

    @classmethod
    def from_name(cls, model: str, alpha: float = 1.0) -> "ModelConfig":
        if model == "m2":
            return cls(alpha=alpha, fixed_m=2)
        if model == "msum":
            return cls(alpha=alpha, fixed_m=None)
        raise ValueError(f"unknown model {model!r}; expected 'm2' or 'msum'")

    @property
    def name(self) -> str:
        if self.fixed_m is None:
            return "msum"
        return f"m{self.fixed_m}"

    @property
    def min_facilities(self) -> int:
        """Smallest popcount the allocation rule can decode."""
        return max(MIN_FACILITIES, self.fixed_m or 0)

    def levels(self, popcount: int) -> int:
        return popcount if self.fixed_m is None else self.fixed_m


@dataclass(frozen=True)
class Allocation:
    """Per customer, the serving sites ordered by level."""

    assign: tuple[tuple[int, ...], ...]
    m: int


@dataclass(frozen=True)
class EvaluatedSolution:
    genotype: np.ndarray
    objective: float
    m: int


def as_genotype(bits: Sequence[int] | np.ndarray) -> np.ndarray:
    g = np.asarray(bits)
    if g.ndim != 1:
        raise ValueError("genotype must be one-dimensional")
    if g.size and not np.isin(g, (0, 1)).all():
        raise ValueError("genotype entries must be 0 or 1")
    return g.astype(np.uint8)


def bitstring(genotype: np.ndarray) -> str:
    return "".join("1" if b else "0" for b in genotype)


def from_bitstring(s: str) -> np.ndarray:
    if not s or set(s) - {"0", "1"}:
        raise ValueError(f"not a bit string: {s!r}")
    return np.fromiter((c == "1" for c in s), dtype=np.uint8, count=len(s))


def distance(instance: Instance, i: int, j: int) -> float:
    n = instance.n
    if not (0 <= i < n and 0 <= j < n):
        raise IndexError(f"node index out of range for n={n}: ({i}, {j})")
    dx, dy = instance.coords[i] - instance.coords[j]
    return float(np.sqrt(dx * dx + dy * dy))


def distance_matrix(instance: Instance) -> np.ndarray:
    diff = instance.coords[:, None, :] - instance.coords[None, :, :]
    sq = diff * diff
    return np.sqrt(sq[..., 0] + sq[..., 1])


def nearest_order(instance: Instance, dist: np.ndarray | None = None) -> np.ndarray:
    """Row ``i`` lists all sites by ascending distance from customer ``i``.

    Equal distances keep ascending site index (stable sort).
    """
    if dist is None:
        dist = distance_matrix(instance)
    return np.argsort(dist, axis=1, kind="stable")


def is_feasible(genotype: Sequence[int] | np.ndarray, min_count: int = MIN_FACILITIES) -> bool:
    return int(np.count_nonzero(genotype)) >= min_count


def repair_order(instance: Instance) -> np.ndarray:
    """Sites by ascending fixed cost, ties by index."""
    return np.argsort(instance.fixed_costs, kind="stable")


def repair(
    genotype: Sequence[int] | np.ndarray,
    instance: Instance,
    min_count: int = MIN_FACILITIES,
    order: np.ndarray | None = None,
) -> np.ndarray:
    """Open the cheapest closed sites until at least ``min_count`` are open.

    Feasible input is returned unchanged (as a copy).  Sites are only ever
    opened, never closed.
    """
    g = as_genotype(genotype).copy()
    if len(g) < min_count:
        raise FeasibilityError(f"cannot open {min_count} sites on {len(g)} nodes")
    missing = min_count - int(g.sum())
    if missing <= 0:
        return g
    if order is None:
        order = repair_order(instance)
    for j in order:
        if not g[j]:
            g[j] = 1
            missing -= 1
            if missing == 0:
                break
    return g


def repair_population(
    pop: np.ndarray, instance: Instance, min_count: int, order: np.ndarray
) -> np.ndarray:
    """Row-wise :func:`repair`, in place; returns ``pop``.  A 1-d genotype is one row."""
    rows = pop.reshape(1, -1) if pop.ndim == 1 else pop
    for row in np.flatnonzero(rows.sum(axis=1) < min_count):
        rows[row] = repair(rows[row], instance, min_count, order)
    return pop


def decode_allocation(
    genotype: Sequence[int] | np.ndarray, order: np.ndarray, config: ModelConfig
) -> Allocation:
    g = as_genotype(genotype)
    k = int(g.sum())
    if k < config.min_facilities:
        raise FeasibilityError(
            f"{k} selected sites; model {config.name} needs at least {config.min_facilities}"
        )
    m = config.levels(k)
    sel = g.astype(bool)
    assign = tuple(tuple(int(j) for j in row[sel[row]][:m]) for row in order)
    return Allocation(assign=assign, m=m)


def verify_allocation(
    allocation: Allocation,
    genotype: Sequence[int] | np.ndarray,
    instance: Instance | None = None,
) -> bool:
    """Check an allocation against the constraints for ``genotype``.

    With ``instance`` given, also require that each customer's sites come in
    non-decreasing distance order.
    """
    g = as_genotype(genotype)
    n = len(g)
    if allocation.m < MIN_FACILITIES or allocation.m > int(g.sum()):
        return False
    if instance is not None and len(allocation.assign) != instance.n:
        return False
    for i, sites in enumerate(allocation.assign):
        if len(sites) != allocation.m or len(set(sites)) != len(sites):
            return False
        if any(not (0 <= j < n) or not g[j] for j in sites):
            return False
        if instance is not None:
            d = [distance(instance, i, j) for j in sites]
            if any(a > b for a, b in zip(d, d[1:])):
                return False
    return True


class Evaluator:
    """Vectorised objective for one instance and model.

    Distances and per-customer site orders are computed once.  Every call
    to :meth:`evaluate_many` adds the number of rows to ``evaluations``.
    """

    # cap on pop_chunk * n * n temporaries
    _CHUNK_ELEMS = 1 << 22

    def __init__(self, instance: Instance, config: ModelConfig):
        self.instance = instance
        self.config = config
        n = instance.n
        self.dist = distance_matrix(instance)
        self.order = nearest_order(instance, self.dist)
        self.sorted_dist = np.take_along_axis(self.dist, self.order, axis=1)
        p = instance.failure_prob
        levels = np.arange(n)
        weights = p**levels * (1.0 - p)
        if config.fixed_m is not None:
            weights[levels >= config.fixed_m] = 0.0
        self.level_weights = weights
        self.fixed_costs = instance.fixed_costs.astype(float)
        self.demands = instance.demands.astype(float)
        self.min_facilities = config.min_facilities
        self.repair_order = repair_order(instance)
        self.evaluations = 0

    def repair(self, genotype: np.ndarray) -> np.ndarray:
        return repair(genotype, self.instance, self.min_facilities, self.repair_order)

    def repair_population(self, pop: np.ndarray) -> np.ndarray:
        return repair_population(pop, self.instance, self.min_facilities, self.repair_order)

    def evaluate_many(self, pop: np.ndarray) -> np.ndarray:
        pop = np.atleast_2d(np.asarray(pop, dtype=np.uint8))
        counts = pop.sum(axis=1)
        if np.any(counts < self.min_facilities):
            bad = int(np.flatnonzero(counts < self.min_facilities)[0])
            raise FeasibilityError(
                f"row {bad} selects {int(counts[bad])} sites; "
                f"model {self.config.name} needs at least {self.min_facilities}"
            )
        n = self.instance.n
        out = np.empty(len(pop))
        chunk = max(1, self._CHUNK_ELEMS // (n * n))
        for start in range(0, len(pop), chunk):
            block = pop[start : start + chunk]
            # sel[b, i, a]: whether the a-th nearest site of customer i is open
            sel = block[:, self.order].astype(bool)
            level = np.cumsum(sel, axis=2) - 1
            np.maximum(level, 0, out=level)
            w = np.where(sel, self.level_weights[level], 0.0)
            w *= self.sorted_dist
            # explicit elementwise accumulation: numpy's sum() picks its summation
            # order from the array shape, which would make results batch-dependent
            per_customer = np.zeros(w.shape[:2])
            for a in range(n):
                per_customer += w[:, :, a]
            transport = np.zeros(len(block))
            fixed = np.zeros(len(block))
            for i in range(n):
                transport += per_customer[:, i] * self.demands[i]
                fixed += block[:, i] * self.fixed_costs[i]
            out[start : start + chunk] = fixed + self.config.alpha * transport
        self.evaluations += len(pop)
        return out

    def evaluate(self, genotype: Sequence[int] | np.ndarray) -> float:
        return float(self.evaluate_many(as_genotype(genotype)[None, :])[0])


def evaluate(
    genotype: Sequence[int] | np.ndarray, instance: Instance, config: ModelConfig
) -> EvaluatedSolution:
    g = as_genotype(genotype)
    if len(g) != instance.n:
        raise ValueError(f"genotype length {len(g)} does not match n={instance.n}")
    objective = Evaluator(instance, config).evaluate(g)
    return EvaluatedSolution(genotype=g, objective=objective, m=config.levels(int(g.sum())))
