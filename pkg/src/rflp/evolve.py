"""Evolutionary operators on bit-vector populations, and the GA baseline.

Populations are ``(size, n)`` uint8 arrays with a parallel array of
objective values.  Randomness always comes from a ``numpy.random.Generator``
owned by the calling solver loop.
"""
from __future__ import annotations

import time
from dataclasses import asdict, dataclass, field
from typing import Any, Callable

import numpy as np

from .core import Evaluator, Instance, ModelConfig, bitstring

# (generations, population size) per instance scale
GA_SCALE_DEFAULTS = {10: (60, 30), 50: (200, 200), 100: (400, 200), 600: (4600, 200)}


def scale_defaults(table: dict[int, tuple[int, int]], n: int) -> tuple[int, int]:
    """Parameters of the smallest tabulated scale that is at least ``n``."""
    for scale in sorted(table):
        if n <= scale:
            return table[scale]
    return table[max(table)]


@dataclass
class TraceEntry:
    generation: int
    best_objective: float
    mean_objective: float
    pop_size: int
    evaluations: int
    elapsed: float
    l3_value: float | None = None
    mu: int | None = None
    ls_expanded: int | None = None


@dataclass
class RunReport:
    solver: str
    best_genotype: np.ndarray
    best_objective: float
    m: int
    evaluations: int
    elapsed: float
    config: dict[str, Any]
    trace: list[TraceEntry] = field(default_factory=list)
    extras: dict[str, Any] = field(default_factory=dict)

    def to_dict(self, include_trace: bool = True) -> dict[str, Any]:
        out = {
            "solver": self.solver,
            "best_genotype": bitstring(self.best_genotype),
            "best_objective": self.best_objective,
            "m": self.m,
            "selected": int(self.best_genotype.sum()),
            "evaluations": self.evaluations,
            "elapsed": round(self.elapsed, 3),
            "config": self.config,
        }
        if include_trace:
            out["trace"] = [asdict(t) for t in self.trace]
        return out


@dataclass(frozen=True)
class GAConfig:
    generations: int
    pop_size: int
    crossover_rate: float = 0.9
    mutation_rate: float = 0.1
    seed: int = 0
    model: ModelConfig = ModelConfig()

    def __post_init__(self) -> None:
        if self.generations < 1:
            raise ValueError("generations must be >= 1")
        if self.pop_size < 2:
            raise ValueError("pop_size must be >= 2")
        for name in ("crossover_rate", "mutation_rate"):
            if not 0.0 <= getattr(self, name) <= 1.0:
                raise ValueError(f"{name} must lie in [0, 1]")

    def echo(self) -> dict[str, Any]:
        d = asdict(self)
        d["model"] = {"name": self.model.name, "alpha": self.model.alpha}
        return d


def init_population(mu: int, length: int, rng: np.random.Generator) -> np.ndarray:
    """Each bit is 0 or 1 with equal probability.  Not repaired."""
    if mu < 1 or length < 2:
        raise ValueError("need mu >= 1 and length >= 2")
    return rng.integers(0, 2, size=(mu, length), dtype=np.uint8)


def bitflip_mutation(
    genotypes: np.ndarray,
    rate: float,
    rng: np.random.Generator,
    repair: Callable[[np.ndarray], np.ndarray] | None = None,
) -> np.ndarray:
    """Flip every bit independently with probability ``rate``.

    Works on one genotype or a population.  ``repair`` (if given) receives
    the mutated array and must return it repaired.
    """
    if not 0.0 <= rate <= 1.0:
        raise ValueError("rate must lie in [0, 1]")
    g = np.asarray(genotypes, dtype=np.uint8)
    out = g ^ (rng.random(g.shape) < rate).astype(np.uint8)
    return repair(out) if repair is not None else out


def one_point_crossover(
    a: np.ndarray, b: np.ndarray, rng: np.random.Generator, cut: int | None = None
) -> tuple[np.ndarray, np.ndarray]:
    a = np.asarray(a, dtype=np.uint8)
    b = np.asarray(b, dtype=np.uint8)
    if a.shape != b.shape or a.ndim != 1:
        raise ValueError(f"parents must be 1-d with equal length, got {a.shape} and {b.shape}")
    if len(a) < 2:
        raise ValueError("crossover needs length >= 2")
    if cut is None:
        cut = int(rng.integers(1, len(a)))
    elif not 1 <= cut < len(a):
        raise ValueError(f"cut must lie in [1, {len(a) - 1}]")
    return np.concatenate([a[:cut], b[cut:]]), np.concatenate([b[:cut], a[cut:]])


def roulette_select(fitness: np.ndarray, rng: np.random.Generator, size=None):
    """Index (or indices) drawn with probability proportional to fitness."""
    fitness = np.asarray(fitness, dtype=float)
    if fitness.size == 0:
        raise ValueError("cannot select from an empty population")
    if np.any(fitness <= 0):
        raise ValueError("roulette selection needs positive fitness")
    return rng.choice(len(fitness), size=size, p=fitness / fitness.sum())


def mu_plus_lambda_survival(
    pools: list[tuple[np.ndarray, np.ndarray]], mu: int
) -> tuple[np.ndarray, np.ndarray]:
    """Keep the ``mu`` lowest-objective individuals over all pools.

    Ties go to the earlier pool, then the earlier index.
    """
    pops = [np.atleast_2d(p) for p, o in pools if len(o)]
    objs = [np.asarray(o, dtype=float) for _, o in pools if len(o)]
    total = sum(len(o) for o in objs)
    if mu < 1 or total < mu:
        raise ValueError(f"cannot select {mu} survivors from {total} individuals")
    pop = np.concatenate(pops)
    obj = np.concatenate(objs)
    keep = np.argsort(obj, kind="stable")[:mu]
    return pop[keep], obj[keep]


def _ga_offspring(
    pop: np.ndarray, obj: np.ndarray, config: GAConfig, rng: np.random.Generator
) -> np.ndarray:
    size, length = pop.shape
    pairs = (size + 1) // 2
    parents = roulette_select(1.0 / obj, rng, size=(pairs, 2))
    do_cross = rng.random(pairs) < config.crossover_rate
    cuts = np.where(do_cross, rng.integers(1, length, size=pairs), length)
    mask = np.arange(length)[None, :] < cuts[:, None]
    a, b = pop[parents[:, 0]], pop[parents[:, 1]]
    children = np.empty((2 * pairs, length), dtype=np.uint8)
    children[0::2] = np.where(mask, a, b)
    children[1::2] = np.where(mask, b, a)
    return bitflip_mutation(children[:size], config.mutation_rate, rng)


def run_ga(instance: Instance, config: GAConfig) -> RunReport:
    """Roulette selection, one-point crossover, bit-flip mutation, (mu+lambda).

    Parents are drawn as roulette pairs; crossover applies per pair with the
    crossover rate, otherwise the parents are copied.  Both children are
    kept, giving lambda = mu offspring per generation.
    """
    start = time.perf_counter()
    rng = np.random.default_rng(config.seed)
    ev = Evaluator(instance, config.model)
    pop = ev.repair_population(init_population(config.pop_size, instance.n, rng))
    obj = ev.evaluate_many(pop)
    trace = []
    for gen in range(1, config.generations + 1):
        children = ev.repair_population(_ga_offspring(pop, obj, config, rng))
        child_obj = ev.evaluate_many(children)
        pop, obj = mu_plus_lambda_survival([(pop, obj), (children, child_obj)], config.pop_size)
        trace.append(
            TraceEntry(
                generation=gen,
                best_objective=float(obj[0]),
                mean_objective=float(obj.mean()),
                pop_size=len(pop),
                evaluations=ev.evaluations,
                elapsed=time.perf_counter() - start,
            )
        )
    best = pop[0].copy()
    return RunReport(
        solver="ga",
        best_genotype=best,
        best_objective=float(obj[0]),
        m=config.model.levels(int(best.sum())),
        evaluations=ev.evaluations,
        elapsed=time.perf_counter() - start,
        config=config.echo(),
        trace=trace,
    )
