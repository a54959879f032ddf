"""Evolutionary algorithm with memorable local search (EAMLS).

Each generation mutates every member of the population, runs a Hamming-1
local search from the best individuals that were never searched before,
and keeps the best ``mu`` of parents, mutants and neighbours.  The l3-value
(share of the new population already produced by earlier local searches)
drives population growth.
"""
from __future__ import annotations

import time
from dataclasses import asdict, dataclass, field
from typing import Any, Callable

import numpy as np

from .core import Evaluator, Instance, ModelConfig
from .evolve import (
    RunReport,
    TraceEntry,
    bitflip_mutation,
    init_population,
    mu_plus_lambda_survival,
)

# (generations, initial population size) per instance scale
EAMLS_SCALE_DEFAULTS = {10: (10, 20), 50: (20, 20), 100: (50, 100), 600: (250, 200)}


@dataclass(frozen=True)
class EamlsConfig:
    generations: int
    pop_size: int
    mutation_rate: float = 0.1
    ls_count: int = 10
    l3_threshold: float = 0.8
    pop_step: int = 100
    seed: int = 0
    model: ModelConfig = ModelConfig()

    def __post_init__(self) -> None:
        if self.generations < 1:
            raise ValueError("generations must be >= 1")
        if self.pop_size < 1:
            raise ValueError("pop_size must be >= 1")
        if not 0.0 <= self.mutation_rate <= 1.0:
            raise ValueError("mutation_rate must lie in [0, 1]")
        if self.ls_count < 1:
            raise ValueError("ls_count must be >= 1")
        if not 0.0 <= self.l3_threshold <= 1.0:
            raise ValueError("l3_threshold must lie in [0, 1]")
        if self.pop_step < 0:
            raise ValueError("pop_step must be >= 0")

    def echo(self) -> dict[str, Any]:
        d = asdict(self)
        d["model"] = {"name": self.model.name, "alpha": self.model.alpha}
        return d


@dataclass
class SearchMemory:
    """Genotype keys (``bytes``) seen by the local search during one run."""

    searched: set[bytes] = field(default_factory=set)
    all_neighbor_inds: set[bytes] = field(default_factory=set)


@dataclass
class LocalSearchResult:
    genotypes: np.ndarray
    objectives: np.ndarray
    expanded: list[np.ndarray]


def _key(genotype: np.ndarray) -> bytes:
    return np.ascontiguousarray(genotype, dtype=np.uint8).tobytes()


def _unique_rows(rows: np.ndarray) -> np.ndarray:
    seen: set[bytes] = set()
    keep = []
    for idx, row in enumerate(rows):
        k = _key(row)
        if k not in seen:
            seen.add(k)
            keep.append(idx)
    return rows[keep]


def hamming_neighborhood(
    genotype: np.ndarray, repair: Callable[[np.ndarray], np.ndarray] | None = None
) -> np.ndarray:
    """All single-bit flips of ``genotype``, repaired, duplicates removed.

    ``repair`` is applied to the whole ``(length, length)`` array of flips.
    Row order follows the flipped bit.
    """
    g = np.asarray(genotype, dtype=np.uint8)
    if g.ndim != 1 or len(g) < 2:
        raise ValueError("neighbourhood needs a 1-d genotype of length >= 2")
    flips = np.tile(g, (len(g), 1))
    idx = np.arange(len(g))
    flips[idx, idx] ^= 1
    if repair is not None:
        flips = repair(flips)
    return _unique_rows(flips)


def memorable_local_search(
    pop: np.ndarray,
    pop_obj: np.ndarray,
    offspring: np.ndarray,
    offspring_obj: np.ndarray,
    memory: SearchMemory,
    ls_count: int,
    evaluator: Evaluator,
) -> LocalSearchResult:
    """Expand the neighbourhoods of up to ``ls_count`` never-searched genotypes.

    Candidates are parents and offspring together, best objective first.  A
    genotype enters ``memory.searched`` when it is expanded.
    """
    pool = np.concatenate([pop, offspring])
    pool_obj = np.concatenate([pop_obj, offspring_obj])
    expanded: list[np.ndarray] = []
    neighbourhoods = []
    for idx in np.argsort(pool_obj, kind="stable"):
        if len(expanded) >= ls_count:
            break
        k = _key(pool[idx])
        if k in memory.searched:
            continue
        memory.searched.add(k)
        expanded.append(pool[idx].copy())
        neighbourhoods.append(hamming_neighborhood(pool[idx], evaluator.repair_population))
    if not neighbourhoods:
        empty = np.empty((0, pool.shape[1]), dtype=np.uint8)
        return LocalSearchResult(empty, np.empty(0), expanded)
    genotypes = _unique_rows(np.concatenate(neighbourhoods))
    return LocalSearchResult(genotypes, evaluator.evaluate_many(genotypes), expanded)


def l3_value(pop: np.ndarray, all_neighbor_inds: set[bytes]) -> float:
    """Fraction of population slots whose genotype is in ``all_neighbor_inds``."""
    if len(pop) == 0:
        raise ValueError("l3-value of an empty population is undefined")
    hits = sum(_key(row) in all_neighbor_inds for row in pop)
    return hits / len(pop)


def run_eamls(
    instance: Instance,
    config: EamlsConfig,
    observer: Callable[[int, LocalSearchResult], None] | None = None,
) -> RunReport:
    """Run EAMLS; ``observer(generation, ls_result)`` sees every local search."""
    start = time.perf_counter()
    rng = np.random.default_rng(config.seed)
    ev = Evaluator(instance, config.model)
    memory = SearchMemory()
    mu = config.pop_size

    pop = ev.repair_population(init_population(mu, instance.n, rng))
    obj = ev.evaluate_many(pop)
    trace = []
    for gen in range(1, config.generations + 1):
        offspring = bitflip_mutation(pop, config.mutation_rate, rng, ev.repair_population)
        offspring_obj = ev.evaluate_many(offspring)
        ls = memorable_local_search(pop, obj, offspring, offspring_obj, memory, config.ls_count, ev)
        if observer is not None:
            observer(gen, ls)
        pools = [(pop, obj), (offspring, offspring_obj), (ls.genotypes, ls.objectives)]
        pool_size = len(obj) + len(offspring_obj) + len(ls.objectives)
        pop, obj = mu_plus_lambda_survival(pools, min(mu, pool_size))
        l3 = l3_value(pop, memory.all_neighbor_inds)
        trace.append(
            TraceEntry(
                generation=gen,
                best_objective=float(obj[0]),
                mean_objective=float(obj.mean()),
                pop_size=len(pop),
                evaluations=ev.evaluations,
                elapsed=time.perf_counter() - start,
                l3_value=l3,
                mu=mu,
                ls_expanded=len(ls.expanded),
            )
        )
        if l3 > config.l3_threshold:
            mu += config.pop_step
        memory.all_neighbor_inds.update(_key(row) for row in ls.genotypes)

    best = pop[0].copy()
    return RunReport(
        solver="eamls",
        best_genotype=best,
        best_objective=float(obj[0]),
        m=config.model.levels(int(best.sum())),
        evaluations=ev.evaluations,
        elapsed=time.perf_counter() - start,
        config=config.echo(),
        trace=trace,
        extras={"final_mu": mu, "searched": len(memory.searched),
                "all_neighbor_inds": len(memory.all_neighbor_inds)},
    )
