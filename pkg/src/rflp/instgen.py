"""Seeded instance generation and the instance file format.

Generation uses SplitMix64 so that any implementation can reproduce an
instance from its parameters:

* state starts at ``seed``; each draw adds ``0x9E3779B97F4A7C15`` (mod 2**64)
  and returns the standard SplitMix64 finaliser of the new state;
* a real in ``[lo, hi)`` is ``lo + (hi - lo) * ((x >> 11) * 2**-53)``;
* an integer in ``[lo, hi]`` rejects ``x >= 2**64 - 2**64 % span`` (with
  ``span = hi - lo + 1``) and returns ``lo + x % span``;
* draw order: x then y for every node, then every demand, then every
  fixed cost.

Instance files are JSON documents (``format``, ``version``, ``n``,
``failure_prob``, ``coords``, ``demands``, ``fixed_costs``, ``metadata``).
Floats are written with ``repr``, which round-trips exactly.
"""
from __future__ import annotations

import io
import json
import sys
from dataclasses import asdict, dataclass
from pathlib import Path
from typing import IO, Iterator

import numpy as np

from .core import Instance

FORMAT_NAME = "rflp-instance"
FORMAT_VERSION = 1

_MASK64 = (1 << 64) - 1
_GOLDEN = 0x9E3779B97F4A7C15


class InstanceFormatError(ValueError):
    pass


def splitmix64(seed: int) -> Iterator[int]:
    state = seed & _MASK64
    while True:
        state = (state + _GOLDEN) & _MASK64
        z = state
        z = ((z ^ (z >> 30)) * 0xBF58476D1CE4E5B9) & _MASK64
        z = ((z ^ (z >> 27)) * 0x94D049BB133111EB) & _MASK64
        yield z ^ (z >> 31)


def mix_seed(*parts: int) -> int:
    """Fold integers into one 64-bit seed (one SplitMix64 step per part)."""
    h = 0
    for part in parts:
        h = next(splitmix64(h ^ (part & _MASK64)))
    return h


def _uniform(stream: Iterator[int], lo: float, hi: float) -> float:
    return lo + (hi - lo) * ((next(stream) >> 11) * 2.0**-53)


def _integer(stream: Iterator[int], lo: int, hi: int) -> int:
    span = hi - lo + 1
    limit = (1 << 64) - (1 << 64) % span
    while True:
        x = next(stream)
        if x < limit:
            return lo + x % span


@dataclass(frozen=True)
class GenParams:
    n: int
    seed: int = 0
    coord_range: tuple[float, float] = (0.0, 1.0)
    demand_range: tuple[int, int] = (0, 1000)
    fixed_cost_range: tuple[int, int] = (500, 1500)
    failure_prob: float = 0.05

    def __post_init__(self) -> None:
        if self.n < 1:
            raise ValueError(f"n must be positive, got {self.n}")
        if not 0 <= self.seed <= _MASK64:
            raise ValueError("seed must be an unsigned 64-bit integer")
        for name in ("coord_range", "demand_range", "fixed_cost_range"):
            lo, hi = getattr(self, name)
            if lo > hi:
                raise ValueError(f"{name} is empty: {(lo, hi)}")
        if self.demand_range[0] < 0:
            raise ValueError("demands must be non-negative")
        if self.fixed_cost_range[0] <= 0:
            raise ValueError("fixed costs must be positive")
        if not 0.0 <= self.failure_prob < 1.0:
            raise ValueError("failure_prob must lie in [0, 1)")


def generate_instance(params: GenParams) -> Instance:
    stream = splitmix64(params.seed)
    lo, hi = params.coord_range
    coords = [(_uniform(stream, lo, hi), _uniform(stream, lo, hi)) for _ in range(params.n)]
    demands = [_integer(stream, *params.demand_range) for _ in range(params.n)]
    costs = [_integer(stream, *params.fixed_cost_range) for _ in range(params.n)]
    meta = asdict(params)
    for key in ("coord_range", "demand_range", "fixed_cost_range"):
        meta[key] = list(meta[key])
    return Instance(
        coords=np.array(coords),
        demands=np.array(demands),
        fixed_costs=np.array(costs),
        failure_prob=params.failure_prob,
        metadata={"generator": "splitmix64", "params": meta},
    )


def instance_to_dict(instance: Instance) -> dict:
    return {
        "format": FORMAT_NAME,
        "version": FORMAT_VERSION,
        "n": instance.n,
        "failure_prob": instance.failure_prob,
        "coords": instance.coords.tolist(),
        "demands": instance.demands.tolist(),
        "fixed_costs": instance.fixed_costs.tolist(),
        "metadata": instance.metadata,
    }


def dumps_instance(instance: Instance) -> str:
    doc = instance_to_dict(instance)
    lines = ["{"]
    for key in ("format", "version", "n", "failure_prob"):
        lines.append(f"  {json.dumps(key)}: {json.dumps(doc[key])},")
    lines.append('  "coords": [')
    lines.append(",\n".join(f"    [{x!r}, {y!r}]" for x, y in doc["coords"]))
    lines.append("  ],")
    for key in ("demands", "fixed_costs"):
        lines.append(f"  {json.dumps(key)}: {json.dumps(doc[key])},")
    lines.append(f'  "metadata": {json.dumps(doc["metadata"], sort_keys=True)}')
    lines.append("}")
    return "\n".join(lines) + "\n"


def write_instance(instance: Instance, destination: str | Path | IO[str]) -> None:
    text = dumps_instance(instance)
    if isinstance(destination, (str, Path)):
        Path(destination).write_text(text)
    else:
        destination.write(text)


def _field(doc: dict, name: str, kind: type | tuple[type, ...]):
    if name not in doc:
        raise InstanceFormatError(f"missing field {name!r}")
    value = doc[name]
    if not isinstance(value, kind) or isinstance(value, bool):
        raise InstanceFormatError(f"field {name!r} has wrong type {type(value).__name__}")
    return value


def loads_instance(text: str) -> Instance:
    try:
        doc = json.loads(text)
    except json.JSONDecodeError as exc:
        raise InstanceFormatError(f"line {exc.lineno}, column {exc.colno}: {exc.msg}") from None
    if not isinstance(doc, dict):
        raise InstanceFormatError("top level must be an object")
    if doc.get("format") != FORMAT_NAME:
        raise InstanceFormatError(f"field 'format' must be {FORMAT_NAME!r}")
    version = _field(doc, "version", int)
    if version != FORMAT_VERSION:
        raise InstanceFormatError(
            f"unsupported instance format version {version} (this reader handles {FORMAT_VERSION})"
        )
    n = _field(doc, "n", int)
    failure_prob = _field(doc, "failure_prob", (int, float))
    coords = _field(doc, "coords", list)
    demands = _field(doc, "demands", list)
    fixed_costs = _field(doc, "fixed_costs", list)
    metadata = doc.get("metadata", {})
    if not isinstance(metadata, dict):
        raise InstanceFormatError("field 'metadata' must be an object")
    for name, arr in (("coords", coords), ("demands", demands), ("fixed_costs", fixed_costs)):
        if len(arr) != n:
            raise InstanceFormatError(f"field {name!r} has {len(arr)} entries, expected n={n}")
    for k, pt in enumerate(coords):
        if (
            not isinstance(pt, list)
            or len(pt) != 2
            or not all(isinstance(v, (int, float)) and not isinstance(v, bool) for v in pt)
        ):
            raise InstanceFormatError(f"field 'coords'[{k}] must be a pair of numbers")
    for name, arr in (("demands", demands), ("fixed_costs", fixed_costs)):
        for k, v in enumerate(arr):
            if not isinstance(v, int) or isinstance(v, bool):
                raise InstanceFormatError(f"field {name!r}[{k}] must be an integer")
    try:
        return Instance(
            coords=np.array(coords, dtype=float).reshape(n, 2),
            demands=np.array(demands, dtype=np.int64),
            fixed_costs=np.array(fixed_costs, dtype=np.int64),
            failure_prob=float(failure_prob),
            metadata=metadata,
        )
    except ValueError as exc:
        raise InstanceFormatError(str(exc)) from None


def read_instance(source: str | Path | IO[str]) -> Instance:
    """Read an instance from a path, ``"-"`` (standard input) or a text stream."""
    if isinstance(source, io.IOBase) or hasattr(source, "read"):
        return loads_instance(source.read())  # type: ignore[union-attr]
    if str(source) == "-":
        return loads_instance(sys.stdin.read())
    return loads_instance(Path(source).read_text())
