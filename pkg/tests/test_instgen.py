import io
import json

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from rflp.core import Instance
from rflp.instgen import (
    GenParams,
    InstanceFormatError,
    dumps_instance,
    generate_instance,
    loads_instance,
    mix_seed,
    read_instance,
    splitmix64,
    write_instance,
)

TINY3_FILE = """{
  "format": "rflp-instance",
  "version": 1,
  "n": 3,
  "failure_prob": 0.05,
  "coords": [[0.0, 0.0], [1.0, 0.0], [0.0, 1.0]],
  "demands": [100, 0, 200],
  "fixed_costs": [500, 600, 700]
}
"""


def test_splitmix64_reference_values():
    # published SplitMix64 outputs for seed 1234567
    stream = splitmix64(1234567)
    assert [next(stream) for _ in range(3)] == [
        6457827717110365317, 3203168211198807973, 9817491932198370423,
    ]


def test_seed_determinism():
    a = generate_instance(GenParams(n=10, seed=42))
    b = generate_instance(GenParams(n=10, seed=42))
    assert a == b
    assert a != generate_instance(GenParams(n=10, seed=43))


def test_generate_sizes_and_ranges():
    inst = generate_instance(GenParams(n=100, seed=1))
    assert inst.n == 100 and len(inst.demands) == 100 and len(inst.fixed_costs) == 100
    assert inst.demands.min() >= 0 and inst.demands.max() <= 1000
    assert inst.failure_prob == 0.05


def test_degenerate_range():
    inst = generate_instance(GenParams(n=20, seed=3, demand_range=(5, 5)))
    assert set(inst.demands.tolist()) == {5}


def test_n_zero_rejected():
    with pytest.raises(ValueError):
        generate_instance(GenParams(n=0))


@settings(max_examples=100, deadline=None)
@given(seed=st.integers(0, 2**64 - 1), n=st.integers(1, 40))
def test_generated_values_in_ranges(seed, n):
    inst = generate_instance(GenParams(n=n, seed=seed))
    assert np.all((inst.coords >= 0) & (inst.coords <= 1))
    assert np.all((inst.demands >= 0) & (inst.demands <= 1000))
    assert np.all((inst.fixed_costs >= 500) & (inst.fixed_costs <= 1500))


def test_integer_draws_cover_both_endpoints():
    inst = generate_instance(GenParams(n=2000, seed=9, demand_range=(0, 3)))
    assert set(inst.demands.tolist()) == {0, 1, 2, 3}


@settings(max_examples=40, deadline=None)
@given(seed=st.integers(0, 2**64 - 1), n=st.integers(1, 30))
def test_round_trip(seed, n):
    inst = generate_instance(GenParams(n=n, seed=seed))
    back = loads_instance(dumps_instance(inst))
    assert back == inst
    assert back.coords.tobytes() == inst.coords.tobytes()


def test_round_trip_via_path_and_stdin(tmp_path, monkeypatch):
    inst = generate_instance(GenParams(n=7, seed=5))
    path = tmp_path / "x.json"
    write_instance(inst, path)
    assert read_instance(path) == inst
    monkeypatch.setattr("sys.stdin", io.StringIO(path.read_text()))
    assert read_instance("-") == inst


def test_hand_written_tiny3():
    inst = loads_instance(TINY3_FILE)
    assert inst.n == 3
    assert inst.demands.tolist() == [100, 0, 200]
    assert inst.metadata == {}


def test_missing_field_is_named():
    doc = json.loads(TINY3_FILE)
    del doc["demands"]
    with pytest.raises(InstanceFormatError, match="demands"):
        loads_instance(json.dumps(doc))


def test_version_mismatch():
    doc = json.loads(TINY3_FILE)
    doc["version"] = 2
    with pytest.raises(InstanceFormatError, match="version 2"):
        loads_instance(json.dumps(doc))


def test_syntax_error_names_line():
    with pytest.raises(InstanceFormatError, match="line 3"):
        loads_instance('{\n "n": 3,\n oops\n}')


def test_bad_entries():
    doc = json.loads(TINY3_FILE)
    doc["demands"] = [1, 2]
    with pytest.raises(InstanceFormatError, match="expected n=3"):
        loads_instance(json.dumps(doc))
    doc = json.loads(TINY3_FILE)
    doc["fixed_costs"][1] = 1.5
    with pytest.raises(InstanceFormatError, match=r"fixed_costs'\[1\]"):
        loads_instance(json.dumps(doc))
    doc = json.loads(TINY3_FILE)
    doc["fixed_costs"][1] = 0
    with pytest.raises(InstanceFormatError, match="positive"):
        loads_instance(json.dumps(doc))


def test_mix_seed_distinguishes_parts():
    seeds = {mix_seed(7, k, r) for k in range(8) for r in range(30)}
    assert len(seeds) == 240
    assert mix_seed(1, 2) != mix_seed(2, 1)
