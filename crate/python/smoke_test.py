"""Smoke test for the safeq extension module. Build it first (see README)."""

import json
import math

import safeq


def main():
    m = safeq.Machine(2, seed=1)
    q = m.allocate(1)
    m.h(q)
    copy = m.dup(q)
    amps = m.amplitudes()
    assert abs(amps[0] - 1 / math.sqrt(2)) < 1e-12
    assert abs(amps[3] - 1 / math.sqrt(2)) < 1e-12
    m.forget(copy, q)
    assert m.free_count == 1

    bad = m.allocate(1)
    m.h(bad)
    try:
        m.forget(bad)
    except safeq.SafeqError:
        pass
    else:
        raise AssertionError("forgetting |+> should fail")

    g = safeq.Machine(3, seed=7)
    assert 0 <= g.grover(3, [5]) < 8
    assert g.queries == safeq.grover_iterations(8, 1) == 2

    out = safeq.durr_hoyer([5, 3, 7, 1], seed=42)
    assert out["value"] in (5, 3, 7, 1)
    assert out["steps"] <= out["budget"] == safeq.runtime_budget(4)

    a, b = safeq.find_collision(list(range(16)), 8, r=2, seed=3)
    assert a != b and a % 8 == b % 8

    amps = safeq.prepare_uniform_m(6)
    assert all(abs(x - 1 / math.sqrt(6)) < 1e-10 for x in amps[:6])
    assert all(abs(x) < 1e-10 for x in amps[6:])

    report = json.loads(safeq.run_report(["randint", "--bound", "11", "--trials", "5"]))
    assert all(0 <= r["outcome"] < 11 for r in report["results"])

    print("python smoke test passed")


if __name__ == "__main__":
    main()
