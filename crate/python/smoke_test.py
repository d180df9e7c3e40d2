"""Smoke test for the more_sched_py extension.

Build the extension and put it on the import path first:

    cargo build --release -p more-sched-py
    cp target/release/libmore_sched_py.so python/more_sched_py.so
    python3 python/smoke_test.py
"""

import csv
import io
import json
import math
import os
import sys

sys.path.insert(0, os.path.dirname(os.path.abspath(__file__)))

import more_sched_py as ms  # noqa: E402


def main():
    spec = ms.ChargerSpec()
    assert math.isclose(spec.power(0.0), 1.0)
    assert spec.power(6.5) == 0.0
    assert math.isclose(ms.max_side_for_error(0.75), 7.0710678118654755)
    assert ms.utility(30.0, 60.0) == 0.5
    try:
        ms.utility(1.0, 0.0)
    except ValueError:
        pass
    else:
        raise AssertionError("zero demand accepted")

    sc = ms.Scenario.generate(seed=3, nodes=12, plane=30.0)
    assert len(sc) == 12 and sc.node_count == 12
    again = ms.Scenario.from_json(sc.to_json())
    assert again.nodes() == sc.nodes()

    more = ms.run_pipeline(sc, scheme="more", seed=3)
    edf = ms.run_pipeline(sc, scheme="edf", seed=3)
    for run in (more, edf):
        assert 0.0 <= run["utility_travel"] <= run["utility_morer"] + 1e-9
        assert run["utility_morer"] <= sc.node_count
        assert len(run["assignment"]) == run["slots"]
        tour = json.loads(run["tour_json"])
        assert tour["waypoints"][0] == tour["waypoints"][-1]
    print(
        f"MORE {more['utility_travel']:.3f} vs EDF {edf['utility_travel']:.3f} "
        f"(gamma {more['gamma']}, {more['stop_grids']} stops)"
    )

    text = ms.run_sweep("dt", [20.0, 30.0], [0, 1], schemes=["more", "random"])
    rows = list(csv.DictReader(io.StringIO(text)))
    assert len(rows) == 2 * 2 * 2
    assert text == ms.run_sweep("dt", [20.0, 30.0], [0, 1], schemes=["more", "random"], threads=2)

    for name, passed, detail in ms.oracle_check(seed=1):
        print(f"{'PASS' if passed else 'FAIL'} {name}: {detail}")
        assert passed
    print("smoke test ok")


if __name__ == "__main__":
    main()
