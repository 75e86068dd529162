"""Smoke test for the Python bindings.

Build and install first:

    pip install --no-build-isolation ./crates/python

then run `python python/smoke_test.py` (or `pytest python/smoke_test.py`).
"""

import math
import os
import tempfile

import cco


def test_grow_validate_round_trip():
    disk = cco.Domain.disk([0.0, 0.0], 1.0)
    params = cco.Params(40, seed=7)
    tree = cco.grow(params, disk)
    assert tree.terminal_count == 40
    assert tree.segment_count == 79
    report = tree.validate(disk)
    assert report["passes"], report
    assert report["all_inside_domain"]

    with tempfile.TemporaryDirectory() as d:
        path = os.path.join(d, "tree.csv")
        tree.write(path)
        back = cco.Tree.read(path, params)
    assert back.to_csv() == tree.to_csv()

    svg = tree.to_svg(disk)
    assert svg.count("<line") == tree.segment_count

    # continue growing from the reloaded tree
    params.k_term = 60
    bigger = cco.grow(params, disk, seed_tree=back, threads=2)
    assert bigger.terminal_count == 60


def test_segments_and_scaling():
    disk = cco.Domain.disk([0.0, 0.0], 1.0)
    tree = cco.grow(cco.Params(10, seed=1), disk)
    segs = tree.segments()
    roots = [s for s in segs if s["parent"] is None]
    assert len(roots) == 1
    assert math.isclose(roots[0]["flow"], tree.params.q_perf)


def test_local_bifurcation():
    h = math.sqrt(0.75)
    common = dict(f1=1.0, f2=1.0, p0=3.0, p1=0.0, p2=0.0, mu=math.pi / 8, gamma=3.0)
    r = cco.solve_radii([-1.0, 0.0], [0.5, h], [0.5, -h], [0.0, 0.0], **common)
    assert abs(r["r0"] - 2 ** (1 / 3) * r["r1"]) < 1e-6 * r["r0"]
    s = cco.optimal_bifurcation([0.0, 0.0], [1.0, 0.8], [1.0, -0.8], **common)
    assert s["cost"] > 0 and len(s["x_b"]) == 2


def test_errors():
    try:
        cco.Params(10, gamma=0.5).validate()
    except cco.Error as e:
        assert "gamma" in str(e)
    else:
        raise AssertionError("gamma = 0.5 accepted")
    params = cco.Params(10)
    try:
        cco.Tree.from_csv("id,parent\n", params)
    except cco.TreeFormatError:
        pass
    else:
        raise AssertionError("bad tree accepted")
    try:
        cco.Domain.sphere([0.0, 0.0, 0.0], -1.0)
    except cco.Error:
        pass
    else:
        raise AssertionError("negative radius accepted")


if __name__ == "__main__":
    for name, fn in sorted(globals().items()):
        if name.startswith("test_") and callable(fn):
            fn()
            print(f"{name}: ok")
