"""Smoke tests of the compiled module: constructions, worked values, experiments."""

import json
import math

import pytest

import fbmoo


def test_lattice_and_haar():
    lat = fbmoo.build_lattice(4)
    assert lat.cube_count() == 31
    root = lat.root()
    assert fbmoo.haar(root, 0.25) == pytest.approx(1.0)
    assert fbmoo.haar(root, 0.75) == pytest.approx(-1.0)
    half = lat.cube(1, 0)
    assert fbmoo.haar(half, 0.1) == pytest.approx(math.sqrt(2.0))

    shifted = fbmoo.build_lattice(2, "1/4")
    lefts = sorted(c.left() for c in shifted.all_cubes() if c.level == 2)
    assert lefts == pytest.approx([0.0, 0.25, 0.5, 0.75])

    with pytest.raises(Exception):
        fbmoo.build_lattice(25)


def test_bumps_and_luxemburg():
    one = fbmoo.GridFunction.constant(10, 1.0)
    root = fbmoo.DyadicCube(0, 0)
    assert fbmoo.avg(one, root, 1.0, 0.0) == pytest.approx(1.0)

    c = fbmoo.GridFunction.constant(8, 2.0)
    lux = fbmoo.luxemburg_norm(c, root, "expl", 1.0)
    assert lux == pytest.approx(2.0 / math.log(2.0), rel=1e-7)


def test_sparse_pipeline():
    f = fbmoo.GridFunction.indicator(8, 0.0, 0.25)
    f4 = fbmoo.GridFunction(8, [4.0 * v for v in f.values])
    g = fbmoo.GridFunction.constant(8, 1.0)
    fam = fbmoo.build_sparse_cz([f4], g, fbmoo.DyadicCube(0, 0), 0.5)
    ok, violation, reason = fbmoo.is_sparse(fam)
    assert ok and violation == -1 and reason == ""
    levels = {(c.level, c.index) for c in fam.cubes}
    assert (2, 0) in levels

    back = fbmoo.sparse_from_json(fam.to_json())
    assert fbmoo.is_sparse(back)[0]


def test_fractional_integral_value():
    one = fbmoo.GridFunction.constant(12, 1.0)
    v = fbmoo.fractional_integral([one], 0.0, fbmoo.KernelSpec(1, 0.5))
    assert v == pytest.approx(2.0, rel=0.02)


def test_exponent_tuple():
    e = fbmoo.extrapolation_exponents(1, "0", ["2"], ["1"], "inf")
    assert e.ptilde == pytest.approx(2.0)
    assert e.zeta == pytest.approx(1.0)
    assert e.theta_sharp == pytest.approx(2.0)


def test_experiments_and_determinism():
    catalog = fbmoo.experiment_catalog()
    assert len(catalog) >= 7
    assert all(entry["claim"] for entry in catalog)

    cfg = json.dumps({"experiment": "sparse_constructor", "count": 10,
                      "resolution": 7, "seed": 5})
    report = json.loads(fbmoo.run_experiment(cfg))
    assert report["pass"] is True
    assert fbmoo.run_experiment_comparable(cfg) == fbmoo.run_experiment_comparable(cfg)
