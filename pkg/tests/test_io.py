import json

import numpy as np
import pytest

from levybridge.charfn import brownian, symmetric_stable
from levybridge.conditioned import killed_density_lattice
from levybridge.density import invert_density
from levybridge.io import (read_csv, read_density, read_killed_density, read_paths,
                           read_renewal, read_reports, write_csv, write_density,
                           write_killed_density, write_paths, write_renewal, write_reports)
from levybridge.ladder import estimate_renewal_mc, renewal_analytic
from levybridge.pathsim import make_rng, sample_bridge
from levybridge.stats import TestReport, bundle


@pytest.mark.parametrize("model", [brownian(), symmetric_stable(1.5)], ids=str)
def test_density_round_trip_bit_exact(model, tmp_path):
    f = invert_density(model, 0.7)
    path = write_density(tmp_path / "f.csv", f)
    g = read_density(path)
    assert np.array_equal(f.values, g.values)
    assert g.t == f.t and g.x_min == f.x_min and g.spacing == f.spacing
    assert g.total_mass == f.total_mass and g.model == model
    assert path.read_text().splitlines()[0] == "x,f"
    meta = json.loads((tmp_path / "f.csv.meta.json").read_text())
    assert {"model", "t", "spacing", "total_mass"} <= set(meta)


def test_paths_round_trip(tmp_path):
    p = sample_bridge(brownian(), 0.0, 0.0, 1.0, 8, make_rng(1), n_paths=3)
    write_paths(tmp_path / "p.csv", p, brownian(), seed=1)
    q, meta = read_paths(tmp_path / "p.csv")
    assert np.array_equal(q.values, p.values) and np.array_equal(q.times, p.times)
    assert q.kind == "bridge" and meta["seed"] == 1 and meta["model"] == brownian()


def test_single_path_round_trip(tmp_path):
    p = sample_bridge(brownian(), 0.0, 1.0, 1.0, 4, make_rng(2))
    write_paths(tmp_path / "p.csv", p)
    q, _ = read_paths(tmp_path / "p.csv")
    assert q.values.ndim == 1 and np.array_equal(q.values, p.values)


def test_renewal_round_trip(tmp_path):
    h = estimate_renewal_mc(brownian(), [0.5, 1.0, 2.0], 1e-3, 300, make_rng(3))
    write_renewal(tmp_path / "h.csv", h)
    g = read_renewal(tmp_path / "h.csv")
    assert np.array_equal(g.table_h, h.table_h) and np.array_equal(g.table_x, h.table_x)
    a = renewal_analytic(symmetric_stable(1.5))
    write_renewal(tmp_path / "a.csv", a, x=[0.5, 1.0])
    b = read_renewal(tmp_path / "a.csv")
    assert b.kind is a.kind and b.exponent == a.exponent


def test_killed_density_round_trip(tmp_path):
    q = killed_density_lattice(brownian(), 1.0, [0.5, 1.0], [0.5, 1.0, 2.0], 64)
    write_killed_density(tmp_path / "q.csv", q)
    r = read_killed_density(tmp_path / "q.csv")
    assert np.array_equal(r.values, q.values) and np.array_equal(r.y, q.y)
    assert r.values.shape == (2, 3)


def test_reports_round_trip(tmp_path):
    b = bundle("demo", [TestReport("a", 0.1, 0.3, 100, 120, seed=7),
                        TestReport("r", 1e-7, None, 5, kind="residual", threshold=1e-6)])
    write_reports(tmp_path / "r.jsonl", [b])
    lines = (tmp_path / "r.jsonl").read_text().splitlines()
    assert json.loads(lines[0])["bundle"] == "demo" and len(lines) == 3
    back = read_reports(tmp_path / "r.jsonl")
    assert [r.to_json() for r in back] == [r.to_json() for r in b.reports]


def test_csv_validation(tmp_path):
    with pytest.raises(ValueError):
        write_csv(tmp_path / "bad.csv", ["a", "b"], [[1.0, 2.0], [1.0]])
    write_csv(tmp_path / "ok.csv", ["a"], [[0.1, 1 / 3]])
    cols, meta = read_csv(tmp_path / "ok.csv")
    assert cols["a"][1] == 1 / 3 and meta == {}
