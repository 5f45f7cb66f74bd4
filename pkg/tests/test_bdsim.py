import math

import numpy as np
import pytest

from sticky_landscape import bdsim
from sticky_landscape import geometry as geo
from sticky_landscape.landscape import classifier_for
from sticky_landscape.statmech import PotentialSpec

SPEC = PotentialSpec(8.5, 30.0, 2.0)


def test_potential_continuous_and_consistent():
    r = np.array([1.0 - 1e-9, 1.0 + 1e-9, SPEC.rc - 1e-9, SPEC.rc + 1e-9])
    u, f = bdsim.potential_eval(r, SPEC)
    assert u[0] == pytest.approx(u[1], abs=1e-6)
    assert u[2] == pytest.approx(0.0, abs=1e-6) and u[3] == 0.0
    assert f[2] == pytest.approx(0.0, abs=1e-5)
    grid = np.linspace(0.95, SPEC.rc - 1e-3, 200)
    h = 1e-6
    du = (bdsim.potential_eval(grid + h, SPEC)[0] - bdsim.potential_eval(grid - h, SPEC)[0]) / (2 * h)
    assert np.allclose(bdsim.potential_eval(grid, SPEC)[1], -du, rtol=1e-5, atol=1e-4)


def test_well_depth():
    u, _ = bdsim.potential_eval(1.0, SPEC)
    assert float(u) == pytest.approx(SPEC.minimum)


def test_zero_force_step():
    params = bdsim.SimParams(n=2)
    x = np.array([[0, 0, 0], [5, 0, 0]], float)
    y = bdsim.step(x, params, bdsim.make_rng(0), noise=False)
    assert np.array_equal(x, y)


def test_bonded_pair_relaxes_to_contact():
    params = bdsim.SimParams(n=2)
    x = np.array([[0, 0, 0], [1.02, 0, 0]], float)
    for _ in range(2000):
        x = bdsim.step(x, params, None, noise=False)
    assert np.linalg.norm(x[1] - x[0]) == pytest.approx(1.0, abs=2e-3)


def test_free_diffusion_variance():
    params = bdsim.SimParams(n=2)
    g = np.arange(5) * 10.0
    x0 = np.array([[a, b, c] for a in g for b in g for c in g[:4]], float)
    nsteps = 2000
    x = bdsim.advance(x0.copy(), params, bdsim.make_rng(3), nsteps)
    var = np.var(x - x0)
    assert var == pytest.approx(2 * nsteps * params.dt, rel=0.1)


def test_stability_bound():
    with pytest.raises(ValueError):
        bdsim.SimParams(dt=1.0)
    p = bdsim.SimParams()
    assert p.dt == pytest.approx(p.stability_bound)
    assert p.bond_cutoff == pytest.approx(1 + 2 / 30)
    assert p.kappa == pytest.approx(16.156, abs=0.01)


def test_config_roundtrip():
    p = bdsim.SimParams(n=6, total_time=50.0, seed=4)
    q = bdsim.parse_config(bdsim.format_config(p))
    assert q == p
    text = "n = 6  # six spheres\n\nseed=2\n"
    assert bdsim.parse_config(text).seed == 2
    with pytest.raises(ValueError):
        bdsim.parse_config("colour = red")
    with pytest.raises(ValueError):
        bdsim.parse_config("n 6")


def test_classifier_examples(land6):
    clf = classifier_for(land6)
    octa = land6.catalog[2]
    g, hit = clf.classify(octa.representative, 1.0 + 1e-6)
    assert hit == (0, land6.global_id(0, 2))
    line = land6.lines.lines[0]
    x = line.samples[len(line.samples) // 2]
    assert clf.classify(x, 1.0 + 1e-6)[1] == (1, land6.global_id(1, line.id))
    far = np.arange(18, dtype=float).reshape(6, 3) * 3
    assert clf.classify(far, 1.01)[1] == (None, bdsim.UNCLASSIFIED)
    assert clf.classify_graph(g) == hit          # cached path


def test_trace_bookkeeping():
    p = bdsim.SimParams()
    a = bdsim.SimTrace(p, {(0, 1): 2.0}, {0: 2.0, 1: 1.0, 2: 0.5}, {(1, 1): 3})
    b = bdsim.SimTrace(p, {(0, 1): 1.0, (0, 2): 1.0}, {0: 2.0, 1: 1.0}, {(1, 2): 1})
    assert a.ratios(10.0) == pytest.approx((5.0, 5.0))
    a.merge(b)
    assert a.elapsed == pytest.approx(6.5)
    assert a.probabilities(0) == pytest.approx({1: 0.75, 2: 0.25})
    assert a.transition_matrix([1, 2]).tolist() == [[3, 1], [0, 0]]


def test_short_run(land6):
    clf = classifier_for(land6)
    p = bdsim.SimParams(total_time=0.5, seed=7)
    x0 = land6.catalog[1].representative
    tr = bdsim.run(p, clf, x0)
    assert tr.elapsed == pytest.approx(0.5, rel=0.05)
    assert tr.events[0][1] == 0
    again = bdsim.run(p, clf, x0)
    assert again.events == tr.events            # same seed, same trajectory


def _triangle_classifier():
    from sticky_landscape.clusters import ContactGraph
    tri = ContactGraph(3, ((0, 1), (0, 2), (1, 2)))
    return bdsim.Classifier(3, rigid=[(1, tri)])


def test_dissociation_restarts():
    x0 = np.array([[0, 0, 0], [1, 0, 0], [0.5, math.sqrt(3) / 2, 0]])
    p = bdsim.SimParams(n=3, E=3.0, total_time=3.0, dissociation_time=0.05, seed=4)
    tr = bdsim.run(p, _triangle_classifier(), x0)
    assert tr.restarts > 0
    assert tr.elapsed == pytest.approx(3.0, abs=p.classify_interval)
    times = [e[0] for e in tr.events]
    assert times == sorted(times)


def test_dissociated_start_is_an_error():
    x0 = np.array([[0, 0, 0], [5, 0, 0], [0, 5, 0]], float)
    p = bdsim.SimParams(n=3, total_time=1.0, dissociation_time=0.05)
    with pytest.raises(RuntimeError):
        bdsim.run(p, _triangle_classifier(), x0)
