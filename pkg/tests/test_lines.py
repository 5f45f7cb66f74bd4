import numpy as np
import pytest

from sticky_landscape import geometry as geo
from sticky_landscape.lines import (
    LineManifold, TraceError, floppy_multiplicity, line_integrals, trace_all, trace_line, walk)

# (global id, endpoints, n_alpha, z) for the five n = 6 lines
REFERENCE_LINES = [
    (3, (1, 1), 180, 33.30),
    (4, (1, 1), 90, 16.65),
    (5, (1, 1), 360, 64.03),
    (6, (1, 1), 360, 126.89),
    (7, (1, 2), 180, 15.40),
]


def test_five_lines(lines6):
    assert len(lines6) == 5
    for (gid, ends, mult, z), line in zip(REFERENCE_LINES, lines6.lines):
        assert line.endpoints == ends
        assert line.multiplicity == mult
        assert line.multiplicity * line.zeta == pytest.approx(z, rel=0.02)


def test_nu_tallies(lines6):
    octa_line = lines6[5]
    assert lines6.nu[(2, octa_line.id)] == 12
    assert lines6.nu[(1, octa_line.id)] == 1
    assert lines6.nu[(1, 3)] == 4


def test_floppy_multiplicity_examples():
    mult = {1: 180, 2: 15}
    assert floppy_multiplicity([1, 2], {1: 1, 2: 12}, mult) == 180
    assert floppy_multiplicity([1, 1], {1: 4}, mult) == 360
    with pytest.raises(ValueError):
        floppy_multiplicity([1, 1], {1: 3}, {1: 1})


def test_octahedron_lines_end_at_polytetrahedron(cat6):
    octa = cat6[2]
    for bond in octa.graph.edges[:3]:
        line = trace_line(octa, bond, cat6)
        assert line.endpoints == (2, 1)


def test_sample_invariants(lines6, cat6):
    for line in lines6.lines:
        inc = np.diff(line.s)
        assert inc.min() >= 0.5 * 0.01 - 1e-9 and inc.max() <= 1.5 * 0.01 + 1e-9
        for x in line.samples[::10]:
            assert np.abs(geo.excesses(x, line.graph.bonds)).max() < 1e-10
            assert len(geo.internal_tangents(x, line.graph.bonds)) == 1
        assert line.graph.m == 3 * 6 - 7
        assert np.abs(np.diff(line.h)).max() < 10 * 0.01
        assert np.abs(np.diff(line.inertia)).max() < 10 * 0.01


def test_reverse_trace_agrees(lines6, cat6):
    for line in lines6.lines:
        end = cat6[line.end.mode]
        # the formed bond, expressed in the end mode's labels
        perm = list(line.end.perm)
        bond = tuple(perm.index(k) for k in line.end.formed)
        back = trace_line(end, bond, cat6)
        assert abs(back.length - line.length) < 2 * 0.01
        assert back.zeta == pytest.approx(line.zeta, rel=0.01)
        assert back.Q == pytest.approx(line.Q, rel=0.01)


def test_step_refinement(cat6, lines6):
    fine = trace_all(cat6, ds=0.005)
    for a, b in zip(lines6.lines, fine.lines):
        assert b.zeta == pytest.approx(a.zeta, rel=0.005)
        assert b.Q == pytest.approx(a.Q, rel=0.005)


def test_line_integrals_constant():
    s = np.linspace(0, 2.0, 11)
    line = LineManifold(None, None, s, np.full(11, 0.5), np.full(11, 4.0), None, None, None)
    zeta, Q = line_integrals(line)
    assert zeta == pytest.approx(4.0)
    assert Q == pytest.approx(1.0)


def test_n5_has_two_lines(cat5):
    assert len(trace_all(cat5)) == 2


def test_walk_rejects_rigid_start(cat6):
    mode = cat6[1]
    with pytest.raises(TraceError):
        walk(mode.representative, mode.graph, np.zeros(18))
