"""Acceptance checks. Each test records a verdict line under its criterion key;
the lines are printed in the terminal summary."""

import math

import numpy as np
import pytest

from sticky_landscape import bdsim
from sticky_landscape import faces as fc
from sticky_landscape import geometry as geo
from sticky_landscape import kinetics as kin
from sticky_landscape import statmech as sm
from sticky_landscape.clusters import enumerate_catalog, load_catalog
from sticky_landscape.landscape import classifier_for, compute_landscape
from sticky_landscape.lines import trace_all

# reference n = 6 table rows: h_mean, I_mean, n_alpha, z and corners
LINE_ROWS = [  # lines are matched by length because two share (corners, n_alpha)
    (0.85, 0.066, 3.30, 180, 33.30, (1, 1)),
    (0.89, 0.063, 3.29, 90, 16.65, (1, 1)),
    (0.95, 0.057, 3.29, 360, 64.03, (1, 1)),
    (1.47, 0.069, 3.49, 360, 126.89, (1, 1)),
    (0.63, 0.045, 3.04, 180, 15.40, (1, 2)),
]
FACE_ROWS = {
    ((1, 1, 1), 180): (0.075, 3.37, 15.99),
    ((1, 1, 1, 1, 1), 360): (0.075, 3.76, 202.45),
    ((1, 1, 1, 1), 180): (0.083, 4.01, 130.10),
    ((1, 1, 1, 1), 360): (0.064, 3.53, 87.44),
    ((1, 1, 2), 180): (0.057, 3.17, 7.52),
    ((1, 1, 1, 1, 1, 1), 360): (0.073, 3.79, 284.23),
    ((1, 1, 2), 90): (0.055, 3.17, 3.76),
    ((1, 1, 1, 1, 1), 72): (0.064, 3.56, 25.33),
    ((1, 1, 1), 360): (0.067, 3.48, 53.23),
    ((1, 1, 1, 1, 2), 360): (0.063, 3.59, 129.53),
    ((1, 1, 1, 2), 360): (0.054, 3.27, 37.56),
    ((1, 1, 1), 120): (0.081, 4.07, 105.52),
    ((1, 1, 1, 1), 90): (0.072, 3.77, 57.97),
}


def _within(x, ref, rel):
    return abs(x - ref) <= rel * abs(ref)


def _cyclic_equal(a, b):
    a, b = list(a), list(b)
    rots = [b[i:] + b[:i] for i in range(len(b))]
    rev = b[::-1]
    rots += [rev[i:] + rev[:i] for i in range(len(b))]
    return a in rots


# --------------------------------------------------------------------------
# 1. mode counts

@pytest.mark.parametrize("n,expected", [(5, (1, 2, 4)), (6, (2, 5, 13))])
def test_mode_counts(n, expected, land5, land6, record):
    land = land5 if n == 5 else land6
    counts = land.summary().counts()
    assert record("C1", counts == expected, f"n={n} {counts}")


@pytest.mark.slow
@pytest.mark.parametrize("n,expected", [(7, (5, 16, 51)), (8, (13, 75, 281))])
def test_mode_counts_large(n, expected, record):
    land = compute_landscape(n=n, mesh=False)
    counts = (len(land.catalog), len(land.lines), len(land.faces))
    assert record("C1", counts == expected, f"n={n} {counts}")


# --------------------------------------------------------------------------
# 2. partition totals

def test_totals_n6(land6, record):
    Z0, Z1, Z2 = land6.summary().Z
    r1, r2 = Z1 / Z0, Z2 / Z1
    ok = (_within(Z0, 36.1, 0.01) and _within(Z1, 256, 0.02) and _within(Z2, 1140, 0.05)
          and abs(r1 - 7.1) <= 0.1 and abs(r2 - 4.5) <= 0.1)
    assert record("C2", ok, f"n=6 Z=({Z0:.2f}, {Z1:.1f}, {Z2:.0f}) ratios {r1:.3f}, {r2:.3f}")


def test_totals_n6_strict(land6_strict, record):
    Z0, Z1, Z2 = land6_strict.summary().Z
    r2 = Z2 / Z1
    assert record("C2", abs(r2 - 4.5) <= 0.05, f"strict Z2/Z1={r2:.3f} (window 4.45-4.55)")


def test_totals_n5(land5, record):
    Z0, Z1, Z2 = land5.summary().Z
    ok = _within(Z0, 10.7, 0.01) and _within(Z1, 73.8, 0.02) and _within(Z2, 545, 0.05)
    assert record("C2", ok, f"n=5 Z=({Z0:.3f}, {Z1:.2f}, {Z2:.1f}) vs (10.7, 73.8, 545)")


# --------------------------------------------------------------------------
# 3. per-mode table

def test_golden_rigid_and_lines(land6, record):
    bad = []
    for mode, (h, inertia, n_alpha, z) in zip(
            land6.catalog.rigid, [(0.061, 3.16, 180, 34.64), (0.034, 2.83, 15, 1.44)]):
        if not (_within(mode.h, h, 0.02) and _within(mode.inertia, inertia, 0.02)
                and mode.multiplicity == n_alpha and _within(mode.multiplicity * mode.h
                                                             * mode.inertia, z, 0.02)):
            bad.append(f"rigid {mode.id}")
    for line in land6.lines.lines:
        ref = min(LINE_ROWS, key=lambda r: abs(r[0] - line.length))
        _, h, inertia, n_alpha, z, ends = ref
        if not (_within(line.h_mean, h, 0.02) and _within(line.inertia_mean, inertia, 0.02)
                and line.multiplicity == n_alpha
                and _within(line.multiplicity * line.zeta, z, 0.02)
                and tuple(sorted(line.endpoints)) == ends):
            bad.append(f"line {line.id}")
    assert record("C3", not bad, "0-D and 1-D rows" + (f" off: {bad}" if bad else " match"))


def test_golden_faces(land6, record):
    bad = []
    for face in land6.faces.faces:
        key = (tuple(sorted(face.corner_modes)), face.multiplicity)
        if key not in FACE_ROWS:
            bad.append(f"face {face.id} {key} unmatched")
            continue
        h, inertia, z = FACE_ROWS[key]
        if not (_within(face.h_mean, h, 0.02) and _within(face.inertia_mean, inertia, 0.02)
                and _within(face.multiplicity * face.zeta, z, 0.05)):
            bad.append(f"face {face.id}")
    octa_face = [f for f in land6.faces.faces if sorted(f.corner_modes) == [1, 1, 1, 2]][0]
    glob = [land6.global_id(1, k) for k in octa_face.edge_classes]
    edges_ok = _cyclic_equal(glob, [7, 5, 5, 7])
    ok = not bad and edges_ok and _cyclic_equal(octa_face.corner_modes, [1, 1, 2, 1])
    assert record("C3", ok, f"2-D rows {'match' if not bad else bad}; "
                            f"1,1,1,2 face edges {glob}")


# --------------------------------------------------------------------------
# 4. occupation ratio

def test_occupation_ratio(cat6, record):
    pi = kin.equilibrium_probabilities(cat6)
    ratio = pi[1] / pi[2]
    assert record("C4", abs(ratio - 24) <= 1, f"ratio {ratio:.2f}")


# --------------------------------------------------------------------------
# 5. rates

def test_expected_counts(land6, record):
    Z = land6.summary().Z
    net = kin.assemble_rates(land6.lines, land6.catalog, Z0=Z[0], Z=Z)
    C = net.expected_counts(2300, kappa=16)
    Cr = net.expected_counts(2300, kappa=16, convention="restricted")
    factor = 1 / (1 + Z[1] / (16 * Z[0]))
    ok = (abs(C[0, 0] - 1570) <= 78 and abs(C[0, 1] - 153) <= 24 and C[1, 1] == 0
          and np.allclose(Cr, C * factor, rtol=1e-12))
    assert record("C5", ok, f"poly-poly {C[0, 0]:.1f}, poly-octa {C[0, 1]:.1f}, "
                            f"octa-octa {C[1, 1]:g}, restricted factor {factor:.4f}")


# --------------------------------------------------------------------------
# 6. sticky parameter

def test_kappa_closed_form(record):
    k1 = float(sm.kappa_closed_form(sm.PotentialSpec(8.5, 30)))
    k2 = float(sm.kappa_closed_form(sm.PotentialSpec(10, 50)))
    ok = abs(k1 - 16) <= 0.5 and abs(k2 - 31) <= 1
    assert record("C6", ok, f"kappa {k1:.3f} and {k2:.3f}")


# --------------------------------------------------------------------------
# 7. simulation

@pytest.mark.slow
def test_simulation(land6, record):
    params = bdsim.SimParams(n=6, E=8.5, rho=30, total_time=2300, seed=1)
    clf = classifier_for(land6)
    trace = bdsim.run(params, clf, land6.catalog[1].representative)
    kappa = params.kappa
    r1, r2 = trace.ratios(kappa)
    ok_ratio = abs(r1 - 5.5) <= 0.8 and abs(r2 - 3.4) <= 0.6
    record("C7", ok_ratio, f"ratios {r1:.2f}, {r2:.2f} vs 5.5, 3.4")

    scale = trace.elapsed / 2300
    C = trace.transition_matrix([1, 2])
    band = lambda c, ref: abs(c - ref * scale) <= 3 * math.sqrt(ref * scale)
    ok_counts = band(C[0, 0], 1256) and band(C[0, 1], 124) and band(C[1, 0], 124)
    record("C7", ok_counts, f"counts {C.tolist()} vs 1256/124 scaled by {scale:.3f}")

    Z = land6.summary().Z
    net = kin.assemble_rates(land6.lines, land6.catalog, Z0=Z[0], Z=Z)
    report = bdsim.run_and_compare(trace, land6.summary(), net, kappa)
    rho = report["rank_correlation"]
    record("C7", rho > 0.9, f"rank correlation {rho:.3f}")
    assert ok_ratio and ok_counts and rho > 0.9


# --------------------------------------------------------------------------
# 8. property suites

def test_property_invariance_and_jacobian(cat6, record):
    rng = np.random.default_rng(11)
    worst_h = worst_i = 0.0
    for mode in cat6.rigid:
        x = mode.representative
        y = geo.center(x @ geo.random_rotation(rng).T + rng.normal(size=3))
        worst_h = max(worst_h, abs(geo.vibrational_factor(y, mode.graph.bonds) / mode.h - 1))
        worst_i = max(worst_i, abs(geo.rotational_factor(y) / mode.inertia - 1))
    x = rng.normal(size=(6, 3)) * 1.5
    bonds = geo.pair_index(6)
    J = geo.constraint_jacobian(x, bonds)
    h = 1e-5
    fd = np.empty_like(J)
    for k in range(18):
        e = np.zeros(18)
        e[k] = h
        fd[:, k] = (geo.excesses(x.ravel() + e, bonds) - geo.excesses(x.ravel() - e, bonds)) / (2 * h)
    jac_err = np.abs(J - fd).max()
    ok = worst_h < 1e-9 and worst_i < 1e-9 and jac_err < 1e-6
    assert record("C8", ok, f"invariance {max(worst_h, worst_i):.1e}, Jacobian {jac_err:.1e}")


def test_property_projection_and_nullspace(cat6, record):
    rng = np.random.default_rng(5)
    dims_ok, idem = True, 0.0
    for mode in cat6.rigid:
        x = mode.representative
        for drop in (0, 1, 2):
            bonds = mode.graph.bonds[drop:]
            dims_ok &= len(geo.internal_tangents(x, bonds)) == drop
        bonds = mode.graph.bonds[2:]
        y = geo.newton_project(x + 0.02 * rng.normal(size=x.shape), bonds)
        idem = max(idem, np.abs(geo.newton_project(y, bonds) - y).max())
    ok = dims_ok and idem < 1e-10
    assert record("C8", ok, f"null-space dims 0/1/2 {'ok' if dims_ok else 'wrong'}, "
                            f"projection idempotence {idem:.1e}")


def test_property_committor_rates_yields(land6, record):
    mono = all(np.all(np.diff(kin.committor(l).q) >= 0) and kin.committor(l).q[0] == 0
               and kin.committor(l).q[-1] == 1 for l in land6.lines.lines)
    net = kin.assemble_rates(land6.lines, land6.catalog)
    sym = np.array_equal(net.R, net.R.T)
    Z = land6.summary().Z
    ysum = max(abs(sum(sm.yields(Z, k)) - 1) for k in (0.1, 1, 16, 1e4))
    ok = mono and sym and ysum < 1e-12
    assert record("C8", ok, f"committor {'ok' if mono else 'bad'}, rate symmetry "
                            f"{'exact' if sym else 'broken'}, yields {ysum:.1e}")


def test_property_euler(land6, record):
    chi = [f.mesh.euler_characteristic() for f in land6.faces.faces]
    assert record("C8", all(c == 1 for c in chi), f"Euler characteristics {set(chi)}")


def test_property_refinement(cat6, lines6, boundaries6, record):
    fine = trace_all(cat6, ds=0.005)
    line_change = max(abs(b.zeta / a.zeta - 1) for a, b in zip(lines6.lines, fine.lines))
    face = boundaries6.faces[0]
    mode = cat6[face.corners[0].mode]
    broken = [e for e in mode.graph.edges if e not in set(face.graph.edges)]
    coarse = fc.compute_face(fc.trace_boundary(mode, broken, cat6, ds=0.05))
    finer = fc.compute_face(fc.trace_boundary(mode, broken, cat6, ds=0.025))
    face_change = abs(finer.zeta / coarse.zeta - 1)
    ok = line_change < 0.005 and face_change < 0.02
    assert record("C8", ok, f"refinement lines {100 * line_change:.3f}%, "
                            f"face {100 * face_change:.2f}%")


@pytest.mark.parametrize("n", [5, 6])
def test_property_enumeration(n, record):
    shipped = load_catalog(n=n)
    found = enumerate_catalog(n)
    ok = len(found) == len(shipped) and all(shipped.identify(m.graph) for m in found.rigid)
    assert record("C8", ok, f"enumeration n={n}: {len(found)} modes")
